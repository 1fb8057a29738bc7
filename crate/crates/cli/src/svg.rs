//! Phase-plane drawing: time on x, frequency on y, one rectangle per tile.

use std::fmt::Write;

use wtf_core::tiles::{Quartile, Rect, TileCollection};

/// Side of the drawing area in pixels.
const SIDE: f64 = 512.0;
const MARGIN: f64 = 8.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Tiles are filled with the colour of the first tree containing them;
/// tiles in no tree are left unfilled.
pub fn render(coll: &TileCollection, trees: &[Vec<Quartile>]) -> String {
    let scale = SIDE / 2f64.powi(coll.grid().m() as i32);
    let total = SIDE + 2.0 * MARGIN;
    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#).unwrap();
    writeln!(out, r##"<rect x="{MARGIN}" y="{MARGIN}" width="{SIDE}" height="{SIDE}" fill="#ffffff" stroke="#888888"/>"##).unwrap();
    for q in coll {
        let (i, w) = (q.interval(), q.freq());
        let x = MARGIN + i.start().to_f64() * scale;
        let y = MARGIN + SIDE - w.end().to_f64() * scale;
        let width = i.length().to_f64() * scale;
        let height = w.length().to_f64() * scale;
        let fill = trees.iter().position(|t| t.contains(q)).map_or("none", |t| PALETTE[t % PALETTE.len()]);
        writeln!(
            out,
            r##"<rect x="{x:.3}" y="{y:.3}" width="{width:.3}" height="{height:.3}" fill="{fill}" fill-opacity="0.6" stroke="#000000" stroke-width="0.5"><title>k={} n={} l={}</title></rect>"##,
            q.k(),
            q.n(),
            q.l()
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Tree member lists found anywhere in a JSON document: every `forest`
/// array, or a top-level array of trees.
pub fn trees_in(doc: &serde_json::Value) -> Result<Vec<Vec<Quartile>>, serde_json::Error> {
    let mut found = Vec::new();
    if let serde_json::Value::Array(items) = doc {
        if items.iter().all(|t| t.get("members").is_some()) {
            collect_trees(items, &mut found)?;
            return Ok(found);
        }
    }
    walk(doc, &mut found)?;
    Ok(found)
}

fn walk(v: &serde_json::Value, found: &mut Vec<Vec<Quartile>>) -> Result<(), serde_json::Error> {
    match v {
        serde_json::Value::Object(map) => {
            for (key, child) in map {
                match (key.as_str(), child) {
                    ("forest", serde_json::Value::Array(items)) => collect_trees(items, found)?,
                    _ => walk(child, found)?,
                }
            }
        }
        serde_json::Value::Array(items) => {
            for child in items {
                walk(child, found)?;
            }
        }
        _ => {}
    }
    Ok(())
}

fn collect_trees(items: &[serde_json::Value], found: &mut Vec<Vec<Quartile>>) -> Result<(), serde_json::Error> {
    for t in items {
        found.push(serde_json::from_value(t["members"].clone())?);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use wtf_core::dyadic::AmbientGrid;

    fn coll() -> TileCollection {
        let grid = AmbientGrid::new(2).unwrap();
        TileCollection::new(&grid, vec![Quartile::new(0, 0, 0), Quartile::new(-1, 1, 0)]).unwrap()
    }

    #[test]
    fn one_rectangle_per_tile() {
        let svg = render(&coll(), &[]);
        assert_eq!(svg.matches("<rect").count(), 3);
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn tree_members_are_coloured() {
        let c = coll();
        let svg = render(&c, &[vec![c.members()[0]]]);
        assert_eq!(svg.matches(PALETTE[0]).count(), 1);
        assert_eq!(render(&c, &[vec![c.members()[0]]]), svg);
    }

    #[test]
    fn trees_found_in_reports_and_arrays() {
        let q = serde_json::json!({"k": 0, "n": 0, "l": 0});
        let tree = serde_json::json!({"top": q, "tree_type": 1, "members": [q]});
        let report = serde_json::json!({"levels": [{"forest": [tree.clone()]}, {"forest": [tree.clone(), tree.clone()]}]});
        assert_eq!(trees_in(&report).unwrap().len(), 3);
        assert_eq!(trees_in(&serde_json::json!([tree])).unwrap(), vec![vec![Quartile::new(0, 0, 0)]]);
    }
}
