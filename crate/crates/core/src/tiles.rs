//! Tiles, bitiles and quartiles in the time-frequency plane, the tile order,
//! and executable forms of the lacunarity and restriction properties.
//!
//! A tile with parameters `(k, n, l)` is `I × ω` with
//! `I = [2^{-k} n, 2^{-k}(n+1))` and `ω = [2^k l, 2^k (l+1))`; bitiles and
//! quartiles use frequency length `2^{k+1}` and `2^{k+2}`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::dyadic::{AmbientGrid, DyadicInterval};
use crate::error::{Error, Result};
use crate::num::DyadicRational;

/// Common geometry of tiles, bitiles and quartiles.
pub trait Rect: Copy + Eq + Ord + Hash + fmt::Debug + Send + Sync {
    /// `log2` of the area.
    const AREA_LOG2: i32;

    fn interval(&self) -> DyadicInterval;
    fn freq(&self) -> DyadicInterval;

    /// `k` such that `|I| = 2^{-k}`.
    fn k(&self) -> i32 {
        -self.interval().scale
    }

    fn n(&self) -> i64 {
        self.interval().index
    }

    fn l(&self) -> i64 {
        self.freq().index
    }

    /// Frequency center `ξ`.
    fn center(&self) -> DyadicRational {
        self.freq().center()
    }

    fn in_grid(&self, grid: &AmbientGrid) -> bool {
        grid.contains_space(&self.interval()) && grid.contains_freq(&self.freq())
    }
}

macro_rules! rect_type {
    ($name:ident, $area:expr, $doc:expr) => {
        #[doc = $doc]
        #[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
        pub struct $name {
            i: DyadicInterval,
            w: DyadicInterval,
        }

        impl $name {
            /// Builds the rectangle from its `(k, n, l)` parameters.
            pub const fn new(k: i32, n: i64, l: i64) -> Self {
                $name {
                    i: DyadicInterval::new(-k, n),
                    w: DyadicInterval::new(k + $area, l),
                }
            }

            pub fn from_parts(i: DyadicInterval, w: DyadicInterval) -> Result<Self> {
                if i.scale + w.scale != $area {
                    return Err(Error::InvalidParameter(format!(
                        "{} × {} does not have area 2^{}",
                        i, w, $area
                    )));
                }
                Ok($name { i, w })
            }
        }

        impl Rect for $name {
            const AREA_LOG2: i32 = $area;
            fn interval(&self) -> DyadicInterval {
                self.i
            }
            fn freq(&self) -> DyadicInterval {
                self.w
            }
        }

        /// Ordered by scale, then spatial index, then frequency index.
        impl Ord for $name {
            fn cmp(&self, other: &Self) -> Ordering {
                (self.k(), self.n(), self.l()).cmp(&(other.k(), other.n(), other.l()))
            }
        }

        impl PartialOrd for $name {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{} × {}", self.i, self.w)
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                RectRepr { k: self.k(), n: self.n(), l: self.l() }.serialize(s)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let r = RectRepr::deserialize(d)?;
                Ok($name::new(r.k, r.n, r.l))
            }
        }
    };
}

#[derive(Serialize, Deserialize)]
struct RectRepr {
    k: i32,
    n: i64,
    l: i64,
}

rect_type!(Tile, 0, "Dyadic rectangle of area one.");
rect_type!(Bitile, 1, "Dyadic rectangle of area two.");
rect_type!(Quartile, 2, "Dyadic rectangle of area four.");

impl Bitile {
    /// Lower (`j = 1`) or upper (`j = 2`) frequency half.
    pub fn subtile(&self, j: usize) -> Tile {
        assert!((1..=2).contains(&j), "bitile subtile index {j}");
        Tile::new(self.k(), self.n(), 2 * self.l() + j as i64 - 1)
    }

    pub fn subtiles(&self) -> (Tile, Tile) {
        (self.subtile(1), self.subtile(2))
    }

    /// `ω_{P_1} ∪ ω_{P_2}`, i.e. `ω_P` itself.
    pub fn both_halves(&self) -> DyadicInterval {
        self.freq()
    }
}

impl Quartile {
    /// The `j`-th lowest frequency quarter, `j ∈ {1, 2, 3}`.
    pub fn subtile(&self, j: usize) -> Tile {
        assert!((1..=3).contains(&j), "quartile subtile index {j}");
        Tile::new(self.k(), self.n(), 4 * self.l() + j as i64 - 1)
    }

    /// The sub-bitile `P_{12} = P_1 ∪ P_2`.
    pub fn p12(&self) -> Bitile {
        Bitile::new(self.k(), self.n(), 2 * self.l())
    }

    pub fn subtiles(&self) -> (Tile, Tile, Tile, Bitile) {
        (self.subtile(1), self.subtile(2), self.subtile(3), self.p12())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum TileOrder {
    Less,
    Equal,
    Greater,
    Incomparable,
}

/// `P < P'` iff `I_P ⊊ I_{P'}` and `ω_{P'} ⊆ ω_P`.
pub fn tile_order<T: Rect>(p: &T, q: &T) -> TileOrder {
    if p == q {
        TileOrder::Equal
    } else if strictly_below(p, q) {
        TileOrder::Less
    } else if strictly_below(q, p) {
        TileOrder::Greater
    } else {
        TileOrder::Incomparable
    }
}

pub fn strictly_below<T: Rect>(p: &T, q: &T) -> bool {
    let (ip, iq) = (p.interval(), q.interval());
    ip != iq && ip.subset_of(&iq) && q.freq().subset_of(&p.freq())
}

/// `P ≤ P'`.
pub fn below_or_equal<T: Rect>(p: &T, q: &T) -> bool {
    p == q || strictly_below(p, q)
}

/// True iff the rectangles do not intersect.
pub fn tiles_disjoint<T: Rect>(p: &T, q: &T) -> bool {
    !(p.interval().intersects(&q.interval()) && p.freq().intersects(&q.freq()))
}

/// Truth of "if `P'_i ≤ P_i` then `P'_j ∩ P_j = ∅`" for one pair.
pub fn check_lacunar(p: &Quartile, p_prime: &Quartile, i: usize, j: usize) -> bool {
    assert!(i != j, "lacunar check needs distinct indices");
    !below_or_equal(&p_prime.subtile(i), &p.subtile(i)) || tiles_disjoint(&p_prime.subtile(j), &p.subtile(j))
}

/// `{P ∈ P_coll : P_i ≤ Q_j for some Q ∈ D}`, for `D` whose `j`-tiles are
/// pairwise disjoint.
pub fn biest_restriction(p_coll: &[Quartile], d: &[Quartile], i: usize, j: usize) -> Result<Vec<Quartile>> {
    for (a, qa) in d.iter().enumerate() {
        for qb in &d[a + 1..] {
            if !tiles_disjoint(&qa.subtile(j), &qb.subtile(j)) {
                return Err(Error::Precondition(format!(
                    "the {j}-tiles of {qa} and {qb} intersect"
                )));
            }
        }
    }
    Ok(p_coll
        .iter()
        .filter(|p| d.iter().any(|q| below_or_equal(&p.subtile(i), &q.subtile(j))))
        .copied()
        .collect())
}

/// For every `P ∈ P_coll`, `Q ∈ D` with `P_i ∩ Q_j ≠ ∅`, checks
/// `ω_{Q_j} ⊆ ω_{P_i}` iff `P ∈ restricted`.
pub fn biest_iff_holds(p_coll: &[Quartile], d: &[Quartile], i: usize, j: usize, restricted: &[Quartile]) -> bool {
    p_coll.iter().all(|p| {
        let member = restricted.contains(p);
        d.iter().all(|q| {
            let (pi, qj) = (p.subtile(i), q.subtile(j));
            tiles_disjoint(&pi, &qj) || qj.freq().subset_of(&pi.freq()) == member
        })
    })
}

fn enumerate<T: Rect>(grid: &AmbientGrid, make: impl Fn(i32, i64, i64) -> T) -> Vec<T> {
    let m = grid.m() as i32;
    let mut out = Vec::new();
    for k in -m..=(m - T::AREA_LOG2) {
        let spatial = 1i64 << (m + k);
        let freq = 1i64 << (m - k - T::AREA_LOG2);
        for n in 0..spatial {
            for l in 0..freq {
                out.push(make(k, n, l));
            }
        }
    }
    out
}

pub fn enumerate_tiles(grid: &AmbientGrid) -> Vec<Tile> {
    enumerate(grid, Tile::new)
}

pub fn enumerate_bitiles(grid: &AmbientGrid) -> Vec<Bitile> {
    enumerate(grid, Bitile::new)
}

pub fn enumerate_quartiles(grid: &AmbientGrid) -> Vec<Quartile> {
    enumerate(grid, Quartile::new)
}

/// A finite, sorted, duplicate-free set of rectangles inside one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Collection<T: Rect> {
    grid: AmbientGrid,
    members: Vec<T>,
}

pub type TileCollection = Collection<Quartile>;
pub type BitileCollection = Collection<Bitile>;

impl<T: Rect> Collection<T> {
    pub fn new(grid: &AmbientGrid, mut members: Vec<T>) -> Result<Self> {
        if let Some(bad) = members.iter().find(|p| !p.in_grid(grid)) {
            return Err(Error::OutOfGrid { what: format!("{bad:?}"), m: grid.m() });
        }
        members.sort();
        members.dedup();
        Ok(Collection { grid: grid.clone(), members })
    }

    pub fn empty(grid: &AmbientGrid) -> Self {
        Collection { grid: grid.clone(), members: Vec::new() }
    }

    pub fn grid(&self) -> &AmbientGrid {
        &self.grid
    }

    pub fn members(&self) -> &[T] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, p: &T) -> bool {
        self.members.binary_search(p).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.members.iter()
    }

    /// Same grid, different members (filtered through grid checks).
    pub fn with_members(&self, members: Vec<T>) -> Self {
        Collection::new(&self.grid, members).expect("members drawn from the same grid")
    }

    pub fn filter(&self, keep: impl Fn(&T) -> bool) -> Self {
        Collection { grid: self.grid.clone(), members: self.members.iter().filter(|p| keep(p)).copied().collect() }
    }

    pub fn without(&self, removed: &[T]) -> Self {
        let mut removed = removed.to_vec();
        removed.sort();
        self.filter(|p| removed.binary_search(p).is_err())
    }
}

impl<'a, T: Rect> IntoIterator for &'a Collection<T> {
    type Item = &'a T;
    type IntoIter = std::slice::Iter<'a, T>;
    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

#[derive(Serialize, Deserialize)]
struct QuartileFile {
    #[serde(rename = "M")]
    m: u32,
    quartiles: Vec<Quartile>,
}

#[derive(Serialize, Deserialize)]
struct BitileFile {
    #[serde(rename = "M")]
    m: u32,
    bitiles: Vec<Bitile>,
}

impl Serialize for Collection<Quartile> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QuartileFile { m: self.grid.m(), quartiles: self.members.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Collection<Quartile> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let f = QuartileFile::deserialize(d)?;
        let grid = AmbientGrid::new(f.m).map_err(D::Error::custom)?;
        Collection::new(&grid, f.quartiles).map_err(D::Error::custom)
    }
}

impl Serialize for Collection<Bitile> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BitileFile { m: self.grid.m(), bitiles: self.members.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Collection<Bitile> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let f = BitileFile::deserialize(d)?;
        let grid = AmbientGrid::new(f.m).map_err(D::Error::custom)?;
        Collection::new(&grid, f.bitiles).map_err(D::Error::custom)
    }
}
