//! Admissible exponent tuples and the vertex table of the restricted-type polytope.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Serialize, Serializer};

use crate::VerifyError;

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// `(α_1, α_2, α_3)` with `Σ α_i = 1`, every `α_i < 1`, and at most one `α_i < 0`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct AdmissibleTuple {
    alpha: [Rational64; 3],
}

impl AdmissibleTuple {
    pub fn new(a1: Rational64, a2: Rational64, a3: Rational64) -> Result<Self, VerifyError> {
        let alpha = [a1, a2, a3];
        let zero = Rational64::from_integer(0);
        let one = Rational64::from_integer(1);
        if a1 + a2 + a3 != one {
            return Err(VerifyError::Parameter(format!("tuple {alpha:?} does not sum to 1")));
        }
        if alpha.iter().any(|a| *a >= one) {
            return Err(VerifyError::Parameter(format!("tuple {alpha:?} has an entry ≥ 1")));
        }
        if alpha.iter().filter(|a| **a < zero).count() > 1 {
            return Err(VerifyError::Parameter(format!("tuple {alpha:?} has two bad indices")));
        }
        Ok(AdmissibleTuple { alpha })
    }

    pub fn alpha(&self) -> [Rational64; 3] {
        self.alpha
    }

    pub fn to_f64(&self) -> [f64; 3] {
        self.alpha.map(|a| *a.numer() as f64 / *a.denom() as f64)
    }

    /// The bad index (1-based), if any.
    pub fn bad_index(&self) -> Option<usize> {
        self.alpha.iter().position(|a| *a < Rational64::from_integer(0)).map(|i| i + 1)
    }

    pub fn is_good(&self) -> bool {
        self.bad_index().is_none()
    }

    /// `|E_1|^{α_1} |E_2|^{α_2} |E_3|^{α_3}`.
    pub fn weight(&self, measures: [f64; 3]) -> f64 {
        self.to_f64().iter().zip(measures).map(|(a, e)| e.powf(*a)).product()
    }
}

impl fmt::Display for AdmissibleTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.alpha[0], self.alpha[1], self.alpha[2])
    }
}

impl Serialize for AdmissibleTuple {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Vertices of the hexagon and the three midpoints.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Vertex {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    M12,
    M34,
    M56,
}

impl Vertex {
    pub const ALL: [Vertex; 9] =
        [Vertex::A1, Vertex::A2, Vertex::A3, Vertex::A4, Vertex::A5, Vertex::A6, Vertex::M12, Vertex::M34, Vertex::M56];

    pub const HEXAGON: [Vertex; 6] = [Vertex::A1, Vertex::A2, Vertex::A3, Vertex::A4, Vertex::A5, Vertex::A6];

    /// Exact coordinates.
    pub fn coordinates(&self) -> [Rational64; 3] {
        let h = r(1, 2);
        let (z, o) = (r(0, 1), r(1, 1));
        match self {
            Vertex::A1 => [-h, o, h],
            Vertex::A2 => [h, o, -h],
            Vertex::A3 => [o, h, -h],
            Vertex::A4 => [o, -h, h],
            Vertex::A5 => [h, -h, o],
            Vertex::A6 => [-h, h, o],
            Vertex::M12 => [z, o, z],
            Vertex::M34 => [o, z, z],
            Vertex::M56 => [z, z, o],
        }
    }

    /// An admissible tuple at distance `O(1/16)` from the vertex.
    ///
    /// Hexagon vertices move along an edge so that the two largest entries stay
    /// `≥ 1/2`, which is what the choice `θ_j = 2α_j − 1` needs. Midpoints move
    /// towards a neighbouring vertex keeping a good tuple.
    pub fn adjacent(&self) -> AdmissibleTuple {
        let s = r(1, 16);
        let [a1, a2, a3] = self.coordinates();
        let (b1, b2, b3) = match self {
            Vertex::A1 => (a1, a2 - s, a3 + s),
            Vertex::A2 => (a1 + s, a2 - s, a3),
            Vertex::A3 => (a1 - s, a2 + s, a3),
            Vertex::A4 => (a1 - s, a2, a3 + s),
            Vertex::A5 => (a1 + s, a2, a3 - s),
            Vertex::A6 => (a1, a2 + s, a3 - s),
            Vertex::M12 => (a1 + s, a2 - s, a3),
            Vertex::M34 => (a1 - s, a2 + s, a3),
            Vertex::M56 => (a1 + s, a2, a3 - s),
        };
        AdmissibleTuple::new(b1, b2, b3).expect("vertex-adjacent tuples are admissible")
    }

    /// The index whose set is normalized to measure 1 and replaced by a major subset.
    pub fn designated_index(&self) -> usize {
        match self {
            Vertex::A1 | Vertex::A6 => 1,
            Vertex::A4 | Vertex::A5 => 2,
            Vertex::A2 | Vertex::A3 => 3,
            Vertex::M56 => 2,
            Vertex::M12 | Vertex::M34 => 3,
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Vertex::A1 => "A1",
            Vertex::A2 => "A2",
            Vertex::A3 => "A3",
            Vertex::A4 => "A4",
            Vertex::A5 => "A5",
            Vertex::A6 => "A6",
            Vertex::M12 => "M12",
            Vertex::M34 => "M34",
            Vertex::M56 => "M56",
        };
        f.write_str(s)
    }
}

impl FromStr for Vertex {
    type Err = VerifyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Vertex::ALL
            .into_iter()
            .find(|v| v.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| VerifyError::Parameter(format!("unknown vertex {s}")))
    }
}

/// Parses `p/q` or an integer.
pub fn parse_rational(s: &str) -> Result<Rational64, VerifyError> {
    let bad = || VerifyError::Parameter(format!("not a rational: {s}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational64::new(n, d))
        }
        None => Ok(Rational64::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

/// The Hölder parameters `θ_1 = 2α_1 − 1`, `θ_2 = 2α_2 − 1`, `θ_3 = 1 − θ_1 − θ_2`
/// used near the vertices with bad index 3.
pub fn holder_thetas(alpha: &AdmissibleTuple) -> [Rational64; 3] {
    let [a1, a2, _] = alpha.alpha();
    let one = Rational64::from_integer(1);
    let t1 = a1 * 2 - one;
    let t2 = a2 * 2 - one;
    [t1, t2, one - t1 - t2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_table() {
        let h = r(1, 2);
        assert_eq!(Vertex::A1.coordinates(), [-h, r(1, 1), h]);
        assert_eq!(Vertex::A2.coordinates(), [h, r(1, 1), -h]);
        assert_eq!(Vertex::A3.coordinates(), [r(1, 1), h, -h]);
        assert_eq!(Vertex::A4.coordinates(), [r(1, 1), -h, h]);
        assert_eq!(Vertex::A5.coordinates(), [h, -h, r(1, 1)]);
        assert_eq!(Vertex::A6.coordinates(), [-h, h, r(1, 1)]);
        assert_eq!(Vertex::M12.coordinates(), [r(0, 1), r(1, 1), r(0, 1)]);
        assert_eq!(Vertex::M34.coordinates(), [r(1, 1), r(0, 1), r(0, 1)]);
        assert_eq!(Vertex::M56.coordinates(), [r(0, 1), r(0, 1), r(1, 1)]);
    }

    #[test]
    fn midpoints_are_midpoints() {
        let mid = |a: Vertex, b: Vertex| {
            let (x, y) = (a.coordinates(), b.coordinates());
            [0, 1, 2].map(|i| (x[i] + y[i]) / 2)
        };
        assert_eq!(mid(Vertex::A1, Vertex::A2), Vertex::M12.coordinates());
        assert_eq!(mid(Vertex::A3, Vertex::A4), Vertex::M34.coordinates());
        assert_eq!(mid(Vertex::A5, Vertex::A6), Vertex::M56.coordinates());
    }

    #[test]
    fn adjacent_tuples_are_admissible_and_close() {
        for v in Vertex::ALL {
            let a = v.adjacent();
            let d: Rational64 = a.alpha().iter().zip(v.coordinates()).map(|(x, y)| { let d = x - y; if d < r(0, 1) { -d } else { d } }).sum();
            assert!(d <= r(1, 8), "{v}");
        }
    }

    #[test]
    fn a2_tuple_satisfies_the_theta_constraints() {
        let t = holder_thetas(&Vertex::A2.adjacent());
        let zero = r(0, 1);
        assert!(t.iter().all(|x| *x >= zero && *x < r(1, 1)));
        assert_eq!(t.iter().sum::<Rational64>(), r(1, 1));
        assert_eq!(Vertex::A2.adjacent().bad_index(), Some(3));
    }

    #[test]
    fn bad_indices_match_designated_sets() {
        for v in Vertex::HEXAGON {
            assert_eq!(v.adjacent().bad_index(), Some(v.designated_index()), "{v}");
        }
        assert!(Vertex::M56.adjacent().is_good());
        assert!(Vertex::M12.adjacent().is_good());
    }

    #[test]
    fn rejects_inadmissible() {
        assert!(AdmissibleTuple::new(r(1, 1), r(0, 1), r(0, 1)).is_err());
        assert!(AdmissibleTuple::new(r(-1, 2), r(-1, 2), r(2, 1)).is_err());
        assert!(AdmissibleTuple::new(r(1, 3), r(1, 3), r(1, 2)).is_err());
        assert_eq!(parse_rational("3/4").unwrap(), r(3, 4));
        assert!(parse_rational("1/0").is_err());
    }
}
