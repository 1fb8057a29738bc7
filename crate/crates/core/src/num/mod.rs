//! Exact arithmetic: hybrid integers, dyadic rationals, and `Z[√2][1/2]`.

mod dyadic;
mod int;
mod quad;

pub use dyadic::DyadicRational;
pub use int::Int;
pub use quad::{QuadAccumulator, QuadExt, QuadRepr};
