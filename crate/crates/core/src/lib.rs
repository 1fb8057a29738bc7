//! Exact Walsh-model time-frequency analysis.
//!
//! The crate implements the Walsh phase plane on a finite dyadic grid: exact
//! arithmetic in `Z[√2][1/2]`, step functions, tiles and wave packets, the
//! Carleson, bilinear Hilbert and bi-Carleson model operators, size and
//! energy functionals over trees, and the tree-selection algorithms that
//! decompose tile collections by size.

pub mod decompose;
pub mod dyadic;
pub mod error;
pub mod num;
pub mod operators;
pub mod tiles;
pub mod treenorms;
pub mod wavepacket;

pub use error::{Error, Result};
