//! Intervals, step functions, choice functions, regions, and the dyadic
//! maximal function.

mod choice;
mod grid;
mod interval;
mod region;
mod step;

pub use choice::ChoiceFunction;
pub use grid::{cell_range, cells_for, AmbientGrid, MAX_M};
pub use interval::{DyadicInterval, IntervalRelation};
pub use region::{
    average_abs, dyadic_maximal, exceptional_set, exceptional_set_auto, major_subset, ExceptionalSet, Region,
};
pub use step::{CombineOp, Exponent, StepFunction, MIN_EXPONENT};
