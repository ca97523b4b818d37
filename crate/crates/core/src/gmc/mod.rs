//! Gaussian multiplicative chaos from field samples: area measure, curve lengths, and
//! stable jump counts.

mod area;
mod curve;
mod stable;

pub use area::{disk_area, expected_density, gmc_area, GmcArea, GmcMeasure};
pub use curve::{loop_quantum_lengths, quantum_curve_length, CurveLengthMeasure, LoopLengths};
pub use stable::{expected_jumps_above, sample_stable_jumps, StableJumpRecord};
