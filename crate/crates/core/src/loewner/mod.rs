//! Chordal Loewner chains: forward and reverse flows, SLE drivers and curve extraction.

mod driver;
mod flow;
mod rho;
mod trace;

pub use driver::{sample_sle_driving, DrivingFunction};
pub use flow::{
    centered_inverse, inverse_forward, solve_forward, solve_reverse, FlowOutcome, SWALLOW_TOLERANCE,
};
pub use rho::{sample_sle_kappa_rho_driving, ForcePointState};
pub use trace::{refine_trace, trace_at_steps, trace_direct, trace_from_driving, LoewnerTrace, RefinedTrace, SlitScheme};
