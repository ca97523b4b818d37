//! The carpet measure Ξ of simple CLE, its conformal pushforwards and the test harness for
//! the Markov property, the κ ↗ 4 coupling, loop-mass vanishing and uniqueness.

mod coupling;
mod covariance;
mod harness;
mod markov;
mod xi;

pub use coupling::{cle4_measure_via_coupling, CouplingLevel, CouplingReport};
pub use covariance::{disk_intensity_reference, pushforward_covariant, rotate_soup, Mobius};
pub use harness::{
    arc_length_masses, loop_mass_vanishing_test, macroscopic_loop, neighborhood_profile, profile_slope,
    uniqueness_normalization_check, UniquenessReport, VanishingReport,
};
pub use markov::{
    markov_restriction_test, pushed_total, restricted_component, uniformize, MarkovConfig, MarkovReport, SubDomain,
    UniformizingMap,
};
pub use xi::{
    estimate_xi, f_d, f_exponent, loop_deposits, mean_intensity, on_ring, radial_profile, CarpetMeasure, Deposit,
    MarkRule, Normalization, RadialProfile, XiConfig,
};
