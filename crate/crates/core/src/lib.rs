//! Numerical lab for SLE traces, CLE loop soups, Gaussian free fields, multiplicative chaos,
//! the natural parametrization of SLE_κ′ and the conformally covariant carpet measure.
//!
//! The analytic layer (parameters, Loewner flows, special functions) is generic over
//! [`Scalar`]; the Monte Carlo pipelines run in `f64`.

pub mod error;
pub mod params;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod stats;

pub mod cle_measure;
pub mod gff;
pub mod gmc;
pub mod grid;
pub mod loewner;
pub mod loopsoup;
pub mod natural_param;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type SleParams64 = params::SleParams<f64>;
pub type SleParams32 = params::SleParams<f32>;
pub type DrivingFunction64 = loewner::DrivingFunction<f64>;
pub type DrivingFunction32 = loewner::DrivingFunction<f32>;
pub type LoewnerTrace64 = loewner::LoewnerTrace<f64>;
pub type LoewnerTrace32 = loewner::LoewnerTrace<f32>;
pub type BesselDensitySpec64 = special::BesselDensitySpec<f64>;
pub type BesselDensitySpec32 = special::BesselDensitySpec<f32>;
