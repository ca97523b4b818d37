//! Analytic verification kit: Gegenbauer polynomials, the radial Bessel
//! transition density and sampler, and the angular ODE for the SLE density.

mod bessel;
mod gegenbauer;
mod ode;
pub mod quadrature;

pub use bessel::{
    radial_bessel_density, simulate_radial_bessel, BesselDensitySpec, BOUNDARY_GUARD,
    TAIL_TOLERANCE,
};
pub use gegenbauer::{gegenbauer, gegenbauer_all};
pub use ode::{analytic_h, h_ode_check, integrate_h_ode, residual};
