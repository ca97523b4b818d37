//! Zero-boundary discrete Gaussian free field on the unit disk.
//!
//! Samples are exact: the lattice Laplacian on the disk vertices is factored once per
//! grid size (band Cholesky in row-major order) and `h = √(2π)·R⁻¹ξ` for white noise `ξ`.

mod field;
mod laplace;
mod markov;
mod wedge;

pub use field::{
    circle_average, sample_zero_boundary_gff, DiskLattice, GffSample, GffSampler, DEFAULT_GRID_CAP, NORMALIZATION,
};
pub(crate) use field::circle_average_unchecked;
pub(crate) use laplace::{LaplaceFactor, Lattice};
pub use markov::{markov_decompose, vertex_set, MarkovDecomposition};
pub use wedge::{sample_wedge_radial, sample_wedge_radial_with, wedge_drift, WEDGE_START};
