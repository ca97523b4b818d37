use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::gff::{circle_average_unchecked, GffSample, GffSampler};
use crate::grid::Grid;

/// `γ`-LQG area measure on the lattice cells, at fixed circle-average radius `eps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmcMeasure {
    /// Cells between lattice vertices.
    pub grid: Grid,
    pub cell_masses: Vec<f64>,
    pub gamma: f64,
    pub eps: f64,
    pub field_seed: u64,
    /// Lattice factor multiplying every mass.
    pub normalization: f64,
    /// Cells whose circle of radius `eps` leaves the disk; their mass is zero.
    pub clipped: usize,
}

impl GmcMeasure {
    pub fn total(&self) -> f64 {
        self.cell_masses.iter().sum()
    }

    pub fn mass_at(&self, i: usize, j: usize) -> f64 {
        self.cell_masses[self.grid.index(i, j)]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,mass\n");
        for (k, m) in self.cell_masses.iter().enumerate() {
            let z = self.grid.center_of(k);
            s.push_str(&format!("{},{},{}\n", z.re, z.im, m));
        }
        s
    }
}

/// Parameters of the area measure on one lattice, with the lattice normalization.
///
/// The normalization `exp((γ²/2)(log(1/ε) − Var h_ε(0)))` uses the exact discrete variance
/// of the circle average at the center, so `E[mass]/area = r_D(0)^{γ²/2} = 1` there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GmcArea {
    pub n: usize,
    pub gamma: f64,
    pub eps: f64,
    pub normalization: f64,
}

impl GmcArea {
    pub fn new(n: usize, gamma: f64, eps: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma < 2.0) {
            return Err(domain("gamma", gamma, "[0, 2)"));
        }
        let sampler = GffSampler::cached(n)?;
        let var0 = sampler.circle_average_variance(Complex64::new(0.0, 0.0), eps)?;
        let normalization = if gamma == 0.0 {
            1.0
        } else {
            (0.5 * gamma * gamma * ((1.0 / eps).ln() - var0)).exp()
        };
        Ok(GmcArea {
            n,
            gamma,
            eps,
            normalization,
        })
    }

    pub fn cell_grid(&self) -> Grid {
        let a = 2.0 / (self.n - 1) as f64;
        Grid::new(-1.0, -1.0, a, self.n - 1, self.n - 1)
    }

    fn prefactor(&self) -> f64 {
        let a = 2.0 / (self.n - 1) as f64;
        self.normalization * self.eps.powf(0.5 * self.gamma * self.gamma) * a * a
    }

    /// Mass of one cell, `None` if its circle leaves the disk.
    pub fn cell_mass(&self, field: &GffSample, z: Complex64) -> Option<f64> {
        if z.norm() + self.eps > 1.0 {
            return None;
        }
        let h = circle_average_unchecked(field, z, self.eps);
        Some(self.prefactor() * (self.gamma * h).exp())
    }

    pub fn measure(&self, field: &GffSample) -> Result<GmcMeasure> {
        if field.n() != self.n {
            return Err(crate::error::Error::Invalid(format!(
                "field has {} vertices per side, measure was set up for {}",
                field.n(),
                self.n
            )));
        }
        let grid = self.cell_grid();
        let mut clipped = 0;
        let cell_masses = (0..grid.len())
            .map(|k| {
                self.cell_mass(field, grid.center_of(k)).unwrap_or_else(|| {
                    clipped += 1;
                    0.0
                })
            })
            .collect();
        Ok(GmcMeasure {
            grid,
            cell_masses,
            gamma: self.gamma,
            eps: self.eps,
            field_seed: field.seed,
            normalization: self.normalization,
            clipped,
        })
    }
}

/// Area measure `ε^{γ²/2} e^{γ h_ε(z)} dz` on the lattice cells.
pub fn gmc_area(field: &GffSample, gamma: f64, eps: f64) -> Result<GmcMeasure> {
    field.lattice.check_circle(Complex64::new(0.0, 0.0), eps)?;
    GmcArea::new(field.n(), gamma, eps)?.measure(field)
}

/// `r_D(z)^{γ²/2}` on the unit disk, the expected mass density of the area measure.
pub fn expected_density(z: Complex64, gamma: f64) -> f64 {
    (1.0 - z.norm_sqr()).powf(0.5 * gamma * gamma)
}

/// Area of the disk of radius `r`; helper for totals.
pub fn disk_area(r: f64) -> f64 {
    PI * r * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gff::sample_zero_boundary_gff;

    #[test]
    fn gamma_zero_gives_lebesgue_cells() {
        let f = sample_zero_boundary_gff(41, 1).unwrap();
        let m = gmc_area(&f, 0.0, 0.1).unwrap();
        let a = f.a();
        for (k, &mass) in m.cell_masses.iter().enumerate() {
            let z = m.grid.center_of(k);
            if z.norm() + 0.1 <= 1.0 {
                assert_eq!(mass, a * a);
            } else {
                assert_eq!(mass, 0.0);
            }
        }
        assert!(m.clipped > 0);
    }

    #[test]
    fn shift_scales_masses_exactly() {
        let f = sample_zero_boundary_gff(33, 2).unwrap();
        let (g, c) = (1.3, 0.37);
        let m0 = gmc_area(&f, g, 0.15).unwrap();
        let m1 = gmc_area(&f.shifted(c), g, 0.15).unwrap();
        for (a, b) in m0.cell_masses.iter().zip(&m1.cell_masses) {
            assert!((b - a * (g * c).exp()).abs() <= 1e-12 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn total_mass_is_finite_and_positive() {
        for seed in 0..5 {
            let f = sample_zero_boundary_gff(41, seed).unwrap();
            let t = gmc_area(&f, 1.9, 0.1).unwrap().total();
            assert!(t > 0.0 && t.is_finite());
        }
        let f = sample_zero_boundary_gff(41, 0).unwrap();
        assert!(gmc_area(&f, 2.0, 0.1).is_err());
        assert!(gmc_area(&f, 1.0, 0.01).is_err());
    }

    #[test]
    fn center_normalization() {
        let area = GmcArea::new(49, 1.0, 0.2).unwrap();
        let s = GffSampler::cached(49).unwrap();
        let var0 = s.circle_average_variance(Complex64::new(0.0, 0.0), 0.2).unwrap();
        // E[mass]/cell-area at the center is exactly 1
        let mean = area.normalization * 0.2f64.sqrt() * (0.5 * var0).exp();
        assert!((mean - 1.0).abs() < 1e-12);
    }
}
