use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::Mask;
use crate::loopsoup::{BrownianLoop, LoopSoup};

use super::xi::CarpetMeasure;

/// Disk automorphism `w ↦ e^{iθ}(w − z₀)/(1 − z̄₀w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub z0: Complex64,
    pub theta: f64,
}

impl Mobius {
    pub fn new(z0: Complex64, theta: f64) -> Result<Self> {
        if !(z0.norm() < 1.0) {
            return Err(domain("z0", z0.norm(), "|z0| < 1"));
        }
        Ok(Mobius { z0, theta })
    }

    pub fn identity() -> Self {
        Mobius {
            z0: Complex64::new(0.0, 0.0),
            theta: 0.0,
        }
    }

    pub fn rotation(theta: f64) -> Self {
        Mobius {
            z0: Complex64::new(0.0, 0.0),
            theta,
        }
    }

    pub fn apply(&self, w: Complex64) -> Complex64 {
        Complex64::from_polar(1.0, self.theta) * (w - self.z0) / (1.0 - self.z0.conj() * w)
    }

    /// `|φ′(w)| = (1 − |z₀|²)/|1 − z̄₀w|²`.
    pub fn derivative_abs(&self, w: Complex64) -> f64 {
        (1.0 - self.z0.norm_sqr()) / (1.0 - self.z0.conj() * w).norm_sqr()
    }
}

/// Image measure: the mass of each cell moves to the cell of `φ(center)`, times `|φ′|^d`.
pub fn pushforward_covariant(measure: &CarpetMeasure, phi: &Mobius, d: f64) -> CarpetMeasure {
    let g = measure.grid;
    let mut masses = vec![0.0; g.len()];
    let mut carpet = Mask::new(g, false);
    let mut lost = 0usize;
    for k in 0..g.len() {
        let z = g.center_of(k);
        let target = g.cell_of(phi.apply(z)).map(|(i, j)| g.index(i, j));
        match target {
            Some(t) => {
                if measure.carpet.cells[k] {
                    carpet.cells[t] = true;
                }
                let m = measure.masses[k];
                if m != 0.0 {
                    masses[t] += m * phi.derivative_abs(z).powf(d);
                }
            }
            None if measure.masses[k] != 0.0 => lost += 1,
            None => {}
        }
    }
    let mut warnings = measure.warnings.clone();
    if lost > 0 {
        warnings.push(format!("{lost} cells mapped outside the grid"));
    }
    CarpetMeasure {
        masses,
        carpet,
        warnings,
        ..measure.clone()
    }
}

/// `C·(1 − |z|²)^{d−2}`, the covariant reference intensity on the unit disk.
pub fn disk_intensity_reference(z: Complex64, d: f64, c: f64) -> Result<f64> {
    if !(z.norm() < 1.0) {
        return Err(domain("|z|", z.norm(), "[0, 1)"));
    }
    Ok(c * (1.0 - z.norm_sqr()).powf(d - 2.0))
}

/// The soup rotated by `theta` about the origin.
pub fn rotate_soup(soup: &LoopSoup, theta: f64) -> LoopSoup {
    let r = Complex64::from_polar(1.0, theta);
    let c = soup.domain.center;
    LoopSoup {
        loops: soup
            .loops
            .iter()
            .map(|l| BrownianLoop {
                root: c + (l.root - c) * r,
                duration: l.duration,
                polyline: l.polyline.iter().map(|z| c + (z - c) * r).collect(),
            })
            .collect(),
        ..soup.clone()
    }
}
