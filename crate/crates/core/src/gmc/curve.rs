use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gff::{circle_average_unchecked, GffSample};
use crate::loopsoup::CleSample;

/// Quantum length of a polyline, one mass per segment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveLengthMeasure {
    pub segment_masses: Vec<f64>,
    pub gamma: f64,
    pub eps: f64,
}

impl CurveLengthMeasure {
    pub fn total(&self) -> f64 {
        self.segment_masses.iter().sum()
    }

    pub fn concat(mut self, other: &CurveLengthMeasure) -> Self {
        self.segment_masses.extend_from_slice(&other.segment_masses);
        self
    }
}

/// `ε^{γ²/4} e^{(γ/2) h_ε(mid)} |segment|` per segment of `polyline`.
pub fn quantum_curve_length(
    field: &GffSample,
    polyline: &[Complex64],
    gamma: f64,
    eps: f64,
) -> Result<CurveLengthMeasure> {
    field.lattice.check_circle(Complex64::new(0.0, 0.0), eps)?;
    let pre = eps.powf(0.25 * gamma * gamma);
    let mut segment_masses = Vec::with_capacity(polyline.len().saturating_sub(1));
    for (k, w) in polyline.windows(2).enumerate() {
        let mid = 0.5 * (w[0] + w[1]);
        if mid.norm() + eps > 1.0 {
            return Err(Error::Clearance(format!(
                "segment {k} (midpoint {mid}) is closer than {eps} to the boundary"
            )));
        }
        let len = (w[1] - w[0]).norm();
        let mass = if gamma == 0.0 {
            len
        } else {
            pre * (0.5 * gamma * circle_average_unchecked(field, mid, eps)).exp() * len
        };
        segment_masses.push(mass);
    }
    Ok(CurveLengthMeasure {
        segment_masses,
        gamma,
        eps,
    })
}

/// Quantum lengths of the CLE loops (outermost cluster boundaries).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopLengths {
    /// Index into `CleSample::clusters` and the length, for loops with clearance.
    pub lengths: Vec<(usize, f64)>,
    /// Loops closer than `eps` to the boundary, excluded.
    pub boundary_adjacent: usize,
}

pub fn loop_quantum_lengths(field: &GffSample, cle: &CleSample, gamma: f64, eps: f64) -> Result<LoopLengths> {
    let mut lengths = Vec::new();
    let mut boundary_adjacent = 0;
    for (k, c) in cle.clusters.iter().enumerate().filter(|(_, c)| c.outermost) {
        match quantum_curve_length(field, &c.outer_boundary, gamma, eps) {
            Ok(m) => lengths.push((k, m.total())),
            Err(Error::Clearance(_)) => boundary_adjacent += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(LoopLengths {
        lengths,
        boundary_adjacent,
    })
}
