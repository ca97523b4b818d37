use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, Mask};
use crate::loopsoup::{sample_cle, CleConfig, CleSample};
use crate::natural_param::distance_transform_sq;
use crate::rng::derive_seed;
use crate::stats::linear_fit;

use super::xi::{estimate_xi, CarpetMeasure, XiConfig};

/// Mass within distance `r` of `polyline`, for each `r` in `radii` (length units).
pub fn neighborhood_profile(grid: &Grid, masses: &[f64], polyline: &[Complex64], radii: &[f64]) -> Vec<f64> {
    let mut on = Mask::new(*grid, false);
    on.draw_polyline(polyline);
    let dist: Vec<f64> = distance_transform_sq(&on).into_iter().map(|d| d.sqrt() * grid.h).collect();
    radii
        .iter()
        .map(|&r| masses.iter().zip(&dist).filter(|(_, &d)| d <= r).map(|(m, _)| m).sum())
        .collect()
}

/// Arc length of `polyline` per grid cell, the negative-control measure.
pub fn arc_length_masses(grid: &Grid, polyline: &[Complex64]) -> Vec<f64> {
    let mut m = vec![0.0; grid.len()];
    for w in polyline.windows(2) {
        let len = (w[1] - w[0]).norm();
        let pieces = ((len / (0.25 * grid.h)).ceil() as usize).max(1);
        for p in 0..pieces {
            let z = w[0] + (w[1] - w[0]) * ((p as f64 + 0.5) / pieces as f64);
            if let Some((i, j)) = grid.cell_of(z) {
                m[grid.index(i, j)] += len / pieces as f64;
            }
        }
    }
    m
}

/// Slope of `log(mean mass)` on `log r`, with a jackknife interval over replicas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VanishingReport {
    pub radii: Vec<f64>,
    pub mean_mass: Vec<f64>,
    /// `None` when some mean mass is zero.
    pub slope: Option<f64>,
    pub slope_ci95: Option<(f64, f64)>,
    pub replicas: usize,
    /// Replicas without a loop clear of the boundary.
    pub skipped: usize,
}

impl VanishingReport {
    pub fn evidences_vanishing(&self) -> bool {
        matches!(self.slope_ci95, Some((lo, _)) if lo > 0.0)
    }
}

fn log_slope(radii: &[f64], means: &[f64]) -> Option<f64> {
    if means.iter().any(|&m| !(m > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    linear_fit(&xs, &ys).map(|f| f.slope)
}

/// Fits the neighborhood profiles of several replicas.
pub fn profile_slope(radii: &[f64], profiles: &[Vec<f64>], skipped: usize) -> VanishingReport {
    let n = profiles.len();
    let mean_of = |skip: Option<usize>| -> Vec<f64> {
        let cnt = n - skip.is_some() as usize;
        (0..radii.len())
            .map(|k| {
                profiles
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| Some(*i) != skip)
                    .map(|(_, p)| p[k])
                    .sum::<f64>()
                    / cnt.max(1) as f64
            })
            .collect()
    };
    let mean_mass = mean_of(None);
    let slope = if n == 0 { None } else { log_slope(radii, &mean_mass) };
    let slope_ci95 = slope.and_then(|s| {
        if n < 3 {
            return None;
        }
        let leave: Vec<f64> = (0..n).filter_map(|i| log_slope(radii, &mean_of(Some(i)))).collect();
        if leave.len() < n {
            return None;
        }
        let m = leave.iter().sum::<f64>() / n as f64;
        let var = (n as f64 - 1.0) / n as f64 * leave.iter().map(|x| (x - m).powi(2)).sum::<f64>();
        let h = 1.959_963_984_540_054 * var.sqrt();
        Some((s - h, s + h))
    });
    VanishingReport {
        radii: radii.to_vec(),
        mean_mass,
        slope,
        slope_ci95,
        replicas: n,
        skipped,
    }
}

/// The largest outermost loop staying inside `|z| < 1 − margin`.
pub fn macroscopic_loop(cle: &CleSample, margin: f64) -> Option<&Vec<Complex64>> {
    cle.clusters
        .iter()
        .filter(|c| c.outermost && c.outer_boundary.iter().all(|z| z.norm() < 1.0 - margin))
        .max_by_key(|c| c.filled_cells)
        .map(|c| &c.outer_boundary)
}

/// Ξ-mass in shrinking neighborhoods of a macroscopic loop, pooled over replicas.
pub fn loop_mass_vanishing_test(
    cle_config: &CleConfig,
    xi: &XiConfig,
    n_replicas: usize,
    radii: &[f64],
    seed: u64,
) -> Result<VanishingReport> {
    if radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Invalid("radii must be decreasing".into()));
    }
    let mut profiles = Vec::with_capacity(n_replicas);
    let mut skipped = 0;
    for r in 0..n_replicas as u64 {
        let (_, cle) = sample_cle(cle_config, derive_seed(seed, 2 * r))?;
        let Some(l) = macroscopic_loop(&cle, xi.circle_radius) else {
            skipped += 1;
            continue;
        };
        let m = estimate_xi(&cle, xi, derive_seed(seed, 2 * r + 1))?;
        profiles.push(neighborhood_profile(&cle.grid, &m.masses, l, radii));
    }
    Ok(profile_slope(radii, &profiles, skipped))
}

/// Per-box comparison of two ensembles after normalizing each to unit mean total.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    /// Per box: normalized mass of the first ensemble, of the second, z-score.
    pub boxes: Vec<(f64, f64, f64)>,
    /// Cells with mass off the carpet or on the boundary ring, both ensembles together.
    pub support_violations: usize,
}

impl UniquenessReport {
    pub fn max_abs_z(&self) -> f64 {
        self.boxes.iter().map(|b| b.2.abs()).fold(0.0, f64::max)
    }

    pub fn passes(&self) -> bool {
        self.support_violations == 0 && self.max_abs_z() < 3.0
    }
}

/// Ratio estimate `Σ box / Σ total` and its linearized standard error.
fn ratio_estimate(measures: &[CarpetMeasure], lo: Complex64, hi: Complex64) -> (f64, f64) {
    let n = measures.len() as f64;
    let t: Vec<f64> = measures.iter().map(|m| m.total()).collect();
    let b: Vec<f64> = measures.iter().map(|m| m.box_mass(lo, hi)).collect();
    let (st, sb): (f64, f64) = (t.iter().sum(), b.iter().sum());
    let r = sb / st;
    if measures.len() < 2 {
        return (r, 0.0);
    }
    let resid: Vec<f64> = b.iter().zip(&t).map(|(b, t)| b - r * t).collect();
    let var = resid.iter().map(|d| d * d).sum::<f64>() / (n - 1.0);
    (r, var.sqrt() / (n.sqrt() * st / n))
}

/// Normalizes both ensembles to unit expected total and compares probe-box intensities.
pub fn uniqueness_normalization_check(
    a: &[CarpetMeasure],
    b: &[CarpetMeasure],
    boxes: &[(Complex64, Complex64)],
) -> Result<UniquenessReport> {
    for (name, e) in [("first", a), ("second", b)] {
        if e.is_empty() || !(e.iter().map(|m| m.total()).sum::<f64>() > 0.0) {
            return Err(Error::Invalid(format!("{name} ensemble has zero total mass")));
        }
    }
    let support_violations = a.iter().chain(b).map(|m| m.support_violations()).sum();
    let boxes = boxes
        .iter()
        .map(|&(lo, hi)| {
            let (ra, sa) = ratio_estimate(a, lo, hi);
            let (rb, sb) = ratio_estimate(b, lo, hi);
            let se = (sa * sa + sb * sb).sqrt();
            let z = if ra == rb {
                0.0
            } else if se > 0.0 {
                (ra - rb) / se
            } else {
                f64::INFINITY
            };
            (ra, rb, z)
        })
        .collect();
    Ok(UniquenessReport {
        boxes,
        support_violations,
    })
}
