use num_complex::Complex64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gff::{GffSample, GffSampler};
use crate::gmc::quantum_curve_length;
use crate::grid::{Grid, Mask};
use crate::loopsoup::CleSample;
use crate::rng::{derive_seed, rng_for};
use crate::stats::{weighted_linear_fit, LinearFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Normalization {
    #[default]
    Raw,
    /// Divided by an ensemble's mean total.
    UnitExpectedTotal,
}

/// How the point mass of a loop is placed along it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum MarkRule {
    /// Uniform from the loop's quantum length.
    #[default]
    QuantumLength,
    /// Uniform from Euclidean arc length.
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiConfig {
    /// Loops with quantum length at least `eps` are counted.
    pub eps: f64,
    pub n_fields: usize,
    /// Circle-average radius for loop lengths.
    pub circle_radius: f64,
    /// Vertices per side of the field lattice.
    pub field_n: usize,
    pub mark_rule: MarkRule,
}

impl XiConfig {
    pub fn new(eps: f64, n_fields: usize) -> Self {
        XiConfig {
            eps,
            n_fields,
            circle_radius: 0.05,
            field_n: 129,
            mark_rule: MarkRule::QuantumLength,
        }
    }
}

/// One point mass before the `F_D` factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deposit {
    /// Index of the loop's cluster in `CleSample::clusters`.
    pub cluster: usize,
    pub point: Complex64,
    pub cell: usize,
    pub weight: f64,
}

/// Estimate of the carpet measure Ξ on the carpet grid of one CLE sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarpetMeasure {
    pub grid: Grid,
    pub masses: Vec<f64>,
    pub kappa: f64,
    pub eps: f64,
    pub n_fields: usize,
    pub normalization: Normalization,
    pub seed: u64,
    pub field_seeds: Vec<u64>,
    /// Loops with length `≥ eps`, averaged over fields.
    pub mean_loops_counted: f64,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub carpet: Mask,
}

impl CarpetMeasure {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn region_mass(&self, pred: impl Fn(Complex64) -> bool) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .filter(|(k, _)| pred(self.grid.center_of(*k)))
            .map(|(_, m)| m)
            .sum()
    }

    pub fn box_mass(&self, lo: Complex64, hi: Complex64) -> f64 {
        self.region_mass(|z| z.re >= lo.re && z.re < hi.re && z.im >= lo.im && z.im < hi.im)
    }

    /// Cells with mass that are off the carpet or on the boundary ring.
    pub fn support_violations(&self) -> usize {
        self.masses
            .iter()
            .enumerate()
            .filter(|&(k, &m)| m != 0.0 && (!self.carpet.cells[k] || on_ring(&self.grid, k)))
            .count()
    }

    /// Every mass divided by `total`.
    pub fn normalized(&self, total: f64) -> CarpetMeasure {
        CarpetMeasure {
            masses: self.masses.iter().map(|m| m / total).collect(),
            normalization: Normalization::UnitExpectedTotal,
            ..self.clone()
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,mass\n");
        for (k, m) in self.masses.iter().enumerate() {
            if *m != 0.0 {
                let z = self.grid.center_of(k);
                s.push_str(&format!("{},{},{}\n", z.re, z.im, m));
            }
        }
        s
    }
}

/// Cells meeting the unit circle.
pub fn on_ring(grid: &Grid, k: usize) -> bool {
    grid.center_of(k).norm() + grid.h * std::f64::consts::FRAC_1_SQRT_2 >= 1.0
}

/// `1/2 + 2/κ + κ/32`.
pub fn f_exponent(kappa: f64) -> f64 {
    0.5 + 2.0 / kappa + kappa / 32.0
}

/// `F_D(z) = (1 − |z|²)^{−(1/2 + 2/κ + κ/32)}` on the unit disk.
pub fn f_d(z: Complex64, kappa: f64) -> f64 {
    (1.0 - z.norm_sqr()).powf(-f_exponent(kappa))
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 8.0 / 3.0 && kappa <= 4.0) {
        return Err(domain("kappa", kappa, "(8/3, 4]"));
    }
    Ok(())
}

/// Point masses of one field: each loop of quantum length `≥ eps` puts `eps^{α+1/2}` at a
/// marked point drawn from its length measure.
///
/// The marked point is drawn among boundary segments whose outer neighbour cell is a
/// carpet cell off the boundary ring, and the mass goes to that neighbour cell.
pub fn loop_deposits(
    cle: &CleSample,
    field: &GffSample,
    config: &XiConfig,
    mark_seed: u64,
) -> Result<Vec<Deposit>> {
    let kappa = cle.kappa;
    check_kappa(kappa)?;
    let gamma = kappa.sqrt();
    let weight = config.eps.powf(4.0 / kappa + 0.5);
    let grid = cle.grid;
    let mut out = Vec::new();
    for (k, c) in cle.clusters.iter().enumerate().filter(|(_, c)| c.outermost) {
        let m = match quantum_curve_length(field, &c.outer_boundary, gamma, config.circle_radius) {
            Ok(m) => m,
            Err(Error::Clearance(_)) => continue,
            Err(e) => return Err(e),
        };
        if !(m.total() >= config.eps) {
            continue;
        }
        let mut candidates: Vec<(usize, f64)> = Vec::new();
        for (s, w) in c.outer_boundary.windows(2).enumerate() {
            if let Some(cell) = outer_cell(&grid, w[0], w[1], 0.5) {
                if cle.carpet.cells[cell] && !on_ring(&grid, cell) {
                    let mass = match config.mark_rule {
                        MarkRule::QuantumLength => m.segment_masses[s],
                        MarkRule::Euclidean => (w[1] - w[0]).norm(),
                    };
                    candidates.push((s, mass));
                }
            }
        }
        let total: f64 = candidates.iter().map(|e| e.1).sum();
        if candidates.is_empty() || !(total > 0.0) {
            continue;
        }
        let mut u = rng_for(mark_seed, k as u64).random::<f64>() * total;
        let mut pick = candidates.len() - 1;
        for (i, &(_, mass)) in candidates.iter().enumerate() {
            if u < mass {
                pick = i;
                break;
            }
            u -= mass;
        }
        let (s, mass) = candidates[pick];
        let t = (u / mass).clamp(0.0, 1.0);
        let (a, b) = (c.outer_boundary[s], c.outer_boundary[s + 1]);
        let point = a + (b - a) * t;
        let cell = match outer_cell(&grid, a, b, t) {
            Some(cell) if cle.carpet.cells[cell] && !on_ring(&grid, cell) => cell,
            _ => outer_cell(&grid, a, b, 0.5).expect("candidate segment has an outer cell"),
        };
        out.push(Deposit {
            cluster: k,
            point,
            cell,
            weight,
        });
    }
    Ok(out)
}

/// Cell to the right of `a → b` (outside a counter-clockwise contour) at parameter `t`.
fn outer_cell(grid: &Grid, a: Complex64, b: Complex64, t: f64) -> Option<usize> {
    let d = b - a;
    let len = d.norm();
    if len == 0.0 {
        return None;
    }
    let right = Complex64::new(d.im, -d.re) / len;
    let p = a + d * t + right * (0.5 * grid.h);
    grid.cell_of(p).map(|(i, j)| grid.index(i, j))
}

/// Ξ for one CLE sample: deposits averaged over `n_fields` independent fields, times `F_D`.
pub fn estimate_xi(cle: &CleSample, config: &XiConfig, seed: u64) -> Result<CarpetMeasure> {
    check_kappa(cle.kappa)?;
    if config.n_fields == 0 {
        return Err(Error::Invalid("n_fields must be at least 1".into()));
    }
    if !(config.eps > 0.0) {
        return Err(domain("eps", config.eps, "(0, ∞)"));
    }
    let sampler = GffSampler::cached(config.field_n)?;
    let grid = cle.grid;
    let mut masses = vec![0.0; grid.len()];
    let mut field_seeds = Vec::with_capacity(config.n_fields);
    let mut counted = 0usize;
    for f in 0..config.n_fields {
        let fs = derive_seed(seed, 2 * f as u64);
        field_seeds.push(fs);
        let field = sampler.sample(fs);
        let deps = loop_deposits(cle, &field, config, derive_seed(seed, 2 * f as u64 + 1))?;
        counted += deps.len();
        for d in deps {
            masses[d.cell] += d.weight * f_d(d.point, cle.kappa);
        }
    }
    let nf = config.n_fields as f64;
    masses.iter_mut().for_each(|m| *m /= nf);
    let mut warnings = cle.warnings.clone();
    if counted == 0 {
        warnings.push(format!("no loop reached quantum length {}; the measure is zero", config.eps));
    }
    Ok(CarpetMeasure {
        grid,
        masses,
        kappa: cle.kappa,
        eps: config.eps,
        n_fields: config.n_fields,
        normalization: Normalization::Raw,
        seed,
        field_seeds,
        mean_loops_counted: counted as f64 / nf,
        warnings,
        carpet: cle.carpet.clone(),
    })
}

/// Cellwise mean and standard error over an ensemble of measures on one grid.
pub fn mean_intensity(measures: &[CarpetMeasure]) -> Result<(Vec<f64>, Vec<f64>)> {
    let first = measures.first().ok_or_else(|| Error::Invalid("empty ensemble".into()))?;
    if measures.iter().any(|m| m.grid != first.grid) {
        return Err(Error::Invalid("measures live on different grids".into()));
    }
    let n = measures.len() as f64;
    let len = first.grid.len();
    let mut mean = vec![0.0; len];
    let mut sq = vec![0.0; len];
    for m in measures {
        for (k, &x) in m.masses.iter().enumerate() {
            mean[k] += x;
            sq[k] += x * x;
        }
    }
    let err = mean
        .iter_mut()
        .zip(&sq)
        .map(|(s, &q)| {
            let mu = *s / n;
            *s = mu;
            if n < 2.0 {
                0.0
            } else {
                ((q - n * mu * mu).max(0.0) / (n - 1.0) / n).sqrt()
            }
        })
        .collect();
    Ok((mean, err))
}

/// Annulus densities of an ensemble intensity and the fit of log density on `log(1 − |z|²)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    /// Per annulus: mean of `1 − |z|²` over its cells, mass per unit area, standard error.
    pub annuli: Vec<(f64, f64, f64)>,
    pub fit: Option<LinearFit>,
}

/// Radial profile over `n_annuli` equal-width annuli of `[0, r_max)`.
pub fn radial_profile(measures: &[CarpetMeasure], n_annuli: usize, r_max: f64) -> Result<RadialProfile> {
    let first = measures.first().ok_or_else(|| Error::Invalid("empty ensemble".into()))?;
    let g = first.grid;
    let width = r_max / n_annuli as f64;
    let ring_of = |k: usize| {
        let r = g.center_of(k).norm();
        (r < r_max).then(|| ((r / width) as usize).min(n_annuli - 1))
    };
    let mut cells = vec![0usize; n_annuli];
    let mut w = vec![0.0; n_annuli];
    for k in 0..g.len() {
        if let Some(a) = ring_of(k) {
            cells[a] += 1;
            w[a] += 1.0 - g.center_of(k).norm_sqr();
        }
    }
    let mut per: Vec<Vec<f64>> = vec![Vec::with_capacity(measures.len()); n_annuli];
    for m in measures {
        let mut acc = vec![0.0; n_annuli];
        for (k, &x) in m.masses.iter().enumerate() {
            if let Some(a) = ring_of(k) {
                acc[a] += x;
            }
        }
        for a in 0..n_annuli {
            per[a].push(acc[a] / (cells[a] as f64 * g.cell_area()));
        }
    }
    let annuli: Vec<(f64, f64, f64)> = (0..n_annuli)
        .map(|a| {
            let s = crate::stats::Summary::of(&per[a]);
            (w[a] / cells[a] as f64, s.mean, s.std_err())
        })
        .collect();
    let usable: Vec<&(f64, f64, f64)> = annuli.iter().filter(|a| a.1 > 0.0 && a.2 > 0.0).collect();
    let xs: Vec<f64> = usable.iter().map(|a| a.0.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|a| a.1.ln()).collect();
    // delta method: Var(log m) ≈ (se/m)²
    let ws: Vec<f64> = usable.iter().map(|a| (a.1 / a.2).powi(2)).collect();
    Ok(RadialProfile {
        fit: weighted_linear_fit(&xs, &ys, &ws),
        annuli,
    })
}
