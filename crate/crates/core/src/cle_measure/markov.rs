use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gff::{LaplaceFactor, Lattice};
use crate::grid::{flood_fill, point_in_polygon, Grid};
use crate::loopsoup::{sample_cle, CleConfig, CleSample};
use crate::params::carpet_dimension;
use crate::rng::derive_seed;
use crate::stats::{correlation, ks_two_sample, KsResult};

use super::xi::{estimate_xi, CarpetMeasure, XiConfig};

/// Simply connected subdomain of the unit disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SubDomain {
    WholeDisk,
    UpperHalfDisk,
    /// Interior of a closed polygon, intersected with the disk.
    Polygon(Vec<Complex64>),
}

impl SubDomain {
    pub fn contains(&self, z: Complex64) -> bool {
        z.norm() < 1.0
            && match self {
                SubDomain::WholeDisk => true,
                SubDomain::UpperHalfDisk => z.im > 0.0,
                SubDomain::Polygon(p) => point_in_polygon(z, p),
            }
    }
}

/// Filled cells of every outermost loop of `cle` that has cells both in and out of `inside`.
fn crossing_fill(cle: &CleSample, inside: &dyn Fn(Complex64) -> bool) -> Vec<bool> {
    let g = cle.grid;
    let mut removed = vec![false; g.len()];
    for c in cle.clusters.iter().filter(|c| c.outermost) {
        let b = &c.outer_boundary;
        let (mut lo, mut hi) = (b[0], b[0]);
        for z in b {
            lo = Complex64::new(lo.re.min(z.re), lo.im.min(z.im));
            hi = Complex64::new(hi.re.max(z.re), hi.im.max(z.im));
        }
        let (Some(a), Some(e)) = (
            g.cell_of(lo).or(Some((0, 0))),
            g.cell_of(hi).or(Some((g.nx - 1, g.ny - 1))),
        ) else {
            continue;
        };
        let mut cells = Vec::new();
        let (mut has_in, mut has_out) = (false, false);
        for j in a.1..=e.1.min(g.ny - 1) {
            for i in a.0..=e.0.min(g.nx - 1) {
                let z = g.center(i, j);
                if z.norm() < 1.0 && point_in_polygon(z, b) {
                    cells.push(g.index(i, j));
                    if inside(z) {
                        has_in = true;
                    } else {
                        has_out = true;
                    }
                }
            }
        }
        if has_in && has_out {
            for k in cells {
                removed[k] = true;
            }
        }
    }
    removed
}

/// The component of `U*` containing `probe`: `U` minus the closures of loops meeting both
/// `U` and its complement. `None` if the probe cell is removed.
pub fn restricted_component(cle: &CleSample, u: &SubDomain, probe: Complex64) -> Option<Vec<bool>> {
    let g = cle.grid;
    let inside = |z: Complex64| u.contains(z);
    let removed = crossing_fill(cle, &inside);
    let passable: Vec<bool> = (0..g.len()).map(|k| inside(g.center_of(k)) && !removed[k]).collect();
    let (i, j) = g.cell_of(probe)?;
    let start = g.index(i, j);
    if !passable[start] {
        return None;
    }
    Some(flood_fill(&g, &passable, &[start]))
}

/// `|φ′|` on the cells of a component `V` for a conformal map `φ: V → D` with `φ(probe) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformizingMap {
    pub grid: Grid,
    pub probe: Complex64,
    #[serde(skip)]
    pub cells: Vec<bool>,
    /// `|φ′|` at cell centers, zero off `V`.
    pub derivative: Vec<f64>,
    /// Conformal radius of `V` seen from the probe.
    pub conformal_radius: f64,
}

/// Builds `φ = (z − p)·exp(−(g + i g̃))` with `g` the discrete harmonic extension of
/// `log|ζ − p|` from the cells around `V`; `|φ′| = e^{−g}·|1 − (z − p)(g_x − i g_y)|`.
///
/// When `V` is every disk cell the exact Möbius map is used.
pub fn uniformize(grid: &Grid, cells: &[bool], probe: Complex64) -> Result<UniformizingMap> {
    if grid.nx != grid.ny {
        return Err(Error::Invalid("uniformizing needs a square grid".into()));
    }
    let (pi, pj) = grid
        .cell_of(probe)
        .ok_or_else(|| Error::Invalid(format!("probe {probe} is off the grid")))?;
    if !cells[grid.index(pi, pj)] {
        return Err(Error::Invalid(format!("probe {probe} is not in the component")));
    }
    let whole = (0..grid.len()).all(|k| cells[k] == (grid.center_of(k).norm() < 1.0));
    if whole {
        let scale = 1.0 - probe.norm_sqr();
        let derivative = (0..grid.len())
            .map(|k| {
                if cells[k] {
                    scale / (1.0 - probe.conj() * grid.center_of(k)).norm_sqr()
                } else {
                    0.0
                }
            })
            .collect();
        return Ok(UniformizingMap {
            grid: *grid,
            probe,
            cells: cells.to_vec(),
            derivative,
            conformal_radius: scale,
        });
    }
    let lattice = Lattice { n: grid.nx };
    let factor = LaplaceFactor::new(lattice, cells);
    let h = grid.h;
    let at = |i: i64, j: i64| Complex64::new(grid.x0 + (i as f64 + 0.5) * h, grid.y0 + (j as f64 + 0.5) * h);
    let boundary = |i: i64, j: i64| (at(i, j) - probe).norm().ln();
    let inside = |i: i64, j: i64| {
        i >= 0 && j >= 0 && (i as usize) < grid.nx && (j as usize) < grid.ny && cells[grid.index(i as usize, j as usize)]
    };
    const STEPS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    let mut rhs: Vec<f64> = factor
        .vertices
        .iter()
        .map(|&v| {
            let (i, j) = grid.coords(v);
            let (i, j) = (i as i64, j as i64);
            STEPS
                .iter()
                .filter(|(di, dj)| !inside(i + di, j + dj))
                .map(|(di, dj)| boundary(i + di, j + dj))
                .sum()
        })
        .collect();
    factor.solve(&mut rhs);
    let mut g = vec![0.0; grid.len()];
    for (k, &v) in factor.vertices.iter().enumerate() {
        g[v] = rhs[k];
    }
    let value = |i: i64, j: i64| {
        if inside(i, j) {
            g[grid.index(i as usize, j as usize)]
        } else {
            boundary(i, j)
        }
    };
    let mut derivative = vec![0.0; grid.len()];
    for (k, d) in derivative.iter_mut().enumerate() {
        if !cells[k] {
            continue;
        }
        let (i, j) = grid.coords(k);
        let (i, j) = (i as i64, j as i64);
        let gx = (value(i + 1, j) - value(i - 1, j)) / (2.0 * h);
        let gy = (value(i, j + 1) - value(i, j - 1)) / (2.0 * h);
        let z = grid.center_of(k);
        *d = (-g[k]).exp() * (1.0 - (z - probe) * Complex64::new(gx, -gy)).norm();
    }
    Ok(UniformizingMap {
        grid: *grid,
        probe,
        cells: cells.to_vec(),
        derivative,
        conformal_radius: g[grid.index(pi, pj)].exp(),
    })
}

/// `Σ_{cells of V} mass·|φ′|^d`, the total of the pushed-forward restriction.
pub fn pushed_total(measure: &CarpetMeasure, map: &UniformizingMap, d: f64) -> f64 {
    measure
        .masses
        .iter()
        .zip(&map.derivative)
        .enumerate()
        .filter(|(k, _)| map.cells[*k])
        .map(|(_, (m, a))| m * a.powf(d))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovConfig {
    pub cle: CleConfig,
    pub xi: XiConfig,
    pub probe: Complex64,
    /// A second probe; its component total is paired with the first for a correlation check.
    pub second_probe: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovReport {
    pub d: f64,
    pub pushed_totals: Vec<f64>,
    /// Totals of independent unit-disk samples.
    pub fresh_totals: Vec<f64>,
    pub ks: KsResult,
    /// Replicas whose probe was swallowed.
    pub skipped: usize,
    /// Pushed totals of the two probes' components, when they differ.
    pub pairs: Vec<(f64, f64)>,
    pub correlation: Option<f64>,
    /// `1/√n` under independence.
    pub correlation_se: Option<f64>,
}

impl MarkovReport {
    pub fn passes(&self, significance: f64) -> bool {
        let corr_ok = match (self.correlation, self.correlation_se) {
            (Some(c), Some(se)) => c.abs() < 3.0 * se,
            _ => true,
        };
        self.ks.passes(significance) && corr_ok
    }
}

/// Component of the probe inside `U*` if the probe is in `U`, else inside `(D ∖ U)*`.
fn component_for(cle: &CleSample, u: &SubDomain, probe: Complex64) -> Option<Vec<bool>> {
    if u.contains(probe) {
        return restricted_component(cle, u, probe);
    }
    let g = cle.grid;
    let outside = |z: Complex64| z.norm() < 1.0 && !u.contains(z);
    let removed = crossing_fill(cle, &|z| u.contains(z));
    let passable: Vec<bool> = (0..g.len()).map(|k| outside(g.center_of(k)) && !removed[k]).collect();
    let (i, j) = g.cell_of(probe)?;
    let start = g.index(i, j);
    passable[start].then(|| flood_fill(&g, &passable, &[start]))
}

/// Samples `(Γ, Ξ)`, restricts Ξ to the probe's component of `U*`, pushes it to the disk with
/// weight `|φ′|^d` and compares the totals with fresh unit-disk totals by a two-sample KS test.
pub fn markov_restriction_test(
    config: &MarkovConfig,
    u: &SubDomain,
    n_replicas: usize,
    seed: u64,
) -> Result<MarkovReport> {
    let d = carpet_dimension(config.cle.kappa)?;
    let mut pushed_totals = Vec::with_capacity(n_replicas);
    let mut fresh_totals = Vec::with_capacity(n_replicas);
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for r in 0..n_replicas as u64 {
        let (_, cle) = sample_cle(&config.cle, derive_seed(seed, 4 * r))?;
        let xi = estimate_xi(&cle, &config.xi, derive_seed(seed, 4 * r + 1))?;
        let (_, fresh) = sample_cle(&config.cle, derive_seed(seed, 4 * r + 2))?;
        fresh_totals.push(estimate_xi(&fresh, &config.xi, derive_seed(seed, 4 * r + 3))?.total());
        let Some(v) = component_for(&cle, u, config.probe) else {
            skipped += 1;
            continue;
        };
        let map = uniformize(&cle.grid, &v, config.probe)?;
        let t1 = pushed_total(&xi, &map, d);
        pushed_totals.push(t1);
        if let Some(p2) = config.second_probe {
            if let Some(v2) = component_for(&cle, u, p2) {
                let disjoint = !v.iter().zip(&v2).any(|(a, b)| *a && *b);
                if disjoint {
                    let map2 = uniformize(&cle.grid, &v2, p2)?;
                    pairs.push((t1, pushed_total(&xi, &map2, d)));
                }
            }
        }
    }
    if pushed_totals.is_empty() {
        return Err(Error::Invalid("every replica had its probe swallowed".into()));
    }
    let ks = ks_two_sample(&pushed_totals, &fresh_totals);
    let (correlation, correlation_se) = if pairs.len() >= 3 {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        (Some(correlation(&a, &b)), Some(1.0 / (pairs.len() as f64).sqrt()))
    } else {
        (None, None)
    };
    Ok(MarkovReport {
        d,
        pushed_totals,
        fresh_totals,
        ks,
        skipped,
        pairs,
        correlation,
        correlation_se,
    })
}
