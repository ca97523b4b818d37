//! Brownian loop soups in a disk.

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::{derive_seed, rng_for, rng_from_seed};

/// Open disk `|z − center| < radius`; loops must stay inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub const UNIT: Disk = Disk {
        center: Complex64::new(0.0, 0.0),
        radius: 1.0,
    };

    pub fn new(center: Complex64, radius: f64) -> Self {
        Disk { center, radius }
    }

    #[inline]
    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm_sqr() < self.radius * self.radius
    }

    /// Area of the bounding square roots are drawn from.
    pub fn box_area(&self) -> f64 {
        4.0 * self.radius * self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrownianLoop {
    pub root: Complex64,
    pub duration: f64,
    /// Closed polyline; first and last points equal `root`.
    pub polyline: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopSoup {
    pub loops: Vec<BrownianLoop>,
    pub intensity: f64,
    pub t_min: f64,
    pub t_cap: f64,
    pub domain: Disk,
    pub seed: u64,
    /// Poisson draw of rooted loops before the stay-in-domain rejection.
    pub proposed: usize,
    /// Stable per-loop labels (index among proposals); thinning keeps them.
    pub labels: Vec<u64>,
}

impl LoopSoup {
    pub fn len(&self) -> usize {
        self.loops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            1.0
        } else {
            self.loops.len() as f64 / self.proposed as f64
        }
    }
}

/// Bridge resolution: every loop gets `max(min_steps, ⌈duration / max_step²⌉)` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgeResolution {
    pub min_steps: usize,
    /// Target standard deviation of one bridge increment.
    pub max_step: f64,
    /// Hard cap on steps per loop.
    pub max_steps: usize,
}

impl BridgeResolution {
    pub fn fixed(steps: usize) -> Self {
        BridgeResolution {
            min_steps: steps,
            max_step: f64::INFINITY,
            max_steps: steps,
        }
    }

    /// Increments of about `cell/2`, which keeps supercover rasterization faithful.
    pub fn for_cell(cell: f64) -> Self {
        BridgeResolution {
            min_steps: 8,
            max_step: 0.5 * cell,
            max_steps: 1 << 16,
        }
    }

    fn steps(&self, duration: f64) -> usize {
        let by_step = (duration / (self.max_step * self.max_step)).ceil();
        let n = if by_step.is_finite() { by_step as usize } else { 0 };
        n.max(self.min_steps).min(self.max_steps.max(self.min_steps)).max(2)
    }
}

/// Mean number of rooted loops with duration in `[t_min, t_cap]` and root in a region of the
/// given area: `c·area·(1/t_min − 1/t_cap)/(2π)`.
pub fn expected_root_count(area: f64, c: f64, t_min: f64, t_cap: f64) -> Result<f64> {
    if !(t_min > 0.0) {
        return Err(domain("t_min", t_min, "(0, t_cap]"));
    }
    if t_cap < t_min {
        return Err(domain("t_min", t_min, "(0, t_cap]"));
    }
    Ok(c * area * (1.0 / t_min - 1.0 / t_cap) / (2.0 * std::f64::consts::PI))
}

/// Brownian bridge from `root` back to `root` over `duration`, with `steps` increments.
pub fn brownian_bridge_loop(root: Complex64, duration: f64, steps: usize, rng: &mut impl rand::Rng) -> Vec<Complex64> {
    let sd = (duration / steps as f64).sqrt();
    let mut walk = Vec::with_capacity(steps + 1);
    let mut z = Complex64::new(0.0, 0.0);
    walk.push(z);
    for _ in 0..steps {
        let dx: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        z += Complex64::new(dx, dy) * sd;
        walk.push(z);
    }
    let end = z;
    let n = steps as f64;
    let mut out: Vec<Complex64> = walk
        .iter()
        .enumerate()
        .map(|(k, &w)| root + w - end * (k as f64 / n))
        .collect();
    out[steps] = root;
    out
}

/// Samples a loop soup of intensity `c` in `domain`, truncated to durations in `[t_min, t_cap]`.
///
/// Roots are uniform in the bounding square, durations have density `∝ t⁻²`, and loops
/// leaving the disk are discarded (restriction to loops contained in the domain).
pub fn sample_loop_soup(
    region: Disk,
    c: f64,
    t_min: f64,
    t_cap: f64,
    resolution: BridgeResolution,
    seed: u64,
) -> Result<LoopSoup> {
    if !(c >= 0.0 && c <= 1.0) {
        return Err(domain_err("c", c));
    }
    if !(region.radius > 0.0) {
        return Err(domain("radius", region.radius, "(0, ∞)"));
    }
    let mean = expected_root_count(region.box_area(), c, t_min, t_cap)?;
    let mut rng = rng_from_seed(seed);
    let proposed = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::Invalid(format!("Poisson mean {mean}: {e}")))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let side = 2.0 * region.radius;
    let corner = region.center - Complex64::new(region.radius, region.radius);
    let inv_lo = 1.0 / t_min;
    let inv_span = 1.0 / t_min - 1.0 / t_cap;
    let mut loops = Vec::new();
    let mut labels = Vec::new();
    for k in 0..proposed {
        // each proposal has its own stream so thinning and rejection never shift later loops
        let mut r = rng_for(seed, k as u64);
        let root = corner + Complex64::new(r.random::<f64>() * side, r.random::<f64>() * side);
        let u: f64 = r.random();
        let duration = 1.0 / (inv_lo - u * inv_span);
        if !region.contains(root) {
            continue;
        }
        let poly = brownian_bridge_loop(root, duration, resolution.steps(duration), &mut r);
        if poly.iter().all(|&z| region.contains(z)) {
            loops.push(BrownianLoop {
                root,
                duration,
                polyline: poly,
            });
            labels.push(k as u64);
        }
    }
    Ok(LoopSoup {
        loops,
        intensity: c,
        t_min,
        t_cap,
        domain: region,
        seed,
        proposed,
        labels,
    })
}

fn domain_err(name: &'static str, v: f64) -> Error {
    domain(name, v, "[0, 1]")
}

/// Uniform in `[0,1)` attached to a loop label; thinning thresholds against it.
fn thinning_uniform(seed: u64, label: u64) -> f64 {
    (derive_seed(seed ^ 0x7417_1a6e, label) >> 11) as f64 / (1u64 << 53) as f64
}

/// Keeps each loop independently with probability `c_target / c`.
///
/// The keep decision for a loop is a fixed uniform per (seed, label) compared with the
/// ratio, so thinning one soup to `c₁ < c₂` with one seed yields nested loop sets.
pub fn thin_soup(soup: &LoopSoup, c_target: f64, seed: u64) -> Result<LoopSoup> {
    if !(c_target >= 0.0 && c_target <= soup.intensity) {
        return Err(domain("c_target", c_target, "[0, soup intensity]"));
    }
    let p = if soup.intensity > 0.0 {
        c_target / soup.intensity
    } else {
        0.0
    };
    let mut loops = Vec::new();
    let mut labels = Vec::new();
    for (l, &label) in soup.loops.iter().zip(&soup.labels) {
        if p >= 1.0 || thinning_uniform(seed, label) < p {
            loops.push(l.clone());
            labels.push(label);
        }
    }
    Ok(LoopSoup {
        loops,
        intensity: c_target,
        labels,
        ..soup.clone()
    })
}
