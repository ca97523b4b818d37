use rand::Rng as _;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::rng::rng_from_seed;

/// Jumps of an `α̂`-stable subordinator-like process above a size floor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StableJumpRecord {
    pub alpha_hat: f64,
    pub horizon: f64,
    pub floor: f64,
    /// Lévy measure constant: `Π(dy) = C y^{−α̂−1} dy`.
    pub constant: f64,
    pub sizes: Vec<f64>,
    pub seed: u64,
}

impl StableJumpRecord {
    /// Number of jumps with size in `[lo, hi)`.
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.sizes.iter().filter(|&&y| y >= lo && y < hi).count()
    }
}

/// Mean number of jumps of size at least `y` by time `t`: `C·t·y^{−α̂}/α̂`.
pub fn expected_jumps_above(alpha_hat: f64, t: f64, y: f64, c: f64) -> f64 {
    c * t * y.powf(-alpha_hat) / alpha_hat
}

/// Poisson number of jumps above `floor` on `[0, t]`, with Pareto(`α̂`) sizes.
pub fn sample_stable_jumps(alpha_hat: f64, t: f64, floor: f64, c: f64, seed: u64) -> Result<StableJumpRecord> {
    if !(alpha_hat > 1.0 && alpha_hat < 2.0) {
        return Err(domain("alpha_hat", alpha_hat, "(1, 2)"));
    }
    if !(floor > 0.0) {
        return Err(domain("floor", floor, "(0, ∞)"));
    }
    if !(t >= 0.0 && c >= 0.0) {
        return Err(Error::Invalid("horizon and constant must be nonnegative".into()));
    }
    let mean = expected_jumps_above(alpha_hat, t, floor, c);
    let mut rng = rng_from_seed(seed);
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::Invalid(e.to_string()))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let inv = -1.0 / alpha_hat;
    let sizes = (0..count)
        .map(|_| floor * (1.0 - rng.random::<f64>()).powf(inv))
        .collect();
    Ok(StableJumpRecord {
        alpha_hat,
        horizon: t,
        floor,
        constant: c,
        sizes,
        seed,
    })
}
