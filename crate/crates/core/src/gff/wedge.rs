use rand_distr::{Distribution, Normal};

use crate::error::{domain, Error, Result};
use crate::rng::rng_for;

/// Start value of the conditioned radial process; conditioning at `0⁺` is not samplable.
pub const WEDGE_START: f64 = 0.1;

/// Drift `γ − 2/γ` of the radial part of a weight `3γ²/2 − 2` wedge field.
pub fn wedge_drift(gamma: f64) -> f64 {
    gamma - 2.0 / gamma
}

/// Path of `Y_t = s₀ + B_{2t} + (γ − 2/γ)t` on `[0, t_max]` conditioned to stay positive,
/// by rejection. Values are at times `k·dt`.
pub fn sample_wedge_radial(gamma: f64, t_max: f64, dt: f64, seed: u64) -> Result<Vec<f64>> {
    sample_wedge_radial_with(gamma, t_max, dt, WEDGE_START, 100_000, seed)
}

pub fn sample_wedge_radial_with(
    gamma: f64,
    t_max: f64,
    dt: f64,
    s0: f64,
    budget: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(gamma > std::f64::consts::SQRT_2 && gamma < 2.0) {
        return Err(domain("gamma", gamma, "(√2, 2)"));
    }
    if !(dt > 0.0) || !(t_max >= 0.0) || !(s0 > 0.0) {
        return Err(Error::Invalid("need dt > 0, t_max ≥ 0 and s0 > 0".into()));
    }
    let steps = (t_max / dt).round() as usize;
    let mu = wedge_drift(gamma) * dt;
    let inc = Normal::new(mu, (2.0 * dt).sqrt()).map_err(|e| Error::Invalid(e.to_string()))?;
    let mut path = Vec::with_capacity(steps + 1);
    for attempt in 0..budget {
        let mut rng = rng_for(seed, attempt as u64);
        path.clear();
        path.push(s0);
        let mut y = s0;
        let mut alive = true;
        for _ in 0..steps {
            y += inc.sample(&mut rng);
            if y <= 0.0 {
                alive = false;
                break;
            }
            path.push(y);
        }
        if alive {
            return Ok(path);
        }
    }
    Err(Error::RejectionBudget {
        budget,
        advice: "increase s0 or shorten the horizon",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Summary;

    #[test]
    fn drift_sign() {
        let g = 3f64.sqrt();
        assert!((wedge_drift(g) - 1.0 / g).abs() < 1e-15);
        assert!(sample_wedge_radial(1.2, 1.0, 0.01, 0).is_err());
    }

    #[test]
    fn paths_stay_positive() {
        let p = sample_wedge_radial(1.8, 5.0, 1e-3, 7).unwrap();
        assert_eq!(p.len(), 5001);
        assert!(p.iter().all(|&y| y > 0.0));
        assert_eq!(p, sample_wedge_radial(1.8, 5.0, 1e-3, 7).unwrap());
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let r = sample_wedge_radial_with(1.5, 100.0, 0.01, 1e-6, 3, 1);
        assert!(matches!(r, Err(Error::RejectionBudget { budget: 3, .. })));
    }

    #[test]
    fn long_run_speed_matches_drift() {
        // conditioning adds an O(2/drift) head start, so the speed is read off the
        // second half of the horizon and off a longer horizon
        let g = 3f64.sqrt();
        let mu = wedge_drift(g);
        let (t, dt) = (50.0, 0.01);
        let half = (t / dt / 2.0) as usize;
        let paths: Vec<Vec<f64>> = (0..500).map(|s| sample_wedge_radial(g, t, dt, s).unwrap()).collect();
        let late: Vec<f64> = paths.iter().map(|p| (p[2 * half] - p[half]) / (t / 2.0)).collect();
        assert!((Summary::of(&late).mean / mu - 1.0).abs() < 0.1);
        let t = 200.0;
        let ends: Vec<f64> = (0..500)
            .map(|s| *sample_wedge_radial(g, t, 0.02, 1000 + s).unwrap().last().unwrap() / t)
            .collect();
        let m = Summary::of(&ends).mean;
        assert!((m / mu - 1.0).abs() < 0.1, "{m}");
    }
}
