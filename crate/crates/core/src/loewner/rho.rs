//! SLE_κ(ρ) drivers by Euler–Maruyama on the coupled (W, V^j) system
//!
//! ```text
//! dW   = √κ dB + Σ_j Re(ρ_j / (W − V^j)) dt
//! dV^j = 2 / (V^j − W) dt
//! ```

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::driver::DrivingFunction;
use crate::error::{domain, Error, Result};
use crate::rng::rng_from_seed;

/// Force points and their weights. Boundary points remember which side of `W` they live on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForcePointState {
    pub positions: Vec<Complex64>,
    pub weights: Vec<f64>,
    /// `+1` right of `W`, `−1` left, `0` interior.
    pub sides: Vec<i8>,
}

impl ForcePointState {
    fn colliding_weight(&self, w: f64, side: i8) -> f64 {
        self.positions
            .iter()
            .zip(&self.weights)
            .zip(&self.sides)
            .filter(|((v, _), &s)| s == side && v.re == w)
            .map(|((_, r), _)| *r)
            .sum()
    }

    fn threshold_hit(&self, w: f64) -> bool {
        [-1i8, 1].iter().any(|&s| {
            let any = self
                .positions
                .iter()
                .zip(&self.sides)
                .any(|(v, &side)| side == s && v.re == w);
            any && self.colliding_weight(w, s) <= -2.0
        })
    }
}

/// SLE_κ(ρ) driver with force points `force_points` (closed half-plane) and weights `rhos`.
///
/// A boundary point placed exactly at `W_0` is read as `0⁺`. Integration stops, with
/// `stopped_at_threshold` set, once the weights colliding with `W` from one side sum to at most −2.
pub fn sample_sle_kappa_rho_driving(
    kappa: f64,
    rhos: &[f64],
    force_points: &[Complex64],
    dt: f64,
    n_steps: usize,
    seed: u64,
) -> Result<(DrivingFunction, ForcePointState)> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(domain("kappa", kappa, "[0, ∞)"));
    }
    if !(dt > 0.0) {
        return Err(domain("dt", dt, "(0, ∞)"));
    }
    if n_steps == 0 {
        return Err(Error::Invalid("n_steps must be at least 1".into()));
    }
    if rhos.len() != force_points.len() {
        return Err(Error::Invalid(format!(
            "{} weights for {} force points",
            rhos.len(),
            force_points.len()
        )));
    }
    if rhos.iter().any(|r| !r.is_finite()) {
        return Err(Error::Invalid("force-point weights must be finite".into()));
    }
    if force_points.iter().any(|v| v.im < 0.0 || !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Invalid("force points must lie in the closed upper half-plane".into()));
    }

    let mut state = ForcePointState {
        positions: force_points.to_vec(),
        weights: rhos.to_vec(),
        sides: force_points
            .iter()
            .map(|v| match (v.im > 0.0, v.re < 0.0) {
                (true, _) => 0,
                (false, true) => -1,
                (false, false) => 1,
            })
            .collect(),
    };
    let mut w = 0.0;
    let mut times = vec![0.0];
    let mut values = vec![w];
    if state.threshold_hit(w) {
        let d = DrivingFunction {
            times,
            values,
            kappa,
            stopped_at_threshold: Some(0.0),
        };
        return Ok((d, state));
    }

    let mut rng = rng_from_seed(seed);
    let scale = (kappa * dt).sqrt();
    let reg = scale.max(dt.sqrt() * 1e-3);
    let mut stopped = None;
    for k in 1..=n_steps {
        let z: f64 = rng.sample(StandardNormal);
        let mut drift = 0.0;
        let mut moves = Vec::with_capacity(state.positions.len());
        for ((v, &rho), &side) in state.positions.iter().zip(&state.weights).zip(&state.sides) {
            let diff = *v - w;
            let step = if side == 0 {
                drift += (rho / -diff).re;
                2.0 / diff * dt
            } else {
                let d = diff.re.abs().max(reg);
                let s = side as f64;
                drift += -s * rho / d;
                Complex64::new(s * 2.0 / d * dt, 0.0)
            };
            moves.push(step);
        }
        w = w + scale * z + drift * dt;
        for ((v, step), &side) in state.positions.iter_mut().zip(&moves).zip(&state.sides) {
            *v += step;
            if side != 0 && (side as f64) * (v.re - w) <= 0.0 {
                v.re = w;
            }
            if side == 0 && v.im < 0.0 {
                v.im = 0.0;
            }
        }
        let t = k as f64 * dt;
        times.push(t);
        values.push(w);
        if state.threshold_hit(w) {
            stopped = Some(t);
            break;
        }
    }
    let d = DrivingFunction {
        times,
        values,
        kappa,
        stopped_at_threshold: stopped,
    };
    Ok((d, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loewner::sample_sle_driving;

    #[test]
    fn zero_weight_matches_plain_driver() {
        let plain = sample_sle_driving(3.0, 1e-3, 500, 11).unwrap();
        let (d, _) =
            sample_sle_kappa_rho_driving(3.0, &[0.0], &[Complex64::new(0.5, 0.0)], 1e-3, 500, 11).unwrap();
        assert_eq!(plain.values, d.values);
        assert!(d.stopped_at_threshold.is_none());
    }

    #[test]
    fn immediate_threshold() {
        let (d, _) =
            sample_sle_kappa_rho_driving(3.0, &[-3.0], &[Complex64::new(0.0, 0.0)], 1e-3, 100, 1).unwrap();
        assert_eq!(d.stopped_at_threshold, Some(0.0));
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn far_force_point_barely_matters() {
        let rho = 2.0;
        let plain = sample_sle_driving(3.0, 1e-3, 1000, 5).unwrap();
        let (d, _) =
            sample_sle_kappa_rho_driving(3.0, &[rho], &[Complex64::new(1e6, 0.0)], 1e-3, 1000, 5).unwrap();
        let dev = plain
            .values
            .iter()
            .zip(&d.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(dev <= 10.0 * rho * 1e-6, "{dev}");
    }

    #[test]
    fn boundary_points_stay_on_their_side() {
        let (d, st) = sample_sle_kappa_rho_driving(
            4.0,
            &[1.0, 0.5],
            &[Complex64::new(0.3, 0.0), Complex64::new(-0.2, 0.0)],
            1e-4,
            5000,
            8,
        )
        .unwrap();
        let w = *d.values.last().unwrap();
        assert!(st.positions[0].re >= w);
        assert!(st.positions[1].re <= w);
    }

    #[test]
    fn strongly_attracting_point_stops() {
        // ρ = −2.5 near the driver: W is pulled in and collides.
        let (d, _) =
            sample_sle_kappa_rho_driving(2.0, &[-2.5], &[Complex64::new(0.05, 0.0)], 1e-5, 200_000, 3).unwrap();
        assert!(d.stopped_at_threshold.is_some());
    }

    #[test]
    fn interior_point_moves_by_loewner_flow() {
        let z0 = Complex64::new(0.0, 1.0);
        let (_, st) = sample_sle_kappa_rho_driving(0.0, &[0.0], &[z0], 1e-4, 1000, 1).unwrap();
        // zero driver: V_t = √(z² + 4t)
        let exact = (z0 * z0 + 4.0 * 0.1).sqrt();
        assert!((st.positions[0] - exact).norm() < 1e-3);
    }
}
