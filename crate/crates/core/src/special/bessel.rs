//! Radial Bessel process on (0, π): `dΘ = 2a·cot(Θ) ds + dW`.
//!
//! The transition density is the Gegenbauer expansion
//!
//! ```text
//! p_s(x, y) = sin^{4a}(y) Σ_n C_n^{(2a)}(cos x) C_n^{(2a)}(cos y) / h_n · exp(−n(n+4a)s/2)
//! h_n       = ∫_{−1}^{1} (1−u²)^{2a−1/2} C_n^{(2a)}(u)² du
//! ```
//!
//! where `sin(y)·(1−cos²y)^{2a−1/2}` has been folded into `sin^{4a}(y)`.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::gegenbauer::{gegenbauer, gegenbauer_all};
use super::quadrature::integrate;
use crate::error::{domain, Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::Scalar;

/// Tail bound targeted when choosing the truncation.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Truncated transition density of the radial Bessel process.
#[derive(Debug, Clone, Serialize)]
pub struct BesselDensitySpec<T> {
    /// Drift parameter; the process has dimension `4a + 1`.
    pub a: T,
    pub s: T,
    /// Highest retained degree.
    pub truncation: usize,
    /// Normalization integrals `h_0 … h_N`.
    norms: Vec<T>,
}

fn norm_integral<T: Scalar>(n: usize, index: T, a: T) -> T {
    // u = cos φ turns the weight into sin^{4a}(φ) and removes the endpoint singularity.
    let four_a = T::lit(4.0) * a;
    integrate(
        |phi: T| {
            let c = gegenbauer(n, index, phi.cos());
            phi.sin().powf(four_a) * c * c
        },
        T::zero(),
        T::PI(),
        T::lit(1e-13),
    )
}

/// Checks that `sin(y)·(1−cos²y)^{2a−1/2}` equals `sin^{4a}(y)` before the series is used.
fn check_prefactor<T: Scalar>(a: T) -> Result<()> {
    for i in 1..64 {
        let y = T::PI() * T::from_usize_lossy(i) / T::lit(64.0);
        let c = y.cos();
        let long = y.sin() * (T::one() - c * c).powf(T::lit(2.0) * a - T::lit(0.5));
        let short = y.sin().powf(T::lit(4.0) * a);
        if (long - short).abs() > T::lit(1e-5).max(T::epsilon() * T::lit(64.0)) {
            return Err(Error::Invalid(format!(
                "density prefactor mismatch at y = {:?}",
                y
            )));
        }
    }
    Ok(())
}

impl<T: Scalar> BesselDensitySpec<T> {
    /// Builds the truncated series with dropped-tail bound below [`TAIL_TOLERANCE`].
    pub fn new(a: T, s: T) -> Result<Self> {
        if !(a > T::zero()) {
            return Err(domain("a", a.as_f64(), "(0, ∞)"));
        }
        if !(s > T::zero()) {
            return Err(domain("s", s.as_f64(), "(0, ∞)"));
        }
        check_prefactor(a)?;
        let index = T::lit(2.0) * a;
        let four_a = T::lit(4.0) * a;
        let decay = |n: usize| {
            let nf = T::from_usize_lossy(n);
            (-(nf / T::lit(2.0)) * (nf + four_a) * s).exp()
        };
        // b_n = C_n(1)^2 / h_n bounds |C_n(cos x) C_n(cos y)| / h_n since sin^{4a} ≤ 1.
        let mut norms = vec![norm_integral(0, index, a)];
        let mut n = 0usize;
        loop {
            let next = n + 1;
            norms.push(norm_integral(next, index, a));
            let c1 = gegenbauer(next, index, T::one());
            let b_next = c1 * c1 / norms[next];
            let term_next = b_next * decay(next);
            let c2 = gegenbauer(next + 1, index, T::one());
            let b_after = c2 * c2 / norm_integral(next + 1, index, a);
            let ratio = (b_after / b_next) * decay(next + 1) / decay(next);
            if ratio < T::one() && term_next / (T::one() - ratio) < T::lit(TAIL_TOLERANCE) {
                norms.pop();
                break;
            }
            n = next;
            if n > 2000 {
                return Err(Error::Invalid("series truncation did not converge".into()));
            }
        }
        Ok(BesselDensitySpec {
            a,
            s,
            truncation: n,
            norms,
        })
    }

    /// Truncated `p_s(x, y)` for `x, y ∈ (0, π)`.
    pub fn density(&self, x: T, y: T) -> T {
        let index = T::lit(2.0) * self.a;
        let cx = gegenbauer_all(self.truncation, index, x.cos());
        let cy = gegenbauer_all(self.truncation, index, y.cos());
        let four_a = T::lit(4.0) * self.a;
        let mut sum = T::zero();
        for n in 0..=self.truncation {
            let nf = T::from_usize_lossy(n);
            let decay = (-(nf / T::lit(2.0)) * (nf + four_a) * self.s).exp();
            sum = sum + cx[n] * cy[n] / self.norms[n] * decay;
        }
        y.sin().powf(four_a) * sum
    }

    /// `∫_0^y p_s(x, u) du`.
    pub fn cdf(&self, x: T, y: T) -> T {
        integrate(|u| self.density(x, u), T::zero(), y, T::lit(1e-11))
    }

    /// Stationary density `sin^{4a}(y) / h_0`.
    pub fn stationary(&self, y: T) -> T {
        y.sin().powf(T::lit(4.0) * self.a) / self.norms[0]
    }
}

/// Free-function form of [`BesselDensitySpec::density`].
pub fn radial_bessel_density<T: Scalar>(spec: &BesselDensitySpec<T>, x: T, y: T) -> T {
    spec.density(x, y)
}

/// Distance from 0 and π below which Euler steps are re-drawn.
pub const BOUNDARY_GUARD: f64 = 1e-4;
const REDRAW_BUDGET: usize = 10_000;

/// Euler–Maruyama endpoints of the radial Bessel SDE at time `s`.
///
/// Steps landing outside `(δ, π−δ)` are re-drawn.
pub fn simulate_radial_bessel(
    a: f64,
    theta0: f64,
    s: f64,
    dt: f64,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(theta0 > 0.0 && theta0 < std::f64::consts::PI) {
        return Err(domain("theta0", theta0, "(0, π)"));
    }
    if !(s > 0.0) {
        return Err(domain("s", s, "(0, ∞)"));
    }
    if !(dt > 0.0 && dt <= 1e-3 * s * (1.0 + 1e-12)) {
        return Err(domain("dt", dt, "(0, 1e-3·s]"));
    }
    let mut rng = rng_from_seed(seed);
    let steps = (s / dt).round().max(1.0) as usize;
    let h = s / steps as f64;
    let sq = h.sqrt();
    let lo = BOUNDARY_GUARD;
    let hi = std::f64::consts::PI - BOUNDARY_GUARD;
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let mut th = theta0;
        for _ in 0..steps {
            let drift = 2.0 * a / th.tan() * h;
            let mut tries = 0;
            loop {
                let z: f64 = rng.sample(StandardNormal);
                let next = th + drift + sq * z;
                if next > lo && next < hi {
                    th = next;
                    break;
                }
                tries += 1;
                if tries >= REDRAW_BUDGET {
                    return Err(Error::RejectionBudget {
                        budget: REDRAW_BUDGET,
                        advice: "use a smaller dt",
                    });
                }
            }
        }
        out.push(th);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_time() {
        assert!(BesselDensitySpec::new(0.5, 0.0).is_err());
        assert!(BesselDensitySpec::new(0.5, -1.0).is_err());
        assert!(BesselDensitySpec::new(-0.5, 1.0).is_err());
    }

    #[test]
    fn normalizes() {
        for &(a, s) in &[(0.5, 0.5), (1.0 / 3.0, 0.1), (0.7, 1.3)] {
            let spec = BesselDensitySpec::new(a, s).unwrap();
            for &x in &[0.3, PI / 2.0, 2.5] {
                let total = spec.cdf(x, PI);
                assert!((total - 1.0).abs() < 1e-6, "a={a} s={s} x={x}: {total}");
            }
        }
    }

    #[test]
    fn detailed_balance() {
        let spec = BesselDensitySpec::new(0.4, 0.25).unwrap();
        let w = |t: f64| t.sin().powf(1.6);
        for &(x, y) in &[(0.4, 1.9), (1.0, 2.8), (2.2, 0.7)] {
            let lhs = spec.density(x, y) * w(x);
            let rhs = spec.density(y, x) * w(y);
            assert!((lhs - rhs).abs() < 1e-8);
        }
    }

    #[test]
    fn relaxes_to_stationary() {
        let spec = BesselDensitySpec::new(0.5, 20.0).unwrap();
        let mut sup: f64 = 0.0;
        for i in 1..200 {
            let y = PI * i as f64 / 200.0;
            sup = sup.max((spec.density(0.7, y) - spec.stationary(y)).abs());
        }
        assert!(sup < 1e-6);
    }

    #[test]
    fn positivity_on_grid() {
        let spec = BesselDensitySpec::new(0.5, 0.05).unwrap();
        for i in 1..200 {
            for j in 1..200 {
                let x = PI * i as f64 / 200.0;
                let y = PI * j as f64 / 200.0;
                assert!(spec.density(x, y) >= -1e-12);
            }
        }
    }

    #[test]
    fn norms_match_gamma_closed_form() {
        // h_n = π 2^{1−2λ} Γ(n+2λ) / (n! (n+λ) Γ(λ)²)
        use statrs::function::gamma::ln_gamma;
        let a = 0.35;
        let lambda = 2.0 * a;
        let spec = BesselDensitySpec::new(a, 0.2).unwrap();
        for n in 0..=spec.truncation.min(20) {
            let ln = PI.ln() + (1.0 - 2.0 * lambda) * 2f64.ln() + ln_gamma(n as f64 + 2.0 * lambda)
                - ln_gamma(n as f64 + 1.0)
                - (n as f64 + lambda).ln()
                - 2.0 * ln_gamma(lambda);
            let rel = (spec.norms[n] - ln.exp()).abs() / ln.exp();
            assert!(rel < 1e-10, "n={n}: rel {rel}");
        }
    }

    #[test]
    fn endpoints_stay_inside() {
        let xs = simulate_radial_bessel(0.3, 0.2, 0.2, 2e-4, 500, 3).unwrap();
        assert!(xs.iter().all(|&x| x > 0.0 && x < PI));
    }

    #[test]
    fn dt_guard() {
        assert!(simulate_radial_bessel(0.5, 1.0, 0.5, 0.01, 10, 1).is_err());
    }
}
