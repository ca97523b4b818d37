use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::Scalar;

/// Discretized Loewner driver `W` on a capacity-time grid (`hcap(K_t) = 2t`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DrivingFunction<T = f64> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub kappa: T,
    /// Set when an SLE_κ(ρ) integration stopped at the continuation threshold.
    pub stopped_at_threshold: Option<T>,
}

impl<T: Scalar> DrivingFunction<T> {
    pub fn new(times: Vec<T>, values: Vec<T>, kappa: T) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::Invalid(format!(
                "driver needs matching nonempty times/values, got {} and {}",
                times.len(),
                values.len()
            )));
        }
        if times[0] != T::zero() {
            return Err(Error::Invalid("driver times must start at 0".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("driver times must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("driver values must be finite".into()));
        }
        Ok(DrivingFunction {
            times,
            values,
            kappa,
            stopped_at_threshold: None,
        })
    }

    /// Uniform grid with `W(t_k) = f(t_k)`.
    pub fn from_fn(dt: T, n_steps: usize, kappa: T, f: impl Fn(T) -> T) -> Self {
        let times: Vec<T> = (0..=n_steps).map(|k| T::from_usize_lossy(k) * dt).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        DrivingFunction {
            times,
            values,
            kappa,
            stopped_at_threshold: None,
        }
    }

    pub fn zero(dt: T, n_steps: usize) -> Self {
        Self::from_fn(dt, n_steps, T::zero(), |_| T::zero())
    }

    pub fn horizon(&self) -> T {
        *self.times.last().expect("nonempty driver")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the interval `[t_k, t_{k+1}]` containing `t`.
    pub(crate) fn interval(&self, t: T) -> usize {
        let n = self.times.len();
        if n < 2 {
            return 0;
        }
        match self
            .times
            .binary_search_by(|x| x.partial_cmp(&t).expect("finite times"))
        {
            Ok(k) => k.min(n - 2),
            Err(k) => k.saturating_sub(1).min(n - 2),
        }
    }

    /// Piecewise-linear interpolation of `W`.
    pub fn value_at(&self, t: T) -> T {
        if self.times.len() == 1 {
            return self.values[0];
        }
        let k = self.interval(t);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let (w0, w1) = (self.values[k], self.values[k + 1]);
        w0 + (w1 - w0) * (t - t0) / (t1 - t0)
    }

    /// CSV with header `t,w`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,w\n");
        for (t, w) in self.times.iter().zip(&self.values) {
            s.push_str(&format!("{:?},{:?}\n", t.as_f64(), w.as_f64()));
        }
        s
    }
}

/// Chordal SLE_κ driver `W_t = √κ B_t` on a uniform grid.
pub fn sample_sle_driving(kappa: f64, dt: f64, n_steps: usize, seed: u64) -> Result<DrivingFunction> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(domain("kappa", kappa, "[0, ∞)"));
    }
    if !(dt > 0.0) {
        return Err(domain("dt", dt, "(0, ∞)"));
    }
    if n_steps == 0 {
        return Err(Error::Invalid("n_steps must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let scale = (kappa * dt).sqrt();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut w = 0.0;
    times.push(0.0);
    values.push(w);
    for k in 1..=n_steps {
        let z: f64 = rng.sample(StandardNormal);
        w += scale * z;
        times.push(k as f64 * dt);
        values.push(w);
    }
    Ok(DrivingFunction {
        times,
        values,
        kappa,
        stopped_at_threshold: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Summary;

    #[test]
    fn zero_kappa_is_flat() {
        let d = sample_sle_driving(0.0, 0.01, 100, 5).unwrap();
        assert!(d.values.iter().all(|&w| w == 0.0));
        assert_eq!(d.values[0], 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = sample_sle_driving(6.0, 1e-3, 1000, 7).unwrap();
        let b = sample_sle_driving(6.0, 1e-3, 1000, 7).unwrap();
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn variance_at_unit_time() {
        let kappa = 3.0;
        let ends: Vec<f64> = (0..10_000)
            .map(|s| *sample_sle_driving(kappa, 0.05, 20, s).unwrap().values.last().unwrap())
            .collect();
        let v = Summary::of(&ends).variance;
        assert!((v - kappa).abs() < 3.0 * (2.0f64 / 1e4).sqrt() * kappa, "{v}");
    }

    #[test]
    fn interpolation() {
        let d = DrivingFunction::from_fn(0.5, 4, 1.0, |t: f64| t * t);
        assert_eq!(d.value_at(0.5), 0.25);
        assert!((d.value_at(0.75) - 0.625).abs() < 1e-15);
        assert_eq!(d.value_at(2.0), 4.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(DrivingFunction::new(vec![0.0, 0.0], vec![0.0, 1.0], 1.0).is_err());
        assert!(DrivingFunction::new(vec![0.0, 1.0], vec![0.0], 1.0).is_err());
        assert!(DrivingFunction::new(vec![0.0, 1.0], vec![0.0, f64::NAN], 1.0).is_err());
        assert!(sample_sle_driving(2.0, 0.0, 10, 1).is_err());
    }
}
