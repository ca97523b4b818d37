//! Curve extraction by composing per-step slit maps (zipper scheme).
//!
//! On each step `[t_{k−1}, t_k]` the driver is replaced by the self-similar driver that
//! grows a straight slit from `W_{k−1}` whose tip is the preimage of `W_k`. The inverse
//! of that step's Loewner map is
//!
//! ```text
//! w ↦ W_{k−1} + (w − W_k + x_l)^{1−α} (w − W_k − x_r)^{α},
//! x_l = 2√(Δt(1−α)/α),  x_r = 2√(Δt α/(1−α)),  x_l − x_r = ΔW
//! ```
//!
//! with `α ∈ (0,1)` the slit angle over π. `α = 1/2` is the vertical slit.

use num_complex::Complex;
use serde::Serialize;

use super::driver::DrivingFunction;
use crate::scalar::Scalar;

/// Which slit family each step uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum SlitScheme {
    /// Straight slit from `W_{k−1}` with tip preimage `W_k`.
    #[default]
    Tilted,
    /// Vertical slit at `W_k` (piecewise-constant driver).
    Vertical,
}

/// Sampled SLE curve: tip positions at the driver's capacity times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoewnerTrace<T = f64> {
    pub points: Vec<Complex<T>>,
    pub times: Vec<T>,
    pub kappa: T,
}

impl<T: Scalar> LoewnerTrace<T> {
    /// CSV with header `t,re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,re,im\n");
        for (t, z) in self.times.iter().zip(&self.points) {
            s.push_str(&format!(
                "{:?},{:?},{:?}\n",
                t.as_f64(),
                z.re.as_f64(),
                z.im.as_f64()
            ));
        }
        s
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Precomputed inverse slit map for one step.
#[derive(Debug, Clone, Copy)]
struct SlitStep<T> {
    base: T,
    tip_pre: T,
    alpha: T,
    xl: T,
    xr: T,
}

impl<T: Scalar> SlitStep<T> {
    fn new(w_prev: T, w_next: T, dt: T, scheme: SlitScheme) -> Self {
        let two = T::lit(2.0);
        let half = T::lit(0.5);
        match scheme {
            SlitScheme::Vertical => {
                let x = two * dt.sqrt();
                SlitStep {
                    base: w_next,
                    tip_pre: w_next,
                    alpha: half,
                    xl: x,
                    xr: x,
                }
            }
            SlitScheme::Tilted => {
                // ΔW = 2√Δt (1−2α)/√(α(1−α))  ⇔  α = (1 − r/√(r²+4))/2, r = ΔW/(2√Δt)
                let r = (w_next - w_prev) / (two * dt.sqrt());
                let s = r / (r * r + T::lit(4.0)).sqrt();
                let alpha = (half * (T::one() - s))
                    .max(T::lit(1e-9))
                    .min(T::one() - T::lit(1e-9));
                let xl = two * (dt * (T::one() - alpha) / alpha).sqrt();
                let xr = two * (dt * alpha / (T::one() - alpha)).sqrt();
                SlitStep {
                    base: w_prev,
                    tip_pre: w_next,
                    alpha,
                    xl,
                    xr,
                }
            }
        }
    }

    #[inline]
    fn apply(&self, w: Complex<T>) -> Complex<T> {
        let mut z = w - Complex::new(self.tip_pre, T::zero());
        if !(z.im > T::zero()) {
            // keep real points on the principal branch from above
            z.im = T::zero();
        }
        let a = z + Complex::new(self.xl, T::zero());
        let b = z - Complex::new(self.xr, T::zero());
        let half = T::lit(0.5);
        let f = if self.alpha == half {
            a.sqrt() * b.sqrt()
        } else {
            a.powf(T::one() - self.alpha) * b.powf(self.alpha)
        };
        let mut out = f + Complex::new(self.base, T::zero());
        if out.im < T::zero() {
            out.im = T::zero();
        }
        out
    }
}

/// Tip positions `η(t_k) = g_{t_k}^{-1}(W_{t_k})` for every driver time.
pub fn trace_from_driving<T: Scalar>(driving: &DrivingFunction<T>, scheme: SlitScheme) -> LoewnerTrace<T> {
    trace_at_steps(driving, scheme, 1)
}

/// As [`trace_from_driving`] but only every `stride`-th tip (plus the last) is computed.
///
/// Blocks of steps far from the point being unzipped are applied through a truncated Laurent
/// expansion of their composed map, which keeps long traces tractable.
pub fn trace_at_steps<T: Scalar>(
    driving: &DrivingFunction<T>,
    scheme: SlitScheme,
    stride: usize,
) -> LoewnerTrace<T> {
    let zipper = Zipper::new(driving, scheme);
    collect_tips(driving, stride, |k, w| zipper.unzip(k, w))
}

/// Reference O(n²) composition of every slit map, kept for cross-checks.
pub fn trace_direct<T: Scalar>(
    driving: &DrivingFunction<T>,
    scheme: SlitScheme,
    stride: usize,
) -> LoewnerTrace<T> {
    let steps = build_steps(driving, scheme);
    collect_tips(driving, stride, |k, mut w| {
        for step in steps[..k].iter().rev() {
            w = step.apply(w);
        }
        w
    })
}

fn build_steps<T: Scalar>(driving: &DrivingFunction<T>, scheme: SlitScheme) -> Vec<SlitStep<T>> {
    (1..driving.len())
        .map(|k| {
            SlitStep::new(
                driving.values[k - 1],
                driving.values[k],
                driving.times[k] - driving.times[k - 1],
                scheme,
            )
        })
        .collect()
}

fn collect_tips<T: Scalar>(
    driving: &DrivingFunction<T>,
    stride: usize,
    unzip: impl Fn(usize, Complex<T>) -> Complex<T>,
) -> LoewnerTrace<T> {
    let stride = stride.max(1);
    let n = driving.len();
    let mut points = vec![Complex::new(driving.values[0], T::zero())];
    let mut times = vec![driving.times[0]];
    for k in 1..n {
        if k % stride != 0 && k != n - 1 {
            continue;
        }
        points.push(unzip(k, Complex::new(driving.values[k], T::zero())));
        times.push(driving.times[k]);
    }
    LoewnerTrace {
        points,
        times,
        kappa: driving.kappa,
    }
}

/// Driver and trace after adaptive refinement.
#[derive(Debug, Clone)]
pub struct RefinedTrace {
    pub driving: DrivingFunction<f64>,
    pub trace: LoewnerTrace<f64>,
    pub rounds: usize,
    /// Largest remaining distance between consecutive tips.
    pub max_jump: f64,
}

/// Refines the capacity grid where consecutive tips are farther apart than `max_jump`.
///
/// A coarse step with tip jump `J` is split into `⌈(J/max_jump)²⌉` pieces (at most 64) whose
/// driver values are drawn from the Brownian bridge, so the refined driver has the same law.
/// Uniform capacity sampling under-resolves the fjords of κ > 4 traces; this repairs that.
pub fn refine_trace(
    driving: &DrivingFunction<f64>,
    scheme: SlitScheme,
    max_jump: f64,
    max_rounds: usize,
    seed: u64,
) -> RefinedTrace {
    use rand::Rng as _;
    use rand_distr::StandardNormal;

    let mut d = driving.clone();
    let mut trace = trace_at_steps(&d, scheme, 1);
    let mut rounds = 0;
    loop {
        let jumps: Vec<f64> = trace.points.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        let worst = jumps.iter().copied().fold(0.0, f64::max);
        if worst <= max_jump || rounds >= max_rounds {
            return RefinedTrace {
                driving: d,
                trace,
                rounds,
                max_jump: worst,
            };
        }
        let mut rng = crate::rng::rng_for(seed, rounds as u64);
        let kappa = d.kappa;
        let mut times = Vec::with_capacity(d.len() * 2);
        let mut values = Vec::with_capacity(d.len() * 2);
        times.push(d.times[0]);
        values.push(d.values[0]);
        for (k, &jump) in jumps.iter().enumerate() {
            let (ta, tb) = (d.times[k], d.times[k + 1]);
            let wb = d.values[k + 1];
            if jump > max_jump {
                let m = ((jump / max_jump).powi(2).ceil() as usize).clamp(2, 64);
                let h = (tb - ta) / m as f64;
                let (mut t, mut w) = (ta, d.values[k]);
                for i in 1..m {
                    let tn = ta + i as f64 * h;
                    let rest = tb - t;
                    let mean = w + (wb - w) * (tn - t) / rest;
                    let var = kappa * (tn - t) * (tb - tn) / rest;
                    let z: f64 = rng.sample(StandardNormal);
                    w = mean + var.max(0.0).sqrt() * z;
                    t = tn;
                    times.push(t);
                    values.push(w);
                }
            }
            times.push(tb);
            values.push(wb);
        }
        d = DrivingFunction {
            times,
            values,
            kappa,
            stopped_at_threshold: d.stopped_at_threshold,
        };
        trace = trace_at_steps(&d, scheme, 1);
        rounds += 1;
    }
}

const BRANCHING: usize = 4;
const TERMS: usize = 32;
const SAMPLES: usize = 128;
/// Coefficients are sampled on `|w − c| = SAMPLE_RADIUS·r` and used for `|w − c| ≥ FAR_RADIUS·r`.
const SAMPLE_RADIUS: f64 = 1.25;
const FAR_RADIUS: f64 = 2.5;

/// Composed map of an aligned block of steps: `w ↦ w + Σ b_k (r/(w − c))^k` outside `|w − c| ≤ r`.
#[derive(Debug, Clone)]
struct Block<T> {
    center: T,
    radius: T,
    coeffs: [T; TERMS],
}

/// Hierarchy of blocks of `BRANCHING^ℓ` steps over the per-step slit maps.
struct Zipper<T> {
    steps: Vec<SlitStep<T>>,
    levels: Vec<Vec<Block<T>>>,
}

impl<T: Scalar> Zipper<T> {
    fn new(driving: &DrivingFunction<T>, scheme: SlitScheme) -> Self {
        let steps = build_steps(driving, scheme);
        let mut z = Zipper {
            steps,
            levels: vec![vec![]],
        };
        let n = z.steps.len();
        let mut size = BRANCHING;
        let mut level = 1;
        while size <= n {
            let count = n / size;
            let mut blocks = Vec::with_capacity(count);
            for b in 0..count {
                blocks.push(z.build_block(driving, level, b, size));
            }
            z.levels.push(blocks);
            size *= BRANCHING;
            level += 1;
        }
        z
    }

    fn build_block(&self, driving: &DrivingFunction<T>, level: usize, idx: usize, size: usize) -> Block<T> {
        let a = idx * size;
        let knots = &driving.values[a..=a + size];
        let lo = knots.iter().copied().fold(T::infinity(), T::min);
        let hi = knots.iter().copied().fold(T::neg_infinity(), T::max);
        let span = driving.times[a + size] - driving.times[a];
        let two = T::lit(2.0);
        // the block's singular interval lies in [min W − 2√T, max W + 2√T]
        let center = (lo + hi) / two;
        let radius = (hi - lo) / two + two * span.sqrt() + T::lit(1e-12) * (T::one() + center.abs());
        let rho = T::lit(SAMPLE_RADIUS) * radius;
        let half = SAMPLES / 2;
        let mut acc = [T::zero(); TERMS];
        for m in 0..half {
            let theta = T::PI() * (T::from_usize_lossy(m) + T::lit(0.5)) / T::from_usize_lossy(half);
            let e = Complex::new(theta.cos(), theta.sin());
            let w = Complex::new(center, T::zero()) + e.scale(rho);
            let mut v = w;
            for child in (idx * BRANCHING..(idx + 1) * BRANCHING).rev() {
                v = self.apply(level - 1, child, v);
            }
            let y = v - w;
            let mut ek = Complex::new(T::one(), T::zero());
            for c in acc.iter_mut() {
                *c = *c + (y * ek).re;
                ek = ek * e;
            }
        }
        let scale = T::lit(2.0) / T::from_usize_lossy(SAMPLES);
        let ratio = T::lit(SAMPLE_RADIUS);
        let mut pow = T::one();
        let mut coeffs = [T::zero(); TERMS];
        for (c, a) in coeffs.iter_mut().zip(acc) {
            *c = a * scale * pow;
            pow = pow * ratio;
        }
        Block {
            center,
            radius,
            coeffs,
        }
    }

    fn apply(&self, level: usize, idx: usize, w: Complex<T>) -> Complex<T> {
        if level == 0 {
            return self.steps[idx].apply(w);
        }
        let block = &self.levels[level][idx];
        let d = w - Complex::new(block.center, T::zero());
        if d.norm() >= T::lit(FAR_RADIUS) * block.radius {
            let u = Complex::new(block.radius, T::zero()) / d;
            let mut acc = Complex::new(T::zero(), T::zero());
            for &c in block.coeffs.iter().rev() {
                acc = acc * u + Complex::new(c, T::zero());
            }
            let mut out = w + acc;
            if out.im < T::zero() {
                out.im = T::zero();
            }
            return out;
        }
        let mut v = w;
        for child in (idx * BRANCHING..(idx + 1) * BRANCHING).rev() {
            v = self.apply(level - 1, child, v);
        }
        v
    }

    /// Applies steps `k−1, …, 0` to `w`.
    fn unzip(&self, k: usize, mut w: Complex<T>) -> Complex<T> {
        let mut j = k;
        while j > 0 {
            let mut level = 0;
            let mut size = 1;
            while level + 1 < self.levels.len() && j % (size * BRANCHING) == 0 {
                level += 1;
                size *= BRANCHING;
            }
            w = self.apply(level, j / size - 1, w);
            j -= size;
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loewner::{sample_sle_driving, solve_forward};
    use num_complex::Complex64;

    #[test]
    fn hydrodynamic_normalization() {
        for &(w0, w1) in &[(0.0, 0.3), (0.2, -0.5), (0.0, 0.0)] {
            let dt = 0.01;
            let s = SlitStep::new(w0, w1, dt, SlitScheme::Tilted);
            let z = Complex64::from_polar(1e4, 0.7);
            // g^{-1}(w) = w − 2Δt/w + O(w⁻²)
            let err = (s.apply(z) - z + 2.0 * dt / z).norm();
            assert!(err < 1e-8, "{err}");
            // the preimage of W_k is the tip, the base sits at W_{k−1}
            assert!(s.apply(Complex64::new(w1, 0.0)).im > 0.0);
            let base = s.apply(Complex64::new(w1 + s.xr, 0.0));
            assert!((base - Complex64::new(w0, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn zero_driver_vertical_slit() {
        let d = DrivingFunction::<f64>::zero(1e-4, 10_000);
        let tr = trace_at_steps(&d, SlitScheme::Tilted, 500);
        for (t, z) in tr.times.iter().zip(&tr.points).skip(1) {
            let exact = 2.0 * t.sqrt();
            assert!(z.re.abs() < 1e-9);
            assert!((z.im - exact).abs() / exact < 1e-3);
        }
    }

    #[test]
    fn self_similar_driver_draws_a_ray() {
        let c = 1.3;
        let d = DrivingFunction::from_fn(1e-4, 5000, 0.0, |t: f64| c * t.sqrt());
        let tr = trace_at_steps(&d, SlitScheme::Tilted, 50);
        let dir = tr.points.last().unwrap() / tr.points.last().unwrap().norm();
        for z in tr.points.iter().skip(10) {
            let resid = (z.re * dir.im - z.im * dir.re).abs() / z.norm();
            assert!(resid < 1e-2, "{resid}");
        }
    }

    #[test]
    fn tips_map_back_to_driver() {
        let d = sample_sle_driving(2.0, 1e-3, 1000, 9).unwrap();
        let tr = trace_at_steps(&d, SlitScheme::Tilted, 100);
        for (t, z) in tr.times.iter().zip(&tr.points).skip(1) {
            // tip is the preimage of W_t; step just off the curve to stay defined
            let probe = *z + Complex64::new(0.0, 1e-3);
            if let Some(g) = solve_forward(&d, probe, *t).unwrap().mapped() {
                assert!((g.re - d.value_at(*t)).abs() < 1e-1);
                assert!(g.im < 0.2);
            }
        }
        assert!(tr.points.iter().all(|z| z.im >= 0.0));
        assert_eq!(tr.points[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn blocked_zipper_matches_direct_composition() {
        for &(kappa, scheme) in &[(2.0, SlitScheme::Tilted), (6.0, SlitScheme::Tilted), (4.0, SlitScheme::Vertical)] {
            let d = sample_sle_driving(kappa, 1e-4, 3000, 21).unwrap();
            let fast = trace_at_steps(&d, scheme, 7);
            let slow = trace_direct(&d, scheme, 7);
            let err = fast
                .points
                .iter()
                .zip(&slow.points)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-9, "kappa {kappa}: {err}");
        }
    }

    #[test]
    fn single_precision_trace() {
        let d = DrivingFunction::<f32>::zero(1e-3, 1000);
        let tr = trace_from_driving(&d, SlitScheme::Vertical);
        let tip = tr.points.last().unwrap();
        assert!((tip.im - 2.0).abs() < 1e-3);
    }

    #[test]
    fn csv_header() {
        let d = DrivingFunction::zero(0.5, 2);
        let csv = trace_from_driving(&d, SlitScheme::Vertical).to_csv();
        assert!(csv.starts_with("t,re,im\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
