//! Pointwise integration of the forward, reverse and inverse Loewner flows.

use num_complex::Complex;
use serde::Serialize;

use super::driver::DrivingFunction;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Result of following a point under the forward flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum FlowOutcome<T> {
    Mapped(Complex<T>),
    /// The point was absorbed into the hull at this time.
    Swallowed(T),
}

impl<T: Copy> FlowOutcome<T> {
    pub fn mapped(self) -> Option<Complex<T>> {
        match self {
            FlowOutcome::Mapped(z) => Some(z),
            FlowOutcome::Swallowed(_) => None,
        }
    }

    pub fn swallow_time(self) -> Option<T> {
        match self {
            FlowOutcome::Swallowed(t) => Some(t),
            FlowOutcome::Mapped(_) => None,
        }
    }
}

/// Relative swallow tolerance: swallowed once `Im g < 1e-6·max(1, |z|)`.
pub const SWALLOW_TOLERANCE: f64 = 1e-6;
/// Fraction of `|g − W|²` allowed as a step (keeps the relative change per step near 5%).
const CURVATURE_FRACTION: f64 = 0.025;

fn check_horizon<T: Scalar>(driving: &DrivingFunction<T>, t: T) -> Result<()> {
    let horizon = driving.horizon();
    let slack = T::lit(1e-12) * horizon.max(T::one());
    if !(t >= T::zero()) || t > horizon + slack {
        return Err(Error::Range {
            t: t.as_f64(),
            horizon: horizon.as_f64(),
        });
    }
    Ok(())
}

/// Largest admissible step at distance `d = |g − W|`, found by halving `h`.
#[inline]
fn admissible_step<T: Scalar>(mut h: T, d: T, sqrt_kappa: T) -> T {
    let by_curvature = T::lit(CURVATURE_FRACTION) * d * d;
    let ten = T::lit(10.0);
    while h > by_curvature || d < ten * h * sqrt_kappa {
        h = h / T::lit(2.0);
        if h == T::zero() {
            break;
        }
    }
    h
}

#[inline]
fn rk4<T: Scalar>(
    g: Complex<T>,
    s: T,
    h: T,
    sign: T,
    w: &impl Fn(T) -> T,
) -> Complex<T> {
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let f = |s: T, g: Complex<T>| -> Complex<T> {
        (Complex::new(two, T::zero()) / (g - Complex::new(w(s), T::zero()))).scale(sign)
    };
    let k1 = f(s, g);
    let k2 = f(s + half * h, g + k1.scale(half * h));
    let k3 = f(s + half * h, g + k2.scale(half * h));
    let k4 = f(s + h, g + k3.scale(h));
    g + (k1 + k2.scale(two) + k3.scale(two) + k4).scale(h / T::lit(6.0))
}

/// `g_t(z)` for the chordal Loewner equation `∂_t g = 2/(g − W_t)`.
///
/// Returns [`FlowOutcome::Swallowed`] once `Im g_s(z)` drops below the swallow tolerance
/// (for real `z`: once `|g_s(z) − W_s|` does), or when the step size underflows.
pub fn solve_forward<T: Scalar>(
    driving: &DrivingFunction<T>,
    z: Complex<T>,
    t: T,
) -> Result<FlowOutcome<T>> {
    check_horizon(driving, t)?;
    if z.im < T::zero() {
        return Err(Error::Invalid("point must lie in the closed upper half-plane".into()));
    }
    let tol = T::lit(SWALLOW_TOLERANCE) * z.norm().max(T::one());
    let on_boundary = z.im < tol;
    if on_boundary && (z.re - driving.values[0]).abs() < tol {
        return Err(Error::Invalid("boundary point coincides with W_0".into()));
    }
    if t == T::zero() {
        return Ok(FlowOutcome::Mapped(z));
    }
    let sqrt_kappa = driving.kappa.max(T::zero()).sqrt();
    let underflow = T::lit(1e-15) * t.max(T::one());
    let mut g = if on_boundary {
        Complex::new(z.re, T::zero())
    } else {
        z
    };
    let last = driving.interval(t);
    for k in 0..=last {
        let a = driving.times[k];
        let b = driving.times[k + 1].min(t);
        let (t0, t1) = (driving.times[k], driving.times[k + 1]);
        let (w0, w1) = (driving.values[k], driving.values[k + 1]);
        let w = move |s: T| w0 + (w1 - w0) * (s - t0) / (t1 - t0);
        let mut s = a;
        while s < b {
            let d = (g - Complex::new(w(s), T::zero())).norm();
            let h = admissible_step(b - s, d, sqrt_kappa);
            if h < underflow {
                return Ok(FlowOutcome::Swallowed(s));
            }
            g = rk4(g, s, h, T::one(), &w);
            s = if b - s - h <= T::zero() { b } else { s + h };
            let swallowed = if on_boundary {
                g.im = T::zero();
                (g.re - w(s)).abs() < tol
            } else {
                g.im < tol
            };
            if swallowed {
                return Ok(FlowOutcome::Swallowed(s));
            }
        }
    }
    Ok(FlowOutcome::Mapped(g))
}

/// Integrates `∂_s u = sign·2/(u − V(s))` over `[0, t]` for a driver `V` given by closure.
fn integrate_upward<T: Scalar>(
    mut u: Complex<T>,
    t: T,
    sqrt_kappa: T,
    breakpoints: &[T],
    v: impl Fn(T) -> T,
) -> Complex<T> {
    let mut s = T::zero();
    let mut bp = 0usize;
    while s < t {
        while bp < breakpoints.len() && breakpoints[bp] <= s {
            bp += 1;
        }
        let seg_end = if bp < breakpoints.len() {
            breakpoints[bp].min(t)
        } else {
            t
        };
        let d = (u - Complex::new(v(s), T::zero())).norm();
        let h = admissible_step(seg_end - s, d, sqrt_kappa).max(T::lit(1e-300));
        u = rk4(u, s, h, -T::one(), &v);
        s = if seg_end - s - h <= T::zero() { seg_end } else { s + h };
    }
    u
}

/// Centered reverse flow `df̃ = −2/f̃ dt − dW`, `f̃_0 = z`, evaluated at time `t`.
pub fn solve_reverse<T: Scalar>(driving: &DrivingFunction<T>, z: Complex<T>, t: T) -> Result<Complex<T>> {
    check_horizon(driving, t)?;
    if !(z.im > T::zero()) {
        return Err(Error::Invalid("reverse flow needs Im z > 0".into()));
    }
    if t == T::zero() {
        return Ok(z);
    }
    let w0 = driving.values[0];
    let sqrt_kappa = driving.kappa.max(T::zero()).sqrt();
    // u = f̃ + W solves ∂_s u = −2/(u − W_s).
    let u0 = z + Complex::new(w0, T::zero());
    let u = integrate_upward(u0, t, sqrt_kappa, &driving.times, |s| driving.value_at(s));
    Ok(u - Complex::new(driving.value_at(t), T::zero()))
}

/// `g_t^{-1}(w)`: the forward equation run backwards from time `t` to 0.
pub fn inverse_forward<T: Scalar>(driving: &DrivingFunction<T>, w: Complex<T>, t: T) -> Result<Complex<T>> {
    check_horizon(driving, t)?;
    if !(w.im > T::zero()) {
        return Err(Error::Invalid("inverse flow needs Im w > 0".into()));
    }
    if t == T::zero() {
        return Ok(w);
    }
    let sqrt_kappa = driving.kappa.max(T::zero()).sqrt();
    let mut reversed: Vec<T> = driving
        .times
        .iter()
        .filter(|&&s| s <= t)
        .map(|&s| t - s)
        .collect();
    reversed.reverse();
    Ok(integrate_upward(w, t, sqrt_kappa, &reversed, |tau| {
        driving.value_at(t - tau)
    }))
}

/// Centered inverse `ψ_t(z) = f_t^{-1}(z) = g_t^{-1}(z + W_t)`.
pub fn centered_inverse<T: Scalar>(driving: &DrivingFunction<T>, z: Complex<T>, t: T) -> Result<Complex<T>> {
    let wt = driving.value_at(t);
    inverse_forward(driving, z + Complex::new(wt, T::zero()), t)
}
