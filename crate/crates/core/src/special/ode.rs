//! The angular ODE `H″ + (2 − 8/κ)·cot θ·H′ + (8/κ − 1)·H = 0` and its solution `sin^{8/κ−1}`.

use crate::scalar::Scalar;

fn coefficients<T: Scalar>(kappa: T) -> (T, T) {
    let r = T::lit(8.0) / kappa;
    (T::lit(2.0) - r, r - T::one())
}

/// Analytic `H(θ) = sin^{8/κ−1}(θ)` with its first two derivatives.
pub fn analytic_h<T: Scalar>(kappa: T, theta: T) -> (T, T, T) {
    let p = T::lit(8.0) / kappa - T::one();
    let (s, c) = theta.sin_cos();
    let h = s.powf(p);
    let h1 = p * s.powf(p - T::one()) * c;
    let h2 = p * (p - T::one()) * s.powf(p - T::lit(2.0)) * c * c - p * h;
    (h, h1, h2)
}

/// Residual of the ODE at `θ` for given `(H, H′, H″)`.
pub fn residual<T: Scalar>(kappa: T, theta: T, h: T, h1: T, h2: T) -> T {
    let (b, c) = coefficients(kappa);
    h2 + b * h1 / theta.tan() + c * h
}

/// Largest absolute residual of the analytic solution over `theta_grid`.
pub fn h_ode_check<T: Scalar>(kappa: T, theta_grid: &[T]) -> T {
    theta_grid
        .iter()
        .map(|&t| {
            let (h, h1, h2) = analytic_h(kappa, t);
            residual(kappa, t, h, h1, h2).abs()
        })
        .fold(T::zero(), T::max)
}

/// Classical RK4 from `θ = π/2` with `(H, H′) = (1, 0)` to `theta_end`.
pub fn integrate_h_ode<T: Scalar>(kappa: T, theta_end: T, steps: usize) -> T {
    let (b, c) = coefficients(kappa);
    let f = |t: T, y: [T; 2]| [y[1], -b * y[1] / t.tan() - c * y[0]];
    let mut t = T::FRAC_PI_2();
    let h = (theta_end - t) / T::from_usize_lossy(steps);
    let mut y = [T::one(), T::zero()];
    let half = T::lit(0.5);
    let six = T::lit(6.0);
    let two = T::lit(2.0);
    for _ in 0..steps {
        let k1 = f(t, y);
        let k2 = f(t + half * h, [y[0] + half * h * k1[0], y[1] + half * h * k1[1]]);
        let k3 = f(t + half * h, [y[0] + half * h * k2[0], y[1] + half * h * k2[1]]);
        let k4 = f(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for i in 0..2 {
            y[i] = y[i] + h / six * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
        }
        t = t + h;
    }
    y[0]
}
