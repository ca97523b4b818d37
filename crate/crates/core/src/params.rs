//! The parameter algebra tying κ to γ, the LQG exponents and the fractal dimensions.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::scalar::Scalar;

/// All scalar parameters derived from a single κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SleParams<T> {
    pub kappa: T,
    /// `√κ` for κ ≤ 4, `4/√κ` for κ > 4.
    pub gamma: T,
    /// `4/κ`.
    pub alpha: T,
    /// `κ/4`; the stable index of generalized quantum length when κ > 4.
    pub alpha_hat: T,
    /// `2/γ + γ/2`.
    pub q: T,
    pub d_carpet: T,
    pub d_curve: T,
    /// Brownian loop-soup intensity, defined on (8/3, 4].
    pub soup_intensity: Option<T>,
    /// Exponent of the conformal radius weight `F_D`.
    pub f_exponent: T,
}

fn check_closed<T: Scalar>(kappa: T, lo: T, hi: T, range: &'static str) -> Result<()> {
    if !(kappa >= lo && kappa <= hi) {
        return Err(domain("kappa", kappa.as_f64(), range));
    }
    Ok(())
}

/// Dimension of the CLE_κ carpet/gasket, `2 − (8−κ)(3κ−8)/(32κ)`, on `[8/3, 8]`.
///
/// The factored form is exact at both endpoints and at κ = 4.
pub fn carpet_dimension<T: Scalar>(kappa: T) -> Result<T> {
    check_closed(kappa, T::lit(8.0) / T::lit(3.0), T::lit(8.0), "[8/3, 8]")?;
    Ok(carpet_dimension_unchecked(kappa))
}

pub(crate) fn carpet_dimension_unchecked<T: Scalar>(kappa: T) -> T {
    let eight = T::lit(8.0);
    T::lit(2.0) - (eight - kappa) * (T::lit(3.0) * kappa - eight) / (T::lit(32.0) * kappa)
}

/// Expanded form `1 + 2/κ + 3κ/32`, used as an independent check of [`carpet_dimension`].
pub fn carpet_dimension_expanded<T: Scalar>(kappa: T) -> T {
    T::one() + T::lit(2.0) / kappa + T::lit(3.0) * kappa / T::lit(32.0)
}

/// `c(κ) = (3κ−8)(6−κ)/(2κ)`, the loop-soup intensity producing CLE_κ.
pub fn loop_soup_intensity<T: Scalar>(kappa: T) -> Result<T> {
    let lo = T::lit(8.0) / T::lit(3.0);
    if !(kappa > lo && kappa <= T::lit(4.0)) {
        return Err(domain("kappa", kappa.as_f64(), "(8/3, 4]"));
    }
    Ok(soup_intensity_unchecked(kappa))
}

fn soup_intensity_unchecked<T: Scalar>(kappa: T) -> T {
    (T::lit(3.0) * kappa - T::lit(8.0)) * (T::lit(6.0) - kappa) / (T::lit(2.0) * kappa)
}

/// Inverts `c(κ)` on (8/3, 4] by bisection to absolute tolerance `1e-12`.
pub fn kappa_from_intensity(c: f64) -> Result<f64> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(domain("c", c, "(0, 1]"));
    }
    if c == 1.0 {
        return Ok(4.0);
    }
    let (mut lo, mut hi) = (8.0 / 3.0, 4.0_f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if soup_intensity_unchecked(mid) < c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Builds the full parameter set for κ ∈ [8/3, 8).
pub fn derive_params<T: Scalar>(kappa: T) -> Result<SleParams<T>> {
    let eight = T::lit(8.0);
    let four = T::lit(4.0);
    let two = T::lit(2.0);
    let lo = eight / T::lit(3.0);
    if !(kappa >= lo && kappa < eight) {
        return Err(domain("kappa", kappa.as_f64(), "[8/3, 8)"));
    }
    let gamma = if kappa <= four {
        kappa.sqrt()
    } else {
        four / kappa.sqrt()
    };
    let soup_intensity = if kappa > lo && kappa <= four {
        Some(soup_intensity_unchecked(kappa))
    } else {
        None
    };
    Ok(SleParams {
        kappa,
        gamma,
        alpha: four / kappa,
        alpha_hat: kappa / four,
        q: two / gamma + gamma / two,
        d_carpet: carpet_dimension_unchecked(kappa),
        d_curve: (T::one() + kappa / eight).min(two),
        soup_intensity,
        f_exponent: T::lit(0.5) + two / kappa + kappa / T::lit(32.0),
    })
}

impl<T: Scalar> SleParams<T> {
    /// `(α + 1/2)·Q·γ/2 − f`, which equals `d_carpet` in the simple regime κ ≤ 4.
    pub fn covariance_exponent(&self) -> T {
        (self.alpha + T::lit(0.5)) * self.q * self.gamma / T::lit(2.0) - self.f_exponent
    }

    /// Exponent of the μ⁰ weight `F(z) = r_H(z)^{-2/γ²}`.
    pub fn mu0_weight_exponent(&self) -> T {
        T::lit(2.0) / (self.gamma * self.gamma)
    }
}
