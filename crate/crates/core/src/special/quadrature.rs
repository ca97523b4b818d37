//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod value, Kronrod–Gauss error estimate and the Kronrod integral of `|f|`.
fn gk15<T: Scalar>(f: &impl Fn(T) -> T, a: T, b: T) -> (T, T, T) {
    let half = T::lit(0.5);
    let c = half * (a + b);
    let h = half * (b - a);
    let fc = f(c);
    let mut kron = fc * T::lit(WGK[7]);
    let mut abs = fc.abs() * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = h * T::lit(XGK[j]);
        let (lo, hi) = (f(c - dx), f(c + dx));
        let s = lo + hi;
        kron = kron + T::lit(WGK[j]) * s;
        abs = abs + T::lit(WGK[j]) * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs(), abs * h.abs())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by recursive bisection.
///
/// A panel whose error estimate is within the rounding noise of `∫|f|` is accepted even
/// above `tol`, so unreachable tolerances on large or recurrence-evaluated integrands do
/// not recurse forever.
pub fn integrate<T: Scalar>(f: impl Fn(T) -> T, a: T, b: T, tol: T) -> T {
    fn rec<T: Scalar>(f: &impl Fn(T) -> T, a: T, b: T, tol: T, depth: u32) -> T {
        let (v, err, abs) = gk15(f, a, b);
        if err <= tol || err <= T::lit(500.0) * T::epsilon() * abs || depth == 0 {
            return v;
        }
        let m = T::lit(0.5) * (a + b);
        let half = T::lit(0.5) * tol;
        rec(f, a, m, half, depth - 1) + rec(f, m, b, half, depth - 1)
    }
    rec(&f, a, b, tol, 40)
}
