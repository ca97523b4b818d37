//! Small statistics kit: summaries, Kolmogorov–Smirnov tests, least squares.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Summary {
                n,
                mean: f64::NAN,
                variance: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let variance = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Summary { n, mean, variance }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Standard error of the mean.
    pub fn std_err(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }
}

/// Running mean/variance accumulator (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn summary(&self) -> Summary {
        Summary {
            n: self.n,
            mean: if self.n == 0 { f64::NAN } else { self.mean },
            variance: if self.n > 1 {
                self.m2 / (self.n - 1) as f64
            } else {
                0.0
            },
        }
    }
}

/// Survival function of the Kolmogorov distribution, `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

impl KsResult {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value >= significance
    }
}

/// One-sample KS test against a continuous CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f);
    }
    let en = nf.sqrt();
    // Stephens' small-sample correction.
    let p = kolmogorov_sf((en + 0.12 + 0.11 / en) * d);
    KsResult {
        statistic: d,
        p_value: p,
        n,
    }
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len(), ys.len());
    if n == 0 || m == 0 {
        return KsResult {
            statistic: 0.0,
            p_value: 1.0,
            n: n.min(m),
        };
    }
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = xs[i].min(ys[j]);
        while i < n && xs[i] <= x {
            i += 1;
        }
        while j < m && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = ((n * m) as f64 / (n + m) as f64).sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_sf((en + 0.12 + 0.11 / en) * d),
        n: n.min(m),
    }
}

/// Ordinary least squares fit `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_err: f64,
    pub n: usize,
}

impl LinearFit {
    /// Two-sided 95% interval for the slope (normal approximation).
    pub fn slope_ci95(&self) -> (f64, f64) {
        let h = 1.959_963_984_540_054 * self.slope_std_err;
        (self.slope - h, self.slope + h)
    }
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    weighted_linear_fit(xs, ys, &vec![1.0; xs.len()])
}

/// Weighted least squares; `slope_std_err` treats weights as relative (residual-scaled).
pub fn weighted_linear_fit(xs: &[f64], ys: &[f64], ws: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n || ws.len() != n {
        return None;
    }
    let sw: f64 = ws.iter().sum();
    let mx = xs.iter().zip(ws).map(|(x, w)| w * x).sum::<f64>() / sw;
    let my = ys.iter().zip(ws).map(|(y, w)| w * y).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += ws[i] * (xs[i] - mx).powi(2);
        sxy += ws[i] * (xs[i] - mx) * (ys[i] - my);
    }
    if sxx <= 0.0 || !sxx.is_finite() {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_std_err = if n > 2 {
        let rss: f64 = (0..n)
            .map(|i| ws[i] * (ys[i] - intercept - slope * xs[i]).powi(2))
            .sum();
        (rss / (n - 2) as f64 / sxx).sqrt()
    } else {
        f64::NAN
    };
    Some(LinearFit {
        slope,
        intercept,
        slope_std_err,
        n,
    })
}

/// Pearson sample correlation.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let a = Summary::of(xs);
    let b = Summary::of(ys);
    let n = xs.len().min(ys.len());
    if n < 2 {
        return f64::NAN;
    }
    let cov: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - a.mean) * (y - b.mean))
        .sum::<f64>()
        / (n - 1) as f64;
    cov / (a.std_dev() * b.std_dev())
}

/// Sample covariance.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let a = Summary::of(xs);
    let b = Summary::of(ys);
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - a.mean) * (y - b.mean))
        .sum::<f64>()
        / (xs.len().min(ys.len()) as f64 - 1.0)
}

/// Standard error of a sample covariance estimate, from the spread of the products.
pub fn covariance_std_err(xs: &[f64], ys: &[f64]) -> f64 {
    let a = Summary::of(xs);
    let b = Summary::of(ys);
    let prods: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - a.mean) * (y - b.mean))
        .collect();
    Summary::of(&prods).std_err()
}

/// Two-sided exact sign test p-value for `k` successes out of `n` at p = 1/2.
pub fn sign_test_p(k: usize, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let kk = k.min(n - k);
    // log-binomial accumulation keeps large n finite.
    let ln_half_n = -(n as f64) * std::f64::consts::LN_2;
    let mut ln_c = 0.0_f64;
    let mut tail = 0.0;
    for i in 0..=kk {
        if i > 0 {
            ln_c += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        tail += (ln_c + ln_half_n).exp();
    }
    (2.0 * tail).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_quantiles() {
        // Tabulated: P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-3);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn ks_uniform_grid_passes() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let r = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0));
        assert!(r.statistic < 1e-3 + 1e-12);
        assert!(r.passes(0.01));
        let shifted: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!(!ks_one_sample(&shifted, |x| x.clamp(0.0, 1.0)).passes(0.01));
    }

    #[test]
    fn ks_two_sample_identical() {
        let xs: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let r = ks_two_sample(&xs, &xs);
        assert_eq!(r.statistic, 0.0);
        let ys: Vec<f64> = xs.iter().map(|x| x + 100.0).collect();
        assert!(!ks_two_sample(&xs, &ys).passes(0.01));
    }

    #[test]
    fn line_fit_exact() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept - 1.0).abs() < 1e-14);
        assert!(f.slope_std_err < 1e-12);
    }

    #[test]
    fn sign_test_values() {
        assert!((sign_test_p(5, 10) - 1.0).abs() < 1e-12);
        // P(X <= 0) * 2 for n = 10 is 2/1024.
        assert!((sign_test_p(0, 10) - 2.0 / 1024.0).abs() < 1e-15);
    }

    #[test]
    fn welford_matches_batch() {
        let xs = [1.0, 4.0, 9.0, 16.0, 25.0];
        let mut w = Welford::default();
        xs.iter().for_each(|&x| w.push(x));
        let a = w.summary();
        let b = Summary::of(&xs);
        assert!((a.mean - b.mean).abs() < 1e-12);
        assert!((a.variance - b.variance).abs() < 1e-12);
    }
}
