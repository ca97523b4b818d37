use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::laplace::{LaplaceFactor, Lattice};
use crate::error::{domain, Error, Result};
use crate::rng::rng_from_seed;

/// Default cap on vertices per side; the band factor takes about `0.7·n³` bytes.
pub const DEFAULT_GRID_CAP: usize = 384;

/// Covariance is `NORMALIZATION · L⁻¹`, so `E[h(x)h(y)] ≈ −log|x − y|` at short range.
pub const NORMALIZATION: f64 = 2.0 * PI;

/// Vertex lattice over `[-1, 1]²` with the unit disk as domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskLattice {
    /// Vertices per side.
    pub n: usize,
    /// Spacing `2/(n − 1)`.
    pub a: f64,
}

impl DiskLattice {
    pub fn new(n: usize) -> Self {
        DiskLattice {
            n,
            a: 2.0 / (n - 1) as f64,
        }
    }

    #[inline]
    pub fn position(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(-1.0 + i as f64 * self.a, -1.0 + j as f64 * self.a)
    }

    pub fn position_of(&self, v: usize) -> Complex64 {
        self.position(v % self.n, v / self.n)
    }

    /// Vertices strictly inside the unit disk carry field values.
    pub fn interior(&self) -> Vec<bool> {
        (0..self.n * self.n).map(|v| self.position_of(v).norm() < 1.0).collect()
    }

    pub(crate) fn lattice(&self) -> Lattice {
        Lattice { n: self.n }
    }

    /// Bilinear weights of the four vertices around `z`.
    pub fn bilinear(&self, z: Complex64) -> [(usize, f64); 4] {
        let fx = ((z.re + 1.0) / self.a).clamp(0.0, (self.n - 1) as f64);
        let fy = ((z.im + 1.0) / self.a).clamp(0.0, (self.n - 1) as f64);
        let i = (fx.floor() as usize).min(self.n - 2);
        let j = (fy.floor() as usize).min(self.n - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let v = j * self.n + i;
        [
            (v, (1.0 - tx) * (1.0 - ty)),
            (v + 1, tx * (1.0 - ty)),
            (v + self.n, (1.0 - tx) * ty),
            (v + self.n + 1, tx * ty),
        ]
    }

    /// Number of points used on a circle of radius `eps`.
    pub fn circle_points(&self, eps: f64) -> usize {
        ((2.0 * PI * eps / self.a).ceil() as usize).max(16)
    }

    /// Vertex weights of the circle average at `z`, merged per vertex.
    pub fn circle_weights(&self, z: Complex64, eps: f64) -> Result<Vec<(usize, f64)>> {
        self.check_circle(z, eps)?;
        let m = self.circle_points(eps);
        let mut acc: HashMap<usize, f64> = HashMap::new();
        for k in 0..m {
            let p = z + Complex64::from_polar(eps, 2.0 * PI * k as f64 / m as f64);
            for (v, w) in self.bilinear(p) {
                *acc.entry(v).or_default() += w / m as f64;
            }
        }
        let mut out: Vec<(usize, f64)> = acc.into_iter().collect();
        out.sort_unstable_by_key(|e| e.0);
        Ok(out)
    }

    pub fn check_circle(&self, z: Complex64, eps: f64) -> Result<()> {
        if !(eps >= 2.0 * self.a * (1.0 - 1e-12)) {
            return Err(domain("eps", eps, "[2 grid spacings, ∞)"));
        }
        if z.norm() + eps > 1.0 {
            return Err(Error::Clearance(format!(
                "circle of radius {eps} at {z} leaves the unit disk"
            )));
        }
        Ok(())
    }
}

/// Zero-boundary discrete GFF on the unit disk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GffSample {
    pub lattice: DiskLattice,
    /// Vertex values, row-major; zero off the disk.
    pub values: Vec<f64>,
    pub seed: u64,
    /// Multiplier of the inverse lattice Laplacian in the covariance.
    pub normalization: f64,
    /// Constant added after sampling (0 for a plain sample).
    pub shift: f64,
}

impl GffSample {
    pub fn n(&self) -> usize {
        self.lattice.n
    }

    pub fn a(&self) -> f64 {
        self.lattice.a
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.lattice.n + i]
    }

    pub fn interpolate(&self, z: Complex64) -> f64 {
        self.lattice.bilinear(z).iter().map(|&(v, w)| w * self.values[v]).sum()
    }

    /// Field plus a constant everywhere, boundary included.
    pub fn shifted(&self, c: f64) -> GffSample {
        GffSample {
            values: self.values.iter().map(|v| v + c).collect(),
            shift: self.shift + c,
            ..self.clone()
        }
    }

    /// Grid export: `x,y,h` per vertex.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,h\n");
        for (v, h) in self.values.iter().enumerate() {
            let z = self.lattice.position_of(v);
            s.push_str(&format!("{},{},{}\n", z.re, z.im, h));
        }
        s
    }
}

/// Mean of bilinearly interpolated values over `max(16, ⌈2πε/a⌉)` equispaced points on
/// the circle of radius `eps` about `z`.
pub fn circle_average(field: &GffSample, z: Complex64, eps: f64) -> Result<f64> {
    field.lattice.check_circle(z, eps)?;
    Ok(circle_average_unchecked(field, z, eps))
}

pub(crate) fn circle_average_unchecked(field: &GffSample, z: Complex64, eps: f64) -> f64 {
    let m = field.lattice.circle_points(eps);
    let step = 2.0 * PI / m as f64;
    let mut s = 0.0;
    for k in 0..m {
        s += field.interpolate(z + Complex64::from_polar(eps, step * k as f64));
    }
    s / m as f64
}

/// Factored covariance for one lattice size; shared between samples.
#[derive(Debug)]
pub struct GffSampler {
    pub lattice: DiskLattice,
    factor: LaplaceFactor,
}

impl GffSampler {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_cap(n, DEFAULT_GRID_CAP)
    }

    pub fn with_cap(n: usize, cap: usize) -> Result<Self> {
        if n < 8 {
            return Err(domain("n", n as f64, "[8, cap]"));
        }
        if n > cap {
            return Err(Error::TooLarge { n, cap });
        }
        let lattice = DiskLattice::new(n);
        let factor = LaplaceFactor::new(lattice.lattice(), &lattice.interior());
        Ok(GffSampler { lattice, factor })
    }

    /// Shared sampler for `n`, factored on first use.
    pub fn cached(n: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GffSampler>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(s) = cache.lock().expect("sampler cache").get(&n) {
            return Ok(s.clone());
        }
        let s = Arc::new(Self::new(n)?);
        cache.lock().expect("sampler cache").insert(n, s.clone());
        Ok(s)
    }

    pub fn n_interior(&self) -> usize {
        self.factor.len()
    }

    pub fn sample(&self, seed: u64) -> GffSample {
        let mut rng = rng_from_seed(seed);
        let mut x: Vec<f64> = (0..self.factor.len())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        self.factor.solve_upper(&mut x);
        let scale = NORMALIZATION.sqrt();
        let mut values = vec![0.0; self.lattice.n * self.lattice.n];
        for (k, &v) in self.factor.vertices.iter().enumerate() {
            values[v] = scale * x[k];
        }
        GffSample {
            lattice: self.lattice,
            values,
            seed,
            normalization: NORMALIZATION,
            shift: 0.0,
        }
    }

    /// Exact variance of `Σ w_v h(v)` under the discrete field.
    pub fn variance_of(&self, weights: &[(usize, f64)]) -> f64 {
        let mut b = vec![0.0; self.factor.len()];
        for &(v, w) in weights {
            if let Some(k) = self.factor.slot[v] {
                b[k as usize] += w;
            }
        }
        self.factor.solve_lower(&mut b);
        NORMALIZATION * b.iter().map(|x| x * x).sum::<f64>()
    }

    /// Exact covariance of `h(x)` and `h(y)` at two vertices.
    pub fn covariance(&self, x: usize, y: usize) -> f64 {
        let (Some(kx), Some(ky)) = (self.factor.slot[x], self.factor.slot[y]) else {
            return 0.0;
        };
        let mut b = vec![0.0; self.factor.len()];
        b[ky as usize] = 1.0;
        self.factor.solve(&mut b);
        NORMALIZATION * b[kx as usize]
    }

    /// Exact variance of the circle average at `z`.
    pub fn circle_average_variance(&self, z: Complex64, eps: f64) -> Result<f64> {
        Ok(self.variance_of(&self.lattice.circle_weights(z, eps)?))
    }
}

/// Exact discrete GFF sample on an `n × n` vertex lattice over `[-1, 1]²`.
pub fn sample_zero_boundary_gff(n: usize, seed: u64) -> Result<GffSample> {
    Ok(GffSampler::cached(n)?.sample(seed))
}
