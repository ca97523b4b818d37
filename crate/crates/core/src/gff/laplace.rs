//! Dirichlet lattice Laplacian on a subset of grid vertices, factored as `RᵀR` in band storage.

/// Square lattice of `n × n` vertices, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Lattice {
    pub n: usize,
}

impl Lattice {
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> {
        let n = self.n;
        let (i, j) = (v % n, v / n);
        [
            (i > 0).then(|| v - 1),
            (i + 1 < n).then(|| v + 1),
            (j > 0).then(|| v - n),
            (j + 1 < n).then(|| v + n),
        ]
        .into_iter()
        .flatten()
    }
}

/// `L = 4·I − adjacency` restricted to the unknown vertices, with every other vertex
/// treated as Dirichlet boundary.
#[derive(Debug, Clone)]
pub(crate) struct LaplaceFactor {
    pub lattice: Lattice,
    /// Lattice vertex of each unknown.
    pub vertices: Vec<usize>,
    /// Unknown index of each lattice vertex.
    pub slot: Vec<Option<u32>>,
    band: usize,
    /// Row `k` holds `R[k][k..=k+band]`.
    r: Vec<f64>,
}

impl LaplaceFactor {
    pub fn new(lattice: Lattice, unknown: &[bool]) -> Self {
        let vertices: Vec<usize> = (0..unknown.len()).filter(|&v| unknown[v]).collect();
        let mut slot = vec![None; unknown.len()];
        for (k, &v) in vertices.iter().enumerate() {
            slot[v] = Some(k as u32);
        }
        let mut band = 0;
        for (k, &v) in vertices.iter().enumerate() {
            for u in lattice.neighbors(v) {
                if let Some(s) = slot[u] {
                    band = band.max((s as usize).saturating_sub(k));
                }
            }
        }
        let w = band + 1;
        let m = vertices.len();
        let mut r = vec![0.0f64; m * w];
        for (k, &v) in vertices.iter().enumerate() {
            r[k * w] = 4.0;
            for u in lattice.neighbors(v) {
                if let Some(s) = slot[u] {
                    let s = s as usize;
                    if s > k {
                        r[k * w + (s - k)] = -1.0;
                    }
                }
            }
        }
        // right-looking band Cholesky
        for k in 0..m {
            let d = r[k * w].sqrt();
            r[k * w] = d;
            let last = band.min(m - 1 - k);
            for l in 1..=last {
                r[k * w + l] /= d;
            }
            for a in 1..=last {
                let rka = r[k * w + a];
                if rka == 0.0 {
                    continue;
                }
                let row = (k + a) * w;
                for b in a..=last {
                    r[row + (b - a)] -= rka * r[k * w + b];
                }
            }
        }
        LaplaceFactor {
            lattice,
            vertices,
            slot,
            band,
            r,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    /// Solves `R x = y` in place.
    pub fn solve_upper(&self, x: &mut [f64]) {
        let w = self.band + 1;
        let m = self.len();
        for k in (0..m).rev() {
            let last = self.band.min(m - 1 - k);
            let row = &self.r[k * w..k * w + last + 1];
            let mut s = x[k];
            for l in 1..=last {
                s -= row[l] * x[k + l];
            }
            x[k] = s / row[0];
        }
    }

    /// Solves `Rᵀ y = b` in place.
    pub fn solve_lower(&self, y: &mut [f64]) {
        let w = self.band + 1;
        let m = self.len();
        for k in 0..m {
            let last = self.band.min(m - 1 - k);
            let row = &self.r[k * w..k * w + last + 1];
            y[k] /= row[0];
            let yk = y[k];
            for l in 1..=last {
                y[k + l] -= row[l] * yk;
            }
        }
    }

    /// Solves `L x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        self.solve_lower(b);
        self.solve_upper(b);
    }

    /// `(L x)` at unknown `k`, reading non-unknown neighbours from `outside`.
    pub fn apply_at(&self, k: usize, x: &[f64], outside: &[f64]) -> f64 {
        let v = self.vertices[k];
        let mut s = 4.0 * x[k];
        for u in self.lattice.neighbors(v) {
            s -= match self.slot[u] {
                Some(j) => x[j as usize],
                None => outside[u],
            };
        }
        s
    }
}
