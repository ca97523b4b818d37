//! Monte Carlo estimator of `μ⁰(dz) = F(z)·E[σ(dz) | η]` for SLE_κ′, κ′ ∈ (4, 8).
//!
//! The zero-boundary field on H is the disk field pulled back through the Cayley map,
//! so circle averages in H are averages of the disk field over the image circles.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::gff::{GffSample, GffSampler};
use crate::grid::{frame_cells, label_components, outer_contour, Grid};
use crate::loewner::LoewnerTrace;
use crate::params::derive_params;
use crate::rng::derive_seed;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Cayley map H → D, `w ↦ (w − i)/(w + i)`.
pub fn half_plane_to_disk(w: Complex64) -> Complex64 {
    (w - I) / (w + I)
}

/// Inverse Cayley map D → H.
pub fn disk_to_half_plane(z: Complex64) -> Complex64 {
    I * (1.0 + z) / (1.0 - z)
}

/// `r_H(z) = 2 Im z`.
pub fn conformal_radius_half_plane(z: Complex64) -> f64 {
    2.0 * z.im
}

/// Disk-lattice vertex weights of the H-circle average of radius `eps` at `w`.
pub fn half_plane_circle_weights(field_n: usize, w: Complex64, eps: f64) -> Result<Vec<(usize, f64)>> {
    if !(w.im > eps) {
        return Err(Error::Clearance(format!("circle of radius {eps} at {w} leaves H")));
    }
    let lattice = crate::gff::DiskLattice::new(field_n);
    let stretch = 2.0 / (w + I).norm_sqr();
    if !(eps * stretch >= 2.0 * lattice.a * (1.0 - 1e-12)) {
        return Err(domain("eps", eps, "image radius of at least 2 disk-lattice spacings"));
    }
    let m = ((2.0 * PI * eps * stretch / lattice.a).ceil() as usize).max(16);
    let mut acc: Vec<(usize, f64)> = Vec::with_capacity(4 * m);
    for k in 0..m {
        let p = half_plane_to_disk(w + Complex64::from_polar(eps, 2.0 * PI * k as f64 / m as f64));
        for (v, wt) in lattice.bilinear(p) {
            acc.push((v, wt / m as f64));
        }
    }
    acc.sort_unstable_by_key(|e| e.0);
    acc.dedup_by(|b, a| {
        if a.0 == b.0 {
            a.1 += b.1;
            true
        } else {
            false
        }
    });
    Ok(acc)
}

/// Circle average of the H-field `h ∘ (Cayley)` at `w`.
pub fn half_plane_circle_average(field: &GffSample, w: Complex64, eps: f64) -> Result<f64> {
    let wts = half_plane_circle_weights(field.n(), w, eps)?;
    Ok(wts.iter().map(|&(v, a)| a * field.values[v]).sum())
}

/// A complementary component of the rasterized trace, cut off from infinity by the trace alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bubble {
    pub cells: usize,
    /// Outer contour through cell corners, closed.
    pub boundary: Vec<Complex64>,
    /// Trace index of the segment whose cell closed the bubble.
    pub closing_index: usize,
    /// The earlier trace point next to the closing cell.
    pub pinch: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BubbleSet {
    pub bubbles: Vec<Bubble>,
    /// Components enclosed together with the real line; not counted.
    pub real_line: usize,
}

/// Detects bubbles of a trace on `grid` (which should have its bottom edge on ℝ).
pub fn detect_bubbles(trace: &LoewnerTrace<f64>, grid: &Grid) -> BubbleSet {
    let mut first = vec![usize::MAX; grid.len()];
    for (k, w) in trace.points.windows(2).enumerate() {
        grid.for_each_cell_on_segment(w[0], w[1], |i, j| {
            let c = grid.index(i, j);
            if first[c] == usize::MAX {
                first[c] = k;
            }
        });
    }
    let free: Vec<bool> = first.iter().map(|&f| f == usize::MAX).collect();
    let (labels, n) = label_components(grid, &free);
    let mut touches_side = vec![false; n];
    let mut touches_bottom = vec![false; n];
    for c in frame_cells(grid) {
        if let Some(l) = labels[c] {
            let (i, j) = grid.coords(c);
            if j == 0 && i > 0 && i + 1 < grid.nx {
                touches_bottom[l as usize] = true;
            } else {
                touches_side[l as usize] = true;
            }
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, l) in labels.iter().enumerate() {
        if let Some(l) = l {
            if !touches_side[*l as usize] {
                members[*l as usize].push(c);
            }
        }
    }
    let mut bubbles = Vec::new();
    let mut real_line = 0;
    for (l, cells) in members.into_iter().enumerate() {
        if cells.is_empty() {
            continue;
        }
        if touches_bottom[l] {
            real_line += 1;
            continue;
        }
        let (mut i0, mut j0, mut i1, mut j1) = (usize::MAX, usize::MAX, 0, 0);
        let mut closing = (0, 0);
        for &c in &cells {
            let (i, j) = grid.coords(c);
            i0 = i0.min(i);
            j0 = j0.min(j);
            i1 = i1.max(i);
            j1 = j1.max(j);
            for (ni, nj) in [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)] {
                if ni < grid.nx && nj < grid.ny {
                    let f = first[grid.index(ni, nj)];
                    if f != usize::MAX && f >= closing.0 {
                        closing = (f, grid.index(ni, nj));
                    }
                }
            }
        }
        // earliest trace cell in the 3×3 block around the closing cell
        let (ci, cj) = grid.coords(closing.1);
        let mut earlier = closing.0;
        for nj in cj.saturating_sub(1)..=(cj + 1).min(grid.ny - 1) {
            for ni in ci.saturating_sub(1)..=(ci + 1).min(grid.nx - 1) {
                earlier = earlier.min(first[grid.index(ni, nj)]);
            }
        }
        let sub = Grid::new(
            grid.x0 + (i0 as f64 - 1.0) * grid.h,
            grid.y0 + (j0 as f64 - 1.0) * grid.h,
            grid.h,
            i1 - i0 + 3,
            j1 - j0 + 3,
        );
        let mut sub_cells = vec![false; sub.len()];
        for &c in &cells {
            let (i, j) = grid.coords(c);
            sub_cells[sub.index(i - i0 + 1, j - j0 + 1)] = true;
        }
        bubbles.push(Bubble {
            cells: cells.len(),
            boundary: simplify_contour(&outer_contour(&sub, &sub_cells)),
            closing_index: closing.0,
            pinch: trace.points[earlier],
        });
    }
    BubbleSet { bubbles, real_line }
}

/// Merges collinear runs of a lattice contour.
fn simplify_contour(p: &[Complex64]) -> Vec<Complex64> {
    if p.len() < 3 {
        return p.to_vec();
    }
    let mut out = vec![p[0]];
    for k in 1..p.len() - 1 {
        let a = p[k] - out[out.len() - 1];
        let b = p[k + 1] - p[k];
        if (a.re * b.im - a.im * b.re).abs() > 1e-12 * a.norm() * b.norm() {
            out.push(p[k]);
        }
    }
    out.push(p[p.len() - 1]);
    out
}

/// Bubble boundary prepared for repeated length evaluation: `(|segment|, weights)` per segment.
struct PreparedBubble {
    pinch: Complex64,
    segments: Vec<(f64, Vec<(usize, f64)>)>,
}

/// Splits segments longer than `max_len` and precomputes their circle weights.
fn prepare(bubble: &Bubble, field_n: usize, radius: f64, max_len: f64) -> Result<PreparedBubble> {
    let mut segments = Vec::new();
    for w in bubble.boundary.windows(2) {
        let len = (w[1] - w[0]).norm();
        let parts = ((len / max_len).ceil() as usize).max(1);
        for p in 0..parts {
            let mid = w[0] + (w[1] - w[0]) * ((p as f64 + 0.5) / parts as f64);
            segments.push((len / parts as f64, half_plane_circle_weights(field_n, mid, radius)?));
        }
    }
    Ok(PreparedBubble {
        pinch: bubble.pinch,
        segments,
    })
}

/// Settings of the μ⁰ estimator besides the traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mu0Config {
    pub kappa: f64,
    /// Quantum-length threshold: bubbles with length in `[eps, 2eps)` are counted.
    pub eps: f64,
    /// Output grid in H; bubbles are detected on the same grid.
    pub grid: Grid,
    pub fields_per_trace: usize,
    /// Circle-average radius for boundary lengths.
    pub circle_radius: f64,
    /// Vertices per side of the disk lattice carrying the field.
    pub field_n: usize,
}

/// Intensity estimate on a grid, with per-trace deposits kept for box errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub grid: Grid,
    /// Mean mass per trace in each cell.
    pub mass: Vec<f64>,
    pub std_err: Vec<f64>,
    pub n_traces: usize,
    pub n_fields_per_trace: usize,
    pub kappa: f64,
    pub eps: f64,
    pub seed: u64,
    pub bubbles: usize,
    pub real_line_bubbles: usize,
    /// Bubbles whose boundary circles leave H or are not resolved by the field lattice.
    pub excluded_bubbles: usize,
    pub notes: Vec<String>,
    /// Sparse `(cell, mass)` deposits of each trace.
    #[serde(skip)]
    pub per_trace: Vec<Vec<(usize, f64)>>,
}

impl MeasureEstimate {
    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Mean and standard error of the mass in the cells selected by `pred` (cell centers).
    pub fn region_mass(&self, pred: impl Fn(Complex64) -> bool) -> (f64, f64) {
        let sel: Vec<bool> = (0..self.grid.len()).map(|k| pred(self.grid.center_of(k))).collect();
        let per: Vec<f64> = self
            .per_trace
            .iter()
            .map(|d| d.iter().filter(|e| sel[e.0]).map(|e| e.1).sum())
            .collect();
        mean_and_err(&per)
    }

    /// Mass of the axis-aligned box `[lo, hi]`.
    pub fn box_mass(&self, lo: Complex64, hi: Complex64) -> (f64, f64) {
        self.region_mass(|z| z.re >= lo.re && z.re < hi.re && z.im >= lo.im && z.im < hi.im)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,mass,std_err\n");
        for k in 0..self.grid.len() {
            let z = self.grid.center_of(k);
            s.push_str(&format!("{},{},{},{}\n", z.re, z.im, self.mass[k], self.std_err[k]));
        }
        s
    }
}

fn mean_and_err(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn aggregate(grid: Grid, per_trace: &[Vec<(usize, f64)>]) -> (Vec<f64>, Vec<f64>) {
    let n = per_trace.len() as f64;
    let mut s1 = vec![0.0; grid.len()];
    let mut s2 = vec![0.0; grid.len()];
    for d in per_trace {
        let mut cell_sum: Vec<(usize, f64)> = d.clone();
        cell_sum.sort_unstable_by_key(|e| e.0);
        cell_sum.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        for (c, m) in cell_sum {
            s1[c] += m;
            s2[c] += m * m;
        }
    }
    if per_trace.is_empty() {
        return (s1, s2);
    }
    let mean: Vec<f64> = s1.iter().map(|s| s / n).collect();
    let err = s1
        .iter()
        .zip(&s2)
        .map(|(&a, &b)| {
            if per_trace.len() < 2 {
                0.0
            } else {
                let m = a / n;
                ((b - n * m * m).max(0.0) / (n - 1.0) / n).sqrt()
            }
        })
        .collect();
    (mean, err)
}

/// Estimates `μ⁰` from SLE_κ′ traces, averaging bubble counts over independent fields.
pub fn estimate_mu0(traces: &[LoewnerTrace<f64>], config: &Mu0Config, seed: u64) -> Result<MeasureEstimate> {
    if config.fields_per_trace == 0 {
        return Err(Error::Invalid("fields_per_trace must be at least 1".into()));
    }
    if !(config.kappa > 4.0 && config.kappa < 8.0) {
        return Err(domain("kappa", config.kappa, "(4, 8)"));
    }
    if !(config.eps > 0.0) {
        return Err(domain("eps", config.eps, "(0, ∞)"));
    }
    let p = derive_params(config.kappa)?;
    let (gamma, alpha_hat) = (p.gamma, p.alpha_hat);
    let sampler = GffSampler::cached(config.field_n)?;
    let pre = config.circle_radius.powf(0.25 * gamma * gamma);
    let weight = config.eps.powf(alpha_hat) / config.fields_per_trace as f64;
    let grid = config.grid;
    let max_len = config.circle_radius / 2.0;

    let mut per_trace = Vec::with_capacity(traces.len());
    let (mut n_bubbles, mut n_real, mut n_excluded, mut empty) = (0, 0, 0, 0);
    for (t, trace) in traces.iter().enumerate() {
        let set = detect_bubbles(trace, &grid);
        n_bubbles += set.bubbles.len();
        n_real += set.real_line;
        let mut prepared = Vec::new();
        for b in &set.bubbles {
            match prepare(b, config.field_n, config.circle_radius, max_len) {
                Ok(pb) => prepared.push(pb),
                // too close to ℝ, or too far out for the disk lattice to resolve the circle
                Err(Error::Clearance(_) | Error::Domain { .. }) => n_excluded += 1,
                Err(e) => return Err(e),
            }
        }
        if prepared.is_empty() {
            empty += 1;
        }
        let mut deposits: Vec<(usize, f64)> = Vec::new();
        for f in 0..config.fields_per_trace {
            if prepared.is_empty() {
                break;
            }
            let field = sampler.sample(derive_seed(seed, (t * config.fields_per_trace + f) as u64));
            for b in &prepared {
                let len: f64 = b
                    .segments
                    .iter()
                    .map(|(l, wts)| {
                        let h: f64 = wts.iter().map(|&(v, a)| a * field.values[v]).sum();
                        pre * (0.5 * gamma * h).exp() * l
                    })
                    .sum();
                if len >= config.eps && len < 2.0 * config.eps {
                    if let Some((i, j)) = grid.cell_of(b.pinch) {
                        let r = conformal_radius_half_plane(b.pinch);
                        deposits.push((grid.index(i, j), weight * r.powf(-2.0 / (gamma * gamma))));
                    }
                }
            }
        }
        per_trace.push(deposits);
    }
    let (mass, std_err) = aggregate(grid, &per_trace);
    let mut notes = Vec::new();
    if empty > 0 {
        notes.push(format!("{empty} traces had no usable bubbles and contribute zero"));
    }
    Ok(MeasureEstimate {
        grid,
        mass,
        std_err,
        n_traces: traces.len(),
        n_fields_per_trace: config.fields_per_trace,
        kappa: config.kappa,
        eps: config.eps,
        seed,
        bubbles: n_bubbles,
        real_line_bubbles: n_real,
        excluded_bubbles: n_excluded,
        notes,
        per_trace,
    })
}

/// The intensity density shape `sin^{8/κ−1}(arg z)·Im(z)^{exponent}`, without its constant.
pub fn intensity_shape(z: Complex64, kappa: f64, im_exponent: f64) -> f64 {
    if z.im <= 0.0 {
        return 0.0;
    }
    z.arg().sin().powf(8.0 / kappa - 1.0) * z.im.powf(im_exponent)
}

/// Comparison of a pushed-forward estimate with a fresh estimate from rescaled traces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub b: f64,
    pub exponent: f64,
    /// Per block `(pushed mass, fresh mass, z-score)`.
    pub blocks: Vec<(f64, f64, f64)>,
    /// Fresh mass of `bR` over original mass of `R`, where `bR` is the part of the grid reached.
    pub ratio: f64,
    pub ratio_se: f64,
    pub expected_ratio: f64,
}

impl ScalingReport {
    pub fn max_abs_z(&self) -> f64 {
        self.blocks.iter().map(|b| b.2.abs()).fold(0.0, f64::max)
    }
}

fn push_deposits(est: &MeasureEstimate, b: f64, weight: f64) -> Vec<Vec<(usize, f64)>> {
    est.per_trace
        .iter()
        .map(|d| {
            d.iter()
                .filter_map(|&(c, m)| {
                    let (i, j) = est.grid.cell_of(est.grid.center_of(c) * b)?;
                    Some((est.grid.index(i, j), m * weight))
                })
                .collect()
        })
        .collect()
}

/// Pushes `estimate` through `z ↦ bz` with weight `b^{exponent}` and compares it with
/// `rescaled` (an estimate from the traces scaled by `b`) on `blocks × blocks` blocks.
pub fn scaling_covariance_check(
    estimate: &MeasureEstimate,
    rescaled: &MeasureEstimate,
    b: f64,
    exponent: f64,
    blocks: usize,
) -> Result<ScalingReport> {
    if !(0.5..=2.0).contains(&b) {
        return Err(domain("b", b, "[1/2, 2]"));
    }
    if estimate.grid != rescaled.grid || blocks == 0 {
        return Err(Error::Invalid("estimates must share a grid; blocks must be positive".into()));
    }
    let g = estimate.grid;
    let w = b.powf(exponent);
    let pushed = push_deposits(estimate, b, w);
    let block_of = |c: usize| {
        let (i, j) = g.coords(c);
        (j * blocks / g.ny) * blocks + i * blocks / g.nx
    };
    let per_block = |dep: &[Vec<(usize, f64)>]| -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; dep.len()]; blocks * blocks];
        for (t, d) in dep.iter().enumerate() {
            for &(c, m) in d {
                out[block_of(c)][t] += m;
            }
        }
        out
    };
    let (pa, fa) = (per_block(&pushed), per_block(&rescaled.per_trace));
    let blocks_out = pa
        .iter()
        .zip(&fa)
        .map(|(p, f)| {
            let (mp, sp) = mean_and_err(p);
            let (mf, sf) = mean_and_err(f);
            let se = (sp * sp + sf * sf).sqrt();
            let z = if se > 0.0 { (mf - mp) / se } else if mf == mp { 0.0 } else { f64::INFINITY };
            (mp, mf, z)
        })
        .collect();
    // region R with bR inside the grid
    let in_grid = |z: Complex64| g.cell_of(z).is_some();
    let (orig, so) = estimate.region_mass(|z| in_grid(z * b) && in_grid(z));
    let (fresh, sf) = rescaled.region_mass(|z| in_grid(z / b) && in_grid(z));
    let ratio = fresh / orig;
    let ratio_se = ratio.abs() * ((so / orig).powi(2) + (sf / fresh).powi(2)).sqrt();
    Ok(ScalingReport {
        b,
        exponent,
        blocks: blocks_out,
        ratio,
        ratio_se,
        expected_ratio: w,
    })
}

/// Traces multiplied by `b`, the image of SLE under `z ↦ bz` with time scaled by `b²`.
pub fn scale_traces(traces: &[LoewnerTrace<f64>], b: f64) -> Vec<LoewnerTrace<f64>> {
    traces
        .iter()
        .map(|t| LoewnerTrace {
            points: t.points.iter().map(|z| z * b).collect(),
            times: t.times.iter().map(|s| s * b * b).collect(),
            kappa: t.kappa,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gff::sample_zero_boundary_gff;

    fn square_loop_trace() -> LoewnerTrace<f64> {
        // up, around a square, back to the stem
        let pts = [
            (0.0, 0.0),
            (0.0, 0.5),
            (0.3, 0.5),
            (0.3, 0.9),
            (-0.3, 0.9),
            (-0.3, 0.5),
            (0.01, 0.5),
            (0.01, 0.45),
            (0.8, 0.45),
            (0.8, 1.4),
        ];
        let mut points = Vec::new();
        for w in pts.windows(2) {
            for k in 0..50 {
                let t = k as f64 / 50.0;
                points.push(Complex64::new(w[0].0 + t * (w[1].0 - w[0].0), w[0].1 + t * (w[1].1 - w[0].1)));
            }
        }
        points.push(Complex64::new(0.8, 1.4));
        let times = (0..points.len()).map(|k| k as f64).collect();
        LoewnerTrace {
            points,
            times,
            kappa: 6.0,
        }
    }

    fn grid() -> Grid {
        Grid::new(-1.0, 0.0, 1.0 / 64.0, 128, 96)
    }

    #[test]
    fn cayley_round_trip() {
        for w in [Complex64::new(0.3, 0.2), Complex64::new(-2.0, 0.01), Complex64::new(0.0, 1.0)] {
            let z = half_plane_to_disk(w);
            assert!(z.norm() < 1.0);
            assert!((disk_to_half_plane(z) - w).norm() < 1e-12);
        }
        assert!(half_plane_to_disk(I).norm() < 1e-15);
    }

    #[test]
    fn half_plane_average_of_constant_shift() {
        let f = sample_zero_boundary_gff(65, 1).unwrap();
        let w = Complex64::new(0.2, 0.5);
        let a = half_plane_circle_average(&f, w, 0.15).unwrap();
        let b = half_plane_circle_average(&f.shifted(0.7), w, 0.15).unwrap();
        assert!((b - a - 0.7).abs() < 1e-12);
        assert!(matches!(
            half_plane_circle_average(&f, Complex64::new(0.0, 0.1), 0.15),
            Err(Error::Clearance(_))
        ));
    }

    #[test]
    fn half_plane_variance_matches_log() {
        // Var h_ε(w) = log(r_H(w)/ε) for the zero-boundary field on H
        let s = GffSampler::cached(129).unwrap();
        for (w, eps) in [(Complex64::new(0.0, 1.0), 0.2), (Complex64::new(0.5, 0.6), 0.15)] {
            let v = s.variance_of(&half_plane_circle_weights(129, w, eps).unwrap());
            let exact = (2.0 * w.im / eps).ln();
            assert!((v / exact - 1.0).abs() < 0.05, "{v} {exact}");
        }
    }

    #[test]
    fn detects_one_bubble_with_its_pinch() {
        let t = square_loop_trace();
        let set = detect_bubbles(&t, &grid());
        assert_eq!(set.bubbles.len(), 1, "{set:?}");
        let b = &set.bubbles[0];
        assert!(b.cells > 800 && b.cells < 1000, "{}", b.cells);
        assert!((b.pinch - Complex64::new(0.0, 0.5)).norm() < 0.05, "{}", b.pinch);
        let len: f64 = b.boundary.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        assert!((len - 2.0).abs() < 0.1, "{len}");
    }

    #[test]
    fn real_line_bubbles_are_not_counted() {
        let pts: Vec<Complex64> = (0..=200)
            .map(|k| {
                let s = PI * k as f64 / 200.0;
                Complex64::new(-0.5 * s.cos(), 0.5 * s.sin() + 0.001)
            })
            .collect();
        let t = LoewnerTrace {
            times: (0..pts.len()).map(|k| k as f64).collect(),
            points: pts,
            kappa: 6.0,
        };
        let set = detect_bubbles(&t, &grid());
        assert!(set.bubbles.is_empty());
        assert_eq!(set.real_line, 1);
    }

    fn config(fields: usize) -> Mu0Config {
        Mu0Config {
            kappa: 6.0,
            eps: 0.1,
            grid: grid(),
            fields_per_trace: fields,
            circle_radius: 0.08,
            field_n: 129,
        }
    }

    #[test]
    fn zero_fields_is_an_error() {
        assert!(estimate_mu0(&[square_loop_trace()], &config(0), 1).is_err());
    }

    #[test]
    fn deposits_sit_on_the_trace() {
        let t = square_loop_trace();
        let mut c = config(40);
        // pick eps near the typical bubble length so some fields count it
        let b = &detect_bubbles(&t, &grid()).bubbles[0];
        let f = sample_zero_boundary_gff(129, 9).unwrap();
        let pb = prepare(b, 129, c.circle_radius, c.circle_radius / 2.0).unwrap();
        let pre = c.circle_radius.powf(0.25 * 8.0 / 3.0);
        let typical: f64 = pb
            .segments
            .iter()
            .map(|(l, wts)| {
                let h: f64 = wts.iter().map(|&(v, a)| a * f.values[v]).sum();
                pre * (0.5 * (8.0f64 / 3.0).sqrt() * h).exp() * l
            })
            .sum();
        c.eps = typical * 0.7;
        let est = estimate_mu0(&[t.clone()], &c, 3).unwrap();
        assert!(est.total() > 0.0);
        let mut near = crate::grid::Mask::new(c.grid, false);
        near.draw_polyline(&t.points);
        for (k, &m) in est.mass.iter().enumerate() {
            if m > 0.0 {
                let (i, j) = c.grid.coords(k);
                let close = (i.saturating_sub(2)..=(i + 2).min(c.grid.nx - 1))
                    .any(|a| (j.saturating_sub(2)..=(j + 2).min(c.grid.ny - 1)).any(|b| near.get(a, b)));
                assert!(close);
            }
        }
        let empty = LoewnerTrace {
            points: vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.5)],
            times: vec![0.0, 1.0],
            kappa: 6.0,
        };
        let e = estimate_mu0(&[empty], &c, 3).unwrap();
        assert_eq!(e.total(), 0.0);
        assert_eq!(e.notes.len(), 1);
    }

    #[test]
    fn unit_scaling_is_identity() {
        let t = square_loop_trace();
        let mut c = config(20);
        c.eps = 0.05;
        let est = estimate_mu0(&[t.clone(), t], &c, 5).unwrap();
        let r = scaling_covariance_check(&est, &est, 1.0, 1.75, 4).unwrap();
        assert!(r.blocks.iter().all(|b| b.2 == 0.0));
        assert!(scaling_covariance_check(&est, &est, 3.0, 1.75, 4).is_err());
    }

    #[test]
    fn lebesgue_stand_in_scales_by_b_squared() {
        // deterministic unit-density deposits: pushing forward with exponent 2 reproduces
        // the deposits of the dilated density
        let g = Grid::new(-1.0, 0.0, 1.0 / 32.0, 64, 32);
        let area = g.cell_area();
        let make = |pred: &dyn Fn(Complex64) -> bool| MeasureEstimate {
            grid: g,
            mass: vec![],
            std_err: vec![],
            n_traces: 2,
            n_fields_per_trace: 1,
            kappa: 6.0,
            eps: 1.0,
            seed: 0,
            bubbles: 0,
            real_line_bubbles: 0,
            excluded_bubbles: 0,
            notes: vec![],
            per_trace: vec![(0..g.len()).filter(|&k| pred(g.center_of(k))).map(|k| (k, area)).collect(); 2],
        };
        let small = make(&|z| z.re.abs() < 0.25 && z.im < 0.25);
        let big = make(&|z| z.re.abs() < 0.5 && z.im < 0.5);
        let r = scaling_covariance_check(&small, &big, 2.0, 2.0, 1).unwrap();
        // pushing a cell of side h by 2 lands in one cell; each deposit carries area·b²
        assert!((r.blocks[0].0 - r.blocks[0].1).abs() < 1e-12);
        assert!((r.ratio - 4.0).abs() < 1e-12);
    }

    #[test]
    fn shape_is_homogeneous() {
        let z = Complex64::new(0.3, 0.4);
        let a = intensity_shape(z, 6.0, -0.25);
        let b = intensity_shape(z * 2.0, 6.0, -0.25);
        assert!((b / a - 2f64.powf(-0.25)).abs() < 1e-12);
        assert_eq!(intensity_shape(Complex64::new(1.0, 0.0), 6.0, -0.25), 0.0);
    }
}
