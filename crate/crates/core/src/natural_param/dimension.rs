//! Box-counting dimension and Minkowski content on grids.

use std::collections::HashSet;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, Mask};
use crate::stats::{linear_fit, LinearFit};

/// Box counts per scale and the fitted slope.
#[derive(Debug, Clone, Serialize)]
pub struct BoxDimension {
    pub dimension: f64,
    /// Box sides (mask: in cells; polyline: in length units).
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    pub fit: Option<LinearFit>,
}

fn fit_counts(scales: &[f64], counts: &[usize]) -> Option<LinearFit> {
    let xs: Vec<f64> = scales.iter().map(|s| (1.0 / s).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c.max(1) as f64).ln()).collect();
    linear_fit(&xs, &ys)
}

/// Box-counting dimension of a mask; `scales` are box sides in cells (at least 4).
///
/// Empty masks give 0 and full masks give 2.
pub fn box_dimension(mask: &Mask, scales: &[usize]) -> Result<BoxDimension> {
    if scales.len() < 4 {
        return Err(Error::Invalid("box counting needs at least 4 scales".into()));
    }
    if scales.contains(&0) {
        return Err(Error::Invalid("box sides must be positive".into()));
    }
    let total = mask.count();
    let as_f64: Vec<f64> = scales.iter().map(|&s| s as f64).collect();
    if total == 0 || total == mask.grid.len() {
        let dimension = if total == 0 { 0.0 } else { 2.0 };
        return Ok(BoxDimension {
            dimension,
            scales: as_f64,
            counts: vec![],
            fit: None,
        });
    }
    let g = mask.grid;
    let counts: Vec<usize> = scales
        .iter()
        .map(|&s| {
            let bx = g.nx.div_ceil(s);
            let by = g.ny.div_ceil(s);
            let mut hit = vec![false; bx * by];
            for j in 0..g.ny {
                let row = &mask.cells[j * g.nx..(j + 1) * g.nx];
                for (i, &c) in row.iter().enumerate() {
                    if c {
                        hit[(j / s) * bx + i / s] = true;
                    }
                }
            }
            hit.iter().filter(|&&b| b).count()
        })
        .collect();
    let fit = fit_counts(&as_f64, &counts);
    Ok(BoxDimension {
        dimension: fit.map_or(f64::NAN, |f| f.slope),
        scales: as_f64,
        counts,
        fit,
    })
}

/// Number of `side × side` boxes (anchored at `origin`) met by a polyline.
pub fn polyline_box_count(points: &[Complex64], origin: Complex64, side: f64) -> usize {
    let mut seen: HashSet<(i64, i64)> = HashSet::new();
    let key = |z: Complex64| {
        (
            ((z.re - origin.re) / side).floor() as i64,
            ((z.im - origin.im) / side).floor() as i64,
        )
    };
    if let Some(&p) = points.first() {
        seen.insert(key(p));
    }
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ka, kb) = (key(a), key(b));
        if ka == kb {
            seen.insert(ka);
            continue;
        }
        // local grid anchored at the segment's start box keeps indices small
        let local = Grid::new(
            origin.re + (ka.0.min(kb.0)) as f64 * side,
            origin.im + (ka.1.min(kb.1)) as f64 * side,
            side,
            (ka.0 - kb.0).unsigned_abs() as usize + 1,
            (ka.1 - kb.1).unsigned_abs() as usize + 1,
        );
        let (oi, oj) = (ka.0.min(kb.0), ka.1.min(kb.1));
        local.for_each_cell_on_segment(a, b, |i, j| {
            seen.insert((oi + i as i64, oj + j as i64));
        });
    }
    seen.len()
}

/// Box-counting dimension of a polyline at the given box sides (length units, at least 4).
pub fn polyline_box_dimension(points: &[Complex64], sides: &[f64]) -> Result<BoxDimension> {
    if sides.len() < 4 {
        return Err(Error::Invalid("box counting needs at least 4 scales".into()));
    }
    if points.is_empty() {
        return Ok(BoxDimension {
            dimension: 0.0,
            scales: sides.to_vec(),
            counts: vec![],
            fit: None,
        });
    }
    let origin = points[0];
    let counts: Vec<usize> = sides
        .iter()
        .map(|&s| {
            // average over a few offsets to damp grid-alignment noise
            let offs = [0.0, 0.37, 0.71];
            let sum: usize = offs
                .iter()
                .map(|&o| polyline_box_count(points, origin - Complex64::new(o * s, o * s), s))
                .sum();
            (sum as f64 / offs.len() as f64).round() as usize
        })
        .collect();
    let fit = fit_counts(sides, &counts);
    Ok(BoxDimension {
        dimension: fit.map_or(f64::NAN, |f| f.slope),
        scales: sides.to_vec(),
        counts,
        fit,
    })
}

/// Per-radius values and the extrapolated Minkowski content.
#[derive(Debug, Clone, Serialize)]
pub struct MinkowskiEstimate {
    pub content: f64,
    pub radii: Vec<f64>,
    /// `r^{d−2}·Area(N_r)` per radius.
    pub values: Vec<f64>,
    /// Some neighborhood reached the grid edge.
    pub clipped: bool,
}

const FAR: f64 = 1e20;

/// Squared 1-d distance transform (Felzenszwalb–Huttenlocher lower envelope).
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let parabola = |q: usize| f[q] + (q * q) as f64;
    for q in 1..n {
        let mut s = (parabola(q) - parabola(v[k])) / (2.0 * (q - v[k]) as f64);
        while s <= z[k] {
            k -= 1;
            s = (parabola(q) - parabola(v[k])) / (2.0 * (q - v[k]) as f64);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = (d * d + f[v[k]]).min(FAR);
    }
}

/// Squared Euclidean distance (in cells) from each cell center to the nearest true cell center.
pub fn distance_transform_sq(mask: &Mask) -> Vec<f64> {
    let g = mask.grid;
    let (nx, ny) = (g.nx, g.ny);
    let mut d: Vec<f64> = mask
        .cells
        .iter()
        .map(|&c| if c { 0.0 } else { FAR })
        .collect();
    let m = nx.max(ny);
    let mut f = vec![0.0; m];
    let mut out = vec![0.0; m];
    let mut v = vec![0usize; m];
    let mut z = vec![0.0; m + 1];
    for i in 0..nx {
        for j in 0..ny {
            f[j] = d[j * nx + i];
        }
        edt_1d(&f[..ny], &mut out[..ny], &mut v, &mut z);
        for j in 0..ny {
            d[j * nx + i] = out[j];
        }
    }
    for j in 0..ny {
        f[..nx].copy_from_slice(&d[j * nx..(j + 1) * nx]);
        edt_1d(&f[..nx], &mut out[..nx], &mut v, &mut z);
        d[j * nx..(j + 1) * nx].copy_from_slice(&out[..nx]);
    }
    d
}

/// `Cont_d ≈ lim r^{d−2}·Area(N_r(A))`, extrapolated linearly in `r` to 0.
///
/// The set is the collection of true cell centers; radii are in length units, at least 3,
/// decreasing and spanning a decade.
pub fn minkowski_content(mask: &Mask, d: f64, radii: &[f64]) -> Result<MinkowskiEstimate> {
    if radii.len() < 3 {
        return Err(Error::Invalid("Minkowski content needs at least 3 radii".into()));
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Invalid("radii must be positive and decreasing".into()));
    }
    if radii[0] / radii[radii.len() - 1] < 10.0 * (1.0 - 1e-9) {
        return Err(Error::Invalid("radii must span a decade".into()));
    }
    if mask.count() == 0 {
        return Ok(MinkowskiEstimate {
            content: 0.0,
            radii: radii.to_vec(),
            values: vec![0.0; radii.len()],
            clipped: false,
        });
    }
    let g = mask.grid;
    let dist = distance_transform_sq(mask);
    let mut sorted = dist.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN distances"));
    let mut clipped = false;
    let values: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let rc = r / g.h;
            let r2 = rc * rc;
            let inside = sorted.partition_point(|&x| x <= r2);
            // neighborhood touches the frame?
            let edge = (0..g.nx)
                .flat_map(|i| [g.index(i, 0), g.index(i, g.ny - 1)])
                .chain((0..g.ny).flat_map(|j| [g.index(0, j), g.index(g.nx - 1, j)]))
                .any(|idx| dist[idx] <= r2 && rc > 0.0);
            clipped |= edge && (dist.iter().filter(|&&x| x <= r2).count() < g.len());
            r.powf(d - 2.0) * inside as f64 * g.cell_area()
        })
        .collect();
    let fit = linear_fit(radii, &values)
        .ok_or_else(|| Error::Invalid("degenerate Minkowski fit".into()))?;
    Ok(MinkowskiEstimate {
        content: fit.intercept,
        radii: radii.to_vec(),
        values,
        clipped,
    })
}
