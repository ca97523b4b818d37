//! Rectangular lattices of square cells and boolean masks on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Axis-aligned grid of `nx × ny` square cells of side `h`, lower-left corner `(x0, y0)`.
///
/// Cell `(i, j)` covers `[x0 + i·h, x0 + (i+1)·h) × [y0 + j·h, y0 + (j+1)·h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(x0: f64, y0: f64, h: f64, nx: usize, ny: usize) -> Self {
        Grid { x0, y0, h, nx, ny }
    }

    /// `n × n` cells covering `[-1, 1]²`.
    pub fn unit_box(n: usize) -> Self {
        Grid::new(-1.0, -1.0, 2.0 / n as f64, n, n)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(
            self.x0 + (i as f64 + 0.5) * self.h,
            self.y0 + (j as f64 + 0.5) * self.h,
        )
    }

    pub fn center_of(&self, idx: usize) -> Complex64 {
        let (i, j) = self.coords(idx);
        self.center(i, j)
    }

    /// Cell containing `z`, if inside the grid.
    #[inline]
    pub fn cell_of(&self, z: Complex64) -> Option<(usize, usize)> {
        let fx = (z.re - self.x0) / self.h;
        let fy = (z.im - self.y0) / self.h;
        if fx < 0.0 || fy < 0.0 || !fx.is_finite() || !fy.is_finite() {
            return None;
        }
        let (i, j) = (fx as usize, fy as usize);
        (i < self.nx && j < self.ny).then_some((i, j))
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    /// Visits every cell touched by the segment `a → b` (supercover traversal).
    ///
    /// Cells outside the grid are skipped. The visited set is 4-connected.
    pub fn for_each_cell_on_segment(
        &self,
        a: Complex64,
        b: Complex64,
        mut visit: impl FnMut(usize, usize),
    ) {
        let fx0 = (a.re - self.x0) / self.h;
        let fy0 = (a.im - self.y0) / self.h;
        let fx1 = (b.re - self.x0) / self.h;
        let fy1 = (b.im - self.y0) / self.h;
        let mut i = fx0.floor() as i64;
        let mut j = fy0.floor() as i64;
        let i1 = fx1.floor() as i64;
        let j1 = fy1.floor() as i64;
        let dx = fx1 - fx0;
        let dy = fy1 - fy0;
        let step_i = if dx > 0.0 { 1 } else { -1 };
        let step_j = if dy > 0.0 { 1 } else { -1 };
        let t_delta_x = if dx != 0.0 { (1.0 / dx).abs() } else { f64::INFINITY };
        let t_delta_y = if dy != 0.0 { (1.0 / dy).abs() } else { f64::INFINITY };
        let mut t_max_x = if dx > 0.0 {
            ((i + 1) as f64 - fx0) / dx
        } else if dx < 0.0 {
            (fx0 - i as f64) / -dx
        } else {
            f64::INFINITY
        };
        let mut t_max_y = if dy > 0.0 {
            ((j + 1) as f64 - fy0) / dy
        } else if dy < 0.0 {
            (fy0 - j as f64) / -dy
        } else {
            f64::INFINITY
        };
        let nx = self.nx as i64;
        let ny = self.ny as i64;
        let mut emit = |i: i64, j: i64| {
            if i >= 0 && j >= 0 && i < nx && j < ny {
                visit(i as usize, j as usize);
            }
        };
        emit(i, j);
        let max_steps = (i1 - i).unsigned_abs() + (j1 - j).unsigned_abs();
        for _ in 0..max_steps {
            if t_max_x < t_max_y {
                i += step_i;
                t_max_x += t_delta_x;
            } else {
                j += step_j;
                t_max_y += t_delta_y;
            }
            emit(i, j);
        }
    }
}

/// Boolean field over a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    pub grid: Grid,
    pub cells: Vec<bool>,
}

impl Mask {
    pub fn new(grid: Grid, value: bool) -> Self {
        Mask {
            grid,
            cells: vec![value; grid.len()],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[self.grid.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let k = self.grid.index(i, j);
        self.cells[k] = v;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Marks every cell touched by the closed or open polyline.
    pub fn draw_polyline(&mut self, pts: &[Complex64]) {
        let grid = self.grid;
        if pts.len() == 1 {
            if let Some((i, j)) = grid.cell_of(pts[0]) {
                self.set(i, j, true);
            }
        }
        for w in pts.windows(2) {
            grid.for_each_cell_on_segment(w[0], w[1], |i, j| {
                self.cells[grid.index(i, j)] = true;
            });
        }
    }

    /// Mask of cells whose centers satisfy the predicate.
    pub fn from_fn(grid: Grid, f: impl Fn(Complex64) -> bool) -> Self {
        let cells = (0..grid.len()).map(|k| f(grid.center_of(k))).collect();
        Mask { grid, cells }
    }
}

/// Cells reachable through `passable` cells by 4-neighbour steps from `seeds`.
pub fn flood_fill(grid: &Grid, passable: &[bool], seeds: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; grid.len()];
    let mut stack: Vec<usize> = Vec::new();
    for &s in seeds {
        if passable[s] && !seen[s] {
            seen[s] = true;
            stack.push(s);
        }
    }
    while let Some(k) = stack.pop() {
        let (i, j) = grid.coords(k);
        let mut push = |n: usize| {
            if passable[n] && !seen[n] {
                seen[n] = true;
                stack.push(n);
            }
        };
        if i > 0 {
            push(k - 1);
        }
        if i + 1 < grid.nx {
            push(k + 1);
        }
        if j > 0 {
            push(k - grid.nx);
        }
        if j + 1 < grid.ny {
            push(k + grid.nx);
        }
    }
    seen
}

/// Indices of the cells on the outer frame of the grid.
pub fn frame_cells(grid: &Grid) -> Vec<usize> {
    let mut v = Vec::with_capacity(2 * (grid.nx + grid.ny));
    for i in 0..grid.nx {
        v.push(grid.index(i, 0));
        v.push(grid.index(i, grid.ny - 1));
    }
    for j in 0..grid.ny {
        v.push(grid.index(0, j));
        v.push(grid.index(grid.nx - 1, j));
    }
    v
}

/// Labels the 4-connected components of the `true` cells; `None` for `false` cells.
pub fn label_components(grid: &Grid, cells: &[bool]) -> (Vec<Option<u32>>, usize) {
    let mut label = vec![None; grid.len()];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..grid.len() {
        if !cells[start] || label[start].is_some() {
            continue;
        }
        label[start] = Some(next);
        stack.push(start);
        while let Some(k) = stack.pop() {
            let (i, j) = grid.coords(k);
            let nbrs = [
                (i > 0).then(|| k - 1),
                (i + 1 < grid.nx).then(|| k + 1),
                (j > 0).then(|| k - grid.nx),
                (j + 1 < grid.ny).then(|| k + grid.nx),
            ];
            for n in nbrs.into_iter().flatten() {
                if cells[n] && label[n].is_none() {
                    label[n] = Some(next);
                    stack.push(n);
                }
            }
        }
        next += 1;
    }
    (label, next as usize)
}

/// Fills the holes of a set of cells: every cell not 4-connected to the grid frame
/// through cells outside the set.
pub fn fill_holes(grid: &Grid, cells: &[bool]) -> Vec<bool> {
    let passable: Vec<bool> = cells.iter().map(|&c| !c).collect();
    let outside = flood_fill(grid, &passable, &frame_cells(grid));
    outside.iter().map(|&o| !o).collect()
}

/// Closed outer contour of a set of cells, as a polyline through cell corners.
///
/// Holes are filled first; boundary edges are then walked with the interior on the
/// left, turning right at pinch corners so diagonal contacts stay on one walk. The
/// cycle enclosing the largest area is returned (counter-clockwise, first point repeated).
pub fn outer_contour(grid: &Grid, cells: &[bool]) -> Vec<Complex64> {
    use std::collections::HashMap;
    let filled = fill_holes(grid, cells);
    let inside = |i: i64, j: i64| -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < grid.nx
            && (j as usize) < grid.ny
            && filled[grid.index(i as usize, j as usize)]
    };
    let mut next: HashMap<(i64, i64), Vec<(i64, i64)>> = HashMap::new();
    let mut n_edges = 0usize;
    for k in 0..grid.len() {
        if !filled[k] {
            continue;
        }
        let (i, j) = grid.coords(k);
        let (i, j) = (i as i64, j as i64);
        let mut add = |a: (i64, i64), b: (i64, i64)| {
            next.entry(a).or_default().push(b);
            n_edges += 1;
        };
        if !inside(i, j - 1) {
            add((i, j), (i + 1, j));
        }
        if !inside(i + 1, j) {
            add((i + 1, j), (i + 1, j + 1));
        }
        if !inside(i, j + 1) {
            add((i + 1, j + 1), (i, j + 1));
        }
        if !inside(i - 1, j) {
            add((i, j + 1), (i, j));
        }
    }
    let mut starts: Vec<(i64, i64)> = next.keys().copied().collect();
    starts.sort_unstable();
    let mut best: Vec<(i64, i64)> = Vec::new();
    let mut best_area = f64::NEG_INFINITY;
    let mut used = 0usize;
    for start in starts {
        while used < n_edges && next.get(&start).is_some_and(|v| !v.is_empty()) {
            let mut cycle = vec![start];
            let mut cur = start;
            let mut dir: (i64, i64) = (0, 0);
            loop {
                let outs = next.get_mut(&cur).expect("boundary edges form cycles");
                let pick = if outs.len() > 1 {
                    let right = (dir.1, -dir.0);
                    outs.iter()
                        .position(|&(x, y)| (x - cur.0, y - cur.1) == right)
                        .unwrap_or(0)
                } else {
                    0
                };
                let nxt = outs.swap_remove(pick);
                used += 1;
                dir = (nxt.0 - cur.0, nxt.1 - cur.1);
                cur = nxt;
                if cur == start && next.get(&cur).is_none_or(|v| v.is_empty()) {
                    break;
                }
                if cur == start {
                    // pinch at the start corner: keep walking so the cycle stays whole
                    let right = (dir.1, -dir.0);
                    let has_right = next[&cur]
                        .iter()
                        .any(|&(x, y)| (x - cur.0, y - cur.1) == right);
                    if !has_right {
                        break;
                    }
                }
                cycle.push(cur);
            }
            let area: f64 = cycle
                .iter()
                .zip(cycle.iter().cycle().skip(1))
                .map(|(a, b)| (a.0 * b.1 - b.0 * a.1) as f64)
                .sum::<f64>()
                / 2.0;
            if area > best_area {
                best_area = area;
                best = cycle;
            }
        }
    }
    let mut pts: Vec<Complex64> = best
        .iter()
        .map(|&(i, j)| Complex64::new(grid.x0 + i as f64 * grid.h, grid.y0 + j as f64 * grid.h))
        .collect();
    if let Some(&first) = pts.first() {
        pts.push(first);
    }
    pts
}

/// Even–odd point-in-polygon test for a closed polyline.
pub fn point_in_polygon(z: Complex64, poly: &[Complex64]) -> bool {
    let mut inside = false;
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.im > z.im) != (b.im > z.im) {
            let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if z.re < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}
