//! Clusters of intersecting loops, their outer boundaries, and the carpet.

use num_complex::Complex64;
use serde::Serialize;

use super::soup::{sample_loop_soup, BridgeResolution, Disk, LoopSoup};
use crate::error::Result;
use crate::grid::{fill_holes, outer_contour, Grid, Mask};
use crate::params::kappa_from_intensity;

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (lo, hi) = if self.rank[ra as usize] < self.rank[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[lo as usize] = hi;
        if self.rank[lo as usize] == self.rank[hi as usize] {
            self.rank[hi as usize] += 1;
        }
    }
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b - a).re * (c - a).im - (b - a).im * (c - a).re
}

fn on_segment(a: Complex64, b: Complex64, p: Complex64) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

/// Closed-segment intersection; touching counts.
pub fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Grid of `n × n` cells covering the bounding square of `disk`.
pub fn disk_grid(disk: Disk, n: usize) -> Grid {
    Grid::new(
        disk.center.re - disk.radius,
        disk.center.im - disk.radius,
        2.0 * disk.radius / n as f64,
        n,
        n,
    )
}

/// Cluster id (dense, `0..k`) for every loop of the soup.
///
/// Segments are bucketed into the cells of an `grid_resolution²` grid over the domain box;
/// loops sharing a cell are merged when two of their segments intersect there.
pub fn cluster_loops(soup: &LoopSoup, grid_resolution: usize) -> Vec<usize> {
    let n_loops = soup.loops.len();
    if n_loops == 0 {
        return Vec::new();
    }
    let grid = disk_grid(soup.domain, grid_resolution.max(1));
    // (cell, loop, segment start index)
    let mut entries: Vec<(u32, u32, u32)> = Vec::new();
    for (li, l) in soup.loops.iter().enumerate() {
        for (si, w) in l.polyline.windows(2).enumerate() {
            grid.for_each_cell_on_segment(w[0], w[1], |i, j| {
                entries.push((grid.index(i, j) as u32, li as u32, si as u32));
            });
        }
    }
    entries.sort_unstable();
    entries.dedup();

    let mut uf = UnionFind::new(n_loops);
    let seg = |li: u32, si: u32| {
        let p = &soup.loops[li as usize].polyline;
        (p[si as usize], p[si as usize + 1])
    };
    let mut start = 0;
    while start < entries.len() {
        let cell = entries[start].0;
        let mut end = start;
        while end < entries.len() && entries[end].0 == cell {
            end += 1;
        }
        let group = &entries[start..end];
        if group.first().map(|e| e.1) != group.last().map(|e| e.1) {
            for x in 0..group.len() {
                for y in x + 1..group.len() {
                    let (la, sa) = (group[x].1, group[x].2);
                    let (lb, sb) = (group[y].1, group[y].2);
                    if la == lb || uf.find(la) == uf.find(lb) {
                        continue;
                    }
                    let (a, b) = seg(la, sa);
                    let (c, d) = seg(lb, sb);
                    if segments_intersect(a, b, c, d) {
                        uf.union(la, lb);
                    }
                }
            }
        }
        start = end;
    }

    let mut dense = vec![usize::MAX; n_loops];
    let mut next = 0;
    (0..n_loops)
        .map(|i| {
            let r = uf.find(i as u32) as usize;
            if dense[r] == usize::MAX {
                dense[r] = next;
                next += 1;
            }
            dense[r]
        })
        .collect()
}

/// One cluster of loops and the outer boundary of its filling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub members: Vec<usize>,
    /// Closed counter-clockwise polyline through cell corners.
    pub outer_boundary: Vec<Complex64>,
    /// Number of grid cells in the filled cluster.
    pub filled_cells: usize,
    /// Not surrounded by a larger cluster: these boundaries are the CLE loops.
    pub outermost: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CleSample {
    pub kappa: f64,
    pub intensity: f64,
    pub cluster_ids: Vec<usize>,
    pub clusters: Vec<Cluster>,
    pub grid: Grid,
    /// `true` on cells of the domain not enclosed by any outer boundary.
    #[serde(skip)]
    pub carpet: Mask,
    pub warnings: Vec<String>,
}

impl CleSample {
    /// Outer boundaries of the outermost clusters.
    pub fn loops(&self) -> impl Iterator<Item = &Vec<Complex64>> {
        self.clusters
            .iter()
            .filter(|c| c.outermost)
            .map(|c| &c.outer_boundary)
    }

    pub fn n_loops(&self) -> usize {
        self.clusters.iter().filter(|c| c.outermost).count()
    }

    /// Carpet cells as `(x, y)` CSV with a header.
    pub fn carpet_csv(&self) -> String {
        let mut s = String::from("i,j,x,y\n");
        for k in 0..self.grid.len() {
            if self.carpet.cells[k] {
                let (i, j) = self.grid.coords(k);
                let z = self.grid.center(i, j);
                s.push_str(&format!("{i},{j},{},{}\n", z.re, z.im));
            }
        }
        s
    }
}

/// Fills each cluster on `grid` and removes the fillings from the domain.
///
/// Cells whose centers lie outside the disk are never carpet. Clusters are processed
/// by decreasing filled area; one whose filling is mostly inside an earlier filling is
/// marked as not outermost.
pub fn carpet_from_clusters(soup: &LoopSoup, cluster_ids: &[usize], grid: Grid, kappa: f64) -> CleSample {
    let n_clusters = cluster_ids.iter().map(|&c| c + 1).max().unwrap_or(0);
    let mut members = vec![Vec::new(); n_clusters];
    for (li, &c) in cluster_ids.iter().enumerate() {
        members[c].push(li);
    }

    struct Filled {
        members: Vec<usize>,
        sub: Grid,
        i0: usize,
        j0: usize,
        cells: Vec<bool>,
        count: usize,
    }
    let mut warnings = Vec::new();
    let mut subcell = 0usize;
    let mut filled: Vec<Filled> = Vec::with_capacity(n_clusters);
    for m in members {
        let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for &li in &m {
            for z in &soup.loops[li].polyline {
                lo_x = lo_x.min(z.re);
                lo_y = lo_y.min(z.im);
                hi_x = hi_x.max(z.re);
                hi_y = hi_y.max(z.im);
            }
        }
        let to_i = |x: f64, o: f64| ((x - o) / grid.h).floor() as i64;
        let i0 = (to_i(lo_x, grid.x0) - 1).max(0) as usize;
        let j0 = (to_i(lo_y, grid.y0) - 1).max(0) as usize;
        let i1 = ((to_i(hi_x, grid.x0) + 1).max(0) as usize).min(grid.nx - 1);
        let j1 = ((to_i(hi_y, grid.y0) + 1).max(0) as usize).min(grid.ny - 1);
        if i0 > i1 || j0 > j1 {
            continue;
        }
        let sub = Grid::new(
            grid.x0 + i0 as f64 * grid.h,
            grid.y0 + j0 as f64 * grid.h,
            grid.h,
            i1 - i0 + 1,
            j1 - j0 + 1,
        );
        let mut mask = Mask::new(sub, false);
        for &li in &m {
            mask.draw_polyline(&soup.loops[li].polyline);
        }
        let cells = fill_holes(&sub, &mask.cells);
        let count = cells.iter().filter(|&&c| c).count();
        if hi_x - lo_x < grid.h && hi_y - lo_y < grid.h {
            subcell += 1;
        }
        filled.push(Filled {
            members: m,
            sub,
            i0,
            j0,
            cells,
            count,
        });
    }
    if subcell > 0 {
        warnings.push(format!(
            "{subcell} clusters fit inside one grid cell; the grid is too coarse to resolve them"
        ));
    }

    let mut order: Vec<usize> = (0..filled.len()).collect();
    order.sort_by_key(|&k| std::cmp::Reverse(filled[k].count));
    let mut enclosed = vec![false; grid.len()];
    let mut clusters: Vec<Option<Cluster>> = vec![None; filled.len()];
    for k in order {
        let f = &filled[k];
        let mut already = 0usize;
        for (s, &c) in f.cells.iter().enumerate() {
            if c {
                let (i, j) = f.sub.coords(s);
                if enclosed[grid.index(f.i0 + i, f.j0 + j)] {
                    already += 1;
                }
            }
        }
        for (s, &c) in f.cells.iter().enumerate() {
            if c {
                let (i, j) = f.sub.coords(s);
                enclosed[grid.index(f.i0 + i, f.j0 + j)] = true;
            }
        }
        clusters[k] = Some(Cluster {
            members: f.members.clone(),
            outer_boundary: outer_contour(&f.sub, &f.cells),
            filled_cells: f.count,
            outermost: 2 * already <= f.count,
        });
    }
    let disk = soup.domain;
    let carpet = Mask {
        grid,
        cells: (0..grid.len())
            .map(|k| !enclosed[k] && disk.contains(grid.center_of(k)))
            .collect(),
    };
    CleSample {
        kappa,
        intensity: soup.intensity,
        cluster_ids: cluster_ids.to_vec(),
        clusters: clusters.into_iter().flatten().collect(),
        grid,
        carpet,
        warnings,
    }
}

/// Settings for a CLE sample built from a loop soup in a disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct CleConfig {
    pub kappa: f64,
    pub domain: Disk,
    /// Cells per side of the carpet grid over the domain box.
    pub grid: usize,
    /// Duration cutoff in units of squared grid cells.
    pub t_min_cells: f64,
    pub t_cap: f64,
}

impl CleConfig {
    pub fn new(kappa: f64, grid: usize) -> Self {
        CleConfig {
            kappa,
            domain: Disk::UNIT,
            grid,
            t_min_cells: 1.0,
            t_cap: 4.0,
        }
    }

    pub fn cell(&self) -> f64 {
        2.0 * self.domain.radius / self.grid as f64
    }

    pub fn t_min(&self) -> f64 {
        self.t_min_cells * self.cell() * self.cell()
    }
}

/// Soup at intensity `c(κ)`, its clusters and carpet.
pub fn sample_cle(config: &CleConfig, seed: u64) -> Result<(LoopSoup, CleSample)> {
    let c = crate::params::loop_soup_intensity(config.kappa)?;
    let soup = sample_loop_soup(
        config.domain,
        c,
        config.t_min(),
        config.t_cap,
        BridgeResolution::for_cell(config.cell()),
        seed,
    )?;
    let cle = cle_from_soup(&soup, config.kappa, config.grid);
    Ok((soup, cle))
}

/// Clusters and carpet for an existing soup, on an `n × n` grid over its domain box.
pub fn cle_from_soup(soup: &LoopSoup, kappa: f64, n: usize) -> CleSample {
    let ids = cluster_loops(soup, n);
    carpet_from_clusters(soup, &ids, disk_grid(soup.domain, n), kappa)
}

/// κ matching a soup's intensity, or `NaN` for an empty-intensity soup.
pub fn kappa_of(soup: &LoopSoup) -> f64 {
    kappa_from_intensity(soup.intensity).unwrap_or(f64::NAN)
}
