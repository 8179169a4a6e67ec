//! Per-plane occupancy grids and signed Euclidean distance fields.

use crate::config::MappingConfig;
use crate::error::{Error, Result};
use crate::geometry::{Vec2, Vec3};
use crate::plane::{PlaneFootprint, PlaneKind, VerticalObstacle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellState {
    Unknown,
    Safe,
    Interline,
    Overlap,
    Boundary,
    Occupied,
}

impl CellState {
    pub fn code(self) -> char {
        match self {
            CellState::Unknown => 'U',
            CellState::Safe => 'S',
            CellState::Interline => 'I',
            CellState::Overlap => 'O',
            CellState::Boundary => 'B',
            CellState::Occupied => 'X',
        }
    }

    pub fn from_code(c: char) -> Option<Self> {
        Some(match c {
            'U' => CellState::Unknown,
            'S' => CellState::Safe,
            'I' => CellState::Interline,
            'O' => CellState::Overlap,
            'B' => CellState::Boundary,
            'X' => CellState::Occupied,
            _ => return None,
        })
    }

    /// Cells the distance field treats as obstacles.
    pub fn is_obstacle(self) -> bool {
        matches!(self, CellState::Unknown | CellState::Occupied | CellState::Boundary)
    }

    /// Cells a path may pass through (subject to clearance).
    pub fn is_passable(self) -> bool {
        matches!(self, CellState::Safe | CellState::Interline)
    }
}

/// Regular grid in plane coordinates. `origin` is the lower-left corner of
/// cell (0, 0); cell (i, j) has its center at `origin + (i + 0.5, j + 0.5) * resolution`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMap {
    pub resolution: f64,
    pub origin: Vec2,
    pub width: usize,
    pub height: usize,
    pub states: Vec<CellState>,
    pub esdf: Vec<f64>,
}

/// Interpolated distance-field value and its gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EsdfSample {
    pub value: f64,
    pub gradient: Vec2,
}

impl GridMap {
    pub fn new(resolution: f64, origin: Vec2, width: usize, height: usize) -> Self {
        Self {
            resolution,
            origin,
            width,
            height,
            states: vec![CellState::Unknown; width * height],
            esdf: vec![0.0; width * height],
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn state(&self, i: usize, j: usize) -> CellState {
        self.states[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, s: CellState) {
        let k = self.index(i, j);
        self.states[k] = s;
    }

    pub fn center(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new(i as f64 + 0.5, j as f64 + 0.5) * self.resolution
    }

    /// Cell containing a plane-coordinate point, if inside the grid.
    pub fn cell_of(&self, p: &Vec2) -> Option<(usize, usize)> {
        let u = ((p.x - self.origin.x) / self.resolution).floor();
        let v = ((p.y - self.origin.y) / self.resolution).floor();
        if u < 0.0 || v < 0.0 || u >= self.width as f64 || v >= self.height as f64 {
            return None;
        }
        Some((u as usize, v as usize))
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        self.cell_of(p).is_some()
    }

    /// Path-search predicate: passable state and enough clearance.
    pub fn traversable(&self, i: usize, j: usize, clearance: f64) -> bool {
        let k = self.index(i, j);
        self.states[k].is_passable() && self.esdf[k] >= clearance
    }

    /// Same predicate at an arbitrary point (cell state, interpolated clearance).
    pub fn traversable_at(&self, p: &Vec2, clearance: f64) -> bool {
        match self.cell_of(p) {
            Some((i, j)) => self.state(i, j).is_passable() && query_esdf(self, p.x, p.y).value >= clearance,
            None => false,
        }
    }

    pub fn count(&self, s: CellState) -> usize {
        self.states.iter().filter(|&&c| c == s).count()
    }

    fn neighbors8(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (w, h) = (self.width as isize, self.height as isize);
        (-1isize..=1)
            .flat_map(move |dj| (-1isize..=1).map(move |di| (di, dj)))
            .filter(|&(di, dj)| di != 0 || dj != 0)
            .filter_map(move |(di, dj)| {
                let (a, b) = (i as isize + di, j as isize + dj);
                (a >= 0 && b >= 0 && a < w && b < h).then_some((a as usize, b as usize))
            })
    }
}

/// Cells touched by the segment `a`-`b` (supercover traversal).
pub fn supercover(grid: &GridMap, a: &Vec2, b: &Vec2) -> Vec<(usize, usize)> {
    let res = grid.resolution;
    let to_grid = |p: &Vec2| ((p.x - grid.origin.x) / res, (p.y - grid.origin.y) / res);
    let (x0, y0) = to_grid(a);
    let (x1, y1) = to_grid(b);
    let (dx, dy) = (x1 - x0, y1 - y0);
    let mut i = x0.floor() as i64;
    let mut j = y0.floor() as i64;
    let end_i = x1.floor() as i64;
    let end_j = y1.floor() as i64;
    let step_i = if dx > 0.0 { 1 } else { -1 };
    let step_j = if dy > 0.0 { 1 } else { -1 };
    let t_delta_x = if dx != 0.0 { (1.0 / dx).abs() } else { f64::INFINITY };
    let t_delta_y = if dy != 0.0 { (1.0 / dy).abs() } else { f64::INFINITY };
    let mut t_max_x = if dx > 0.0 {
        ((i + 1) as f64 - x0) / dx
    } else if dx < 0.0 {
        (i as f64 - x0) / dx
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if dy > 0.0 {
        ((j + 1) as f64 - y0) / dy
    } else if dy < 0.0 {
        (j as f64 - y0) / dy
    } else {
        f64::INFINITY
    };
    let mut cells = Vec::new();
    let mut push = |i: i64, j: i64| {
        if i >= 0 && j >= 0 && (i as usize) < grid.width && (j as usize) < grid.height {
            cells.push((i as usize, j as usize));
        }
    };
    push(i, j);
    let max_steps = (end_i - i).unsigned_abs() + (end_j - j).unsigned_abs() + 2;
    for _ in 0..max_steps {
        if i == end_i && j == end_j {
            break;
        }
        if (t_max_x - t_max_y).abs() < 1e-12 {
            // passing exactly through a corner: cover both side cells
            push(i + step_i, j);
            push(i, j + step_j);
            i += step_i;
            j += step_j;
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
        } else if t_max_x < t_max_y {
            i += step_i;
            t_max_x += t_delta_x;
        } else {
            j += step_j;
            t_max_y += t_delta_y;
        }
        push(i, j);
    }
    cells
}

/// Half-width of the Interline strip around a crossing segment.
pub fn interline_dilation(resolution: f64, d_s: f64) -> f64 {
    d_s + 2.0 * resolution
}

/// Assign the grid states of traversable plane `index` from its own points, its
/// neighbors and the vertical-plane outlines, then fill the distance field.
pub fn build_grid(
    index: usize,
    planes: &[PlaneFootprint],
    obstacles: &[VerticalObstacle],
    cfg: &MappingConfig,
    d_s: f64,
) -> Result<GridMap> {
    let plane = &planes[index];
    let res = cfg.resolution;
    let dilation = interline_dilation(res, d_s);
    let pad = dilation + 2.0 * res;
    let (lo, hi) = plane.expanded.bounds();
    let origin = Vec2::new(((lo.x - pad) / res).floor() * res, ((lo.y - pad) / res).floor() * res);
    let width = ((hi.x + pad - origin.x) / res).ceil().max(1.0) as usize;
    let height = ((hi.y + pad - origin.y) / res).ceil().max(1.0) as usize;
    let mut grid = GridMap::new(res, origin, width, height);
    let tf = &plane.transform;

    let mut safe = vec![false; width * height];
    for p in &plane.points {
        if let Some((i, j)) = grid.cell_of(&tf.to_local_2d(p)) {
            safe[grid.index(i, j)] = true;
        }
    }
    if plane.kind == PlaneKind::Stairs {
        // treads project onto the fitted stair plane as strips with gaps between them
        close_along_x(&mut safe, width, height, cfg.stair_gap_cells);
    }

    let mut overlap = vec![false; width * height];
    for n in &plane.neighbors {
        for p in &planes[n.plane].points {
            let l = tf.to_local(p);
            if l.z > cfg.overlap_min_height {
                if let Some((i, j)) = grid.cell_of(&Vec2::new(l.x, l.y)) {
                    overlap[grid.index(i, j)] = true;
                }
            }
        }
    }

    let mut interline = vec![false; width * height];
    for n in &plane.neighbors {
        let a = tf.to_local_2d(&n.segment.a);
        let b = tf.to_local_2d(&n.segment.b);
        for (i, j) in supercover(&grid, &a, &b) {
            interline[grid.index(i, j)] = true;
        }
        let dir = b - a;
        let len = dir.norm();
        let u = dir / len;
        for j in 0..height {
            for i in 0..width {
                let d = grid.center(i, j) - a;
                let along = d.dot(&u);
                let across = (d.x * u.y - d.y * u.x).abs();
                if along >= 0.0 && along <= len && across <= dilation {
                    interline[grid.index(i, j)] = true;
                }
            }
        }
    }

    let mut occupied = vec![false; width * height];
    let stamp = (d_s / res).ceil() as i64 + 1;
    for ob in obstacles {
        for p in &ob.boundary_points {
            let l = tf.to_local(p);
            if l.z.abs() >= cfg.clearance_height {
                continue;
            }
            let q = Vec2::new(l.x, l.y);
            let ci = ((q.x - origin.x) / res).floor() as i64;
            let cj = ((q.y - origin.y) / res).floor() as i64;
            for dj in -stamp..=stamp {
                for di in -stamp..=stamp {
                    let (i, j) = (ci + di, cj + dj);
                    if i < 0 || j < 0 || i >= width as i64 || j >= height as i64 {
                        continue;
                    }
                    let (i, j) = (i as usize, j as usize);
                    if (grid.center(i, j) - q).norm() <= d_s {
                        occupied[grid.index(i, j)] = true;
                    }
                }
            }
        }
    }

    for k in 0..width * height {
        grid.states[k] = if interline[k] {
            CellState::Interline
        } else if overlap[k] {
            CellState::Overlap
        } else if safe[k] {
            CellState::Safe
        } else {
            CellState::Unknown
        };
    }
    let mut boundary = Vec::new();
    for j in 0..height {
        for i in 0..width {
            if grid.state(i, j) == CellState::Overlap && grid.neighbors8(i, j).any(|(a, b)| grid.state(a, b) == CellState::Safe) {
                boundary.push((i, j));
            }
        }
    }
    for (i, j) in boundary {
        grid.set(i, j, CellState::Boundary);
    }
    for k in 0..width * height {
        if occupied[k] {
            grid.states[k] = CellState::Occupied;
        }
    }
    // Occupied stamping can remove the Safe support of a Boundary cell
    for j in 0..height {
        for i in 0..width {
            if grid.state(i, j) == CellState::Boundary && !grid.neighbors8(i, j).any(|(a, b)| grid.state(a, b) == CellState::Safe) {
                grid.set(i, j, CellState::Overlap);
            }
        }
    }
    if grid.count(CellState::Safe) == 0 {
        return Err(Error::EmptyGrid(index));
    }
    compute_esdf(&mut grid);
    Ok(grid)
}

fn close_along_x(mask: &mut [bool], width: usize, height: usize, max_gap: usize) {
    for j in 0..height {
        let row = &mut mask[j * width..(j + 1) * width];
        let mut last: Option<usize> = None;
        for i in 0..width {
            if row[i] {
                if let Some(l) = last {
                    let gap = i - l - 1;
                    if gap > 0 && gap <= max_gap {
                        row[l + 1..i].iter_mut().for_each(|c| *c = true);
                    }
                }
                last = Some(i);
            }
        }
    }
}

/// One-dimensional squared distance transform of a sampled function
/// (lower envelope of parabolas). `f` holds 0 at sites and `f64::INFINITY` elsewhere
/// on the first pass; later passes hold partial squared distances.
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    let first = f.iter().position(|x| x.is_finite());
    let Some(first) = first else {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    };
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[0] = f64::NEG_INFINITY;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
}

/// Squared distance (in cells) from every cell to the nearest cell where `site` is true.
pub fn squared_distance_transform(site: &[bool], width: usize, height: usize) -> Vec<f64> {
    let n = width.max(height);
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    let mut col_in = vec![0.0; height];
    let mut col_out = vec![0.0; height];
    let mut tmp = vec![0.0; width * height];
    for i in 0..width {
        for j in 0..height {
            col_in[j] = if site[j * width + i] { 0.0 } else { f64::INFINITY };
        }
        edt_1d(&col_in, &mut col_out, &mut v, &mut z);
        for j in 0..height {
            tmp[j * width + i] = col_out[j];
        }
    }
    let mut out = vec![0.0; width * height];
    for j in 0..height {
        let row = &tmp[j * width..(j + 1) * width];
        edt_1d(row, &mut out[j * width..(j + 1) * width], &mut v, &mut z);
    }
    out
}

/// Fill `grid.esdf` with the exact signed distance field of the grid's states.
pub fn compute_esdf(grid: &mut GridMap) {
    let (w, h) = (grid.width, grid.height);
    let obstacle: Vec<bool> = grid.states.iter().map(|s| s.is_obstacle()).collect();
    let free: Vec<bool> = obstacle.iter().map(|o| !o).collect();
    let cap = (w as f64).hypot(h as f64) * grid.resolution;
    let to_obstacle = squared_distance_transform(&obstacle, w, h);
    let to_free = squared_distance_transform(&free, w, h);
    for k in 0..w * h {
        grid.esdf[k] = if obstacle[k] {
            let d = to_free[k];
            if d.is_finite() { -d.sqrt() * grid.resolution } else { -cap }
        } else {
            let d = to_obstacle[k];
            if d.is_finite() { d.sqrt() * grid.resolution } else { cap }
        };
    }
}

/// Bilinear distance-field lookup at plane coordinates `(x, y)`.
///
/// Outside the rectangle spanned by the cell centers the value continues as
/// the border value minus the distance to that rectangle, so iterates that
/// leave the grid are pulled back.
pub fn query_esdf(grid: &GridMap, x: f64, y: f64) -> EsdfSample {
    let res = grid.resolution;
    let lo = grid.origin + Vec2::repeat(0.5 * res);
    let hi_x = grid.origin.x + (grid.width as f64 - 0.5) * res;
    let hi_y = grid.origin.y + (grid.height as f64 - 0.5) * res;
    let cx = x.clamp(lo.x, hi_x);
    let cy = y.clamp(lo.y, hi_y);
    let u = (cx - lo.x) / res;
    let v = (cy - lo.y) / res;
    let i0 = (u.floor() as usize).min(grid.width.saturating_sub(2));
    let j0 = (v.floor() as usize).min(grid.height.saturating_sub(2));
    let i1 = (i0 + 1).min(grid.width - 1);
    let j1 = (j0 + 1).min(grid.height - 1);
    let fx = if i1 > i0 { u - i0 as f64 } else { 0.0 };
    let fy = if j1 > j0 { v - j0 as f64 } else { 0.0 };
    let e00 = grid.esdf[grid.index(i0, j0)];
    let e10 = grid.esdf[grid.index(i1, j0)];
    let e01 = grid.esdf[grid.index(i0, j1)];
    let e11 = grid.esdf[grid.index(i1, j1)];
    let value = e00 * (1.0 - fx) * (1.0 - fy) + e10 * fx * (1.0 - fy) + e01 * (1.0 - fx) * fy + e11 * fx * fy;
    let mut gx = ((e10 - e00) * (1.0 - fy) + (e11 - e01) * fy) / res;
    let mut gy = ((e01 - e00) * (1.0 - fx) + (e11 - e10) * fx) / res;
    if i1 == i0 || cx != x {
        gx = 0.0;
    }
    if j1 == j0 || cy != y {
        gy = 0.0;
    }
    let out = Vec2::new(cx - x, cy - y);
    let dist = out.norm();
    if dist > 0.0 {
        EsdfSample { value: value - dist, gradient: Vec2::new(gx, gy) + out / dist }
    } else {
        EsdfSample { value, gradient: Vec2::new(gx, gy) }
    }
}

/// Lift a grid cell center to world coordinates through a plane transform.
pub fn cell_world(grid: &GridMap, tf: &crate::geometry::Transform, i: usize, j: usize) -> Vec3 {
    tf.lift(&grid.center(i, j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(grid: &GridMap) -> Vec<f64> {
        let (w, h) = (grid.width, grid.height);
        let cap = (w as f64).hypot(h as f64) * grid.resolution;
        let mut out = vec![0.0; w * h];
        for j in 0..h {
            for i in 0..w {
                let me = grid.state(i, j).is_obstacle();
                let mut best = f64::INFINITY;
                for b in 0..h {
                    for a in 0..w {
                        if grid.state(a, b).is_obstacle() != me {
                            let d = ((a as f64 - i as f64).powi(2) + (b as f64 - j as f64).powi(2)).sqrt();
                            best = best.min(d);
                        }
                    }
                }
                let d = if best.is_finite() { best * grid.resolution } else { cap };
                out[j * w + i] = if me { -d } else { d };
            }
        }
        out
    }

    #[test]
    fn single_obstacle_distances() {
        let mut g = GridMap::new(0.1, Vec2::zeros(), 12, 9);
        g.states.iter_mut().for_each(|s| *s = CellState::Safe);
        g.set(4, 3, CellState::Occupied);
        compute_esdf(&mut g);
        for j in 0..9 {
            for i in 0..12 {
                let want = if (i, j) == (4, 3) { -0.1 } else { 0.1 * ((i as f64 - 4.0).hypot(j as f64 - 3.0)) };
                assert!((g.esdf[g.index(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn esdf_matches_brute_force_on_patterns() {
        let mut g = GridMap::new(0.05, Vec2::new(-1.0, 2.0), 17, 11);
        for k in 0..g.states.len() {
            g.states[k] = match (k * 7 + k / 5) % 9 {
                0 => CellState::Occupied,
                1 => CellState::Unknown,
                2 => CellState::Interline,
                3 => CellState::Overlap,
                _ => CellState::Safe,
            };
        }
        compute_esdf(&mut g);
        let want = brute(&g);
        for (a, b) in g.esdf.iter().zip(&want) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn all_obstacle_grid_is_non_positive() {
        let mut g = GridMap::new(0.1, Vec2::zeros(), 5, 5);
        compute_esdf(&mut g);
        assert!(g.esdf.iter().all(|&e| e <= 0.0));
    }

    #[test]
    fn query_at_centers_and_midpoints() {
        let mut g = GridMap::new(0.1, Vec2::zeros(), 4, 4);
        for (k, e) in g.esdf.iter_mut().enumerate() {
            *e = k as f64 * 0.1;
        }
        let c = g.center(1, 2);
        assert!((query_esdf(&g, c.x, c.y).value - g.esdf[g.index(1, 2)]).abs() < 1e-12);
        g.esdf[0] = 0.2;
        g.esdf[1] = 0.4;
        let m = (g.center(0, 0) + g.center(1, 0)) / 2.0;
        assert!((query_esdf(&g, m.x, m.y).value - 0.3).abs() < 1e-12);
    }

    #[test]
    fn query_outside_pulls_back() {
        let mut g = GridMap::new(0.1, Vec2::zeros(), 4, 4);
        g.esdf.iter_mut().for_each(|e| *e = 0.5);
        let s = query_esdf(&g, -1.0, 0.2);
        assert!((s.value - (0.5 - 1.05)).abs() < 1e-12);
        assert!((s.gradient - Vec2::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn supercover_has_no_diagonal_gaps() {
        let g = GridMap::new(0.1, Vec2::zeros(), 20, 20);
        let cells = supercover(&g, &Vec2::new(0.05, 0.05), &Vec2::new(1.55, 0.95));
        for w in cells.windows(2) {
            let di = (w[0].0 as i64 - w[1].0 as i64).abs();
            let dj = (w[0].1 as i64 - w[1].1 as i64).abs();
            assert!(di + dj <= 2);
        }
        assert_eq!(cells.first(), Some(&(0, 0)));
        assert_eq!(cells.last(), Some(&(15, 9)));
        let corner = supercover(&g, &Vec2::new(0.05, 0.05), &Vec2::new(0.35, 0.35));
        assert!(corner.contains(&(1, 0)) && corner.contains(&(0, 1)));
    }

    #[test]
    fn closing_fills_short_gaps_only() {
        let mut row = vec![true, false, false, true, false, false, false, false, true];
        close_along_x(&mut row, 9, 1, 3);
        assert_eq!(row, vec![true, true, true, true, false, false, false, false, true]);
    }
}
