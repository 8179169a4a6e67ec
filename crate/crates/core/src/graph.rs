//! Plane graph: crossing vertices on intersection lines, in-plane grid paths
//! between them, and least-cost start-to-goal queries.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Segment3D, Vec2, Vec3};
use crate::mapping::{query_esdf, GridMap};
use crate::plane::TraversablePlane;

/// Grid path length as a count of straight and diagonal steps.
///
/// Comparison is exact: `a + b*sqrt(2)` is ordered with integer arithmetic,
/// so A* and any reference search agree on optimal costs bit for bit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct StepCost {
    pub straight: u64,
    pub diagonal: u64,
}

impl StepCost {
    pub const ZERO: StepCost = StepCost { straight: 0, diagonal: 0 };

    pub fn new(straight: u64, diagonal: u64) -> Self {
        Self { straight, diagonal }
    }

    /// Octile distance between two cells, the exact free-space cost.
    pub fn octile(a: (usize, usize), b: (usize, usize)) -> Self {
        let dx = a.0.abs_diff(b.0) as u64;
        let dy = a.1.abs_diff(b.1) as u64;
        Self { straight: dx.max(dy) - dx.min(dy), diagonal: dx.min(dy) }
    }

    pub fn units(&self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * SQRT_2
    }

    pub fn meters(&self, resolution: f64) -> f64 {
        self.units() * resolution
    }
}

impl std::ops::Add for StepCost {
    type Output = StepCost;
    fn add(self, o: StepCost) -> StepCost {
        StepCost { straight: self.straight + o.straight, diagonal: self.diagonal + o.diagonal }
    }
}

impl Ord for StepCost {
    fn cmp(&self, other: &Self) -> Ordering {
        // sign of da + db*sqrt(2)
        let da = self.straight as i128 - other.straight as i128;
        let db = self.diagonal as i128 - other.diagonal as i128;
        match (da.signum(), db.signum()) {
            (0, 0) => Ordering::Equal,
            (a, b) if a >= 0 && b >= 0 => Ordering::Greater,
            (a, b) if a <= 0 && b <= 0 => Ordering::Less,
            (1, _) => (da * da).cmp(&(2 * db * db)),
            _ => (2 * db * db).cmp(&(da * da)),
        }
    }
}

impl PartialOrd for StepCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const MOVES: [(isize, isize); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Neighbors of a traversable cell with their step costs. Diagonal steps need
/// both side cells traversable so a path never clips an obstacle corner.
pub fn grid_moves(grid: &GridMap, cell: (usize, usize), clearance: f64) -> impl Iterator<Item = ((usize, usize), StepCost)> + '_ {
    let (w, h) = (grid.width as isize, grid.height as isize);
    let ok = move |i: isize, j: isize| i >= 0 && j >= 0 && i < w && j < h && grid.traversable(i as usize, j as usize, clearance);
    let (ci, cj) = (cell.0 as isize, cell.1 as isize);
    MOVES.iter().filter_map(move |&(di, dj)| {
        let (ni, nj) = (ci + di, cj + dj);
        if !ok(ni, nj) {
            return None;
        }
        if di != 0 && dj != 0 {
            if !ok(ci + di, cj) || !ok(ci, cj + dj) {
                return None;
            }
            return Some(((ni as usize, nj as usize), StepCost::new(0, 1)));
        }
        Some(((ni as usize, nj as usize), StepCost::new(1, 0)))
    })
}

/// A* over 8-connected traversable cells with the octile heuristic.
/// Returns the cell sequence and its exact step cost.
pub fn grid_astar(grid: &GridMap, start: (usize, usize), goal: (usize, usize), clearance: f64) -> Option<(Vec<(usize, usize)>, StepCost)> {
    if !grid.traversable(start.0, start.1, clearance) || !grid.traversable(goal.0, goal.1, clearance) {
        return None;
    }
    let n = grid.width * grid.height;
    let mut g: Vec<Option<StepCost>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let s = grid.index(start.0, start.1);
    let t = grid.index(goal.0, goal.1);
    g[s] = Some(StepCost::ZERO);
    heap.push(Reverse((StepCost::octile(start, goal), s)));
    while let Some(Reverse((_, k))) = heap.pop() {
        if closed[k] {
            continue;
        }
        closed[k] = true;
        if k == t {
            break;
        }
        let cell = (k % grid.width, k / grid.width);
        let gk = g[k].expect("queued cells have a cost");
        for (nb, step) in grid_moves(grid, cell, clearance) {
            let m = grid.index(nb.0, nb.1);
            if closed[m] {
                continue;
            }
            let cand = gk + step;
            if g[m].is_none_or(|old| cand < old) {
                g[m] = Some(cand);
                parent[m] = k;
                heap.push(Reverse((cand + StepCost::octile(nb, goal), m)));
            }
        }
    }
    let cost = g[t].filter(|_| closed[t])?;
    let mut cells = vec![goal];
    let mut k = t;
    while k != s {
        k = parent[k];
        cells.push((k % grid.width, k / grid.width));
    }
    cells.reverse();
    Some((cells, cost))
}

/// Segment check at quarter-cell spacing against the cell traversability predicate.
fn line_of_sight(grid: &GridMap, a: &Vec2, b: &Vec2, clearance: f64) -> bool {
    let len = (b - a).norm();
    let steps = (len / (0.25 * grid.resolution)).ceil().max(1.0) as usize;
    (0..=steps).all(|k| {
        let p = a + (b - a) * (k as f64 / steps as f64);
        grid.cell_of(&p).is_some_and(|(i, j)| grid.traversable(i, j, clearance))
    })
}

fn polyline_length(points: &[Vec2]) -> f64 {
    points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// A path inside one plane, in plane coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct InPlanePath {
    pub polyline: Vec<Vec2>,
    /// Length of the shortcut polyline, meters.
    pub cost: f64,
    /// Cost of the raw cell path before shortcutting.
    pub grid_cost: StepCost,
}

/// Grid A* between two plane points followed by greedy line-of-sight shortcutting.
pub fn in_plane_path(grid: &GridMap, a: &Vec2, b: &Vec2, clearance: f64) -> Option<InPlanePath> {
    let ca = grid.cell_of(a)?;
    let cb = grid.cell_of(b)?;
    let (cells, grid_cost) = grid_astar(grid, ca, cb, clearance)?;
    let mut raw = Vec::with_capacity(cells.len() + 2);
    raw.push(*a);
    if cells.len() > 2 {
        raw.extend(cells[1..cells.len() - 1].iter().map(|&(i, j)| grid.center(i, j)));
    }
    raw.push(*b);
    let mut polyline = vec![raw[0]];
    let mut anchor = 0;
    while anchor < raw.len() - 1 {
        let mut next = anchor + 1;
        for m in (anchor + 2..raw.len()).rev() {
            if line_of_sight(grid, &raw[anchor], &raw[m], clearance) {
                next = m;
                break;
            }
        }
        polyline.push(raw[next]);
        anchor = next;
    }
    if polyline.len() == 2 && (polyline[1] - polyline[0]).norm() == 0.0 {
        polyline.pop();
    }
    let cost = polyline_length(&polyline);
    Some(InPlanePath { polyline, cost, grid_cost })
}

/// Crossing point candidate on an intersection line.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphVertex {
    /// Adjacent planes, lower index first.
    pub plane_pair: (usize, usize),
    pub world_point: Vec3,
    /// The point in the coordinates of `plane_pair.0` and `plane_pair.1`.
    pub local_points: [Vec2; 2],
    /// Position along the intersection segment from `a` to `b`.
    pub line_param: f64,
}

impl GraphVertex {
    pub fn touches(&self, plane: usize) -> bool {
        self.plane_pair.0 == plane || self.plane_pair.1 == plane
    }

    pub fn local_in(&self, plane: usize) -> Vec2 {
        if plane == self.plane_pair.0 { self.local_points[0] } else { self.local_points[1] }
    }

    pub fn other(&self, plane: usize) -> usize {
        if plane == self.plane_pair.0 { self.plane_pair.1 } else { self.plane_pair.0 }
    }
}

/// Cell traversable and interpolated clearance at least `margin`.
pub fn point_feasible(grid: &GridMap, p: &Vec2, margin: f64) -> bool {
    grid.cell_of(p).is_some_and(|(i, j)| grid.traversable(i, j, margin)) && query_esdf(grid, p.x, p.y).value >= margin
}

/// Candidate line parameters in scan order: the midpoint, then symmetric
/// offsets of one grid cell at a time, larger parameter first.
pub fn scan_params(length: f64, step: f64) -> Vec<f64> {
    let mut out = vec![0.5];
    if length <= 0.0 || step <= 0.0 {
        return out;
    }
    let dt = step / length;
    let mut k = 1;
    loop {
        let off = k as f64 * dt;
        if off >= 0.5 {
            break;
        }
        out.push(0.5 + off);
        out.push(0.5 - off);
        k += 1;
    }
    out
}

/// The first feasible point on the segment between planes `i` and `j`.
pub fn place_vertex(planes: &[TraversablePlane], i: usize, j: usize, segment: &Segment3D, margin: f64) -> Option<GraphVertex> {
    let (pi, pj) = (&planes[i], &planes[j]);
    let step = pi.grid.resolution.min(pj.grid.resolution);
    scan_params(segment.length(), step).into_iter().find_map(|t| {
        let w = segment.point_at(t);
        let (li, lj) = (pi.to_local(&w), pj.to_local(&w));
        (point_feasible(&pi.grid, &li, margin) && point_feasible(&pj.grid, &lj, margin))
            .then(|| GraphVertex { plane_pair: (i, j), world_point: w, local_points: [li, lj], line_param: t })
    })
}

/// One vertex per neighbor pair whose intersection line has a feasible point.
pub fn place_vertices(planes: &[TraversablePlane], margin: f64) -> Vec<GraphVertex> {
    let mut pairs = Vec::new();
    for (i, p) in planes.iter().enumerate() {
        for nb in &p.neighbors {
            if nb.plane > i {
                pairs.push((i, nb.plane, nb.segment.clone()));
            }
        }
    }
    pairs.par_iter().filter_map(|(i, j, seg)| place_vertex(planes, *i, *j, seg, margin)).collect()
}

/// In-plane path between two vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphEdge {
    pub endpoints: (usize, usize),
    pub plane: usize,
    /// From `endpoints.0` to `endpoints.1`, plane coordinates.
    pub polyline: Vec<Vec2>,
    pub cost: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlaneGraph {
    pub vertices: Vec<GraphVertex>,
    pub edges: Vec<GraphEdge>,
    /// Per vertex: `(edge index, other vertex)`, sorted.
    pub adjacency: Vec<Vec<(usize, usize)>>,
}

impl PlaneGraph {
    pub fn from_parts(vertices: Vec<GraphVertex>, edges: Vec<GraphEdge>) -> Self {
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (e, edge) in edges.iter().enumerate() {
            adjacency[edge.endpoints.0].push((e, edge.endpoints.1));
            adjacency[edge.endpoints.1].push((e, edge.endpoints.0));
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        Self { vertices, edges, adjacency }
    }

    pub fn vertices_on(&self, plane: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(move |&v| self.vertices[v].touches(plane))
    }
}

/// Place vertices and connect every pair sharing a plane by an in-plane path.
pub fn build_graph(planes: &[TraversablePlane], clearance: f64) -> PlaneGraph {
    let vertices = place_vertices(planes, clearance);
    let per_plane: Vec<Vec<GraphEdge>> = (0..planes.len())
        .into_par_iter()
        .map(|p| {
            let on: Vec<usize> = (0..vertices.len()).filter(|&v| vertices[v].touches(p)).collect();
            let mut edges = Vec::new();
            for (a, &u) in on.iter().enumerate() {
                for &v in &on[a + 1..] {
                    let (lu, lv) = (vertices[u].local_in(p), vertices[v].local_in(p));
                    if let Some(path) = in_plane_path(&planes[p].grid, &lu, &lv, clearance) {
                        edges.push(GraphEdge { endpoints: (u, v), plane: p, polyline: path.polyline, cost: path.cost });
                    }
                }
            }
            edges
        })
        .collect();
    PlaneGraph::from_parts(vertices, per_plane.into_iter().flatten().collect())
}

/// Single-source shortest paths over non-negative weights. Ties are broken
/// by node index so the predecessor tree is deterministic.
pub fn dijkstra(adjacency: &[Vec<(usize, f64)>], source: usize) -> (Vec<f64>, Vec<Option<usize>>) {
    #[derive(PartialEq)]
    struct Entry(f64, usize);
    impl Eq for Entry {}
    impl Ord for Entry {
        fn cmp(&self, o: &Self) -> Ordering {
            o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
        }
    }
    impl PartialOrd for Entry {
        fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
            Some(self.cmp(o))
        }
    }
    let n = adjacency.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, u)) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(v, w) in &adjacency[u] {
            let cand = d + w;
            if cand < dist[v] {
                dist[v] = cand;
                prev[v] = Some(u);
                heap.push(Entry(cand, v));
            }
        }
    }
    (dist, prev)
}

/// Nearest plane whose expanded boundary contains the projection of `p`.
pub fn project_to_plane(planes: &[TraversablePlane], p: &Vec3, max_dist: f64) -> Option<(usize, Vec2)> {
    let mut best: Option<(f64, usize, Vec2)> = None;
    for (k, plane) in planes.iter().enumerate() {
        let local = plane.transform.to_local(p);
        let d = local.z.abs();
        let xy = local.xy();
        if d > max_dist || !plane.expanded.contains(&xy, 1e-9) {
            continue;
        }
        if best.as_ref().is_none_or(|b| d < b.0) {
            best = Some((d, k, xy));
        }
    }
    best.map(|(_, k, xy)| (k, xy))
}

/// Change of plane at a graph vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Crossing {
    pub vertex: usize,
    pub from: usize,
    pub to: usize,
    /// Searched position along the intersection segment, used to seed η.
    pub line_param: f64,
    pub world_point: Vec3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    pub start: Vec3,
    pub goal: Vec3,
    /// Planes visited in order.
    pub planes: Vec<usize>,
    /// One polyline per visited plane, in that plane's coordinates.
    pub polylines: Vec<Vec<Vec2>>,
    pub crossings: Vec<Crossing>,
    pub cost: f64,
}

/// Least-cost route from `start` to `goal` through the plane graph.
pub fn search_path(graph: &PlaneGraph, planes: &[TraversablePlane], start: &Vec3, goal: &Vec3, max_dist: f64, clearance: f64) -> Result<PathResult> {
    let (sp, s_local) = project_to_plane(planes, start, max_dist).ok_or(Error::NoPlaneNearStart)?;
    let (gp, g_local) = project_to_plane(planes, goal, max_dist).ok_or(Error::NoPlaneNearGoal)?;
    if !point_feasible(&planes[sp].grid, &s_local, clearance) {
        return Err(Error::InfeasibleInit("start point lacks clearance on its plane".into()));
    }
    if !point_feasible(&planes[gp].grid, &g_local, clearance) {
        return Err(Error::Unreachable);
    }

    let nv = graph.vertices.len();
    let (s_node, g_node) = (nv, nv + 1);
    // (plane, polyline from the lower node id to the higher one)
    let mut extra: Vec<(usize, usize, usize, Vec<Vec2>, f64)> = Vec::new();
    let terminal: Vec<(usize, usize, Vec2)> = vec![(s_node, sp, s_local), (g_node, gp, g_local)];
    let jobs: Vec<(usize, usize, usize, Vec2)> = terminal
        .iter()
        .flat_map(|&(node, plane, local)| graph.vertices_on(plane).map(move |v| (node, v, plane, local)))
        .collect();
    let found: Vec<Option<(usize, usize, usize, Vec<Vec2>, f64)>> = jobs
        .par_iter()
        .map(|&(node, v, plane, local)| {
            let target = graph.vertices[v].local_in(plane);
            in_plane_path(&planes[plane].grid, &target, &local, clearance).map(|p| (v, node, plane, p.polyline, p.cost))
        })
        .collect();
    extra.extend(found.into_iter().flatten());
    if sp == gp {
        if let Some(p) = in_plane_path(&planes[sp].grid, &s_local, &g_local, clearance) {
            extra.push((s_node, g_node, sp, p.polyline, p.cost));
        }
    }

    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nv + 2];
    // edge lookup keyed by (from, to) during path reconstruction
    let mut lookup: std::collections::HashMap<(usize, usize), (usize, Vec<Vec2>, f64)> = std::collections::HashMap::new();
    let mut add = |a: usize, b: usize, plane: usize, poly: &[Vec2], cost: f64, adjacency: &mut Vec<Vec<(usize, f64)>>| {
        let keep = lookup.get(&(a, b)).is_none_or(|old| cost < old.2);
        if !keep {
            return;
        }
        adjacency[a].push((b, cost));
        adjacency[b].push((a, cost));
        let mut rev = poly.to_vec();
        rev.reverse();
        lookup.insert((a, b), (plane, poly.to_vec(), cost));
        lookup.insert((b, a), (plane, rev, cost));
    };
    for e in &graph.edges {
        add(e.endpoints.0, e.endpoints.1, e.plane, &e.polyline, e.cost, &mut adjacency);
    }
    for (a, b, plane, poly, cost) in &extra {
        add(*a, *b, *plane, poly, *cost, &mut adjacency);
    }
    for a in &mut adjacency {
        a.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
    }

    let (dist, prev) = dijkstra(&adjacency, s_node);
    if !dist[g_node].is_finite() {
        return Err(Error::Unreachable);
    }
    let mut nodes = vec![g_node];
    while let Some(p) = prev[*nodes.last().unwrap()] {
        nodes.push(p);
    }
    nodes.reverse();

    let mut planes_seq: Vec<usize> = Vec::new();
    let mut polylines: Vec<Vec<Vec2>> = Vec::new();
    let mut crossings = Vec::new();
    for w in nodes.windows(2) {
        let (plane, poly, _) = &lookup[&(w[0], w[1])];
        if planes_seq.last() == Some(plane) {
            let cur = polylines.last_mut().unwrap();
            cur.extend(poly.iter().skip(1).copied());
        } else {
            if let Some(&from) = planes_seq.last() {
                let v = w[0];
                let vx = &graph.vertices[v];
                crossings.push(Crossing { vertex: v, from, to: *plane, line_param: vx.line_param, world_point: vx.world_point });
            }
            planes_seq.push(*plane);
            polylines.push(poly.clone());
        }
    }
    Ok(PathResult { start: *start, goal: *goal, planes: planes_seq, polylines, crossings, cost: dist[g_node] })
}
