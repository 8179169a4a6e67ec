//! Traversable-plane extraction: filtering, normals, region growing, stair
//! merging, coplanar merging, boundaries, intersections and gridding.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::{Matrix2, Matrix3, SymmetricEigen};
use rayon::prelude::*;

use crate::cloud::{NeighborIndex, PointCloud};
use crate::config::{ExtractionConfig, RunConfig};
use crate::error::{Error, Result};
use crate::geometry::{
    alpha_shape_boundary, convex_hull, expand_polygon, fit_plane, frame_from_normal, plane_polygon_intersection, ConvexPolygon2D,
    Transform, Vec2, Vec3,
};
use crate::mapping::build_grid;
use crate::plane::{Neighbor, PlaneFootprint, PlaneKind, TraversablePlane, VerticalObstacle};

/// A planar cluster of cloud points.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneSegment {
    pub point_indices: Vec<usize>,
    pub transform: Transform,
    pub inclination: f64,
    pub thickness: f64,
    pub kind: PlaneKind,
    pub merged_from_stairs: bool,
}

fn classify(inclination: f64, merged_from_stairs: bool, cfg: &ExtractionConfig) -> PlaneKind {
    if inclination >= cfg.traversable_max_inclination() {
        PlaneKind::Vertical
    } else if merged_from_stairs {
        PlaneKind::Stairs
    } else if inclination < cfg.ground_max_inclination() {
        PlaneKind::Ground
    } else {
        PlaneKind::Slope
    }
}

fn segment_from(points: &[Vec3], indices: Vec<usize>, merged_from_stairs: bool, cfg: &ExtractionConfig) -> Result<PlaneSegment> {
    let pts: Vec<Vec3> = indices.iter().map(|&i| points[i]).collect();
    let fit = fit_plane(&pts)?;
    Ok(PlaneSegment {
        kind: classify(fit.inclination, merged_from_stairs, cfg),
        point_indices: indices,
        transform: fit.transform,
        inclination: fit.inclination,
        thickness: fit.thickness,
        merged_from_stairs,
    })
}

/// Local normal and surface variation from the covariance of a neighborhood.
fn local_pca(points: &[Vec3], neighborhood: &[usize]) -> (Vec3, f64) {
    let n = neighborhood.len() as f64;
    let centroid = neighborhood.iter().fold(Vec3::zeros(), |acc, &i| acc + points[i]) / n;
    let mut cov = Matrix3::zeros();
    for &i in neighborhood {
        let d = points[i] - centroid;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov / n);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    let curvature = if total > 0.0 { eig.eigenvalues[order[0]].max(0.0) / total } else { 0.0 };
    (orient_normal(eig.eigenvectors.column(order[0]).into_owned()), curvature)
}

/// Flip a normal into the +z hemisphere; horizontal normals point to +x.
fn orient_normal(n: Vec3) -> Vec3 {
    let n = n.normalize();
    let flip = if n.z.abs() > 1e-9 {
        n.z < 0.0
    } else if n.x.abs() > 1e-9 {
        n.x < 0.0
    } else {
        n.y < 0.0
    };
    if flip { -n } else { n }
}

struct Neighborhoods {
    lists: Vec<Vec<usize>>,
    normals: Vec<Vec3>,
    curvature: Vec<f64>,
}

fn neighborhoods(points: &[Vec3], k: usize) -> Neighborhoods {
    let index = NeighborIndex::new(points);
    let lists: Vec<Vec<usize>> = points.par_iter().map(|p| index.nearest(p, k.min(points.len())).into_iter().map(|(i, _)| i).collect()).collect();
    let (normals, curvature): (Vec<Vec3>, Vec<f64>) = lists.par_iter().map(|nb| local_pca(points, nb)).unzip();
    Neighborhoods { lists, normals, curvature }
}

/// Voxel downsampling, statistical outlier removal and normal estimation.
pub fn preprocess(cloud: &PointCloud, cfg: &ExtractionConfig) -> Result<PointCloud> {
    let mut voxels: BTreeMap<(i64, i64, i64), (Vec3, usize)> = BTreeMap::new();
    for p in cloud.points.iter().filter(|p| p.iter().all(|c| c.is_finite())) {
        let key = ((p.x / cfg.voxel).floor() as i64, (p.y / cfg.voxel).floor() as i64, (p.z / cfg.voxel).floor() as i64);
        let e = voxels.entry(key).or_insert((Vec3::zeros(), 0));
        e.0 += p;
        e.1 += 1;
    }
    let points: Vec<Vec3> = voxels.values().map(|(s, n)| s / *n as f64).collect();
    if points.len() < cfg.min_segment_points.max(cfg.k_neighbors + 1) {
        return Err(Error::EmptyCloud(points.len()));
    }

    let index = NeighborIndex::new(&points);
    let mean_dist: Vec<f64> = points
        .par_iter()
        .map(|p| {
            let nb = index.nearest(p, cfg.k_neighbors + 1);
            nb.iter().skip(1).map(|(_, d)| d).sum::<f64>() / (nb.len() - 1).max(1) as f64
        })
        .collect();
    let n = mean_dist.len() as f64;
    let mu = mean_dist.iter().sum::<f64>() / n;
    let sigma = (mean_dist.iter().map(|d| (d - mu).powi(2)).sum::<f64>() / n).sqrt();
    // Uniform synthetic density makes sigma tiny, and mu + 2 sigma would then
    // strip narrow strips such as stair treads; keep a floor relative to mu.
    let limit = (mu + 2.0 * sigma).max(1.5 * mu);
    let kept: Vec<Vec3> = points.iter().zip(&mean_dist).filter(|(_, &d)| d <= limit).map(|(p, _)| *p).collect();
    if kept.len() < cfg.min_segment_points.max(cfg.k_neighbors + 1) {
        return Err(Error::EmptyCloud(kept.len()));
    }

    let nb = neighborhoods(&kept, cfg.k_neighbors);
    // Points near a crease see both surfaces and get a blended normal. Adopt
    // the normal of the flattest neighbor whose tangent plane passes through the point.
    let tol = 0.5 * cfg.dist_threshold;
    let normals: Vec<Vec3> = (0..kept.len())
        .into_par_iter()
        .map(|i| {
            let mut best = i;
            for &j in &nb.lists[i] {
                if nb.curvature[j] < nb.curvature[best] && nb.normals[j].dot(&(kept[i] - kept[j])).abs() <= tol {
                    best = j;
                }
            }
            // Refit on the neighbors lying in that tangent plane so the riser
            // side of a narrow tread stops tilting the estimate.
            let mut normal = nb.normals[best];
            let mut pool: Vec<usize> = nb.lists[i].iter().chain(&nb.lists[best]).copied().collect();
            pool.sort_unstable();
            pool.dedup();
            for _ in 0..3 {
                let inliers: Vec<usize> = pool.iter().copied().filter(|&j| normal.dot(&(kept[j] - kept[i])).abs() <= tol).collect();
                if inliers.len() < 6 {
                    break;
                }
                normal = local_pca(&kept, &inliers).0;
            }
            normal
        })
        .collect();
    PointCloud::with_normals(kept, normals)
}

/// Grow planar regions from low-curvature seeds.
pub fn region_growing(cloud: &PointCloud, cfg: &ExtractionConfig) -> Result<Vec<PlaneSegment>> {
    let points = &cloud.points;
    let normals = cloud.normals.as_ref().ok_or_else(|| Error::DegenerateInput("region growing needs normals".into()))?;
    if points.len() < 3 {
        return Ok(Vec::new());
    }
    let nb = neighborhoods(points, cfg.k_neighbors);
    let cos_thr = cfg.angle_threshold().cos();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| nb.curvature[a].total_cmp(&nb.curvature[b]).then(a.cmp(&b)));

    const FREE: usize = usize::MAX;
    let mut label = vec![FREE; points.len()];
    let mut segments = Vec::new();
    let mut queue = VecDeque::new();
    for (region_id, &seed) in order.iter().enumerate() {
        if label[seed] != FREE {
            continue;
        }
        label[seed] = region_id;
        let mut region = vec![seed];
        let mut normal = normals[seed];
        let mut origin = points[seed];
        let mut next_refit = 8usize;
        queue.clear();
        queue.push_back(seed);
        while let Some(i) = queue.pop_front() {
            for &j in &nb.lists[i] {
                if label[j] != FREE || normals[j].dot(&normal).abs() < cos_thr || normal.dot(&(points[j] - origin)).abs() >= cfg.dist_threshold {
                    continue;
                }
                label[j] = region_id;
                region.push(j);
                queue.push_back(j);
                if region.len() >= next_refit {
                    let pts: Vec<Vec3> = region.iter().map(|&r| points[r]).collect();
                    if let Ok(fit) = fit_plane(&pts) {
                        normal = fit.transform.normal();
                        origin = fit.transform.translation;
                    }
                    next_refit = region.len() * 3 / 2 + 1;
                }
            }
        }
        if region.len() >= cfg.min_segment_points {
            region.sort_unstable();
            if let Ok(seg) = segment_from(points, region, false, cfg) {
                segments.push(seg);
            }
        }
    }
    Ok(segments)
}

struct HorizontalBox {
    lo: Vec2,
    hi: Vec2,
    min_extent: f64,
}

fn horizontal_box(points: &[Vec3], indices: &[usize]) -> HorizontalBox {
    let mut lo = Vec2::repeat(f64::INFINITY);
    let mut hi = Vec2::repeat(f64::NEG_INFINITY);
    let n = indices.len() as f64;
    let mut mean = Vec2::zeros();
    for &i in indices {
        let q = Vec2::new(points[i].x, points[i].y);
        lo = lo.inf(&q);
        hi = hi.sup(&q);
        mean += q;
    }
    mean /= n;
    let mut cov = Matrix2::zeros();
    for &i in indices {
        let d = Vec2::new(points[i].x, points[i].y) - mean;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let mut min_extent = f64::INFINITY;
    for axis in eig.eigenvectors.column_iter() {
        let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
        for &i in indices {
            let t = axis.dot(&Vec2::new(points[i].x, points[i].y));
            a = a.min(t);
            b = b.max(t);
        }
        min_extent = min_extent.min(b - a);
    }
    HorizontalBox { lo, hi, min_extent }
}

fn box_gap(a: &HorizontalBox, b: &HorizontalBox) -> f64 {
    let gx = (a.lo.x - b.hi.x).max(b.lo.x - a.hi.x).max(0.0);
    let gy = (a.lo.y - b.hi.y).max(b.lo.y - a.hi.y).max(0.0);
    gx.hypot(gy)
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut c = x;
    while parent[c] != r {
        let next = parent[c];
        parent[c] = r;
        c = next;
    }
    r
}

/// Replace chains of stair treads with single pitched planes.
pub fn merge_stairs(segments: Vec<PlaneSegment>, points: &[Vec3], cfg: &ExtractionConfig) -> Vec<PlaneSegment> {
    let boxes: Vec<HorizontalBox> = segments.iter().map(|s| horizontal_box(points, &s.point_indices)).collect();
    let treads: Vec<usize> = (0..segments.len())
        .filter(|&i| segments[i].inclination < cfg.angle_threshold() && boxes[i].min_extent <= cfg.max_tread_depth)
        .collect();
    let height = |i: usize| segments[i].transform.translation.z;
    let mut parent: Vec<usize> = (0..segments.len()).collect();
    for (a, &i) in treads.iter().enumerate() {
        for &j in &treads[a + 1..] {
            let dh = (height(i) - height(j)).abs();
            if dh >= cfg.min_step_rise && dh <= cfg.max_step_rise && box_gap(&boxes[i], &boxes[j]) <= cfg.gap_threshold {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut chains: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in &treads {
        let r = find(&mut parent, i);
        chains.entry(r).or_default().push(i);
    }

    let mut consumed = vec![false; segments.len()];
    let mut merged = Vec::new();
    let mut trimmed = Vec::new();
    for chain in chains.values() {
        if chain.len() < 2 {
            continue;
        }
        let mut heights: Vec<f64> = chain.iter().map(|&i| height(i)).collect();
        heights.sort_by(f64::total_cmp);
        let mut rises: Vec<f64> = heights.windows(2).map(|w| w[1] - w[0]).collect();
        rises.sort_by(f64::total_cmp);
        let median = rises[rises.len() / 2];
        if rises.iter().any(|r| (r - median).abs() > 0.3 * median) {
            continue;
        }
        let mut indices: Vec<usize> = chain.iter().flat_map(|&i| segments[i].point_indices.iter().copied()).collect();
        indices.sort_unstable();
        let Ok(seg) = segment_from(points, indices, true, cfg) else { continue };
        let ascent = seg.transform.x_axis();
        let ascent = Vec2::new(ascent.x, ascent.y).normalize();
        let across = Vec2::new(-ascent.y, ascent.x);
        let coords = |p: &Vec3| (ascent.dot(&p.xy()), across.dot(&p.xy()));
        let (mut a_lo, mut a_hi, mut c_lo, mut c_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &k in &seg.point_indices {
            let (a, c) = coords(&points[k]);
            a_lo = a_lo.min(a);
            a_hi = a_hi.max(a);
            c_lo = c_lo.min(c);
            c_hi = c_hi.max(c);
        }
        let (z_lo, z_hi) = (heights[0] - cfg.max_step_rise, heights[heights.len() - 1] + cfg.max_step_rise);
        let in_flight = |p: &Vec3| {
            let (a, c) = coords(p);
            a >= a_lo - cfg.gap_threshold && a <= a_hi + cfg.gap_threshold && c >= c_lo && c <= c_hi && p.z >= z_lo && p.z <= z_hi
        };
        for &i in chain {
            consumed[i] = true;
        }
        // Risers face along the ascent and are often fused with the coplanar
        // front face of the landing, so their points are removed individually.
        for (i, s) in segments.iter().enumerate() {
            if consumed[i] || s.inclination < cfg.traversable_max_inclination() {
                continue;
            }
            let n = s.transform.normal();
            let facing = n.xy().dot(&ascent).abs() / n.xy().norm().max(1e-12);
            if facing <= cfg.angle_threshold().cos() {
                continue;
            }
            let kept: Vec<usize> = s.point_indices.iter().copied().filter(|&k| !in_flight(&points[k])).collect();
            if kept.len() == s.point_indices.len() {
                continue;
            }
            consumed[i] = true;
            if kept.len() >= cfg.min_segment_points {
                if let Ok(rest) = segment_from(points, kept, false, cfg) {
                    trimmed.push(rest);
                }
            }
        }
        merged.push(seg);
    }
    let mut out: Vec<PlaneSegment> = segments.into_iter().enumerate().filter(|(i, _)| !consumed[*i]).map(|(_, s)| s).collect();
    out.extend(trimmed);
    out.extend(merged);
    out
}

fn local_hull(seg: &PlaneSegment, frame: &Transform, points: &[Vec3]) -> Option<ConvexPolygon2D> {
    let pts: Vec<Vec2> = seg.point_indices.iter().map(|&i| frame.to_local_2d(&points[i])).collect();
    convex_hull(&pts).ok()
}

fn ordering_key(a: &PlaneSegment, b: &PlaneSegment) -> std::cmp::Ordering {
    let (ca, cb) = (a.transform.translation, b.transform.translation);
    b.point_indices
        .len()
        .cmp(&a.point_indices.len())
        .then(ca.x.total_cmp(&cb.x))
        .then(ca.y.total_cmp(&cb.y))
        .then(ca.z.total_cmp(&cb.z))
}

/// Merge coplanar touching traversable planes and drop the lower of stacked
/// near-duplicates; returns `(traversable, vertical)` in canonical order.
pub fn merge_coplanar(segments: Vec<PlaneSegment>, points: &[Vec3], cfg: &ExtractionConfig) -> (Vec<PlaneSegment>, Vec<PlaneSegment>) {
    let (mut trav, mut vert): (Vec<PlaneSegment>, Vec<PlaneSegment>) = segments.into_iter().partition(|s| s.kind.is_traversable());
    let cos_thr = cfg.angle_threshold().cos();
    loop {
        trav.sort_by(ordering_key);
        let hulls: Vec<Option<ConvexPolygon2D>> = trav.iter().map(|s| local_hull(s, &s.transform, points)).collect();
        let parallel = |i: usize, j: usize| trav[i].transform.normal().dot(&trav[j].transform.normal()).abs() >= cos_thr;

        let mut removed = None;
        'stack: for i in 0..trav.len() {
            for j in i + 1..trav.len() {
                let (Some(hi), Some(hj)) = (&hulls[i], &hulls[j]) else { continue };
                if !parallel(i, j) {
                    continue;
                }
                let ratio = hi.area() / hj.area();
                if !(0.8..=1.25).contains(&ratio) {
                    continue;
                }
                let sep = trav[i].transform.height_of(&trav[j].transform.translation).abs();
                if sep >= cfg.thickness_gap {
                    continue;
                }
                let Some(hj_in_i) = local_hull(&trav[j], &trav[i].transform, points) else { continue };
                if hi.intersection_area(&hj_in_i) < 0.5 * hi.area().min(hj.area()) {
                    continue;
                }
                let lower = if trav[i].transform.translation.z < trav[j].transform.translation.z { i } else { j };
                removed = Some(lower);
                break 'stack;
            }
        }
        if let Some(k) = removed {
            trav.remove(k);
            continue;
        }

        let mut pair = None;
        'merge: for i in 0..trav.len() {
            for j in i + 1..trav.len() {
                if (trav[i].kind == PlaneKind::Stairs) != (trav[j].kind == PlaneKind::Stairs) || !parallel(i, j) {
                    continue;
                }
                let (ti, tj) = (&trav[i].transform, &trav[j].transform);
                if ti.height_of(&tj.translation).abs() >= cfg.dist_threshold || tj.height_of(&ti.translation).abs() >= cfg.dist_threshold {
                    continue;
                }
                let (Some(hi), Some(hj_in_i)) = (&hulls[i], local_hull(&trav[j], ti, points)) else { continue };
                if expand_polygon(hi, cfg.expansion_margin).intersects(&expand_polygon(&hj_in_i, cfg.expansion_margin)) {
                    pair = Some((i, j));
                    break 'merge;
                }
            }
        }
        let Some((i, j)) = pair else { break };
        let b = trav.remove(j);
        let a = trav.remove(i);
        let stairs = a.merged_from_stairs || b.merged_from_stairs;
        let mut indices = a.point_indices.clone();
        indices.extend(b.point_indices.iter().copied());
        indices.sort_unstable();
        indices.dedup();
        match segment_from(points, indices, stairs, cfg) {
            Ok(seg) if seg.kind.is_traversable() => trav.push(seg),
            Ok(seg) => vert.push(seg),
            // a failed refit keeps the larger part
            Err(_) => trav.push(a),
        }
    }
    vert.sort_by(ordering_key);
    (trav, vert)
}

/// Full extraction pipeline without gridding: footprints with neighbor links
/// plus vertical obstacle outlines.
pub fn extract_footprints(cloud: &PointCloud, config: &RunConfig) -> Result<(Vec<PlaneFootprint>, Vec<VerticalObstacle>)> {
    extract_footprints_timed(cloud, config, &mut |_, _, _| {})
}

/// [`extract_footprints`] reporting each stage as `(name, milliseconds, output count)`.
pub fn extract_footprints_timed(
    cloud: &PointCloud,
    config: &RunConfig,
    on_stage: &mut dyn FnMut(&'static str, f64, usize),
) -> Result<(Vec<PlaneFootprint>, Vec<VerticalObstacle>)> {
    let cfg = &config.extraction;
    let mut clock = std::time::Instant::now();
    let mut lap = |name, count| {
        let now = std::time::Instant::now();
        on_stage(name, (now - clock).as_secs_f64() * 1e3, count);
        clock = now;
    };
    let filtered = preprocess(cloud, cfg)?;
    lap("preprocess", filtered.len());
    let segments = region_growing(&filtered, cfg)?;
    lap("region_growing", segments.len());
    let segments = merge_stairs(segments, &filtered.points, cfg);
    lap("merge_stairs", segments.len());
    let (trav, vert) = merge_coplanar(segments, &filtered.points, cfg);
    lap("merge_coplanar", trav.len());
    if trav.is_empty() {
        return Err(Error::NoTraversablePlane);
    }
    let mut footprints = Vec::with_capacity(trav.len());
    for seg in trav {
        let pts: Vec<Vec3> = seg.point_indices.iter().map(|&i| filtered.points[i]).collect();
        let local: Vec<Vec2> = pts.iter().map(|p| seg.transform.to_local_2d(p)).collect();
        let Ok(boundary) = convex_hull(&local) else { continue };
        let expanded = expand_polygon(&boundary, cfg.expansion_margin);
        footprints.push(PlaneFootprint {
            transform: seg.transform,
            kind: seg.kind,
            inclination: seg.inclination,
            thickness: seg.thickness,
            boundary,
            expanded,
            neighbors: Vec::new(),
            points: pts,
        });
    }
    if footprints.is_empty() {
        return Err(Error::NoTraversablePlane);
    }
    lap("boundaries", footprints.len());
    connect_planes(&mut footprints, cfg.expansion_margin, cfg.min_interline_length);
    lap("connect", footprints.iter().map(|f| f.neighbors.len()).sum::<usize>() / 2);

    let alpha = config.mapping.alpha();
    let obstacles: Vec<VerticalObstacle> = vert
        .par_iter()
        .filter_map(|seg| {
            let pts: Vec<Vec3> = seg.point_indices.iter().map(|&i| filtered.points[i]).collect();
            let frame = frame_from_normal(&seg.transform.normal(), seg.transform.translation);
            let local: Vec<Vec2> = pts.iter().map(|p| frame.to_local_2d(p)).collect();
            let idx = alpha_shape_boundary(&local, alpha).ok()?;
            Some(VerticalObstacle { transform: frame, boundary_points: idx.into_iter().map(|i| pts[i]).collect() })
        })
        .collect();
    lap("obstacles", obstacles.len());
    Ok((footprints, obstacles))
}

/// Set symmetric neighbor links between every pair of planes whose expanded
/// boundaries share an intersection segment.
pub fn connect_planes(planes: &mut [PlaneFootprint], margin: f64, min_length: f64) {
    let n = planes.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let links: Vec<(usize, usize, crate::geometry::Segment3D)> = pairs
        .par_iter()
        .filter_map(|&(i, j)| plane_polygon_intersection(planes[i].patch(), planes[j].patch(), margin, min_length).map(|s| (i, j, s)))
        .collect();
    for p in planes.iter_mut() {
        p.neighbors.clear();
    }
    for (i, j, seg) in links {
        planes[i].neighbors.push(Neighbor { plane: j, segment: seg.clone() });
        planes[j].neighbors.push(Neighbor { plane: i, segment: seg });
    }
    for p in planes.iter_mut() {
        p.neighbors.sort_by_key(|nb| nb.plane);
    }
}

/// Extract, connect and grid all traversable planes of a cloud.
pub fn extract_traversable_planes(cloud: &PointCloud, config: &RunConfig) -> Result<Vec<TraversablePlane>> {
    let (footprints, obstacles) = extract_footprints(cloud, config)?;
    grid_planes(footprints, &obstacles, config)
}

/// Build the grid and distance field of every footprint.
pub fn grid_planes(footprints: Vec<PlaneFootprint>, obstacles: &[VerticalObstacle], config: &RunConfig) -> Result<Vec<TraversablePlane>> {
    let grids: Vec<Result<_>> =
        (0..footprints.len()).into_par_iter().map(|i| build_grid(i, &footprints, obstacles, &config.mapping, config.robot.d_s)).collect();
    footprints.into_iter().zip(grids).map(|(fp, g)| Ok(TraversablePlane::from_footprint(fp, g?))).collect()
}
