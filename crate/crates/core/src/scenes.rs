//! Deterministic synthetic multi-layer scenes with ground-truth labels.
//!
//! The four bundled scenes are small analogs of typical test environments:
//! two floors joined by a ramp and two staircases (`planes`), a wall that must
//! be bypassed over a platform (`platform`), three stacked layers with a decoy
//! ramp (`multilayer`) and a two-storey room with a long staircase (`building`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{Vec2, Vec3};
use crate::plane::PlaneKind;

pub const STAIR_RISE: f64 = 0.17;
pub const STAIR_RUN: f64 = 0.28;
pub const STAIR_WIDTH: f64 = 1.4;

pub const SCENE_NAMES: [&str; 4] = ["planes", "platform", "multilayer", "building"];

/// A flat polygonal patch to be sampled. `u` and `v` are orthonormal in-plane
/// axes; `outline` and `holes` are given in `(u, v)` coordinates around `origin`.
#[derive(Clone, Debug)]
pub struct Surface {
    pub label: String,
    /// Walkable-surface label this patch belongs to, if any.
    pub group: Option<String>,
    pub origin: Vec3,
    pub u: Vec3,
    pub v: Vec3,
    pub outline: Vec<Vec2>,
    pub holes: Vec<Vec<Vec2>>,
}

fn polygon_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    ((0..n).map(|i| poly[i].x * poly[(i + 1) % n].y - poly[(i + 1) % n].x * poly[i].y).sum::<f64>() * 0.5).abs()
}

fn point_in_polygon(poly: &[Vec2], p: &Vec2) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Vec2> {
    vec![Vec2::new(x0, y0), Vec2::new(x1, y0), Vec2::new(x1, y1), Vec2::new(x0, y1)]
}

impl Surface {
    pub fn area(&self) -> f64 {
        polygon_area(&self.outline) - self.holes.iter().map(|h| polygon_area(h)).sum::<f64>()
    }

    pub fn normal(&self) -> Vec3 {
        self.u.cross(&self.v)
    }

    pub fn contains_local(&self, p: &Vec2) -> bool {
        point_in_polygon(&self.outline, p) && !self.holes.iter().any(|h| point_in_polygon(h, p))
    }

    pub fn lift(&self, p: &Vec2) -> Vec3 {
        self.origin + self.u * p.x + self.v * p.y
    }

    /// `count` points uniformly distributed over the patch.
    pub fn sample(&self, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
        let (mut lo, mut hi) = (Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY));
        for p in &self.outline {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let p = Vec2::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
            if self.contains_local(&p) {
                out.push(self.lift(&p));
            }
        }
        out
    }

    /// Outline and hole loops in world coordinates.
    pub fn loops(&self) -> Vec<Vec<Vec3>> {
        std::iter::once(&self.outline).chain(self.holes.iter()).map(|l| l.iter().map(|p| self.lift(p)).collect()).collect()
    }
}

/// Horizontal rectangle with rectangular holes, all as `(x0, y0, x1, y1)`.
pub fn horizontal(label: &str, group: Option<&str>, z: f64, area: [f64; 4], holes: &[[f64; 4]]) -> Surface {
    Surface {
        label: label.into(),
        group: group.map(Into::into),
        origin: Vec3::new(0.0, 0.0, z),
        u: Vec3::x(),
        v: Vec3::y(),
        outline: rect(area[0], area[1], area[2], area[3]),
        holes: holes.iter().map(|h| rect(h[0], h[1], h[2], h[3])).collect(),
    }
}

/// Vertical rectangle from `a` to `b` (horizontal endpoints) spanning `z0..z1`.
pub fn vertical(label: &str, a: Vec2, b: Vec2, z0: f64, z1: f64) -> Surface {
    let len = (b - a).norm();
    let dir = (b - a) / len;
    Surface {
        label: label.into(),
        group: None,
        origin: Vec3::new(a.x, a.y, 0.0),
        u: Vec3::new(dir.x, dir.y, 0.0),
        v: Vec3::z(),
        outline: rect(0.0, z0, len, z1),
        holes: Vec::new(),
    }
}

/// Vertical face along `a`-`b` with the listed spans (distances from `a`) left open.
pub fn vertical_with_gaps(label: &str, a: Vec2, b: Vec2, z0: f64, z1: f64, gaps: &[(f64, f64)]) -> Vec<Surface> {
    let len = (b - a).norm();
    let dir = (b - a) / len;
    let mut spans = Vec::new();
    let mut cursor = 0.0;
    let mut sorted = gaps.to_vec();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    for (g0, g1) in sorted {
        if g0 > cursor + 1e-9 {
            spans.push((cursor, g0));
        }
        cursor = cursor.max(g1);
    }
    if len > cursor + 1e-9 {
        spans.push((cursor, len));
    }
    spans
        .into_iter()
        .enumerate()
        .map(|(k, (s0, s1))| vertical(&format!("{label}#{k}"), a + dir * s0, a + dir * s1, z0, z1))
        .collect()
}

/// Straight staircase description.
#[derive(Clone, Debug)]
pub struct Staircase {
    pub label: String,
    /// Point on the bottom riser line at one side of the flight, floor level.
    pub base: Vec3,
    /// Horizontal unit ascent direction.
    pub ascent: Vec2,
    /// Horizontal unit direction across the flight (width).
    pub across: Vec2,
    pub risers: usize,
    /// Height down to which the side faces extend.
    pub support_z: f64,
}

impl Staircase {
    pub fn top_z(&self) -> f64 {
        self.base.z + self.risers as f64 * STAIR_RISE
    }

    pub fn depth(&self) -> f64 {
        (self.risers - 1) as f64 * STAIR_RUN
    }

    fn at(&self, along: f64, across: f64, z: f64) -> Vec3 {
        let h = Vec2::new(self.base.x, self.base.y) + self.ascent * along + self.across * across;
        Vec3::new(h.x, h.y, z)
    }

    /// Horizontal footprint corners.
    pub fn footprint(&self) -> [Vec2; 4] {
        let c = |a: f64, w: f64| self.at(a, w, 0.0).xy();
        [c(0.0, 0.0), c(self.depth(), 0.0), c(self.depth(), STAIR_WIDTH), c(0.0, STAIR_WIDTH)]
    }

    pub fn surfaces(&self) -> Vec<Surface> {
        let mut out = Vec::new();
        let up = Vec3::new(self.ascent.x, self.ascent.y, 0.0);
        let side = Vec3::new(self.across.x, self.across.y, 0.0);
        for k in 1..=self.risers {
            let along = (k - 1) as f64 * STAIR_RUN;
            let z0 = self.base.z + (k - 1) as f64 * STAIR_RISE;
            out.push(Surface {
                label: format!("{}/riser{k}", self.label),
                group: Some(self.label.clone()),
                origin: self.at(along, 0.0, 0.0),
                u: side,
                v: Vec3::z(),
                outline: rect(0.0, z0, STAIR_WIDTH, z0 + STAIR_RISE),
                holes: Vec::new(),
            });
            if k < self.risers {
                out.push(Surface {
                    label: format!("{}/tread{k}", self.label),
                    group: Some(self.label.clone()),
                    origin: self.at(along, 0.0, z0 + STAIR_RISE),
                    u: up,
                    v: side,
                    outline: rect(0.0, 0.0, STAIR_RUN, STAIR_WIDTH),
                    holes: Vec::new(),
                });
            }
        }
        // side faces follow the step profile down to the support level
        let mut profile = vec![Vec2::new(0.0, self.support_z), Vec2::new(0.0, self.base.z + STAIR_RISE)];
        for k in 1..self.risers {
            let z = self.base.z + k as f64 * STAIR_RISE;
            profile.push(Vec2::new(k as f64 * STAIR_RUN, z));
            if k + 1 < self.risers {
                profile.push(Vec2::new(k as f64 * STAIR_RUN, z + STAIR_RISE));
            }
        }
        profile.push(Vec2::new(self.depth(), self.support_z));
        for (name, offset) in [("left", 0.0), ("right", STAIR_WIDTH)] {
            out.push(Surface {
                label: format!("{}/{name}", self.label),
                group: None,
                origin: self.at(0.0, offset, 0.0),
                u: up,
                v: Vec3::z(),
                outline: profile.clone(),
                holes: Vec::new(),
            });
        }
        out
    }

    pub fn walkable(&self) -> WalkableSurface {
        let pitch = (STAIR_RISE / STAIR_RUN).atan();
        let up = Vec3::new(self.ascent.x, self.ascent.y, 0.0);
        let normal = Vec3::z() * pitch.cos() - up * pitch.sin();
        // the fitted plane runs through the tread centers
        let point = self.at(0.5 * STAIR_RUN, 0.5 * STAIR_WIDTH, self.base.z + STAIR_RISE);
        let outline = vec![
            self.at(0.0, 0.0, self.base.z),
            self.at(self.depth(), 0.0, self.top_z()),
            self.at(self.depth(), STAIR_WIDTH, self.top_z()),
            self.at(0.0, STAIR_WIDTH, self.base.z),
        ];
        WalkableSurface { label: self.label.clone(), kind: PlaneKind::Stairs, normal, point, loops: vec![outline] }
    }
}

/// Ramp rising along `ascent` from `z0` at `base` to `z1` over horizontal length `length`.
#[derive(Clone, Debug)]
pub struct Ramp {
    pub label: String,
    pub base: Vec2,
    pub ascent: Vec2,
    pub across: Vec2,
    pub width: f64,
    pub length: f64,
    pub z0: f64,
    pub z1: f64,
}

impl Ramp {
    fn at(&self, along: f64, across: f64, z: f64) -> Vec3 {
        let h = self.base + self.ascent * along + self.across * across;
        Vec3::new(h.x, h.y, z)
    }

    pub fn footprint(&self) -> [Vec2; 4] {
        let c = |a: f64, w: f64| self.at(a, w, 0.0).xy();
        [c(0.0, 0.0), c(self.length, 0.0), c(self.length, self.width), c(0.0, self.width)]
    }

    pub fn surfaces(&self) -> Vec<Surface> {
        let rise = self.z1 - self.z0;
        let slope_len = self.length.hypot(rise);
        let up = Vec3::new(self.ascent.x * self.length, self.ascent.y * self.length, rise) / slope_len;
        let side = Vec3::new(self.across.x, self.across.y, 0.0);
        let mut out = vec![Surface {
            label: self.label.clone(),
            group: Some(self.label.clone()),
            origin: self.at(0.0, 0.0, self.z0),
            u: up,
            v: side,
            outline: rect(0.0, 0.0, slope_len, self.width),
            holes: Vec::new(),
        }];
        let flat = Vec3::new(self.ascent.x, self.ascent.y, 0.0);
        for (name, offset) in [("left", 0.0), ("right", self.width)] {
            out.push(Surface {
                label: format!("{}/{name}", self.label),
                group: None,
                origin: self.at(0.0, offset, 0.0),
                u: flat,
                v: Vec3::z(),
                outline: vec![Vec2::new(0.0, self.z0), Vec2::new(self.length, self.z1), Vec2::new(self.length, 0.0)],
                holes: Vec::new(),
            });
        }
        // a ramp starting above the floor stands on a vertical front face
        if self.z0 > 0.0 {
            out.push(vertical(&format!("{}/front", self.label), self.at(0.0, 0.0, 0.0).xy(), self.at(0.0, self.width, 0.0).xy(), 0.0, self.z0));
        }
        out
    }

    pub fn walkable(&self) -> WalkableSurface {
        let rise = self.z1 - self.z0;
        let slope = rise.atan2(self.length);
        let up = Vec3::new(self.ascent.x, self.ascent.y, 0.0);
        let normal = Vec3::z() * slope.cos() - up * slope.sin();
        let outline = vec![
            self.at(0.0, 0.0, self.z0),
            self.at(self.length, 0.0, self.z1),
            self.at(self.length, self.width, self.z1),
            self.at(0.0, self.width, self.z0),
        ];
        WalkableSurface { label: self.label.clone(), kind: PlaneKind::Slope, normal, point: outline[0], loops: vec![outline] }
    }
}

/// Analytic walkable surface of a scene.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkableSurface {
    pub label: String,
    pub kind: PlaneKind,
    pub normal: Vec3,
    pub point: Vec3,
    /// Outer boundary first, then holes.
    pub loops: Vec<Vec<Vec3>>,
}

impl WalkableSurface {
    fn flat(label: &str, z: f64, area: [f64; 4], holes: &[[f64; 4]]) -> Self {
        let lift = |r: &[f64; 4]| rect(r[0], r[1], r[2], r[3]).into_iter().map(|p| Vec3::new(p.x, p.y, z)).collect::<Vec<_>>();
        let mut loops = vec![lift(&area)];
        loops.extend(holes.iter().map(lift));
        WalkableSurface { label: label.into(), kind: PlaneKind::Ground, normal: Vec3::z(), point: Vec3::new(area[0], area[1], z), loops }
    }

    /// Whether the horizontal projection of `p` falls inside the outer loop.
    pub fn covers_xy(&self, p: &Vec3) -> bool {
        let outer: Vec<Vec2> = self.loops[0].iter().map(|q| q.xy()).collect();
        point_in_polygon(&outer, &p.xy())
    }

    pub fn distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(&(p - self.point)).abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub scene: String,
    pub walkable: Vec<WalkableSurface>,
    /// Pairs of walkable labels sharing an edge.
    pub adjacency: Vec<(String, String)>,
    pub start: Vec3,
    pub goal: Vec3,
}

/// Scene parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneSpec {
    pub name: String,
    /// Points per square meter.
    pub density: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SceneSpec {
    pub fn new(name: &str, seed: u64) -> Self {
        Self { name: name.into(), density: 1600.0, noise_sigma: 0.01, seed }
    }
}

/// A generated scene: the cloud, per-point surface indices and ground truth.
#[derive(Clone, Debug)]
pub struct Scene {
    pub cloud: PointCloud,
    pub labels: Vec<usize>,
    pub surfaces: Vec<Surface>,
    pub ground_truth: GroundTruth,
}

/// Surfaces and ground truth of a scene before sampling.
#[derive(Clone, Debug)]
pub struct SceneLayout {
    pub surfaces: Vec<Surface>,
    pub ground_truth: GroundTruth,
}

fn seg_seg_distance(p1: &Vec3, q1: &Vec3, p2: &Vec3, q2: &Vec3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let (a, e, f) = (d1.dot(&d1), d2.dot(&d2), d2.dot(&r));
    let c = d1.dot(&r);
    let b = d1.dot(&d2);
    let denom = a * e - b * b;
    let mut s = if denom > 1e-14 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

fn loops_touch(a: &WalkableSurface, b: &WalkableSurface) -> bool {
    for la in &a.loops {
        for lb in &b.loops {
            for i in 0..la.len() {
                for j in 0..lb.len() {
                    let d = seg_seg_distance(&la[i], &la[(i + 1) % la.len()], &lb[j], &lb[(j + 1) % lb.len()]);
                    if d < 1e-6 {
                        return true;
                    }
                }
            }
        }
    }
    false
}

impl GroundTruth {
    /// Label of the walkable surface nearest to `p` whose footprint covers it.
    pub fn surface_at(&self, p: &Vec3) -> Option<&WalkableSurface> {
        self.walkable.iter().filter(|w| w.covers_xy(p)).min_by(|a, b| a.distance(p).total_cmp(&b.distance(p)))
    }

    /// Check that every listed adjacency really shares an edge and that the
    /// start and goal surfaces are connected.
    pub fn validate(&self) -> Result<()> {
        let find = |label: &str| {
            self.walkable.iter().position(|w| w.label == label).ok_or_else(|| Error::DegenerateInput(format!("unknown surface {label}")))
        };
        let mut parent: Vec<usize> = (0..self.walkable.len()).collect();
        fn root(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                x = p[x];
            }
            x
        }
        for (a, b) in &self.adjacency {
            let (i, j) = (find(a)?, find(b)?);
            if !loops_touch(&self.walkable[i], &self.walkable[j]) {
                return Err(Error::DegenerateInput(format!("surfaces {a} and {b} do not touch")));
            }
            let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
            parent[ri] = rj;
        }
        let start = self.surface_at(&self.start).ok_or_else(|| Error::DegenerateInput("start is off every surface".into()))?;
        let goal = self.surface_at(&self.goal).ok_or_else(|| Error::DegenerateInput("goal is off every surface".into()))?;
        let (s, g) = (find(&start.label)?, find(&goal.label)?);
        if root(&mut parent, s) != root(&mut parent, g) {
            return Err(Error::DegenerateInput("start and goal surfaces are not connected".into()));
        }
        Ok(())
    }
}

fn pairs(list: &[(&str, &str)]) -> Vec<(String, String)> {
    list.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn fp_box(corners: [Vec2; 4]) -> [f64; 4] {
    let xs = corners.iter().map(|c| c.x);
    let ys = corners.iter().map(|c| c.y);
    [
        xs.clone().fold(f64::INFINITY, f64::min),
        ys.clone().fold(f64::INFINITY, f64::min),
        xs.fold(f64::NEG_INFINITY, f64::max),
        ys.fold(f64::NEG_INFINITY, f64::max),
    ]
}

fn v2(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

/// Two floors 1.02 m apart joined by a ramp and two staircases.
pub fn planes_layout() -> SceneLayout {
    let upper_z = 6.0 * STAIR_RISE;
    let ramp = Ramp { label: "R".into(), base: v2(1.0, 4.0), ascent: v2(0.0, 1.0), across: v2(1.0, 0.0), width: 1.4, length: 2.5, z0: 0.0, z1: upper_z };
    let stairs: Vec<Staircase> = [("S1", 4.3), ("S2", 7.6)]
        .iter()
        .map(|&(label, x)| Staircase {
            label: label.into(),
            base: Vec3::new(x, 6.5 - 5.0 * STAIR_RUN, 0.0),
            ascent: v2(0.0, 1.0),
            across: v2(1.0, 0.0),
            risers: 6,
            support_z: 0.0,
        })
        .collect();
    let holes = [fp_box(ramp.footprint()), fp_box(stairs[0].footprint()), fp_box(stairs[1].footprint())];
    let mut surfaces = vec![
        horizontal("L", Some("L"), 0.0, [0.0, 0.0, 10.0, 6.5], &holes),
        horizontal("U", Some("U"), upper_z, [0.0, 6.5, 10.0, 10.0], &[]),
    ];
    surfaces.extend(ramp.surfaces());
    for s in &stairs {
        surfaces.extend(s.surfaces());
    }
    surfaces.extend(vertical_with_gaps("U/front", v2(0.0, 6.5), v2(10.0, 6.5), 0.0, upper_z, &[(1.0, 2.4), (4.3, 5.7), (7.6, 9.0)]));
    let mut walkable = vec![WalkableSurface::flat("L", 0.0, [0.0, 0.0, 10.0, 6.5], &holes), WalkableSurface::flat("U", upper_z, [0.0, 6.5, 10.0, 10.0], &[])];
    walkable.push(ramp.walkable());
    walkable.extend(stairs.iter().map(|s| s.walkable()));
    SceneLayout {
        surfaces,
        ground_truth: GroundTruth {
            scene: "planes".into(),
            walkable,
            adjacency: pairs(&[("L", "R"), ("L", "S1"), ("L", "S2"), ("U", "R"), ("U", "S1"), ("U", "S2")]),
            start: Vec3::new(3.0, 1.5, 0.0),
            goal: Vec3::new(6.5, 8.5, upper_z),
        },
    }
}

/// A wall splits the floor; the way around leads up a ramp, over a platform and down stairs.
pub fn platform_layout() -> SceneLayout {
    let top = 6.0 * STAIR_RISE;
    let ramp = Ramp { label: "R".into(), base: v2(2.0, 4.3), ascent: v2(1.0, 0.0), across: v2(0.0, 1.0), width: 1.4, length: 2.0, z0: 0.0, z1: top };
    let stairs = Staircase {
        label: "S".into(),
        base: Vec3::new(6.0 + 5.0 * STAIR_RUN, 4.3, 0.0),
        ascent: v2(-1.0, 0.0),
        across: v2(0.0, 1.0),
        risers: 6,
        support_z: 0.0,
    };
    let platform = [4.0, 3.5, 6.0, 6.0];
    let holes = [platform, fp_box(ramp.footprint()), fp_box(stairs.footprint())];
    let mut surfaces = vec![
        horizontal("F", Some("F"), 0.0, [0.0, 0.0, 10.0, 6.0], &holes),
        horizontal("P", Some("P"), top, platform, &[]),
        vertical("W", v2(5.0, 0.0), v2(5.0, 3.5), 0.0, 1.5),
    ];
    surfaces.extend(ramp.surfaces());
    surfaces.extend(stairs.surfaces());
    surfaces.extend(vertical_with_gaps("P/west", v2(4.0, 3.5), v2(4.0, 6.0), 0.0, top, &[(0.8, 2.2)]));
    surfaces.extend(vertical_with_gaps("P/east", v2(6.0, 3.5), v2(6.0, 6.0), 0.0, top, &[(0.8, 2.2)]));
    surfaces.push(vertical("P/south", v2(4.0, 3.5), v2(6.0, 3.5), 0.0, top));
    surfaces.push(vertical("P/north", v2(4.0, 6.0), v2(6.0, 6.0), 0.0, top));
    let mut walkable = vec![WalkableSurface::flat("F", 0.0, [0.0, 0.0, 10.0, 6.0], &holes), WalkableSurface::flat("P", top, platform, &[])];
    walkable.push(ramp.walkable());
    walkable.push(stairs.walkable());
    SceneLayout {
        surfaces,
        ground_truth: GroundTruth {
            scene: "platform".into(),
            walkable,
            adjacency: pairs(&[("F", "R"), ("F", "S"), ("P", "R"), ("P", "S")]),
            start: Vec3::new(1.0, 1.5, 0.0),
            goal: Vec3::new(9.0, 1.5, 0.0),
        },
    }
}

/// Ground, two mezzanines and a top deck; only one staircase sequence reaches the top.
pub fn multilayer_layout() -> SceneLayout {
    let mid = 6.0 * STAIR_RISE;
    let high = 12.0 * STAIR_RISE;
    let m1 = [0.0, 7.0, 3.0, 10.0];
    let m2 = [6.0, 0.0, 10.0, 3.0];
    let t_y0 = 3.0 + 5.0 * STAIR_RUN;
    let deck = [6.0, t_y0, 10.0, 10.0];
    let r1 = Ramp { label: "R1".into(), base: v2(0.8, 4.5), ascent: v2(0.0, 1.0), across: v2(1.0, 0.0), width: 1.4, length: 2.5, z0: 0.0, z1: mid };
    let s1 = Staircase {
        label: "S1".into(),
        base: Vec3::new(6.0 - 5.0 * STAIR_RUN, 0.8, 0.0),
        ascent: v2(1.0, 0.0),
        across: v2(0.0, 1.0),
        risers: 6,
        support_z: 0.0,
    };
    let s2 = Staircase { label: "S2".into(), base: Vec3::new(7.3, 3.0, mid), ascent: v2(0.0, 1.0), across: v2(1.0, 0.0), risers: 6, support_z: 0.0 };
    // the strip between M2 and T beside S2 is walled in on three sides
    let pocket = [7.3, 3.0, 10.0, t_y0];
    let holes = [m1, m2, deck, pocket, fp_box(r1.footprint()), fp_box(s1.footprint()), fp_box(s2.footprint())];
    let mut surfaces = vec![
        horizontal("G", Some("G"), 0.0, [0.0, 0.0, 10.0, 10.0], &holes),
        horizontal("M1", Some("M1"), mid, m1, &[]),
        horizontal("M2", Some("M2"), mid, m2, &[]),
        horizontal("T", Some("T"), high, deck, &[]),
    ];
    surfaces.extend(r1.surfaces());
    surfaces.extend(s1.surfaces());
    surfaces.extend(s2.surfaces());
    surfaces.push(vertical("M1/east", v2(3.0, 7.0), v2(3.0, 10.0), 0.0, mid));
    surfaces.extend(vertical_with_gaps("M1/south", v2(0.0, 7.0), v2(3.0, 7.0), 0.0, mid, &[(0.8, 2.2)]));
    surfaces.extend(vertical_with_gaps("M2/west", v2(6.0, 0.0), v2(6.0, 3.0), 0.0, mid, &[(0.8, 2.2)]));
    surfaces.extend(vertical_with_gaps("M2/north", v2(6.0, 3.0), v2(10.0, 3.0), 0.0, mid, &[(1.3, 2.7)]));
    surfaces.extend(vertical_with_gaps("T/south", v2(6.0, t_y0), v2(10.0, t_y0), 0.0, high, &[(1.3, 2.7)]));
    surfaces.push(vertical("T/west", v2(6.0, t_y0), v2(6.0, 10.0), 0.0, high));
    let mut walkable = vec![
        WalkableSurface::flat("G", 0.0, [0.0, 0.0, 10.0, 10.0], &holes),
        WalkableSurface::flat("M1", mid, m1, &[]),
        WalkableSurface::flat("M2", mid, m2, &[]),
        WalkableSurface::flat("T", high, deck, &[]),
    ];
    walkable.push(r1.walkable());
    walkable.push(s1.walkable());
    walkable.push(s2.walkable());
    SceneLayout {
        surfaces,
        ground_truth: GroundTruth {
            scene: "multilayer".into(),
            walkable,
            adjacency: pairs(&[("G", "R1"), ("M1", "R1"), ("G", "S1"), ("M2", "S1"), ("M2", "S2"), ("T", "S2")]),
            start: Vec3::new(2.0, 2.0, 0.0),
            goal: Vec3::new(8.0, 8.0, high),
        },
    }
}

/// An 8 x 8 m room with an upper floor over its back half reached by one long flight.
pub fn building_layout() -> SceneLayout {
    let upper = 10.0 * STAIR_RISE;
    let edge = 4.5;
    let stairs = Staircase {
        label: "S".into(),
        base: Vec3::new(6.0, edge - 9.0 * STAIR_RUN, 0.0),
        ascent: v2(0.0, 1.0),
        across: v2(1.0, 0.0),
        risers: 10,
        support_z: 0.0,
    };
    let floor2 = [0.0, edge, 8.0, 8.0];
    let holes = [fp_box(stairs.footprint())];
    let mut surfaces = vec![horizontal("G", Some("G"), 0.0, [0.0, 0.0, 8.0, 8.0], &holes), horizontal("F2", Some("F2"), upper, floor2, &[])];
    surfaces.extend(stairs.surfaces());
    let wall_top = upper - 0.2;
    surfaces.push(vertical("wall/south", v2(0.0, 0.0), v2(8.0, 0.0), 0.0, wall_top));
    surfaces.push(vertical("wall/west", v2(0.0, 0.0), v2(0.0, 8.0), 0.0, wall_top));
    surfaces.push(vertical("wall/east", v2(8.0, 0.0), v2(8.0, 8.0), 0.0, wall_top));
    surfaces.push(vertical("wall/north", v2(0.0, 8.0), v2(8.0, 8.0), 0.0, wall_top));
    surfaces.push(vertical("wall2/west", v2(0.0, edge), v2(0.0, 8.0), upper, upper + 1.0));
    surfaces.push(vertical("wall2/east", v2(8.0, edge), v2(8.0, 8.0), upper, upper + 1.0));
    surfaces.push(vertical("wall2/north", v2(0.0, 8.0), v2(8.0, 8.0), upper, upper + 1.0));
    surfaces.extend(vertical_with_gaps("F2/edge", v2(0.0, edge), v2(8.0, edge), wall_top, upper, &[(6.0, 7.4)]));
    let walkable = vec![WalkableSurface::flat("G", 0.0, [0.0, 0.0, 8.0, 8.0], &holes), WalkableSurface::flat("F2", upper, floor2, &[]), stairs.walkable()];
    SceneLayout {
        surfaces,
        ground_truth: GroundTruth {
            scene: "building".into(),
            walkable,
            adjacency: pairs(&[("G", "S"), ("F2", "S")]),
            start: Vec3::new(2.0, 2.0, 0.0),
            goal: Vec3::new(2.0, 6.5, upper),
        },
    }
}

pub fn layout(name: &str) -> Result<SceneLayout> {
    match name {
        "planes" => Ok(planes_layout()),
        "platform" => Ok(platform_layout()),
        "multilayer" => Ok(multilayer_layout()),
        "building" => Ok(building_layout()),
        other => Err(Error::Config(format!("unknown scene '{other}', expected one of {}", SCENE_NAMES.join(", ")))),
    }
}

/// Sample a layout: `round(density * area)` uniform points per surface plus
/// isotropic Gaussian noise.
pub fn sample_layout(layout: SceneLayout, density: f64, noise_sigma: f64, seed: u64) -> Result<Scene> {
    if !(density > 0.0) || !(noise_sigma >= 0.0) {
        return Err(Error::Config("density must be positive and noise non-negative".into()));
    }
    layout.ground_truth.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (k, s) in layout.surfaces.iter().enumerate() {
        let count = (density * s.area()).round() as usize;
        for p in s.sample(count, &mut rng) {
            let jitter = Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng));
            points.push(p + jitter);
            labels.push(k);
        }
    }
    Ok(Scene { cloud: PointCloud::new(points), labels, surfaces: layout.surfaces, ground_truth: layout.ground_truth })
}

/// Generate a named scene.
pub fn generate(spec: &SceneSpec) -> Result<Scene> {
    sample_layout(layout(&spec.name)?, spec.density, spec.noise_sigma, spec.seed)
}
