//! JSON documents for planes, graphs and trajectories, plus the sampled CSV.
//!
//! Every document goes through one canonical writer: keys in declaration
//! order, floats in plain decimal (never exponent notation), objects one key
//! per line and arrays inline. Plane geometry is rounded to 1e-6 and distance
//! fields to 1e-4, which makes load-then-save byte-identical. Transforms and
//! spline coefficients keep their shortest round-trip representation so a
//! reloaded trajectory evaluates bit-for-bit like the original.

use std::io;

use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, ConvexPolygon2D, Segment3D, Transform, Vec2, Vec3};
use crate::graph::{GraphEdge, GraphVertex, PlaneGraph};
use crate::mapping::{CellState, GridMap};
use crate::plane::{Neighbor, PlaneKind, TraversablePlane};
use crate::trajectory::{CrossPlaneTrajectory, CrossingState, MsSpline, TrajectoryPart, COEFFS};

pub const FORMAT_VERSION: u32 = 1;

/// Round to a multiple of 1e-6.
pub fn micro(v: f64) -> f64 {
    normalize_zero((v * 1e6).round() / 1e6)
}

/// Round to a multiple of 1e-4.
pub fn deci_milli(v: f64) -> f64 {
    normalize_zero((v * 1e4).round() / 1e4)
}

fn normalize_zero(v: f64) -> f64 {
    if v == 0.0 { 0.0 } else { v }
}

#[derive(Default)]
struct CanonicalFormatter {
    depth: usize,
    has_keys: Vec<bool>,
}

impl CanonicalFormatter {
    fn newline<W: ?Sized + io::Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(b"\n")?;
        for _ in 0..self.depth {
            w.write_all(b"  ")?;
        }
        Ok(())
    }
}

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{}", normalize_zero(value))
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if first { Ok(()) } else { w.write_all(b", ") }
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.depth += 1;
        self.has_keys.push(false);
        w.write_all(b"{")
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.depth -= 1;
        if self.has_keys.pop().unwrap_or(false) {
            self.newline(w)?;
        }
        w.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if let Some(k) = self.has_keys.last_mut() {
            *k = true;
        }
        if !first {
            w.write_all(b",")?;
        }
        self.newline(w)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(b": ")
    }
}

/// Serialize with the canonical layout, newline-terminated.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, CanonicalFormatter::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::DegenerateInput(e.to_string()))
}

fn v2m(v: &Vec2) -> [f64; 2] {
    [micro(v.x), micro(v.y)]
}

fn v3m(v: &Vec3) -> [f64; 3] {
    [micro(v.x), micro(v.y), micro(v.z)]
}

fn check_version(version: u32, what: &str) -> Result<()> {
    if version != FORMAT_VERSION {
        return Err(Error::Config(format!("{what} has format version {version}, expected {FORMAT_VERSION}")));
    }
    Ok(())
}

fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformDoc {
    /// Row-major.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

impl From<&Transform> for TransformDoc {
    fn from(t: &Transform) -> Self {
        let r = &t.rotation;
        let row = |i: usize| [r[(i, 0)], r[(i, 1)], r[(i, 2)]];
        TransformDoc { rotation: [row(0), row(1), row(2)], translation: [t.translation.x, t.translation.y, t.translation.z] }
    }
}

impl From<&TransformDoc> for Transform {
    fn from(d: &TransformDoc) -> Self {
        let r = &d.rotation;
        Transform {
            rotation: nalgebra::Matrix3::new(r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2]),
            translation: Vec3::new(d.translation[0], d.translation[1], d.translation[2]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeighborDoc {
    pub plane: usize,
    pub a: [f64; 3],
    pub b: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    pub resolution: f64,
    pub origin: [f64; 2],
    pub width: usize,
    pub height: usize,
    /// One string per grid row `j`, one state code per cell.
    pub states: Vec<String>,
    /// Row-major distance field.
    pub esdf: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneDoc {
    pub id: usize,
    pub kind: PlaneKind,
    pub inclination: f64,
    pub thickness: f64,
    pub point_count: usize,
    pub transform: TransformDoc,
    pub boundary: Vec<[f64; 2]>,
    pub expanded: Vec<[f64; 2]>,
    pub neighbors: Vec<NeighborDoc>,
    pub grid: GridDoc,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanesDoc {
    pub version: u32,
    pub planes: Vec<PlaneDoc>,
}

/// Quantized vertices that still form a strictly convex polygon.
fn polygon_doc(poly: &ConvexPolygon2D) -> Vec<[f64; 2]> {
    let q: Vec<Vec2> = poly.vertices().iter().map(|v| Vec2::new(micro(v.x), micro(v.y))).collect();
    let q = match ConvexPolygon2D::new(q.clone()) {
        Ok(p) => p,
        Err(_) => convex_hull(&q).unwrap_or_else(|_| poly.clone()),
    };
    q.vertices().iter().map(|v| [v.x, v.y]).collect()
}

fn polygon_from(doc: &[[f64; 2]]) -> Result<ConvexPolygon2D> {
    ConvexPolygon2D::new(doc.iter().map(|v| Vec2::new(v[0], v[1])).collect())
}

impl PlaneDoc {
    pub fn from_plane(id: usize, p: &TraversablePlane) -> Self {
        let g = &p.grid;
        let states = (0..g.height).map(|j| (0..g.width).map(|i| g.state(i, j).code()).collect()).collect();
        PlaneDoc {
            id,
            kind: p.kind,
            inclination: micro(p.inclination),
            thickness: micro(p.thickness),
            point_count: p.point_count,
            transform: (&p.transform).into(),
            boundary: polygon_doc(&p.boundary),
            expanded: polygon_doc(&p.expanded),
            neighbors: p.neighbors.iter().map(|n| NeighborDoc { plane: n.plane, a: v3m(&n.segment.a), b: v3m(&n.segment.b) }).collect(),
            grid: GridDoc {
                resolution: micro(g.resolution),
                origin: v2m(&g.origin),
                width: g.width,
                height: g.height,
                states,
                esdf: g.esdf.iter().map(|&v| deci_milli(v)).collect(),
            },
        }
    }

    pub fn to_plane(&self) -> Result<TraversablePlane> {
        let g = &self.grid;
        if g.states.len() != g.height || g.esdf.len() != g.width * g.height || !(g.resolution > 0.0) {
            return Err(Error::DegenerateInput(format!("plane {}: grid dimensions disagree with its data", self.id)));
        }
        let mut grid = GridMap::new(g.resolution, Vec2::new(g.origin[0], g.origin[1]), g.width, g.height);
        for (j, row) in g.states.iter().enumerate() {
            if row.chars().count() != g.width {
                return Err(Error::DegenerateInput(format!("plane {}: grid row {j} has the wrong width", self.id)));
            }
            for (i, c) in row.chars().enumerate() {
                let s = CellState::from_code(c).ok_or_else(|| Error::DegenerateInput(format!("plane {}: unknown cell code {c:?}", self.id)))?;
                grid.set(i, j, s);
            }
        }
        grid.esdf = g.esdf.clone();
        let neighbors = self
            .neighbors
            .iter()
            .map(|n| {
                let seg = Segment3D::new(Vec3::new(n.a[0], n.a[1], n.a[2]), Vec3::new(n.b[0], n.b[1], n.b[2]))?;
                Ok(Neighbor { plane: n.plane, segment: seg })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TraversablePlane {
            transform: (&self.transform).into(),
            kind: self.kind,
            inclination: self.inclination,
            thickness: self.thickness,
            boundary: polygon_from(&self.boundary)?,
            expanded: polygon_from(&self.expanded)?,
            neighbors,
            point_count: self.point_count,
            grid,
        })
    }
}

pub fn planes_to_json(planes: &[TraversablePlane]) -> Result<String> {
    let doc = PlanesDoc { version: FORMAT_VERSION, planes: planes.iter().enumerate().map(|(i, p)| PlaneDoc::from_plane(i, p)).collect() };
    to_canonical_json(&doc)
}

pub fn planes_from_json(text: &str) -> Result<Vec<TraversablePlane>> {
    let doc: PlanesDoc = parse(text)?;
    check_version(doc.version, "planes file")?;
    let planes = doc.planes.iter().map(PlaneDoc::to_plane).collect::<Result<Vec<_>>>()?;
    for (i, p) in planes.iter().enumerate() {
        if let Some(n) = p.neighbors.iter().find(|n| n.plane >= planes.len() || n.plane == i) {
            return Err(Error::DegenerateInput(format!("plane {i} links to invalid plane {}", n.plane)));
        }
    }
    Ok(planes)
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub planes: [usize; 2],
    pub world: [f64; 3],
    pub local: [[f64; 2]; 2],
    pub line_param: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub endpoints: [usize; 2],
    pub plane: usize,
    pub cost: f64,
    pub polyline: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub version: u32,
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<EdgeDoc>,
}

/// Written exactly, so planning on a cached graph replays planning on a fresh one.
pub fn graph_to_json(graph: &PlaneGraph) -> Result<String> {
    let doc = GraphDoc {
        version: FORMAT_VERSION,
        vertices: graph
            .vertices
            .iter()
            .map(|v| VertexDoc {
                planes: [v.plane_pair.0, v.plane_pair.1],
                world: [v.world_point.x, v.world_point.y, v.world_point.z],
                local: [[v.local_points[0].x, v.local_points[0].y], [v.local_points[1].x, v.local_points[1].y]],
                line_param: v.line_param,
            })
            .collect(),
        edges: graph
            .edges
            .iter()
            .map(|e| EdgeDoc { endpoints: [e.endpoints.0, e.endpoints.1], plane: e.plane, cost: e.cost, polyline: e.polyline.iter().map(|p| [p.x, p.y]).collect() })
            .collect(),
    };
    to_canonical_json(&doc)
}

pub fn graph_from_json(text: &str) -> Result<PlaneGraph> {
    let doc: GraphDoc = parse(text)?;
    check_version(doc.version, "graph file")?;
    let vertices: Vec<GraphVertex> = doc
        .vertices
        .iter()
        .map(|v| GraphVertex {
            plane_pair: (v.planes[0], v.planes[1]),
            world_point: Vec3::new(v.world[0], v.world[1], v.world[2]),
            local_points: [Vec2::new(v.local[0][0], v.local[0][1]), Vec2::new(v.local[1][0], v.local[1][1])],
            line_param: v.line_param,
        })
        .collect();
    let n = vertices.len();
    let edges = doc
        .edges
        .iter()
        .map(|e| {
            if e.endpoints[0] >= n || e.endpoints[1] >= n {
                return Err(Error::DegenerateInput(format!("edge endpoint out of range ({n} vertices)")));
            }
            Ok(GraphEdge { endpoints: (e.endpoints[0], e.endpoints[1]), plane: e.plane, polyline: e.polyline.iter().map(|p| Vec2::new(p[0], p[1])).collect(), cost: e.cost })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PlaneGraph::from_parts(vertices, edges))
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentDoc {
    pub c_theta: [f64; COEFFS],
    pub c_s: [f64; COEFFS],
    #[serde(rename = "T")]
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartDoc {
    pub plane: usize,
    pub delta_theta: f64,
    pub start_local: [f64; 2],
    pub transform: TransformDoc,
    pub segments: Vec<SegmentDoc>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingDoc {
    pub eta: f64,
    pub world: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryDoc {
    pub version: u32,
    pub n_quad: usize,
    pub duration: f64,
    pub parts: Vec<PartDoc>,
    pub crossings: Vec<CrossingDoc>,
}

pub fn trajectory_to_json(traj: &CrossPlaneTrajectory) -> Result<String> {
    let sp = &traj.spline;
    let parts = traj
        .parts
        .iter()
        .map(|p| PartDoc {
            plane: p.plane,
            delta_theta: p.delta_theta,
            start_local: [p.start_local.x, p.start_local.y],
            transform: (&p.transform).into(),
            segments: p
                .segments
                .clone()
                .map(|i| SegmentDoc {
                    c_theta: std::array::from_fn(|k| sp.coeffs[i][k].x),
                    c_s: std::array::from_fn(|k| sp.coeffs[i][k].y),
                    t: sp.durations[i],
                })
                .collect(),
        })
        .collect();
    let crossings = traj.crossings.iter().map(|c| CrossingDoc { eta: c.eta, world: [c.world_point.x, c.world_point.y, c.world_point.z] }).collect();
    to_canonical_json(&TrajectoryDoc { version: FORMAT_VERSION, n_quad: traj.n_quad, duration: traj.duration(), parts, crossings })
}

pub fn trajectory_from_json(text: &str) -> Result<CrossPlaneTrajectory> {
    let doc: TrajectoryDoc = parse(text)?;
    check_version(doc.version, "trajectory file")?;
    if doc.n_quad == 0 || doc.n_quad % 2 != 0 {
        return Err(Error::DegenerateInput("n_quad must be positive and even".into()));
    }
    let mut durations = Vec::new();
    let mut coeffs = Vec::new();
    let mut parts = Vec::new();
    for p in &doc.parts {
        let first = durations.len();
        for s in &p.segments {
            if !(s.t > 0.0 && s.t.is_finite()) {
                return Err(Error::DegenerateInput(format!("segment duration {} is not positive", s.t)));
            }
            durations.push(s.t);
            coeffs.push(std::array::from_fn(|k| Vec2::new(s.c_theta[k], s.c_s[k])));
        }
        parts.push(TrajectoryPart {
            plane: p.plane,
            delta_theta: p.delta_theta,
            start_local: Vec2::new(p.start_local[0], p.start_local[1]),
            segments: first..durations.len(),
            transform: (&p.transform).into(),
        });
    }
    let crossings = doc.crossings.iter().map(|c| CrossingState { eta: c.eta, world_point: Vec3::new(c.world[0], c.world[1], c.world[2]) }).collect();
    CrossPlaneTrajectory::new(MsSpline { durations, coeffs }, parts, crossings, doc.n_quad)
}

/// `t,x,y,z,yaw,v,omega,plane` rows at `rate_hz`.
pub fn trajectory_csv(traj: &CrossPlaneTrajectory, rate_hz: f64) -> Result<String> {
    let mut out = String::from("t,x,y,z,yaw,v,omega,plane\n");
    for (t, s) in traj.sample(rate_hz)? {
        let p = s.position;
        out.push_str(&format!("{:.4},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}\n", t, p.x, p.y, p.z, s.yaw, s.v, s.omega, s.plane));
    }
    Ok(out)
}
