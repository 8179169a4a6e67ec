//! File-level commands behind the command-line driver. Each `cmd_*` reads its
//! inputs from disk, writes its artifacts and returns a summary; the in-memory
//! steps (`plan`, `evaluate_trajectory`, `viz_mesh`) are public as well.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::artifacts::{graph_from_json, graph_to_json, planes_from_json, planes_to_json, to_canonical_json, trajectory_csv, trajectory_from_json, trajectory_to_json};
use crate::config::{RobotLimits, RunConfig};
use crate::error::{Error, Result};
use crate::extraction::{extract_footprints_timed, grid_planes};
use crate::geometry::Vec3;
use crate::graph::{build_graph, search_path, PathResult, PlaneGraph};
use crate::io::{cloud_to_ply, read_cloud, read_text, write_text, PlyMesh};
use crate::optimizer::{dense_check, solve, OuterLog, Problem, ResidualReport, Solution, SolveStatus, Worst};
use crate::plane::TraversablePlane;
use crate::scenes::{generate, SceneSpec};
use crate::trajectory::CrossPlaneTrajectory;

/// Line-delimited JSON events `{stage, ms, detail}` on stderr.
#[derive(Clone, Copy, Debug)]
pub struct StageLog {
    enabled: bool,
}

impl StageLog {
    pub fn stderr() -> Self {
        StageLog { enabled: true }
    }

    pub fn silent() -> Self {
        StageLog { enabled: false }
    }

    pub fn emit(&self, stage: &str, ms: f64, detail: serde_json::Value) {
        if self.enabled {
            eprintln!("{}", json!({ "stage": stage, "ms": (ms * 1e3).round() / 1e3, "detail": detail }));
        }
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Parse `"x,y,z"`.
pub fn parse_point(text: &str) -> Result<Vec3> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || Error::Config(format!("expected a point as x,y,z, got {text:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut v = [0.0f64; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| bad())?;
        if !slot.is_finite() {
            return Err(bad());
        }
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::from_json(&read_text(p)?),
        None => Ok(RunConfig::default()),
    }
}

pub fn load_planes(path: &Path) -> Result<Vec<TraversablePlane>> {
    planes_from_json(&read_text(path)?)
}

pub fn load_trajectory(path: &Path) -> Result<CrossPlaneTrajectory> {
    trajectory_from_json(&read_text(path)?)
}

#[derive(Clone, Debug)]
pub struct SceneFiles {
    pub cloud: PathBuf,
    pub truth: PathBuf,
}

/// Write `<name>.ply` and `<name>_truth.json` into `out_dir`.
pub fn cmd_gen_scene(name: &str, seed: u64, out_dir: &Path, log: StageLog) -> Result<SceneFiles> {
    let t = Instant::now();
    let scene = generate(&SceneSpec::new(name, seed))?;
    let files = SceneFiles { cloud: out_dir.join(format!("{name}.ply")), truth: out_dir.join(format!("{name}_truth.json")) };
    write_text(&files.cloud, &cloud_to_ply(&scene.cloud))?;
    write_text(&files.truth, &to_canonical_json(&scene.ground_truth)?)?;
    log.emit("gen_scene", ms_since(t), json!({ "scene": name, "seed": seed, "points": scene.cloud.len() }));
    Ok(files)
}

/// Extract planes from a cloud file and write the planes JSON.
pub fn cmd_extract(cloud_path: &Path, config: &RunConfig, out_path: &Path, log: StageLog) -> Result<Vec<TraversablePlane>> {
    let t = Instant::now();
    let cloud = read_cloud(cloud_path)?;
    log.emit("read_cloud", ms_since(t), json!({ "points": cloud.len() }));
    let (footprints, obstacles) = extract_footprints_timed(&cloud, config, &mut |stage, ms, count| log.emit(stage, ms, json!({ "count": count })))?;
    let t = Instant::now();
    let planes = grid_planes(footprints, &obstacles, config)?;
    log.emit("grid_esdf", ms_since(t), json!({ "cells": planes.iter().map(|p| p.grid.states.len()).sum::<usize>() }));
    let t = Instant::now();
    let text = planes_to_json(&planes)?;
    write_text(out_path, &text)?;
    log.emit("write_planes", ms_since(t), json!({ "planes": planes.len(), "bytes": text.len() }));
    Ok(planes)
}

/// Summary written as `report.json` by [`cmd_plan`].
#[derive(Clone, Debug, Serialize)]
pub struct PlanReport {
    pub status: SolveStatus,
    pub graph_build_ms: f64,
    pub path_search_ms: f64,
    pub optimize_ms: f64,
    pub traj_length_m: f64,
    pub graph_cost_m: f64,
    pub duration_s: f64,
    pub final_error_m: f64,
    pub final_errors_m: Vec<f64>,
    pub planes: Vec<usize>,
    pub segments: usize,
    pub max_residuals: ResidualReport,
    pub convergence: Vec<OuterLog>,
}

#[derive(Clone, Debug)]
pub struct PlanOutcome {
    pub graph: PlaneGraph,
    pub path: PathResult,
    pub solution: Solution,
    pub report: PlanReport,
}

/// Arc length of the sampled world path.
pub fn path_length(traj: &CrossPlaneTrajectory, rate_hz: f64) -> Result<f64> {
    let samples = traj.sample(rate_hz)?;
    Ok(samples.windows(2).map(|w| (w[1].1.position - w[0].1.position).norm()).sum())
}

/// Graph build (unless given), route search and trajectory optimization.
pub fn plan(planes: &[TraversablePlane], start: &Vec3, goal: &Vec3, config: &RunConfig, graph: Option<PlaneGraph>, log: StageLog) -> Result<PlanOutcome> {
    let t = Instant::now();
    let graph = match graph {
        Some(g) => g,
        None => build_graph(planes, config.robot.d_s),
    };
    let graph_build_ms = ms_since(t);
    log.emit("graph", graph_build_ms, json!({ "vertices": graph.vertices.len(), "edges": graph.edges.len() }));

    let t = Instant::now();
    let path = search_path(&graph, planes, start, goal, config.graph.projection_max_dist, config.robot.d_s)?;
    let path_search_ms = ms_since(t);
    log.emit("path_search", path_search_ms, json!({ "planes": path.planes, "cost": path.cost }));

    let t = Instant::now();
    let (problem, init) = Problem::from_path(planes, &path, &config.robot, &config.optimizer)?;
    let solution = solve(&problem, &init)?;
    let optimize_ms = ms_since(t);
    log.emit(
        "optimize",
        optimize_ms,
        json!({ "segments": problem.segment_count(), "outer": solution.log.len(), "final_error": solution.final_error(), "status": solution.status }),
    );

    let traj = &solution.trajectory;
    let report = PlanReport {
        status: solution.status,
        graph_build_ms,
        path_search_ms,
        optimize_ms,
        traj_length_m: path_length(traj, config.optimizer.check_rate_hz)?,
        graph_cost_m: path.cost,
        duration_s: traj.duration(),
        final_error_m: solution.final_error(),
        final_errors_m: solution.final_errors.clone(),
        planes: path.planes.clone(),
        segments: traj.spline.len(),
        max_residuals: solution.residuals.clone(),
        convergence: solution.log.clone(),
    };
    Ok(PlanOutcome { graph, path, solution, report })
}

#[derive(Clone, Debug)]
pub struct PlanFiles {
    pub trajectory: PathBuf,
    pub csv: PathBuf,
    pub report: PathBuf,
}

impl PlanFiles {
    pub fn in_dir(dir: &Path) -> Self {
        PlanFiles { trajectory: dir.join("trajectory.json"), csv: dir.join("trajectory.csv"), report: dir.join("report.json") }
    }
}

/// Plan on a planes file. With `graph_path`, an existing graph file is
/// reused and a missing one is written after building. A solve that runs
/// out of iterations still writes its outputs, then fails with
/// [`Error::MaxIterations`].
pub fn cmd_plan(
    planes_path: &Path,
    start: &Vec3,
    goal: &Vec3,
    out_dir: &Path,
    graph_path: Option<&Path>,
    config: &RunConfig,
    log: StageLog,
) -> Result<PlanReport> {
    let planes = load_planes(planes_path)?;
    let cached = match graph_path {
        Some(p) if p.exists() => Some(graph_from_json(&read_text(p)?)?),
        _ => None,
    };
    let had_cache = cached.is_some();
    let outcome = plan(&planes, start, goal, config, cached, log)?;
    if let (Some(p), false) = (graph_path, had_cache) {
        write_text(p, &graph_to_json(&outcome.graph)?)?;
    }
    let files = PlanFiles::in_dir(out_dir);
    let traj = &outcome.solution.trajectory;
    write_text(&files.trajectory, &trajectory_to_json(traj)?)?;
    write_text(&files.csv, &trajectory_csv(traj, config.csv_rate_hz)?)?;
    write_text(&files.report, &to_canonical_json(&outcome.report)?)?;
    if outcome.report.status == SolveStatus::MaxIterations {
        return Err(Error::MaxIterations(outcome.report.convergence.len()));
    }
    Ok(outcome.report)
}

/// Largest jump of the motion-state spline and its first two derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct JointGaps {
    pub position: f64,
    pub velocity: f64,
    pub acceleration: f64,
}

/// Continuity at one plane switch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossingGap {
    pub crossing: usize,
    pub t: f64,
    /// Distance between the integrated end of the incoming part and the crossing point.
    pub arrival_m: f64,
    /// Distance between the start of the outgoing part and the crossing point.
    pub departure_m: f64,
    pub speed_jump: f64,
    pub yaw_rate_jump: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    pub ok: bool,
    pub violations: Vec<String>,
    pub rate_hz: f64,
    pub samples: usize,
    pub duration_s: f64,
    pub residuals: ResidualReport,
    pub joint_gaps: JointGaps,
    pub crossings: Vec<CrossingGap>,
    pub max_z_deviation: Option<Worst>,
}

/// Tolerances applied by [`evaluate_trajectory`].
#[derive(Clone, Copy, Debug)]
pub struct EvalTolerances {
    pub residual: f64,
    pub continuity: f64,
    pub crossing: f64,
    pub surface: f64,
}

impl EvalTolerances {
    pub fn from_config(config: &RunConfig) -> Self {
        EvalTolerances { residual: config.optimizer.tol_cons, continuity: 1e-6, crossing: config.optimizer.e_max, surface: 1e-6 }
    }
}

/// Dense residuals, spline continuity and surface deviation of a trajectory
/// against a set of planes.
pub fn evaluate_trajectory(traj: &CrossPlaneTrajectory, planes: &[TraversablePlane], limits: &RobotLimits, rate_hz: f64, tol: EvalTolerances) -> Result<EvalReport> {
    if let Some(p) = traj.parts.iter().find(|p| p.plane >= planes.len()) {
        return Err(Error::DegenerateInput(format!("trajectory uses plane {} but the planes file has {}", p.plane, planes.len())));
    }
    let residuals = dense_check(traj, planes, limits, rate_hz)?;

    let mut z_dev: Option<Worst> = None;
    for (t, s) in traj.sample(rate_hz)? {
        let d = planes[s.plane].transform.height_of(&s.position).abs();
        if z_dev.is_none_or(|w| d > w.value) {
            z_dev = Some(Worst { value: d, t });
        }
    }

    let sp = &traj.spline;
    let mut joints = JointGaps::default();
    let mut jumps = Vec::new();
    let mut t_joint = 0.0;
    for i in 0..sp.len().saturating_sub(1) {
        t_joint += sp.durations[i];
        let gap = |d| (sp.eval(i, sp.durations[i], d) - sp.eval(i + 1, 0.0, d)).abs();
        let (g0, g1, g2) = (gap(0), gap(1), gap(2));
        joints.position = joints.position.max(g0.max());
        joints.velocity = joints.velocity.max(g1.max());
        joints.acceleration = joints.acceleration.max(g2.max());
        jumps.push((t_joint, g1));
    }

    let mut crossings = Vec::new();
    for (k, c) in traj.crossings.iter().enumerate() {
        let (a, b) = (&traj.parts[k], &traj.parts[k + 1]);
        let joint = b.segments.start - 1;
        let (t, g1) = jumps[joint];
        crossings.push(CrossingGap {
            crossing: k,
            t,
            arrival_m: (a.transform.lift(&traj.part_end_local(k)) - c.world_point).norm(),
            departure_m: (b.transform.lift(&b.start_local) - c.world_point).norm(),
            speed_jump: g1.y,
            yaw_rate_jump: g1.x,
        });
    }

    let mut violations = Vec::new();
    let families = [("c_v", residuals.c_v), ("c_m_plus", residuals.c_m_plus), ("c_m_minus", residuals.c_m_minus), ("c_o", residuals.c_o), ("c_s", residuals.c_s)];
    for (name, w) in families {
        if let Some(w) = w.filter(|w| w.value > tol.residual) {
            violations.push(format!("{name} = {:.6} at t = {:.3} s", w.value, w.t));
        }
    }
    if joints.position.max(joints.velocity).max(joints.acceleration) > tol.continuity {
        violations.push(format!("spline joint discontinuity {:.3e}", joints.position.max(joints.velocity).max(joints.acceleration)));
    }
    for c in &crossings {
        if c.arrival_m.max(c.departure_m) > tol.crossing {
            violations.push(format!("crossing {} misses its point by {:.4} m", c.crossing, c.arrival_m.max(c.departure_m)));
        }
    }
    if let Some(w) = z_dev.filter(|w| w.value > tol.surface) {
        violations.push(format!("{:.6} m off the plane surface at t = {:.3} s", w.value, w.t));
    }
    Ok(EvalReport {
        ok: violations.is_empty(),
        violations,
        rate_hz,
        samples: residuals.samples,
        duration_s: traj.duration(),
        residuals,
        joint_gaps: joints,
        crossings,
        max_z_deviation: z_dev,
    })
}

pub fn cmd_eval(traj_path: &Path, planes_path: &Path, config: &RunConfig, out_path: Option<&Path>, log: StageLog) -> Result<EvalReport> {
    let traj = load_trajectory(traj_path)?;
    let planes = load_planes(planes_path)?;
    let t = Instant::now();
    let report = evaluate_trajectory(&traj, &planes, &config.robot, config.optimizer.check_rate_hz, EvalTolerances::from_config(config))?;
    log.emit("eval", ms_since(t), json!({ "samples": report.samples, "ok": report.ok, "max_residual": report.residuals.max() }));
    if let Some(p) = out_path {
        write_text(p, &to_canonical_json(&report)?)?;
    }
    Ok(report)
}

const BOUNDARY_COLOR: [u8; 3] = [90, 160, 220];
const STAIRS_COLOR: [u8; 3] = [230, 170, 60];
const INTERLINE_COLOR: [u8; 3] = [220, 40, 40];
const GRAPH_COLOR: [u8; 3] = [60, 190, 90];
const TRAJECTORY_COLOR: [u8; 3] = [250, 250, 40];

/// Rate of the exported trajectory polyline.
pub const VIZ_RATE_HZ: f64 = 50.0;

/// Plane boundaries as faces, intersection lines, graph edges and the
/// trajectory as colored edge chains.
pub fn viz_mesh(planes: &[TraversablePlane], graph: &PlaneGraph, traj: Option<&CrossPlaneTrajectory>) -> Result<PlyMesh> {
    let mut mesh = PlyMesh::default();
    for p in planes {
        let color = if p.kind == crate::plane::PlaneKind::Stairs { STAIRS_COLOR } else { BOUNDARY_COLOR };
        let face = p.boundary.vertices().iter().map(|v| mesh.add_vertex(p.transform.lift(v), color)).collect();
        mesh.faces.push(face);
    }
    for (i, p) in planes.iter().enumerate() {
        for n in p.neighbors.iter().filter(|n| n.plane > i) {
            mesh.add_polyline(&[n.segment.a, n.segment.b], INTERLINE_COLOR);
        }
    }
    for e in &graph.edges {
        let tf = &planes[e.plane].transform;
        let pts: Vec<Vec3> = e.polyline.iter().map(|q| tf.lift(q)).collect();
        mesh.add_polyline(&pts, GRAPH_COLOR);
    }
    if let Some(traj) = traj {
        let pts: Vec<Vec3> = traj.sample(VIZ_RATE_HZ)?.into_iter().map(|(_, s)| s.position).collect();
        mesh.add_polyline(&pts, TRAJECTORY_COLOR);
    }
    Ok(mesh)
}

pub fn cmd_export_viz(traj_path: Option<&Path>, planes_path: &Path, graph_path: Option<&Path>, config: &RunConfig, out_path: &Path, log: StageLog) -> Result<PlyMesh> {
    let t = Instant::now();
    let planes = load_planes(planes_path)?;
    let traj = traj_path.map(load_trajectory).transpose()?;
    let graph = match graph_path {
        Some(p) => graph_from_json(&read_text(p)?)?,
        None => build_graph(&planes, config.robot.d_s),
    };
    let mesh = viz_mesh(&planes, &graph, traj.as_ref())?;
    write_text(out_path, &mesh.to_ply())?;
    log.emit("export_viz", ms_since(t), json!({ "vertices": mesh.vertices.len(), "faces": mesh.faces.len(), "edges": mesh.edges.len() }));
    Ok(mesh)
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub scene: String,
    pub seed: u64,
    pub planes: usize,
    pub plan: PlanReport,
    pub eval: EvalReport,
}

/// gen-scene, extract, plan, eval and export-viz for one bundled scene, from
/// its suggested start to its goal. Everything lands in `out_dir`.
pub fn cmd_run(name: &str, seed: u64, out_dir: &Path, config: &RunConfig, log: StageLog) -> Result<RunSummary> {
    let files = cmd_gen_scene(name, seed, out_dir, log)?;
    let truth: crate::scenes::GroundTruth = serde_json::from_str(&read_text(&files.truth)?)?;
    let planes_path = out_dir.join("planes.json");
    let planes = cmd_extract(&files.cloud, config, &planes_path, log)?;
    let graph_path = out_dir.join("graph.json");
    if graph_path.exists() {
        std::fs::remove_file(&graph_path).map_err(|source| Error::File { path: graph_path.clone(), source })?;
    }
    let plan = cmd_plan(&planes_path, &truth.start, &truth.goal, out_dir, Some(&graph_path), config, log)?;
    let plan_files = PlanFiles::in_dir(out_dir);
    let eval = cmd_eval(&plan_files.trajectory, &planes_path, config, Some(&out_dir.join("eval.json")), log)?;
    cmd_export_viz(Some(&plan_files.trajectory), &planes_path, Some(&graph_path), config, &out_dir.join("viz.ply"), log)?;
    Ok(RunSummary { scene: name.into(), seed, planes: planes.len(), plan, eval })
}
