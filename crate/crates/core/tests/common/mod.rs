//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use planeway::config::RunConfig;
use planeway::extraction::{connect_planes, grid_planes};
use planeway::geometry::{convex_hull, expand_polygon, fit_plane, Vec2, Vec3};
use planeway::graph::{build_graph, search_path};
use planeway::plane::{PlaneFootprint, PlaneKind, TraversablePlane};
use planeway::optimizer::{DecisionVector, Problem};

fn lattice(x0: f64, x1: f64, y0: f64, y1: f64, step: f64, f: impl Fn(f64, f64) -> Vec3) -> Vec<Vec3> {
    let nx = ((x1 - x0) / step).round() as usize;
    let ny = ((y1 - y0) / step).round() as usize;
    (0..=nx).flat_map(|i| (0..=ny).map(move |j| (x0 + i as f64 * step, y0 + j as f64 * step))).map(|(x, y)| f(x, y)).collect()
}

fn footprint(points: Vec<Vec3>, kind: PlaneKind, margin: f64) -> PlaneFootprint {
    let fit = fit_plane(&points).unwrap();
    let local: Vec<Vec2> = points.iter().map(|p| fit.transform.to_local_2d(p)).collect();
    let boundary = convex_hull(&local).unwrap();
    let expanded = expand_polygon(&boundary, margin);
    PlaneFootprint { transform: fit.transform, kind, inclination: fit.inclination, thickness: fit.thickness, boundary, expanded, neighbors: Vec::new(), points }
}

/// A 3 m x 2 m floor at z = 0 and a 20 degree ramp rising from its x = 3 edge.
pub fn floor_and_ramp(config: &RunConfig) -> Vec<TraversablePlane> {
    let slope = 20f64.to_radians().tan();
    let floor = lattice(0.0, 3.0, 0.0, 2.0, 0.025, |x, y| Vec3::new(x, y, 0.0));
    let ramp = lattice(3.0, 5.0, 0.0, 2.0, 0.025, |x, y| Vec3::new(x, y, (x - 3.0) * slope));
    let margin = config.mapping.resolution;
    let mut fps = vec![footprint(floor, PlaneKind::Ground, margin), footprint(ramp, PlaneKind::Slope, margin)];
    connect_planes(&mut fps, margin, config.extraction.min_interline_length);
    grid_planes(fps, &[], config).unwrap()
}

pub const TOY_START: [f64; 3] = [0.6, 1.0, 0.0];

pub fn toy_goal() -> Vec3 {
    Vec3::new(4.4, 1.0, 1.4 * 20f64.to_radians().tan())
}

/// Floor-to-ramp optimization problem and its initial guess.
pub fn toy_problem<'a>(planes: &'a [TraversablePlane], config: &RunConfig) -> (Problem<'a>, DecisionVector) {
    let graph = build_graph(planes, config.robot.d_s);
    let start = Vec3::from(TOY_START);
    let path = search_path(&graph, planes, &start, &toy_goal(), config.graph.projection_max_dist, config.robot.d_s).unwrap();
    assert_eq!(path.planes.len(), 2, "toy route must cross once");
    Problem::from_path(planes, &path, &config.robot, &config.optimizer).unwrap()
}
