//! Plane records passed between extraction, mapping, search and optimization.

use serde::{Deserialize, Serialize};

use crate::geometry::{ConvexPolygon2D, PlanePatch, Segment3D, Transform, Vec2, Vec3};
use crate::mapping::GridMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlaneKind {
    Ground,
    Slope,
    Stairs,
    Vertical,
}

impl PlaneKind {
    pub fn is_traversable(self) -> bool {
        self != PlaneKind::Vertical
    }
}

/// Link to an adjacent plane through their intersection segment.
#[derive(Clone, Debug, PartialEq)]
pub struct Neighbor {
    pub plane: usize,
    pub segment: Segment3D,
}

/// A traversable plane before gridding: geometry plus its supporting points.
#[derive(Clone, Debug)]
pub struct PlaneFootprint {
    pub transform: Transform,
    pub kind: PlaneKind,
    pub inclination: f64,
    pub thickness: f64,
    pub boundary: ConvexPolygon2D,
    pub expanded: ConvexPolygon2D,
    pub neighbors: Vec<Neighbor>,
    pub points: Vec<Vec3>,
}

impl PlaneFootprint {
    pub fn patch(&self) -> PlanePatch<'_> {
        PlanePatch { transform: &self.transform, boundary: &self.boundary }
    }
}

/// Outline of a non-traversable plane, used to stamp obstacles.
#[derive(Clone, Debug)]
pub struct VerticalObstacle {
    pub transform: Transform,
    pub boundary_points: Vec<Vec3>,
}

/// One extracted plane with its occupancy grid and distance field.
#[derive(Clone, Debug)]
pub struct TraversablePlane {
    pub transform: Transform,
    pub kind: PlaneKind,
    pub inclination: f64,
    pub thickness: f64,
    pub boundary: ConvexPolygon2D,
    pub expanded: ConvexPolygon2D,
    pub neighbors: Vec<Neighbor>,
    pub point_count: usize,
    pub grid: GridMap,
}

impl TraversablePlane {
    pub fn from_footprint(fp: PlaneFootprint, grid: GridMap) -> Self {
        Self {
            transform: fp.transform,
            kind: fp.kind,
            inclination: fp.inclination,
            thickness: fp.thickness,
            boundary: fp.boundary,
            expanded: fp.expanded,
            neighbors: fp.neighbors,
            point_count: fp.points.len(),
            grid,
        }
    }

    pub fn patch(&self) -> PlanePatch<'_> {
        PlanePatch { transform: &self.transform, boundary: &self.boundary }
    }

    pub fn neighbor(&self, other: usize) -> Option<&Neighbor> {
        self.neighbors.iter().find(|n| n.plane == other)
    }

    pub fn to_local(&self, world: &Vec3) -> Vec2 {
        self.transform.to_local_2d(world)
    }
}
