//! Point clouds and a k-d tree neighbor index over them.

use rstar::primitives::GeomWithData;
use rstar::RTree;

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Raw or filtered 3D points with an optional normal map.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        Self { points, normals: None }
    }

    pub fn with_normals(points: Vec<Vec3>, normals: Vec<Vec3>) -> Result<Self> {
        if normals.len() != points.len() {
            return Err(Error::DegenerateInput(format!(
                "{} normals for {} points",
                normals.len(),
                points.len()
            )));
        }
        if let Some(bad) = normals.iter().position(|n| (n.norm() - 1.0).abs() > 1e-6) {
            return Err(Error::DegenerateInput(format!("normal {bad} is not unit length")));
        }
        Ok(Self { points, normals: Some(normals) })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

type Entry = GeomWithData<[f64; 3], usize>;

/// Spatial index over a point slice. Neighbor lists come back sorted by
/// distance, ties broken by index, so results are deterministic.
pub struct NeighborIndex {
    tree: RTree<Entry>,
}

impl NeighborIndex {
    pub fn new(points: &[Vec3]) -> Self {
        let entries: Vec<Entry> = points.iter().enumerate().map(|(i, p)| GeomWithData::new([p.x, p.y, p.z], i)).collect();
        Self { tree: RTree::bulk_load(entries) }
    }

    /// The `k` nearest points to `q` (including `q` itself if it is in the set),
    /// as `(index, distance)` pairs.
    pub fn nearest(&self, q: &Vec3, k: usize) -> Vec<(usize, f64)> {
        if k == 0 {
            return Vec::new();
        }
        let query = [q.x, q.y, q.z];
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(k + 4);
        for (e, d2) in self.tree.nearest_neighbor_iter_with_distance_2(&query) {
            // keep collecting past k while distances tie, so the cut is index-ordered
            if out.len() >= k && d2.sqrt() > out[k - 1].1 {
                break;
            }
            out.push((e.data, d2.sqrt()));
        }
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out.truncate(k);
        out
    }

    /// All points within `radius` of `q`.
    pub fn within(&self, q: &Vec3, radius: f64) -> Vec<(usize, f64)> {
        let query = [q.x, q.y, q.z];
        let mut out: Vec<(usize, f64)> = self
            .tree
            .locate_within_distance(query, radius * radius)
            .map(|e| {
                let p = e.geom();
                (e.data, ((p[0] - q.x).powi(2) + (p[1] - q.y).powi(2) + (p[2] - q.z).powi(2)).sqrt())
            })
            .collect();
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_matches_brute_force() {
        let pts: Vec<Vec3> = (0..200)
            .map(|i| {
                let f = i as f64;
                Vec3::new((f * 0.37).sin(), (f * 0.91).cos(), (f * 0.13).sin() * 0.2)
            })
            .collect();
        let index = NeighborIndex::new(&pts);
        let q = Vec3::new(0.1, 0.2, 0.0);
        let got = index.nearest(&q, 7);
        let mut brute: Vec<(usize, f64)> = pts.iter().enumerate().map(|(i, p)| (i, (p - q).norm())).collect();
        brute.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        assert_eq!(got.iter().map(|g| g.0).collect::<Vec<_>>(), brute[..7].iter().map(|b| b.0).collect::<Vec<_>>());
        let r = index.within(&q, 0.5);
        assert_eq!(r.len(), brute.iter().filter(|b| b.1 <= 0.5).count());
    }

    #[test]
    fn duplicated_points_are_indexable() {
        let pts = vec![Vec3::new(1.0, 1.0, 1.0); 100];
        let index = NeighborIndex::new(&pts);
        assert_eq!(index.nearest(&Vec3::zeros(), 5).len(), 5);
        let mut line: Vec<Vec3> = (0..2000).map(|i| Vec3::new(0.0, (i % 37) as f64 * 0.01, 0.0)).collect();
        line.push(Vec3::new(5.0, 0.0, 0.0));
        let index = NeighborIndex::new(&line);
        let got = index.nearest(&Vec3::new(4.0, 0.0, 0.0), 3);
        assert_eq!(got[0].0, 2000);
        assert_eq!(index.within(&Vec3::zeros(), 1e-9).len(), line.iter().filter(|p| p.norm() == 0.0).count());
    }

    #[test]
    fn normals_must_match_points() {
        assert!(PointCloud::with_normals(vec![Vec3::zeros()], vec![]).is_err());
        assert!(PointCloud::with_normals(vec![Vec3::zeros()], vec![Vec3::new(0.0, 0.0, 2.0)]).is_err());
    }
}
