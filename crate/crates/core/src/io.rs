//! ASCII PLY and XYZ point-cloud readers, and a PLY writer for clouds and
//! colored meshes/edge sets.

use std::fmt::Write as _;
use std::path::Path;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

struct ElementHeader {
    name: String,
    count: usize,
    properties: Vec<String>,
}

/// Parse the vertex element of an ASCII PLY document. Extra vertex properties
/// and other elements are ignored.
pub fn parse_ply(text: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        Some((n, other)) => return Err(parse_err(n, format!("expected 'ply' magic, found '{other}'"))),
        None => return Err(parse_err(1, "empty file")),
    }
    let mut elements: Vec<ElementHeader> = Vec::new();
    let mut saw_format = false;
    loop {
        let Some((n, line)) = lines.next() else {
            return Err(parse_err(0, "header is not terminated by end_header"));
        };
        let mut words = line.split_whitespace();
        match words.next() {
            Some("format") => {
                if words.next() != Some("ascii") {
                    return Err(parse_err(n, "only 'format ascii 1.0' is supported"));
                }
                saw_format = true;
            }
            Some("comment") | Some("obj_info") | None => {}
            Some("element") => {
                let name = words.next().ok_or_else(|| parse_err(n, "element without a name"))?;
                let count = words
                    .next()
                    .and_then(|c| c.parse::<usize>().ok())
                    .ok_or_else(|| parse_err(n, "element count is not a non-negative integer"))?;
                elements.push(ElementHeader { name: name.to_string(), count, properties: Vec::new() });
            }
            Some("property") => {
                let element = elements.last_mut().ok_or_else(|| parse_err(n, "property before any element"))?;
                let ty = words.next().ok_or_else(|| parse_err(n, "property without a type"))?;
                let name = if ty == "list" {
                    words.nth(2)
                } else {
                    words.next()
                }
                .ok_or_else(|| parse_err(n, "property without a name"))?;
                element.properties.push(name.to_string());
            }
            Some("end_header") => break,
            Some(other) => return Err(parse_err(n, format!("unknown header keyword '{other}'"))),
        }
    }
    if !saw_format {
        return Err(parse_err(1, "missing format line"));
    }
    let mut points = Vec::new();
    for element in &elements {
        let axes = if element.name == "vertex" {
            let find = |axis: &str| element.properties.iter().position(|p| p == axis);
            match (find("x"), find("y"), find("z")) {
                (Some(x), Some(y), Some(z)) => Some([x, y, z]),
                _ => return Err(parse_err(0, "vertex element lacks x, y or z properties")),
            }
        } else {
            None
        };
        for _ in 0..element.count {
            let Some((n, line)) = lines.next() else {
                return Err(parse_err(0, format!("unexpected end of file inside element '{}'", element.name)));
            };
            let Some(axes) = axes else { continue };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < element.properties.len() {
                return Err(parse_err(n, format!("expected {} values, found {}", element.properties.len(), fields.len())));
            }
            let mut p = [0.0; 3];
            for (k, &col) in axes.iter().enumerate() {
                p[k] = fields[col].parse::<f64>().map_err(|_| parse_err(n, format!("'{}' is not a number", fields[col])))?;
                if !p[k].is_finite() {
                    return Err(parse_err(n, "non-finite coordinate"));
                }
            }
            points.push(Vec3::new(p[0], p[1], p[2]));
        }
    }
    Ok(PointCloud::new(points))
}

/// Parse whitespace-separated `x y z` rows; blank lines and `#` comments are skipped.
pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(parse_err(i + 1, format!("expected 3 coordinates, found {}", fields.len())));
        }
        let mut p = [0.0; 3];
        for k in 0..3 {
            p[k] = fields[k].parse::<f64>().map_err(|_| parse_err(i + 1, format!("'{}' is not a number", fields[k])))?;
        }
        points.push(Vec3::new(p[0], p[1], p[2]));
    }
    Ok(PointCloud::new(points))
}

/// Read a cloud, choosing the parser by extension (`.ply`, otherwise XYZ).
pub fn read_cloud(path: &Path) -> Result<PointCloud> {
    let text = read_text(path)?;
    let is_ply = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ply"));
    if is_ply { parse_ply(&text) } else { parse_xyz(&text) }
}

/// Read a whole file, keeping the path in the error.
pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::File { path: path.to_path_buf(), source })
}

/// Write a whole file, creating parent directories as needed.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let wrap = |source| Error::File { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(wrap)?;
    }
    std::fs::write(path, text).map_err(wrap)
}

fn fmt_coord(out: &mut String, v: f64) {
    let v = if v == 0.0 { 0.0 } else { v };
    let _ = write!(out, "{v:.6}");
}

/// ASCII PLY document for a plain cloud.
pub fn cloud_to_ply(cloud: &PointCloud) -> String {
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", cloud.points.len());
    out.push_str("property float x\nproperty float y\nproperty float z\nend_header\n");
    for p in &cloud.points {
        fmt_coord(&mut out, p.x);
        out.push(' ');
        fmt_coord(&mut out, p.y);
        out.push(' ');
        fmt_coord(&mut out, p.z);
        out.push('\n');
    }
    out
}

/// Colored vertices with optional polygon faces and line edges.
#[derive(Clone, Debug, Default)]
pub struct PlyMesh {
    pub vertices: Vec<(Vec3, [u8; 3])>,
    pub faces: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize, [u8; 3])>,
}

impl PlyMesh {
    pub fn add_vertex(&mut self, p: Vec3, color: [u8; 3]) -> usize {
        self.vertices.push((p, color));
        self.vertices.len() - 1
    }

    /// Append a polyline as a chain of edges.
    pub fn add_polyline(&mut self, points: &[Vec3], color: [u8; 3]) {
        let ids: Vec<usize> = points.iter().map(|p| self.add_vertex(*p, color)).collect();
        for w in ids.windows(2) {
            self.edges.push((w[0], w[1], color));
        }
    }

    pub fn to_ply(&self) -> String {
        let mut out = String::new();
        out.push_str("ply\nformat ascii 1.0\n");
        let _ = writeln!(out, "element vertex {}", self.vertices.len());
        out.push_str("property float x\nproperty float y\nproperty float z\n");
        out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
        let _ = writeln!(out, "element face {}", self.faces.len());
        out.push_str("property list uchar int vertex_indices\n");
        let _ = writeln!(out, "element edge {}", self.edges.len());
        out.push_str("property int vertex1\nproperty int vertex2\n");
        out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n");
        for (p, c) in &self.vertices {
            fmt_coord(&mut out, p.x);
            out.push(' ');
            fmt_coord(&mut out, p.y);
            out.push(' ');
            fmt_coord(&mut out, p.z);
            let _ = writeln!(out, " {} {} {}", c[0], c[1], c[2]);
        }
        for f in &self.faces {
            let _ = write!(out, "{}", f.len());
            for i in f {
                let _ = write!(out, " {i}");
            }
            out.push('\n');
        }
        for (a, b, c) in &self.edges {
            let _ = writeln!(out, "{a} {b} {} {} {}", c[0], c[1], c[2]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ply_round_trip() {
        let cloud = PointCloud::new(vec![Vec3::new(1.0, -2.5, 0.125), Vec3::new(0.0, 3.0, -0.0)]);
        let back = parse_ply(&cloud_to_ply(&cloud)).unwrap();
        assert_eq!(back, cloud);
    }

    #[test]
    fn ply_with_extra_properties_and_faces() {
        let text = "ply\nformat ascii 1.0\ncomment test\nelement vertex 2\nproperty float nx\nproperty float x\nproperty float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n9 1 2 3\n9 4 5 6\n3 0 1 1\n";
        let cloud = parse_ply(text).unwrap();
        assert_eq!(cloud.points, vec![Vec3::new(1.0, 2.0, 3.0), Vec3::new(4.0, 5.0, 6.0)]);
    }

    #[test]
    fn ply_errors_name_the_line() {
        let bad_header = "ply\nformat ascii 1.0\nelement vertex 1\nproprty float x\nend_header\n";
        match parse_ply(bad_header) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let bad_value = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 2 3\n1 b 3\n";
        match parse_ply(bad_value) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 9),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_ply("plx\n").is_err());
        assert!(parse_ply("ply\nformat binary_little_endian 1.0\nend_header\n").is_err());
    }

    #[test]
    fn xyz_reader() {
        let cloud = parse_xyz("# header\n1 2 3\n\n4 5 6 7\n").unwrap();
        assert_eq!(cloud.points.len(), 2);
        assert!(matches!(parse_xyz("1 2\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn mesh_writer_counts() {
        let mut mesh = PlyMesh::default();
        mesh.add_polyline(&[Vec3::zeros(), Vec3::x(), Vec3::y()], [255, 0, 0]);
        mesh.faces.push(vec![0, 1, 2]);
        let text = mesh.to_ply();
        assert!(text.contains("element vertex 3"));
        assert!(text.contains("element edge 2"));
        let back = parse_ply(&text).unwrap();
        assert_eq!(back.points.len(), 3);
    }
}
