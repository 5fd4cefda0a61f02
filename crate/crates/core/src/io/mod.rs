//! Point clouds, triangle meshes, and their ASCII file formats.
//!
//! Supported inputs are OFF meshes, ASCII PLY vertex sets and plain XYZ/CSV
//! point lists. Meshes become point clouds through area-weighted sampling
//! ([`sample_mesh`]).

mod off;
mod ply;
mod sample;
mod xyz;

use std::path::Path;

pub use off::parse_off;
pub use ply::parse_ply_ascii;
pub use sample::{sample_mesh, sample_mesh_indexed};
pub use xyz::{format_sig, parse_xyz, write_xyz};

use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Ordered list of 3D points with optional per-point RGB.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
    colors: Option<Vec<[u8; 3]>>,
}

impl PointCloud {
    /// Builds a cloud, rejecting empty input and non-finite coordinates.
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            points,
            colors: None,
        })
    }

    pub fn with_colors(points: Vec<Point3>, colors: Vec<[u8; 3]>) -> Result<Self> {
        if colors.len() != points.len() {
            return Err(Error::Schema(format!(
                "{} colors for {} points",
                colors.len(),
                points.len()
            )));
        }
        let mut cloud = Self::new(points)?;
        cloud.colors = Some(colors);
        Ok(cloud)
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn colors(&self) -> Option<&[[u8; 3]]> {
        self.colors.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies `f` to every point, keeping colors. The result must stay finite.
    pub fn map_points(&self, f: impl Fn(Point3) -> Point3) -> Result<Self> {
        let points: Vec<Point3> = self.points.iter().map(|&p| f(p)).collect();
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            points,
            colors: self.colors.clone(),
        })
    }
}

/// Indexed triangle mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Validates that every index is in range and every face has three
    /// distinct corners.
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        for (i, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::Schema(format!(
                    "face {i} references a vertex beyond {}",
                    vertices.len()
                )));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::Schema(format!("face {i} repeats a vertex")));
            }
        }
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { vertices, faces })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn triangle(&self, face: usize) -> [Point3; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.triangle(face);
        0.5 * (b - a).cross(c - a).norm()
    }

    /// Same connectivity, vertices mapped by `f`.
    pub fn map_vertices(&self, f: impl Fn(Point3) -> Point3) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&p| f(p)).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Serialises as ASCII OFF.
    pub fn to_off(&self) -> String {
        let mut out = format!("OFF\n{} {} 0\n", self.vertices.len(), self.faces.len());
        for p in &self.vertices {
            out.push_str(&format!(
                "{} {} {}\n",
                format_sig(p.x),
                format_sig(p.y),
                format_sig(p.z)
            ));
        }
        for f in &self.faces {
            out.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
        }
        out
    }
}

/// Input file kinds recognised by [`load_cloud`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Off,
    Ply,
    Xyz,
}

impl FileKind {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "off" => Some(FileKind::Off),
            "ply" => Some(FileKind::Ply),
            "xyz" | "csv" | "txt" | "pts" => Some(FileKind::Xyz),
            _ => None,
        }
    }
}

/// Reads a file as a point cloud. OFF meshes are sampled with `samples`
/// points using `seed`.
pub fn load_cloud(path: &Path, samples: usize, seed: u64) -> Result<PointCloud> {
    let kind = FileKind::from_path(path).ok_or_else(|| {
        Error::UnsupportedFormat(format!("unrecognised extension: {}", path.display()))
    })?;
    let bytes = std::fs::read(path)?;
    match kind {
        FileKind::Off => sample_mesh(&parse_off(&bytes)?, samples, seed),
        FileKind::Ply => parse_ply_ascii(&bytes),
        FileKind::Xyz => parse_xyz(&bytes),
    }
}

/// Splits a line into numeric-looking tokens on whitespace and commas.
pub(crate) fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
}

pub(crate) fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("not a number: `{}`", truncate(tok))))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value `{}`", truncate(tok))));
    }
    Ok(v)
}

pub(crate) fn truncate(s: &str) -> String {
    s.chars().take(32).collect()
}
