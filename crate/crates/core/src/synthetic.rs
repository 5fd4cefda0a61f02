//! Procedural test objects: six shape families with per-instance jitter,
//! random rigid pose, scale and sensor noise.
//!
//! Round shapes get slightly unequal axes so that every family has a
//! well-defined principal frame.

use std::f64::consts::TAU;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::object_seed;
use crate::error::{Error, Result};
use crate::geometry::{Mat3, Point3, Vec3};
use crate::io::{sample_mesh, PointCloud, TriangleMesh};
use crate::protocol::LabeledDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeFamily {
    Box,
    Sphere,
    Cylinder,
    LShape,
    Ring,
    Plane,
}

impl ShapeFamily {
    pub const ALL: [ShapeFamily; 6] = [
        ShapeFamily::Box,
        ShapeFamily::Sphere,
        ShapeFamily::Cylinder,
        ShapeFamily::LShape,
        ShapeFamily::Ring,
        ShapeFamily::Plane,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeFamily::Box => "box",
            ShapeFamily::Sphere => "sphere",
            ShapeFamily::Cylinder => "cylinder",
            ShapeFamily::LShape => "lshape",
            ShapeFamily::Ring => "ring",
            ShapeFamily::Plane => "plane",
        }
    }
}

impl fmt::Display for ShapeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ShapeFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown shape family `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    /// Relative per-dimension jitter: each size is multiplied by a factor in
    /// `[1 - jitter, 1 + jitter]`.
    pub jitter: f64,
    /// Gaussian noise standard deviation relative to the largest size.
    pub noise: f64,
    /// Apply a random rotation, translation and scale.
    pub random_pose: bool,
    /// Points per cloud.
    pub points: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            jitter: 0.1,
            noise: 0.002,
            random_pose: true,
            points: 2000,
        }
    }
}

/// Uniformly distributed rotation (normalised Gaussian quaternion).
pub fn random_rotation(rng: &mut impl Rng) -> Mat3 {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        if q.iter().map(|v| v * v).sum::<f64>() > 1e-6 {
            return Mat3::from_quaternion(q[0], q[1], q[2], q[3]);
        }
    }
}

fn merge(meshes: &[TriangleMesh]) -> TriangleMesh {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for m in meshes {
        let base = vertices.len();
        vertices.extend_from_slice(m.vertices());
        faces.extend(m.faces().iter().map(|f| f.map(|i| i + base)));
    }
    TriangleMesh::new(vertices, faces).expect("merged meshes stay valid")
}

/// Axis-aligned box with the given sizes, centred at `c`.
pub fn box_mesh(size: Vec3, c: Point3) -> TriangleMesh {
    let h = size * 0.5;
    let vertices = (0..8)
        .map(|i| {
            let s = |bit: usize| if i & bit == 0 { -1.0 } else { 1.0 };
            c + Point3::new(s(1) * h.x, s(2) * h.y, s(4) * h.z)
        })
        .collect();
    let quads = [
        [0, 2, 3, 1],
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 4, 6, 2],
        [1, 3, 7, 5],
    ];
    let faces = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    TriangleMesh::new(vertices, faces).expect("box is valid")
}

/// Latitude/longitude mesh of an ellipsoid with semi-axes `r`.
pub fn ellipsoid_mesh(r: Vec3, slices: usize, stacks: usize) -> TriangleMesh {
    let mut vertices = vec![Point3::new(0.0, 0.0, r.z)];
    for i in 1..stacks {
        let phi = std::f64::consts::PI * i as f64 / stacks as f64;
        for j in 0..slices {
            let th = TAU * j as f64 / slices as f64;
            vertices.push(Point3::new(
                r.x * phi.sin() * th.cos(),
                r.y * phi.sin() * th.sin(),
                r.z * phi.cos(),
            ));
        }
    }
    vertices.push(Point3::new(0.0, 0.0, -r.z));
    let south = vertices.len() - 1;
    let ring = |i: usize, j: usize| 1 + i * slices + j % slices;
    let mut faces = Vec::new();
    for j in 0..slices {
        faces.push([0, ring(0, j), ring(0, j + 1)]);
        faces.push([south, ring(stacks - 2, j + 1), ring(stacks - 2, j)]);
    }
    for i in 0..stacks - 2 {
        for j in 0..slices {
            faces.push([ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)]);
            faces.push([ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)]);
        }
    }
    TriangleMesh::new(vertices, faces).expect("ellipsoid is valid")
}

/// Closed cylinder along Z with an elliptical cross-section.
pub fn cylinder_mesh(rx: f64, ry: f64, height: f64, slices: usize) -> TriangleMesh {
    let h = height / 2.0;
    let mut vertices = Vec::with_capacity(2 * slices + 2);
    for z in [-h, h] {
        for j in 0..slices {
            let th = TAU * j as f64 / slices as f64;
            vertices.push(Point3::new(rx * th.cos(), ry * th.sin(), z));
        }
    }
    vertices.push(Point3::new(0.0, 0.0, -h));
    vertices.push(Point3::new(0.0, 0.0, h));
    let (bottom, top) = (2 * slices, 2 * slices + 1);
    let mut faces = Vec::new();
    for j in 0..slices {
        let k = (j + 1) % slices;
        faces.push([j, k, slices + k]);
        faces.push([j, slices + k, slices + j]);
        faces.push([bottom, k, j]);
        faces.push([top, slices + j, slices + k]);
    }
    TriangleMesh::new(vertices, faces).expect("cylinder is valid")
}

/// Torus-like ring in the XY plane with elliptical centre line (radii
/// `rx`, `ry`) and tube radius `tube`.
pub fn ring_mesh(rx: f64, ry: f64, tube: f64, slices: usize, sides: usize) -> TriangleMesh {
    let mut vertices = Vec::with_capacity(slices * sides);
    for i in 0..slices {
        let u = TAU * i as f64 / slices as f64;
        for j in 0..sides {
            let v = TAU * j as f64 / sides as f64;
            let w = tube * v.cos();
            vertices.push(Point3::new(
                (rx + w) * u.cos(),
                (ry + w) * u.sin(),
                tube * v.sin(),
            ));
        }
    }
    let at = |i: usize, j: usize| (i % slices) * sides + j % sides;
    let mut faces = Vec::new();
    for i in 0..slices {
        for j in 0..sides {
            faces.push([at(i, j), at(i + 1, j), at(i + 1, j + 1)]);
            faces.push([at(i, j), at(i + 1, j + 1), at(i, j + 1)]);
        }
    }
    TriangleMesh::new(vertices, faces).expect("ring is valid")
}

/// One jittered instance of `family` in canonical pose.
pub fn family_mesh(family: ShapeFamily, jitter: f64, rng: &mut impl Rng) -> TriangleMesh {
    let mut j = || 1.0 + jitter * (2.0 * rng.random::<f64>() - 1.0);
    match family {
        ShapeFamily::Box => box_mesh(Point3::new(2.0 * j(), 1.4 * j(), 0.9 * j()), Point3::ZERO),
        ShapeFamily::Sphere => ellipsoid_mesh(Point3::new(1.0 * j(), 0.85 * j(), 0.7 * j()), 32, 16),
        ShapeFamily::Cylinder => cylinder_mesh(0.5 * j(), 0.38 * j(), 2.2 * j(), 32),
        ShapeFamily::LShape => {
            let t = 0.45 * j();
            let (a, b) = (2.0 * j(), 1.3 * j());
            let d = 0.5 * j();
            merge(&[
                box_mesh(Point3::new(a, t, d), Point3::new(a / 2.0, t / 2.0, 0.0)),
                box_mesh(Point3::new(t, b - t, d), Point3::new(t / 2.0, t + (b - t) / 2.0, 0.0)),
            ])
        }
        ShapeFamily::Ring => ring_mesh(1.0 * j(), 0.8 * j(), 0.18 * j(), 48, 12),
        ShapeFamily::Plane => box_mesh(Point3::new(2.0 * j(), 1.3 * j(), 0.03 * j()), Point3::ZERO),
    }
}

fn random_pose(rng: &mut impl Rng) -> (Mat3, f64, Vec3) {
    let rot = random_rotation(rng);
    let scale = (rng.random_range(0.5f64.ln()..2.0f64.ln())).exp();
    let t = Point3::new(
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
    );
    (rot, scale, t)
}

/// Jittered, posed mesh. Deterministic in `seed`.
pub fn synth_mesh(family: ShapeFamily, seed: u64, params: &SynthParams) -> TriangleMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = family_mesh(family, params.jitter, &mut rng);
    if !params.random_pose {
        return mesh;
    }
    let (rot, scale, t) = random_pose(&mut rng);
    mesh.map_vertices(|p| rot.apply(p * scale) + t)
}

/// Surface samples of a jittered instance with Gaussian noise, then posed.
pub fn synth_cloud(family: ShapeFamily, seed: u64, params: &SynthParams) -> Result<PointCloud> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = family_mesh(family, params.jitter, &mut rng);
    let cloud = sample_mesh(&mesh, params.points, rng.random())?;
    let extent = mesh
        .vertices()
        .iter()
        .fold(0.0f64, |m, p| m.max(p.max_abs()))
        * 2.0;
    let sigma = params.noise * extent;
    let (rot, scale, t) = if params.random_pose {
        random_pose(&mut rng)
    } else {
        (Mat3::IDENTITY, 1.0, Point3::ZERO)
    };
    let points = cloud
        .points()
        .iter()
        .map(|&p| {
            let n = Point3::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            );
            rot.apply((p + n * sigma) * scale) + t
        })
        .collect();
    PointCloud::new(points)
}

fn instance_seed(seed: u64, family: ShapeFamily, index: usize) -> u64 {
    object_seed(seed, &format!("{family}/{index}"))
}

/// `per_family` clouds of every family in `families`, instance `i` of a
/// family seeded independently of the others.
pub fn synth_dataset(
    families: &[ShapeFamily],
    per_family: usize,
    seed: u64,
    params: &SynthParams,
) -> Result<LabeledDataset<PointCloud>> {
    let categories = families
        .iter()
        .map(|&f| {
            let clouds = (0..per_family)
                .map(|i| synth_cloud(f, instance_seed(seed, f, i), params))
                .collect::<Result<Vec<_>>>()?;
            Ok((f.name().to_string(), clouds))
        })
        .collect::<Result<Vec<_>>>()?;
    LabeledDataset::new(categories)
}

/// Writes `train + test` posed OFF meshes per family under
/// `root/<family>/<family>_NNN.off` plus `splits/train.txt` and
/// `splits/test.txt` (the first `train` instances of each family are
/// training objects).
pub fn write_off_dataset(
    root: &Path,
    families: &[ShapeFamily],
    train: usize,
    test: usize,
    seed: u64,
    params: &SynthParams,
) -> Result<()> {
    let mut lists = [String::new(), String::new()];
    for &f in families {
        let dir = root.join(f.name());
        fs::create_dir_all(&dir)?;
        for i in 0..train + test {
            let name = format!("{f}_{i:03}.off");
            fs::write(dir.join(&name), synth_mesh(f, instance_seed(seed, f, i), params).to_off())?;
            lists[usize::from(i >= train)].push_str(&format!("{f}/{name}\n"));
        }
    }
    let splits = root.join("splits");
    fs::create_dir_all(&splits)?;
    fs::write(splits.join("train.txt"), &lists[0])?;
    fs::write(splits.join("test.txt"), &lists[1])?;
    Ok(())
}
