use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PointCloud, TriangleMesh};
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Draws `n` points uniformly over the mesh surface: a triangle is picked
/// with probability proportional to its area, then a point inside it by
/// uniform barycentric sampling. Identical `(mesh, n, seed)` give
/// bit-identical clouds.
pub fn sample_mesh(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<PointCloud> {
    sample_mesh_indexed(mesh, n, seed).map(|(cloud, _)| cloud)
}

/// Like [`sample_mesh`], also returning the source face of every point.
pub fn sample_mesh_indexed(
    mesh: &TriangleMesh,
    n: usize,
    seed: u64,
) -> Result<(PointCloud, Vec<usize>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut cumulative = Vec::with_capacity(mesh.faces().len());
    let mut total = 0.0;
    for f in 0..mesh.faces().len() {
        total += mesh.triangle_area(f);
        cumulative.push(total);
    }
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::DegenerateMesh);
    }

    // zero-area faces own an empty interval of the CDF and are never picked;
    // u rounding up to `total` maps to the last face with positive area
    let last_positive = (0..cumulative.len())
        .rev()
        .find(|&k| mesh.triangle_area(k) > 0.0)
        .unwrap_or(0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n.min(1 << 24));
    let mut faces = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        let u = rng.random::<f64>() * total;
        let f = cumulative.partition_point(|&c| c <= u);
        let f = if f < cumulative.len() { f } else { last_positive };
        let [a, b, c] = mesh.triangle(f);
        let r1 = rng.random::<f64>().sqrt();
        let r2 = rng.random::<f64>();
        let p: Point3 = a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2);
        points.push(p);
        faces.push(f);
    }
    Ok((PointCloud::new(points)?, faces))
}
