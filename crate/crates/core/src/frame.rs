//! Global object reference frame from the principal axes of a cloud.
//!
//! X and Y follow the two largest-variance eigenvectors of the population
//! covariance; Z is always `X × Y`, so every frame is right-handed. Signs of
//! X and Y are arbitrary here and are fixed later by
//! [`crate::projection::disambiguate_sign`].

use crate::eigen::{canonical_sign, eigen_decompose_sym3, EigenBasis, SymMat3, DEFAULT_DEGENERACY_TOL};
use crate::error::{Error, Result};
use crate::geometry::{Mat3, Point3, Vec3};
use crate::io::{format_sig, PointCloud};

/// Centroid plus right-handed orthonormal axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceFrame {
    pub origin: Point3,
    pub x_axis: Vec3,
    pub y_axis: Vec3,
    pub z_axis: Vec3,
}

impl ReferenceFrame {
    pub const WORLD: ReferenceFrame = ReferenceFrame {
        origin: Point3::ZERO,
        x_axis: Vec3::unit(0),
        y_axis: Vec3::unit(1),
        z_axis: Vec3::unit(2),
    };

    /// Builds a frame from two axes; Z is their normalised cross product.
    pub fn from_xy(origin: Point3, x_axis: Vec3, y_axis: Vec3) -> Self {
        let x_axis = x_axis.normalized();
        let y_axis = y_axis.normalized();
        Self {
            origin,
            x_axis,
            y_axis,
            z_axis: x_axis.cross(y_axis).normalized(),
        }
    }

    pub fn axes(&self) -> [Vec3; 3] {
        [self.x_axis, self.y_axis, self.z_axis]
    }

    /// Rotation whose columns are the axes (frame → world).
    pub fn rotation(&self) -> Mat3 {
        Mat3::from_cols(self.x_axis, self.y_axis, self.z_axis)
    }

    pub fn determinant(&self) -> f64 {
        self.rotation().det()
    }

    /// World point expressed in frame coordinates.
    pub fn to_local(&self, p: Point3) -> Point3 {
        let d = p - self.origin;
        Point3::new(d.dot(self.x_axis), d.dot(self.y_axis), d.dot(self.z_axis))
    }

    /// Negates X and/or Y and recomputes Z, keeping the frame right-handed.
    pub fn with_flips(&self, flip_x: bool, flip_y: bool) -> Self {
        let x = if flip_x { -self.x_axis } else { self.x_axis };
        let y = if flip_y { -self.y_axis } else { self.y_axis };
        Self {
            origin: self.origin,
            x_axis: x,
            y_axis: y,
            z_axis: x.cross(y),
        }
    }

    /// Twelve numbers, row-major: origin, X, Y, Z.
    pub fn to_record(&self) -> [f64; 12] {
        let mut r = [0.0; 12];
        for (k, v) in [self.origin, self.x_axis, self.y_axis, self.z_axis]
            .iter()
            .enumerate()
        {
            r[3 * k..3 * k + 3].copy_from_slice(&v.to_array());
        }
        r
    }

    pub fn from_record(r: &[f64; 12]) -> Self {
        let v = |k: usize| Vec3::new(r[3 * k], r[3 * k + 1], r[3 * k + 2]);
        Self {
            origin: v(0),
            x_axis: v(1),
            y_axis: v(2),
            z_axis: v(3),
        }
    }

    /// Space-separated text form of [`Self::to_record`].
    pub fn record_line(&self) -> String {
        self.to_record()
            .iter()
            .map(|&v| format_sig(v))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// What to do when the principal axes are not unique.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegeneratePolicy {
    /// Return [`Error::DegenerateFrame`].
    #[default]
    Fail,
    /// Pick a deterministic basis inside each repeated eigenspace.
    Canonical,
}

/// Arithmetic mean of the points.
pub fn centroid(cloud: &PointCloud) -> Point3 {
    let n = cloud.len() as f64;
    let sum = cloud
        .points()
        .iter()
        .fold(Point3::ZERO, |acc, &p| acc + p);
    sum * (1.0 / n)
}

/// Population (1/n) covariance about `c`.
pub fn covariance(cloud: &PointCloud, c: Point3) -> SymMat3 {
    let mut m = SymMat3::default();
    for &p in cloud.points() {
        let d = p - c;
        m.a11 += d.x * d.x;
        m.a12 += d.x * d.y;
        m.a13 += d.x * d.z;
        m.a22 += d.y * d.y;
        m.a23 += d.y * d.z;
        m.a33 += d.z * d.z;
    }
    let k = 1.0 / cloud.len() as f64;
    SymMat3 {
        a11: m.a11 * k,
        a12: m.a12 * k,
        a13: m.a13 * k,
        a22: m.a22 * k,
        a23: m.a23 * k,
        a33: m.a33 * k,
    }
}

/// Eigen-analysis of the cloud's covariance.
pub fn principal_axes(cloud: &PointCloud) -> (Point3, EigenBasis) {
    let c = centroid(cloud);
    let basis = eigen_decompose_sym3(&covariance(cloud, c), DEFAULT_DEGENERACY_TOL);
    (c, basis)
}

/// Frame with origin at the centroid and X, Y along the two dominant
/// principal directions. Fails on fewer than 3 points or a degenerate
/// spectrum.
pub fn build_reference_frame(cloud: &PointCloud) -> Result<ReferenceFrame> {
    build_reference_frame_with(cloud, DegeneratePolicy::Fail)
}

pub fn build_reference_frame_with(
    cloud: &PointCloud,
    policy: DegeneratePolicy,
) -> Result<ReferenceFrame> {
    if cloud.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: cloud.len(),
        });
    }
    let (c, basis) = principal_axes(cloud);
    let [v1, v2, _] = if basis.degenerate {
        match policy {
            DegeneratePolicy::Fail => return Err(Error::DegenerateFrame(Box::new(basis))),
            DegeneratePolicy::Canonical => canonical_basis(&basis, DEFAULT_DEGENERACY_TOL),
        }
    } else {
        basis.vectors
    };
    Ok(ReferenceFrame::from_xy(c, v1, v2))
}

/// Replaces the eigenvectors of every cluster of near-equal eigenvalues by a
/// basis that depends only on the eigenspace: project e1, e2, e3 onto it and
/// take the longest projection first (lowest index on ties), then complete
/// orthogonally. Signs follow [`canonical_sign`].
pub fn canonical_basis(basis: &EigenBasis, tol: f64) -> [Vec3; 3] {
    let scale = basis.spectral_radius().max(1e-30);
    let tie01 = basis.values[0] - basis.values[1] <= tol * scale;
    let tie12 = basis.values[1] - basis.values[2] <= tol * scale;
    let v = basis.vectors;

    if tie01 && tie12 {
        return [Vec3::unit(0), Vec3::unit(1), Vec3::unit(2)];
    }
    let (i, j) = if tie01 { (0, 1) } else { (1, 2) };
    let (a, b) = (v[i], v[j]);
    let mut best = Vec3::ZERO;
    let mut best_norm = -1.0;
    for k in 0..3 {
        let e = Vec3::unit(k);
        let p = a * e.dot(a) + b * e.dot(b);
        let n = p.norm();
        if n > best_norm + 1e-12 {
            best = p;
            best_norm = n;
        }
    }
    let first = canonical_sign(best.normalized());
    let normal = a.cross(b).normalized();
    let second = canonical_sign(normal.cross(first).normalized());

    let mut out = v;
    out[i] = first;
    out[j] = second;
    out
}

/// Expresses every point in frame coordinates: `p → ((p−c)·X, (p−c)·Y, (p−c)·Z)`.
pub fn transform_to_frame(cloud: &PointCloud, frame: &ReferenceFrame) -> Result<PointCloud> {
    cloud.map_points(|p| frame.to_local(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(pts: &[[f64; 3]]) -> PointCloud {
        PointCloud::new(pts.iter().map(|&a| Point3::from_array(a)).collect()).unwrap()
    }

    fn cube_corners() -> PointCloud {
        let mut v = Vec::new();
        for x in [-0.5, 0.5] {
            for y in [-0.5, 0.5] {
                for z in [-0.5, 0.5] {
                    v.push([x, y, z]);
                }
            }
        }
        cloud(&v)
    }

    #[test]
    fn centroid_examples() {
        assert_eq!(centroid(&cloud(&[[0., 0., 0.], [2., 0., 0.]])), Point3::new(1., 0., 0.));
        assert_eq!(centroid(&cloud(&[[3., -1., 2.]])), Point3::new(3., -1., 2.));
        let same = cloud(&[[1., 1., 1.]; 7]);
        let c = centroid(&same);
        assert!((c - Point3::new(1., 1., 1.)).norm() < 1e-15);
    }

    #[test]
    fn covariance_examples() {
        let seg = cloud(&[[-1., 0., 0.], [1., 0., 0.]]);
        assert_eq!(covariance(&seg, centroid(&seg)), SymMat3::diag(1.0, 0.0, 0.0));
        let one = cloud(&[[2., 2., 2.]]);
        assert_eq!(covariance(&one, centroid(&one)), SymMat3::default());
        let cube = cube_corners();
        assert_eq!(covariance(&cube, centroid(&cube)), SymMat3::diag(0.25, 0.25, 0.25));
    }

    #[test]
    fn dominant_direction_is_x() {
        let mut pts = Vec::new();
        for i in 0..21 {
            let t = -1.0 + 0.1 * i as f64;
            pts.push([t, 0.01 * ((i * 7) % 5) as f64, 0.001 * ((i * 3) % 4) as f64]);
        }
        let f = build_reference_frame(&cloud(&pts)).unwrap();
        assert!(f.x_axis.dot(Vec3::unit(0)).abs() > 0.999);
        assert!(f.determinant() > 0.0);
        assert!((f.z_axis - f.x_axis.cross(f.y_axis)).norm() < 1e-12);
    }

    #[test]
    fn too_few_points_and_degenerate() {
        assert!(matches!(
            build_reference_frame(&cloud(&[[0., 0., 0.], [1., 0., 0.]])),
            Err(Error::TooFewPoints { needed: 3, got: 2 })
        ));
        match build_reference_frame(&cube_corners()) {
            Err(Error::DegenerateFrame(b)) => assert!(b.degenerate),
            other => panic!("expected degenerate frame, got {other:?}"),
        }
        let f = build_reference_frame_with(&cube_corners(), DegeneratePolicy::Canonical).unwrap();
        assert_eq!(f.axes(), [Vec3::unit(0), Vec3::unit(1), Vec3::unit(2)]);
    }

    #[test]
    fn canonical_tie_break_is_basis_independent() {
        // Upright ellipse-free cylinder-like spectrum: λ1 = λ2 > λ3.
        let rot = Mat3::from_quaternion(0.9, 0.1, -0.3, 0.2);
        let mut b = EigenBasis {
            values: [2.0, 2.0, 1.0],
            vectors: [rot.col(0), rot.col(1), rot.col(2)],
            degenerate: true,
            sweeps: 0,
        };
        let first = canonical_basis(&b, 1e-6);
        // a different basis of the same eigenspace
        let (a, c) = (b.vectors[0], b.vectors[1]);
        b.vectors[0] = (a + c).normalized();
        b.vectors[1] = (a - c).normalized();
        let second = canonical_basis(&b, 1e-6);
        for k in 0..3 {
            assert!((first[k] - second[k]).norm() < 1e-12, "axis {k}");
        }
    }

    #[test]
    fn transform_centres_and_diagonalises() {
        let pts: Vec<[f64; 3]> = (0..50)
            .map(|i| {
                let t = i as f64;
                [t.sin() * 3.0 + 1.0, (t * 0.7).cos() - 2.0, (t * 1.3).sin() * 0.5 + t * 0.01]
            })
            .collect();
        let c = cloud(&pts);
        let f = build_reference_frame(&c).unwrap();
        let local = transform_to_frame(&c, &f).unwrap();
        assert!(centroid(&local).norm() < 1e-9);
        let cov = covariance(&local, Point3::ZERO);
        let l1 = cov.a11.max(cov.a22).max(cov.a33);
        for off in [cov.a12, cov.a13, cov.a23] {
            assert!(off.abs() <= 1e-6 * l1);
        }
        let id = transform_to_frame(&c, &ReferenceFrame::WORLD).unwrap();
        assert_eq!(id, c);
    }

    #[test]
    fn record_round_trips() {
        let f = ReferenceFrame::from_xy(Point3::new(1., 2., 3.), Vec3::unit(1), Vec3::unit(2));
        assert_eq!(ReferenceFrame::from_record(&f.to_record()), f);
        assert_eq!(f.record_line().split(' ').count(), 12);
    }
}
