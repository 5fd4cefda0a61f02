//! Eigendecomposition of 3×3 symmetric matrices by cyclic Jacobi rotations.
//!
//! Each rotation zeroes one off-diagonal entry; sweeps over the three pairs
//! repeat until the off-diagonal Frobenius norm falls below `1e-12` of the
//! matrix norm (at most 50 sweeps). Accumulated rotations are the
//! eigenvectors.

use crate::geometry::{Mat3, Vec3};

/// Relative eigen-gap below which a decomposition is flagged degenerate.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-6;

const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 50;
const SCALE_FLOOR: f64 = 1e-30;

/// Symmetric 3×3 matrix stored as its six independent entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymMat3 {
    pub a11: f64,
    pub a12: f64,
    pub a13: f64,
    pub a22: f64,
    pub a23: f64,
    pub a33: f64,
}

impl SymMat3 {
    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Self {
            a11: a,
            a22: b,
            a33: c,
            ..Self::default()
        }
    }

    pub fn to_array(&self) -> [[f64; 3]; 3] {
        [
            [self.a11, self.a12, self.a13],
            [self.a12, self.a22, self.a23],
            [self.a13, self.a23, self.a33],
        ]
    }

    /// Symmetric part of a full matrix.
    pub fn from_array(m: [[f64; 3]; 3]) -> Self {
        Self {
            a11: m[0][0],
            a12: 0.5 * (m[0][1] + m[1][0]),
            a13: 0.5 * (m[0][2] + m[2][0]),
            a22: m[1][1],
            a23: 0.5 * (m[1][2] + m[2][1]),
            a33: m[2][2],
        }
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        Mat3(self.to_array()).apply(v)
    }

    pub fn frobenius(&self) -> f64 {
        let d = self.a11 * self.a11 + self.a22 * self.a22 + self.a33 * self.a33;
        let o = self.a12 * self.a12 + self.a13 * self.a13 + self.a23 * self.a23;
        (d + 2.0 * o).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        [self.a11, self.a12, self.a13, self.a22, self.a23, self.a33]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Eigenvalues in descending order with matching unit eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    pub values: [f64; 3],
    pub vectors: [Vec3; 3],
    /// Set when `λ1−λ2` or `λ2−λ3` is within the tolerance relative to the
    /// spectral radius; the affected eigenvectors are then not unique.
    pub degenerate: bool,
    pub sweeps: usize,
}

impl EigenBasis {
    /// Relative gaps `(λ1−λ2, λ2−λ3) / max(|λ1|, |λ3|)`.
    pub fn relative_gaps(&self) -> (f64, f64) {
        let s = spectral_scale(&self.values);
        (
            (self.values[0] - self.values[1]) / s,
            (self.values[1] - self.values[2]) / s,
        )
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values[0].abs().max(self.values[2].abs())
    }
}

fn spectral_scale(values: &[f64; 3]) -> f64 {
    values[0].abs().max(values[2].abs()).max(SCALE_FLOOR)
}

/// Decomposes `m` as `Σ λi·vi·viᵀ`. Never fails; near-repeated eigenvalues
/// (relative gap ≤ `degeneracy_tol`) set [`EigenBasis::degenerate`].
///
/// Each eigenvector's sign is normalised so that its largest-magnitude
/// component is positive, which keeps the output deterministic.
pub fn eigen_decompose_sym3(m: &SymMat3, degeneracy_tol: f64) -> EigenBasis {
    let mut a = m.to_array();
    let mut v = Mat3::IDENTITY.0;
    let norm = m.frobenius();
    let mut sweeps = 0;

    while sweeps < MAX_SWEEPS {
        let off = (2.0 * (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2])).sqrt();
        if off <= OFF_DIAGONAL_TOL * norm || off == 0.0 {
            break;
        }
        sweeps += 1;
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta.is_finite() { t } else { 0.0 };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            rotate(&mut a, &mut v, p, q, c, s);
        }
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values = order.map(|i| a[i][i]);
    let vectors = order.map(|i| canonical_sign(Vec3::new(v[0][i], v[1][i], v[2][i])));

    let scale = spectral_scale(&values);
    let degenerate = (values[0] - values[1]) <= degeneracy_tol * scale
        || (values[1] - values[2]) <= degeneracy_tol * scale;

    EigenBasis {
        values,
        vectors,
        degenerate,
        sweeps,
    }
}

/// Applies the Jacobi rotation `A ← JᵀAJ`, `V ← VJ` in the (p, q) plane.
fn rotate(a: &mut [[f64; 3]; 3], v: &mut [[f64; 3]; 3], p: usize, q: usize, c: f64, s: f64) {
    let r = 3 - p - q;
    let (app, aqq, apq) = (a[p][p], a[q][q], a[p][q]);
    let (arp, arq) = (a[r][p], a[r][q]);

    a[p][p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
    a[q][q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
    a[p][q] = 0.0;
    a[q][p] = 0.0;
    a[r][p] = c * arp - s * arq;
    a[p][r] = a[r][p];
    a[r][q] = s * arp + c * arq;
    a[q][r] = a[r][q];

    for row in v.iter_mut() {
        let (vp, vq) = (row[p], row[q]);
        row[p] = c * vp - s * vq;
        row[q] = s * vp + c * vq;
    }
}

/// Flips `v` so that its largest-magnitude component (first on ties) is
/// positive.
pub fn canonical_sign(v: Vec3) -> Vec3 {
    let a = v.to_array();
    let mut k = 0;
    for i in 1..3 {
        if a[i].abs() > a[k].abs() {
            k = i;
        }
    }
    if a[k] < 0.0 {
        -v
    } else {
        v
    }
}
