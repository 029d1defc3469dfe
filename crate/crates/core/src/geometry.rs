//! Bloch vectors, 3×3 linear maps and rotations.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};

/// Slack allowed above the unit Bloch sphere before a vector is rejected.
pub const NORM_SLACK: f64 = 1e-12;

const UNIT_TOLERANCE: f64 = 1e-12;
const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

/// A plain Cartesian 3-vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs_diff(self, other: Vec3) -> f64 {
        let d = self - other;
        d.x.abs().max(d.y.abs()).max(d.z.abs())
    }

    /// Returns the vector scaled to unit length, or an error for a zero vector.
    pub fn normalized(self) -> Result<Vec3> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::domain("axis", format!("cannot normalize {self:?}")));
        }
        Ok(self * (1.0 / n))
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// A qubit state in the Bloch ball, `|b| ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BlochVector(Vec3);

impl BlochVector {
    /// Validates `|v| ≤ 1`. Norms up to `1 + 1e-12` are clamped back onto the
    /// sphere; anything larger is rejected.
    pub fn new(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() {
            return Err(Error::domain("bloch vector", format!("non-finite entries {v:?}")));
        }
        if n > 1.0 + NORM_SLACK {
            return Err(Error::OutsideBlochBall(n));
        }
        if n > 1.0 {
            return Ok(BlochVector(v * (1.0 / n)));
        }
        Ok(BlochVector(v))
    }

    pub fn vector(self) -> Vec3 {
        self.0
    }

    pub fn norm(self) -> f64 {
        self.0.norm()
    }

    /// `|b|²`, which is 1 for pure states.
    pub fn purity(self) -> f64 {
        self.0.norm_sq().min(1.0)
    }
}

/// `|b|·(sin α cos γ, sin α sin γ, cos α)`.
pub fn bloch_from_angles(radius: f64, alpha: f64, gamma: f64) -> Result<BlochVector> {
    if !(0.0..=1.0).contains(&radius) {
        return Err(Error::domain("radius", format!("must lie in [0, 1], got {radius}")));
    }
    if !(0.0..=PI).contains(&alpha) {
        return Err(Error::domain("alpha", format!("polar angle must lie in [0, π], got {alpha}")));
    }
    if !gamma.is_finite() {
        return Err(Error::domain("gamma", format!("azimuth must be finite, got {gamma}")));
    }
    let (sa, ca) = alpha.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    BlochVector::new(Vec3::new(sa * cg, sa * sg, ca) * radius)
}

/// A real 3×3 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct LinearMap3(pub [[f64; 3]; 3]);

impl LinearMap3 {
    pub const IDENTITY: LinearMap3 =
        LinearMap3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    pub const ZERO: LinearMap3 = LinearMap3([[0.0; 3]; 3]);

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        LinearMap3(rows)
    }

    pub fn diagonal(a: f64, b: f64, c: f64) -> Self {
        LinearMap3([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[row][col]
    }

    /// Row-major entries.
    pub fn entries(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn from_entries(e: [f64; 9]) -> Self {
        LinearMap3([[e[0], e[1], e[2]], [e[3], e[4], e[5]], [e[6], e[7], e[8]]])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        LinearMap3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn compose(&self, rhs: &LinearMap3) -> LinearMap3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        LinearMap3(out)
    }

    pub fn scale(&self, s: f64) -> LinearMap3 {
        LinearMap3(self.0.map(|row| row.map(|v| v * s)))
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn max_abs_diff(&self, other: &LinearMap3) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation of `MᵀM` from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        self.transpose().compose(self).max_abs_diff(&LinearMap3::IDENTITY)
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> [f64; 3] {
        let mut eig = symmetric_eigenvalues(self.transpose().compose(self));
        eig.sort_by(|a, b| b.total_cmp(a));
        eig.map(|e| e.max(0.0).sqrt())
    }
}

impl Mul for LinearMap3 {
    type Output = LinearMap3;
    fn mul(self, rhs: LinearMap3) -> LinearMap3 {
        self.compose(&rhs)
    }
}

impl Mul<Vec3> for LinearMap3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        self.apply(v)
    }
}

impl Add for LinearMap3 {
    type Output = LinearMap3;
    fn add(self, rhs: LinearMap3) -> LinearMap3 {
        let mut out = self.0;
        for (row, r) in out.iter_mut().zip(rhs.0) {
            for (a, b) in row.iter_mut().zip(r) {
                *a += b;
            }
        }
        LinearMap3(out)
    }
}

impl Sub for LinearMap3 {
    type Output = LinearMap3;
    fn sub(self, rhs: LinearMap3) -> LinearMap3 {
        self + rhs.scale(-1.0)
    }
}

impl fmt::Display for LinearMap3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.0 {
            writeln!(f, "{:>24.16e} {:>24.16e} {:>24.16e}", row[0], row[1], row[2])?;
        }
        Ok(())
    }
}

/// Cyclic Jacobi sweeps on a symmetric 3×3 matrix.
fn symmetric_eigenvalues(m: LinearMap3) -> [f64; 3] {
    let mut a = m.0;
    for _ in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        if off < 1e-300 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;
            let mut g = [[0.0; 3]; 3];
            g[0][0] = 1.0;
            g[1][1] = 1.0;
            g[2][2] = 1.0;
            g[p][p] = c;
            g[q][q] = c;
            g[p][q] = s;
            g[q][p] = -s;
            let g = LinearMap3(g);
            a = g.transpose().compose(&LinearMap3(a)).compose(&g).0;
        }
    }
    [a[0][0], a[1][1], a[2][2]]
}

/// A nominal gate: rotation by `theta` about the unit vector `axis`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GateSpec {
    axis: Vec3,
    theta: f64,
}

impl GateSpec {
    /// Requires `|axis| = 1` and `0 < theta < 2π`.
    pub fn new(axis: Vec3, theta: f64) -> Result<Self> {
        check_unit(axis)?;
        check_angle(theta)?;
        Ok(GateSpec { axis, theta })
    }

    /// Like [`GateSpec::new`] but rescales any nonzero axis to unit length.
    pub fn with_unnormalized_axis(axis: Vec3, theta: f64) -> Result<Self> {
        Self::new(axis.normalized()?, theta)
    }

    pub fn about_z(theta: f64) -> Result<Self> {
        Self::new(Vec3::Z, theta)
    }

    pub fn axis(&self) -> Vec3 {
        self.axis
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Rejects angles outside the open interval (0, 2π).
pub fn check_angle(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 2.0 * PI {
        Ok(())
    } else {
        Err(Error::AngleOutOfRange(theta))
    }
}

fn check_unit(axis: Vec3) -> Result<()> {
    let n = axis.norm();
    if (n - 1.0).abs() > UNIT_TOLERANCE || !n.is_finite() {
        return Err(Error::domain("axis", format!("must be a unit vector, |n| = {n}")));
    }
    Ok(())
}

/// Rodrigues rotation by `angle` about the unit vector `n`, for any real angle.
pub fn rodrigues(n: Vec3, angle: f64) -> LinearMap3 {
    let (s, c) = angle.sin_cos();
    let v = 1.0 - c;
    let (x, y, z) = (n.x, n.y, n.z);
    // diagonal as n² + (1 − n²)c, so axis-aligned rotations are exact
    LinearMap3([
        [x * x + (1.0 - x * x) * c, x * y * v - z * s, x * z * v + y * s],
        [x * y * v + z * s, y * y + (1.0 - y * y) * c, y * z * v - x * s],
        [x * z * v - y * s, y * z * v + x * s, z * z + (1.0 - z * z) * c],
    ])
}

/// The rotation `R_n(θ)` named by a gate.
pub fn axis_rotation(spec: &GateSpec) -> LinearMap3 {
    rodrigues(spec.axis, spec.theta)
}

/// A rotation `R` with `R·axis = ẑ`.
///
/// The minimal rotation about `axis × ẑ`; for `axis = −ẑ` it is the half turn
/// about `x̂`.
pub fn align_axis_to_z(axis: Vec3) -> Result<LinearMap3> {
    if axis.norm() == 0.0 {
        return Err(Error::domain("axis", "zero vector has no direction"));
    }
    check_unit(axis)?;
    let pivot = axis.cross(Vec3::Z);
    let s = pivot.norm();
    if s == 0.0 {
        return Ok(if axis.z > 0.0 {
            LinearMap3::IDENTITY
        } else {
            rodrigues(Vec3::X, PI)
        });
    }
    let angle = s.atan2(axis.z);
    Ok(rodrigues(pivot * (1.0 / s), angle))
}

/// `basis⁻¹ · map · basis` for an orthogonal `basis`.
pub fn conjugate(map: &LinearMap3, basis: &LinearMap3) -> Result<LinearMap3> {
    let defect = basis.orthogonality_defect();
    if !(defect <= ORTHOGONALITY_TOLERANCE) {
        return Err(Error::domain(
            "basis change",
            format!("matrix is not orthogonal (|BᵀB − I| = {defect:e})"),
        ));
    }
    Ok(basis.transpose().compose(map).compose(basis))
}
