//! Jones, Stokes and Mueller-rotation calculus for lossless polarization
//! elements.
//!
//! # Conventions
//!
//! * Stokes components: `s1` horizontal (+) / vertical (−), `s2` +45° / −45°,
//!   `s3` circular, with the Jones vector `(1, i)/√2` mapping to `(0, 0, +1)`.
//! * `s_k = v† σ_k v` with `σ1 = diag(1, −1)`, `σ2 = [[0, 1], [1, 0]]` and
//!   `σ3 = [[0, −i], [i, 0]]`. This ordering satisfies `[σ1, σ2] = 2iσ3` and
//!   cyclic permutations, so Stokes space is right-handed.
//! * A retarder with unit axis `a` and retardation `δ` has the Jones matrix
//!   `cos(δ/2)·I − i·sin(δ/2)·(a·σ)` and rotates Stokes vectors by `+δ` about
//!   `a`, counterclockwise when seen from the tip of `a`.
//! * Matrices compose in propagation order from the left: light passing `A`
//!   and then `B` sees `B·A`.
//! * Global phases are carried but never compared.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::{Mul, Neg};

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Unitarity residual above which [`jones_to_rotation`] refuses its input.
pub const UNITARITY_TOLERANCE: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pauli matrices in Stokes order.
fn pauli() -> [Matrix2<Complex64>; 3] {
    [
        Matrix2::new(ONE, ZERO, ZERO, -ONE),
        Matrix2::new(ZERO, ONE, ONE, ZERO),
        Matrix2::new(ZERO, -I, I, ZERO),
    ]
}

/// Real 3-vector on (or inside) the Poincaré sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVector(Vector3<f64>);

impl StokesVector {
    pub fn new(s1: f64, s2: f64, s3: f64) -> Self {
        Self(Vector3::new(s1, s2, s3))
    }

    pub fn horizontal() -> Self {
        Self::new(1.0, 0.0, 0.0)
    }

    pub fn diagonal() -> Self {
        Self::new(0.0, 1.0, 0.0)
    }

    pub fn circular() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    pub fn s1(&self) -> f64 {
        self.0.x
    }

    pub fn s2(&self) -> f64 {
        self.0.y
    }

    pub fn s3(&self) -> f64 {
        self.0.z
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Unit vector in the same direction, `None` for a zero or non-finite
    /// vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n.is_finite() && n > 0.0).then(|| Self(self.0 / n))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self(self.0.cross(&other.0))
    }

    /// Great-circle angle between the directions of two vectors.
    pub fn angle_to(&self, other: &Self) -> f64 {
        self.0.cross(&other.0).norm().atan2(self.0.dot(&other.0))
    }

    /// Some unit vector orthogonal to `self`.
    pub fn orthogonal(&self) -> Self {
        let v = &self.0;
        let pick = if v.x.abs() <= v.y.abs() && v.x.abs() <= v.z.abs() {
            Vector3::x()
        } else if v.y.abs() <= v.z.abs() {
            Vector3::y()
        } else {
            Vector3::z()
        };
        Self(v.cross(&pick).normalize())
    }
}

impl From<Vector3<f64>> for StokesVector {
    fn from(v: Vector3<f64>) -> Self {
        Self(v)
    }
}

impl Neg for StokesVector {
    type Output = Self;

    fn neg(self) -> Self {
        Self(-self.0)
    }
}

/// Pair of complex field amplitudes `(ex, ey)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector(Vector2<Complex64>);

impl JonesVector {
    pub fn new(ex: Complex64, ey: Complex64) -> Self {
        Self(Vector2::new(ex, ey))
    }

    pub fn ex(&self) -> Complex64 {
        self.0.x
    }

    pub fn ey(&self) -> Complex64 {
        self.0.y
    }

    pub fn as_vector(&self) -> &Vector2<Complex64> {
        &self.0
    }

    /// `|ex|² + |ey|²`.
    pub fn power(&self) -> f64 {
        self.0.x.norm_sqr() + self.0.y.norm_sqr()
    }

    pub fn normalized(&self) -> Option<Self> {
        let n = self.power().sqrt();
        (n.is_finite() && n > 0.0).then(|| Self(self.0.unscale(n)))
    }

    /// Hermitian inner product `⟨self, other⟩ = self† · other`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.0.x.conj() * other.0.x + self.0.y.conj() * other.0.y
    }

    /// Unit Jones vector whose state of polarization is the direction of `s`.
    /// The global phase is chosen so that the larger component is real.
    pub fn from_stokes(s: &StokesVector) -> Option<Self> {
        let s = s.normalized()?;
        let (s1, s2, s3) = (s.s1(), s.s2(), s.s3());
        let v = if s1 >= 0.0 {
            let ex = ((1.0 + s1) / 2.0).sqrt();
            let ey = Complex64::new(s2, s3) / (2.0 * ex);
            Vector2::new(Complex64::from(ex), ey)
        } else {
            let ey = ((1.0 - s1) / 2.0).sqrt();
            let ex = Complex64::new(s2, -s3) / (2.0 * ey);
            Vector2::new(ex, Complex64::from(ey))
        };
        Some(Self(v))
    }
}

/// Normalized Stokes vector of a (not necessarily normalized) Jones vector.
///
/// `(|ex|² − |ey|², 2·Re(ex·ey*), −2·Im(ex·ey*)) / (|ex|² + |ey|²)`.
pub fn stokes_of(v: &JonesVector) -> StokesVector {
    let (ex, ey) = (v.ex(), v.ey());
    let p = v.power();
    let cross = ex * ey.conj();
    StokesVector::new(
        (ex.norm_sqr() - ey.norm_sqr()) / p,
        2.0 * cross.re / p,
        -2.0 * cross.im / p,
    )
}

/// 2×2 complex transfer matrix of a lossless element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix(Matrix2<Complex64>);

impl JonesMatrix {
    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    pub fn from_matrix(m: Matrix2<Complex64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    /// Entries in row-major order: `[j11, j12, j21, j22]`.
    pub fn entries(&self) -> [Complex64; 4] {
        [self.0[(0, 0)], self.0[(0, 1)], self.0[(1, 0)], self.0[(1, 1)]]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn with_phase(&self, phase: f64) -> Self {
        Self(self.0 * Complex64::from_polar(1.0, phase))
    }

    /// Largest entry magnitude of `J·J† − I`.
    pub fn unitarity_residual(&self) -> f64 {
        let d = self.0 * self.0.adjoint() - Matrix2::identity();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &JonesVector) -> JonesVector {
        JonesVector(self.0 * v.0)
    }
}

impl Mul for JonesMatrix {
    type Output = JonesMatrix;

    fn mul(self, rhs: JonesMatrix) -> JonesMatrix {
        JonesMatrix(self.0 * rhs.0)
    }
}

/// Proper rotation of Stokes space (the Mueller matrix of a lossless element
/// without its trivial intensity row and column).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Wraps a matrix without checking orthogonality.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    /// Rodrigues rotation by `angle` about `axis` (need not be unit length,
    /// must be nonzero).
    pub fn from_axis_angle(axis: &StokesVector, angle: f64) -> Self {
        let k = axis.as_vector().normalize();
        let kx = k.cross_matrix();
        let (s, c) = angle.sin_cos();
        Self(Matrix3::identity() + kx * s + kx * kx * (1.0 - c))
    }

    /// Rotation by `|v|` about `v`, identity for `v = 0`.
    pub fn from_rotation_vector(v: &Vector3<f64>) -> Self {
        let angle = v.norm();
        if angle == 0.0 {
            Self::identity()
        } else {
            Self::from_axis_angle(&StokesVector::from(*v), angle)
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn apply(&self, s: &StokesVector) -> StokesVector {
        StokesVector(self.0 * s.0)
    }

    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Largest entry magnitude of `R·Rᵀ − I`.
    pub fn orthogonality_residual(&self) -> f64 {
        (self.0 * self.0.transpose() - Matrix3::identity()).amax()
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// Unit quaternion `(w, x, y, z)` with `w ≥ 0` (Shepperd's method).
    fn quaternion(&self) -> [f64; 4] {
        let m = &self.0;
        let tr = m.trace();
        let mut q = if tr > m[(0, 0)].max(m[(1, 1)]).max(m[(2, 2)]) {
            let s = 2.0 * (1.0 + tr).sqrt();
            [
                s / 4.0,
                (m[(2, 1)] - m[(1, 2)]) / s,
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(1, 0)] - m[(0, 1)]) / s,
            ]
        } else if m[(0, 0)] >= m[(1, 1)] && m[(0, 0)] >= m[(2, 2)] {
            let s = 2.0 * (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt();
            [
                (m[(2, 1)] - m[(1, 2)]) / s,
                s / 4.0,
                (m[(0, 1)] + m[(1, 0)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
            ]
        } else if m[(1, 1)] >= m[(2, 2)] {
            let s = 2.0 * (1.0 - m[(0, 0)] + m[(1, 1)] - m[(2, 2)]).sqrt();
            [
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                s / 4.0,
                (m[(1, 2)] + m[(2, 1)]) / s,
            ]
        } else {
            let s = 2.0 * (1.0 - m[(0, 0)] - m[(1, 1)] + m[(2, 2)]).sqrt();
            [
                (m[(1, 0)] - m[(0, 1)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
                (m[(1, 2)] + m[(2, 1)]) / s,
                s / 4.0,
            ]
        };
        if q[0] < 0.0 {
            q.iter_mut().for_each(|c| *c = -*c);
        }
        let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        q.map(|c| c / n)
    }

    /// Logarithm map: the rotation vector `angle·axis` with `angle ∈ [0, π]`.
    pub fn rotation_vector(&self) -> Vector3<f64> {
        let [w, x, y, z] = self.quaternion();
        let v = Vector3::new(x, y, z);
        let s = v.norm();
        if s == 0.0 {
            return Vector3::zeros();
        }
        let angle = 2.0 * s.atan2(w);
        v * (angle / s)
    }

    /// Axis and angle (`angle ∈ [0, π]`); the axis is arbitrary for the identity.
    pub fn axis_angle(&self) -> (StokesVector, f64) {
        let v = self.rotation_vector();
        let angle = v.norm();
        if angle == 0.0 {
            (StokesVector::horizontal(), 0.0)
        } else {
            (StokesVector(v / angle), angle)
        }
    }

    /// Angle of the rotation `self · otherᵀ`.
    pub fn angle_to(&self, other: &Self) -> f64 {
        RotationMatrix(self.0 * other.0.transpose())
            .rotation_vector()
            .norm()
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;

    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * rhs.0)
    }
}

/// General elliptical retarder: rotation of the Poincaré sphere by
/// `retardation` about the eigenmode `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Retarder {
    axis: StokesVector,
    retardation: f64,
}

impl Retarder {
    /// Normalizes `axis`; fails on a zero or non-finite axis or a non-finite
    /// retardation.
    pub fn new(axis: StokesVector, retardation: f64) -> Result<Self> {
        let axis = axis
            .normalized()
            .ok_or_else(|| Error::InvalidConfig(format!("retarder axis {axis:?} has no direction")))?;
        if !retardation.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "retardation {retardation} is not finite"
            )));
        }
        Ok(Self { axis, retardation })
    }

    pub fn identity() -> Self {
        Self {
            axis: StokesVector::horizontal(),
            retardation: 0.0,
        }
    }

    pub fn axis(&self) -> StokesVector {
        self.axis
    }

    /// Retardation as accumulated, never wrapped.
    pub fn retardation(&self) -> f64 {
        self.retardation
    }

    /// Retardation reduced to `[0, 2π)` for presentation.
    pub fn canonical_retardation(&self) -> f64 {
        self.retardation.rem_euclid(TAU)
    }

    /// Retarder realizing a given rotation.
    pub fn from_rotation(r: &RotationMatrix) -> Self {
        let (axis, retardation) = r.axis_angle();
        Self { axis, retardation }
    }

    /// Shortest-arc retarder carrying the direction of `from` onto that of
    /// `to`. Antipodal inputs get a half-turn about an orthogonal axis.
    pub fn mapping(from: &StokesVector, to: &StokesVector) -> Result<Self> {
        let (a, b) = match (from.normalized(), to.normalized()) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::InvalidConfig(
                    "cannot map a zero-length Stokes vector".into(),
                ))
            }
        };
        let axis = a.cross(&b);
        let angle = a.angle_to(&b);
        if axis.norm() > 1e-12 {
            Ok(Self {
                axis: axis.normalized().expect("nonzero cross product"),
                retardation: angle,
            })
        } else if a.dot(&b) > 0.0 {
            Ok(Self::identity())
        } else {
            Ok(Self {
                axis: a.orthogonal(),
                retardation: PI,
            })
        }
    }

    pub fn rotation(&self) -> RotationMatrix {
        retarder_to_rotation(self)
    }

    pub fn jones(&self) -> JonesMatrix {
        retarder_to_jones(self, 0.0)
    }
}

/// Stokes-space rotation of a retarder.
pub fn retarder_to_rotation(r: &Retarder) -> RotationMatrix {
    RotationMatrix::from_axis_angle(&r.axis, r.retardation)
}

/// SU(2) lift `e^{iφ}·(cos(δ/2)·I − i·sin(δ/2)·(a·σ))` of a retarder.
pub fn retarder_to_jones(r: &Retarder, global_phase: f64) -> JonesMatrix {
    let (s, c) = (r.retardation / 2.0).sin_cos();
    let a = r.axis.as_vector();
    let [p1, p2, p3] = pauli();
    let generator = p1 * Complex64::from(a.x) + p2 * Complex64::from(a.y) + p3 * Complex64::from(a.z);
    let m = Matrix2::identity() * Complex64::from(c) - generator * (I * s);
    JonesMatrix(m * Complex64::from_polar(1.0, global_phase))
}

/// SO(3) image of a unitary Jones matrix: `R_kl = ½·Re Tr(σ_k J σ_l J†)`.
pub fn jones_to_rotation(j: &JonesMatrix) -> Result<RotationMatrix> {
    let residual = j.unitarity_residual();
    if !(residual <= UNITARITY_TOLERANCE) {
        return Err(Error::NonUnitaryInput {
            residual,
            tolerance: UNITARITY_TOLERANCE,
        });
    }
    let sigma = pauli();
    let jm = j.0;
    let jh = jm.adjoint();
    let mut r = Matrix3::zeros();
    for l in 0..3 {
        let conj = jm * sigma[l] * jh;
        for k in 0..3 {
            r[(k, l)] = 0.5 * (sigma[k] * conj).trace().re;
        }
    }
    Ok(RotationMatrix(r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveplateKind {
    /// Quarter-wave plate, retardation π/2.
    Quarter,
    /// Half-wave plate, retardation π.
    Half,
}

impl WaveplateKind {
    pub fn retardation(self) -> f64 {
        match self {
            WaveplateKind::Quarter => FRAC_PI_2,
            WaveplateKind::Half => PI,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            WaveplateKind::Quarter => "QWP",
            WaveplateKind::Half => "HWP",
        }
    }
}

/// Linear waveplate with its slow axis at physical azimuth `orientation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waveplate {
    pub kind: WaveplateKind,
    pub orientation: f64,
}

impl Waveplate {
    pub fn new(kind: WaveplateKind, orientation: f64) -> Self {
        Self { kind, orientation }
    }

    /// Eigenmode on the sphere: `(cos 2θ, sin 2θ, 0)`.
    pub fn stokes_axis(&self) -> StokesVector {
        let (s, c) = (2.0 * self.orientation).sin_cos();
        StokesVector::new(c, s, 0.0)
    }

    pub fn retarder(&self) -> Retarder {
        Retarder {
            axis: self.stokes_axis(),
            retardation: self.kind.retardation(),
        }
    }
}

/// Lab-frame waveplate matrix `Rot(θ)·diag(e^{−iδ/2}, e^{iδ/2})·Rot(−θ)`.
pub fn waveplate_jones(p: &Waveplate) -> JonesMatrix {
    let (s, c) = p.orientation.sin_cos();
    let rot = |s: f64| Matrix2::new(ONE * c, -ONE * s, ONE * s, ONE * c);
    let half = p.kind.retardation() / 2.0;
    let d = Matrix2::new(
        Complex64::from_polar(1.0, -half),
        ZERO,
        ZERO,
        Complex64::from_polar(1.0, half),
    );
    JonesMatrix(rot(s) * d * rot(-s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Quaternion rotation `q v q*`, independent of the Pauli route.
    fn quat_rotate(axis: [f64; 3], angle: f64, v: [f64; 3]) -> [f64; 3] {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let (s, w) = (angle / 2.0).sin_cos();
        let q = [w, s * axis[0] / n, s * axis[1] / n, s * axis[2] / n];
        let mul = |a: [f64; 4], b: [f64; 4]| {
            [
                a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
                a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
                a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
                a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
            ]
        };
        let conj = [q[0], -q[1], -q[2], -q[3]];
        let r = mul(mul(q, [0.0, v[0], v[1], v[2]]), conj);
        [r[1], r[2], r[3]]
    }

    fn assert_rot_eq(a: &RotationMatrix, b: &RotationMatrix, tol: f64) {
        assert!((a.matrix() - b.matrix()).amax() < tol, "{a:?} != {b:?}");
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Equal up to a global phase.
    fn assert_jones_eq_up_to_phase(a: &JonesMatrix, b: &JonesMatrix, tol: f64) {
        let ip: Complex64 = a
            .matrix()
            .iter()
            .zip(b.matrix().iter())
            .map(|(x, y)| x.conj() * y)
            .sum();
        let phase = Complex64::from_polar(1.0, -ip.arg());
        let diff = (b.matrix() * phase - a.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < tol, "{a:?} vs {b:?} (diff {diff})");
    }

    #[test]
    fn stokes_of_basis_states() {
        let h = JonesVector::new(c(1.0, 0.0), c(0.0, 0.0));
        let d = JonesVector::new(c(1.0, 0.0), c(1.0, 0.0));
        let r = JonesVector::new(c(1.0, 0.0), c(0.0, 1.0));
        assert_eq!(stokes_of(&h).to_array(), [1.0, 0.0, 0.0]);
        let sd = stokes_of(&d);
        assert_abs_diff_eq!(sd.s2(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sd.s1(), 0.0, epsilon = 1e-15);
        let sr = stokes_of(&r);
        assert_abs_diff_eq!(sr.s3(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sr.s2(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn from_stokes_inverts_stokes_of() {
        for s in [
            StokesVector::new(1.0, 0.0, 0.0),
            StokesVector::new(-1.0, 0.0, 0.0),
            StokesVector::new(0.3, -0.4, 0.866),
            StokesVector::new(-0.6, 0.0, -0.8),
        ] {
            let s = s.normalized().unwrap();
            let v = JonesVector::from_stokes(&s).unwrap();
            assert_abs_diff_eq!(v.power(), 1.0, epsilon = 1e-12);
            let back = stokes_of(&v);
            assert!((back.as_vector() - s.as_vector()).amax() < 1e-12);
        }
    }

    #[test]
    fn zero_retardation_is_identity() {
        let r = Retarder::new(StokesVector::horizontal(), 0.0).unwrap();
        assert_eq!(retarder_to_rotation(&r), RotationMatrix::identity());
        assert_jones_eq_up_to_phase(&retarder_to_jones(&r, 0.3), &JonesMatrix::identity(), 1e-15);
    }

    #[test]
    fn half_turn_about_s1() {
        let r = Retarder::new(StokesVector::horizontal(), PI).unwrap();
        let m = retarder_to_rotation(&r);
        let expected = RotationMatrix::from_matrix_unchecked(Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0)));
        assert_rot_eq(&m, &expected, 1e-15);
        let j = retarder_to_jones(&r, 0.0);
        let diag = JonesMatrix::from_matrix(Matrix2::new(c(0.0, -1.0), ZERO, ZERO, c(0.0, 1.0)));
        assert_jones_eq_up_to_phase(&j, &diag, 1e-15);
    }

    #[test]
    fn quarter_turn_about_s3_matches_quaternion_oracle() {
        let r = Retarder::new(StokesVector::circular(), FRAC_PI_2).unwrap();
        let out = retarder_to_rotation(&r).apply(&StokesVector::horizontal());
        let oracle = quat_rotate([0.0, 0.0, 1.0], FRAC_PI_2, [1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(oracle[1], 1.0, epsilon = 1e-15);
        for k in 0..3 {
            assert_abs_diff_eq!(out.to_array()[k], oracle[k], epsilon = 1e-15);
        }
    }

    #[test]
    fn jones_to_rotation_rejects_non_unitary() {
        let j = JonesMatrix::from_matrix(Matrix2::new(c(1.1, 0.0), ZERO, ZERO, ONE));
        assert!(matches!(jones_to_rotation(&j), Err(Error::NonUnitaryInput { .. })));
    }

    #[test]
    fn jones_to_rotation_is_phase_invariant() {
        let r = Retarder::new(StokesVector::new(0.2, -0.5, 0.7), 1.3).unwrap();
        let j = retarder_to_jones(&r, 0.0);
        let a = jones_to_rotation(&j).unwrap();
        let b = jones_to_rotation(&j.with_phase(0.7)).unwrap();
        assert_rot_eq(&a, &b, 1e-15);
        assert_eq!(jones_to_rotation(&JonesMatrix::identity()).unwrap(), RotationMatrix::identity());
    }

    #[test]
    fn jones_to_rotation_agrees_with_stokes_of() {
        let r = Retarder::new(StokesVector::new(-0.3, 0.9, 0.1), 2.2).unwrap();
        let j = retarder_to_jones(&r, 0.4);
        let rot = jones_to_rotation(&j).unwrap();
        for s in [
            StokesVector::horizontal(),
            StokesVector::diagonal(),
            StokesVector::circular(),
            StokesVector::new(0.5, 0.5, -0.7071067811865476),
        ] {
            let v = JonesVector::from_stokes(&s).unwrap();
            let direct = stokes_of(&j.apply(&v));
            let via = rot.apply(&s.normalized().unwrap());
            assert!((direct.as_vector() - via.as_vector()).amax() < 1e-12);
        }
    }

    #[test]
    fn hwp_at_theta_is_half_turn_about_azimuth_two_theta() {
        for theta in [0.0, 0.3, PI / 8.0, 1.9] {
            let rot = jones_to_rotation(&waveplate_jones(&Waveplate::new(WaveplateKind::Half, theta))).unwrap();
            let axis = [(2.0 * theta).cos(), (2.0 * theta).sin(), 0.0];
            for s in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
                let out = rot.apply(&StokesVector::new(s[0], s[1], s[2]));
                let oracle = quat_rotate(axis, PI, s);
                for k in 0..3 {
                    assert_abs_diff_eq!(out.to_array()[k], oracle[k], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn hwp_at_pi_over_8_maps_s1_to_s2() {
        let rot = jones_to_rotation(&waveplate_jones(&Waveplate::new(WaveplateKind::Half, PI / 8.0))).unwrap();
        let out = rot.apply(&StokesVector::horizontal());
        assert!((out.as_vector() - Vector3::new(0.0, 1.0, 0.0)).amax() < 1e-12);
    }

    #[test]
    fn waveplate_matrices_match_retarder_route() {
        let hwp0 = waveplate_jones(&Waveplate::new(WaveplateKind::Half, 0.0));
        let diag = JonesMatrix::from_matrix(Matrix2::new(c(0.0, -1.0), ZERO, ZERO, c(0.0, 1.0)));
        assert_jones_eq_up_to_phase(&hwp0, &diag, 1e-15);

        let qwp0 = jones_to_rotation(&waveplate_jones(&Waveplate::new(WaveplateKind::Quarter, 0.0))).unwrap();
        let expected = RotationMatrix::from_axis_angle(&StokesVector::horizontal(), FRAC_PI_2);
        assert_rot_eq(&qwp0, &expected, 1e-15);

        for kind in [WaveplateKind::Quarter, WaveplateKind::Half] {
            for theta in [-2.0, 0.1, 0.7, 3.3, 1e4] {
                let p = Waveplate::new(kind, theta);
                assert_jones_eq_up_to_phase(&waveplate_jones(&p), &retarder_to_jones(&p.retarder(), 0.0), 1e-11);
            }
        }
    }

    #[test]
    fn mapping_handles_generic_parallel_and_antipodal() {
        let cases = [
            (StokesVector::horizontal(), StokesVector::new(0.1, 0.9, -0.3)),
            (StokesVector::horizontal(), StokesVector::horizontal()),
            (StokesVector::new(0.0, 0.6, 0.8), StokesVector::new(0.0, -0.6, -0.8)),
        ];
        for (a, b) in cases {
            let r = Retarder::mapping(&a, &b).unwrap();
            let out = r.rotation().apply(&a);
            let target = b.normalized().unwrap();
            assert!((out.as_vector() - target.as_vector()).amax() < 1e-12, "{a:?} -> {b:?}");
        }
    }

    #[test]
    fn rotation_vector_near_half_turn() {
        let axis = StokesVector::new(0.3, -0.2, 0.9).normalized().unwrap();
        for angle in [PI - 1e-7, PI, 1e-9, 0.0] {
            let r = RotationMatrix::from_axis_angle(&axis, angle);
            let back = RotationMatrix::from_rotation_vector(&r.rotation_vector());
            assert_rot_eq(&r, &back, 1e-12);
        }
    }

    #[test]
    fn canonical_retardation_only_at_presentation() {
        let r = Retarder::new(StokesVector::horizontal(), 20000.0 * PI + 1.0).unwrap();
        assert_eq!(r.retardation(), 20000.0 * PI + 1.0);
        assert_abs_diff_eq!(r.canonical_retardation(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn retarder_rejects_degenerate_axis() {
        assert!(Retarder::new(StokesVector::new(0.0, 0.0, 0.0), 1.0).is_err());
        assert!(Retarder::new(StokesVector::horizontal(), f64::NAN).is_err());
    }
}
