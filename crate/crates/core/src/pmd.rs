//! DGD sections, cascade responses and PMD vectors.
//!
//! A cascade is `retarder₀, section₁, retarder₁, …, section_N, retarder_N` in
//! propagation order. Its total PMD vector is obtained two independent ways:
//!
//! * analytically, by back-rotating every section's PMD vector `τ_i·a_i`
//!   through the transposed rotations of all elements preceding it
//!   (retarders and earlier sections) and summing ([`total_pmd_analytic`]);
//! * numerically, from the frequency derivative of the cascade's Stokes
//!   rotation `R(ω)` ([`extract_pmd_fd`]).
//!
//! PMD vectors point to the slow principal state. With the Jones convention of
//! [`crate::polarization`] a section of DGD `τ` and axis `a` has retardation
//! `ω·τ`, its slow eigenmode picks up the phase `−ωτ/2` and the fast one
//! `+ωτ/2`. Group delays are `−dφ/dω` (a delay `T` multiplies a spectrum by
//! `e^{−iωT}`); the polarization-averaged delay of a section is zero.

use std::ops::{Add, AddAssign, Neg, Sub};

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frequency::FrequencyGrid;
use crate::polarization::{
    jones_to_rotation, stokes_of, JonesMatrix, JonesVector, Retarder, RotationMatrix, StokesVector,
};
use crate::PS_PER_S;

/// PMD vectors shorter than this have no defined principal states.
pub const DEGENERATE_DGD_PS: f64 = 1e-9;

/// Largest rotation between neighbouring grid points accepted by the
/// finite-difference extractors.
pub const MAX_STEP_ANGLE: f64 = 0.2;

/// Fixed-axis birefringent element, e.g. a length of polarization-maintaining
/// fibre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgdSection {
    dgd_ps: f64,
    psp_axis: StokesVector,
}

impl DgdSection {
    pub fn new(dgd_ps: f64, psp_axis: StokesVector) -> Result<Self> {
        if !(dgd_ps.is_finite() && dgd_ps >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "section DGD {dgd_ps} ps must be finite and non-negative"
            )));
        }
        let psp_axis = psp_axis.normalized().ok_or_else(|| {
            Error::InvalidConfig(format!("section PSP axis {psp_axis:?} has no direction"))
        })?;
        Ok(Self { dgd_ps, psp_axis })
    }

    pub fn dgd_ps(&self) -> f64 {
        self.dgd_ps
    }

    /// Slow principal state of the section.
    pub fn psp_axis(&self) -> StokesVector {
        self.psp_axis
    }

    pub fn pmd_vector(&self) -> PmdVector {
        PmdVector(self.psp_axis.as_vector() * self.dgd_ps)
    }

    /// Retardation `ω·τ` at angular frequency `omega` (rad/s).
    pub fn retardation(&self, omega: f64) -> f64 {
        omega * self.dgd_ps / PS_PER_S
    }

    fn retarder(&self, omega: f64) -> Retarder {
        Retarder::new(self.psp_axis, self.retardation(omega)).expect("validated section")
    }
}

/// Jones matrix of a section at angular frequency `omega` (rad/s).
pub fn section_jones(s: &DgdSection, omega: f64) -> JonesMatrix {
    s.retarder(omega).jones()
}

/// Jones matrix at `carrier + offset`, evaluated as the product of the carrier
/// and offset retardations so the offset part keeps full precision.
pub fn section_jones_offset(s: &DgdSection, carrier: f64, offset: f64) -> JonesMatrix {
    section_jones(s, carrier) * section_jones(s, offset)
}

pub fn section_rotation(s: &DgdSection, omega: f64) -> RotationMatrix {
    s.retarder(omega).rotation()
}

/// PMD vector in Stokes space, in picoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PmdVector(Vector3<f64>);

impl PmdVector {
    pub fn new(omega1: f64, omega2: f64, omega3: f64) -> Self {
        Self(Vector3::new(omega1, omega2, omega3))
    }

    pub fn zero() -> Self {
        Self(Vector3::zeros())
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    /// Differential group delay `|Ω|` in ps.
    pub fn dgd(&self) -> f64 {
        self.0.norm()
    }

    pub fn rotated(&self, r: &RotationMatrix) -> Self {
        Self(r.apply_vector(&self.0))
    }
}

impl From<Vector3<f64>> for PmdVector {
    fn from(v: Vector3<f64>) -> Self {
        Self(v)
    }
}

impl Add for PmdVector {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl AddAssign for PmdVector {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Sub for PmdVector {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Neg for PmdVector {
    type Output = Self;

    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl std::iter::Sum for PmdVector {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), Add::add)
    }
}

/// Which end of the cascade a PMD vector is referred to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Referral {
    #[default]
    Input,
    Output,
}

fn check_arity(sections: usize, retarders: usize) -> Result<()> {
    if retarders == sections + 1 {
        Ok(())
    } else {
        Err(Error::ArityMismatch { sections, retarders })
    }
}

/// Rejects a grid whose step `Δω` would turn the cascade by more than
/// `Δω·Στ/2 = 0.1 rad` between neighbouring points.
pub fn check_grid_resolution(sections: &[DgdSection], grid: &FrequencyGrid) -> Result<()> {
    let total: f64 = sections.iter().map(|s| s.dgd_ps).sum();
    let phase = grid.step() * total / PS_PER_S / 2.0;
    if phase > MAX_STEP_ANGLE / 2.0 {
        Err(Error::GridTooCoarse(format!(
            "Δω·Στ/2 = {phase:.3e} rad exceeds {} rad",
            MAX_STEP_ANGLE / 2.0
        )))
    } else {
        Ok(())
    }
}

/// End-to-end Jones matrix at every grid point for fixed retarders.
pub fn cascade_response(
    sections: &[DgdSection],
    retarders: &[Retarder],
    grid: &FrequencyGrid,
) -> Result<Vec<JonesMatrix>> {
    check_arity(sections.len(), retarders.len())?;
    let elements: Vec<JonesMatrix> = retarders.iter().map(Retarder::jones).collect();
    cascade_response_jones(sections, &elements, grid)
}

/// Same as [`cascade_response`] with arbitrary (frequency-independent) Jones
/// matrices in the `N + 1` retarder positions.
pub fn cascade_response_jones(
    sections: &[DgdSection],
    elements: &[JonesMatrix],
    grid: &FrequencyGrid,
) -> Result<Vec<JonesMatrix>> {
    check_arity(sections.len(), elements.len())?;
    let carrier: Vec<JonesMatrix> = sections
        .iter()
        .map(|s| section_jones(s, grid.center()))
        .collect();
    Ok((0..grid.len())
        .into_par_iter()
        .map(|k| {
            let offset = grid.offset(k);
            let mut m = elements[0];
            for (i, s) in sections.iter().enumerate() {
                m = carrier[i] * section_jones(s, offset) * m;
                m = elements[i + 1] * m;
            }
            m
        })
        .collect())
}

fn segments_from_rotations(
    sections: &[DgdSection],
    rotations: &[RotationMatrix],
    omega: f64,
) -> Result<Vec<PmdVector>> {
    check_arity(sections.len(), rotations.len())?;
    let mut preceding = rotations[0];
    let mut segments = Vec::with_capacity(sections.len());
    for (s, next) in sections.iter().zip(&rotations[1..]) {
        segments.push(s.pmd_vector().rotated(&preceding.transpose()));
        preceding = *next * section_rotation(s, omega) * preceding;
    }
    Ok(segments)
}

/// Input-referred total PMD vector at `omega`, by concatenation of the
/// back-rotated section vectors.
pub fn total_pmd_analytic(
    sections: &[DgdSection],
    retarders: &[Retarder],
    omega: f64,
) -> Result<PmdVector> {
    Ok(build_profile(sections, retarders, omega)?.total())
}

/// [`total_pmd_analytic`] with the retarders given as Stokes rotations.
pub fn total_pmd_from_rotations(
    sections: &[DgdSection],
    rotations: &[RotationMatrix],
    omega: f64,
) -> Result<PmdVector> {
    Ok(segments_from_rotations(sections, rotations, omega)?
        .into_iter()
        .sum())
}

/// Ordered input-referred section vectors; their chain is the DGD profile.
#[derive(Debug, Clone, PartialEq)]
pub struct DgdProfile {
    segments: Vec<PmdVector>,
    omega0: f64,
}

impl DgdProfile {
    pub fn segments(&self) -> &[PmdVector] {
        &self.segments
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn total(&self) -> PmdVector {
        self.segments.iter().copied().sum()
    }

    /// Vertices of the profile polyline, starting at the origin.
    pub fn vertices(&self) -> Vec<PmdVector> {
        let mut acc = PmdVector::zero();
        std::iter::once(acc)
            .chain(self.segments.iter().map(|s| {
                acc += *s;
                acc
            }))
            .collect()
    }
}

pub fn build_profile(
    sections: &[DgdSection],
    retarders: &[Retarder],
    omega0: f64,
) -> Result<DgdProfile> {
    check_arity(sections.len(), retarders.len())?;
    let rotations: Vec<RotationMatrix> = retarders.iter().map(Retarder::rotation).collect();
    Ok(DgdProfile {
        segments: segments_from_rotations(sections, &rotations, omega0)?,
        omega0,
    })
}

fn check_interior(responses: &[JonesMatrix], grid: &FrequencyGrid, k: usize) -> Result<()> {
    if responses.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: responses.len(),
        });
    }
    if responses.len() < 3 {
        return Err(Error::InsufficientGrid {
            needed: 3,
            got: responses.len(),
        });
    }
    if k == 0 || k + 1 >= responses.len() {
        return Err(Error::NotInterior {
            index: k,
            len: responses.len(),
        });
    }
    Ok(())
}

/// Whether a five-point stencil fits around `k`.
fn has_wide_stencil(len: usize, k: usize) -> bool {
    k >= 2 && k + 2 < len
}

/// Central derivative at `k` from samples at `k ± 1` (and `k ± 2` when
/// available, combined by Richardson extrapolation).
fn central<T, F>(len: usize, k: usize, h: f64, diff: F) -> Result<T>
where
    T: std::ops::Mul<f64, Output = T> + Sub<Output = T>,
    F: Fn(usize, usize) -> Result<T>,
{
    let d1 = diff(k + 1, k - 1)? * (1.0 / (2.0 * h));
    if has_wide_stencil(len, k) {
        let d2 = diff(k + 2, k - 2)? * (1.0 / (4.0 * h));
        Ok(d1 * (4.0 / 3.0) - d2 * (1.0 / 3.0))
    } else {
        Ok(d1)
    }
}

/// Numerical PMD vector at grid index `k` from the frequency evolution of the
/// Stokes rotation: `Ω_out` is the rotation vector of `R(ω+h)·R(ω−h)ᵀ` divided
/// by `2h`; the input-referred vector is `R(ω)ᵀ·Ω_out`.
pub fn extract_pmd_fd(
    responses: &[JonesMatrix],
    grid: &FrequencyGrid,
    k: usize,
    referral: Referral,
) -> Result<PmdVector> {
    check_interior(responses, grid, k)?;
    let rot = |i: usize| jones_to_rotation(&responses[i]);
    let here = rot(k)?;
    let step_angle = rot(k + 1)?.angle_to(&here).max(here.angle_to(&rot(k - 1)?));
    if step_angle > MAX_STEP_ANGLE {
        return Err(Error::GridTooCoarse(format!(
            "neighbouring responses differ by {step_angle:.3e} rad (limit {MAX_STEP_ANGLE})"
        )));
    }
    let omega_out = central(responses.len(), k, grid.step(), |a, b| {
        Ok((rot(a)? * rot(b)?.transpose()).rotation_vector())
    })? * PS_PER_S;
    let v = PmdVector(omega_out);
    Ok(match referral {
        Referral::Output => v,
        Referral::Input => v.rotated(&here.transpose()),
    })
}

/// Principal states and DGD of a PMD vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PspPair {
    pub slow: StokesVector,
    pub fast: StokesVector,
    pub dgd_ps: f64,
}

pub fn psp_pair(omega: &PmdVector) -> Result<PspPair> {
    let dgd_ps = omega.dgd();
    if !(dgd_ps >= DEGENERATE_DGD_PS) {
        return Err(Error::DegeneratePmd {
            dgd_ps,
            threshold_ps: DEGENERATE_DGD_PS,
        });
    }
    let slow = StokesVector::from(omega.0 / dgd_ps);
    Ok(PspPair {
        slow,
        fast: -slow,
        dgd_ps,
    })
}

/// Group delay (ps) of the field launched as `input`, read from the phase
/// `arg⟨v_out(ω_k), v_out(ω)⟩` of the output field. Only differential delay
/// is modelled, so the value is relative to the polarization-averaged delay.
pub fn launch_group_delay(
    responses: &[JonesMatrix],
    grid: &FrequencyGrid,
    input: &JonesVector,
    k: usize,
) -> Result<f64> {
    check_interior(responses, grid, k)?;
    let input = input
        .normalized()
        .ok_or_else(|| Error::InvalidConfig("launch field has zero power".into()))?;
    let reference = responses[k].apply(&input);
    let phase = |i: usize| -> Result<f64> {
        let overlap = reference.inner(&responses[i].apply(&input));
        let limit = if i.abs_diff(k) == 1 { MAX_STEP_ANGLE } else { 2.0 * MAX_STEP_ANGLE };
        if overlap.norm() < 0.5 || overlap.arg().abs() > limit {
            return Err(Error::GridTooCoarse(format!(
                "launch phase changes by {:.3e} rad between grid points",
                overlap.arg()
            )));
        }
        Ok(overlap.arg())
    };
    let dphi = central(responses.len(), k, grid.step(), |a, b| Ok(phase(a)? - phase(b)?))?;
    Ok(-dphi * PS_PER_S)
}

/// `|dŝ_out/dω|` (ps) of the output state for a fixed launch.
pub fn output_sop_derivative(
    responses: &[JonesMatrix],
    grid: &FrequencyGrid,
    input: &JonesVector,
    k: usize,
) -> Result<f64> {
    check_interior(responses, grid, k)?;
    let sop = |i: usize| *stokes_of(&responses[i].apply(input)).as_vector();
    let d = central(responses.len(), k, grid.step(), |a, b| Ok(sop(a) - sop(b)))?;
    Ok(d.norm() * PS_PER_S)
}

/// Truncated Taylor expansion of the PMD vector about ω₀. Coefficient `m` is
/// the `m`-th derivative with respect to ω in rad/ps, in units of ps^(m+1).
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorCoefficients {
    omega0: f64,
    coefficients: Vec<Vector3<f64>>,
}

impl TaylorCoefficients {
    pub fn new(omega0: f64, coefficients: Vec<Vector3<f64>>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidConfig("Taylor model needs at least one coefficient".into()));
        }
        Ok(Self { omega0, coefficients })
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn coefficients(&self) -> &[Vector3<f64>] {
        &self.coefficients
    }

    /// Series evaluated at `ω₀ + offset` (offset in rad/s).
    pub fn eval_offset(&self, offset: f64) -> PmdVector {
        let x = offset / PS_PER_S;
        let mut term = 1.0;
        let mut sum = Vector3::zeros();
        for (m, c) in self.coefficients.iter().enumerate() {
            if m > 0 {
                term *= x / m as f64;
            }
            sum += c * term;
        }
        PmdVector(sum)
    }
}

pub fn taylor_eval(c: &TaylorCoefficients, omega: f64) -> PmdVector {
    c.eval_offset(omega - c.omega0)
}

/// Finite-difference weights on nodes `x` at 0 for derivatives up to `max`
/// (Fornberg's recursion). Returns `w[derivative][node]`.
pub(crate) fn fd_weights(x: &[f64], max: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0];
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i];
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for d in (1..=mn).rev() {
                    c[d][i] = c1 * (d as f64 * c[d - 1][i - 1] - c5 * c[d][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for d in (1..=mn).rev() {
                c[d][j] = (c4 * c[d][j] - d as f64 * c[d - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Half-width of the derivative stencil used by [`taylor_fit`].
pub fn taylor_stencil_reach(order: usize) -> usize {
    order / 2 + 2
}

/// Grid points [`taylor_fit`] needs for a given order.
pub fn taylor_points_needed(order: usize) -> usize {
    2 * (taylor_stencil_reach(order) + 2) + 1
}

/// Taylor coefficients of the extracted input-referred PMD vector about the
/// grid's center point, from central differences with the grid step.
pub fn taylor_fit(
    responses: &[JonesMatrix],
    grid: &FrequencyGrid,
    order: usize,
) -> Result<TaylorCoefficients> {
    if responses.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: responses.len(),
        });
    }
    let kc = grid.center_index().ok_or_else(|| {
        Error::InvalidConfig("Taylor fit needs an odd grid with a point at ω₀".into())
    })?;
    let reach = taylor_stencil_reach(order);
    let needed = taylor_points_needed(order);
    if kc < reach + 2 || kc + reach + 2 >= grid.len() {
        return Err(Error::InsufficientGrid {
            needed,
            got: grid.len(),
        });
    }
    let samples = (kc - reach..=kc + reach)
        .map(|k| extract_pmd_fd(responses, grid, k, Referral::Input))
        .collect::<Result<Vec<_>>>()?;
    let nodes: Vec<f64> = (0..samples.len()).map(|j| j as f64 - reach as f64).collect();
    let weights = fd_weights(&nodes, order);
    let h = grid.step() / PS_PER_S;
    let mut coefficients = vec![samples[reach].0];
    for (d, w) in weights.iter().enumerate().skip(1) {
        let sum: Vector3<f64> = w.iter().zip(&samples).map(|(wj, s)| s.0 * *wj).sum();
        coefficients.push(sum / h.powi(d as i32));
    }
    TaylorCoefficients::new(grid.center(), coefficients)
}
