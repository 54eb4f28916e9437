//! Monte-Carlo DGD statistics and the Taylor-model accuracy study.
//!
//! Random scrambler states are Haar-uniform rotations. Draw `i` of a run with
//! seed `s` uses its own ChaCha8 stream (`seed = s`, `stream = i`), so results
//! do not depend on the number of worker threads.

use std::f64::consts::{PI, TAU};

use nalgebra::{Quaternion, UnitQuaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::function::erf::erf;

use crate::emulator::EmulatorConfig;
use crate::error::{Error, Result};
use crate::frequency::FrequencyGrid;
use crate::pmd::{
    cascade_response_jones, extract_pmd_fd, taylor_fit, taylor_points_needed,
    total_pmd_from_rotations, Referral,
};
use crate::polarization::RotationMatrix;

/// Haar-uniform random rotation.
pub fn haar_rotation<R: Rng + ?Sized>(rng: &mut R) -> RotationMatrix {
    loop {
        let q = Quaternion::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if q.norm() > 1e-12 {
            let r = UnitQuaternion::from_quaternion(q).to_rotation_matrix();
            return RotationMatrix::from_matrix_unchecked(r.into_inner());
        }
    }
}

/// Deterministic generator for draw `index` of a run seeded with `seed`.
pub fn draw_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn random_rotations(rng: &mut ChaCha8Rng, n: usize) -> Vec<RotationMatrix> {
    (0..n).map(|_| haar_rotation(rng)).collect()
}

/// `n` DGD samples (ps) with every scrambler drawn at random.
pub fn dgd_samples(config: &EmulatorConfig, n: usize, seed: u64) -> Result<Vec<f64>> {
    config.validate()?;
    if n == 0 {
        return Err(Error::InvalidConfig("sample count must be at least 1".into()));
    }
    let omega0 = config.omega0();
    let positions = config.scramblers.len();
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let rotations = random_rotations(&mut draw_rng(seed, i), positions);
            Ok(total_pmd_from_rotations(&config.sections, &rotations, omega0)?.dgd())
        })
        .collect()
}

/// DGD histogram on `[0, Στ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DgdHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub samples: Vec<f64>,
    pub seed: u64,
}

impl DgdHistogram {
    pub fn from_samples(samples: Vec<f64>, support: f64, bins: usize, seed: u64) -> Self {
        let bins = bins.max(1);
        let width = if support > 0.0 { support / bins as f64 } else { 1.0 };
        let edges = (0..=bins).map(|i| i as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        for &d in &samples {
            counts[((d / width) as usize).min(bins - 1)] += 1;
        }
        Self {
            edges,
            counts,
            samples,
            seed,
        }
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn rms(&self) -> f64 {
        (self.samples.iter().map(|d| d * d).sum::<f64>() / self.samples.len() as f64).sqrt()
    }
}

pub const DEFAULT_BINS: usize = 100;

pub fn sample_dgd(config: &EmulatorConfig, n: usize, seed: u64) -> Result<DgdHistogram> {
    sample_dgd_binned(config, n, seed, DEFAULT_BINS)
}

pub fn sample_dgd_binned(
    config: &EmulatorConfig,
    n: usize,
    seed: u64,
    bins: usize,
) -> Result<DgdHistogram> {
    let samples = dgd_samples(config, n, seed)?;
    Ok(DgdHistogram::from_samples(samples, config.total_dgd_ps(), bins, seed))
}

/// One-sample Kolmogorov-Smirnov distance to `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// CDF of `|τ₁a + τ₂b|` for two equal sections and a uniform relative angle:
/// `(x / 2τ)²` on `[0, 2τ]`.
pub fn hinge_cdf(x: f64, tau: f64) -> f64 {
    (x / (2.0 * tau)).clamp(0.0, 1.0).powi(2)
}

/// Maxwell scale parameter matched to the sample rms (`rms = √3·a`).
pub fn maxwell_scale(samples: &[f64]) -> f64 {
    let ms = samples.iter().map(|d| d * d).sum::<f64>() / samples.len() as f64;
    (ms / 3.0).sqrt()
}

pub fn maxwell_cdf(x: f64, a: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let u = x / a;
    erf(u / 2f64.sqrt()) - (2.0 / PI).sqrt() * u * (-u * u / 2.0).exp()
}

/// Mean-to-rms ratio of a Maxwellian, `√(8/3π)`.
pub fn maxwell_mean_rms_ratio() -> f64 {
    (8.0 / (3.0 * PI)).sqrt()
}

/// Histograms of a few-section and a many-section emulator with the same
/// total DGD.
#[derive(Debug, Clone, PartialEq)]
pub struct HingeComparison {
    pub few: DgdHistogram,
    pub many: DgdHistogram,
    pub ks_distance: f64,
}

pub fn hinge_vs_uniform(
    few: &EmulatorConfig,
    many: &EmulatorConfig,
    n: usize,
    seed: u64,
) -> Result<HingeComparison> {
    let (ta, tb) = (few.total_dgd_ps(), many.total_dgd_ps());
    if (ta - tb).abs() > 1e-9 * ta.max(tb) {
        return Err(Error::InvalidConfig(format!(
            "compared emulators need equal total DGD ({ta} ps vs {tb} ps)"
        )));
    }
    if few.n_sections() == many.n_sections() {
        return Err(Error::InvalidConfig("compared emulators need different section counts".into()));
    }
    let few = sample_dgd(few, n, seed)?;
    let many = sample_dgd(many, n, seed)?;
    let ks_distance = ks_two_sample(&few.samples, &many.samples);
    Ok(HingeComparison {
        few,
        many,
        ks_distance,
    })
}

/// `(|Ω̃|, |dΩ̃/dω|)` pairs (ps, ps²) under random scrambler states.
pub fn higher_order_scatter(config: &EmulatorConfig, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    config.validate()?;
    let omega0 = config.omega0();
    let total = config.total_dgd_ps().max(1e-3);
    let h = 1e-3 / total * 1e12;
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let rotations = random_rotations(&mut draw_rng(seed, i), config.scramblers.len());
            let at = |w| total_pmd_from_rotations(&config.sections, &rotations, w);
            let slope = (at(omega0 + h)? - at(omega0 - h)?).dgd() / (2.0 * h / 1e12);
            Ok((at(omega0)?.dgd(), slope))
        })
        .collect()
}

/// Error of one Taylor model against the exact channel across a band.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelErrorReport {
    pub band: FrequencyGrid,
    pub order: usize,
    /// Real parameters of the model.
    pub degrees_of_freedom: usize,
    /// `|Ω̃_taylor − Ω̃_exact|` per band point, ps.
    pub taylor_error: Vec<f64>,
    /// Error of the finite-section model itself, identically zero.
    pub exact_error: Vec<f64>,
}

impl ModelErrorReport {
    pub fn max_error(&self) -> f64 {
        self.taylor_error.iter().copied().fold(0.0, f64::max)
    }

    /// Largest error over band points with `|ω − ω₀| ≤ radius`.
    pub fn max_error_within(&self, radius: f64) -> f64 {
        self.taylor_error
            .iter()
            .enumerate()
            .filter(|(k, _)| self.band.offset(*k).abs() <= radius)
            .map(|(_, e)| *e)
            .fold(0.0, f64::max)
    }
}

/// Step (rad/s) of the fit stencil: `Δω·Στ = 0.03`.
fn taylor_step(config: &EmulatorConfig) -> f64 {
    0.03 / config.total_dgd_ps().max(1e-3) * 1e12
}

/// Compares order-`m` Taylor models of the input-referred PMD vector, fitted
/// at the band center, with the exact channel (scramblers frozen at time 0).
/// The exact value at each band point is extracted on a five-point stencil
/// with the same step as the fit, so both share the extraction bias.
pub fn taylor_accuracy(
    config: &EmulatorConfig,
    band: &FrequencyGrid,
    orders: &[usize],
) -> Result<Vec<ModelErrorReport>> {
    config.validate()?;
    let Some(&max_order) = orders.iter().max() else {
        return Ok(Vec::new());
    };
    let elements = config.jones_at(0.0);
    let h = taylor_step(config);
    let fit_grid = FrequencyGrid::with_step(band.center(), h, taylor_points_needed(max_order))?;
    let fit_resp = cascade_response_jones(&config.sections, &elements, &fit_grid)?;
    let exact = (0..band.len())
        .into_par_iter()
        .map(|k| {
            let local = FrequencyGrid::shifted(band.center(), band.offset(k), h, 5)?;
            let resp = cascade_response_jones(&config.sections, &elements, &local)?;
            extract_pmd_fd(&resp, &local, 2, Referral::Input)
        })
        .collect::<Result<Vec<_>>>()?;
    orders
        .iter()
        .map(|&order| {
            let coeffs = taylor_fit(&fit_resp, &fit_grid, order)?;
            let taylor_error = exact
                .iter()
                .enumerate()
                .map(|(k, e)| (coeffs.eval_offset(band.offset(k)) - *e).dgd())
                .collect();
            Ok(ModelErrorReport {
                band: band.clone(),
                order,
                degrees_of_freedom: 3 * (order + 1),
                taylor_error,
                exact_error: vec![0.0; band.len()],
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`, over pairs with both positive.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Band grid of `count` points spanning `±half_width_hz` around `carrier_hz`.
pub fn band_grid(carrier_hz: f64, half_width_hz: f64, count: usize) -> Result<FrequencyGrid> {
    FrequencyGrid::new(TAU * carrier_hz, 2.0 * TAU * half_width_hz, count)
}
