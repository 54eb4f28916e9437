//! Uniform angular-frequency grids around an optical carrier.
//!
//! Grid points are stored as a carrier `center` plus a small `offset`. Keeping
//! the two apart lets DGD sections evaluate their (very large) carrier phase
//! once and the offset phase exactly, so finite differences across the grid
//! are not swamped by rounding of `ω·τ ≈ 10⁵ rad`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    center: f64,
    origin: f64,
    step: f64,
    count: usize,
}

impl FrequencyGrid {
    /// Grid of `count ≥ 2` points spanning `span` rad/s symmetrically about
    /// `center` rad/s.
    pub fn new(center: f64, span: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InsufficientGrid { needed: 2, got: count });
        }
        Self::with_step(center, span / (count - 1) as f64, count)
    }

    /// Same as [`FrequencyGrid::new`] with frequencies in Hz.
    pub fn from_hz(center_hz: f64, span_hz: f64, count: usize) -> Result<Self> {
        Self::new(TAU * center_hz, TAU * span_hz, count)
    }

    pub fn with_step(center: f64, step: f64, count: usize) -> Result<Self> {
        Self::shifted(center, 0.0, step, count)
    }

    /// Grid whose middle sits at `center + origin`. Offsets are
    /// `origin + (k − (count−1)/2)·step`, so for odd `count` and `origin = 0`
    /// the middle offset is exactly zero.
    pub fn shifted(center: f64, origin: f64, step: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InsufficientGrid { needed: 2, got: count });
        }
        if !(center.is_finite() && center > 0.0) {
            return Err(Error::InvalidConfig(format!("grid center {center} rad/s must be positive")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidConfig(format!("grid step {step} rad/s must be positive")));
        }
        let lowest = center + origin - step * (count - 1) as f64 / 2.0;
        if !(origin.is_finite() && lowest > 0.0) {
            return Err(Error::InvalidConfig("grid extends to non-positive frequencies".into()));
        }
        Ok(Self { center, origin, step, count })
    }

    /// Carrier angular frequency ω₀ in rad/s.
    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn span(&self) -> f64 {
        self.step * (self.count - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// `ω_k − ω₀` in rad/s.
    pub fn offset(&self, k: usize) -> f64 {
        self.origin + (k as f64 - (self.count - 1) as f64 / 2.0) * self.step
    }

    pub fn omega(&self, k: usize) -> f64 {
        self.center + self.offset(k)
    }

    /// Index of the point at exactly ω₀, present for odd counts with zero origin.
    pub fn center_index(&self) -> Option<usize> {
        let mid = (self.count - 1) / 2;
        (self.offset(mid) == 0.0).then_some(mid)
    }

    pub fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|k| self.offset(k))
    }
}
