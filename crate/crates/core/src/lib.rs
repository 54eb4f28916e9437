//! Numerical model of a polarization mode dispersion emulator built from `N`
//! differential group delay (DGD) sections placed between `N + 1`
//! time-variable elliptical retarders (polarization scramblers).
//!
//! The crate is organised bottom-up:
//!
//! * [`polarization`]: Jones/Stokes calculus, waveplates, retarders and the
//!   SU(2) → SO(3) map.
//! * [`frequency`]: uniform angular-frequency grids around an optical carrier.
//! * [`pmd`]: DGD sections, cascade responses, PMD vectors (analytic
//!   concatenation and finite-difference extraction), DGD profiles, principal
//!   states and the truncated Taylor model.
//! * [`scrambler`]: rotating waveplate stacks, lightning bursts and
//!   scrambling-speed measurement.
//! * [`emulator`]: presets, neutral state, time-dependent channel evaluation.
//! * [`statistics`]: Monte-Carlo DGD statistics and Taylor-model accuracy.
//!
//! Units: DGDs and PMD vectors are in picoseconds, angular frequencies in
//! rad/s, times in seconds and Poincaré-sphere rates in rad/s.

pub mod emulator;
pub mod error;
pub mod frequency;
pub mod pmd;
pub mod polarization;
pub mod scrambler;
pub mod statistics;

pub use emulator::{EmulatorConfig, EmulatorState, Preset, Scrambler};
pub use error::{Error, Result};
pub use frequency::FrequencyGrid;
pub use pmd::{DgdProfile, DgdSection, PmdVector, PspPair, Referral, TaylorCoefficients};
pub use polarization::{
    JonesMatrix, JonesVector, Retarder, RotationMatrix, StokesVector, Waveplate, WaveplateKind,
};
pub use scrambler::{BurstEnvelope, BurstProgram, ScramblerTrajectory, StackPlate, WaveplateStack};
pub use statistics::{DgdHistogram, ModelErrorReport};

/// Default optical carrier, 193.4 THz (≈1550 nm).
pub const DEFAULT_CARRIER_HZ: f64 = 193.4e12;

/// Picoseconds per second.
pub(crate) const PS_PER_S: f64 = 1e12;
