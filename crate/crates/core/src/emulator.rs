//! The complete emulator: `N` DGD sections between `N + 1` scramblers.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::frequency::FrequencyGrid;
use crate::pmd::{
    cascade_response_jones, section_rotation, total_pmd_from_rotations, DgdSection, PmdVector,
};
use crate::polarization::{
    jones_to_rotation, JonesMatrix, JonesVector, Retarder, RotationMatrix, StokesVector,
};
use crate::scrambler::{ScramblerTrajectory, WaveplateStack};
use crate::DEFAULT_CARRIER_HZ;

/// Scrambling-speed ceiling of the high-end presets, rad/s.
pub const HIGHEND_CEILING: f64 = 20e6;
/// Scrambling-speed ceiling of the ZR preset, rad/s.
pub const ZR_CEILING: f64 = 50e3;
/// Mean DGD assumed for ZR links, ps.
pub const ZR_MEAN_DGD_PS: f64 = 10.0;
/// Default ratio of emulated maximum DGD to mean DGD for ZR.
pub const ZR_MAX_TO_MEAN: f64 = 3.0;

/// One retarder position: either a fixed retarder or a waveplate scrambler.
#[derive(Debug, Clone, PartialEq)]
pub enum Scrambler {
    Static(Retarder),
    Dynamic(ScramblerTrajectory),
}

impl Scrambler {
    pub fn jones_at(&self, t: f64) -> JonesMatrix {
        match self {
            Scrambler::Static(r) => r.jones(),
            Scrambler::Dynamic(traj) => traj.jones_at(t),
        }
    }

    pub fn rotation_at(&self, t: f64) -> RotationMatrix {
        match self {
            Scrambler::Static(r) => r.rotation(),
            Scrambler::Dynamic(traj) => traj.rotation_at(t),
        }
    }

    /// Retarder equivalent to the setting at time `t`.
    pub fn frozen(&self, t: f64) -> Retarder {
        match self {
            Scrambler::Static(r) => *r,
            Scrambler::Dynamic(traj) => Retarder::from_rotation(&traj.rotation_at(t)),
        }
    }

    /// Upper bound of the scrambling speed in rad/s.
    pub fn speed_bound(&self) -> f64 {
        match self {
            Scrambler::Static(_) => 0.0,
            Scrambler::Dynamic(traj) => traj.stack.speed_bound(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    HighEnd20,
    HighEnd50,
    HighEnd100,
    HighEnd200,
    Zr,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::HighEnd20,
        Preset::HighEnd50,
        Preset::HighEnd100,
        Preset::HighEnd200,
        Preset::Zr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::HighEnd20 => "highend-20",
            Preset::HighEnd50 => "highend-50",
            Preset::HighEnd100 => "highend-100",
            Preset::HighEnd200 => "highend-200",
            Preset::Zr => "zr",
        }
    }

    /// Maximum total DGD in ps.
    pub fn total_dgd_ps(self) -> f64 {
        match self {
            Preset::HighEnd20 => 20.0,
            Preset::HighEnd50 => 50.0,
            Preset::HighEnd100 => 100.0,
            Preset::HighEnd200 => 200.0,
            Preset::Zr => ZR_MEAN_DGD_PS * ZR_MAX_TO_MEAN,
        }
    }

    pub fn speed_ceiling(self) -> f64 {
        match self {
            Preset::Zr => ZR_CEILING,
            _ => HIGHEND_CEILING,
        }
    }

    pub fn config(self) -> EmulatorConfig {
        match self {
            Preset::Zr => zr_config(ZR_MEAN_DGD_PS, ZR_MAX_TO_MEAN).expect("valid defaults"),
            _ => equal_sections_config(2, self.total_dgd_ps() / 2.0, HIGHEND_CEILING, Some(self))
                .expect("valid preset"),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown preset '{s}'")))
    }
}

/// Static description of an emulator.
#[derive(Debug, Clone, PartialEq)]
pub struct EmulatorConfig {
    pub sections: Vec<DgdSection>,
    pub scramblers: Vec<Scrambler>,
    pub carrier_hz: f64,
    pub preset: Option<Preset>,
}

impl EmulatorConfig {
    pub fn new(sections: Vec<DgdSection>, scramblers: Vec<Scrambler>) -> Result<Self> {
        let cfg = Self {
            sections,
            scramblers,
            carrier_hz: DEFAULT_CARRIER_HZ,
            preset: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `N` sections along S1 between static retarders.
    pub fn with_static(sections: Vec<DgdSection>, retarders: Vec<Retarder>) -> Result<Self> {
        Self::new(sections, retarders.into_iter().map(Scrambler::Static).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.scramblers.len() != self.sections.len() + 1 {
            return Err(Error::InvalidConfig(format!(
                "{} sections need {} scramblers, got {}",
                self.sections.len(),
                self.sections.len() + 1,
                self.scramblers.len()
            )));
        }
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "carrier {} Hz must be positive",
                self.carrier_hz
            )));
        }
        if let Some(s) = self.sections.iter().find(|s| !(s.dgd_ps() >= 0.0)) {
            return Err(Error::InvalidConfig(format!("negative DGD {} ps", s.dgd_ps())));
        }
        Ok(())
    }

    pub fn n_sections(&self) -> usize {
        self.sections.len()
    }

    pub fn total_dgd_ps(&self) -> f64 {
        self.sections.iter().map(DgdSection::dgd_ps).sum()
    }

    /// Carrier angular frequency in rad/s.
    pub fn omega0(&self) -> f64 {
        TAU * self.carrier_hz
    }

    pub fn speed_ceiling(&self) -> f64 {
        self.scramblers
            .iter()
            .map(Scrambler::speed_bound)
            .fold(0.0, f64::max)
    }

    pub fn jones_at(&self, t: f64) -> Vec<JonesMatrix> {
        self.scramblers.iter().map(|s| s.jones_at(t)).collect()
    }

    pub fn rotations_at(&self, t: f64) -> Vec<RotationMatrix> {
        self.scramblers.iter().map(|s| s.rotation_at(t)).collect()
    }
}

/// `n` sections of `dgd_ps` each along S1, separated by seven-plate scramblers
/// with the given speed ceiling.
pub fn equal_sections_config(
    n: usize,
    dgd_ps: f64,
    ceiling: f64,
    preset: Option<Preset>,
) -> Result<EmulatorConfig> {
    let sections = (0..n)
        .map(|_| DgdSection::new(dgd_ps, StokesVector::horizontal()))
        .collect::<Result<Vec<_>>>()?;
    let scramblers = (0..=n)
        .map(|i| WaveplateStack::fig3(ceiling, i).map(|s| Scrambler::Dynamic(ScramblerTrajectory::new(s))))
        .collect::<Result<Vec<_>>>()?;
    let mut cfg = EmulatorConfig::new(sections, scramblers)?;
    cfg.preset = preset;
    Ok(cfg)
}

/// ZR emulator: two sections sharing `mean_dgd_ps · max_to_mean`, 50 krad/s
/// scramblers.
pub fn zr_config(mean_dgd_ps: f64, max_to_mean: f64) -> Result<EmulatorConfig> {
    if !(mean_dgd_ps > 0.0 && max_to_mean > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "ZR mean DGD {mean_dgd_ps} ps and ratio {max_to_mean} must be positive"
        )));
    }
    equal_sections_config(2, mean_dgd_ps * max_to_mean / 2.0, ZR_CEILING, Some(Preset::Zr))
}

pub fn preset(name: &str) -> Result<EmulatorConfig> {
    Ok(name.parse::<Preset>()?.config())
}

/// A configuration frozen at an explicit time.
#[derive(Debug, Clone, PartialEq)]
pub struct EmulatorState {
    pub config: EmulatorConfig,
    pub time: f64,
}

impl EmulatorState {
    pub fn at(&self, time: f64) -> Self {
        Self {
            config: self.config.clone(),
            time,
        }
    }

    pub fn response(&self, grid: &FrequencyGrid) -> Result<Vec<JonesMatrix>> {
        response_at(self, self.time, grid)
    }

    /// Input-referred total PMD vector at `omega`.
    pub fn pmd_at(&self, omega: f64) -> Result<PmdVector> {
        total_pmd_from_rotations(&self.config.sections, &self.config.rotations_at(self.time), omega)
    }
}

pub fn build(config: EmulatorConfig) -> Result<EmulatorState> {
    config.validate()?;
    Ok(EmulatorState { config, time: 0.0 })
}

/// Channel response over `grid` with every scrambler frozen at time `t`.
pub fn response_at(state: &EmulatorState, t: f64, grid: &FrequencyGrid) -> Result<Vec<JonesMatrix>> {
    cascade_response_jones(&state.config.sections, &state.config.jones_at(t), grid)
}

/// Retarder settings that make the device free of PMD of every order.
///
/// Sections are paired from the innermost pair outward. For each pair the
/// retarder in front of the outer section is chosen so that the whole
/// (frequency-flat) transformation between the two sections maps the first
/// slow PSP onto the second fast PSP. All other positions keep the setting the
/// configuration has at time 0.
pub fn neutral_state(config: &EmulatorConfig) -> Result<Vec<Retarder>> {
    config.validate()?;
    let n = config.n_sections();
    if n % 2 != 0 {
        return Err(Error::NeutralUnavailable(format!(
            "{n} sections cannot be paired"
        )));
    }
    let tau = config.sections.first().map_or(0.0, DgdSection::dgd_ps);
    if config.sections.iter().any(|s| s.dgd_ps() != tau) {
        return Err(Error::NeutralUnavailable("section DGDs differ".into()));
    }
    let mut retarders: Vec<Retarder> = config.scramblers.iter().map(|s| s.frozen(0.0)).collect();
    let m = n / 2;
    let mut between = RotationMatrix::identity();
    for p in 0..m {
        let left = &config.sections[m - 1 - p];
        let right = &config.sections[m + p];
        let inner = if p == 0 {
            between
        } else {
            between * retarders[m - p].rotation()
        };
        let from = inner.apply(&left.psp_axis());
        let pairing = Retarder::mapping(&from, &-right.psp_axis())?;
        retarders[m + p] = pairing;
        between = pairing.rotation() * inner;
    }
    Ok(retarders)
}

/// Copy of `config` with every scrambler replaced by its neutral setting.
pub fn neutral_config(config: &EmulatorConfig) -> Result<EmulatorConfig> {
    let retarders = neutral_state(config)?;
    Ok(EmulatorConfig {
        scramblers: retarders.into_iter().map(Scrambler::Static).collect(),
        ..config.clone()
    })
}

/// Two equal sections along S1 with a mode converter of retardation `delta`
/// about S2 in between.
pub fn mode_converter_cascade(dgd_ps: f64, delta: f64) -> Result<(Vec<DgdSection>, Vec<Retarder>)> {
    let section = DgdSection::new(dgd_ps, StokesVector::horizontal())?;
    let middle = Retarder::new(StokesVector::diagonal(), delta)?;
    Ok((
        vec![section, section],
        vec![Retarder::identity(), middle, Retarder::identity()],
    ))
}

/// Total DGD of [`mode_converter_cascade`] at the default carrier.
pub fn sweep_mode_converter(dgd_ps: f64, delta: f64) -> Result<f64> {
    let (sections, retarders) = mode_converter_cascade(dgd_ps, delta)?;
    let rotations: Vec<RotationMatrix> = retarders.iter().map(Retarder::rotation).collect();
    Ok(total_pmd_from_rotations(&sections, &rotations, TAU * DEFAULT_CARRIER_HZ)?.dgd())
}

/// Change of a section's retardation (rad) when its DGD moves between two
/// values at `carrier_hz`.
pub fn retardation_change(from_ps: f64, to_ps: f64, carrier_hz: f64) -> f64 {
    TAU * carrier_hz * (to_ps - from_ps) * 1e-12
}

/// Passes a dual-polarization spectrum through the channel at time `t`.
pub fn apply_to_signal(
    state: &EmulatorState,
    t: f64,
    grid: &FrequencyGrid,
    spectrum: &[JonesVector],
) -> Result<Vec<JonesVector>> {
    if spectrum.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: spectrum.len(),
        });
    }
    let response = response_at(state, t, grid)?;
    Ok(response.iter().zip(spectrum).map(|(j, v)| j.apply(v)).collect())
}

/// Stokes rotation of the whole device at `omega` and time `t`.
pub fn device_rotation(state: &EmulatorState, t: f64, omega: f64) -> RotationMatrix {
    let rotations = state.config.rotations_at(t);
    state
        .config
        .sections
        .iter()
        .zip(&rotations[1..])
        .fold(rotations[0], |acc, (s, r)| *r * section_rotation(s, omega) * acc)
}

/// Stokes rotation of a sampled response, for frequency-flatness checks.
pub fn response_rotations(responses: &[JonesMatrix]) -> Result<Vec<RotationMatrix>> {
    responses.iter().map(jones_to_rotation).collect()
}
