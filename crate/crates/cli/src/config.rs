//! Run configuration in TOML.
//!
//! Every physical quantity carries its unit in the key name (`dgd_ps`,
//! `carrier_thz`, `rate_radps`, `duration_s`, ...). A bare key such as `dgd`
//! is rejected rather than guessed. Parsing fills in every default, so the
//! serialized form of a parsed config is complete and parses back to the same
//! value.

use std::f64::consts::TAU;
use std::path::PathBuf;

use pmde_core::emulator::{
    self, EmulatorConfig, Preset, Scrambler, ZR_MAX_TO_MEAN, ZR_MEAN_DGD_PS,
};
use pmde_core::polarization::WaveplateKind;
use pmde_core::{
    BurstEnvelope, BurstProgram, DgdSection, FrequencyGrid, Retarder, ScramblerTrajectory,
    StackPlate, StokesVector, WaveplateStack,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Preset used when the config names neither a preset nor sections.
pub const DEFAULT_PRESET: &str = "highend-100";

/// Keys that name a physical quantity without a unit.
const UNITLESS_PHYSICAL_KEYS: &[&str] = &[
    "dgd",
    "carrier",
    "frequency",
    "freq",
    "rate",
    "speed",
    "orientation",
    "retardation",
    "duration",
    "start",
    "step",
    "peak",
    "ceiling",
    "span",
    "half_width",
    "dt",
    "time_origin",
    "mean_dgd",
    "delay",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub emulator: EmulatorSpec,
    pub grid: GridSpec,
    pub time: TimeSpec,
    pub stats: StatsSpec,
    pub taylor: TaylorSpec,
    pub lightning: LightningSpec,
    pub neutral: NeutralSpec,
    pub sweep: SweepSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: None,
            emulator: EmulatorSpec::default(),
            grid: GridSpec::default(),
            time: TimeSpec::default(),
            stats: StatsSpec::default(),
            taylor: TaylorSpec::default(),
            lightning: LightningSpec::default(),
            neutral: NeutralSpec::default(),
            sweep: SweepSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmulatorSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub carrier_thz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zr_mean_dgd_ps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zr_max_to_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sections: Option<Vec<SectionSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scramblers: Option<Vec<ScramblerSpec>>,
}

impl Default for EmulatorSpec {
    fn default() -> Self {
        Self {
            preset: None,
            carrier_thz: pmde_core::DEFAULT_CARRIER_HZ / 1e12,
            zr_mean_dgd_ps: None,
            zr_max_to_mean: None,
            sections: None,
            scramblers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub dgd_ps: f64,
    #[serde(default = "axis_s1")]
    pub psp_axis: [f64; 3],
}

fn axis_s1() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

fn axis_s3() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScramblerSpec {
    /// Fixed retarder; identity by default.
    Static {
        #[serde(default = "axis_s1")]
        axis: [f64; 3],
        #[serde(default)]
        retardation_rad: f64,
    },
    /// Default seven-plate stack with the given speed ceiling.
    Fig3 {
        ceiling_radps: f64,
        #[serde(default)]
        variant: usize,
        #[serde(default)]
        time_origin_s: f64,
    },
    /// Explicit list of plates.
    Plates {
        plates: Vec<PlateSpec>,
        #[serde(default)]
        time_origin_s: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlateKind {
    Qwp,
    Hwp,
}

impl From<PlateKind> for WaveplateKind {
    fn from(k: PlateKind) -> Self {
        match k {
            PlateKind::Qwp => WaveplateKind::Quarter,
            PlateKind::Hwp => WaveplateKind::Half,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateSpec {
    pub kind: PlateKind,
    #[serde(default)]
    pub orientation_rad: f64,
    #[serde(default)]
    pub rate_radps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burst: Option<BurstSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeSpec {
    #[default]
    Triangular,
    RaisedCosine,
}

impl From<EnvelopeSpec> for BurstEnvelope {
    fn from(e: EnvelopeSpec) -> Self {
        match e {
            EnvelopeSpec::Triangular => BurstEnvelope::Triangular,
            EnvelopeSpec::RaisedCosine => BurstEnvelope::RaisedCosine,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurstSpec {
    pub start_s: f64,
    pub duration_s: f64,
    pub peak_radps: f64,
    #[serde(default)]
    pub envelope: EnvelopeSpec,
    #[serde(default = "axis_s3")]
    pub axis: [f64; 3],
    #[serde(default)]
    pub headroom: f64,
}

/// Frequency grid around the carrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub step_mhz: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            step_mhz: 1.0,
            points: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSpec {
    pub start_s: f64,
    pub step_s: f64,
    pub count: usize,
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self {
            start_s: 0.0,
            step_s: 1e-6,
            count: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSpec {
    pub samples: usize,
    pub bins: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare_sections: Option<usize>,
}

impl Default for StatsSpec {
    fn default() -> Self {
        Self {
            samples: 100_000,
            bins: 100,
            compare_sections: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaylorSpec {
    pub half_width_ghz: f64,
    pub points: usize,
    pub orders: Vec<usize>,
}

impl Default for TaylorSpec {
    fn default() -> Self {
        Self {
            half_width_ghz: 500.0,
            points: 201,
            orders: vec![0, 1, 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LightningSpec {
    /// Index of the scrambler that receives the burst.
    pub scrambler: usize,
    pub peak_radps: f64,
    pub duration_s: f64,
    pub start_s: f64,
    pub envelope: EnvelopeSpec,
    pub headroom: f64,
    /// Stop the plates so the trace shows the burst alone.
    pub freeze_plates: bool,
    pub samples: usize,
    pub probes: usize,
    pub dt_s: f64,
}

impl Default for LightningSpec {
    fn default() -> Self {
        Self {
            scrambler: 0,
            peak_radps: 20e6,
            duration_s: 10e-6,
            start_s: 1e-6,
            envelope: EnvelopeSpec::Triangular,
            headroom: 0.0,
            freeze_plates: true,
            samples: 241,
            probes: 1024,
            dt_s: 1e-11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeutralSpec {
    pub half_width_ghz: f64,
    pub points: usize,
}

impl Default for NeutralSpec {
    fn default() -> Self {
        Self {
            half_width_ghz: 1000.0,
            points: 201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub dgd_ps: f64,
    pub points: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            dgd_ps: 26.0,
            points: 181,
        }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn parse_error(text: &str, message: String, span: Option<std::ops::Range<usize>>) -> CliError {
    let (line, column) = span.map_or((1, 1), |s| line_column(text, s.start));
    CliError::Parse {
        message,
        line,
        column,
    }
}

fn reject_unitless(table: &toml::Table, path: &str) -> CliResult<()> {
    for (key, value) in table {
        let here = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
        match value {
            toml::Value::Table(t) => reject_unitless(t, &here)?,
            toml::Value::Array(items) => {
                for item in items {
                    if let toml::Value::Table(t) = item {
                        reject_unitless(t, &here)?;
                    }
                }
            }
            _ if UNITLESS_PHYSICAL_KEYS.contains(&key.as_str()) => {
                return Err(CliError::Validation(format!(
                    "'{here}' is a physical quantity without a unit; use a suffixed key such as '{key}_ps', '{key}_s' or '{key}_radps'"
                )));
            }
            _ => {}
        }
    }
    Ok(())
}

/// Parses and validates a config, materializing every default.
pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    let table: toml::Table =
        toml::from_str(text).map_err(|e| parse_error(text, e.message().to_string(), e.span()))?;
    reject_unitless(&table, "")?;
    let mut cfg: RunConfig =
        toml::from_str(text).map_err(|e| parse_error(text, e.message().to_string(), e.span()))?;
    cfg.materialize()?;
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical TOML text of a config.
pub fn serialize_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("configs serialize to TOML")
}

fn stokes(axis: &[f64; 3], what: &str) -> CliResult<StokesVector> {
    StokesVector::new(axis[0], axis[1], axis[2])
        .normalized()
        .filter(|s| s.as_vector().iter().all(|c| c.is_finite()))
        .ok_or_else(|| CliError::Validation(format!("{what} axis {axis:?} has no direction")))
}

fn check(cond: bool, message: impl FnOnce() -> String) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Validation(message()))
    }
}

impl RunConfig {
    /// Fills sections and scramblers from the preset where not given.
    fn materialize(&mut self) -> CliResult<()> {
        let emu = &mut self.emulator;
        if emu.preset.is_none() && emu.sections.is_none() {
            emu.preset = Some(DEFAULT_PRESET.to_string());
        }
        let Some(name) = emu.preset.clone() else {
            if emu.scramblers.is_none() {
                let n = emu.sections.as_ref().map_or(0, Vec::len);
                emu.scramblers = Some(vec![
                    ScramblerSpec::Static {
                        axis: axis_s1(),
                        retardation_rad: 0.0,
                    };
                    n + 1
                ]);
            }
            return Ok(());
        };
        let preset: Preset = name.parse()?;
        let base = if preset == Preset::Zr {
            let mean = *emu.zr_mean_dgd_ps.get_or_insert(ZR_MEAN_DGD_PS);
            let ratio = *emu.zr_max_to_mean.get_or_insert(ZR_MAX_TO_MEAN);
            emulator::zr_config(mean, ratio)?
        } else {
            check(emu.zr_mean_dgd_ps.is_none() && emu.zr_max_to_mean.is_none(), || {
                "zr_mean_dgd_ps and zr_max_to_mean only apply to the zr preset".into()
            })?;
            preset.config()
        };
        if emu.sections.is_none() {
            emu.sections = Some(
                base.sections
                    .iter()
                    .map(|s| SectionSpec {
                        dgd_ps: s.dgd_ps(),
                        psp_axis: s.psp_axis().to_array(),
                    })
                    .collect(),
            );
        }
        if emu.scramblers.is_none() {
            let n = emu.sections.as_ref().map_or(0, Vec::len);
            emu.scramblers = Some(
                (0..=n)
                    .map(|variant| ScramblerSpec::Fig3 {
                        ceiling_radps: preset.speed_ceiling(),
                        variant,
                        time_origin_s: 0.0,
                    })
                    .collect(),
            );
        }
        Ok(())
    }

    fn validate(&self) -> CliResult<()> {
        check(self.seed <= i64::MAX as u64, || {
            format!("seed {} exceeds {}", self.seed, i64::MAX)
        })?;
        self.emulator_config()?;
        let g = &self.grid;
        check(g.step_mhz.is_finite() && g.step_mhz > 0.0, || {
            format!("grid.step_mhz = {} must be positive", g.step_mhz)
        })?;
        check(g.points >= 3, || format!("grid.points = {} must be at least 3", g.points))?;
        self.frequency_grid()?;
        let t = &self.time;
        check(t.count >= 1, || "time.count must be at least 1".into())?;
        check(t.start_s.is_finite() && t.step_s.is_finite() && t.step_s > 0.0, || {
            "time.start_s must be finite and time.step_s positive".into()
        })?;
        let s = &self.stats;
        check(s.samples >= 1 && s.bins >= 1, || {
            "stats.samples and stats.bins must be at least 1".into()
        })?;
        check(s.compare_sections.is_none_or(|n| n >= 1), || {
            "stats.compare_sections must be at least 1".into()
        })?;
        let ty = &self.taylor;
        check(ty.points >= 3 && ty.points % 2 == 1, || {
            format!("taylor.points = {} must be odd and at least 3", ty.points)
        })?;
        check(ty.half_width_ghz.is_finite() && ty.half_width_ghz > 0.0, || {
            "taylor.half_width_ghz must be positive".into()
        })?;
        check(!ty.orders.is_empty() && ty.orders.iter().all(|o| *o <= 8), || {
            "taylor.orders must list orders between 0 and 8".into()
        })?;
        self.band_grid(ty.half_width_ghz, ty.points)?;
        let l = &self.lightning;
        self.lightning_burst()?;
        check(l.samples >= 2 && l.probes >= 64, || {
            "lightning.samples must be at least 2 and lightning.probes at least 64".into()
        })?;
        check(l.dt_s.is_finite() && l.dt_s > 0.0, || "lightning.dt_s must be positive".into())?;
        check(l.scrambler < self.scrambler_count(), || {
            format!("lightning.scrambler = {} is out of range", l.scrambler)
        })?;
        let n = &self.neutral;
        check(n.points >= 2 && n.half_width_ghz.is_finite() && n.half_width_ghz > 0.0, || {
            "neutral.points must be at least 2 and neutral.half_width_ghz positive".into()
        })?;
        self.band_grid(n.half_width_ghz, n.points)?;
        let sw = &self.sweep;
        check(sw.points >= 2 && sw.dgd_ps.is_finite() && sw.dgd_ps >= 0.0, || {
            "sweep.points must be at least 2 and sweep.dgd_ps non-negative".into()
        })?;
        Ok(())
    }

    fn scrambler_count(&self) -> usize {
        self.emulator.scramblers.as_ref().map_or(0, Vec::len)
    }

    pub fn carrier_hz(&self) -> f64 {
        self.emulator.carrier_thz * 1e12
    }

    pub fn omega0(&self) -> f64 {
        TAU * self.carrier_hz()
    }

    /// Core emulator described by this config.
    pub fn emulator_config(&self) -> CliResult<EmulatorConfig> {
        let emu = &self.emulator;
        check(emu.carrier_thz.is_finite() && emu.carrier_thz > 0.0, || {
            format!("emulator.carrier_thz = {} must be positive", emu.carrier_thz)
        })?;
        let sections = emu
            .sections
            .iter()
            .flatten()
            .enumerate()
            .map(|(i, s)| {
                check(s.dgd_ps.is_finite() && s.dgd_ps >= 0.0, || {
                    format!("section {i}: dgd_ps = {} must be non-negative", s.dgd_ps)
                })?;
                Ok(DgdSection::new(s.dgd_ps, stokes(&s.psp_axis, "psp")?)?)
            })
            .collect::<CliResult<Vec<_>>>()?;
        let scramblers = emu
            .scramblers
            .iter()
            .flatten()
            .map(build_scrambler)
            .collect::<CliResult<Vec<_>>>()?;
        let mut cfg = EmulatorConfig::new(sections, scramblers)?;
        cfg.carrier_hz = self.carrier_hz();
        cfg.preset = emu.preset.as_deref().map(str::parse).transpose()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn frequency_grid(&self) -> CliResult<FrequencyGrid> {
        Ok(FrequencyGrid::with_step(
            self.omega0(),
            TAU * self.grid.step_mhz * 1e6,
            self.grid.points,
        )?)
    }

    pub fn band_grid(&self, half_width_ghz: f64, points: usize) -> CliResult<FrequencyGrid> {
        Ok(pmde_core::statistics::band_grid(
            self.carrier_hz(),
            half_width_ghz * 1e9,
            points,
        )?)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.time.count)
            .map(|i| self.time.start_s + i as f64 * self.time.step_s)
            .collect()
    }

    pub fn lightning_burst(&self) -> CliResult<BurstProgram> {
        let l = &self.lightning;
        Ok(BurstProgram::with_headroom(
            l.start_s,
            l.duration_s,
            l.peak_radps,
            l.envelope.into(),
            StokesVector::circular(),
            l.headroom,
        )?)
    }
}

fn build_scrambler(spec: &ScramblerSpec) -> CliResult<Scrambler> {
    Ok(match spec {
        ScramblerSpec::Static {
            axis,
            retardation_rad,
        } => Scrambler::Static(Retarder::new(stokes(axis, "retarder")?, *retardation_rad)?),
        ScramblerSpec::Fig3 {
            ceiling_radps,
            variant,
            time_origin_s,
        } => Scrambler::Dynamic(ScramblerTrajectory::with_origin(
            WaveplateStack::fig3(*ceiling_radps, *variant)?,
            *time_origin_s,
        )),
        ScramblerSpec::Plates {
            plates,
            time_origin_s,
        } => {
            let plates = plates
                .iter()
                .map(|p| {
                    let mut plate = StackPlate::new(p.kind.into(), p.orientation_rad, p.rate_radps);
                    if let Some(b) = &p.burst {
                        plate = plate.with_burst(BurstProgram::with_headroom(
                            b.start_s,
                            b.duration_s,
                            b.peak_radps,
                            b.envelope.into(),
                            stokes(&b.axis, "burst")?,
                            b.headroom,
                        )?);
                    }
                    Ok(plate)
                })
                .collect::<CliResult<Vec<_>>>()?;
            Scrambler::Dynamic(ScramblerTrajectory::with_origin(
                WaveplateStack::new(plates)?,
                *time_origin_s,
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_preset_config() {
        let cfg = parse_config("[emulator]\npreset = \"highend-100\"\n").unwrap();
        let emu = cfg.emulator_config().unwrap();
        assert_eq!(emu.n_sections(), 2);
        assert!(emu.sections.iter().all(|s| s.dgd_ps() == 50.0));
        assert_eq!(cfg.emulator.carrier_thz, 193.4);
        assert_eq!(cfg.grid.step_mhz, 1.0);
    }

    #[test]
    fn empty_config_uses_default_preset() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.emulator.preset.as_deref(), Some(DEFAULT_PRESET));
        assert_eq!(cfg.emulator.scramblers.as_ref().unwrap().len(), 3);
    }

    #[test]
    fn explicit_sections_override_preset() {
        let text = r#"
[emulator]
preset = "highend-20"

[[emulator.sections]]
dgd_ps = 3.0

[[emulator.sections]]
dgd_ps = 4.0
psp_axis = [0.0, 1.0, 0.0]
"#;
        let emu = parse_config(text).unwrap().emulator_config().unwrap();
        assert_eq!(emu.sections[1].dgd_ps(), 4.0);
        assert_eq!(emu.scramblers.len(), 3);
    }

    #[test]
    fn zr_preset_materializes_ratio() {
        let cfg = parse_config("[emulator]\npreset = \"zr\"\n").unwrap();
        assert_eq!(cfg.emulator.zr_max_to_mean, Some(3.0));
        let emu = cfg.emulator_config().unwrap();
        assert!(emu.sections.iter().all(|s| s.dgd_ps() == 15.0));
        let cfg = parse_config("[emulator]\npreset = \"zr\"\nzr_max_to_mean = 4.0\n").unwrap();
        assert_eq!(cfg.emulator_config().unwrap().sections[0].dgd_ps(), 20.0);
    }

    #[test]
    fn negative_dgd_is_a_validation_error() {
        let err = parse_config("[[emulator.sections]]\ndgd_ps = -1.0\n").unwrap_err();
        assert!(matches!(err, CliError::Validation(_)), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn unitless_physical_key_is_rejected() {
        let err = parse_config("[[emulator.sections]]\ndgd = 5.0\n").unwrap_err();
        assert!(matches!(err, CliError::Validation(ref m) if m.contains("dgd")), "{err}");
        let err = parse_config("[emulator]\ncarrier = 193.4\n").unwrap_err();
        assert!(matches!(err, CliError::Validation(_)));
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_config("seed = 1\n[grid]\npoints = = 3\n").unwrap_err();
        match err {
            CliError::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 1);
            }
            other => panic!("{other}"),
        }
        let err = parse_config("[grid]\npoints = 5\nbogus_hz = 1\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn unknown_preset_and_bad_arity() {
        assert!(matches!(
            parse_config("[emulator]\npreset = \"nope\"\n"),
            Err(CliError::Validation(_))
        ));
        let text = "[[emulator.sections]]\ndgd_ps = 1.0\n[[emulator.scramblers]]\nkind = \"static\"\n";
        assert!(matches!(parse_config(text), Err(CliError::Validation(_))));
    }

    #[test]
    fn scrambler_kinds_parse() {
        let text = r#"
[[emulator.sections]]
dgd_ps = 10.0

[[emulator.scramblers]]
kind = "static"
axis = [0.0, 1.0, 0.0]
retardation_rad = 1.5

[[emulator.scramblers]]
kind = "plates"

[[emulator.scramblers.plates]]
kind = "hwp"
rate_radps = 5e6

[emulator.scramblers.plates.burst]
start_s = 0.0
duration_s = 1e-5
peak_radps = 5.1e6
"#;
        let cfg = parse_config(text).unwrap();
        let emu = cfg.emulator_config().unwrap();
        assert!(matches!(emu.scramblers[0], Scrambler::Static(_)));
        let Scrambler::Dynamic(traj) = &emu.scramblers[1] else { panic!() };
        assert_eq!(traj.stack.plates()[0].burst.unwrap().peak_rate(), 5.1e6);
        assert_eq!(parse_config(&serialize_config(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn oversized_burst_is_rejected() {
        let err = parse_config("[lightning]\npeak_radps = 3e7\n").unwrap_err();
        assert!(matches!(err, CliError::Validation(_)));
        assert!(parse_config("[lightning]\npeak_radps = 3e7\nheadroom = 0.5\n").is_ok());
    }

    #[test]
    fn serialized_defaults_round_trip() {
        let cfg = parse_config("seed = 9\n[emulator]\npreset = \"zr\"\n").unwrap();
        let text = serialize_config(&cfg);
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
