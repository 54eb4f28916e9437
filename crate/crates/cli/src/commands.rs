use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pmde_core::emulator::{
    self, mode_converter_cascade, neutral_state, response_at, EmulatorConfig, Scrambler,
};
use pmde_core::pmd::{
    build_profile, cascade_response, cascade_response_jones, check_grid_resolution,
    extract_pmd_fd, psp_pair, total_pmd_from_rotations, Referral,
};
use pmde_core::polarization::jones_to_rotation;
use pmde_core::scrambler::max_sop_speed;
use pmde_core::statistics::{
    hinge_cdf, hinge_vs_uniform, ks_statistic, maxwell_cdf, maxwell_scale, sample_dgd_binned,
    taylor_accuracy, DgdHistogram,
};
use pmde_core::{DgdSection, Retarder, ScramblerTrajectory, StokesVector};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::export::{render_json, round9, round9_vec, write_file, CsvTable, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Jones matrices and PMD vectors over the frequency and time grids.
    Emulate,
    /// DGD profile at the start time.
    Profile,
    /// DGD histogram under random scrambler states.
    Stats,
    /// Taylor-model error against the exact channel.
    Taylor,
    /// Scrambling-speed trace of a lightning burst.
    Lightning,
    /// Neutral retarder settings and their frequency flatness.
    Neutral,
    /// Total DGD of two sections against mode-converter retardation.
    SweepFig4,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Emulate,
        Command::Profile,
        Command::Stats,
        Command::Taylor,
        Command::Lightning,
        Command::Neutral,
        Command::SweepFig4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Emulate => "emulate",
            Command::Profile => "profile",
            Command::Stats => "stats",
            Command::Taylor => "taylor",
            Command::Lightning => "lightning",
            Command::Neutral => "neutral",
            Command::SweepFig4 => "sweep-fig4",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Validation(format!("unknown command '{s}'")))
    }
}

/// Runs one command and returns the files it wrote.
pub fn run_command(command: Command, cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let prov = Provenance::new(command.name(), cfg);
    let run = Run {
        cfg,
        prov: &prov,
        dir: &dir,
    };
    match command {
        Command::Emulate => run.emulate(),
        Command::Profile => run.profile(),
        Command::Stats => run.stats(),
        Command::Taylor => run.taylor(),
        Command::Lightning => run.lightning(),
        Command::Neutral => run.neutral(),
        Command::SweepFig4 => run.sweep_fig4(),
    }
}

struct Run<'a> {
    cfg: &'a RunConfig,
    prov: &'a Provenance,
    dir: &'a Path,
}

fn thz(omega: f64) -> f64 {
    omega / TAU / 1e12
}

fn axis_json(s: &StokesVector) -> Value {
    round9_vec(&s.to_array())
}

/// The configured emulator with every scrambler frozen at `t`.
fn frozen(emu: &EmulatorConfig, t: f64) -> CliResult<EmulatorConfig> {
    let mut cfg = EmulatorConfig::with_static(
        emu.sections.clone(),
        emu.scramblers.iter().map(|s| s.frozen(t)).collect(),
    )?;
    cfg.carrier_hz = emu.carrier_hz;
    Ok(cfg)
}

impl Run<'_> {
    fn csv(&self, name: &str, table: &CsvTable) -> CliResult<PathBuf> {
        write_file(self.dir, name, &table.render(self.prov))
    }

    fn json(&self, name: &str, data: Value) -> CliResult<PathBuf> {
        write_file(self.dir, name, &render_json(self.prov, data))
    }

    fn emulate(&self) -> CliResult<Vec<PathBuf>> {
        let state = emulator::build(self.cfg.emulator_config()?)?;
        let grid = self.cfg.frequency_grid()?;
        check_grid_resolution(&state.config.sections, &grid)?;
        let mut jones = CsvTable::new(&[
            "time_s", "freq_thz", "offset_mhz", "j11_re", "j11_im", "j12_re", "j12_im", "j21_re",
            "j21_im", "j22_re", "j22_im",
        ]);
        let mut pmd = CsvTable::new(&[
            "time_s", "freq_thz", "pmd1_ps", "pmd2_ps", "pmd3_ps", "dgd_ps", "dgd_fd_ps",
        ]);
        let k = grid.len() / 2;
        for t in self.cfg.times() {
            let resp = response_at(&state, t, &grid)?;
            for (i, j) in resp.iter().enumerate() {
                let mut row = vec![t, thz(grid.omega(i)), grid.offset(i) / TAU / 1e6];
                row.extend(j.entries().iter().flat_map(|c| [c.re, c.im]));
                jones.push(row);
            }
            let omega = state.at(t).pmd_at(grid.omega(k))?;
            let fd = extract_pmd_fd(&resp, &grid, k, Referral::Input)?;
            let [a, b, c] = omega.to_array();
            pmd.push(vec![t, thz(grid.omega(k)), a, b, c, omega.dgd(), fd.dgd()]);
        }
        Ok(vec![self.csv("jones.csv", &jones)?, self.csv("pmd.csv", &pmd)?])
    }

    fn profile(&self) -> CliResult<Vec<PathBuf>> {
        let t = self.cfg.time.start_s;
        let emu = self.cfg.emulator_config()?;
        let retarders: Vec<Retarder> = emu.scramblers.iter().map(|s| s.frozen(t)).collect();
        let profile = build_profile(&emu.sections, &retarders, emu.omega0())?;
        let total = profile.total();
        let psp = psp_pair(&total).ok().map(|p| {
            json!({ "slow": axis_json(&p.slow), "fast": axis_json(&p.fast) })
        });
        let data = json!({
            "time_s": round9(t),
            "carrier_thz": round9(emu.carrier_hz / 1e12),
            "segments_ps": profile.segments().iter().map(|s| round9_vec(&s.to_array())).collect::<Vec<_>>(),
            "vertices_ps": profile.vertices().iter().map(|s| round9_vec(&s.to_array())).collect::<Vec<_>>(),
            "total_ps": round9_vec(&total.to_array()),
            "dgd_ps": round9(total.dgd()),
            "section_dgd_sum_ps": round9(emu.total_dgd_ps()),
            "psp": psp,
        });
        Ok(vec![self.json("profile.json", data)?])
    }

    fn histogram_table(h: &DgdHistogram) -> CsvTable {
        let mut table = CsvTable::new(&["bin_lo_ps", "bin_hi_ps", "count"]);
        for (i, c) in h.counts.iter().enumerate() {
            table.push(vec![h.edges[i], h.edges[i + 1], *c as f64]);
        }
        table
    }

    fn stats(&self) -> CliResult<Vec<PathBuf>> {
        let s = &self.cfg.stats;
        let emu = self.cfg.emulator_config()?;
        let h = sample_dgd_binned(&emu, s.samples, self.cfg.seed, s.bins)?;
        let a = maxwell_scale(&h.samples);
        let mut summary = json!({
            "samples": h.sample_count(),
            "sections": emu.n_sections(),
            "total_dgd_ps": round9(emu.total_dgd_ps()),
            "mean_ps": round9(h.mean()),
            "rms_ps": round9(h.rms()),
            "max_ps": round9(h.max()),
            "mean_over_rms": round9(h.mean() / h.rms()),
            "maxwell_scale_ps": round9(a),
            "ks_maxwell": round9(ks_statistic(&h.samples, |x| maxwell_cdf(x, a))),
        });
        let taus: Vec<f64> = emu.sections.iter().map(DgdSection::dgd_ps).collect();
        if taus.len() == 2 && taus[0] == taus[1] && taus[0] > 0.0 {
            summary["ks_two_section_law"] =
                round9(ks_statistic(&h.samples, |x| hinge_cdf(x, taus[0])));
        }
        let mut files = vec![self.csv("dgd_histogram.csv", &Self::histogram_table(&h))?];
        if let Some(n) = s.compare_sections {
            let many = EmulatorConfig::with_static(
                vec![DgdSection::new(emu.total_dgd_ps() / n as f64, StokesVector::horizontal())?; n],
                vec![Retarder::identity(); n + 1],
            )?;
            let cmp = hinge_vs_uniform(&emu, &many, s.samples, self.cfg.seed)?;
            let many_hist = DgdHistogram::from_samples(
                cmp.many.samples,
                many.total_dgd_ps(),
                s.bins,
                self.cfg.seed,
            );
            summary["compare_sections"] = json!(n);
            summary["ks_between"] = round9(cmp.ks_distance);
            files.push(self.csv("dgd_histogram_compare.csv", &Self::histogram_table(&many_hist))?);
        }
        files.push(self.json("dgd_summary.json", summary)?);
        Ok(files)
    }

    fn taylor(&self) -> CliResult<Vec<PathBuf>> {
        let ty = &self.cfg.taylor;
        let emu = frozen(&self.cfg.emulator_config()?, self.cfg.time.start_s)?;
        let band = self.cfg.band_grid(ty.half_width_ghz, ty.points)?;
        let reports = taylor_accuracy(&emu, &band, &ty.orders)?;
        let mut columns = vec!["offset_ghz".to_string(), "freq_thz".into(), "exact_error_ps".into()];
        columns.extend(ty.orders.iter().map(|m| format!("order{m}_error_ps")));
        let names: Vec<&str> = columns.iter().map(String::as_str).collect();
        let mut table = CsvTable::new(&names);
        for k in 0..band.len() {
            let mut row = vec![band.offset(k) / TAU / 1e9, thz(band.omega(k)), 0.0];
            row.extend(reports.iter().map(|r| r.taylor_error[k]));
            table.push(row);
        }
        let inner = band.span() / 10.0;
        let summary: Vec<Value> = reports
            .iter()
            .map(|r| {
                json!({
                    "order": r.order,
                    "degrees_of_freedom": r.degrees_of_freedom,
                    "max_error_ps": round9(r.max_error()),
                    "max_error_inner_ps": round9(r.max_error_within(inner)),
                    "exact_max_error_ps": round9(r.exact_error.iter().copied().fold(0.0, f64::max)),
                })
            })
            .collect();
        Ok(vec![
            self.csv("taylor_error.csv", &table)?,
            self.json("taylor_summary.json", json!({ "half_width_ghz": round9(ty.half_width_ghz), "orders": summary }))?,
        ])
    }

    fn lightning(&self) -> CliResult<Vec<PathBuf>> {
        let l = &self.cfg.lightning;
        let emu = self.cfg.emulator_config()?;
        let Scrambler::Dynamic(traj) = &emu.scramblers[l.scrambler] else {
            return Err(CliError::Validation(format!(
                "lightning.scrambler = {} is a static retarder; a waveplate scrambler is needed",
                l.scrambler
            )));
        };
        let mut stack = traj.stack.clone();
        if l.freeze_plates {
            for p in stack.plates_mut() {
                p.rate = 0.0;
            }
        }
        let burst = self.cfg.lightning_burst()?;
        let at = stack.hwp_index().unwrap_or(stack.plates().len() - 1);
        stack.plates_mut()[at].burst = Some(burst);
        let traj = ScramblerTrajectory::with_origin(stack, traj.time_origin_s);
        let before = traj.rotation_at(l.start_s);
        let mut table = CsvTable::new(&["time_s", "burst_rate_radps", "speed_radps", "displacement_rad"]);
        let t_lo = l.start_s - 0.1 * l.duration_s;
        let span = 1.2 * l.duration_s;
        let mut peak = 0.0f64;
        for i in 0..l.samples {
            let t = t_lo + span * i as f64 / (l.samples - 1) as f64;
            let speed = max_sop_speed(&traj, t, l.dt_s, l.probes)?;
            peak = peak.max(speed);
            let moved = traj.rotation_at(t).angle_to(&before);
            table.push(vec![t, burst.rate_at(t), speed, moved]);
        }
        let end = traj.rotation_at(l.start_s + l.duration_s).angle_to(&before);
        let summary = json!({
            "configured_peak_radps": round9(l.peak_radps),
            "measured_peak_radps": round9(peak),
            "final_displacement_rad": round9(end),
            "plates_frozen": l.freeze_plates,
        });
        Ok(vec![
            self.csv("lightning_trace.csv", &table)?,
            self.json("lightning_summary.json", summary)?,
        ])
    }

    fn neutral(&self) -> CliResult<Vec<PathBuf>> {
        let n = &self.cfg.neutral;
        let emu = self.cfg.emulator_config()?;
        let retarders = neutral_state(&emu)?;
        let rotations: Vec<_> = retarders.iter().map(Retarder::rotation).collect();
        let band = self.cfg.band_grid(n.half_width_ghz, n.points)?;
        let elements: Vec<_> = retarders.iter().map(Retarder::jones).collect();
        let resp = cascade_response_jones(&emu.sections, &elements, &band)?;
        let reference = jones_to_rotation(&resp[band.len() / 2])?;
        let mut table = CsvTable::new(&["offset_ghz", "freq_thz", "dgd_ps", "flatness_rad"]);
        let (mut worst_dgd, mut worst_flat) = (0.0f64, 0.0f64);
        for (k, j) in resp.iter().enumerate() {
            let dgd = total_pmd_from_rotations(&emu.sections, &rotations, band.omega(k))?.dgd();
            let flat = jones_to_rotation(j)?.angle_to(&reference);
            worst_dgd = worst_dgd.max(dgd);
            worst_flat = worst_flat.max(flat);
            table.push(vec![band.offset(k) / TAU / 1e9, thz(band.omega(k)), dgd, flat]);
        }
        let fine = self.cfg.frequency_grid()?;
        let fine_resp = cascade_response(&emu.sections, &retarders, &fine)?;
        let fd = extract_pmd_fd(&fine_resp, &fine, fine.len() / 2, Referral::Input)?;
        let settings: Vec<Value> = retarders
            .iter()
            .map(|r| json!({ "axis": axis_json(&r.axis()), "retardation_rad": round9(r.canonical_retardation()) }))
            .collect();
        let summary = json!({
            "retarders": settings,
            "max_dgd_ps": round9(worst_dgd),
            "max_flatness_rad": round9(worst_flat),
            "dgd_fd_ps_at_carrier": round9(fd.dgd()),
        });
        Ok(vec![
            self.csv("neutral_check.csv", &table)?,
            self.json("neutral_settings.json", summary)?,
        ])
    }

    fn sweep_fig4(&self) -> CliResult<Vec<PathBuf>> {
        let sw = &self.cfg.sweep;
        let grid = self.cfg.frequency_grid()?;
        let k = grid.len() / 2;
        let mut table = CsvTable::new(&["delta_rad", "dgd_ps", "dgd_fd_ps", "closed_form_ps"]);
        for i in 0..sw.points {
            let delta = PI * (i as f64 / (sw.points - 1) as f64);
            let (sections, retarders) = mode_converter_cascade(sw.dgd_ps, delta)?;
            let rotations: Vec<_> = retarders.iter().map(Retarder::rotation).collect();
            let analytic = total_pmd_from_rotations(&sections, &rotations, grid.omega(k))?.dgd();
            let resp = cascade_response(&sections, &retarders, &grid)?;
            let fd = extract_pmd_fd(&resp, &grid, k, Referral::Input)?.dgd();
            let closed = 2.0 * sw.dgd_ps * (delta / 2.0).cos().abs();
            table.push(vec![delta, analytic, fd, closed]);
        }
        Ok(vec![self.csv("sweep_fig4.csv", &table)?])
    }
}
