use std::fs;
use std::path::Path;
use std::process::Command as Process;

use pmde_cli::config::{GridSpec, ScramblerSpec, SectionSpec};
use pmde_cli::{load_config, parse_config, run_command, serialize_config, Command, RunConfig};
use proptest::prelude::*;
use tempfile::TempDir;

const SMALL: &str = r#"
seed = 17

[emulator]
preset = "highend-50"

[time]
count = 3
step_s = 1e-7

[stats]
samples = 2000
bins = 20
compare_sections = 8

[taylor]
half_width_ghz = 100.0
points = 21

[lightning]
samples = 25
probes = 128

[neutral]
points = 21

[sweep]
points = 13
"#;

fn run_in(dir: &Path, command: Command, text: &str) -> Vec<String> {
    let mut cfg = parse_config(text).unwrap();
    cfg.output_dir = Some(dir.to_path_buf());
    run_command(command, &cfg)
        .unwrap()
        .iter()
        .map(|p| fs::read_to_string(p).unwrap())
        .collect()
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn every_command_is_byte_reproducible() {
    for command in Command::ALL {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        let first = run_in(a.path(), command, SMALL);
        let second = run_in(b.path(), command, SMALL);
        assert!(!first.is_empty());
        assert_eq!(first, second, "{command}");
    }
}

#[test]
fn exported_header_replays_the_run() {
    let dir = TempDir::new().unwrap();
    for command in [Command::Stats, Command::Profile, Command::SweepFig4] {
        let mut cfg = parse_config(SMALL).unwrap();
        cfg.output_dir = Some(dir.path().join("first"));
        let files = run_command(command, &cfg).unwrap();
        for file in &files {
            let replay_dir = dir.path().join("replay");
            let replayed = load_config(file, Some(replay_dir.clone()), None).unwrap();
            let again = run_command(command, &replayed).unwrap();
            for (x, y) in files.iter().zip(&again) {
                assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
            }
        }
    }
}

#[test]
fn identity_emulator_exports_identity_matrices() {
    let text = "[emulator]\nsections = []\n[[emulator.scramblers]]\nkind = \"static\"\n[time]\ncount = 2\n";
    let dir = TempDir::new().unwrap();
    let files = run_in(dir.path(), Command::Emulate, text);
    let rows = data_rows(&files[0]);
    assert_eq!(rows.len(), 10);
    for r in rows {
        assert_eq!(&r[3..], &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    }
    assert!(files[0].contains("time_s,freq_thz,offset_mhz,j11_re"));
}

#[test]
fn sweep_endpoints() {
    let dir = TempDir::new().unwrap();
    let rows = data_rows(&run_in(dir.path(), Command::SweepFig4, "")[0]);
    assert_eq!(rows.len(), 181);
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[0][1] - 52.0).abs() < 1e-6);
    assert!((rows[180][0] - std::f64::consts::PI).abs() < 1e-8);
    assert!(rows[180][1].abs() < 1e-6);
    for r in &rows {
        assert!((r[1] - r[3]).abs() < 1e-6);
        assert!((r[2] - r[3]).abs() < 1e-4);
    }
}

#[test]
fn seed_override_changes_stats_output() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("cfg.toml");
    fs::write(&path, SMALL).unwrap();
    let a = load_config(&path, Some(dir.path().join("a")), Some(1)).unwrap();
    let b = load_config(&path, Some(dir.path().join("b")), Some(2)).unwrap();
    let fa = run_command(Command::Stats, &a).unwrap();
    let fb = run_command(Command::Stats, &b).unwrap();
    assert_ne!(fs::read(&fa[0]).unwrap(), fs::read(&fb[0]).unwrap());
    assert!(fs::read_to_string(&fa[0]).unwrap().contains("# seed = 1"));
}

#[test]
fn binary_exit_codes_and_error_records() {
    let bin = env!("CARGO_BIN_EXE_pmde");
    let dir = TempDir::new().unwrap();
    let good = dir.path().join("good.toml");
    fs::write(&good, "[sweep]\npoints = 3\n").unwrap();
    let out = Process::new(bin)
        .args(["sweep-fig4", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/sweep_fig4.csv").exists());

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[[emulator.sections]]\ndgd_ps = -3.0\n").unwrap();
    let out = Process::new(bin).args(["emulate", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "validation");

    let coarse = dir.path().join("coarse.toml");
    fs::write(&coarse, "[grid]\nstep_mhz = 5000.0\n").unwrap();
    let out = Process::new(bin)
        .args(["emulate", "--config"])
        .arg(&coarse)
        .arg("--out")
        .arg(dir.path().join("coarse"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "runtime");

    let out = Process::new(bin).args(["nonsense", "--config", "x"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn lightning_on_static_scrambler_is_rejected() {
    let text = "[[emulator.sections]]\ndgd_ps = 1.0\n";
    let mut cfg = parse_config(text).unwrap();
    cfg.output_dir = Some(TempDir::new().unwrap().path().to_path_buf());
    let err = run_command(Command::Lightning, &cfg).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

fn arb_config() -> impl Strategy<Value = RunConfig> {
    let axis = (-1.0f64..1.0, -1.0f64..1.0, 0.1f64..1.0).prop_map(|(a, b, c)| [a, b, c]);
    let section = (0.0f64..200.0, axis.clone()).prop_map(|(dgd_ps, psp_axis)| SectionSpec { dgd_ps, psp_axis });
    let scrambler = prop_oneof![
        (axis, -7.0f64..7.0).prop_map(|(axis, retardation_rad)| ScramblerSpec::Static { axis, retardation_rad }),
        (1e3f64..2e7, 0usize..5, 0.0f64..1.0).prop_map(|(ceiling_radps, variant, time_origin_s)| {
            ScramblerSpec::Fig3 { ceiling_radps, variant, time_origin_s }
        }),
    ];
    (
        0u64..1 << 40,
        prop::collection::vec(section, 0..5),
        prop::collection::vec(scrambler, 6),
        150.0f64..250.0,
        (1e-3f64..10.0, 3usize..50),
        prop::option::of(prop_oneof![Just("highend-20"), Just("highend-200")]),
    )
        .prop_map(|(seed, sections, mut scramblers, carrier, (step, points), preset)| {
            scramblers.truncate(sections.len() + 1);
            let mut cfg = parse_config("").unwrap();
            cfg.seed = seed;
            cfg.emulator.preset = preset.map(str::to_string);
            cfg.emulator.carrier_thz = carrier;
            cfg.emulator.sections = Some(sections);
            cfg.emulator.scramblers = Some(scramblers);
            cfg.grid = GridSpec { step_mhz: step, points };
            cfg
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips_through_text(cfg in arb_config()) {
        let text = serialize_config(&cfg);
        prop_assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
