//! End-to-end acceptance suite for the shipped scenarios. Each test prints
//! one PASS line with the measured values so a full run doubles as a
//! scoreboard. Thresholds marked "frozen" were fixed from oracle runs of
//! this implementation and are documented in the README.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use serde_json::Value;
use tempfile::tempdir;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_rdgmti")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run_ok(args: &[&str]) -> String {
    let out = Command::new(bin())
        .args(args)
        .output()
        .expect("failed to spawn rdgmti");
    assert!(
        out.status.success(),
        "rdgmti {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn f64_field(report: &Value, key: &str) -> f64 {
    report[key]
        .as_f64()
        .unwrap_or_else(|| panic!("report field {key} missing or null: {report}"))
}

/// simulate + process one scenario/method, returning the report and the
/// combined wall time of the two commands.
fn sim_process(cfg: &Path, method: &str, dir: &Path) -> (Value, f64) {
    let cube = dir.join("cube.rdc");
    let image = dir.join("image");
    let report = dir.join("report.json");
    let t0 = Instant::now();
    run_ok(&["simulate", "--config", cfg.to_str().unwrap(), "--out", cube.to_str().unwrap()]);
    run_ok(&[
        "process",
        "--in",
        cube.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--method",
        method,
        "--out-image",
        image.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    let elapsed = t0.elapsed().as_secs_f64();
    (read_report(&report), elapsed)
}

#[test]
fn criterion_1_cancellation_null_quadratic_model() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("clutter_quadratic.cfg");
    let mut text = std::fs::read_to_string(configs().join("clutter_only.cfg")).unwrap();
    text.push_str("sim.phase_model = quadratic\n");
    std::fs::write(&cfg, text).unwrap();
    let (report, secs) = sim_process(&cfg, "proposed", dir.path());
    let residual = f64_field(&report, "residual_db");
    // frozen oracle threshold; measured -32.86 dB on the shipped scene
    assert!(residual <= -30.0, "quadratic-model residual {residual} dB > -30 dB");
    assert!(secs < 10.0, "runtime {secs:.1} s >= 10 s");
    println!("criterion 1: PASS (quadratic-model clutter residual {residual:.2} dB <= -30 dB, {secs:.1} s)");
}

#[test]
fn criterion_2_cancellation_null_exact_model() {
    let dir = tempdir().unwrap();
    let cfg = configs().join("clutter_only.cfg");
    let (report, secs) = sim_process(&cfg, "proposed", dir.path());
    let residual = f64_field(&report, "residual_db");
    // frozen oracle threshold; measured -32.80 dB on the shipped scene
    assert!(residual <= -30.0, "exact-model residual {residual} dB > -30 dB");
    assert!(secs < 10.0, "runtime {secs:.1} s >= 10 s");
    println!("criterion 2: PASS (exact-model clutter residual {residual:.2} dB <= -30 dB, {secs:.1} s)");
}

#[test]
fn criterion_3_mover_retention() {
    let dir = tempdir().unwrap();
    let cfg = configs().join("mover_only.cfg");
    let (report, secs) = sim_process(&cfg, "proposed", dir.path());
    let retention = f64_field(&report, "mover_retention");
    assert!(retention >= 0.5, "mover gate retained only {retention:.3} of its energy");
    assert!(secs < 10.0, "runtime {secs:.1} s >= 10 s");
    println!("criterion 3: PASS (mover-gate retention {retention:.3} >= 0.5, {secs:.1} s)");
}

#[test]
fn criterion_4_spacing_sensitivity() {
    let dir_a = tempdir().unwrap();
    let dir_b = tempdir().unwrap();
    let (prop_a, _) = sim_process(&configs().join("sim_a.cfg"), "proposed", dir_a.path());
    let (dpca_a, _) = sim_process(&configs().join("sim_a.cfg"), "dpca", dir_a.path());
    let (prop_b, _) = sim_process(&configs().join("sim_b.cfg"), "proposed", dir_b.path());
    let (dpca_b, _) = sim_process(&configs().join("sim_b.cfg"), "dpca", dir_b.path());
    let gap_dpca = f64_field(&dpca_a, "if_db") - f64_field(&dpca_b, "if_db");
    let gap_prop = f64_field(&prop_a, "if_db") - f64_field(&prop_b, "if_db");
    // ordering-based thresholds frozen from oracle runs: measured
    // gap_dpca = 16.92 dB, gap_prop = 8.98 dB
    assert!(gap_dpca > 15.0, "DPCA spacing gap {gap_dpca:.2} dB <= 15 dB");
    assert!(gap_prop < 10.0, "proposed spacing gap {gap_prop:.2} dB >= 10 dB");
    assert!(
        gap_dpca > gap_prop + 5.0,
        "spacing hurt DPCA ({gap_dpca:.2} dB) barely more than proposed ({gap_prop:.2} dB)"
    );
    println!(
        "criterion 4: PASS (spacing gap: dpca {gap_dpca:.2} dB > 15, proposed {gap_prop:.2} dB < 10)"
    );
}

#[test]
fn criterion_5_method_ordering() {
    let dir = tempdir().unwrap();
    let (prop, _) = sim_process(&configs().join("sim_a.cfg"), "proposed", dir.path());
    let (dpca, _) = sim_process(&configs().join("sim_a.cfg"), "dpca", dir.path());
    let if_prop = f64_field(&prop, "if_db");
    let if_dpca = f64_field(&dpca, "if_db");
    assert!(if_prop > if_dpca, "IF(proposed) {if_prop:.2} <= IF(dpca) {if_dpca:.2}");
    assert!(if_prop >= 20.0, "IF(proposed) {if_prop:.2} dB < 20 dB over the no-suppression baseline");
    println!(
        "criterion 5: PASS (IF proposed {if_prop:.2} dB > dpca {if_dpca:.2} dB, and >= 20 dB over none)"
    );
}

/// Short-aperture desk scene used for the velocity scan: near statics and
/// a range mover whose zero-Doppler crossing sits inside the aperture.
const SCAN_SCENE: &str = "\
radar.f0_hz = 2.7e9
radar.bandwidth_hz = 500e6
radar.pulse_width_s = 1e-6
radar.prf_hz = 97.5
radar.fs_hz = 600e6
array.n_rx = 2
array.d_m = 0.06
array.dr_m = 0.06
platform.vp_mps = 3
platform.x_start_m = 5
wall.dw_m = 0.24
wall.epsr = 4
target.1.x_m = 1
target.1.y_m = 10
target.1.refl_re = 10
target.1.behind_wall = true
target.2.x_m = 9
target.2.y_m = 11
target.2.refl_re = 10
target.2.behind_wall = true
target.3.x_m = 5
target.3.y_m = 26
target.3.vy_mps = 1
target.3.refl_re = 0.5
target.3.behind_wall = true
grid.n_pulses = 128
sim.snr_db = 50
sim.noise_seed = 7
suppress.kappa = 0.1
imaging.vy_mps = 1
";

#[test]
fn criterion_6_velocity_scan_monotonic() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("scan_scene.cfg");
    std::fs::write(&cfg, SCAN_SCENE).unwrap();
    let cube = dir.path().join("cube.rdc");
    let csv_path = dir.path().join("scan.csv");
    run_ok(&["simulate", "--config", cfg.to_str().unwrap(), "--out", cube.to_str().unwrap()]);
    run_ok(&[
        "scan",
        "--in",
        cube.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--vy",
        "0,0.3,0.6,0.9",
        "--report",
        csv_path.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let ifs: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ifs.len(), 4, "expected 4 scan rows in:\n{csv}");
    for w in ifs.windows(2) {
        assert!(
            w[1] >= w[0],
            "IF decreased along the scan toward the true velocity: {ifs:?}"
        );
    }
    println!(
        "criterion 6: PASS (IF over assumed vy non-decreasing: {:.2} -> {:.2} -> {:.2} -> {:.2} dB)",
        ifs[0], ifs[1], ifs[2], ifs[3]
    );
}

mod focusing {
    use rdgmti::echo::{auto_grid, synthesize_compressed, PhaseModel};
    use rdgmti::imaging::{focus, rcmc, ImagingConfig, RcmcMode};
    use rdgmti::scene::*;
    use rdgmti::suppress::to_range_doppler;

    /// Range mover whose Doppler history fills the sampled band: the PRF is
    /// matched to the chirp rate so matched filtering realizes nearly the
    /// full coherent gain, and the zero-Doppler crossing sits on a pulse.
    fn mover_scene(bandwidth_hz: f64, fs_hz: f64) -> Scene {
        Scene {
            radar: RadarParams {
                f0_hz: 2.7e9,
                bandwidth_hz,
                pulse_width_s: 1e-6,
                prf_hz: 43.0,
                fs_hz,
            },
            array: ArrayGeometry {
                n_rx: 2,
                spacing_m: 0.06,
                tx_offset_m: 0.0,
                indexing: RxIndexing::FromFirst,
            },
            platform: PlatformState {
                velocity_mps: 3.0,
                altitude_m: 0.0,
                x_start_m: 5.0,
                jitter_std_m: 0.0,
                jitter_seed: 0,
            },
            wall: WallModel { thickness_m: 0.0, rel_permittivity: 1.0 },
            targets: vec![Target {
                // x - x_start = (y * vy) / vp centers the Doppler band
                x_m: 5.0 + 13.0 / 3.0,
                y_m: 13.0,
                vx_mps: 0.0,
                vy_mps: 1.0,
                reflectivity_re: 1.0,
                reflectivity_im: 0.0,
                behind_wall: false,
            }],
            beam_center_offset_s: 0.0,
            aperture_s: 3.0,
        }
    }

    #[test]
    fn criterion_7_focus_gain_and_rcmc() {
        let n = 128usize;

        // Part 1: matched-filter gain, with range bins coarse enough that
        // the envelope stays in one bin and the azimuth chirp is isolated.
        let scene = mover_scene(10e6, 25e6);
        let grid = auto_grid(&scene, n).unwrap();
        let cube = synthesize_compressed(&scene, &grid, PhaseModel::Quadratic).unwrap();
        let single = cube.extract_channel(0);
        let unfocused_peak = single
            .data
            .iter()
            .map(|c| c.norm_sqr())
            .fold(0.0f64, f64::max);
        let config = ImagingConfig { vy_mps: 1.0, ..Default::default() };
        let image = focus(&single, &scene.platform, &config).unwrap();
        let focused_peak = image
            .data
            .iter()
            .map(|c| c.norm_sqr())
            .fold(0.0f64, f64::max);
        let gain = focused_peak / unfocused_peak;
        let floor = 0.8 * n as f64;
        assert!(gain >= floor, "focusing gain {gain:.1} < {floor:.1} (0.8 n)");

        // Part 2: RCMC concentration, with fine range bins so the raw
        // migration spans several of them.
        let scene = mover_scene(500e6, 600e6);
        let grid = auto_grid(&scene, n).unwrap();
        let cube = synthesize_compressed(&scene, &grid, PhaseModel::Quadratic).unwrap();
        let single = cube.extract_channel(0);
        let rd = to_range_doppler(&single).unwrap();
        let cfg = ImagingConfig {
            vy_mps: 1.0,
            rcmc_mode: RcmcMode::PerBin,
            ..Default::default()
        };
        let corrected = rcmc(&rd, &scene.platform, &cfg).unwrap();
        let n_fast = grid.n_fast;
        let energy_profile = |cube: &rdgmti::DataCube| -> Vec<f64> {
            let mut energy = vec![0.0f64; n_fast];
            for m in 0..n {
                for (e, s) in energy.iter_mut().zip(cube.pulse(0, m)) {
                    *e += s.norm_sqr();
                }
            }
            energy
        };
        let energy = energy_profile(&corrected);
        let total: f64 = energy.iter().sum();
        let apex = energy
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        let within: f64 = energy[apex.saturating_sub(1)..(apex + 2).min(n_fast)]
            .iter()
            .sum();
        let fraction = within / total;
        assert!(fraction >= 0.9, "only {fraction:.3} of mover energy within +-1 bin after RCMC");

        // sanity: without RCMC the migration really does spread the energy
        let raw = energy_profile(&rd);
        let raw_total: f64 = raw.iter().sum();
        let raw_apex = raw.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        let raw_within: f64 =
            raw[raw_apex.saturating_sub(1)..(raw_apex + 2).min(n_fast)].iter().sum();
        assert!(raw_within / raw_total < 0.9, "scene has no measurable migration");

        println!(
            "criterion 7: PASS (focus gain {gain:.1} >= {floor:.1}, RCMC fraction {fraction:.3} >= 0.9)"
        );
    }
}

mod identities {
    use rdgmti::cube::{DataCube, Domain, SamplingGrid, Waveform};
    use rdgmti::Complex64;
    use rdgmti::scene::*;
    use rdgmti::suppress::{
        channel_balance, from_range_doppler, moving_phase_diff, stationary_phase_diff,
        to_range_doppler, BalanceMode, DopplerGrid, MoverGeometry, PhaseDiffMode,
    };

    fn params() -> RadarParams {
        RadarParams {
            f0_hz: 2.7e9,
            bandwidth_hz: 500e6,
            pulse_width_s: 1e-6,
            prf_hz: 100.0,
            fs_hz: 600e6,
        }
    }

    fn geometry(indexing: RxIndexing) -> ArrayGeometry {
        ArrayGeometry {
            n_rx: 2,
            spacing_m: 0.06,
            tx_offset_m: 0.06,
            indexing,
        }
    }

    fn platform() -> PlatformState {
        PlatformState {
            velocity_mps: 3.0,
            altitude_m: 0.0,
            x_start_m: 0.0,
            jitter_std_m: 0.0,
            jitter_seed: 0,
        }
    }

    fn test_cube() -> DataCube {
        let grid = SamplingGrid::centered(1e-7, 600e6, 24, 32, 100.0);
        let waveform = Waveform {
            f0_hz: 2.7e9,
            bandwidth_hz: 500e6,
            pulse_width_s: 1e-6,
        };
        let mut cube = DataCube::zeros(grid, waveform, Domain::RangeCompressed, 2);
        // deterministic, structureless fill
        let mut state = 0x243f6a8885a308d3u64;
        for s in cube.data.iter_mut() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((state >> 33) as f64) / (1u64 << 31) as f64 - 1.0;
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((state >> 33) as f64) / (1u64 << 31) as f64 - 1.0;
            *s = Complex64::new(a, b);
        }
        cube
    }

    #[test]
    fn criterion_8_numerical_identities() {
        // (a) slow-time transform round trip
        let cube = test_cube();
        let back = from_range_doppler(&to_range_doppler(&cube).unwrap()).unwrap();
        let num: f64 = cube
            .data
            .iter()
            .zip(&back.data)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        let den: f64 = cube.data.iter().map(|x| x.norm_sqr()).sum();
        let round_trip = (num / den).sqrt();
        assert!(round_trip <= 1e-12, "round-trip relative error {round_trip:.3e}");

        // (b) unit-energy balance is invariant to a per-channel gain: the
        // balanced cube is unchanged when one channel is rescaled
        let mut gained = cube.clone();
        let len = gained.channel_len();
        for s in &mut gained.data[len..] {
            *s *= 1.7;
        }
        let balanced = channel_balance(&cube, BalanceMode::UnitEnergy).unwrap();
        let rebalanced = channel_balance(&gained, BalanceMode::UnitEnergy).unwrap();
        let num: f64 = balanced
            .data
            .iter()
            .zip(&rebalanced.data)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        let bden: f64 = balanced.data.iter().map(|x| x.norm_sqr()).sum();
        let balance_err = (num / bden).sqrt();
        assert!(balance_err <= 1e-12, "balance invariance error {balance_err:.3e}");

        // (c) the moving-target phase difference at zero velocity reduces
        // to the stationary one, over the whole Doppler grid
        let p = params();
        let plat = platform();
        let dgrid = DopplerGrid { n_pulses: 64, prf_hz: 100.0 };
        let mut max_reduction = 0.0f64;
        for indexing in [RxIndexing::FromFirst, RxIndexing::Scaled] {
            let geom = geometry(indexing);
            let mover = MoverGeometry { x0_m: 0.7, y0_m: 13.0, vx_mps: 0.0, vy_mps: 0.0 };
            for mode in [PhaseDiffMode::FirstPrinciples, PhaseDiffMode::PrintedEq] {
                for m in 0..64 {
                    let f = dgrid.freq_hz(m);
                    let moving =
                        moving_phase_diff(&p, &geom, &plat, &mover, 13.0, f, 2, mode).unwrap();
                    let still = stationary_phase_diff(&p, &geom, &plat, 13.0, f, 2, mode).unwrap();
                    max_reduction = max_reduction.max((moving - still).abs());
                }
            }
        }
        assert!(max_reduction <= 1e-12, "zero-velocity reduction error {max_reduction:.3e}");

        // (d) first-principles phase difference equals the closed form
        // under the d_n = n d indexing convention
        let geom = geometry(RxIndexing::Scaled);
        let mut max_printed = 0.0f64;
        for m in 0..64 {
            let f = dgrid.freq_hz(m);
            let fp = stationary_phase_diff(&p, &geom, &plat, 13.0, f, 2, PhaseDiffMode::FirstPrinciples)
                .unwrap();
            let pr = stationary_phase_diff(&p, &geom, &plat, 13.0, f, 2, PhaseDiffMode::PrintedEq)
                .unwrap();
            max_printed = max_printed.max((fp - pr).abs());
        }
        assert!(max_printed <= 1e-10, "closed-form mismatch {max_printed:.3e} rad");

        println!(
            "criterion 8: PASS (round trip {round_trip:.1e}, balance {balance_err:.1e}, \
             zero-velocity reduction {max_reduction:.1e}, closed form {max_printed:.1e})"
        );
    }
}

#[test]
fn criterion_9_deterministic_artifacts() {
    let dir = tempdir().unwrap();
    let cfg = configs().join("sim_b.cfg");
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    for out in [&out1, &out2] {
        run_ok(&[
            "e2e",
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            out.to_str().unwrap(),
            "--seed",
            "7",
        ]);
    }
    let mut names: Vec<String> = std::fs::read_dir(&out1)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for name in &names {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between identical runs");
    }
    // same artifact set in both directions
    let count2 = std::fs::read_dir(&out2).unwrap().count();
    assert_eq!(names.len(), count2, "artifact sets differ");

    // the combined summary also reproduces the headline method ordering
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(out1.join("summary.json")).unwrap()).unwrap();
    let if_prop = summary["methods"]["proposed"]["if_db"].as_f64().unwrap();
    let if_dpca = summary["methods"]["dpca"]["if_db"].as_f64().unwrap();
    assert!(if_prop > if_dpca, "summary ordering broken: {if_prop} <= {if_dpca}");
    println!(
        "criterion 9: PASS ({} artifacts byte-identical across seeded reruns)",
        names.len()
    );
}
