//! The method pipelines behind the CLI subcommands, plus artifact writers.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use rdgmti::cube::{read_cube, write_cube, DataCube, Domain};
use rdgmti::echo::{add_noise, auto_grid, synthesize_raw, NOISE_DISABLED_SNR_DB};
use rdgmti::imaging::{focus, velocity_scan, Image, ScanContext};
use rdgmti::metrics::{
    expected_location, improvement_factor, region_energy, region_from_truth, CubeRegion, IFReport,
};
use rdgmti::rangecomp::pulse_compress;
use rdgmti::scene::{phase_coeffs, CoeffMode};
use rdgmti::suppress::{
    channel_balance, compensate_cancel, dpca_baseline, dpca_shift_pulses, from_range_doppler,
    ratio_filter, to_range_doppler,
};
use rdgmti::{Error, Result};

use crate::config::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Proposed,
    Dpca,
    None,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Dpca => "dpca",
            Method::None => "none",
        }
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Synthesize the scenario and write the cube file. Returns a digest line.
pub fn run_simulate(scenario: &Scenario, out_path: &Path) -> Result<String> {
    let grid = auto_grid(&scenario.scene, scenario.n_pulses)?;
    let raw = synthesize_raw(&scenario.scene, &grid, scenario.phase_model)?;
    let cube = match scenario.snr_db {
        Some(snr) => add_noise(&raw, snr, scenario.noise_seed)?,
        None => add_noise(&raw, NOISE_DISABLED_SNR_DB, scenario.noise_seed)?,
    };
    write_cube(&cube, out_path)?;
    let bytes = std::fs::read(out_path)?;
    Ok(format!(
        "cube {}x{}x{} energy={:.6e} checksum={:016x}",
        cube.n_channels,
        cube.grid.n_pulses,
        cube.grid.n_fast,
        cube.energy(),
        fnv1a64(&bytes)
    ))
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Io(io),
        other => Error::InvalidArgument(format!("stage {name}: {other}")),
    })
}

/// Keep only the first `n_pulses` pulses of each channel.
fn crop_pulses(cube: &DataCube, n_pulses: usize) -> DataCube {
    let mut grid = cube.grid;
    grid.n_pulses = n_pulses;
    let mut out = DataCube::zeros(grid, cube.waveform, cube.domain, cube.n_channels);
    for c in 0..cube.n_channels {
        for p in 0..n_pulses {
            out.pulse_mut(c, p).copy_from_slice(cube.pulse(c, p));
        }
    }
    out
}

/// Zero the first and last `k` pulses of every channel in place.
fn zero_edge_pulses(cube: &mut DataCube, k: usize) {
    let n = cube.grid.n_pulses;
    if 2 * k >= n {
        return;
    }
    for c in 0..cube.n_channels {
        for p in (0..k).chain(n - k..n) {
            cube.pulse_mut(c, p).fill(Default::default());
        }
    }
}

/// Fast-bin intervals owned by movers (signal box + guard), used to carve
/// the clutter gates out of the cube.
fn mover_fast_intervals(scenario: &Scenario, cube: &DataCube) -> Result<Vec<(usize, usize)>> {
    let half = scenario.box_half_width + scenario.guard;
    let mut spans = Vec::new();
    for t in scenario.scene.targets.iter().filter(|t| t.is_moving()) {
        let coeffs = phase_coeffs(&scenario.scene, t, 1, CoeffMode::General)?;
        let (_pulse, bin) = expected_location(&coeffs, &cube.grid)?;
        spans.push((
            bin.saturating_sub(half),
            (bin + half + 1).min(cube.grid.n_fast),
        ));
    }
    spans.sort_unstable();
    Ok(spans)
}

/// Clutter residual after/before in dB over the cube gates: all fast bins
/// outside the mover spans, pulses with `edge_excl` trimmed from each end
/// (compensation is a circular slow-time shift, so wrap-around residue
/// lives in the edge pulses).
pub fn clutter_residual_db(
    before: &DataCube,
    after: &DataCube,
    scenario: &Scenario,
    edge_excl: usize,
) -> Result<Option<f64>> {
    let n_pulses = after.grid.n_pulses.min(before.grid.n_pulses);
    if 2 * edge_excl + 2 > n_pulses {
        return Ok(None);
    }
    let pulses = edge_excl..n_pulses - edge_excl;
    let spans = mover_fast_intervals(scenario, after)?;
    let mut gates = Vec::new();
    let mut cursor = 0usize;
    for (lo, hi) in spans {
        if lo > cursor {
            gates.push(cursor..lo);
        }
        cursor = cursor.max(hi);
    }
    if cursor < after.grid.n_fast {
        gates.push(cursor..after.grid.n_fast);
    }
    let mut e_before = 0.0;
    let mut e_after = 0.0;
    for gate in gates {
        let region = CubeRegion {
            channel: 0,
            pulses: pulses.clone(),
            fast_bins: gate,
        };
        e_before += region_energy(before, &region)?;
        e_after += region_energy(after, &region)?;
    }
    if e_before == 0.0 {
        return Ok(None);
    }
    Ok(Some(if e_after == 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * (e_after / e_before).log10()
    }))
}

/// Energy kept in the mover fast-bin gates by the cancellation stage,
/// after/before, with `edge_excl` pulses trimmed from each end. None when
/// the scene has no movers or the gate is empty.
pub fn mover_gate_retention(
    before: &DataCube,
    after: &DataCube,
    scenario: &Scenario,
    edge_excl: usize,
) -> Result<Option<f64>> {
    let n_pulses = after.grid.n_pulses.min(before.grid.n_pulses);
    if 2 * edge_excl + 2 > n_pulses {
        return Ok(None);
    }
    let pulses = edge_excl..n_pulses - edge_excl;
    let mut e_before = 0.0;
    let mut e_after = 0.0;
    for (lo, hi) in mover_fast_intervals(scenario, after)? {
        let region = CubeRegion {
            channel: 0,
            pulses: pulses.clone(),
            fast_bins: lo..hi,
        };
        e_before += region_energy(before, &region)?;
        e_after += region_energy(after, &region)?;
    }
    if e_before == 0.0 {
        return Ok(None);
    }
    Ok(Some(e_after / e_before))
}

pub struct ProcessOutput {
    pub image: Image,
    pub if_report: Option<IFReport>,
    pub residual_db: Option<f64>,
    pub mover_retention: Option<f64>,
}

/// Run one method over a cube already loaded from disk.
pub fn process_cube(scenario: &Scenario, cube: &DataCube, method: Method) -> Result<ProcessOutput> {
    let compressed = match cube.domain {
        Domain::Raw => stage("pulse_compress", pulse_compress(cube))?,
        Domain::RangeCompressed => cube.clone(),
        Domain::RangeDoppler => {
            return Err(Error::invalid(
                "stage input: expected a raw or range-compressed cube",
            ))
        }
    };
    let balanced = stage(
        "channel_balance",
        channel_balance(&compressed, scenario.suppress.balance_mode),
    )?;
    let scene = &scenario.scene;

    let (single, residual_db, mover_retention) = match method {
        Method::Proposed => {
            let rd = stage("range_doppler", to_range_doppler(&balanced))?;
            let cancelled_rd = stage(
                "compensate_cancel",
                compensate_cancel(&rd, &scene.array, &scene.platform, &scenario.suppress),
            )?;
            let mut cancelled =
                stage("inverse_range_doppler", from_range_doppler(&cancelled_rd))?;
            let edge = (dpca_shift_pulses(
                &scene.array,
                &scene.platform,
                balanced.grid.pri_s(),
            )
            .abs()
            .ceil() as usize)
                + 2;
            // compensation is a circular slow-time shift; the wrapped edge
            // pulses compare unrelated clutter snapshots, so blank them the
            // way DPCA truncates its shifted-out pulses
            zero_edge_pulses(&mut cancelled, edge);
            let residual =
                clutter_residual_db(&balanced, &cancelled, scenario, edge)?;
            let retention = mover_gate_retention(&balanced, &cancelled, scenario, edge)?;
            let (_mask, filtered) = stage(
                "ratio_filter",
                ratio_filter(&cancelled, &balanced, &scenario.suppress),
            )?;
            (filtered.extract_channel(0), residual, retention)
        }
        Method::Dpca => {
            let out = stage(
                "dpca",
                dpca_baseline(&balanced, &scene.array, &scene.platform),
            )?;
            let before = crop_pulses(&balanced, out.grid.n_pulses);
            let residual = clutter_residual_db(&before, &out, scenario, 0)?;
            let retention = mover_gate_retention(&before, &out, scenario, 0)?;
            (out, residual, retention)
        }
        Method::None => (balanced.extract_channel(0), None, None),
    };

    let mut image = stage("focus", focus(&single, &scene.platform, &scenario.imaging))?;
    image.method = method.tag().to_string();

    // IF needs at least one mover in the truth; clutter-only scenes skip it
    let if_report = if scene.targets.iter().any(|t| t.is_moving()) {
        let mask = stage(
            "region_from_truth",
            region_from_truth(
                scene,
                &single.grid,
                scenario.box_half_width,
                scenario.guard,
            ),
        )?;
        let reference_cube = crop_pulses(&balanced, single.grid.n_pulses).extract_channel(0);
        let reference = stage(
            "reference_focus",
            focus(&reference_cube, &scene.platform, &scenario.imaging),
        )?;
        Some(stage(
            "improvement_factor",
            improvement_factor(&reference, &image, &mask, method.tag()),
        )?)
    } else {
        None
    };

    Ok(ProcessOutput {
        image,
        if_report,
        residual_db,
        mover_retention,
    })
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

pub fn report_json(
    scenario: &Scenario,
    method: &str,
    output: &ProcessOutput,
    runtime_ms: u64,
) -> Value {
    let (scnr_in, scnr_out, if_db, clutter_free) = match &output.if_report {
        Some(r) => (
            finite_or_null(r.scnr_in_db),
            finite_or_null(r.scnr_out_db),
            finite_or_null(r.if_db),
            json!(r.clutter_free),
        ),
        None => (Value::Null, Value::Null, Value::Null, json!(false)),
    };
    json!({
        "method": method,
        "params": scenario.effective_params(),
        "scnr_in_db": scnr_in,
        "scnr_out_db": scnr_out,
        "if_db": if_db,
        "clutter_free": clutter_free,
        "residual_db": output.residual_db.map(finite_or_null).unwrap_or(Value::Null),
        "mover_retention": output.mover_retention.map(finite_or_null).unwrap_or(Value::Null),
        "runtime_ms": runtime_ms,
    })
}

pub fn write_json(value: &Value, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::invalid(format!("report serialization: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// CSV of magnitudes, one row per range bin, columns over azimuth.
pub fn write_image_csv(image: &Image, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for i in 0..image.n_range() {
        let mut row = String::with_capacity(image.n_azimuth() * 14);
        for p in 0..image.n_azimuth() {
            if p > 0 {
                row.push(',');
            }
            row.push_str(&format!("{:.6e}", image.at(p, i).norm()));
        }
        row.push('\n');
        w.write_all(row.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// 8-bit PGM of dB-scaled magnitude, floor -60 dB relative to the peak.
pub fn write_image_pgm(image: &Image, path: &Path) -> Result<()> {
    let peak = image.peak_magnitude();
    let n_az = image.n_azimuth();
    let n_range = image.n_range();
    let mut data = Vec::with_capacity(n_az * n_range);
    for i in 0..n_range {
        for p in 0..n_az {
            let v = image.at(p, i).norm();
            let byte = if peak == 0.0 || v == 0.0 {
                0u8
            } else {
                let db = (20.0 * (v / peak).log10()).clamp(-60.0, 0.0);
                ((db + 60.0) / 60.0 * 255.0).round() as u8
            };
            data.push(byte);
        }
    }
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(w, "P5\n{n_az} {n_range}\n255\n")?;
    w.write_all(&data)?;
    w.flush()?;
    Ok(())
}

pub fn run_process(
    scenario: &Scenario,
    cube_path: &Path,
    method: Method,
    image_base: &Path,
    report_path: &Path,
    zero_runtime: bool,
) -> Result<()> {
    let started = std::time::Instant::now();
    let cube = read_cube(cube_path)?;
    let output = process_cube(scenario, &cube, method)?;
    let runtime_ms = if zero_runtime {
        0
    } else {
        started.elapsed().as_millis() as u64
    };
    write_image_csv(&output.image, &image_base.with_extension("csv"))?;
    write_image_pgm(&output.image, &image_base.with_extension("pgm"))?;
    let report = report_json(scenario, method.tag(), &output, runtime_ms);
    write_json(&report, report_path)?;
    if let Some(r) = &output.if_report {
        println!(
            "{}: scnr_in={:.2} dB scnr_out={:.2} dB if={:.2} dB",
            method.tag(),
            r.scnr_in_db,
            r.scnr_out_db,
            r.if_db
        );
    } else {
        println!("{}: no movers in truth; IF skipped", method.tag());
    }
    Ok(())
}

/// Suppress with the proposed method, then score a list of assumed range
/// velocities. Returns CSV text (vy, scnr_in, scnr_out, if_db rows).
pub fn run_scan(scenario: &Scenario, cube_path: &Path, velocities: &[f64]) -> Result<String> {
    if velocities.is_empty() {
        return Err(Error::invalid("velocity list is empty"));
    }
    let cube = read_cube(cube_path)?;
    let compressed = match cube.domain {
        Domain::Raw => stage("pulse_compress", pulse_compress(&cube))?,
        Domain::RangeCompressed => cube.clone(),
        Domain::RangeDoppler => {
            return Err(Error::invalid(
                "stage input: expected a raw or range-compressed cube",
            ))
        }
    };
    let scene = &scenario.scene;
    let balanced = stage(
        "channel_balance",
        channel_balance(&compressed, scenario.suppress.balance_mode),
    )?;
    let rd = stage("range_doppler", to_range_doppler(&balanced))?;
    let cancelled_rd = stage(
        "compensate_cancel",
        compensate_cancel(&rd, &scene.array, &scene.platform, &scenario.suppress),
    )?;
    let mut cancelled = stage("inverse_range_doppler", from_range_doppler(&cancelled_rd))?;
    let edge = (dpca_shift_pulses(&scene.array, &scene.platform, balanced.grid.pri_s())
        .abs()
        .ceil() as usize)
        + 2;
    zero_edge_pulses(&mut cancelled, edge);
    let (_mask_bits, filtered) = stage(
        "ratio_filter",
        ratio_filter(&cancelled, &balanced, &scenario.suppress),
    )?;
    let single = filtered.extract_channel(0);
    let mask = stage(
        "region_from_truth",
        region_from_truth(scene, &single.grid, scenario.box_half_width, scenario.guard),
    )?;
    let reference_cube = balanced.extract_channel(0);
    let ctx = ScanContext {
        reference_cube: &reference_cube,
        mask: &mask,
        method: Method::Proposed.tag(),
    };
    let results = stage(
        "velocity_scan",
        velocity_scan(&single, &scene.platform, &scenario.imaging, velocities, &ctx),
    )?;
    let mut csv = String::from("vy_mps,scnr_in_db,scnr_out_db,if_db\n");
    for (vy, _image, report) in &results {
        csv.push_str(&format!(
            "{},{:.6},{:.6},{:.6}\n",
            vy, report.scnr_in_db, report.scnr_out_db, report.if_db
        ));
    }
    Ok(csv)
}

/// Full workflow into a directory: cube, per-method images and reports, a
/// velocity scan, and a method-comparison summary. Deterministic output.
pub fn run_e2e(scenario: &Scenario, out_dir: &Path, force: bool) -> Result<()> {
    if out_dir.exists() {
        let non_empty = std::fs::read_dir(out_dir)?.next().is_some();
        if non_empty && !force {
            return Err(Error::invalid(format!(
                "output directory {} is not empty (use --force to overwrite)",
                out_dir.display()
            )));
        }
    } else {
        std::fs::create_dir_all(out_dir)?;
    }
    let cube_path = out_dir.join("cube.rdc");
    let digest = run_simulate(scenario, &cube_path)?;
    println!("{digest}");

    let mut summary_methods = serde_json::Map::new();
    for method in [Method::Proposed, Method::Dpca, Method::None] {
        let tag = method.tag();
        run_process(
            scenario,
            &cube_path,
            method,
            &out_dir.join(tag),
            &out_dir.join(format!("{tag}.json")),
            true,
        )?;
        let report: Value = serde_json::from_str(
            &std::fs::read_to_string(out_dir.join(format!("{tag}.json")))?,
        )
        .map_err(|e| Error::invalid(format!("re-reading {tag} report: {e}")))?;
        summary_methods.insert(
            tag.to_string(),
            json!({
                "if_db": report["if_db"].clone(),
                "residual_db": report["residual_db"].clone(),
            }),
        );
    }
    let scan_csv = run_scan(scenario, &cube_path, &[0.0, 0.3, 0.6, 0.9])?;
    std::fs::write(out_dir.join("scan.csv"), scan_csv)?;

    let summary = json!({
        "digest": digest,
        "methods": Value::Object(summary_methods),
        "scan": "scan.csv",
    });
    write_json(&summary, &out_dir.join("summary.json"))?;
    Ok(())
}
