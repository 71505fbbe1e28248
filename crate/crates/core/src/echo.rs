//! Multi-channel point-target echo synthesis (raw chirp and compressed
//! sinc modes) and deterministic noise injection.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cube::{DataCube, Domain, SamplingGrid, Waveform};
use crate::error::{Error, Result};
use crate::exec;
use crate::scene::{
    phase_coeffs, range_history_exact_offset, range_history_quadratic, CoeffMode, PhaseCoeffs,
    Scene, SPEED_OF_LIGHT,
};

/// Sentinel that disables additive noise.
pub const NOISE_DISABLED_SNR_DB: f64 = f64::INFINITY;

/// Which slow-time range model drives the synthesized phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseModel {
    /// Square-root leg sum evaluated per pulse.
    Exact,
    /// Quadratic expansion coefficients per (target, channel).
    Quadratic,
}

/// sin(pi x)/(pi x), 1 at x = 0.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn waveform_of(scene: &Scene) -> Waveform {
    Waveform {
        f0_hz: scene.radar.f0_hz,
        bandwidth_hz: scene.radar.bandwidth_hz,
        pulse_width_s: scene.radar.pulse_width_s,
    }
}

/// Build a fast-time window that covers every target's delay across the
/// whole aperture with a 2*Tp margin on each side.
pub fn auto_grid(scene: &Scene, n_pulses: usize) -> Result<SamplingGrid> {
    scene.validate()?;
    let pri = scene.radar.pri_s();
    let mut grid = SamplingGrid::centered(0.0, scene.radar.fs_hz, 2, n_pulses, scene.radar.prf_hz);
    let mut min_delay = f64::INFINITY;
    let mut max_delay = f64::NEG_INFINITY;
    for t in &scene.targets {
        for ch in 1..=scene.array.n_rx {
            for p in 0..n_pulses {
                let eta = grid.slow_origin_s + p as f64 * pri;
                let delay =
                    crate::scene::range_history_exact(scene, t, ch, eta) / SPEED_OF_LIGHT;
                min_delay = min_delay.min(delay);
                max_delay = max_delay.max(delay);
            }
        }
    }
    let margin = 2.0 * scene.radar.pulse_width_s;
    grid.tau0_s = min_delay - margin;
    let span = max_delay - min_delay + 2.0 * margin;
    grid.n_fast = (span * scene.radar.fs_hz).ceil() as usize + 1;
    grid.validate()?;
    Ok(grid)
}

struct TargetModel {
    amp: Complex64,
    coeffs: Vec<PhaseCoeffs>, // per channel
    index: usize,
}

fn build_models(scene: &Scene) -> Result<Vec<TargetModel>> {
    scene
        .targets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let coeffs = (1..=scene.array.n_rx)
                .map(|ch| phase_coeffs(scene, t, ch, CoeffMode::General))
                .collect::<Result<Vec<_>>>()?;
            Ok(TargetModel {
                amp: Complex64::new(t.reflectivity_re, t.reflectivity_im),
                coeffs,
                index: i,
            })
        })
        .collect()
}

fn jitter_dx(scene: &Scene, pulse: usize) -> f64 {
    if scene.platform.jitter_std_m == 0.0 {
        0.0
    } else {
        let (g, _) = counter_gauss(scene.platform.jitter_seed, u64::MAX, pulse as u64, 0);
        scene.platform.jitter_std_m * g
    }
}

fn range_at(
    scene: &Scene,
    model: &TargetModel,
    channel0: usize,
    eta: f64,
    pulse: usize,
    phase_model: PhaseModel,
) -> f64 {
    match phase_model {
        PhaseModel::Exact => range_history_exact_offset(
            scene,
            &scene.targets[model.index],
            channel0 + 1,
            eta,
            jitter_dx(scene, pulse),
        ),
        PhaseModel::Quadratic => range_history_quadratic(&model.coeffs[channel0], eta),
    }
}

fn check_window(scene: &Scene, grid: &SamplingGrid, phase_model: PhaseModel) -> Result<()> {
    let models = build_models(scene)?;
    let tp = scene.radar.pulse_width_s;
    let tau_lo = grid.tau0_s;
    let tau_hi = grid.fast_time(grid.n_fast - 1);
    for m in &models {
        for c in 0..scene.array.n_rx {
            for p in 0..grid.n_pulses {
                let eta = grid.slow_time(p);
                let delay = range_at(scene, m, c, eta, p, phase_model) / SPEED_OF_LIGHT;
                if delay - tp / 2.0 < tau_lo || delay + tp / 2.0 > tau_hi {
                    return Err(Error::config(format!(
                        "target {} delay {:.3e} s leaves the fast-time window \
                         [{:.3e}, {:.3e}] at pulse {}",
                        m.index + 1,
                        delay,
                        tau_lo,
                        tau_hi,
                        p
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Demodulated raw echo: rectangular chirp per pulse with the carrier
/// phase -2*pi*f0*R/c. Superposition over targets in scene order.
pub fn synthesize_raw(scene: &Scene, grid: &SamplingGrid, phase_model: PhaseModel) -> Result<DataCube> {
    scene.validate_components()?;
    grid.validate()?;
    check_window(scene, grid, phase_model)?;
    let models = build_models(scene)?;
    let kr = scene.radar.chirp_rate();
    let f0 = scene.radar.f0_hz;
    let tp = scene.radar.pulse_width_s;
    let ta = scene.aperture_s;
    let eta_c = scene.beam_center_offset_s;
    let n_rx = scene.array.n_rx;

    let mut cube = DataCube::zeros(*grid, waveform_of(scene), Domain::Raw, n_rx);
    let g = *grid;
    let n_pulses = g.n_pulses;
    exec::for_each_row(&mut cube.data, g.n_fast, |row, samples| {
        let (c, p) = (row / n_pulses, row % n_pulses);
        let eta = g.slow_time(p);
        if (eta - eta_c).abs() > ta / 2.0 {
            return;
        }
        for m in &models {
            let delay = range_at(scene, m, c, eta, p, phase_model) / SPEED_OF_LIGHT;
            let carrier = Complex64::from_polar(1.0, -2.0 * PI * f0 * delay);
            let lo = ((delay - tp / 2.0 - g.tau0_s) * g.fs_hz).ceil().max(0.0) as usize;
            let hi = (((delay + tp / 2.0 - g.tau0_s) * g.fs_hz).floor() as usize)
                .min(g.n_fast - 1);
            for i in lo..=hi {
                let dt = g.fast_time(i) - delay;
                let chirp = Complex64::from_polar(1.0, PI * kr * dt * dt);
                samples[i] += m.amp * carrier * chirp;
            }
        }
    });
    Ok(cube)
}

/// Compressed-domain echo: sinc range response with the quadratic (or
/// exact) slow-time phase. Amplitude convention matches `pulse_compress`,
/// so an on-grid unit target peaks at magnitude ~1.
pub fn synthesize_compressed(
    scene: &Scene,
    grid: &SamplingGrid,
    phase_model: PhaseModel,
) -> Result<DataCube> {
    scene.validate_components()?;
    grid.validate()?;
    check_window(scene, grid, phase_model)?;
    let models = build_models(scene)?;
    let b = scene.radar.bandwidth_hz;
    let lambda = scene.radar.wavelength_m();
    let ta = scene.aperture_s;
    let eta_c = scene.beam_center_offset_s;
    let n_rx = scene.array.n_rx;

    let mut cube = DataCube::zeros(*grid, waveform_of(scene), Domain::RangeCompressed, n_rx);
    let g = *grid;
    let n_pulses = g.n_pulses;
    exec::for_each_row(&mut cube.data, g.n_fast, |row, samples| {
        let (c, p) = (row / n_pulses, row % n_pulses);
        let eta = g.slow_time(p);
        if (eta - eta_c).abs() > ta / 2.0 {
            return;
        }
        for m in &models {
            let range = range_at(scene, m, c, eta, p, phase_model);
            let delay = range / SPEED_OF_LIGHT;
            let phasor = m.amp * Complex64::from_polar(1.0, -2.0 * PI / lambda * range);
            for i in 0..g.n_fast {
                let env = sinc(b * (g.fast_time(i) - delay));
                samples[i] += phasor * env;
            }
        }
    });
    Ok(cube)
}

// Counter-based Gaussian generator: splitmix64 keyed on (seed, channel,
// pulse, sample) feeding a Box-Muller pair, so the output is independent
// of evaluation order.

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn uniform_open(bits: u64) -> f64 {
    // (0, 1], safe for ln()
    ((bits >> 11) as f64 + 1.0) / (1u64 << 53) as f64
}

fn counter_gauss(seed: u64, channel: u64, pulse: u64, sample: u64) -> (f64, f64) {
    let k1 = splitmix64(seed ^ splitmix64(channel));
    let k2 = splitmix64(k1 ^ splitmix64(pulse));
    let k3 = splitmix64(k2 ^ splitmix64(sample));
    let u1 = uniform_open(k3);
    let u2 = uniform_open(splitmix64(k3));
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    (r * c, r * s)
}

/// Add circularly-symmetric complex Gaussian noise. SNR is defined against
/// the strongest sample power in the cube, which under the compression gain
/// convention equals the strongest target's compressed peak power.
pub fn add_noise(cube: &DataCube, snr_db: f64, seed: u64) -> Result<DataCube> {
    if snr_db.is_nan() {
        return Err(Error::invalid("snr_db must not be NaN"));
    }
    match cube.domain {
        Domain::Raw | Domain::RangeCompressed => {}
        d => {
            return Err(Error::DomainMismatch {
                expected: Domain::RangeCompressed,
                found: d,
            })
        }
    }
    if snr_db == NOISE_DISABLED_SNR_DB {
        return Ok(cube.clone());
    }
    let peak_power = cube
        .data
        .iter()
        .map(|s| s.norm_sqr())
        .fold(0.0f64, f64::max);
    let noise_power = peak_power * 10f64.powf(-snr_db / 10.0);
    let sigma = (noise_power / 2.0).sqrt();

    let mut out = cube.clone();
    let g = cube.grid;
    let n_pulses = g.n_pulses;
    exec::for_each_row(&mut out.data, g.n_fast, |row, samples| {
        let (c, p) = (row / n_pulses, row % n_pulses);
        for (i, s) in samples.iter_mut().enumerate() {
            let (re, im) = counter_gauss(seed, c as u64, p as u64, i as u64);
            *s += Complex64::new(sigma * re, sigma * im);
        }
    });
    Ok(out)
}
