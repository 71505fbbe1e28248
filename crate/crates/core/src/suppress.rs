//! Channel balance, range-Doppler transform, phase compensation and
//! cancellation, the magnitude-ratio filter, and the DPCA baseline.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cube::{DataCube, Domain};
use crate::error::{Error, Result};
use crate::exec;
use crate::fftutil;
use crate::scene::{ArrayGeometry, PhaseCoeffs, PlatformState, RadarParams, SPEED_OF_LIGHT};

/// Doppler bin layout after center-shift: bin m maps to
/// (m - floor(n/2)) * PRF / n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerGrid {
    pub n_pulses: usize,
    pub prf_hz: f64,
}

impl DopplerGrid {
    pub fn freq_hz(&self, bin: usize) -> f64 {
        (bin as f64 - (self.n_pulses / 2) as f64) * self.prf_hz / self.n_pulses as f64
    }
}

/// Where a scatterer with slow-time phase -(2 pi / lambda)(a1 eta + ...)
/// lands in Doppler under the forward kernel exp(-j 2 pi f eta).
pub fn predict_doppler(coeffs: &PhaseCoeffs, lambda_m: f64) -> f64 {
    -coeffs.a1_mps / lambda_m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseDiffMode {
    /// Difference of the stationary-phase spectra built from the quadratic
    /// coefficients under the active indexing convention.
    FirstPrinciples,
    /// The closed form with the (2n-1) constant term.
    PrintedEq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BalanceMode {
    /// Divide each pulse by the square root of its energy (gain invariant).
    UnitEnergy,
    /// Divide by the energy itself, as printed.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuppressionConfig {
    pub kappa: f64,
    pub epsilon_rel: f64,
    pub phase_diff_mode: PhaseDiffMode,
    pub balance_mode: BalanceMode,
}

impl Default for SuppressionConfig {
    fn default() -> Self {
        SuppressionConfig {
            kappa: 0.5,
            epsilon_rel: 1e-6,
            phase_diff_mode: PhaseDiffMode::FirstPrinciples,
            balance_mode: BalanceMode::UnitEnergy,
        }
    }
}

impl SuppressionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) {
            return Err(Error::config("suppress.kappa must be >= 0"));
        }
        if !(self.epsilon_rel > 0.0) {
            return Err(Error::config("suppress.epsilon must be > 0"));
        }
        Ok(())
    }
}

/// Per-pulse energy normalization across channels.
pub fn channel_balance(cube: &DataCube, mode: BalanceMode) -> Result<DataCube> {
    cube.expect_domain(Domain::RangeCompressed)?;
    let mut out = cube.clone();
    let n_fast = cube.grid.n_fast;
    exec::for_each_row(&mut out.data, n_fast, |_, row| {
        let energy: f64 = row.iter().map(|s| s.norm_sqr()).sum();
        if energy == 0.0 {
            return;
        }
        let scale = match mode {
            BalanceMode::UnitEnergy => 1.0 / energy.sqrt(),
            BalanceMode::Literal => 1.0 / energy,
        };
        for s in row.iter_mut() {
            *s *= scale;
        }
    });
    Ok(out)
}

// Slow-time DFT with both axes centered: S[m] = sum_k s[k] exp(-j 2 pi
// f_m eta_k), computed as an FFT plus twiddles for the grid origins.
fn slow_time_transform(cube: &DataCube, inverse: bool) -> DataCube {
    let g = cube.grid;
    let n = g.n_pulses;
    let h = n / 2;
    let fft = fftutil::plan(n);
    let dgrid = DopplerGrid {
        n_pulses: n,
        prf_hz: g.prf_hz,
    };
    // exp(-j 2 pi f_m eta0) applied after the FFT (conjugated on inverse)
    let twiddles: Vec<Complex64> = (0..n)
        .map(|m| {
            let phase = -2.0 * PI * dgrid.freq_hz(m) * g.slow_origin_s;
            Complex64::from_polar(1.0, if inverse { -phase } else { phase })
        })
        .collect();

    let mut out = cube.clone();
    let n_fast = g.n_fast;
    for c in 0..cube.n_channels {
        let src = cube.channel(c);
        let cols = exec::map_indexed(n_fast, |i| {
            let mut buf: Vec<Complex64> = (0..n).map(|k| src[k * n_fast + i]).collect();
            if inverse {
                // undo the shift/twiddle, then the 1/n-scaled inverse FFT
                let mut spectral = vec![Complex64::new(0.0, 0.0); n];
                for (m, v) in buf.iter().enumerate() {
                    let p = (m + n - h) % n;
                    spectral[p] = v * twiddles[m];
                }
                fft.inverse_in_place(&mut spectral);
                spectral
            } else {
                fft.forward_in_place(&mut buf);
                let mut shifted = vec![Complex64::new(0.0, 0.0); n];
                for (m, t) in twiddles.iter().enumerate() {
                    let p = (m + n - h) % n;
                    shifted[m] = buf[p] * t;
                }
                shifted
            }
        });
        let dst = out.channel_mut(c);
        for (i, col) in cols.iter().enumerate() {
            for (k, v) in col.iter().enumerate() {
                dst[k * n_fast + i] = *v;
            }
        }
    }
    out
}

/// Forward slow-time transform into the range-Doppler domain.
pub fn to_range_doppler(cube: &DataCube) -> Result<DataCube> {
    cube.expect_domain(Domain::RangeCompressed)?;
    let mut out = slow_time_transform(cube, false);
    out.domain = Domain::RangeDoppler;
    Ok(out)
}

/// Inverse of [`to_range_doppler`]; round trip is identity to fp precision.
pub fn from_range_doppler(cube: &DataCube) -> Result<DataCube> {
    cube.expect_domain(Domain::RangeDoppler)?;
    let mut out = slow_time_transform(cube, true);
    out.domain = Domain::RangeCompressed;
    Ok(out)
}

/// Stationary-phase spectrum phase for one channel's quadratic
/// coefficients: phi(f) = (2 pi / lambda) [(-a0 + a1^2/(4 a2))
/// + (lambda a1 / (2 a2)) f + (lambda^2 / (4 a2)) f^2].
pub fn rd_phase(coeffs: &PhaseCoeffs, lambda_m: f64, f_eta_hz: f64) -> f64 {
    let (a0, a1, a2) = (coeffs.a0_m, coeffs.a1_mps, coeffs.a2_mps2);
    2.0 * PI / lambda_m
        * ((-a0 + a1 * a1 / (4.0 * a2))
            + lambda_m * a1 / (2.0 * a2) * f_eta_hz
            + lambda_m * lambda_m / (4.0 * a2) * f_eta_hz * f_eta_hz)
}

fn stationary_coeffs_probe(
    geometry: &ArrayGeometry,
    platform: &PlatformState,
    r0_m: f64,
    channel: usize,
) -> PhaseCoeffs {
    // stationary coefficients for a probe scatterer at broadside (the
    // channel difference is independent of the azimuth position)
    let dr = geometry.tx_offset_m;
    let dn = geometry.rx_offset_m(channel);
    let vp = platform.velocity_mps;
    PhaseCoeffs {
        a0_m: 2.0 * r0_m + dr * dr / (2.0 * r0_m) + dn * dn / (2.0 * r0_m),
        a1_mps: -(dn - dr) * vp / r0_m,
        a2_mps2: vp * vp / r0_m,
        r0_m,
        vr_m2ps: 0.0,
    }
}

fn check_channel_pair(geometry: &ArrayGeometry, n: usize) -> Result<()> {
    if n < 2 || n > geometry.n_rx {
        return Err(Error::invalid(format!(
            "channel pair index {} out of range 2..={}",
            n, geometry.n_rx
        )));
    }
    Ok(())
}

/// Range-Doppler phase difference of a stationary scatterer between
/// channels n and n-1 (n is 1-based, n >= 2).
pub fn stationary_phase_diff(
    params: &RadarParams,
    geometry: &ArrayGeometry,
    platform: &PlatformState,
    r0_m: f64,
    f_eta_hz: f64,
    n: usize,
    mode: PhaseDiffMode,
) -> Result<f64> {
    check_channel_pair(geometry, n)?;
    if !(r0_m > 0.0) {
        return Err(Error::invalid("R0 must be > 0"));
    }
    let lambda = params.wavelength_m();
    match mode {
        PhaseDiffMode::FirstPrinciples => {
            let cn = stationary_coeffs_probe(geometry, platform, r0_m, n);
            let cm = stationary_coeffs_probe(geometry, platform, r0_m, n - 1);
            Ok(rd_phase(&cn, lambda, f_eta_hz) - rd_phase(&cm, lambda, f_eta_hz))
        }
        PhaseDiffMode::PrintedEq => {
            let d = geometry.spacing_m;
            let dr = geometry.tx_offset_m;
            let constant = 2.0 * PI / lambda
                * (-((2 * n - 1) as f64) * d * d - 2.0 * dr * d)
                / (4.0 * r0_m);
            let linear = PI * f_eta_hz * (-d / platform.velocity_mps);
            Ok(constant + linear)
        }
    }
}

/// Moving-target description for the residual-phase diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoverGeometry {
    /// Azimuth position relative to the platform at eta = 0.
    pub x0_m: f64,
    pub y0_m: f64,
    pub vx_mps: f64,
    pub vy_mps: f64,
}

/// Range-Doppler phase difference of a moving scatterer between channels
/// n and n-1. At zero velocity this equals [`stationary_phase_diff`].
pub fn moving_phase_diff(
    params: &RadarParams,
    geometry: &ArrayGeometry,
    platform: &PlatformState,
    mover: &MoverGeometry,
    r0_m: f64,
    f_eta_hz: f64,
    n: usize,
    mode: PhaseDiffMode,
) -> Result<f64> {
    check_channel_pair(geometry, n)?;
    if !(r0_m > 0.0) {
        return Err(Error::invalid("R0 must be > 0"));
    }
    let lambda = params.wavelength_m();
    let vp = platform.velocity_mps;
    let (vx, vy) = (mover.vx_mps, mover.vy_mps);
    match mode {
        PhaseDiffMode::FirstPrinciples => {
            let coeffs = |ch: usize| {
                let dr = geometry.tx_offset_m;
                let dn = geometry.rx_offset_m(ch);
                let vr = mover.x0_m * vx + mover.y0_m * vy;
                PhaseCoeffs {
                    a0_m: 2.0 * r0_m
                        + dr * dr / (2.0 * r0_m)
                        + mover.x0_m / r0_m * (dn - dr)
                        + dn * dn / (2.0 * r0_m),
                    a1_mps: (2.0 * (vr - mover.x0_m * vp) + (vx - vp) * (dn - dr)) / r0_m,
                    a2_mps2: ((vx - vp) * (vx - vp) + vy * vy) / r0_m,
                    r0_m,
                    vr_m2ps: vr,
                }
            };
            let cn = coeffs(n);
            let cm = coeffs(n - 1);
            Ok(rd_phase(&cn, lambda, f_eta_hz) - rd_phase(&cm, lambda, f_eta_hz))
        }
        PhaseDiffMode::PrintedEq => {
            let d = geometry.spacing_m;
            let dr = geometry.tx_offset_m;
            let rel = vx - vp;
            let v2 = rel * rel + vy * vy;
            if vx == 0.0 {
                // range-direction mover form
                let t1 = 2.0 * PI / lambda * vp * vp
                    * (-((2 * n - 1) as f64) * d * d - 2.0 * dr * d)
                    / (4.0 * v2 * r0_m);
                let t2 = -2.0 * PI / lambda
                    * (vy * vy * (((4 * n - 2) as f64) * d * d + 4.0 * mover.x0_m * d)
                        + 4.0 * d * mover.y0_m * vy * vp)
                    / (4.0 * v2 * r0_m);
                let lin = PI * f_eta_hz * (-vp * d) / v2;
                Ok(t1 + t2 + lin)
            } else {
                let t1 = 2.0 * PI / lambda * rel * rel
                    * (-((2 * n - 1) as f64) * d * d - 2.0 * dr * d)
                    / (4.0 * v2 * r0_m);
                let t2 = 2.0 * PI / lambda * d * vy
                    * (4.0 * rel * mover.y0_m
                        - ((4 * n - 2) as f64) * d * vy
                        - 4.0 * mover.x0_m * vy)
                    / (4.0 * v2 * r0_m);
                let lin = PI * f_eta_hz * rel * d / v2;
                Ok(t1 + t2 + lin)
            }
        }
    }
}

/// Phase-compensated adjacent-channel cancellation in the range-Doppler
/// domain. Output channel n-1 is s_{n-1} - s_n * exp(-j dphi_n), with the
/// per-bin reference range R0 = c * tau / 2.
pub fn compensate_cancel(
    cube: &DataCube,
    geometry: &ArrayGeometry,
    platform: &PlatformState,
    config: &SuppressionConfig,
) -> Result<DataCube> {
    cube.expect_domain(Domain::RangeDoppler)?;
    config.validate()?;
    if cube.n_channels < 2 {
        return Err(Error::invalid("cancellation needs at least 2 channels"));
    }
    if cube.n_channels != geometry.n_rx {
        return Err(Error::DimensionMismatch(format!(
            "cube has {} channels, geometry expects {}",
            cube.n_channels, geometry.n_rx
        )));
    }
    let params = RadarParams {
        f0_hz: cube.waveform.f0_hz,
        bandwidth_hz: cube.waveform.bandwidth_hz,
        pulse_width_s: cube.waveform.pulse_width_s,
        prf_hz: cube.grid.prf_hz,
        fs_hz: cube.grid.fs_hz,
    };
    let g = cube.grid;
    let dgrid = DopplerGrid {
        n_pulses: g.n_pulses,
        prf_hz: g.prf_hz,
    };
    let r0_floor = SPEED_OF_LIGHT / (2.0 * g.fs_hz);

    let mut out = DataCube::zeros(g, cube.waveform, Domain::RangeDoppler, cube.n_channels - 1);
    let n_fast = g.n_fast;
    let n_pulses = g.n_pulses;
    let src = &cube;
    let results: Vec<Result<Vec<Complex64>>> =
        exec::map_indexed((cube.n_channels - 1) * n_pulses, |row| {
            let (j, m) = (row / n_pulses, row % n_pulses);
            let n = j + 2; // paper channel index of the subtracted channel
            let f_eta = dgrid.freq_hz(m);
            let lower = src.pulse(j, m);
            let upper = src.pulse(j + 1, m);
            let mut out_row = vec![Complex64::new(0.0, 0.0); n_fast];
            for i in 0..n_fast {
                let r0 = (SPEED_OF_LIGHT * g.fast_time(i) / 2.0).max(r0_floor);
                let dphi = stationary_phase_diff(
                    &params,
                    geometry,
                    platform,
                    r0,
                    f_eta,
                    n,
                    config.phase_diff_mode,
                )?;
                out_row[i] = lower[i] - upper[i] * Complex64::from_polar(1.0, -dphi);
            }
            Ok(out_row)
        });
    for (row, res) in results.into_iter().enumerate() {
        let vals = res?;
        let (j, m) = (row / n_pulses, row % n_pulses);
        out.pulse_mut(j, m).copy_from_slice(&vals);
    }
    Ok(out)
}

/// Binary keep-mask produced by the ratio filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioMask {
    pub n_channels: usize,
    pub n_pulses: usize,
    pub n_fast: usize,
    pub keep: Vec<bool>,
}

impl RatioMask {
    pub fn at(&self, channel: usize, pulse: usize, bin: usize) -> bool {
        self.keep[(channel * self.n_pulses + pulse) * self.n_fast + bin]
    }
}

/// Time-domain ratio filter: keep pixels where the cancelled magnitude is
/// at least kappa times the balanced magnitude (denominator floored at
/// epsilon times the balanced cube RMS).
pub fn ratio_filter(
    cancelled: &DataCube,
    balanced: &DataCube,
    config: &SuppressionConfig,
) -> Result<(RatioMask, DataCube)> {
    config.validate()?;
    if cancelled.grid.n_pulses != balanced.grid.n_pulses
        || cancelled.grid.n_fast != balanced.grid.n_fast
        || cancelled.n_channels > balanced.n_channels
    {
        return Err(Error::DimensionMismatch(
            "ratio filter cubes must share pulse/fast dimensions".into(),
        ));
    }
    let floor = config.epsilon_rel * balanced.rms();
    let mut filtered = cancelled.clone();
    let mut keep = vec![false; cancelled.data.len()];
    let channel_len = cancelled.channel_len();
    for c in 0..cancelled.n_channels {
        let cb = balanced.channel(c);
        let cs = cancelled.channel(c);
        let dst = &mut keep[c * channel_len..(c + 1) * channel_len];
        for i in 0..channel_len {
            let denom = cb[i].norm().max(floor);
            let num = cs[i].norm();
            dst[i] = if config.kappa == 0.0 {
                true
            } else if denom == 0.0 {
                num > 0.0
            } else {
                num / denom >= config.kappa
            };
        }
    }
    for (s, &k) in filtered.data.iter_mut().zip(&keep) {
        if !k {
            *s = Complex64::new(0.0, 0.0);
        }
    }
    Ok((
        RatioMask {
            n_channels: cancelled.n_channels,
            n_pulses: cancelled.grid.n_pulses,
            n_fast: cancelled.grid.n_fast,
            keep,
        },
        filtered,
    ))
}

/// Phase-center alignment shift in pulses, d / (2 vp PRI).
pub fn dpca_shift_pulses(geometry: &ArrayGeometry, platform: &PlatformState, pri_s: f64) -> f64 {
    geometry.spacing_m / (2.0 * platform.velocity_mps * pri_s)
}

/// Classic two-channel DPCA: subtract channel 2 aligned by the nearest
/// whole pulse. Output shrinks by the rounded shift.
pub fn dpca_baseline(
    cube: &DataCube,
    geometry: &ArrayGeometry,
    platform: &PlatformState,
) -> Result<DataCube> {
    cube.expect_domain(Domain::RangeCompressed)?;
    if cube.n_channels != 2 {
        return Err(Error::invalid("DPCA baseline requires exactly 2 channels"));
    }
    if platform.velocity_mps == 0.0 {
        return Err(Error::invalid("DPCA requires nonzero platform velocity"));
    }
    let shift = dpca_shift_pulses(geometry, platform, cube.grid.pri_s());
    let k = shift.round().abs() as usize;
    if k >= cube.grid.n_pulses {
        return Err(Error::invalid(format!(
            "DPCA alignment shift {k} pulses exceeds the aperture"
        )));
    }
    let mut grid = cube.grid;
    grid.n_pulses -= k;
    let mut out = DataCube::zeros(grid, cube.waveform, Domain::RangeCompressed, 1);
    let n_fast = grid.n_fast;
    for p in 0..grid.n_pulses {
        let a = cube.pulse(0, p);
        let b = cube.pulse(1, p + k);
        let dst = out.pulse_mut(0, p);
        for i in 0..n_fast {
            dst[i] = a[i] - b[i];
        }
    }
    Ok(out)
}
