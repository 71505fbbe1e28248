//! Reference chirp construction and fast-time matched filtering.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cube::{DataCube, Domain};
use crate::error::{Error, Result};
use crate::exec;
use crate::fftutil;
use crate::scene::RadarParams;

/// Reference LFM replica, centered at fast-time zero with negative-time
/// samples wrapped to the end of the buffer, zero-padded to `n_fast`.
pub fn reference_chirp(params: &RadarParams, n_fast: usize, fs_hz: f64) -> Result<Vec<Complex64>> {
    if fs_hz < params.bandwidth_hz {
        return Err(Error::invalid("sampling rate below chirp bandwidth"));
    }
    if params.pulse_width_s * fs_hz < 2.0 {
        return Err(Error::invalid("pulse too short: Tp*fs < 2 samples"));
    }
    let kr = params.chirp_rate();
    let half = params.pulse_width_s / 2.0;
    let mut out = vec![Complex64::new(0.0, 0.0); n_fast];
    for (i, s) in out.iter_mut().enumerate() {
        let tau = if i <= n_fast / 2 {
            i as f64 / fs_hz
        } else {
            (i as f64 - n_fast as f64) / fs_hz
        };
        if tau.abs() <= half {
            *s = Complex64::from_polar(1.0, -PI * kr * tau * tau);
        }
    }
    Ok(out)
}

fn in_pulse_count(params: &RadarParams, n_fast: usize, fs_hz: f64) -> usize {
    let half = params.pulse_width_s / 2.0;
    (0..n_fast)
        .filter(|&i| {
            let tau = if i <= n_fast / 2 {
                i as f64 / fs_hz
            } else {
                (i as f64 - n_fast as f64) / fs_hz
            };
            tau.abs() <= half
        })
        .count()
}

/// Fast-time matched filtering via the transform product, normalized so an
/// on-grid unit-amplitude target compresses to peak magnitude ~1.
pub fn pulse_compress(cube: &DataCube) -> Result<DataCube> {
    cube.expect_domain(Domain::Raw)?;
    let params = RadarParams {
        f0_hz: cube.waveform.f0_hz,
        bandwidth_hz: cube.waveform.bandwidth_hz,
        pulse_width_s: cube.waveform.pulse_width_s,
        prf_hz: cube.grid.prf_hz,
        fs_hz: cube.grid.fs_hz,
    };
    let n_fast = cube.grid.n_fast;
    let reference = reference_chirp(&params, n_fast, cube.grid.fs_hz)?;
    let gain = 1.0 / in_pulse_count(&params, n_fast, cube.grid.fs_hz) as f64;

    let fft = fftutil::plan(n_fast);
    let mut ref_spectrum = reference;
    fft.forward_in_place(&mut ref_spectrum);

    let mut out = cube.clone();
    out.domain = Domain::RangeCompressed;
    exec::for_each_row(&mut out.data, n_fast, |_, row| {
        fft.forward_in_place(row);
        for (s, h) in row.iter_mut().zip(&ref_spectrum) {
            *s *= h;
        }
        fft.inverse_in_place(row);
        for s in row.iter_mut() {
            *s *= gain;
        }
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> RadarParams {
        RadarParams {
            f0_hz: 2.7e9,
            bandwidth_hz: 500e6,
            pulse_width_s: 1e-6,
            prf_hz: 100.0,
            fs_hz: 600e6,
        }
    }

    #[test]
    fn reference_center_and_envelope() {
        let p = params();
        let n = 2048;
        let chirp = reference_chirp(&p, n, p.fs_hz).unwrap();
        assert!((chirp[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let half = p.pulse_width_s / 2.0;
        let mut energy = 0.0;
        let mut count = 0usize;
        for (i, s) in chirp.iter().enumerate() {
            let tau = if i <= n / 2 {
                i as f64 / p.fs_hz
            } else {
                (i as f64 - n as f64) / p.fs_hz
            };
            if tau.abs() > half {
                assert_eq!(*s, Complex64::new(0.0, 0.0));
            } else {
                assert!((s.norm() - 1.0).abs() < 1e-12);
                count += 1;
            }
            energy += s.norm_sqr();
        }
        assert!((energy - count as f64).abs() < 1e-9);
    }

    #[test]
    fn too_short_pulse_rejected() {
        let mut p = params();
        p.pulse_width_s = 1e-9;
        assert!(reference_chirp(&p, 64, p.fs_hz).is_err());
    }

    #[test]
    fn domain_mismatch_rejected() {
        use crate::cube::{SamplingGrid, Waveform};
        let grid = SamplingGrid::centered(0.0, 600e6, 64, 4, 100.0);
        let wf = Waveform {
            f0_hz: 2.7e9,
            bandwidth_hz: 500e6,
            pulse_width_s: 1e-7,
        };
        let cube = DataCube::zeros(grid, wf, Domain::RangeCompressed, 1);
        assert!(matches!(
            pulse_compress(&cube),
            Err(Error::DomainMismatch { .. })
        ));
    }
}
