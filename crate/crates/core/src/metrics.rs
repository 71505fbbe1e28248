//! Truth-derived region masks and SCNR / improvement-factor evaluation.

use std::ops::Range;

use crate::cube::{DataCube, SamplingGrid};
use crate::error::{Error, Result};
use crate::imaging::Image;
use crate::scene::{phase_coeffs, CoeffMode, Scene, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Signal,
    Guard,
    Clutter,
}

/// Pixel partition of an image: signal boxes around the expected mover
/// locations, a guard ring excluded from both sides, clutter elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMask {
    pub n_azimuth: usize,
    pub n_fast: usize,
    pub labels: Vec<Region>,
}

impl RegionMask {
    pub fn at(&self, azimuth: usize, range_bin: usize) -> Region {
        self.labels[azimuth * self.n_fast + range_bin]
    }

    pub fn count(&self, region: Region) -> usize {
        self.labels.iter().filter(|&&r| r == region).count()
    }

    fn check_image(&self, image: &Image) -> Result<()> {
        if image.n_azimuth() != self.n_azimuth || image.n_range() != self.n_fast {
            return Err(Error::DimensionMismatch(format!(
                "mask is {}x{}, image is {}x{}",
                self.n_azimuth,
                self.n_fast,
                image.n_azimuth(),
                image.n_range()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IFReport {
    pub method: String,
    pub scnr_in_db: f64,
    pub scnr_out_db: f64,
    pub if_db: f64,
    /// Output clutter power is exactly zero; `if_db` holds the infinity
    /// sentinel in that case.
    pub clutter_free: bool,
    pub n_signal: usize,
    pub n_clutter: usize,
}

/// Expected image location (azimuth pulse index, fast-time bin) of a
/// target, from its quadratic coefficients: range at the Doppler apex
/// (a0 - a1^2 / (4 a2)) / c, azimuth at the zero-Doppler crossing
/// eta = -a1 / (2 a2). The azimuth index wraps modulo the aperture.
pub fn expected_location(
    coeffs: &crate::scene::PhaseCoeffs,
    grid: &SamplingGrid,
) -> Result<(usize, usize)> {
    if coeffs.a2_mps2 == 0.0 {
        return Err(Error::Degenerate("target has zero quadratic rate".into()));
    }
    let apex_m = coeffs.a0_m - coeffs.a1_mps * coeffs.a1_mps / (4.0 * coeffs.a2_mps2);
    let tau = apex_m / SPEED_OF_LIGHT;
    let bin = ((tau - grid.tau0_s) * grid.fs_hz).round();
    if bin < 0.0 || bin >= grid.n_fast as f64 {
        return Err(Error::invalid(format!(
            "expected target range bin {bin} outside the fast-time window"
        )));
    }
    let eta_zd = -coeffs.a1_mps / (2.0 * coeffs.a2_mps2);
    let pulse = ((eta_zd - grid.slow_origin_s) * grid.prf_hz).round() as i64;
    let pulse = pulse.rem_euclid(grid.n_pulses as i64) as usize;
    Ok((pulse, bin as usize))
}

/// Build the mask from ground truth: one signal box per moving target.
pub fn region_from_truth(
    scene: &Scene,
    grid: &SamplingGrid,
    box_half_width: usize,
    guard: usize,
) -> Result<RegionMask> {
    let movers: Vec<_> = scene.targets.iter().filter(|t| t.is_moving()).collect();
    if movers.is_empty() {
        return Err(Error::invalid("scene has no moving targets to mask"));
    }
    let (n_az, n_fast) = (grid.n_pulses, grid.n_fast);
    let mut labels = vec![Region::Clutter; n_az * n_fast];
    let mut centers = Vec::new();
    for t in &movers {
        let coeffs = phase_coeffs(scene, t, 1, CoeffMode::General)?;
        let (pulse, bin) = expected_location(&coeffs, grid)?;
        if bin < box_half_width || bin + box_half_width >= n_fast {
            return Err(Error::invalid(format!(
                "signal box at range bin {bin} exits the image"
            )));
        }
        centers.push((pulse, bin));
    }
    // signal boxes first, then the guard ring over remaining clutter
    let paint = |half: usize, from: Region, to: Region, labels: &mut Vec<Region>| {
        for &(pc, bc) in &centers {
            for da in -(half as i64)..=(half as i64) {
                let a = (pc as i64 + da).rem_euclid(n_az as i64) as usize;
                let lo = bc.saturating_sub(half);
                let hi = (bc + half).min(n_fast - 1);
                for b in lo..=hi {
                    let cell = &mut labels[a * n_fast + b];
                    if *cell == from {
                        *cell = to;
                    }
                }
            }
        }
    };
    paint(box_half_width, Region::Clutter, Region::Signal, &mut labels);
    paint(box_half_width + guard, Region::Clutter, Region::Guard, &mut labels);
    let mask = RegionMask {
        n_azimuth: n_az,
        n_fast,
        labels,
    };
    if mask.count(Region::Clutter) == 0 {
        return Err(Error::invalid("signal and guard regions cover the image"));
    }
    Ok(mask)
}

fn mean_power(image: &Image, mask: &RegionMask, region: Region) -> (f64, usize) {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (s, &r) in image.data.iter().zip(&mask.labels) {
        if r == region {
            sum += s.norm_sqr();
            n += 1;
        }
    }
    (if n == 0 { 0.0 } else { sum / n as f64 }, n)
}

/// Signal-to-clutter ratio in dB over the masked regions.
pub fn scnr(image: &Image, mask: &RegionMask) -> Result<f64> {
    mask.check_image(image)?;
    let (ps, ns) = mean_power(image, mask, Region::Signal);
    let (pc, nc) = mean_power(image, mask, Region::Clutter);
    if ns == 0 || nc == 0 {
        return Err(Error::invalid("mask needs non-empty signal and clutter"));
    }
    if pc == 0.0 {
        return Err(Error::Degenerate("clutter power is exactly zero".into()));
    }
    Ok(10.0 * (ps / pc).log10())
}

/// Output-over-input SCNR gain; the input image is the unsuppressed
/// reference focused through the identical imaging chain.
pub fn improvement_factor(
    input: &Image,
    output: &Image,
    mask: &RegionMask,
    method: &str,
) -> Result<IFReport> {
    let scnr_in = scnr(input, mask)?;
    mask.check_image(output)?;
    let (ps, ns) = mean_power(output, mask, Region::Signal);
    let (pc, nc) = mean_power(output, mask, Region::Clutter);
    if ns == 0 || nc == 0 {
        return Err(Error::invalid("mask needs non-empty signal and clutter"));
    }
    let (scnr_out, clutter_free) = if pc == 0.0 {
        (f64::INFINITY, true)
    } else {
        (10.0 * (ps / pc).log10(), false)
    };
    Ok(IFReport {
        method: method.to_string(),
        scnr_in_db: scnr_in,
        scnr_out_db: scnr_out,
        if_db: scnr_out - scnr_in,
        clutter_free,
        n_signal: ns,
        n_clutter: nc,
    })
}

/// Rectangular gate inside one cube channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeRegion {
    pub channel: usize,
    pub pulses: Range<usize>,
    pub fast_bins: Range<usize>,
}

/// Sum of |sample|^2 over one gate.
pub fn region_energy(cube: &DataCube, region: &CubeRegion) -> Result<f64> {
    if region.channel >= cube.n_channels
        || region.pulses.end > cube.grid.n_pulses
        || region.fast_bins.end > cube.grid.n_fast
    {
        return Err(Error::invalid("cube region out of bounds"));
    }
    let mut sum = 0.0;
    for p in region.pulses.clone() {
        for s in &cube.pulse(region.channel, p)[region.fast_bins.clone()] {
            sum += s.norm_sqr();
        }
    }
    Ok(sum)
}

/// Energy ratio after/before over one gate, in dB. Returns -inf when the
/// after-energy is exactly zero.
pub fn residual_db(before: &DataCube, after: &DataCube, region: &CubeRegion) -> Result<f64> {
    let e_before = region_energy(before, region)?;
    let e_after = region_energy(after, region)?;
    if e_before == 0.0 {
        return Err(Error::Degenerate("reference gate has zero energy".into()));
    }
    if e_after == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * (e_after / e_before).log10())
}
