//! Ground-truth geometry and the closed-form range/phase models.
//!
//! Everything downstream (synthesis, compensation, imaging, truth-based
//! region masks) evaluates the models defined here. All functions are pure
//! and safe to call from any thread.

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// LFM waveform and timing parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarParams {
    pub f0_hz: f64,
    pub bandwidth_hz: f64,
    pub pulse_width_s: f64,
    pub prf_hz: f64,
    pub fs_hz: f64,
}

impl RadarParams {
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.f0_hz
    }

    /// Chirp rate Kr in Hz/s.
    pub fn chirp_rate(&self) -> f64 {
        self.bandwidth_hz / self.pulse_width_s
    }

    pub fn pri_s(&self) -> f64 {
        1.0 / self.prf_hz
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f0_hz > 0.0) {
            return Err(Error::config("radar.f0_hz must be > 0"));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::config("radar.bandwidth_hz must be > 0"));
        }
        if !(self.pulse_width_s > 0.0) {
            return Err(Error::config("radar.pulse_width_s must be > 0"));
        }
        if !(self.prf_hz > 0.0) {
            return Err(Error::config("radar.prf_hz must be > 0"));
        }
        if !(self.fs_hz >= self.bandwidth_hz) {
            return Err(Error::config("radar.fs_hz must be >= radar.bandwidth_hz"));
        }
        if !(self.pulse_width_s * self.prf_hz < 1.0) {
            return Err(Error::config("radar: duty cycle Tp*PRF must be < 1"));
        }
        Ok(())
    }
}

/// Selects how the n-th receiver offset d_n relates to the spacing d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RxIndexing {
    /// d_n = (n - 1) * d, first receiver at the array origin.
    FromFirst,
    /// d_n = n * d.
    Scaled,
}

/// Receiver line array plus the transmitter offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub n_rx: usize,
    pub spacing_m: f64,
    pub tx_offset_m: f64,
    pub indexing: RxIndexing,
}

impl ArrayGeometry {
    /// Offset d_n of the n-th receiver (n is 1-based).
    pub fn rx_offset_m(&self, n: usize) -> f64 {
        match self.indexing {
            RxIndexing::FromFirst => (n - 1) as f64 * self.spacing_m,
            RxIndexing::Scaled => n as f64 * self.spacing_m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rx < 2 {
            return Err(Error::config("array.n_rx must be >= 2"));
        }
        if !(self.spacing_m > 0.0) {
            return Err(Error::config("array.d_m must be > 0"));
        }
        if !(self.tx_offset_m >= 0.0) {
            return Err(Error::config("array.dr_m must be >= 0"));
        }
        Ok(())
    }
}

/// Platform motion along the azimuth axis. `x_start_m` is the platform
/// azimuth position at the aperture center (slow time zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformState {
    pub velocity_mps: f64,
    pub altitude_m: f64,
    pub x_start_m: f64,
    pub jitter_std_m: f64,
    pub jitter_seed: u64,
}

impl PlatformState {
    pub fn validate(&self) -> Result<()> {
        if self.velocity_mps == 0.0 || !self.velocity_mps.is_finite() {
            return Err(Error::config("platform.vp_mps must be nonzero and finite"));
        }
        if !(self.altitude_m >= 0.0) {
            return Err(Error::config("platform.h_m must be >= 0"));
        }
        if !(self.jitter_std_m >= 0.0) {
            return Err(Error::config("platform.jitter_std_m must be >= 0"));
        }
        Ok(())
    }
}

/// Constant-extra-path wall model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallModel {
    pub thickness_m: f64,
    pub rel_permittivity: f64,
}

impl WallModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.thickness_m >= 0.0) {
            return Err(Error::config("wall.dw_m must be >= 0"));
        }
        if !(self.rel_permittivity >= 1.0) {
            return Err(Error::config("wall.epsr must be >= 1"));
        }
        Ok(())
    }
}

/// Two-way extra path length through the wall, 2*dw*(sqrt(eps_r) - 1).
pub fn wall_extra_path(wall: &WallModel) -> f64 {
    2.0 * wall.thickness_m * (wall.rel_permittivity.sqrt() - 1.0)
}

/// A point scatterer. Velocities zero for clutter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub x_m: f64,
    pub y_m: f64,
    pub vx_mps: f64,
    pub vy_mps: f64,
    pub reflectivity_re: f64,
    pub reflectivity_im: f64,
    pub behind_wall: bool,
}

impl Target {
    pub fn is_moving(&self) -> bool {
        self.vx_mps != 0.0 || self.vy_mps != 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.x_m,
            self.y_m,
            self.vx_mps,
            self.vy_mps,
            self.reflectivity_re,
            self.reflectivity_im,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("target fields must be finite"));
        }
        Ok(())
    }
}

/// Quadratic slow-time expansion of the two-way range history for one
/// (target, channel) pair: R(eta) ~ a0 + a1*eta + a2*eta^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCoeffs {
    pub a0_m: f64,
    pub a1_mps: f64,
    pub a2_mps2: f64,
    pub r0_m: f64,
    pub vr_m2ps: f64,
}

/// Which coefficient set to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffMode {
    /// Full moving-target coefficients.
    General,
    /// Stationary-target simplification (requires vx = vy = 0).
    Stationary,
    /// Zero-Doppler-moment form used by the imaging stage (no azimuth
    /// cross term in a0).
    ZeroDoppler,
}

/// Full scene description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub radar: RadarParams,
    pub array: ArrayGeometry,
    pub platform: PlatformState,
    pub wall: WallModel,
    pub targets: Vec<Target>,
    pub beam_center_offset_s: f64,
    pub aperture_s: f64,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        self.validate_components()?;
        if self.targets.is_empty() {
            return Err(Error::config("scene must contain at least one target"));
        }
        Ok(())
    }

    /// Everything except the non-empty target rule; synthesis accepts an
    /// empty list (yielding a zero cube).
    pub fn validate_components(&self) -> Result<()> {
        self.radar.validate()?;
        self.array.validate()?;
        self.platform.validate()?;
        self.wall.validate()?;
        for t in &self.targets {
            t.validate()?;
        }
        if !(self.aperture_s > 0.0) {
            return Err(Error::config("scene.ta_s must be > 0"));
        }
        Ok(())
    }

    /// Target azimuth relative to the platform position at eta = 0.
    pub fn x_rel(&self, target: &Target) -> f64 {
        target.x_m - self.platform.x_start_m
    }

    /// Slant distance at eta = 0 from the aperture-center platform position.
    pub fn r0(&self, target: &Target) -> f64 {
        let x = self.x_rel(target);
        (x * x + target.y_m * target.y_m + self.platform.altitude_m * self.platform.altitude_m)
            .sqrt()
    }

    fn wall_term(&self, target: &Target) -> f64 {
        if target.behind_wall {
            wall_extra_path(&self.wall)
        } else {
            0.0
        }
    }
}

/// Exact two-way range with an extra platform azimuth perturbation
/// (per-pulse jitter). `channel` is 1-based.
pub fn range_history_exact_offset(
    scene: &Scene,
    target: &Target,
    channel: usize,
    eta: f64,
    platform_dx_m: f64,
) -> f64 {
    let vp = scene.platform.velocity_mps;
    let h = scene.platform.altitude_m;
    let xr = scene.x_rel(target) + (target.vx_mps - vp) * eta - platform_dx_m;
    let y = target.y_m + target.vy_mps * eta;
    let dr = scene.array.tx_offset_m;
    let dn = scene.array.rx_offset_m(channel);
    let h2 = h * h;
    let tx_leg = ((xr - dr) * (xr - dr) + y * y + h2).sqrt();
    let rx_leg = ((xr + dn) * (xr + dn) + y * y + h2).sqrt();
    tx_leg + rx_leg + scene.wall_term(target)
}

/// Exact two-way range per the square-root leg sum plus the wall term.
pub fn range_history_exact(scene: &Scene, target: &Target, channel: usize, eta: f64) -> f64 {
    range_history_exact_offset(scene, target, channel, eta, 0.0)
}

/// Quadratic slow-time expansion coefficients for one (target, channel).
pub fn phase_coeffs(
    scene: &Scene,
    target: &Target,
    channel: usize,
    mode: CoeffMode,
) -> Result<PhaseCoeffs> {
    if channel < 1 || channel > scene.array.n_rx {
        return Err(Error::invalid(format!(
            "channel {} out of range 1..={}",
            channel, scene.array.n_rx
        )));
    }
    let x0 = scene.x_rel(target);
    let r0 = scene.r0(target);
    if !(r0 > 0.0) {
        return Err(Error::invalid("target coincides with the platform (R0 = 0)"));
    }
    let vp = scene.platform.velocity_mps;
    let (vx, vy) = (target.vx_mps, target.vy_mps);
    if mode == CoeffMode::Stationary && (vx != 0.0 || vy != 0.0) {
        return Err(Error::invalid(
            "stationary coefficient mode requires vx = vy = 0",
        ));
    }
    let dr = scene.array.tx_offset_m;
    let dn = scene.array.rx_offset_m(channel);
    let vr = x0 * vx + target.y_m * vy;
    let wall = scene.wall_term(target);

    let a0 = match mode {
        CoeffMode::ZeroDoppler => {
            2.0 * r0 + dr * dr / (2.0 * r0) + dn * dn / (2.0 * r0) + wall
        }
        _ => {
            2.0 * r0
                + dr * dr / (2.0 * r0)
                + x0 / r0 * (dn - dr)
                + dn * dn / (2.0 * r0)
                + wall
        }
    };
    let a1 = match mode {
        CoeffMode::General => (2.0 * (vr - x0 * vp) + (vx - vp) * (dn - dr)) / r0,
        CoeffMode::Stationary => (-2.0 * x0 * vp - (dn - dr) * vp) / r0,
        CoeffMode::ZeroDoppler => (2.0 * vr + (vx - vp) * (dn - dr)) / r0,
    };
    let a2 = match mode {
        CoeffMode::Stationary => vp * vp / r0,
        _ => ((vx - vp) * (vx - vp) + vy * vy) / r0,
    };

    Ok(PhaseCoeffs {
        a0_m: a0,
        a1_mps: a1,
        a2_mps2: a2,
        r0_m: r0,
        vr_m2ps: vr,
    })
}

/// Evaluate the quadratic range model a0 + a1*eta + a2*eta^2.
pub fn range_history_quadratic(coeffs: &PhaseCoeffs, eta: f64) -> f64 {
    coeffs.a0_m + coeffs.a1_mps * eta + coeffs.a2_mps2 * eta * eta
}
