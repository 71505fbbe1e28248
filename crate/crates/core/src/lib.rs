//! Dual-channel radar moving-target detection at desk scale.
//!
//! The processing chain synthesizes multi-channel LFM echoes for a point
//! scene, pulse-compresses them, balances the channels, cancels stationary
//! clutter by phase compensation in the range-Doppler domain, filters the
//! residue with a magnitude-ratio mask, and focuses movers with a
//! velocity-mismatched azimuth filter. A classic DPCA subtractor and an
//! improvement-factor harness are included for comparison.

pub mod cube;
pub mod echo;
pub mod error;
pub mod exec;
mod fftutil;
pub mod imaging;
pub mod metrics;
pub mod rangecomp;
pub mod scene;
pub mod suppress;

pub use cube::{DataCube, Domain, SamplingGrid, Waveform};
pub use num_complex::Complex64;
pub use error::{Error, Result};
pub use scene::{
    ArrayGeometry, PhaseCoeffs, PlatformState, RadarParams, RxIndexing, Scene, Target, WallModel,
    SPEED_OF_LIGHT,
};
