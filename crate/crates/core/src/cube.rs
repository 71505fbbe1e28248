//! Complex sample cube indexed (channel, pulse, fast-time) plus the
//! binary cube file format.
//!
//! File layout (little-endian): magic "RDC1", u16 version = 1, u8 domain
//! tag (0 raw, 1 range-compressed, 2 range-Doppler), u8 pad, u32
//! n_channels / n_pulses / n_fast, f64 prf_hz / fs_hz / tau0_s / f0_hz /
//! bandwidth_hz / pulse_width_s, then interleaved f32 (re, im) samples,
//! fast-time fastest, then pulse, then channel.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const CUBE_MAGIC: [u8; 4] = *b"RDC1";
pub const CUBE_VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Raw,
    RangeCompressed,
    RangeDoppler,
}

impl Domain {
    pub fn tag(self) -> u8 {
        match self {
            Domain::Raw => 0,
            Domain::RangeCompressed => 1,
            Domain::RangeDoppler => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Domain::Raw),
            1 => Ok(Domain::RangeCompressed),
            2 => Ok(Domain::RangeDoppler),
            other => Err(Error::config(format!("unknown domain tag {other}"))),
        }
    }
}

/// Fast/slow time sampling description. `slow_origin_s` is the slow time of
/// pulse 0; fresh grids center the aperture so eta = 0 falls on pulse
/// floor(n_pulses / 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingGrid {
    pub tau0_s: f64,
    pub fs_hz: f64,
    pub n_fast: usize,
    pub n_pulses: usize,
    pub prf_hz: f64,
    pub slow_origin_s: f64,
}

impl SamplingGrid {
    pub fn centered(tau0_s: f64, fs_hz: f64, n_fast: usize, n_pulses: usize, prf_hz: f64) -> Self {
        let pri = 1.0 / prf_hz;
        SamplingGrid {
            tau0_s,
            fs_hz,
            n_fast,
            n_pulses,
            prf_hz,
            slow_origin_s: -((n_pulses / 2) as f64) * pri,
        }
    }

    pub fn fast_time(&self, bin: usize) -> f64 {
        self.tau0_s + bin as f64 / self.fs_hz
    }

    pub fn slow_time(&self, pulse: usize) -> f64 {
        self.slow_origin_s + pulse as f64 / self.prf_hz
    }

    pub fn pri_s(&self) -> f64 {
        1.0 / self.prf_hz
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_fast < 2 || self.n_pulses < 2 {
            return Err(Error::config("grid needs n_fast >= 2 and n_pulses >= 2"));
        }
        if !(self.fs_hz > 0.0) || !(self.prf_hz > 0.0) {
            return Err(Error::config("grid rates must be > 0"));
        }
        Ok(())
    }
}

/// Waveform identity carried alongside the samples; needed by pulse
/// compression (chirp replica) and by the Doppler-domain stages (carrier
/// wavelength).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waveform {
    pub f0_hz: f64,
    pub bandwidth_hz: f64,
    pub pulse_width_s: f64,
}

impl Waveform {
    pub fn wavelength_m(&self) -> f64 {
        crate::scene::SPEED_OF_LIGHT / self.f0_hz
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataCube {
    pub grid: SamplingGrid,
    pub waveform: Waveform,
    pub domain: Domain,
    pub n_channels: usize,
    pub data: Vec<Complex64>,
}

impl DataCube {
    pub fn zeros(grid: SamplingGrid, waveform: Waveform, domain: Domain, n_channels: usize) -> Self {
        let len = n_channels * grid.n_pulses * grid.n_fast;
        DataCube {
            grid,
            waveform,
            domain,
            n_channels,
            data: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn pulse_len(&self) -> usize {
        self.grid.n_fast
    }

    pub fn channel_len(&self) -> usize {
        self.grid.n_pulses * self.grid.n_fast
    }

    pub fn index(&self, channel: usize, pulse: usize, bin: usize) -> usize {
        (channel * self.grid.n_pulses + pulse) * self.grid.n_fast + bin
    }

    pub fn channel(&self, channel: usize) -> &[Complex64] {
        let len = self.channel_len();
        &self.data[channel * len..(channel + 1) * len]
    }

    pub fn channel_mut(&mut self, channel: usize) -> &mut [Complex64] {
        let len = self.channel_len();
        &mut self.data[channel * len..(channel + 1) * len]
    }

    pub fn pulse(&self, channel: usize, pulse: usize) -> &[Complex64] {
        let start = self.index(channel, pulse, 0);
        &self.data[start..start + self.grid.n_fast]
    }

    pub fn pulse_mut(&mut self, channel: usize, pulse: usize) -> &mut [Complex64] {
        let start = self.index(channel, pulse, 0);
        &mut self.data[start..start + self.grid.n_fast]
    }

    /// Extract one channel as a standalone single-channel cube.
    pub fn extract_channel(&self, channel: usize) -> DataCube {
        DataCube {
            grid: self.grid,
            waveform: self.waveform,
            domain: self.domain,
            n_channels: 1,
            data: self.channel(channel).to_vec(),
        }
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|s| s.norm_sqr()).sum()
    }

    pub fn rms(&self) -> f64 {
        if self.data.is_empty() {
            0.0
        } else {
            (self.energy() / self.data.len() as f64).sqrt()
        }
    }

    pub fn expect_domain(&self, expected: Domain) -> Result<()> {
        if self.domain != expected {
            return Err(Error::DomainMismatch {
                expected,
                found: self.domain,
            });
        }
        Ok(())
    }
}

pub fn write_cube(cube: &DataCube, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_cube_to(cube, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_cube_to<W: Write>(cube: &DataCube, w: &mut W) -> Result<()> {
    w.write_all(&CUBE_MAGIC)?;
    w.write_all(&CUBE_VERSION.to_le_bytes())?;
    w.write_all(&[cube.domain.tag(), 0u8])?;
    for dim in [cube.n_channels, cube.grid.n_pulses, cube.grid.n_fast] {
        let v = u32::try_from(dim).map_err(|_| Error::DimensionOverflow)?;
        w.write_all(&v.to_le_bytes())?;
    }
    for v in [
        cube.grid.prf_hz,
        cube.grid.fs_hz,
        cube.grid.tau0_s,
        cube.waveform.f0_hz,
        cube.waveform.bandwidth_hz,
        cube.waveform.pulse_width_s,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(cube.data.len() * 8);
    for s in &cube.data {
        buf.extend_from_slice(&(s.re as f32).to_le_bytes());
        buf.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_cube(path: &Path) -> Result<DataCube> {
    let mut r = BufReader::new(File::open(path)?);
    read_cube_from(&mut r)
}

pub fn read_cube_from<R: Read>(r: &mut R) -> Result<DataCube> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Truncated { expected: 4, found: 0 })?;
    if magic != CUBE_MAGIC {
        return Err(Error::BadMagic);
    }
    let mut u16buf = [0u8; 2];
    r.read_exact(&mut u16buf)?;
    let version = u16::from_le_bytes(u16buf);
    if version != CUBE_VERSION {
        return Err(Error::VersionMismatch(version));
    }
    let mut tag = [0u8; 2];
    r.read_exact(&mut tag)?;
    let domain = Domain::from_tag(tag[0])?;

    let mut u32buf = [0u8; 4];
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        r.read_exact(&mut u32buf)?;
        *d = u32::from_le_bytes(u32buf) as usize;
    }
    let [n_channels, n_pulses, n_fast] = dims;
    let total = n_channels
        .checked_mul(n_pulses)
        .and_then(|v| v.checked_mul(n_fast))
        .and_then(|v| v.checked_mul(8))
        .ok_or(Error::DimensionOverflow)?;

    let mut f64buf = [0u8; 8];
    let mut fields = [0f64; 6];
    for f in fields.iter_mut() {
        r.read_exact(&mut f64buf)?;
        *f = f64::from_le_bytes(f64buf);
    }
    let [prf_hz, fs_hz, tau0_s, f0_hz, bandwidth_hz, pulse_width_s] = fields;

    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() < total {
        return Err(Error::Truncated {
            expected: total as u64,
            found: payload.len() as u64,
        });
    }
    if payload.len() > total {
        return Err(Error::config("cube file has trailing bytes"));
    }
    let mut data = Vec::with_capacity(total / 8);
    for chunk in payload.chunks_exact(8) {
        let re = f32::from_le_bytes(chunk[0..4].try_into().unwrap());
        let im = f32::from_le_bytes(chunk[4..8].try_into().unwrap());
        data.push(Complex64::new(re as f64, im as f64));
    }
    Ok(DataCube {
        grid: SamplingGrid::centered(tau0_s, fs_hz, n_fast, n_pulses, prf_hz),
        waveform: Waveform {
            f0_hz,
            bandwidth_hz,
            pulse_width_s,
        },
        domain,
        n_channels,
        data,
    })
}
