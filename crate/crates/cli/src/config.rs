//! Line-based `key = value` scenario configs with dotted keys.
//!
//! The full key table lives in the repository README. Unknown keys are
//! rejected so typos fail loudly instead of silently using a default.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rdgmti::echo::PhaseModel;
use rdgmti::imaging::{ImagingConfig, RcmcMode};
use rdgmti::scene::{
    ArrayGeometry, PlatformState, RadarParams, RxIndexing, Scene, Target, WallModel,
};
use rdgmti::suppress::{BalanceMode, PhaseDiffMode, SuppressionConfig};
use rdgmti::{Error, Result};

/// Everything a pipeline run needs, with defaults applied.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub scene: Scene,
    pub n_pulses: usize,
    pub phase_model: PhaseModel,
    /// None = noise disabled.
    pub snr_db: Option<f64>,
    pub noise_seed: u64,
    pub suppress: SuppressionConfig,
    pub imaging: ImagingConfig,
    pub box_half_width: usize,
    pub guard: usize,
}

fn parse_lines(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(format!(
                "line {}: expected `key = value`, got `{}`",
                lineno + 1,
                line
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(Error::config(format!("line {}: empty key or value", lineno + 1)));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::config(format!("duplicate key `{key}`")));
        }
    }
    Ok(map)
}

struct Reader {
    map: BTreeMap<String, String>,
    used: std::collections::BTreeSet<String>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.map.get(key).cloned()
    }

    fn required_f64(&mut self, key: &str) -> Result<f64> {
        let v = self
            .take(key)
            .ok_or_else(|| Error::config(format!("missing required key `{key}`")))?;
        parse_f64(key, &v)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            Some(v) => parse_f64(key, &v),
            None => Ok(default),
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.take(key) {
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| Error::config(format!("key `{key}`: expected an integer, got `{v}`"))),
            None => Ok(default),
        }
    }

    fn u64_or(&mut self, key: &str, default: u64) -> Result<u64> {
        match self.take(key) {
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| Error::config(format!("key `{key}`: expected an integer, got `{v}`"))),
            None => Ok(default),
        }
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take(key).as_deref() {
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(Error::config(format!(
                "key `{key}`: expected true or false, got `{v}`"
            ))),
            None => Ok(default),
        }
    }

    fn choice_or(&mut self, key: &str, options: &[&str], default: &str) -> Result<String> {
        match self.take(key) {
            Some(v) if options.contains(&v.as_str()) => Ok(v),
            Some(v) => Err(Error::config(format!(
                "key `{key}`: expected one of {}, got `{v}`",
                options.join("|")
            ))),
            None => Ok(default.to_string()),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::config(format!("key `{key}`: expected a number, got `{v}`")))
}

fn parse_targets(reader: &mut Reader) -> Result<Vec<Target>> {
    let indices: std::collections::BTreeSet<usize> = reader
        .map
        .keys()
        .filter_map(|k| {
            let rest = k.strip_prefix("target.")?;
            rest.split_once('.')?.0.parse::<usize>().ok()
        })
        .collect();
    if indices.is_empty() {
        return Err(Error::config("missing required key `target.1.x_m` (no targets)"));
    }
    let mut targets = Vec::new();
    for (slot, n) in indices.iter().enumerate() {
        if *n != slot + 1 {
            return Err(Error::config(format!(
                "target indices must be contiguous from 1; missing target.{}",
                slot + 1
            )));
        }
        let p = |field: &str| format!("target.{n}.{field}");
        targets.push(Target {
            x_m: reader.required_f64(&p("x_m"))?,
            y_m: reader.required_f64(&p("y_m"))?,
            vx_mps: reader.f64_or(&p("vx_mps"), 0.0)?,
            vy_mps: reader.f64_or(&p("vy_mps"), 0.0)?,
            reflectivity_re: reader.f64_or(&p("refl_re"), 1.0)?,
            reflectivity_im: reader.f64_or(&p("refl_im"), 0.0)?,
            behind_wall: reader.bool_or(&p("behind_wall"), false)?,
        });
    }
    Ok(targets)
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let map = parse_lines(text)?;
    let mut r = Reader {
        map,
        used: Default::default(),
    };

    let radar = RadarParams {
        f0_hz: r.required_f64("radar.f0_hz")?,
        bandwidth_hz: r.required_f64("radar.bandwidth_hz")?,
        pulse_width_s: r.required_f64("radar.pulse_width_s")?,
        prf_hz: r.required_f64("radar.prf_hz")?,
        fs_hz: r.required_f64("radar.fs_hz")?,
    };
    let indexing = match r.choice_or("array.indexing", &["from_first", "scaled"], "from_first")? {
        s if s == "scaled" => RxIndexing::Scaled,
        _ => RxIndexing::FromFirst,
    };
    let array = ArrayGeometry {
        n_rx: r.usize_or("array.n_rx", 2)?,
        spacing_m: r.required_f64("array.d_m")?,
        tx_offset_m: r.f64_or("array.dr_m", 0.0)?,
        indexing,
    };
    let platform = PlatformState {
        velocity_mps: r.required_f64("platform.vp_mps")?,
        altitude_m: r.f64_or("platform.h_m", 0.0)?,
        x_start_m: r.f64_or("platform.x_start_m", 0.0)?,
        jitter_std_m: r.f64_or("platform.jitter_std_m", 0.0)?,
        jitter_seed: r.u64_or("platform.jitter_seed", 0)?,
    };
    let wall = WallModel {
        thickness_m: r.f64_or("wall.dw_m", 0.0)?,
        rel_permittivity: r.f64_or("wall.epsr", 1.0)?,
    };
    let targets = parse_targets(&mut r)?;

    let n_pulses = r.usize_or("grid.n_pulses", 128)?;
    let aperture_s = r.f64_or("scene.ta_s", n_pulses as f64 / radar.prf_hz)?;
    let beam_center_offset_s = r.f64_or("scene.eta_c_s", 0.0)?;

    let phase_model = match r.choice_or("sim.phase_model", &["exact", "quadratic"], "exact")? {
        s if s == "quadratic" => PhaseModel::Quadratic,
        _ => PhaseModel::Exact,
    };
    let snr_db = match r.take("sim.snr_db") {
        Some(v) if v == "off" => None,
        Some(v) => Some(parse_f64("sim.snr_db", &v)?),
        None => None,
    };
    let noise_seed = r.u64_or("sim.noise_seed", 0)?;

    let defaults = SuppressionConfig::default();
    let phase_diff_mode = match r.choice_or(
        "suppress.phase_diff",
        &["first_principles", "printed"],
        "first_principles",
    )? {
        s if s == "printed" => PhaseDiffMode::PrintedEq,
        _ => PhaseDiffMode::FirstPrinciples,
    };
    let balance_mode = match r.choice_or("suppress.balance", &["unit_energy", "literal"], "unit_energy")?
    {
        s if s == "literal" => BalanceMode::Literal,
        _ => BalanceMode::UnitEnergy,
    };
    let suppress = SuppressionConfig {
        kappa: r.f64_or("suppress.kappa", defaults.kappa)?,
        epsilon_rel: r.f64_or("suppress.epsilon", defaults.epsilon_rel)?,
        phase_diff_mode,
        balance_mode,
    };

    let rcmc_mode = match r.choice_or("imaging.rcmc", &["scene_center", "per_bin"], "scene_center")? {
        s if s == "per_bin" => RcmcMode::PerBin,
        _ => RcmcMode::SceneCenter,
    };
    let imaging = ImagingConfig {
        vx_mps: r.f64_or("imaging.vx_mps", 0.0)?,
        vy_mps: r.f64_or("imaging.vy_mps", 0.0)?,
        include_linear_term: r.bool_or("imaging.linear_term", false)?,
        assumed_vr_m2ps: r.f64_or("imaging.vr_m2ps", 0.0)?,
        rcmc_mode,
    };

    let box_half_width = r.usize_or("metrics.box_half_width", 3)?;
    let guard = r.usize_or("metrics.guard", 3)?;

    let unknown: Vec<String> = r
        .map
        .keys()
        .filter(|k| !r.used.contains(*k))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(Error::config(format!("unknown keys: {}", unknown.join(", "))));
    }

    let scene = Scene {
        radar,
        array,
        platform,
        wall,
        targets,
        beam_center_offset_s,
        aperture_s,
    };
    scene.validate()?;
    suppress.validate()?;
    imaging.validate(&scene.platform)?;
    if n_pulses < 2 {
        return Err(Error::config("grid.n_pulses must be >= 2"));
    }

    Ok(Scenario {
        scene,
        n_pulses,
        phase_model,
        snr_db,
        noise_seed,
        suppress,
        imaging,
        box_half_width,
        guard,
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

fn fmt_num(v: f64) -> String {
    // shortest round-trip form keeps report echoes deterministic
    let mut s = String::new();
    let _ = write!(s, "{v}");
    s
}

impl Scenario {
    /// Every effective parameter, defaults included, in stable key order.
    pub fn effective_params(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            out.insert(k.to_string(), v);
        };
        let s = &self.scene;
        put("radar.f0_hz", fmt_num(s.radar.f0_hz));
        put("radar.bandwidth_hz", fmt_num(s.radar.bandwidth_hz));
        put("radar.pulse_width_s", fmt_num(s.radar.pulse_width_s));
        put("radar.prf_hz", fmt_num(s.radar.prf_hz));
        put("radar.fs_hz", fmt_num(s.radar.fs_hz));
        put("array.n_rx", s.array.n_rx.to_string());
        put("array.d_m", fmt_num(s.array.spacing_m));
        put("array.dr_m", fmt_num(s.array.tx_offset_m));
        put(
            "array.indexing",
            match s.array.indexing {
                RxIndexing::FromFirst => "from_first",
                RxIndexing::Scaled => "scaled",
            }
            .to_string(),
        );
        put("platform.vp_mps", fmt_num(s.platform.velocity_mps));
        put("platform.h_m", fmt_num(s.platform.altitude_m));
        put("platform.x_start_m", fmt_num(s.platform.x_start_m));
        put("platform.jitter_std_m", fmt_num(s.platform.jitter_std_m));
        put("platform.jitter_seed", s.platform.jitter_seed.to_string());
        put("wall.dw_m", fmt_num(s.wall.thickness_m));
        put("wall.epsr", fmt_num(s.wall.rel_permittivity));
        for (i, t) in s.targets.iter().enumerate() {
            let n = i + 1;
            put(&format!("target.{n}.x_m"), fmt_num(t.x_m));
            put(&format!("target.{n}.y_m"), fmt_num(t.y_m));
            put(&format!("target.{n}.vx_mps"), fmt_num(t.vx_mps));
            put(&format!("target.{n}.vy_mps"), fmt_num(t.vy_mps));
            put(&format!("target.{n}.refl_re"), fmt_num(t.reflectivity_re));
            put(&format!("target.{n}.refl_im"), fmt_num(t.reflectivity_im));
            put(&format!("target.{n}.behind_wall"), t.behind_wall.to_string());
        }
        put("scene.ta_s", fmt_num(s.aperture_s));
        put("scene.eta_c_s", fmt_num(s.beam_center_offset_s));
        put("grid.n_pulses", self.n_pulses.to_string());
        put(
            "sim.phase_model",
            match self.phase_model {
                PhaseModel::Exact => "exact",
                PhaseModel::Quadratic => "quadratic",
            }
            .to_string(),
        );
        put(
            "sim.snr_db",
            match self.snr_db {
                Some(v) => fmt_num(v),
                None => "off".to_string(),
            },
        );
        put("sim.noise_seed", self.noise_seed.to_string());
        put("suppress.kappa", fmt_num(self.suppress.kappa));
        put("suppress.epsilon", fmt_num(self.suppress.epsilon_rel));
        put(
            "suppress.phase_diff",
            match self.suppress.phase_diff_mode {
                PhaseDiffMode::FirstPrinciples => "first_principles",
                PhaseDiffMode::PrintedEq => "printed",
            }
            .to_string(),
        );
        put(
            "suppress.balance",
            match self.suppress.balance_mode {
                BalanceMode::UnitEnergy => "unit_energy",
                BalanceMode::Literal => "literal",
            }
            .to_string(),
        );
        put("imaging.vx_mps", fmt_num(self.imaging.vx_mps));
        put("imaging.vy_mps", fmt_num(self.imaging.vy_mps));
        put(
            "imaging.linear_term",
            self.imaging.include_linear_term.to_string(),
        );
        put("imaging.vr_m2ps", fmt_num(self.imaging.assumed_vr_m2ps));
        put(
            "imaging.rcmc",
            match self.imaging.rcmc_mode {
                RcmcMode::SceneCenter => "scene_center",
                RcmcMode::PerBin => "per_bin",
            }
            .to_string(),
        );
        put("metrics.box_half_width", self.box_half_width.to_string());
        put("metrics.guard", self.guard.to_string());
        out
    }
}
