//! Run configuration: flags, an optional key-value file, and validation.
//!
//! The file holds one `key = value` per line, keys named like the flags
//! without the leading dashes. `#` starts a comment. `sweep` may repeat.
//! A flag replaces the file's value for its key; any initial-state flag
//! replaces the file's whole initial-state group, and any `--sweep` replaces
//! all file sweeps.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use super::angle::parse_angle;
use super::table::Format;
use super::CliError;
use crate::channels::NoiseParams;
use crate::geometry::{bloch_from_angles, BlochVector, GateSpec, Vec3};
use crate::special::Concentration;

pub const KEYS: [&str; 14] = [
    "theta", "axis", "k-dephase", "k-tilt", "b0", "alpha", "gamma", "radius", "steps", "sweep",
    "output", "format", "seed", "samples",
];

const INITIAL_KEYS: [&str; 4] = ["b0", "alpha", "gamma", "radius"];

pub const DEFAULT_STEPS: usize = 20;

/// Raw settings by key, before interpretation.
pub type Settings = BTreeMap<String, Vec<String>>;

pub fn parse_file(text: &str) -> Result<Settings, CliError> {
    let mut settings = Settings::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::config(
                "config",
                format!("line {}: expected key = value, got {raw:?}", no + 1),
            ));
        };
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::config(
                "config",
                format!("line {}: unknown key {key:?}", no + 1),
            ));
        }
        let values = settings.entry(key.clone()).or_default();
        if !values.is_empty() && key != "sweep" {
            return Err(CliError::config(
                "config",
                format!("line {}: {key} given twice", no + 1),
            ));
        }
        values.push(value.trim().to_string());
    }
    Ok(settings)
}

/// Lays `flags` over `file`.
pub fn merge(mut file: Settings, flags: Settings) -> Settings {
    if INITIAL_KEYS.iter().any(|k| flags.contains_key(*k)) {
        for k in INITIAL_KEYS {
            file.remove(k);
        }
    }
    for (k, v) in flags {
        file.insert(k, v);
    }
    file
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Theta,
    KDephase,
    KTilt,
    Alpha,
}

impl SweepParam {
    pub fn column(self) -> &'static str {
        match self {
            SweepParam::Theta => "theta",
            SweepParam::KDephase => "k_dephase",
            SweepParam::KTilt => "k_tilt",
            SweepParam::Alpha => "alpha",
        }
    }

    fn parse(name: &str) -> Result<Self, CliError> {
        match name.trim().replace('-', "_").as_str() {
            "theta" => Ok(SweepParam::Theta),
            "k_dephase" => Ok(SweepParam::KDephase),
            "k_tilt" => Ok(SweepParam::KTilt),
            "alpha" => Ok(SweepParam::Alpha),
            other => Err(CliError::config(
                "sweep",
                format!("unknown parameter {other:?}, expected theta, k_dephase, k_tilt or alpha"),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    /// Radians for angles; concentrations with `f64::INFINITY` for the sentinel.
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialState {
    Cartesian(Vec3),
    Angles { radius: f64, alpha: f64, gamma: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub theta: Option<f64>,
    /// Unit rotation axis.
    pub axis: Vec3,
    pub noise: NoiseParams,
    pub initial: InitialState,
    pub steps: usize,
    pub sweep: Vec<Sweep>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
}

fn single<'a>(s: &'a Settings, key: &str) -> Option<&'a str> {
    s.get(key).and_then(|v| v.last()).map(String::as_str)
}

fn triple(key: &'static str, text: &str) -> Result<Vec3, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::config(key, format!("expected x,y,z, got {text:?}")));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(parts) {
        *slot = p
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| CliError::config(key, format!("cannot read {p:?} as a number")))?;
    }
    Ok(Vec3::from(v))
}

fn angle(key: &'static str, text: &str) -> Result<f64, CliError> {
    parse_angle(text).map_err(|e| CliError::config(key, e))
}

fn concentration(key: &'static str, text: &str) -> Result<Concentration, CliError> {
    text.parse::<Concentration>()
        .map_err(|e| CliError::config(key, e.to_string()))
}

fn real(key: &'static str, text: &str) -> Result<f64, CliError> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::config(key, format!("cannot read {text:?} as a number")))
}

fn integer<T: std::str::FromStr>(key: &'static str, text: &str) -> Result<T, CliError> {
    text.trim()
        .parse::<T>()
        .map_err(|_| CliError::config(key, format!("cannot read {text:?} as a non-negative integer")))
}

fn parse_sweep(text: &str) -> Result<Sweep, CliError> {
    let Some((name, list)) = text.split_once('=') else {
        return Err(CliError::config("sweep", format!("expected name=v1,v2,..., got {text:?}")));
    };
    let param = SweepParam::parse(name)?;
    let values = list
        .split(',')
        .map(|v| match param {
            SweepParam::Theta | SweepParam::Alpha => angle("sweep", v),
            SweepParam::KDephase | SweepParam::KTilt => {
                concentration("sweep", v).map(Concentration::as_f64)
            }
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(Sweep { param, values })
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<Self, CliError> {
        let theta = single(s, "theta").map(|t| angle("theta", t)).transpose()?;
        let axis = match single(s, "axis") {
            Some(a) => triple("axis", a)?
                .normalized()
                .map_err(|_| CliError::config("axis", "must be a nonzero vector"))?,
            None => Vec3::Z,
        };
        let k_dephase = match single(s, "k-dephase") {
            Some(k) => concentration("k-dephase", k)?,
            None => Concentration::INFINITE,
        };
        let k_tilt = match single(s, "k-tilt") {
            Some(k) => concentration("k-tilt", k)?,
            None => Concentration::INFINITE,
        };
        let sweep = s
            .get("sweep")
            .map(|list| list.iter().map(|t| parse_sweep(t)).collect::<Result<Vec<_>, _>>())
            .transpose()?
            .unwrap_or_default();
        for (i, a) in sweep.iter().enumerate() {
            if sweep[..i].iter().any(|b| b.param == a.param) {
                return Err(CliError::config(
                    "sweep",
                    format!("{} swept twice", a.param.column()),
                ));
            }
        }
        let sweeps_alpha = sweep.iter().any(|w| w.param == SweepParam::Alpha);

        let angular = ["alpha", "gamma", "radius"].iter().any(|k| s.contains_key(*k));
        let initial = match single(s, "b0") {
            Some(_) if angular => {
                return Err(CliError::config(
                    "b0",
                    "give the initial state either as --b0 or as --alpha/--gamma/--radius, not both",
                ))
            }
            Some(_) if sweeps_alpha => {
                return Err(CliError::config(
                    "sweep",
                    "sweeping alpha needs the initial state as --alpha/--gamma/--radius",
                ))
            }
            Some(b) => InitialState::Cartesian(triple("b0", b)?),
            None if angular || sweeps_alpha => InitialState::Angles {
                radius: single(s, "radius").map(|r| real("radius", r)).transpose()?.unwrap_or(1.0),
                alpha: single(s, "alpha").map(|a| angle("alpha", a)).transpose()?.unwrap_or(PI / 2.0),
                gamma: single(s, "gamma").map(|g| angle("gamma", g)).transpose()?.unwrap_or(0.0),
            },
            None => InitialState::Cartesian(Vec3::X),
        };

        let steps = single(s, "steps")
            .map(|t| integer::<usize>("steps", t))
            .transpose()?
            .unwrap_or(DEFAULT_STEPS);
        let format = single(s, "format")
            .map(|f| f.parse::<Format>().map_err(|e| CliError::config("format", e)))
            .transpose()?
            .unwrap_or(Format::Csv);
        let seed = single(s, "seed").map(|v| integer::<u64>("seed", v)).transpose()?;
        let samples = single(s, "samples")
            .map(|v| integer::<u64>("samples", v))
            .transpose()?;
        if samples == Some(0) {
            return Err(CliError::config("samples", "need at least one sample"));
        }

        let config = RunConfig {
            theta,
            axis,
            noise: NoiseParams::new(k_dephase, k_tilt),
            initial,
            steps,
            sweep,
            output: single(s, "output").map(PathBuf::from),
            format,
            seed,
            samples,
        };
        // surface domain errors of the base point before any work starts
        if !config.sweep.iter().any(|w| w.param == SweepParam::Alpha) {
            config.initial_state(None)?;
        }
        if let Some(theta) = config.theta {
            config.gate(theta)?;
        }
        Ok(config)
    }

    pub fn initial_state(&self, alpha: Option<f64>) -> Result<BlochVector, CliError> {
        match self.initial {
            InitialState::Cartesian(v) => {
                BlochVector::new(v).map_err(|e| CliError::config("b0", e.to_string()))
            }
            InitialState::Angles { radius, alpha: a, gamma } => {
                bloch_from_angles(radius, alpha.unwrap_or(a), gamma).map_err(|e| {
                    let field = match &e {
                        crate::Error::Domain { what, .. } => what,
                        _ => "b0",
                    };
                    CliError::config(field, e.to_string())
                })
            }
        }
    }

    pub fn gate(&self, theta: f64) -> Result<GateSpec, CliError> {
        GateSpec::new(self.axis, theta).map_err(|e| CliError::config("theta", e.to_string()))
    }

    /// Grid points of the sweep, first sweep outermost. A single point when
    /// nothing is swept.
    pub fn points(&self) -> Result<Vec<Point>, CliError> {
        let mut points = vec![Point {
            theta: self.theta,
            noise: self.noise,
            alpha: None,
            labels: Vec::new(),
        }];
        for sweep in &self.sweep {
            let mut next = Vec::with_capacity(points.len() * sweep.values.len());
            for p in &points {
                for &v in &sweep.values {
                    let mut q = p.clone();
                    let cell = match sweep.param {
                        SweepParam::Theta => {
                            q.theta = Some(v);
                            super::table::Cell::Real(v)
                        }
                        SweepParam::Alpha => {
                            q.alpha = Some(v);
                            super::table::Cell::Real(v)
                        }
                        SweepParam::KDephase => {
                            let k = Concentration::new(v).expect("parsed");
                            q.noise.k_dephase = k;
                            super::table::Cell::Conc(k)
                        }
                        SweepParam::KTilt => {
                            let k = Concentration::new(v).expect("parsed");
                            q.noise.k_tilt = k;
                            super::table::Cell::Conc(k)
                        }
                    };
                    q.labels.push(cell);
                    next.push(q);
                }
            }
            points = next;
        }
        Ok(points)
    }

    pub fn sweep_columns(&self) -> Vec<String> {
        self.sweep.iter().map(|w| w.param.column().to_string()).collect()
    }
}

/// One point of a sweep grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub theta: Option<f64>,
    pub noise: NoiseParams,
    pub alpha: Option<f64>,
    pub labels: Vec<super::table::Cell>,
}

impl Point {
    pub fn theta(&self) -> Result<f64, CliError> {
        self.theta
            .ok_or_else(|| CliError::config("theta", "missing: give --theta or sweep theta"))
    }
}
