// Copyright 2026 The gainloss Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: flags over an optional `key = value` file over preset
//! defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use gainloss_core::{ModelParams, Param};

use crate::output::Format;
use crate::presets::{PresetKind, PresetName};
use crate::CliError;

pub const DEFAULT_T_MAX: f64 = 40.0;
pub const DEFAULT_ASYMPTOTIC_T_MAX: f64 = 200.0;
pub const DEFAULT_SAMPLES: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    Spectrum,
    Evolve,
    Steady,
    AsymptoticDiscord,
}

impl Verb {
    pub fn label(self) -> &'static str {
        match self {
            Verb::Spectrum => "spectrum",
            Verb::Evolve => "evolve",
            Verb::Steady => "steady",
            Verb::AsymptoticDiscord => "asymptotic-discord",
        }
    }

    fn of_preset(kind: &PresetKind) -> Self {
        match kind {
            PresetKind::Evolve { .. } => Verb::Evolve,
            PresetKind::Spectrum { .. } => Verb::Spectrum,
            PresetKind::Steady { .. } => Verb::Steady,
            PresetKind::AsymptoticGrid { .. } => Verb::AsymptoticDiscord,
        }
    }
}

/// `name:min:max:count[:log]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub param: Param,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl SweepSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = |why: &str| CliError::Config(format!("malformed sweep '{s}': {why}"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(bad("expected name:min:max:count[:log]"));
        }
        let param = Param::parse(parts[0]).ok_or_else(|| bad("unknown parameter name"))?;
        let num = |x: &str| -> Result<f64, CliError> {
            let v: f64 = x.parse().map_err(|_| bad("bounds must be numbers"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad("bounds must be finite"))
            }
        };
        let (min, max) = (num(parts[1])?, num(parts[2])?);
        let count: usize = parts[3].parse().map_err(|_| bad("count must be a positive integer"))?;
        if count == 0 {
            return Err(bad("count must be at least 1"));
        }
        let log = match parts.get(4) {
            None => false,
            Some(&"log") => true,
            Some(&"lin") | Some(&"linear") => false,
            Some(_) => return Err(bad("spacing must be 'log' or 'linear'")),
        };
        if log && !(min > 0.0 && max > 0.0) {
            return Err(bad("log spacing needs positive bounds"));
        }
        Ok(SweepSpec { param, min, max, count, log })
    }

    /// Sweep points in order; endpoints are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        if n == 1 {
            return vec![self.min];
        }
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    return self.max;
                }
                let u = k as f64 / (n - 1) as f64;
                if self.log {
                    (self.min.ln() + u * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + u * (self.max - self.min)
                }
            })
            .collect()
    }
}

impl fmt::Display for SweepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}:{}:{}",
            self.param,
            self.min,
            self.max,
            self.count,
            if self.log { "log" } else { "linear" }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpec {
    pub t_max: f64,
    pub samples: usize,
    /// Times are absolute rather than in units of 1/g.
    pub absolute: bool,
}

impl TimeSpec {
    /// Conversion factor from reported to absolute time.
    pub fn unit(&self, g: f64) -> Result<f64, CliError> {
        if self.absolute {
            Ok(1.0)
        } else if g > 0.0 {
            Ok(1.0 / g)
        } else {
            Err(CliError::Config(
                "times are in units of 1/g, which needs g > 0; pass --absolute-time".into(),
            ))
        }
    }

    /// Sample times in reported units: `samples` evenly spaced points on
    /// `[0, t_max]`, or just `t = 0` when `t_max = 0`.
    pub fn grid(&self) -> Vec<f64> {
        if self.t_max == 0.0 {
            return vec![0.0];
        }
        let n = self.samples;
        (0..n)
            .map(|k| if k == n - 1 { self.t_max } else { self.t_max * k as f64 / (n - 1) as f64 })
            .collect()
    }

    pub fn unit_label(&self) -> &'static str {
        if self.absolute {
            "absolute"
        } else {
            "1/g"
        }
    }
}

/// Settings as given, before defaults are applied. Later layers override
/// earlier ones field by field.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub g: Option<f64>,
    pub gamma_l: Option<f64>,
    pub gamma_g: Option<f64>,
    pub big_gamma_g: Option<f64>,
    pub sweep: Option<String>,
    pub t_max: Option<f64>,
    pub samples: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub absolute_time: Option<bool>,
}

impl Settings {
    pub fn get(&self, p: Param) -> Option<f64> {
        match p {
            Param::G => self.g,
            Param::GammaL => self.gamma_l,
            Param::GammaG => self.gamma_g,
            Param::BigGammaG => self.big_gamma_g,
        }
    }

    /// `self` with every field set in `top` replaced.
    pub fn overlay(self, top: Settings) -> Settings {
        Settings {
            g: top.g.or(self.g),
            gamma_l: top.gamma_l.or(self.gamma_l),
            gamma_g: top.gamma_g.or(self.gamma_g),
            big_gamma_g: top.big_gamma_g.or(self.big_gamma_g),
            sweep: top.sweep.or(self.sweep),
            t_max: top.t_max.or(self.t_max),
            samples: top.samples.or(self.samples),
            format: top.format.or(self.format),
            out: top.out.or(self.out),
            absolute_time: top.absolute_time.or(self.absolute_time),
        }
    }

    /// Plain `key = value` lines; `#` starts a comment. Keys use the flag
    /// names with either `-` or `_`.
    pub fn parse_file_contents(text: &str, origin: &str) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |why: String| CliError::Config(format!("{origin}:{}: {why}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            let key = key.trim().to_ascii_lowercase().replace('-', "_");
            let value = value.trim();
            let num = || -> Result<f64, CliError> {
                value.parse().map_err(|_| err(format!("{key}: '{value}' is not a number")))
            };
            match key.as_str() {
                "g" => s.g = Some(num()?),
                "gamma_l" => s.gamma_l = Some(num()?),
                "gamma_g" => s.gamma_g = Some(num()?),
                "big_gamma_g" => s.big_gamma_g = Some(num()?),
                "sweep" => s.sweep = Some(value.to_string()),
                "t_max" => s.t_max = Some(num()?),
                "samples" => {
                    s.samples = Some(value.parse().map_err(|_| err(format!("samples: '{value}' is not a count")))?)
                }
                "format" => s.format = Some(value.parse().map_err(err)?),
                "out" => s.out = Some(PathBuf::from(value)),
                "absolute_time" => {
                    s.absolute_time = Some(value.parse().map_err(|_| err(format!("absolute_time: '{value}' is not true/false")))?)
                }
                _ => return Err(err(format!("unknown key '{key}'"))),
            }
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_file_contents(&text, &path.display().to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunMode {
    Point,
    Sweep(SweepSpec),
    Preset(PresetName),
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub verb: Verb,
    pub mode: RunMode,
    /// Point parameters; for sweeps the swept entry holds the first sweep
    /// value, for presets the preset's base point after overrides.
    pub params: ModelParams,
    pub time: TimeSpec,
    pub format: Format,
    pub out: Option<PathBuf>,
}

fn params_from(settings: &Settings, swept: Option<(Param, f64)>, verb: Verb) -> Result<ModelParams, CliError> {
    let imposed = verb == Verb::AsymptoticDiscord;
    if imposed && settings.gamma_l.is_some() {
        return Err(CliError::Config(
            "asymptotic-discord sets gamma_l to big_gamma_g - gamma_g; do not pass gamma_l".into(),
        ));
    }
    let mut missing = Vec::new();
    let mut value = |p: Param| -> f64 {
        if let Some((sp, v)) = swept {
            if sp == p {
                return v;
            }
        }
        if imposed && p == Param::GammaL {
            return 0.0;
        }
        settings.get(p).unwrap_or_else(|| {
            missing.push(p.name());
            0.0
        })
    };
    let (g, gl, gg, bg) = (
        value(Param::G),
        value(Param::GammaL),
        value(Param::GammaG),
        value(Param::BigGammaG),
    );
    if !missing.is_empty() {
        return Err(CliError::Config(format!("missing parameter(s): {}", missing.join(", "))));
    }
    let gl = if imposed { bg - gg } else { gl };
    if imposed && !(bg > gg) {
        return Err(CliError::Config(format!(
            "the PT construction needs big_gamma_g > gamma_g (got {bg} and {gg})"
        )));
    }
    ModelParams::new(g, gl, gg, bg).map_err(|e| CliError::Config(e.to_string()))
}

impl RunConfig {
    /// `preset = None` for the plain verbs.
    pub fn resolve(verb: Option<Verb>, preset: Option<PresetName>, settings: Settings) -> Result<RunConfig, CliError> {
        let format = settings.format.unwrap_or_default();
        let out = settings.out.clone();
        let absolute = settings.absolute_time.unwrap_or(false);
        match preset {
            Some(name) => Self::resolve_preset(name, settings, format, out, absolute),
            None => {
                let verb = verb.ok_or_else(|| CliError::Config("no command given".into()))?;
                let sweep = settings.sweep.as_deref().map(SweepSpec::parse).transpose()?;
                if let Some(sw) = &sweep {
                    if settings.get(sw.param).is_some() {
                        return Err(CliError::Config(format!(
                            "{} is both fixed and swept; pass only one",
                            sw.param
                        )));
                    }
                    if verb == Verb::AsymptoticDiscord && sw.param == Param::GammaL {
                        return Err(CliError::Config("asymptotic-discord cannot sweep gamma_l".into()));
                    }
                }
                let params = params_from(&settings, sweep.map(|s| (s.param, s.values()[0])), verb)?;
                // Validate every sweep point up front so bad ranges fail as config errors.
                if let Some(sw) = &sweep {
                    for v in sw.values() {
                        params_from(&settings, Some((sw.param, v)), verb)?;
                    }
                }
                let t_default = if verb == Verb::AsymptoticDiscord {
                    DEFAULT_ASYMPTOTIC_T_MAX
                } else {
                    DEFAULT_T_MAX
                };
                let time = Self::time_spec(&settings, t_default, DEFAULT_SAMPLES, absolute)?;
                if !absolute && verb != Verb::Spectrum && verb != Verb::Steady {
                    let g_values: Vec<f64> = match &sweep {
                        Some(sw) if sw.param == Param::G => sw.values(),
                        _ => vec![params.g()],
                    };
                    for g in g_values {
                        time.unit(g)?;
                    }
                }
                Ok(RunConfig {
                    verb,
                    mode: sweep.map_or(RunMode::Point, RunMode::Sweep),
                    params,
                    time,
                    format,
                    out,
                })
            }
        }
    }

    fn time_spec(settings: &Settings, t_default: f64, samples_default: usize, absolute: bool) -> Result<TimeSpec, CliError> {
        let t_max = settings.t_max.unwrap_or(t_default);
        if !t_max.is_finite() || t_max < 0.0 {
            return Err(CliError::Config(format!("t_max must be finite and >= 0, got {t_max}")));
        }
        let samples = settings.samples.unwrap_or(samples_default);
        if t_max > 0.0 && samples < 2 {
            return Err(CliError::Config("samples must be at least 2 when t_max > 0".into()));
        }
        Ok(TimeSpec { t_max, samples, absolute })
    }

    fn resolve_preset(
        name: PresetName,
        settings: Settings,
        format: Format,
        out: Option<PathBuf>,
        absolute: bool,
    ) -> Result<RunConfig, CliError> {
        let preset = name.preset();
        if settings.sweep.is_some() {
            return Err(CliError::Config(format!(
                "preset {name} defines its own sweep; --sweep cannot be combined with a preset"
            )));
        }
        if absolute {
            return Err(CliError::Config(format!(
                "preset {name} is laid out in units of 1/g; --absolute-time applies to plain verbs only"
            )));
        }
        let g = settings.g.unwrap_or(preset.g);
        let config_err = |e: gainloss_core::Error| CliError::Config(e.to_string());
        let reject = |what: &[Param]| -> Result<(), CliError> {
            for p in what {
                if settings.get(*p).is_some() {
                    return Err(CliError::Config(format!("preset {name} fixes {p}; it cannot be overridden")));
                }
            }
            Ok(())
        };
        if !(g > 0.0) || !g.is_finite() {
            return Err(CliError::Config(format!("preset {name} needs g > 0, got {g}")));
        }
        let (params, time) = match preset.kind {
            PresetKind::Evolve { series, t_max, samples } => {
                reject(&[Param::GammaL, Param::GammaG, Param::BigGammaG])?;
                let time = Self::time_spec(&settings, t_max, samples, false)?;
                (series[0].params(g).map_err(config_err)?, time)
            }
            PresetKind::Spectrum { gamma_g, big_gamma_g, .. } | PresetKind::Steady { gamma_g, big_gamma_g, .. } => {
                reject(&[Param::GammaL])?;
                let gg = settings.gamma_g.unwrap_or(gamma_g * g);
                let bg = settings.big_gamma_g.unwrap_or(big_gamma_g * g);
                let params = ModelParams::new(g, 0.0, gg, bg).map_err(config_err)?;
                // Sweep ends are defined through thresholds, which need Γ̃ > 0.
                params.thresholds().map_err(config_err)?;
                let time = TimeSpec { t_max: 0.0, samples: 1, absolute: false };
                (params, time)
            }
            PresetKind::AsymptoticGrid { t_max, .. } => {
                reject(&[Param::GammaL, Param::GammaG, Param::BigGammaG])?;
                let time = Self::time_spec(&settings, t_max, 2, false)?;
                (ModelParams::on_pt_line(g, 0.0, g).map_err(config_err)?, time)
            }
        };
        Ok(RunConfig {
            verb: Verb::of_preset(&preset.kind),
            mode: RunMode::Preset(name),
            params,
            time,
            format,
            out,
        })
    }
}
