//! Line-oriented `key = value` run configuration: lexing, per-mode
//! validation and defaults, and canonical rendering.

use crate::sources::{
    spectrum_stats, CoherentSourceConfig, InvalidConfig, SpdcEnsembleConfig, SPEED_OF_LIGHT,
};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Pump-carrier default, twice the signal/idler carrier.
pub const DEFAULT_F0: f64 = 7.4e14;
/// Signal/idler carrier default for the attenuated-laser modes.
pub const DEFAULT_CARRIER_F: f64 = 3.7e14;
const DEFAULT_PULSE_PERIOD: f64 = 1.0e-6;

/// Experiment drivers the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    HomAnalytic,
    HomEnsemble,
    HomEvent,
    MziScan,
    MziEvent,
    WashoutScan,
}

impl RunMode {
    pub fn name(self) -> &'static str {
        match self {
            RunMode::HomAnalytic => "hom-analytic",
            RunMode::HomEnsemble => "hom-ensemble",
            RunMode::HomEvent => "hom-event",
            RunMode::MziScan => "mzi-scan",
            RunMode::MziEvent => "mzi-event",
            RunMode::WashoutScan => "washout-scan",
        }
    }

    pub fn from_name(name: &str) -> Option<RunMode> {
        match name {
            "hom-analytic" => Some(RunMode::HomAnalytic),
            "hom-ensemble" => Some(RunMode::HomEnsemble),
            "hom-event" => Some(RunMode::HomEvent),
            "mzi-scan" => Some(RunMode::MziScan),
            "mzi-event" => Some(RunMode::MziEvent),
            "washout-scan" => Some(RunMode::WashoutScan),
            _ => None,
        }
    }
}

/// Inclusive sweep of the mode's variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRange {
    pub min: f64,
    pub max: f64,
    pub steps: u64,
}

/// Pulsed-run knobs shared by the *-event modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventParams {
    pub n_pulses: u64,
    pub pulse_period: f64,
    pub coincidence_window: f64,
}

impl EventParams {
    pub fn validate(&self) -> Result<(), InvalidConfig> {
        if self.n_pulses < 1 {
            return Err(InvalidConfig {
                field: "n_pulses",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.pulse_period.is_finite() && self.pulse_period > 0.0) {
            return Err(InvalidConfig {
                field: "pulse_period",
                reason: format!("must be positive and finite, got {}", self.pulse_period),
            });
        }
        if !(self.coincidence_window.is_finite()
            && self.coincidence_window > 0.0
            && self.coincidence_window <= self.pulse_period / 2.0)
        {
            return Err(InvalidConfig {
                field: "coincidence_window",
                reason: format!(
                    "must lie in (0, pulse_period/2], got {}",
                    self.coincidence_window
                ),
            });
        }
        Ok(())
    }
}

/// Parameter group selected by the mode.
#[derive(Clone, Debug, PartialEq)]
pub enum ModeParams {
    HomAnalytic { sigma_f: f64 },
    HomEnsemble { spdc: SpdcEnsembleConfig },
    HomEvent { spdc: SpdcEnsembleConfig, event: EventParams },
    MziScan { i0: f64 },
    MziEvent { source: CoherentSourceConfig, event: EventParams },
    Washout { spdc: SpdcEnsembleConfig },
}

/// Fully resolved run description. Embedded source configs carry the
/// top-level seed.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: RunMode,
    pub seed: u64,
    pub output: String,
    pub range: ScanRange,
    pub params: ModeParams,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: cannot parse '{text}' (expected 'key = value')")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key '{key}'")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: {key} expects {expected}, got '{value}'")]
    TypeMismatch {
        line: usize,
        key: String,
        expected: &'static str,
        value: String,
    },
    #[error("missing required key 'mode'")]
    MissingMode,
    #[error("mode {mode} requires key '{key}'")]
    MissingKey { mode: &'static str, key: &'static str },
    #[error("key '{key}' does not apply to mode {mode}")]
    UnusedKey { key: String, mode: &'static str },
    #[error("mode '{file_mode}' from the config file conflicts with '{cli_mode}' from the command line")]
    ModeConflict { file_mode: String, cli_mode: String },
    #[error(transparent)]
    Invalid(#[from] InvalidConfig),
}

const KNOWN_KEYS: &[&str] = &[
    "mode",
    "seed",
    "output",
    "steps",
    "sigma_f",
    "n_pairs",
    "f0",
    "tau_min",
    "tau_max",
    "i0",
    "phi_min",
    "phi_max",
    "x_min",
    "x_max",
    "mean_n",
    "carrier_f",
    "coherence_time",
    "n_pulses",
    "pulse_period",
    "coincidence_window",
];

fn canonical_key(key: &str) -> Option<&'static str> {
    KNOWN_KEYS.iter().copied().find(|&k| k == key)
}

/// Lexed key-value entries with their source lines. Command-line
/// overrides use line 0.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    entries: BTreeMap<&'static str, (usize, String)>,
}

impl Settings {
    /// Replaces a file value with a command-line one. Replacing the mode
    /// with a different mode is a conflict, not an override.
    pub fn override_entry(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let Some(canon) = canonical_key(key) else {
            return Err(ConfigError::UnknownKey {
                line: 0,
                key: key.to_string(),
            });
        };
        if canon == "mode" {
            if let Some((_, existing)) = self.entries.get("mode") {
                if existing != value {
                    return Err(ConfigError::ModeConflict {
                        file_mode: existing.clone(),
                        cli_mode: value.to_string(),
                    });
                }
            }
        }
        self.entries.insert(canon, (0, value.to_string()));
        Ok(())
    }

    /// Fills a key only if nothing set it yet.
    pub fn default_entry(&mut self, key: &str, value: &str) {
        let canon = canonical_key(key).expect("default for a known key");
        self.entries.entry(canon).or_insert((0, value.to_string()));
    }

    /// Reads a lexed value without consuming it.
    pub fn get(&self, key: &str) -> Option<&str> {
        canonical_key(key)
            .and_then(|canon| self.entries.get(canon))
            .map(|(_, value)| value.as_str())
    }

    fn take_raw(&mut self, key: &'static str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn take_f64(&mut self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, value)) => match value.parse::<f64>() {
                Ok(v) => Ok(Some(v)),
                Err(_) => Err(ConfigError::TypeMismatch {
                    line,
                    key: key.to_string(),
                    expected: "a number",
                    value,
                }),
            },
        }
    }

    fn take_u64(&mut self, key: &'static str) -> Result<Option<u64>, ConfigError> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, value)) => match value.parse::<u64>() {
                Ok(v) => Ok(Some(v)),
                Err(_) => Err(ConfigError::TypeMismatch {
                    line,
                    key: key.to_string(),
                    expected: "a nonnegative integer",
                    value,
                }),
            },
        }
    }
}

/// Splits a config document into validated key-value entries. Blank
/// lines and full-line `#` comments are skipped; every key must be
/// known and appear at most once.
pub fn lex_config(text: &str) -> Result<Settings, ConfigError> {
    let mut settings = Settings::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key_part, value_part)) = trimmed.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: trimmed.to_string(),
            });
        };
        let key = key_part.trim();
        let value = value_part.trim();
        let Some(canon) = canonical_key(key) else {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        };
        if value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                text: trimmed.to_string(),
            });
        }
        if settings.entries.insert(canon, (line, value.to_string())).is_some() {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
    }
    Ok(settings)
}

fn missing(mode: RunMode, key: &'static str) -> ConfigError {
    ConfigError::MissingKey {
        mode: mode.name(),
        key,
    }
}

fn invalid(field: &'static str, reason: String) -> ConfigError {
    ConfigError::Invalid(InvalidConfig { field, reason })
}

fn coherence_time_for(sigma_f: f64) -> Result<f64, ConfigError> {
    let probe = SpdcEnsembleConfig {
        n_pairs: 1,
        sigma_f,
        f0: DEFAULT_F0,
        seed: 0,
    };
    Ok(spectrum_stats(&probe)?.coherence_time)
}

fn validate_range(
    range: &ScanRange,
    min_key: &'static str,
    max_key: &'static str,
) -> Result<(), ConfigError> {
    if !range.min.is_finite() {
        return Err(invalid(min_key, format!("must be finite, got {}", range.min)));
    }
    if !range.max.is_finite() {
        return Err(invalid(max_key, format!("must be finite, got {}", range.max)));
    }
    if range.min >= range.max {
        return Err(invalid(
            min_key,
            format!("must lie below {max_key}, got {} vs {}", range.min, range.max),
        ));
    }
    if range.steps < 2 {
        return Err(invalid("steps", format!("need at least 2, got {}", range.steps)));
    }
    Ok(())
}

/// Resolves lexed settings into a validated run description, applying
/// per-mode defaults and rejecting keys the mode does not consume.
pub fn build_config(mut settings: Settings) -> Result<RunConfig, ConfigError> {
    let Some((mode_line, mode_text)) = settings.take_raw("mode") else {
        return Err(ConfigError::MissingMode);
    };
    let Some(mode) = RunMode::from_name(&mode_text) else {
        return Err(ConfigError::TypeMismatch {
            line: mode_line,
            key: "mode".to_string(),
            expected: "one of hom-analytic, hom-ensemble, hom-event, mzi-scan, mzi-event, washout-scan",
            value: mode_text,
        });
    };
    let seed = settings.take_u64("seed")?.unwrap_or(0);
    let output = settings
        .take_raw("output")
        .map(|(_, v)| v)
        .unwrap_or_else(|| format!("{}.csv", mode.name()));
    let steps_given = settings.take_u64("steps")?;

    let (range, params) = match mode {
        RunMode::HomAnalytic | RunMode::HomEnsemble | RunMode::HomEvent => {
            let sigma_f = settings.take_f64("sigma_f")?.ok_or(missing(mode, "sigma_f"))?;
            let t_c = coherence_time_for(sigma_f)?;
            let range = ScanRange {
                min: settings.take_f64("tau_min")?.unwrap_or(-3.0 * t_c),
                max: settings.take_f64("tau_max")?.unwrap_or(3.0 * t_c),
                steps: steps_given.unwrap_or(if mode == RunMode::HomEvent { 41 } else { 2001 }),
            };
            validate_range(&range, "tau_min", "tau_max")?;
            let params = match mode {
                RunMode::HomAnalytic => ModeParams::HomAnalytic { sigma_f },
                _ => {
                    let n_pairs = settings.take_u64("n_pairs")?.ok_or(missing(mode, "n_pairs"))?;
                    let f0 = settings.take_f64("f0")?.unwrap_or(DEFAULT_F0);
                    let spdc = SpdcEnsembleConfig {
                        n_pairs,
                        sigma_f,
                        f0,
                        seed,
                    };
                    spdc.validate()?;
                    if mode == RunMode::HomEvent {
                        let event = take_event_params(&mut settings, mode)?;
                        ModeParams::HomEvent { spdc, event }
                    } else {
                        ModeParams::HomEnsemble { spdc }
                    }
                }
            };
            (range, params)
        }
        RunMode::MziScan | RunMode::MziEvent => {
            let range = ScanRange {
                min: settings.take_f64("phi_min")?.unwrap_or(0.0),
                max: settings.take_f64("phi_max")?.unwrap_or(4.0 * PI),
                steps: steps_given.unwrap_or(if mode == RunMode::MziEvent { 41 } else { 1001 }),
            };
            validate_range(&range, "phi_min", "phi_max")?;
            let params = if mode == RunMode::MziScan {
                let i0 = settings.take_f64("i0")?.unwrap_or(1.0);
                if !(i0.is_finite() && i0 > 0.0) {
                    return Err(invalid("i0", format!("must be positive and finite, got {i0}")));
                }
                ModeParams::MziScan { i0 }
            } else {
                let mean_n = settings.take_f64("mean_n")?.ok_or(missing(mode, "mean_n"))?;
                let carrier_f = settings.take_f64("carrier_f")?.unwrap_or(DEFAULT_CARRIER_F);
                let coherence_time = settings.take_f64("coherence_time")?.unwrap_or(1.0);
                let source = CoherentSourceConfig {
                    f: carrier_f,
                    mean_n,
                    coherence_time,
                    seed,
                };
                source.validate()?;
                let event = take_event_params(&mut settings, mode)?;
                ModeParams::MziEvent { source, event }
            };
            (range, params)
        }
        RunMode::WashoutScan => {
            let sigma_f = settings.take_f64("sigma_f")?.ok_or(missing(mode, "sigma_f"))?;
            let n_pairs = settings.take_u64("n_pairs")?.ok_or(missing(mode, "n_pairs"))?;
            let f0 = settings.take_f64("f0")?.unwrap_or(DEFAULT_F0);
            let spdc = SpdcEnsembleConfig {
                n_pairs,
                sigma_f,
                f0,
                seed,
            };
            spdc.validate()?;
            let fringe_wavelength = 2.0 * SPEED_OF_LIGHT / f0;
            let range = ScanRange {
                min: settings.take_f64("x_min")?.unwrap_or(0.0),
                max: settings.take_f64("x_max")?.unwrap_or(3.0 * fringe_wavelength),
                steps: steps_given.unwrap_or(1001),
            };
            validate_range(&range, "x_min", "x_max")?;
            if range.max - range.min < 3.0 * fringe_wavelength * (1.0 - 1e-12) {
                return Err(invalid(
                    "x_max",
                    format!(
                        "scan must span at least three carrier fringe wavelengths ({:e} m)",
                        3.0 * fringe_wavelength
                    ),
                ));
            }
            (range, ModeParams::Washout { spdc })
        }
    };

    if let Some((&key, _)) = settings.entries.iter().next() {
        return Err(ConfigError::UnusedKey {
            key: key.to_string(),
            mode: mode.name(),
        });
    }
    Ok(RunConfig {
        mode,
        seed,
        output,
        range,
        params,
    })
}

fn take_event_params(settings: &mut Settings, mode: RunMode) -> Result<EventParams, ConfigError> {
    let n_pulses = settings.take_u64("n_pulses")?.ok_or(missing(mode, "n_pulses"))?;
    let pulse_period = settings.take_f64("pulse_period")?.unwrap_or(DEFAULT_PULSE_PERIOD);
    let coincidence_window = settings
        .take_f64("coincidence_window")?
        .unwrap_or(pulse_period / 4.0);
    let event = EventParams {
        n_pulses,
        pulse_period,
        coincidence_window,
    };
    event.validate()?;
    Ok(event)
}

/// Parses a config document into a validated run description.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    build_config(lex_config(text)?)
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Canonical text form: every resolved value explicit, one key per
/// line, fixed order. parse_config(render_config(cfg)) reproduces cfg.
pub fn render_config(cfg: &RunConfig) -> String {
    let mut lines = vec![
        format!("mode = {}", cfg.mode.name()),
        format!("seed = {}", cfg.seed),
        format!("output = {}", cfg.output),
        format!("steps = {}", cfg.range.steps),
    ];
    let mut push = |key: &str, value: String| lines.push(format!("{key} = {value}"));
    match &cfg.params {
        ModeParams::HomAnalytic { sigma_f } => {
            push("sigma_f", fmt_f64(*sigma_f));
            push("tau_max", fmt_f64(cfg.range.max));
            push("tau_min", fmt_f64(cfg.range.min));
        }
        ModeParams::HomEnsemble { spdc } => {
            push("f0", fmt_f64(spdc.f0));
            push("n_pairs", spdc.n_pairs.to_string());
            push("sigma_f", fmt_f64(spdc.sigma_f));
            push("tau_max", fmt_f64(cfg.range.max));
            push("tau_min", fmt_f64(cfg.range.min));
        }
        ModeParams::HomEvent { spdc, event } => {
            push("coincidence_window", fmt_f64(event.coincidence_window));
            push("f0", fmt_f64(spdc.f0));
            push("n_pairs", spdc.n_pairs.to_string());
            push("n_pulses", event.n_pulses.to_string());
            push("pulse_period", fmt_f64(event.pulse_period));
            push("sigma_f", fmt_f64(spdc.sigma_f));
            push("tau_max", fmt_f64(cfg.range.max));
            push("tau_min", fmt_f64(cfg.range.min));
        }
        ModeParams::MziScan { i0 } => {
            push("i0", fmt_f64(*i0));
            push("phi_max", fmt_f64(cfg.range.max));
            push("phi_min", fmt_f64(cfg.range.min));
        }
        ModeParams::MziEvent { source, event } => {
            push("carrier_f", fmt_f64(source.f));
            push("coherence_time", fmt_f64(source.coherence_time));
            push("coincidence_window", fmt_f64(event.coincidence_window));
            push("mean_n", fmt_f64(source.mean_n));
            push("n_pulses", event.n_pulses.to_string());
            push("phi_max", fmt_f64(cfg.range.max));
            push("phi_min", fmt_f64(cfg.range.min));
            push("pulse_period", fmt_f64(event.pulse_period));
        }
        ModeParams::Washout { spdc } => {
            push("f0", fmt_f64(spdc.f0));
            push("n_pairs", spdc.n_pairs.to_string());
            push("sigma_f", fmt_f64(spdc.sigma_f));
            push("x_max", fmt_f64(cfg.range.max));
            push("x_min", fmt_f64(cfg.range.min));
        }
    }
    let mut text = lines.join("\n");
    text.push('\n');
    text
}
