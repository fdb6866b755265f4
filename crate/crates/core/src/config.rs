//! Scenario configuration files.
//!
//! Line-based `key = value` pairs grouped under `[section]` headers. `#` starts
//! a comment, lists are comma-separated numbers, expressions are double-quoted.
//! A top-level `preset = "paper-example"` loads the built-in three-state
//! example; keys that follow override it.
//!
//! ```text
//! preset = "paper-example"
//!
//! [plant]
//! n = 3
//! alpha = 0.7
//! f1 = "-0.5*x1 - sin(x2) - x3*abs(x3)"
//! f2 = "1"
//! fault = "0.5*cos(0.5*pi*t)"
//! x0 = 0.1, 0.1, -0.1
//!
//! [observer]
//! lambda = 0.1, 0.1, 0.1, 0.1
//! alpha_gain = 1, 2, 5, 10
//! epsilon = 0.05
//! flag_dwell_steps = 1
//! initial = 0, 0, 0, 0, 0, 0, 0, 0     # x̂1..x̂n, x̃2..x̃n, f̃, f̂, θ̃
//!
//! [sim]
//! h = 0.001
//! horizon = 30
//! memory_length = unbounded
//!
//! [output]
//! csv = "trajectory.csv"
//! svg = "figures"
//! band = 0.1
//! ```
//!
//! Optional `[bounds]` (`a`, `A1`, `A2`, `A3`, `Adot1`, `Adot2`, `Adot3`, all
//! required once the section appears) replaces the empirical bounds of the gain
//! check, and `[analysis]` (`lemma_p`, `lemma_tolerance`) configures the
//! Lyapunov inequality check.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::analysis::SpdMatrix;
use crate::expr::{parse, Expr};
use crate::fraccalc::FractionalOrder;
use crate::observer::{GainSet, ObserverState};
use crate::plant::{Bounds, PlantModel};
use crate::sim::Scenario;

pub const PAPER_EXAMPLE: &str = "paper-example";

/// `line` is 1-based; 0 means the error has no source line (overrides, presets).
#[derive(Debug, Error, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub kind: ConfigErrorKind,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.kind)
        } else {
            write!(f, "line {}: {}", self.line, self.kind)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("duplicate key '{0}'")]
    DuplicateKey(String),
    #[error("missing key '{0}'")]
    MissingKey(String),
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("'{key}': malformed number '{value}'")]
    BadNumber { key: String, value: String },
    #[error("'{key}': expected a double-quoted string")]
    ExpectedString { key: String },
    #[error("'{key}' has {got} entries, expected {expected}")]
    Dimension { key: String, expected: usize, got: usize },
    #[error("'{key}': {message}")]
    Invalid { key: String, message: String },
}

fn err(line: usize, kind: ConfigErrorKind) -> ConfigError {
    ConfigError { line, kind }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantConfig {
    pub n: usize,
    pub alpha: f64,
    pub f1: String,
    pub f2: String,
    pub fault: String,
    pub x0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverConfig {
    pub lambda: Vec<f64>,
    pub alpha_gain: Vec<f64>,
    pub epsilon: f64,
    pub flag_dwell_steps: usize,
    /// Packed `[x̂_1..x̂_n, x̃_2..x̃_n, f̃, f̂, θ̃]`; zeros when absent.
    pub initial: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub h: f64,
    pub horizon: f64,
    pub memory_length: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub csv: String,
    pub svg: String,
    /// Metrics band; `2 * epsilon` when absent.
    pub band: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnalysisConfig {
    /// Row-major `(n+1) x (n+1)` weight matrix; identity when absent.
    pub lemma_p: Option<Vec<f64>>,
    pub lemma_tolerance: Option<f64>,
}

/// Fully validated scenario configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub preset: Option<String>,
    pub plant: PlantConfig,
    pub observer: ObserverConfig,
    pub sim: SimConfig,
    pub output: OutputConfig,
    pub bounds: Option<Bounds>,
    pub analysis: AnalysisConfig,
}

impl ScenarioConfig {
    /// The three-state example: alpha = 0.7, fault 0.5 cos(0.5 pi t), zero observer start.
    pub fn paper_example() -> Self {
        Self {
            preset: Some(PAPER_EXAMPLE.to_string()),
            plant: PlantConfig {
                n: 3,
                alpha: 0.7,
                f1: "-0.5*x1 - sin(x2) - x3*abs(x3)".to_string(),
                f2: "1".to_string(),
                fault: "0.5*cos(0.5*pi*t)".to_string(),
                x0: vec![0.1, 0.1, -0.1],
            },
            observer: ObserverConfig {
                lambda: vec![0.1, 0.1, 0.1, 0.1],
                alpha_gain: vec![1.0, 2.0, 5.0, 10.0],
                epsilon: 0.05,
                flag_dwell_steps: 1,
                initial: None,
            },
            sim: SimConfig {
                h: 1e-3,
                horizon: 30.0,
                memory_length: None,
            },
            output: OutputConfig {
                csv: "trajectory.csv".to_string(),
                svg: "figures".to_string(),
                band: None,
            },
            bounds: None,
            analysis: AnalysisConfig::default(),
        }
    }

    pub fn band(&self) -> f64 {
        self.output.band.unwrap_or(2.0 * self.observer.epsilon)
    }

    /// Plant model and observer scenario. The config is validated at load,
    /// so this only fails if fields were edited afterwards.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let p = &self.plant;
        let alpha = FractionalOrder::new(p.alpha).map_err(|e| invalid(0, "plant.alpha", e))?;
        let expr = |key: &str, text: &str| parse(text).map_err(|e| invalid(0, key, e));
        let plant = PlantModel::new(
            alpha,
            expr("plant.f1", &p.f1)?,
            expr("plant.f2", &p.f2)?,
            expr("plant.fault", &p.fault)?,
            p.x0.clone(),
        )
        .map_err(|e| invalid(0, "plant", e))?;
        let o = &self.observer;
        let gains =
            GainSet::new(o.lambda.clone(), o.alpha_gain.clone(), o.epsilon).map_err(|e| invalid(0, "observer", e))?;
        let observer_initial = match &o.initial {
            Some(v) => ObserverState::from_packed(p.n, v).map_err(|e| invalid(0, "observer.initial", e))?,
            None => ObserverState::zeros(p.n),
        };
        Ok(Scenario {
            plant,
            gains,
            observer_initial,
            flag_dwell_steps: o.flag_dwell_steps,
            step: self.sim.h,
            horizon: self.sim.horizon,
            memory_length: self.sim.memory_length,
        })
    }

    pub fn lemma_matrix(&self) -> Result<SpdMatrix, ConfigError> {
        let dim = self.plant.n + 1;
        match &self.analysis.lemma_p {
            Some(p) => SpdMatrix::new(dim, p.clone()).map_err(|e| invalid(0, "analysis.lemma_p", e)),
            None => Ok(SpdMatrix::identity(dim)),
        }
    }

    /// Applies step/horizon overrides and re-checks the grid.
    pub fn with_grid(mut self, h: Option<f64>, horizon: Option<f64>) -> Result<Self, ConfigError> {
        if let Some(h) = h {
            self.sim.h = h;
        }
        if let Some(t) = horizon {
            self.sim.horizon = t;
        }
        check_grid(&self.sim, 0)?;
        Ok(self)
    }

    /// Canonical text form; `load_config(&c.to_text())` reproduces `c`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(p) = &self.preset {
            let _ = writeln!(out, "preset = \"{p}\"\n");
        }
        let p = &self.plant;
        let _ = writeln!(out, "[plant]");
        let _ = writeln!(out, "n = {}", p.n);
        let _ = writeln!(out, "alpha = {:?}", p.alpha);
        let _ = writeln!(out, "f1 = \"{}\"", p.f1);
        let _ = writeln!(out, "f2 = \"{}\"", p.f2);
        let _ = writeln!(out, "fault = \"{}\"", p.fault);
        let _ = writeln!(out, "x0 = {}", list(&p.x0));
        let o = &self.observer;
        let _ = writeln!(out, "\n[observer]");
        let _ = writeln!(out, "lambda = {}", list(&o.lambda));
        let _ = writeln!(out, "alpha_gain = {}", list(&o.alpha_gain));
        let _ = writeln!(out, "epsilon = {:?}", o.epsilon);
        let _ = writeln!(out, "flag_dwell_steps = {}", o.flag_dwell_steps);
        let zeros = vec![0.0; 2 * p.n + 2];
        let _ = writeln!(out, "initial = {}", list(o.initial.as_ref().unwrap_or(&zeros)));
        let s = &self.sim;
        let _ = writeln!(out, "\n[sim]");
        let _ = writeln!(out, "h = {:?}", s.h);
        let _ = writeln!(out, "horizon = {:?}", s.horizon);
        match s.memory_length {
            Some(l) => {
                let _ = writeln!(out, "memory_length = {l}");
            }
            None => {
                let _ = writeln!(out, "memory_length = unbounded");
            }
        }
        let _ = writeln!(out, "\n[output]");
        let _ = writeln!(out, "csv = \"{}\"", self.output.csv);
        let _ = writeln!(out, "svg = \"{}\"", self.output.svg);
        let _ = writeln!(out, "band = {:?}", self.band());
        if let Some(b) = &self.bounds {
            let _ = writeln!(out, "\n[bounds]");
            let _ = writeln!(out, "a = {}", list(&b.a));
            for (k, v) in [
                ("A1", b.a1),
                ("A2", b.a2),
                ("A3", b.a3),
                ("Adot1", b.adot1),
                ("Adot2", b.adot2),
                ("Adot3", b.adot3),
            ] {
                let _ = writeln!(out, "{k} = {v:?}");
            }
        }
        let a = &self.analysis;
        if a.lemma_p.is_some() || a.lemma_tolerance.is_some() {
            let _ = writeln!(out, "\n[analysis]");
            if let Some(p) = &a.lemma_p {
                let _ = writeln!(out, "lemma_p = {}", list(p));
            }
            if let Some(t) = a.lemma_tolerance {
                let _ = writeln!(out, "lemma_tolerance = {t:?}");
            }
        }
        out
    }
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ")
}

fn invalid(line: usize, key: &str, e: impl fmt::Display) -> ConfigError {
    err(
        line,
        ConfigErrorKind::Invalid {
            key: key.to_string(),
            message: e.to_string(),
        },
    )
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

const SECTIONS: [(&str, &[&str]); 6] = [
    ("plant", &["n", "alpha", "f1", "f2", "fault", "x0"]),
    (
        "observer",
        &["lambda", "alpha_gain", "epsilon", "flag_dwell_steps", "initial"],
    ),
    ("sim", &["h", "horizon", "memory_length"]),
    ("output", &["csv", "svg", "band"]),
    ("bounds", &["a", "A1", "A2", "A3", "Adot1", "Adot2", "Adot3"]),
    ("analysis", &["lemma_p", "lemma_tolerance"]),
];

fn strip_comment(line: &str) -> &str {
    let mut in_string = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_string = !in_string,
            '#' if !in_string => return &line[..i],
            _ => {}
        }
    }
    line
}

struct Document {
    entries: BTreeMap<(String, String), Entry>,
    sections: BTreeMap<String, usize>,
    last_line: usize,
}

impl Document {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut sections = BTreeMap::new();
        let mut section = String::new();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            last_line = line;
            let content = strip_comment(raw).trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, ConfigErrorKind::Syntax("unterminated section header".into())))?
                    .trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(err(line, ConfigErrorKind::UnknownSection(name.to_string())));
                }
                section = name.to_string();
                sections.entry(section.clone()).or_insert(line);
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                err(
                    line,
                    ConfigErrorKind::Syntax(format!("expected 'key = value', found '{content}'")),
                )
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(err(line, ConfigErrorKind::Syntax("empty key".into())));
            }
            let known = if section.is_empty() {
                key == "preset"
            } else {
                SECTIONS.iter().any(|(s, keys)| *s == section && keys.contains(&key))
            };
            let qualified = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            if !known {
                return Err(err(line, ConfigErrorKind::UnknownKey(qualified)));
            }
            let previous = entries.insert(
                (section.clone(), key.to_string()),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
            if previous.is_some() {
                return Err(err(line, ConfigErrorKind::DuplicateKey(qualified)));
            }
        }
        Ok(Self {
            entries,
            sections,
            last_line,
        })
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn missing(&self, section: &str, key: &str) -> ConfigError {
        let line = self.sections.get(section).copied().unwrap_or(self.last_line);
        err(line, ConfigErrorKind::MissingKey(format!("{section}.{key}")))
    }

    fn line_of(&self, section: &str, key: &str) -> usize {
        self.get(section, key)
            .map(|e| e.line)
            .or_else(|| self.sections.get(section).copied())
            .unwrap_or(0)
    }
}

fn number(key: &str, e: &Entry) -> Result<f64, ConfigError> {
    e.value.parse::<f64>().map_err(|_| {
        err(
            e.line,
            ConfigErrorKind::BadNumber {
                key: key.to_string(),
                value: e.value.clone(),
            },
        )
    })
}

fn numbers(key: &str, e: &Entry) -> Result<Vec<f64>, ConfigError> {
    e.value
        .split(',')
        .map(|part| {
            part.trim().parse::<f64>().map_err(|_| {
                err(
                    e.line,
                    ConfigErrorKind::BadNumber {
                        key: key.to_string(),
                        value: part.trim().to_string(),
                    },
                )
            })
        })
        .collect()
}

fn integer(key: &str, e: &Entry) -> Result<usize, ConfigError> {
    e.value.parse::<usize>().map_err(|_| {
        err(
            e.line,
            ConfigErrorKind::BadNumber {
                key: key.to_string(),
                value: e.value.clone(),
            },
        )
    })
}

fn string(key: &str, e: &Entry) -> Result<String, ConfigError> {
    let v = e.value.as_str();
    if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') && !v[1..v.len() - 1].contains('"') {
        Ok(v[1..v.len() - 1].to_string())
    } else {
        Err(err(e.line, ConfigErrorKind::ExpectedString { key: key.to_string() }))
    }
}

fn check_grid(sim: &SimConfig, line: usize) -> Result<(), ConfigError> {
    if !(sim.h.is_finite() && sim.h > 0.0) {
        return Err(invalid(line, "sim.h", format!("step must be positive, got {}", sim.h)));
    }
    if !(sim.horizon.is_finite() && sim.horizon > sim.h) {
        return Err(invalid(
            line,
            "sim.horizon",
            format!("horizon {} must exceed the step {}", sim.horizon, sim.h),
        ));
    }
    Ok(())
}

/// Parses and validates a configuration.
pub fn load_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    load_config_with_preset(text, None)
}

/// Built-in preset by name.
pub fn preset(name: &str) -> Option<ScenarioConfig> {
    (name == PAPER_EXAMPLE).then(ScenarioConfig::paper_example)
}

/// Like [`load_config`], with `default_preset` applied when the text names none.
pub fn load_config_with_preset(text: &str, default_preset: Option<&str>) -> Result<ScenarioConfig, ConfigError> {
    let doc = Document::parse(text)?;
    let base = match doc.get("", "preset") {
        Some(e) => {
            let name = string("preset", e)?;
            Some(preset(&name).ok_or_else(|| err(e.line, ConfigErrorKind::UnknownPreset(name)))?)
        }
        None => match default_preset {
            Some(name) => Some(preset(name).ok_or_else(|| err(0, ConfigErrorKind::UnknownPreset(name.to_string())))?),
            None => None,
        },
    };

    // Each field: the file's value if present, else the preset's, else an error.
    macro_rules! field {
        ($section:literal, $key:literal, $conv:ident, $from_base:expr) => {
            match doc.get($section, $key) {
                Some(e) => $conv(concat!($section, ".", $key), e)?,
                None => match &base {
                    Some(b) => $from_base(b),
                    None => return Err(doc.missing($section, $key)),
                },
            }
        };
    }
    macro_rules! optional {
        ($section:literal, $key:literal, $conv:ident, $from_base:expr) => {
            match doc.get($section, $key) {
                Some(e) => Some($conv(concat!($section, ".", $key), e)?),
                None => base.as_ref().and_then($from_base),
            }
        };
    }

    let n: usize = field!("plant", "n", integer, |b: &ScenarioConfig| b.plant.n);
    let plant = PlantConfig {
        n,
        alpha: field!("plant", "alpha", number, |b: &ScenarioConfig| b.plant.alpha),
        f1: field!("plant", "f1", string, |b: &ScenarioConfig| b.plant.f1.clone()),
        f2: field!("plant", "f2", string, |b: &ScenarioConfig| b.plant.f2.clone()),
        fault: field!("plant", "fault", string, |b: &ScenarioConfig| b.plant.fault.clone()),
        x0: field!("plant", "x0", numbers, |b: &ScenarioConfig| b.plant.x0.clone()),
    };
    let observer = ObserverConfig {
        lambda: field!("observer", "lambda", numbers, |b: &ScenarioConfig| b
            .observer
            .lambda
            .clone()),
        alpha_gain: field!("observer", "alpha_gain", numbers, |b: &ScenarioConfig| b
            .observer
            .alpha_gain
            .clone()),
        epsilon: match doc.get("observer", "epsilon") {
            Some(e) => number("observer.epsilon", e)?,
            None => base.as_ref().map_or(0.05, |b| b.observer.epsilon),
        },
        flag_dwell_steps: match doc.get("observer", "flag_dwell_steps") {
            Some(e) => integer("observer.flag_dwell_steps", e)?,
            None => base.as_ref().map_or(1, |b| b.observer.flag_dwell_steps),
        },
        initial: optional!("observer", "initial", numbers, |b: &ScenarioConfig| b
            .observer
            .initial
            .clone()),
    };
    let sim = SimConfig {
        h: match doc.get("sim", "h") {
            Some(e) => number("sim.h", e)?,
            None => base.as_ref().map_or(1e-3, |b| b.sim.h),
        },
        horizon: match doc.get("sim", "horizon") {
            Some(e) => number("sim.horizon", e)?,
            None => base.as_ref().map_or(30.0, |b| b.sim.horizon),
        },
        memory_length: match doc.get("sim", "memory_length") {
            Some(e) if e.value == "unbounded" => None,
            Some(e) => Some(integer("sim.memory_length", e)?),
            None => base.as_ref().and_then(|b| b.sim.memory_length),
        },
    };
    let output = OutputConfig {
        csv: match doc.get("output", "csv") {
            Some(e) => string("output.csv", e)?,
            None => "trajectory.csv".to_string(),
        },
        svg: match doc.get("output", "svg") {
            Some(e) => string("output.svg", e)?,
            None => "figures".to_string(),
        },
        band: optional!("output", "band", number, |b: &ScenarioConfig| b.output.band),
    };
    let bounds = if doc.sections.contains_key("bounds") {
        let get = |key: &'static str| doc.get("bounds", key).ok_or_else(|| doc.missing("bounds", key));
        Some(Bounds {
            a: numbers("bounds.a", get("a")?)?,
            a1: number("bounds.A1", get("A1")?)?,
            a2: number("bounds.A2", get("A2")?)?,
            a3: number("bounds.A3", get("A3")?)?,
            adot1: number("bounds.Adot1", get("Adot1")?)?,
            adot2: number("bounds.Adot2", get("Adot2")?)?,
            adot3: number("bounds.Adot3", get("Adot3")?)?,
        })
    } else {
        base.as_ref().and_then(|b| b.bounds.clone())
    };
    let analysis = AnalysisConfig {
        lemma_p: optional!("analysis", "lemma_p", numbers, |b: &ScenarioConfig| b
            .analysis
            .lemma_p
            .clone()),
        lemma_tolerance: optional!("analysis", "lemma_tolerance", number, |b: &ScenarioConfig| b
            .analysis
            .lemma_tolerance),
    };

    let config = ScenarioConfig {
        preset: base.as_ref().and_then(|b| b.preset.clone()),
        plant,
        observer,
        sim,
        output,
        bounds,
        analysis,
    };
    validate(&config, &doc)?;
    Ok(config)
}

fn validate(c: &ScenarioConfig, doc: &Document) -> Result<(), ConfigError> {
    let n = c.plant.n;
    let line = |s: &str, k: &str| doc.line_of(s, k);
    let dim = |section: &str, key: &str, expected: usize, got: usize| {
        if expected == got {
            Ok(())
        } else {
            Err(err(
                line(section, key),
                ConfigErrorKind::Dimension {
                    key: format!("{section}.{key}"),
                    expected,
                    got,
                },
            ))
        }
    };
    if n < 2 {
        return Err(invalid(line("plant", "n"), "plant.n", "dimension must be at least 2"));
    }
    dim("plant", "x0", n, c.plant.x0.len())?;
    dim("observer", "lambda", n + 1, c.observer.lambda.len())?;
    dim("observer", "alpha_gain", n + 1, c.observer.alpha_gain.len())?;
    if let Some(init) = &c.observer.initial {
        dim("observer", "initial", 2 * n + 2, init.len())?;
    }
    FractionalOrder::new(c.plant.alpha).map_err(|e| invalid(line("plant", "alpha"), "plant.alpha", e))?;
    for (key, text) in [("f1", &c.plant.f1), ("f2", &c.plant.f2), ("fault", &c.plant.fault)] {
        parse(text).map_err(|e| invalid(line("plant", key), &format!("plant.{key}"), e))?;
    }
    let exprs: Vec<Expr> = [&c.plant.f1, &c.plant.f2, &c.plant.fault]
        .iter()
        .map(|t| parse(t).expect("parsed above"))
        .collect();
    for (key, e) in ["f1", "f2"].iter().zip(&exprs) {
        if e.max_state_index() > n {
            return Err(invalid(
                line("plant", key),
                &format!("plant.{key}"),
                format!("references x{} but n = {n}", e.max_state_index()),
            ));
        }
    }
    if c.observer.flag_dwell_steps == 0 {
        return Err(invalid(
            line("observer", "flag_dwell_steps"),
            "observer.flag_dwell_steps",
            "must be at least 1",
        ));
    }
    check_grid(&c.sim, line("sim", "h").max(line("sim", "horizon")))?;
    if c.sim.memory_length == Some(0) {
        return Err(invalid(
            line("sim", "memory_length"),
            "sim.memory_length",
            "must be at least 1",
        ));
    }
    if let Some(band) = c.output.band {
        if !(band.is_finite() && band > 0.0) {
            return Err(invalid(line("output", "band"), "output.band", "must be positive"));
        }
    }
    if let Some(b) = &c.bounds {
        dim("bounds", "a", n, b.a.len())?;
        if !b.is_valid() {
            return Err(invalid(
                line("bounds", "a"),
                "bounds",
                "all bounds must be positive and finite",
            ));
        }
    }
    if let Some(p) = &c.analysis.lemma_p {
        dim("analysis", "lemma_p", (n + 1) * (n + 1), p.len())?;
    }
    if let Some(t) = c.analysis.lemma_tolerance {
        if !(t.is_finite() && t >= 0.0) {
            return Err(invalid(
                line("analysis", "lemma_tolerance"),
                "analysis.lemma_tolerance",
                "must be non-negative",
            ));
        }
    }
    // remaining cross-field checks (gain signs, epsilon, f1/f2 time use, SPD)
    // surface through the same constructors the simulation uses
    c.scenario().map_err(|mut e| {
        e.line = match &e.kind {
            ConfigErrorKind::Invalid { key, .. } if key.starts_with("observer") => line("observer", "lambda"),
            ConfigErrorKind::Invalid { key, .. } if key.starts_with("plant") => line("plant", "f1"),
            _ => e.line,
        };
        e
    })?;
    c.lemma_matrix().map_err(|mut e| {
        e.line = line("analysis", "lemma_p");
        e
    })?;
    Ok(())
}
