//! Flat `key = value` experiment configs.
//!
//! One assignment per line, `#` starts a comment. Lists are comma
//! separated. `experiment` is required; every other key has a default.
//! Floats are written back with Rust's shortest round-trip formatting, so
//! [`ExperimentConfig::to_canonical_string`] is a fixed point of parsing.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    OutageSweep,
    FblSurface,
    V2iLatency,
    V2vEpisode,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [
        Experiment::OutageSweep,
        Experiment::FblSurface,
        Experiment::V2iLatency,
        Experiment::V2vEpisode,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::OutageSweep => "outage-sweep",
            Experiment::FblSurface => "fbl-surface",
            Experiment::V2iLatency => "v2i-latency",
            Experiment::V2vEpisode => "v2v-episode",
        }
    }

    fn keys(self) -> &'static [KeySpec] {
        match self {
            Experiment::OutageSweep => OUTAGE_KEYS,
            Experiment::FblSurface => FBL_KEYS,
            Experiment::V2iLatency => V2I_KEYS,
            Experiment::V2vEpisode => V2V_KEYS,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!(
                    "unknown experiment `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    UInt,
    Float,
    /// A float, or `auto` to let the model pick.
    FloatOrAuto,
    UIntList,
    FloatList,
    Text,
}

impl Kind {
    fn describe(self) -> &'static str {
        match self {
            Kind::UInt => "a non-negative integer",
            Kind::Float => "a finite number",
            Kind::FloatOrAuto => "a finite number or `auto`",
            Kind::UIntList => "a comma-separated list of non-negative integers",
            Kind::FloatList => "a comma-separated list of finite numbers",
            Kind::Text => "a non-empty string",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    UInt(u64),
    Float(f64),
    Auto,
    UIntList(Vec<u64>),
    FloatList(Vec<f64>),
    Text(String),
}

fn parse_float(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    let items: Option<Vec<T>> = s.split(',').map(|p| item(p.trim())).collect();
    items.filter(|v| !v.is_empty())
}

impl Value {
    fn parse(kind: Kind, raw: &str) -> Option<Value> {
        match kind {
            Kind::UInt => raw.parse().ok().map(Value::UInt),
            Kind::Float => parse_float(raw).map(Value::Float),
            Kind::FloatOrAuto if raw == "auto" => Some(Value::Auto),
            Kind::FloatOrAuto => parse_float(raw).map(Value::Float),
            Kind::UIntList => parse_list(raw, |p| p.parse().ok()).map(Value::UIntList),
            Kind::FloatList => parse_list(raw, parse_float).map(Value::FloatList),
            Kind::Text => (!raw.is_empty()).then(|| Value::Text(raw.to_string())),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join<T: fmt::Debug>(items: &[T]) -> String {
            items
                .iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(", ")
        }
        match self {
            Value::UInt(n) => write!(f, "{n}"),
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Auto => f.write_str("auto"),
            Value::UIntList(v) => f.write_str(&join(v)),
            Value::FloatList(v) => f.write_str(&join(v)),
            Value::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    /// Default in config syntax.
    pub default: &'static str,
}

const fn key(name: &'static str, kind: Kind, default: &'static str) -> KeySpec {
    KeySpec {
        name,
        kind,
        default,
    }
}

const COMMON_KEYS: &[KeySpec] = &[
    key("seed", Kind::UInt, "1"),
    key("output_dir", Kind::Text, "out"),
];

const OUTAGE_KEYS: &[KeySpec] = &[
    key("packet_bits", Kind::Float, "256"),
    key("bandwidth_hz", Kind::Float, "180000"),
    key("numerology", Kind::UInt, "0"),
    key("latency_min_ms", Kind::Float, "1"),
    key("latency_max_ms", Kind::Float, "1000"),
    key("latency_points", Kind::UInt, "31"),
    key("n_rx", Kind::UIntList, "1, 2, 3, 4"),
    key("avg_snr_db", Kind::FloatList, "10, 20"),
    key("correlation", Kind::Float, "0.5"),
    key("mc_trials", Kind::UInt, "200000"),
];

const FBL_KEYS: &[KeySpec] = &[
    key("bandwidth_hz", Kind::Float, "200000"),
    key("snr_db", Kind::FloatList, "0, 10"),
    key("latency_min_ms", Kind::Float, "0.01"),
    key("latency_max_ms", Kind::Float, "1"),
    key("latency_points", Kind::UInt, "21"),
    key("error_prob", Kind::FloatList, "1e-3, 1e-5, 1e-7, 1e-9"),
];

const V2I_KEYS: &[KeySpec] = &[
    key(
        "kappa",
        Kind::FloatList,
        "0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1, 0.11, 0.12, 0.13, 0.14, 0.15",
    ),
    key("road_length_m", Kind::Float, "200"),
    key("bs_offset_m", Kind::Float, "20"),
    key("free_flow_kmh", Kind::Float, "80"),
    key("max_density", Kind::Float, "0.15"),
    key("antennas", Kind::UInt, "300"),
    key("bandwidth_hz", Kind::Float, "200000"),
    key("total_power_dbw", Kind::Float, "10"),
    key("noise_figure_db", Kind::Float, "9"),
    key("noise_power_w", Kind::FloatOrAuto, "auto"),
    key("pathloss_exponent", Kind::Float, "2.5"),
    key("ref_gain", Kind::FloatOrAuto, "auto"),
    key("reference_snr_db", Kind::Float, "30"),
    key("reference_density", Kind::Float, "0.05"),
    key("placement", Kind::Text, "equispaced"),
    key("rate_kbps", Kind::Float, "100"),
    key("error_prob", Kind::Float, "1e-6"),
    key("latency_cap_ms", Kind::Float, "10000"),
];

const V2V_KEYS: &[KeySpec] = &[
    key("blocks_x", Kind::UInt, "3"),
    key("blocks_y", Kind::UInt, "3"),
    key("block_width_m", Kind::Float, "433"),
    key("block_height_m", Kind::Float, "250"),
    key("sidewalk_width_m", Kind::Float, "3"),
    key("lanes_per_direction", Kind::UInt, "2"),
    key("lane_width_m", Kind::Float, "3.5"),
    key("vehicle_speed_kmh", Kind::Float, "60"),
    key("turn_left", Kind::Float, "0.25"),
    key("turn_straight", Kind::Float, "0.5"),
    key("turn_right", Kind::Float, "0.25"),
    key("cues", Kind::UInt, "8"),
    key("vue_pairs", Kind::UInt, "4"),
    key("pair_distance_cap_m", Kind::Float, "50"),
    key("rb_bandwidth_hz", Kind::Float, "180000"),
    key("noise_figure_db", Kind::Float, "9"),
    key("noise_power_w", Kind::FloatOrAuto, "auto"),
    key("cue_max_power_dbm", Kind::Float, "23"),
    key("vue_max_power_dbm", Kind::Float, "23"),
    key("los_exponent", Kind::Float, "2.2"),
    key("nlos_exponent", Kind::Float, "4"),
    key("nlos_penalty_db", Kind::Float, "20"),
    key("ref_gain_db", Kind::Float, "-38"),
    key("reference_distance_m", Kind::Float, "10"),
    key("latency_threshold_ms", Kind::Float, "100"),
    key("violation_prob", Kind::Float, "0.05"),
    key("arrival_rate", Kind::Float, "1"),
    key("packet_bits", Kind::Float, "2048"),
    key("packets", Kind::UInt, "100000"),
    key("histogram_max_ms", Kind::Float, "300"),
];

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: Value,
    /// Line the value was read from; `None` for defaults and overrides.
    line: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    experiment: Experiment,
    experiment_line: usize,
    entries: BTreeMap<&'static str, Entry>,
}

fn spec_for(experiment: Experiment, name: &str) -> Option<&'static KeySpec> {
    COMMON_KEYS
        .iter()
        .chain(experiment.keys())
        .find(|k| k.name == name)
}

/// Parses config text. Reports the first error with its 1-based line.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut assignments = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            reason: format!("expected `key = value`, got `{content}`"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::Parse {
                line,
                reason: "empty key".into(),
            });
        }
        if let Some(&(_, first, _)) = assignments.iter().find(|(name, _, _)| *name == k) {
            return Err(Error::Parse {
                line,
                reason: format!("duplicate key `{k}` (first set on line {first})"),
            });
        }
        assignments.push((k, line, v));
    }

    let (experiment, experiment_line) = match assignments.iter().find(|a| a.0 == "experiment") {
        Some(&(_, line, v)) => (
            v.parse::<Experiment>()
                .map_err(|reason| Error::Parse { line, reason })?,
            line,
        ),
        None => return Err(Error::MissingKey("experiment")),
    };

    let mut entries = BTreeMap::new();
    for &(k, line, v) in assignments.iter().filter(|a| a.0 != "experiment") {
        let spec = spec_for(experiment, k).ok_or_else(|| Error::Parse {
            line,
            reason: format!("unknown key `{k}` for experiment `{experiment}`"),
        })?;
        let value = Value::parse(spec.kind, v).ok_or_else(|| Error::Parse {
            line,
            reason: format!("`{k}` expects {}, got `{v}`", spec.kind.describe()),
        })?;
        entries.insert(
            spec.name,
            Entry {
                value,
                line: Some(line),
            },
        );
    }
    for spec in COMMON_KEYS.iter().chain(experiment.keys()) {
        entries.entry(spec.name).or_insert_with(|| Entry {
            value: Value::parse(spec.kind, spec.default).expect("defaults are well-typed"),
            line: None,
        });
    }
    Ok(ExperimentConfig {
        experiment,
        experiment_line,
        entries,
    })
}

impl ExperimentConfig {
    /// Config with every key at its default.
    pub fn defaults(experiment: Experiment) -> Self {
        parse_config(&format!("experiment = {experiment}")).expect("defaults parse")
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment
    }

    pub fn experiment_line(&self) -> usize {
        self.experiment_line
    }

    /// Keys valid for this config's experiment, in canonical order.
    pub fn keys(&self) -> impl Iterator<Item = &'static KeySpec> {
        COMMON_KEYS.iter().chain(self.experiment.keys())
    }

    pub fn value(&self, key: &str) -> Option<&Value> {
        self.entries.get(key).map(|e| &e.value)
    }

    /// Source line of `key`, if it was set in the parsed text.
    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).and_then(|e| e.line)
    }

    /// Replaces a value after parsing (command-line overrides).
    pub fn set(&mut self, key: &str, value: Value) -> Result<()> {
        let spec = spec_for(self.experiment, key).ok_or_else(|| Error::Validation {
            line: None,
            key: "override",
            reason: format!("unknown key `{key}` for experiment `{}`", self.experiment),
        })?;
        let ok = matches!(
            (spec.kind, &value),
            (Kind::UInt, Value::UInt(_))
                | (Kind::Float, Value::Float(_))
                | (Kind::FloatOrAuto, Value::Float(_) | Value::Auto)
                | (Kind::UIntList, Value::UIntList(_))
                | (Kind::FloatList, Value::FloatList(_))
                | (Kind::Text, Value::Text(_))
        );
        if !ok {
            return Err(Error::Validation {
                line: None,
                key: spec.name,
                reason: format!("expects {}", spec.kind.describe()),
            });
        }
        self.entries.insert(spec.name, Entry { value, line: None });
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.uint("seed")
    }

    pub fn output_dir(&self) -> &str {
        self.text("output_dir")
    }

    fn get(&self, key: &str) -> &Value {
        self.value(key)
            .unwrap_or_else(|| panic!("`{key}` is not a key of {}", self.experiment))
    }

    pub fn uint(&self, key: &str) -> u64 {
        match self.get(key) {
            Value::UInt(n) => *n,
            other => panic!("`{key}` is not an integer: {other:?}"),
        }
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(x) => *x,
            other => panic!("`{key}` is not a number: {other:?}"),
        }
    }

    pub fn float_or_auto(&self, key: &str) -> Option<f64> {
        match self.get(key) {
            Value::Float(x) => Some(*x),
            Value::Auto => None,
            other => panic!("`{key}` is not a number: {other:?}"),
        }
    }

    pub fn uints(&self, key: &str) -> &[u64] {
        match self.get(key) {
            Value::UIntList(v) => v,
            other => panic!("`{key}` is not an integer list: {other:?}"),
        }
    }

    pub fn floats(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Value::FloatList(v) => v,
            other => panic!("`{key}` is not a number list: {other:?}"),
        }
    }

    pub fn text(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Text(s) => s,
            other => panic!("`{key}` is not a string: {other:?}"),
        }
    }

    /// Validation error pointing at `key`.
    pub fn invalid(&self, key: &'static str, reason: impl Into<String>) -> Error {
        Error::Validation {
            line: self.line_of(key),
            key,
            reason: reason.into(),
        }
    }

    /// Every key, defaults included, one per line in canonical order.
    pub fn to_canonical_string(&self) -> String {
        let mut out = format!("experiment = {}\n", self.experiment);
        for spec in self.keys() {
            out.push_str(&format!("{} = {}\n", spec.name, self.get(spec.name)));
        }
        out
    }
}
