//! Experiment configuration: a flat `key = value` document (or a JSON object
//! with the same keys), validated and completed with defaults.

use std::fmt;
use std::str::FromStr;

use latsec_core::channel::ChannelParams;
use latsec_core::codebook::LayerSpec;
use latsec_core::lattice::{GPrimeSpec, GSpec, LatticeSpec};
use latsec_core::{Error as CoreError, Rational, DEFAULT_BUDGET};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },
}

impl ConfigError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        ConfigError::Parse {
            line,
            message: message.into(),
        }
    }

    fn invalid(field: &str, reason: impl Into<String>) -> Self {
        ConfigError::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// The offending field of a validation error.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Validation { field, .. } => Some(field),
            ConfigError::Parse { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Lattice,
    Lemmas,
    Theorem1,
    Layered,
    Baseline,
    Pipeline,
    Sweep,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Lattice => "lattice",
            Kind::Lemmas => "lemmas",
            Kind::Theorem1 => "theorem1",
            Kind::Layered => "layered",
            Kind::Baseline => "baseline",
            Kind::Pipeline => "pipeline",
            Kind::Sweep => "sweep",
        }
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "lattice" => Kind::Lattice,
            "lemmas" => Kind::Lemmas,
            "theorem1" => Kind::Theorem1,
            "layered" => Kind::Layered,
            "baseline" => Kind::Baseline,
            "pipeline" => Kind::Pipeline,
            "sweep" => Kind::Sweep,
            _ => return Err(format!("unknown experiment kind `{s}`")),
        })
    }
}

/// What a sweep runs at every grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOf {
    Lemmas,
    Theorem1,
    Loopback,
}

impl SweepOf {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepOf::Lemmas => "lemmas",
            SweepOf::Theorem1 => "theorem1",
            SweepOf::Loopback => "loopback",
        }
    }
}

impl FromStr for SweepOf {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "lemmas" => SweepOf::Lemmas,
            "theorem1" => SweepOf::Theorem1,
            "loopback" => SweepOf::Loopback,
            _ => return Err(format!("unknown sweep `{s}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub lattice: LatticeSpec,
    pub a: f64,
    pub b: f64,
    pub power: f64,
    pub ne: f64,
    /// `None`: every divisor for `theorem1`, identity binning for `pipeline`.
    pub num_bins: Option<usize>,
    pub bin_seed: u64,
    pub trials: u64,
    pub root_seed: u64,
    pub budget: u64,
    pub max_layers: usize,
    /// Layers on top of the configured fine lattice; `None` runs the
    /// built-in two-layer set.
    pub layers: Option<Vec<LayerSpec>>,
    pub size: usize,
    pub num_seeds: u64,
    pub sweep: SweepOf,
    pub primes: Vec<u64>,
    pub max_n: usize,
    pub max_size: u64,
    pub seeds: Vec<u64>,
    pub layered_max_size: usize,
}

/// Every accepted key, in canonical order.
pub const KEYS: [&str; 27] = [
    "kind",
    "p",
    "k",
    "n",
    "g",
    "gprime",
    "scale",
    "a",
    "b",
    "P",
    "Ne",
    "numBins",
    "binSeed",
    "trials",
    "rootSeed",
    "budget",
    "maxLayers",
    "layers",
    "size",
    "numSeeds",
    "sweep",
    "primes",
    "maxN",
    "maxSize",
    "seeds",
    "layeredMaxSize",
    "version",
];

impl ExperimentConfig {
    pub fn defaults(kind: Kind) -> Self {
        ExperimentConfig {
            kind,
            lattice: LatticeSpec::seeded(2, 1, 2, 0),
            a: 0.3,
            b: 1.0,
            power: 1.0,
            ne: 1.0,
            num_bins: None,
            bin_seed: 0,
            trials: 10_000,
            root_seed: 0,
            budget: DEFAULT_BUDGET,
            max_layers: 8,
            layers: None,
            size: 16,
            num_seeds: 100,
            sweep: SweepOf::Lemmas,
            primes: vec![2, 3, 5, 7],
            max_n: 6,
            max_size: 512,
            seeds: vec![0, 1, 2, 3, 4],
            layered_max_size: 64,
        }
    }

    pub fn channel(&self) -> Result<ChannelParams, ConfigError> {
        ChannelParams::new(self.a, self.b, self.power, self.ne).map_err(|e| match e {
            CoreError::UnityGain => ConfigError::invalid("a", "a = 1 is excluded"),
            CoreError::InvalidParameter("power") => ConfigError::invalid("P", "must be positive and finite"),
            CoreError::InvalidParameter("ne") => ConfigError::invalid("Ne", "must be non-negative and finite"),
            CoreError::InvalidParameter(f) => ConfigError::invalid(f, "must be finite"),
            other => ConfigError::invalid("channel", other.to_string()),
        })
    }

    /// Checks every field against the core constructors.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let l = &self.lattice;
        if l.n == 0 {
            return Err(ConfigError::invalid("n", "must be at least 1"));
        }
        if l.k == 0 || l.k > l.n {
            return Err(ConfigError::invalid("k", "need 1 <= k <= n"));
        }
        l.build().map_err(|e| match e {
            CoreError::NotPrime(_) => ConfigError::invalid("p", e.to_string()),
            CoreError::NotUnimodular { .. } => ConfigError::invalid("gprime", e.to_string()),
            CoreError::NonPositiveScale => ConfigError::invalid("scale", e.to_string()),
            CoreError::InvalidDimensions(_) if matches!(l.gprime, GPrimeSpec::Explicit(_)) => {
                ConfigError::invalid("gprime", e.to_string())
            }
            _ => ConfigError::invalid("g", e.to_string()),
        })?;
        self.channel()?;
        if let Some(bins) = self.num_bins {
            let mut q = 1usize;
            let mut ok = false;
            for _ in 0..=l.k {
                ok |= q == bins;
                q = q.saturating_mul(l.p as usize);
            }
            if !ok {
                return Err(ConfigError::invalid("numBins", "must be p^j with 0 <= j <= k"));
            }
        }
        for (v, name) in [
            (self.trials, "trials"),
            (self.budget, "budget"),
            (self.num_seeds, "numSeeds"),
            (self.max_layers as u64, "maxLayers"),
            (self.size as u64, "size"),
            (self.max_n as u64, "maxN"),
        ] {
            if v == 0 {
                return Err(ConfigError::invalid(name, "must be positive"));
            }
        }
        if self.primes.is_empty() || self.seeds.is_empty() {
            let f = if self.primes.is_empty() { "primes" } else { "seeds" };
            return Err(ConfigError::invalid(f, "must not be empty"));
        }
        if let Some(layers) = &self.layers {
            if layers.is_empty() {
                return Err(ConfigError::invalid("layers", "must not be empty"));
            }
            if layers.iter().any(|s| s.k == 0 || s.k > l.k) {
                return Err(ConfigError::invalid("layers", "layer k must be in 1..=k"));
            }
        }
        Ok(())
    }

    /// The value of `key` as written in a config document.
    pub fn get(&self, key: &str) -> Option<String> {
        let l = &self.lattice;
        Some(match key {
            "kind" => self.kind.as_str().to_string(),
            "p" => l.p.to_string(),
            "k" => l.k.to_string(),
            "n" => l.n.to_string(),
            "g" => match &l.g {
                GSpec::Seeded(s) => format!("seed:{s}"),
                GSpec::Explicit(e) => join(e),
            },
            "gprime" => match &l.gprime {
                GPrimeSpec::Identity => "identity".to_string(),
                GPrimeSpec::Seeded(s) => format!("seed:{s}"),
                GPrimeSpec::Explicit(e) => join(e),
            },
            "scale" => l.scale.to_string(),
            "a" => self.a.to_string(),
            "b" => self.b.to_string(),
            "P" => self.power.to_string(),
            "Ne" => self.ne.to_string(),
            "numBins" => self.num_bins.map(|b| b.to_string()).unwrap_or_else(|| "auto".to_string()),
            "binSeed" => self.bin_seed.to_string(),
            "trials" => self.trials.to_string(),
            "rootSeed" => self.root_seed.to_string(),
            "budget" => self.budget.to_string(),
            "maxLayers" => self.max_layers.to_string(),
            "layers" => match &self.layers {
                None => "default".to_string(),
                Some(ls) => ls
                    .iter()
                    .map(|s| format!("{}:{}", s.k, s.scale))
                    .collect::<Vec<_>>()
                    .join(","),
            },
            "size" => self.size.to_string(),
            "numSeeds" => self.num_seeds.to_string(),
            "sweep" => self.sweep.as_str().to_string(),
            "primes" => join(&self.primes),
            "maxN" => self.max_n.to_string(),
            "maxSize" => self.max_size.to_string(),
            "seeds" => join(&self.seeds),
            "layeredMaxSize" => self.layered_max_size.to_string(),
            "version" => "1".to_string(),
            _ => return None,
        })
    }

    /// Canonical `key = value` rendering; parses back to the same config.
    pub fn to_text(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.get(k).expect("known key")))
            .collect()
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let l = &mut self.lattice;
        match key {
            "kind" => self.kind = value.parse()?,
            "p" => l.p = num(value)?,
            "k" => l.k = num(value)?,
            "n" => l.n = num(value)?,
            "g" => {
                l.g = match value.strip_prefix("seed:") {
                    Some(s) => GSpec::Seeded(num(s)?),
                    None => GSpec::Explicit(list(value)?),
                }
            }
            "gprime" => {
                l.gprime = if value == "identity" {
                    GPrimeSpec::Identity
                } else if let Some(s) = value.strip_prefix("seed:") {
                    GPrimeSpec::Seeded(num(s)?)
                } else {
                    GPrimeSpec::Explicit(list(value)?)
                }
            }
            "scale" => l.scale = rational(value)?,
            "a" => self.a = num(value)?,
            "b" => self.b = num(value)?,
            "P" => self.power = num(value)?,
            "Ne" => self.ne = num(value)?,
            "numBins" => self.num_bins = if value == "auto" { None } else { Some(num(value)?) },
            "binSeed" => self.bin_seed = num(value)?,
            "trials" => self.trials = num(value)?,
            "rootSeed" => self.root_seed = num(value)?,
            "budget" => self.budget = num(value)?,
            "maxLayers" => self.max_layers = num(value)?,
            "layers" => {
                self.layers = if value == "default" {
                    None
                } else {
                    let mut out = Vec::new();
                    for item in value.split(',') {
                        let (k, s) = item
                            .trim()
                            .split_once(':')
                            .ok_or_else(|| format!("layer `{item}` is not k:scale"))?;
                        out.push(LayerSpec {
                            k: num(k)?,
                            scale: rational(s)?,
                        });
                    }
                    Some(out)
                }
            }
            "size" => self.size = num(value)?,
            "numSeeds" => self.num_seeds = num(value)?,
            "sweep" => self.sweep = value.parse()?,
            "primes" => self.primes = list(value)?,
            "maxN" => self.max_n = num(value)?,
            "maxSize" => self.max_size = num(value)?,
            "seeds" => self.seeds = list(value)?,
            "layeredMaxSize" => self.layered_max_size = num(value)?,
            "version" => {
                if value != "1" {
                    return Err(format!("unsupported config version `{value}`"));
                }
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn num<T: FromStr>(s: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("cannot parse `{}`", s.trim()))
}

fn list<T: FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',').map(num).collect()
}

fn rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let r = match s.split_once('/') {
        Some((a, b)) => {
            let d: i128 = num(b)?;
            if d == 0 {
                return Err("zero denominator".to_string());
            }
            Rational::new(num(a)?, d)
        }
        None => Rational::from_integer(num(s)?),
    };
    Ok(r)
}

/// Parses a config document. JSON objects are recognised by a leading `{`;
/// anything else is read as `key = value` lines with `#` comments. The kind
/// defaults to `fallback` when the document does not name one.
pub fn parse_config(text: &str, fallback: Kind) -> Result<ExperimentConfig, ConfigError> {
    let pairs = if text.trim_start().starts_with('{') {
        json_pairs(text)?
    } else {
        text_pairs(text)?
    };
    let mut cfg = ExperimentConfig::defaults(fallback);
    let mut seen: Vec<&str> = Vec::new();
    for (line, key, value) in &pairs {
        if seen.contains(&key.as_str()) {
            return Err(ConfigError::parse(*line, format!("duplicate key `{key}`")));
        }
        seen.push(key);
        cfg.set(key, value).map_err(|m| ConfigError::parse(*line, m))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn text_pairs(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::parse(i + 1, format!("expected `key = value`, found `{line}`")))?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn json_pairs(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let doc: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ConfigError::parse(e.line(), e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| ConfigError::parse(1, "expected a JSON object"))?;
    let mut out = Vec::new();
    for (k, v) in obj {
        let needle = format!("\"{k}\"");
        let line = text
            .lines()
            .position(|l| l.contains(&needle))
            .map(|i| i + 1)
            .unwrap_or(1);
        let value = match v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::Bool(b) => b.to_string(),
            serde_json::Value::Array(items) => {
                let mut parts = Vec::new();
                for item in items {
                    match item {
                        serde_json::Value::String(s) => parts.push(s.clone()),
                        serde_json::Value::Number(n) => parts.push(n.to_string()),
                        _ => return Err(ConfigError::parse(line, format!("`{k}` must hold numbers or strings"))),
                    }
                }
                parts.join(",")
            }
            _ => return Err(ConfigError::parse(line, format!("`{k}` has an unsupported value"))),
        };
        out.push((line, k.clone(), value));
    }
    Ok(out)
}
