//! Line-oriented `key = value` experiment configuration.
//!
//! Blank lines and everything after `#` are ignored. Numbers accept the
//! fraction form `a/b`, so `grid_h = 1/64` works. Lists are comma
//! separated, except `norms`, which is separated by `;` because rectangle
//! norms carry their own commas. See the README for the full key table.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use maxreg_core::{Extension, NormSpec64, Profile1d, ProfileSpec, ProfileSpec64};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("key `{key}`: {reason}")]
    Value { key: String, reason: String },
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    SquareDemo,
    Theorem1Sweep,
    Counterexample,
    Continuity,
    LipschitzEnk,
    OracleEquivalence,
    Bench,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::SquareDemo,
        Experiment::Theorem1Sweep,
        Experiment::Counterexample,
        Experiment::Continuity,
        Experiment::LipschitzEnk,
        Experiment::OracleEquivalence,
        Experiment::Bench,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Experiment::SquareDemo => "square-demo",
            Experiment::Theorem1Sweep => "theorem1-sweep",
            Experiment::Counterexample => "counterexample",
            Experiment::Continuity => "continuity",
            Experiment::LipschitzEnk => "lipschitz-enk",
            Experiment::OracleEquivalence => "oracle-equivalence",
            Experiment::Bench => "bench",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.tag() == s)
            .ok_or_else(|| ConfigError::UnknownExperiment(s.to_string()))
    }
}

/// Which functions an experiment runs on.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusSelection {
    /// The experiment's own default set.
    Default,
    /// Every built-in corpus member.
    All,
    /// Named members; names may refer to built-ins or `profile.<id>` entries.
    Ids(Vec<String>),
    /// `n` built-in families with parameters drawn from `seed`.
    Random(usize),
}

/// How the counterexample grid follows `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    /// Same half extent for every `m`.
    Fixed,
    /// Half extent scaled by `√m`.
    Sqrt,
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleParams {
    pub m_list: Vec<u32>,
    pub g: Profile1d<f64>,
    pub half_extent: f64,
    pub growth: Growth,
    /// Spacing is `min(h_max, h_per_m / m)`.
    pub h_max: f64,
    pub h_per_m: f64,
    pub min_increase: f64,
    pub v2_tol: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub square_variation: f64,
    pub square_jump: f64,
    pub centered_jump: f64,
    pub refine: f64,
    pub continuity: f64,
    pub quasiball: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dims: Vec<usize>,
    pub grid_h: f64,
    pub refine_h: Option<f64>,
    pub half_extent: Vec<f64>,
    pub norms: Vec<NormSpec64>,
    pub radius_caps: Vec<f64>,
    pub extension: Extension,
    pub corpus: CorpusSelection,
    pub profiles: BTreeMap<String, ProfileSpec64>,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Use the brute-force kernel in the sweep instead of the pruned one.
    pub brute: bool,
    pub jump_threshold: f64,
    pub continuity_h: Vec<f64>,
    /// Spacings at which the quasiball jump must match the fine oracle.
    pub stable_h: Vec<f64>,
    pub oracle_h: f64,
    pub enk_n: Vec<u32>,
    pub enk_k: Vec<f64>,
    pub oracle_max_nodes: usize,
    pub oracle_mutation: bool,
    pub bench_sizes: Vec<usize>,
    pub bench_min_speedup: f64,
    pub bench_target_speedup: f64,
    pub counterexample: CounterexampleParams,
    pub tol: Tolerances,
}

impl ExperimentConfig {
    /// Defaults for `experiment`, sized for a desk machine.
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            dims: vec![2],
            grid_h: 1.0 / 32.0,
            refine_h: None,
            half_extent: vec![2.0],
            norms: vec![NormSpec64::Linf],
            radius_caps: Vec::new(),
            extension: Extension::Constant,
            corpus: CorpusSelection::Default,
            profiles: BTreeMap::new(),
            seed: 0,
            out: PathBuf::from("results"),
            threads: None,
            brute: false,
            jump_threshold: 0.25,
            continuity_h: vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0],
            stable_h: vec![1.0 / 32.0, 1.0 / 64.0],
            oracle_h: 1.0 / 128.0,
            enk_n: vec![1, 2, 4],
            enk_k: vec![0.25, 0.5, 1.0],
            oracle_max_nodes: 100_000,
            oracle_mutation: false,
            bench_sizes: vec![65, 129, 257],
            bench_min_speedup: 5.0,
            bench_target_speedup: 20.0,
            counterexample: CounterexampleParams {
                m_list: vec![1, 2, 4, 8, 16, 32, 64],
                g: Profile1d::Tent { width: 2.0 },
                half_extent: 4.0,
                growth: Growth::Fixed,
                h_max: 1.0 / 64.0,
                h_per_m: 0.5,
                min_increase: 0.01,
                v2_tol: 0.03,
            },
            tol: Tolerances {
                square_variation: 0.02,
                square_jump: 0.03,
                centered_jump: 0.05,
                refine: 0.15,
                continuity: 0.05,
                quasiball: 0.20,
            },
        }
    }

    /// Half extent along `axis`; a single configured value applies to all axes.
    pub fn half_extent_for(&self, dim: usize) -> Vec<f64> {
        if self.half_extent.len() == 1 {
            vec![self.half_extent[0]; dim]
        } else {
            self.half_extent.clone()
        }
    }

    pub fn experiment_dir(&self) -> PathBuf {
        self.out.join(self.experiment.tag())
    }

    pub fn from_file(path: &Path, experiment: Option<Experiment>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, experiment)
    }

    /// Parses config text. `experiment` overrides (or supplies) the
    /// `experiment` key; one of the two must be present.
    pub fn parse(text: &str, experiment: Option<Experiment>) -> Result<Self, ConfigError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1, reason: "empty key".into() });
            }
            pairs.push((i + 1, k.to_string(), v.trim().to_string()));
        }

        let from_text = pairs
            .iter()
            .find(|(_, k, _)| k == "experiment")
            .map(|(_, _, v)| v.parse::<Experiment>())
            .transpose()?;
        let exp = experiment.or(from_text).ok_or_else(|| ConfigError::Value {
            key: "experiment".into(),
            reason: "no experiment given".into(),
        })?;
        let mut cfg = ExperimentConfig::new(exp);
        for (line, k, v) in pairs {
            if k == "experiment" {
                continue;
            }
            cfg.set(&k, &v).map_err(|e| match e {
                ConfigError::Value { key, reason } => {
                    ConfigError::Syntax { line, reason: format!("{key}: {reason}") }
                }
                other => other,
            })?;
        }
        cfg.check()?;
        Ok(cfg)
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let err = |reason: String| ConfigError::Value { key: key.to_string(), reason };
        let real = |s: &str| parse_real(s).map_err(err);
        let reals = |s: &str| parse_list(s, parse_real).map_err(err);
        let ints =
            |s: &str| parse_list(s, |t| t.parse::<u64>().map_err(|e| format!("`{t}`: {e}"))).map_err(err);
        let boolean = |s: &str| match s {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(err(format!("expected a boolean, got `{s}`"))),
        };

        if let Some(id) = key.strip_prefix("profile.") {
            let spec = parse_profile(value).map_err(err)?;
            self.profiles.insert(id.to_string(), spec);
            return Ok(());
        }
        match key {
            "dim" | "dims" => self.dims = ints(value)?.into_iter().map(|d| d as usize).collect(),
            "grid_h" => self.grid_h = real(value)?,
            "refine_h" => self.refine_h = Some(real(value)?),
            "half_extent" => self.half_extent = reals(value)?,
            "norms" | "norm" => {
                self.norms = value
                    .split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<NormSpec64>().map_err(|e| err(e.to_string())))
                    .collect::<Result<_, _>>()?
            }
            "radius_caps" | "radius_cap" => self.radius_caps = reals(value)?,
            "extension" => {
                self.extension = match value {
                    "constant" => Extension::Constant,
                    "zero" => Extension::Zero,
                    _ => return Err(err(format!("expected constant or zero, got `{value}`"))),
                }
            }
            "corpus" => self.corpus = parse_corpus(value).map_err(err)?,
            "seed" => self.seed = value.parse().map_err(|e| err(format!("{e}")))?,
            "out" => self.out = PathBuf::from(value),
            "threads" => self.threads = Some(value.parse().map_err(|e| err(format!("{e}")))?),
            "algo" => {
                self.brute = match value {
                    "brute" => true,
                    "pruned" => false,
                    _ => return Err(err(format!("expected brute or pruned, got `{value}`"))),
                }
            }
            "jump_threshold" => self.jump_threshold = real(value)?,
            "continuity.h_list" => self.continuity_h = reals(value)?,
            "continuity.stable_h" => self.stable_h = reals(value)?,
            "continuity.oracle_h" => self.oracle_h = real(value)?,
            "enk.n" => self.enk_n = ints(value)?.into_iter().map(|n| n as u32).collect(),
            "enk.k" => self.enk_k = reals(value)?,
            "oracle.max_nodes" => self.oracle_max_nodes = value.parse().map_err(|e| err(format!("{e}")))?,
            "oracle.mutation" => self.oracle_mutation = boolean(value)?,
            "bench.sizes" => self.bench_sizes = ints(value)?.into_iter().map(|n| n as usize).collect(),
            "bench.min_speedup" => self.bench_min_speedup = real(value)?,
            "bench.target_speedup" => self.bench_target_speedup = real(value)?,
            "m_list" | "ce.m_list" => {
                self.counterexample.m_list = ints(value)?.into_iter().map(|m| m as u32).collect()
            }
            "ce.g" => self.counterexample.g = parse_profile1d(value).map_err(err)?,
            "ce.half_extent" => self.counterexample.half_extent = real(value)?,
            "ce.growth" => {
                self.counterexample.growth = match value {
                    "fixed" => Growth::Fixed,
                    "sqrt" => Growth::Sqrt,
                    _ => return Err(err(format!("expected fixed or sqrt, got `{value}`"))),
                }
            }
            "ce.h_max" => self.counterexample.h_max = real(value)?,
            "ce.h_per_m" => self.counterexample.h_per_m = real(value)?,
            "ce.min_increase" => self.counterexample.min_increase = real(value)?,
            "ce.v2_tol" => self.counterexample.v2_tol = real(value)?,
            "tol.square_variation" => self.tol.square_variation = real(value)?,
            "tol.square_jump" => self.tol.square_jump = real(value)?,
            "tol.centered_jump" => self.tol.centered_jump = real(value)?,
            "tol.refine" => self.tol.refine = real(value)?,
            "tol.continuity" => self.tol.continuity = real(value)?,
            "tol.quasiball" => self.tol.quasiball = real(value)?,
            _ => return Err(err("unknown key".into())),
        }
        Ok(())
    }

    /// Cross-field validation run after parsing and after CLI overrides.
    pub fn check(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, reason: String| Err(ConfigError::Value { key: key.into(), reason });
        if self.dims.is_empty() || self.dims.contains(&0) {
            return bad("dim", "dimensions must be positive".into());
        }
        if !(self.grid_h > 0.0) {
            return bad("grid_h", format!("must be positive, got {}", self.grid_h));
        }
        if self.half_extent.iter().any(|e| !(*e > 0.0)) {
            return bad("half_extent", "must be positive".into());
        }
        if self.half_extent.len() > 1 && self.dims.iter().any(|d| *d != self.half_extent.len()) {
            return bad("half_extent", "per-axis list does not match dim".into());
        }
        if self.norms.is_empty() {
            return bad("norms", "at least one norm is required".into());
        }
        let m = &self.counterexample.m_list;
        if m.is_empty() || m.contains(&0) || m.windows(2).any(|w| w[0] >= w[1]) {
            return bad("m_list", "must be a strictly ascending list of positive integers".into());
        }
        if let CorpusSelection::Ids(ids) = &self.corpus {
            let builtin = maxreg_core::default_corpus::<f64>();
            for id in ids {
                if !self.profiles.contains_key(id) && !builtin.iter().any(|(b, _)| b == id) {
                    return bad("corpus", format!("unknown corpus member `{id}`"));
                }
            }
        }
        for (id, spec) in &self.profiles {
            spec.validate()
                .map_err(|e| ConfigError::Value { key: format!("profile.{id}"), reason: e.to_string() })?;
        }
        Ok(())
    }
}

/// Parses a real number, accepting `a/b`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
            a / b
        }
        None => s.parse().map_err(|e| format!("`{s}`: {e}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(item).collect()
}

fn parse_corpus(s: &str) -> Result<CorpusSelection, String> {
    match s {
        "default" => Ok(CorpusSelection::Default),
        "all" => Ok(CorpusSelection::All),
        _ => {
            if let Some(n) = s.strip_prefix("random:") {
                let n = n.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
                return Ok(CorpusSelection::Random(n));
            }
            let ids: Vec<String> = parse_list(s, |t| Ok(t.to_string()))?;
            if ids.is_empty() {
                return Err("empty corpus".into());
            }
            Ok(CorpusSelection::Ids(ids))
        }
    }
}

fn key_values(tokens: &[&str]) -> Result<BTreeMap<String, String>, String> {
    tokens
        .iter()
        .map(|t| {
            t.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| format!("expected key=value, got `{t}`"))
        })
        .collect()
}

fn take_real(kv: &mut BTreeMap<String, String>, key: &str) -> Result<f64, String> {
    let v = kv.remove(key).ok_or_else(|| format!("missing `{key}`"))?;
    parse_real(&v)
}

fn finish(kv: BTreeMap<String, String>) -> Result<(), String> {
    match kv.keys().next() {
        Some(k) => Err(format!("unexpected parameter `{k}`")),
        None => Ok(()),
    }
}

fn shape_from(kind: &str, kv: &mut BTreeMap<String, String>) -> Result<Profile1d<f64>, String> {
    Ok(match kind {
        "exp" => Profile1d::Exp { rate: take_real(kv, "rate")? },
        "gaussian" => Profile1d::Gaussian { sigma: take_real(kv, "sigma")? },
        "tent" => Profile1d::Tent { width: take_real(kv, "width")? },
        "step" => Profile1d::Step { radius: take_real(kv, "radius")? },
        "power" => Profile1d::Power { exponent: take_real(kv, "exponent")?, cap: take_real(kv, "cap")? },
        "constant" => Profile1d::Constant { value: take_real(kv, "value")? },
        _ => return Err(format!("unknown profile shape `{kind}`")),
    })
}

/// Parses a one-dimensional profile: `tent width=2`, `exp rate=1`, ...
pub fn parse_profile1d(s: &str) -> Result<Profile1d<f64>, String> {
    let tokens: Vec<&str> = s.split_whitespace().collect();
    let (kind, rest) = tokens.split_first().ok_or("empty profile")?;
    let mut kv = key_values(rest)?;
    let g = shape_from(kind, &mut kv)?;
    finish(kv)?;
    Ok(g)
}

/// Parses a profile family:
///
/// ```text
/// square side=1
/// quasiball p=0.5 radius=1
/// radial norm=l2 shape=exp rate=1
/// separable m=4 shape=tent width=2
/// ```
pub fn parse_profile(s: &str) -> Result<ProfileSpec64, String> {
    let tokens: Vec<&str> = s.split_whitespace().collect();
    let (family, rest) = tokens.split_first().ok_or("empty profile")?;
    let mut kv = key_values(rest)?;
    let spec = match *family {
        "square" => ProfileSpec::Square { side: take_real(&mut kv, "side")? },
        "quasiball" => {
            ProfileSpec::QuasiBall { p: take_real(&mut kv, "p")?, radius: take_real(&mut kv, "radius")? }
        }
        "radial" => {
            let norm = kv.remove("norm").ok_or("missing `norm`")?;
            let norm: NormSpec64 = norm.parse().map_err(|e: maxreg_core::Error| e.to_string())?;
            let shape = kv.remove("shape").ok_or("missing `shape`")?;
            let profile = shape_from(&shape, &mut kv)?;
            ProfileSpec::Radial { norm, profile }
        }
        "separable" => {
            let m = kv.remove("m").ok_or("missing `m`")?;
            let m: u32 = m.parse().map_err(|e| format!("m: {e}"))?;
            let shape = kv.remove("shape").ok_or("missing `shape`")?;
            let g = shape_from(&shape, &mut kv)?;
            ProfileSpec::Separable { m, g }
        }
        _ => return Err(format!("unknown profile family `{family}`")),
    };
    finish(kv)?;
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}
