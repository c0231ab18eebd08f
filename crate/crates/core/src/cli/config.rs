use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::GaugeKind;

/// Every recognised key with its default value.
pub const KEYS: &[(&str, &str)] = &[
    ("dataset", "blobs"),
    ("d_in", "16"),
    ("classes", "4"),
    ("n", "400"),
    ("spread", "5"),
    ("d_h", "64"),
    ("epochs", "50"),
    ("lr", "0.1"),
    ("seed", "0"),
    ("kind", "general"),
    ("kappa", "1,2,5,10,20,50"),
    ("seeds", "5"),
    ("k", "10"),
    ("out", "out"),
    ("workers", "0"),
    ("energy", "1"),
    ("sanity_kappa", "10"),
    ("omega", "1,1,1,1"),
    ("model", ""),
];

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Blobs {
        d_in: usize,
        classes: usize,
        n: usize,
        spread: f64,
    },
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: DatasetSpec,
    pub d_h: usize,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    pub kind: GaugeKind,
    pub kappas: Vec<f64>,
    pub seeds: usize,
    pub k: usize,
    pub out: PathBuf,
    /// Rayon worker count; 0 lets rayon decide.
    pub workers: usize,
    pub energy: f64,
    pub sanity_kappa: f64,
    /// Per-block variances of the diagonal Ω, in (W1, b1, W2, b2) order.
    pub omega: [f64; 4],
    /// Checkpoint to load instead of training.
    pub model: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_entries(&BTreeMap::new()).expect("defaults are valid")
    }
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
        let key = key.trim();
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(Error::Config(format!("line {}: unknown key `{key}`", i + 1)));
        }
        if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(entries)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_text(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse::<f64>(key, s))
        .collect()
}

impl RunConfig {
    /// Builds a config from explicit entries, falling back to defaults.
    pub fn from_entries(entries: &BTreeMap<String, String>) -> Result<Self> {
        let get = |key: &str| -> &str {
            entries.get(key).map(String::as_str).unwrap_or_else(|| {
                KEYS.iter().find(|(k, _)| *k == key).map(|(_, v)| *v).unwrap_or("")
            })
        };

        let dataset = match get("dataset") {
            "blobs" => DatasetSpec::Blobs {
                d_in: parse("d_in", get("d_in"))?,
                classes: parse("classes", get("classes"))?,
                n: parse("n", get("n"))?,
                spread: parse("spread", get("spread"))?,
            },
            s => match s.strip_prefix("csv:") {
                Some(p) if !p.is_empty() => DatasetSpec::Csv(PathBuf::from(p)),
                _ => return Err(Error::Config(format!("`dataset` must be blobs or csv:<path>, got `{s}`"))),
            },
        };

        let omega = parse_list("omega", get("omega"))?;
        let omega: [f64; 4] = omega
            .try_into()
            .map_err(|_| Error::Config("`omega` needs four block variances".into()))?;
        let model = match get("model") {
            "" => None,
            p => Some(PathBuf::from(p)),
        };

        let cfg = RunConfig {
            dataset,
            d_h: parse("d_h", get("d_h"))?,
            epochs: parse("epochs", get("epochs"))?,
            lr: parse("lr", get("lr"))?,
            seed: parse("seed", get("seed"))?,
            kind: get("kind").parse()?,
            kappas: parse_list("kappa", get("kappa"))?,
            seeds: parse("seeds", get("seeds"))?,
            k: parse("k", get("k"))?,
            out: PathBuf::from(get("out")),
            workers: parse("workers", get("workers"))?,
            energy: parse("energy", get("energy"))?,
            sanity_kappa: parse("sanity_kappa", get("sanity_kappa"))?,
            omega,
            model,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if let DatasetSpec::Blobs { d_in, classes, n, spread } = self.dataset {
            if d_in == 0 || classes < 2 || n < classes {
                return bad("blobs need d_in >= 1, classes >= 2, n >= classes".into());
            }
            if !(spread >= 0.0 && spread.is_finite()) {
                return bad(format!("`spread` must be finite and >= 0, got {spread}"));
            }
        }
        if self.d_h == 0 {
            return bad("`d_h` must be positive".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("`lr` must be positive, got {}", self.lr));
        }
        if self.kappas.is_empty() {
            return bad("`kappa` list is empty".into());
        }
        if let Some(bad_k) = self.kappas.iter().find(|k| !(**k >= 1.0 && k.is_finite())) {
            return bad(format!("every kappa must be finite and >= 1, got {bad_k}"));
        }
        if self.kappas.windows(2).any(|w| w[0] >= w[1]) {
            return bad("`kappa` list must be strictly ascending".into());
        }
        if !(self.sanity_kappa >= 1.0 && self.sanity_kappa.is_finite()) {
            return bad(format!("`sanity_kappa` must be >= 1, got {}", self.sanity_kappa));
        }
        if self.seeds == 0 {
            return bad("`seeds` must be at least 1".into());
        }
        if self.k == 0 {
            return bad("`k` must be at least 1".into());
        }
        if !(self.energy > 0.0 && self.energy <= 1.0) {
            return bad(format!("`energy` must be in (0, 1], got {}", self.energy));
        }
        if self.omega.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return bad("`omega` variances must be finite and >= 0".into());
        }
        if self.kind == GaugeKind::Whitening {
            return bad("`kind` = whitening is data-dependent; use the whiten command".into());
        }
        Ok(())
    }
}
