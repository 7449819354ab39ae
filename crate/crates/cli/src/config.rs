//! Flat `key = value` run configuration.
//!
//! Lines starting with `#` are comments. Relative paths resolve against the
//! directory of the config file. Environment variables are never read.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `input` | required | data matrix |
//! | `format` | by extension | `csv` or `bin` |
//! | `labels` | none | one class label per line; enables evaluation |
//! | `output_dir` | `nbse-out` | artifact directory |
//! | `backbone` | `knn` | `knn` or `qc_ldpc` |
//! | `k_scale`, `k_graph`, `symmetrize` | 10, 12, `union` | object graph |
//! | `qc_base` | none | protograph rows, e.g. `1,1,1;1,1,1` |
//! | `qc_lift`, `qc_girth_min`, `qc_max_retries`, `qc_seed` | 0, 6, 50, 0 | QC lift |
//! | `qc_degree_bounds` | `none` | accepted average degree, `lo,hi` |
//! | `beta_max` | `auto` | scan ceiling (`auto` = 20 / median weight) |
//! | `n_scan`, `tol_beta`, `tol_lambda`, `max_iter` | 40, 1e-6, 1e-8, 200 | root search |
//! | `fingerprint` | `global` | `global`, `per_feature` or `none` |
//! | `feature_source` | `data` | build φ from `data` or `fingerprint` |
//! | `k_feat` | `auto` | feature-graph neighbours (`auto` = min(10, D−1)) |
//! | `standardize` | `true` | standardize features before transposing |
//! | `proportions` | `1.0,0.9,…,0.3` | retained fractions |
//! | `methods` | `nbse,anova,random` | selectors to evaluate |
//! | `seeds` | `0,1,2,3,4` | split and selection seeds |
//! | `test_fraction` | 0.2 | held-out share per class |
//! | `l2`, `max_epochs`, `classifier_tol` | 1e-4, 500, 1e-6 | classifier |
//! | `noise_factors` | `none` | comma list enables the noise sweep |
//! | `noise_trials`, `noise_seed` | 20, 0 | noise sweep |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nbse::eval::{ClassifierParams, Method};
use nbse::graph::{GraphParams, Symmetrize};
use nbse::nbse::FingerprintMode;
use nbse::nishimori::SearchParams;

use crate::error::{CliError, CliResult};
use crate::io::MatrixFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backbone {
    Knn,
    QcLdpc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSource {
    Data,
    Fingerprint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QcConfig {
    pub base: Vec<Vec<u32>>,
    pub lift: usize,
    pub girth_min: usize,
    pub max_retries: usize,
    pub seed: u64,
    pub degree_bounds: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub format: Option<MatrixFormat>,
    pub labels: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub backbone: Backbone,
    pub graph: GraphParams,
    pub qc: QcConfig,
    pub search: SearchParams,
    pub fingerprint: Option<FingerprintMode>,
    pub feature_source: FeatureSource,
    pub k_feat: Option<usize>,
    pub standardize: bool,
    pub proportions: Vec<f64>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub test_fraction: f64,
    pub classifier: ClassifierParams,
    pub noise_factors: Vec<f64>,
    pub noise_trials: usize,
    pub noise_seed: u64,
    /// Run the noise sweep with default factors when none are configured.
    pub noise_forced: bool,
    /// Every key as last set, for echoing into the report.
    entries: BTreeMap<String, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            format: None,
            labels: None,
            output_dir: PathBuf::from("nbse-out"),
            backbone: Backbone::Knn,
            graph: GraphParams::default(),
            qc: QcConfig {
                base: Vec::new(),
                lift: 0,
                girth_min: 6,
                max_retries: 50,
                seed: 0,
                degree_bounds: None,
            },
            search: SearchParams::default(),
            fingerprint: Some(FingerprintMode::Global),
            feature_source: FeatureSource::Data,
            k_feat: None,
            standardize: true,
            proportions: (3..=10).rev().map(|k| k as f64 / 10.0).collect(),
            methods: vec![Method::Nbse, Method::Anova, Method::Random],
            seeds: (0..5).collect(),
            test_fraction: 0.2,
            classifier: ClassifierParams::default(),
            noise_factors: Vec::new(),
            noise_trials: 20,
            noise_seed: 0,
            noise_forced: false,
            entries: BTreeMap::new(),
        }
    }
}

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key} = {value}: {why}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| bad(key, value, e))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    if value == "none" || value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| num(key, v.trim())).collect()
}

fn auto<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if value == "auto" {
        Ok(None)
    } else {
        num(key, value).map(Some)
    }
}

impl RunConfig {
    /// Parse config text; relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> CliResult<Self> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", k + 1)))?;
            let key = key.trim();
            if seen.insert(key.to_string(), k + 1).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key '{key}'", k + 1)));
            }
            cfg.set(key, value.trim(), base_dir)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, dir)
    }

    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str, base_dir: &Path) -> CliResult<()> {
        let path = |v: &str| -> PathBuf {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        };
        match key {
            "input" => self.input = Some(path(value)),
            "format" => self.format = Some(value.parse().map_err(|e| bad(key, value, e))?),
            "labels" => self.labels = (value != "none").then(|| path(value)),
            "output_dir" => self.output_dir = path(value),
            "backbone" => {
                self.backbone = match value {
                    "knn" => Backbone::Knn,
                    "qc_ldpc" => Backbone::QcLdpc,
                    _ => return Err(bad(key, value, "expected knn or qc_ldpc")),
                }
            }
            "k_scale" => self.graph.k_scale = num(key, value)?,
            "k_graph" => self.graph.k_graph = num(key, value)?,
            "symmetrize" => self.graph.symmetrize = value.parse::<Symmetrize>().map_err(|e| bad(key, value, e))?,
            "qc_base" => {
                self.qc.base = value
                    .split(';')
                    .map(|row| list::<u32>(key, row))
                    .collect::<CliResult<_>>()?
            }
            "qc_lift" => self.qc.lift = num(key, value)?,
            "qc_girth_min" => self.qc.girth_min = num(key, value)?,
            "qc_max_retries" => self.qc.max_retries = num(key, value)?,
            "qc_seed" => self.qc.seed = num(key, value)?,
            "qc_degree_bounds" => {
                self.qc.degree_bounds = match value {
                    "none" => None,
                    v => {
                        let b: Vec<f64> = list(key, v)?;
                        match b[..] {
                            [lo, hi] if lo <= hi => Some((lo, hi)),
                            _ => return Err(bad(key, value, "expected lo,hi")),
                        }
                    }
                }
            }
            "beta_max" => self.search.beta_max = auto(key, value)?,
            "n_scan" => self.search.n_scan = num(key, value)?,
            "tol_beta" => self.search.tol_beta = num(key, value)?,
            "tol_lambda" => self.search.tol_lambda = num(key, value)?,
            "max_iter" => self.search.max_iter = num(key, value)?,
            "fingerprint" => {
                self.fingerprint = match value {
                    "none" => None,
                    v => Some(v.parse().map_err(|e| bad(key, value, e))?),
                }
            }
            "feature_source" => {
                self.feature_source = match value {
                    "data" => FeatureSource::Data,
                    "fingerprint" => FeatureSource::Fingerprint,
                    _ => return Err(bad(key, value, "expected data or fingerprint")),
                }
            }
            "k_feat" => self.k_feat = auto(key, value)?,
            "standardize" => self.standardize = num(key, value)?,
            "proportions" => self.proportions = list(key, value)?,
            "methods" => self.methods = list(key, value)?,
            "seeds" => self.seeds = list(key, value)?,
            "test_fraction" => self.test_fraction = num(key, value)?,
            "l2" => self.classifier.l2 = num(key, value)?,
            "max_epochs" => self.classifier.max_epochs = num(key, value)?,
            "classifier_tol" => self.classifier.tol = num(key, value)?,
            "noise_factors" => self.noise_factors = list(key, value)?,
            "noise_trials" => self.noise_trials = num(key, value)?,
            "noise_seed" => self.noise_seed = num(key, value)?,
            _ => return Err(CliError::Config(format!("unknown key '{key}'"))),
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Apply `KEY=VALUE` overrides given on the command line.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> CliResult<()> {
        let cwd = PathBuf::from(".");
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override '{o}' is not KEY=VALUE")))?;
            self.set(k.trim(), v.trim(), &cwd)?;
        }
        Ok(())
    }

    /// Explicitly set keys in sorted order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn input_format(&self) -> Option<MatrixFormat> {
        self.format
            .or_else(|| self.input.as_deref().map(MatrixFormat::from_path))
    }

    /// Range checks and file existence.
    pub fn validate(&self) -> CliResult<()> {
        let fail = |m: String| Err(CliError::Config(m));
        match &self.input {
            None => return fail("no input matrix configured".into()),
            Some(p) if !p.is_file() => return fail(format!("input {} does not exist", p.display())),
            _ => {}
        }
        if let Some(p) = &self.labels {
            if !p.is_file() {
                return fail(format!("labels {} does not exist", p.display()));
            }
        }
        if self.graph.k_scale == 0 || self.graph.k_graph == 0 {
            return fail("k_scale and k_graph must be positive".into());
        }
        if self.backbone == Backbone::QcLdpc && (self.qc.base.is_empty() || self.qc.lift < 2) {
            return fail("qc_ldpc backbone needs qc_base and qc_lift >= 2".into());
        }
        if self.search.n_scan < 2 {
            return fail("n_scan must be at least 2".into());
        }
        if !(self.search.tol_beta > 0.0 && self.search.tol_lambda > 0.0) {
            return fail("tolerances must be positive".into());
        }
        if self.search.beta_max.is_some_and(|b| !(b > 0.0)) {
            return fail("beta_max must be positive".into());
        }
        if self.k_feat == Some(0) {
            return fail("k_feat must be positive".into());
        }
        if self.proportions.is_empty() || self.proportions.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return fail("proportions must be a non-empty list in (0, 1]".into());
        }
        if self.seeds.is_empty() {
            return fail("seeds must not be empty".into());
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return fail("test_fraction must lie in (0, 1)".into());
        }
        if self.noise_factors.iter().any(|&f| !(f >= 0.0)) {
            return fail("noise factors must be non-negative".into());
        }
        if !self.noise_factors.is_empty() && self.noise_trials == 0 {
            return fail("noise_trials must be positive".into());
        }
        Ok(())
    }
}
