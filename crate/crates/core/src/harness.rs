//! Seeded experiment batches: spec in, one report row per seed out.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversarial::tightness_with_oracle;
use crate::algorithms::{self, RunOutput};
use crate::instance::{self, Instance, InstanceError};
use crate::kernels::{binomial, brute_force_opt, sequential_greedy, DEFAULT_ENUMERATION_CAP};
use crate::oracle::{Element, Oracle};
use crate::sim::{nominal_sample_prob, ClusterConfig, Enforcement, RoundLedger};

/// Environment variable replacing the spec's seeds.
pub const SEED_ENV: &str = "SUBMR_SEED";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("spec file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Greedy,
    Bruteforce,
    Tworound,
    Multiround,
    Dense,
    Sparse,
    Combined,
    Unknownopt,
    Tightness,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Greedy,
        Algorithm::Bruteforce,
        Algorithm::Tworound,
        Algorithm::Multiround,
        Algorithm::Dense,
        Algorithm::Sparse,
        Algorithm::Combined,
        Algorithm::Unknownopt,
        Algorithm::Tightness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Bruteforce => "bruteforce",
            Algorithm::Tworound => "tworound",
            Algorithm::Multiround => "multiround",
            Algorithm::Dense => "dense",
            Algorithm::Sparse => "sparse",
            Algorithm::Combined => "combined",
            Algorithm::Unknownopt => "unknownopt",
            Algorithm::Tightness => "tightness",
        }
    }

    /// Runs on the simulated cluster.
    pub fn is_distributed(self) -> bool {
        !matches!(
            self,
            Algorithm::Greedy | Algorithm::Bruteforce | Algorithm::Tightness
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OptField", into = "OptField")]
pub enum OptMode {
    BruteForce,
    Value(f64),
    #[default]
    None,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OptField {
    Value(f64),
    Name(String),
}

impl TryFrom<OptField> for OptMode {
    type Error = String;

    fn try_from(f: OptField) -> Result<Self, Self::Error> {
        match f {
            OptField::Value(v) => OptMode::Value(v).checked(),
            OptField::Name(s) => s.parse(),
        }
    }
}

impl From<OptMode> for OptField {
    fn from(m: OptMode) -> Self {
        match m {
            OptMode::BruteForce => OptField::Name("bruteforce".into()),
            OptMode::Value(v) => OptField::Value(v),
            OptMode::None => OptField::Name("none".into()),
        }
    }
}

impl OptMode {
    fn checked(self) -> Result<Self, String> {
        match self {
            OptMode::Value(v) if !(v.is_finite() && v > 0.0) => {
                Err(format!("OPT value must be positive, got {v}"))
            }
            m => Ok(m),
        }
    }
}

impl FromStr for OptMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bruteforce" => Ok(OptMode::BruteForce),
            "none" => Ok(OptMode::None),
            v => v
                .parse::<f64>()
                .map_err(|_| format!("opt must be bruteforce, none or a number, got `{v}`"))
                .and_then(|v| OptMode::Value(v).checked()),
        }
    }
}

/// Where each trial's instance comes from. Generated instances are drawn
/// from the trial seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstanceSource {
    File {
        path: PathBuf,
    },
    RandomCoverage {
        n: usize,
        universe: usize,
        #[serde(default = "default_max_set_size")]
        max_set_size: usize,
        #[serde(default = "default_exponent")]
        exponent: f64,
    },
    PlantedSparse {
        n: usize,
        /// Defaults to the spec's `k`.
        k: Option<usize>,
    },
    UniformAdditive {
        n: usize,
    },
    Adversarial {
        /// Defaults to the spec's `t`.
        t: Option<usize>,
        /// Defaults to the spec's `k`.
        k: Option<usize>,
        #[serde(default = "default_v_star")]
        v_star: f64,
    },
}

pub fn default_max_set_size() -> usize {
    20
}

pub fn default_exponent() -> f64 {
    1.5
}

fn default_v_star() -> f64 {
    1.0
}

impl InstanceSource {
    pub fn is_generated(&self) -> bool {
        !matches!(self, InstanceSource::File { .. })
    }

    /// Builds the instance; `k` and `t` fill unset generator parameters.
    pub fn build(&self, k: usize, t: usize, seed: u64) -> Result<Instance, InstanceError> {
        match self {
            InstanceSource::File { path } => Instance::read(path),
            InstanceSource::RandomCoverage {
                n,
                universe,
                max_set_size,
                exponent,
            } => instance::random_coverage(*n, *universe, *max_set_size, *exponent, seed),
            InstanceSource::PlantedSparse { n, k: pk } => {
                instance::planted_sparse(*n, pk.unwrap_or(k), seed)
            }
            InstanceSource::UniformAdditive { n } => instance::uniform_additive(*n, seed),
            InstanceSource::Adversarial { t: at, k: ak, v_star } => {
                instance::adversarial(at.unwrap_or(t), ak.unwrap_or(k), *v_star)
            }
        }
    }

    /// Ground-set size when known without building the instance.
    fn size_hint(&self) -> Option<usize> {
        match self {
            InstanceSource::RandomCoverage { n, .. }
            | InstanceSource::PlantedSparse { n, .. }
            | InstanceSource::UniformAdditive { n } => Some(*n),
            InstanceSource::File { .. } | InstanceSource::Adversarial { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    /// `base_seed .. base_seed + count`.
    Count(u64),
    List(Vec<u64>),
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds::Count(1)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterOverrides {
    pub machines: Option<usize>,
    pub sample_prob: Option<f64>,
    pub budget_regular: Option<usize>,
    pub budget_central: Option<usize>,
    #[serde(default)]
    pub enforcement: Enforcement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub algorithm: Algorithm,
    pub k: usize,
    #[serde(default = "default_t")]
    pub t: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_c_large")]
    pub c_large: usize,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub opt: OptMode,
    /// Optional only for `tightness`, which then uses the geometric
    /// adversarial instance for `t` and `k`.
    pub instance: Option<InstanceSource>,
    #[serde(default)]
    pub cluster: ClusterOverrides,
    /// Charge each PartitionAndSample step as a round in the `rounds` column.
    #[serde(default)]
    pub count_distribution_round: bool,
    #[serde(default = "default_cap")]
    pub enumeration_cap: u64,
}

fn default_t() -> usize {
    1
}

fn default_eps() -> f64 {
    0.1
}

fn default_c_large() -> usize {
    algorithms::DEFAULT_C_LARGE
}

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

impl ExperimentSpec {
    pub fn new(algorithm: Algorithm, k: usize, instance: Option<InstanceSource>) -> Self {
        ExperimentSpec {
            algorithm,
            k,
            t: default_t(),
            eps: default_eps(),
            c_large: default_c_large(),
            seeds: Seeds::default(),
            base_seed: 0,
            opt: OptMode::None,
            instance,
            cluster: ClusterOverrides::default(),
            count_distribution_round: false,
            enumeration_cap: default_cap(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let spec: ExperimentSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Applies `SUBMR_SEED`: a seed count starts at that value, an explicit
    /// list is replaced by it.
    pub fn apply_seed_env(&mut self) -> Result<(), HarnessError> {
        match std::env::var(SEED_ENV) {
            Ok(v) => {
                let seed = v
                    .trim()
                    .parse()
                    .map_err(|_| HarnessError::Spec(format!("{SEED_ENV}=`{v}` is not a u64")))?;
                self.override_seed(seed);
                Ok(())
            }
            Err(_) => Ok(()),
        }
    }

    pub fn override_seed(&mut self, seed: u64) {
        match self.seeds {
            Seeds::Count(_) => self.base_seed = seed,
            Seeds::List(_) => self.seeds = Seeds::List(vec![seed]),
        }
    }

    pub fn seed_list(&self) -> Vec<u64> {
        match &self.seeds {
            Seeds::Count(c) => (0..*c).map(|i| self.base_seed.wrapping_add(i)).collect(),
            Seeds::List(v) => v.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Spec(m));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.t == 0 {
            return bad("t must be at least 1".into());
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if self.c_large == 0 {
            return bad("c_large must be at least 1".into());
        }
        if self.seed_list().is_empty() {
            return bad("no seeds".into());
        }
        if let Some(p) = self.cluster.sample_prob {
            if !(p > 0.0 && p <= 1.0) {
                return bad(format!("sample_prob must lie in (0, 1], got {p}"));
            }
        }
        if self.cluster.machines == Some(0) {
            return bad("machines must be at least 1".into());
        }
        match (&self.instance, self.algorithm) {
            (None, Algorithm::Tightness) => {}
            (None, a) => return bad(format!("algorithm {a} needs an instance")),
            (Some(src), Algorithm::Tightness)
                if !matches!(src, InstanceSource::Adversarial { .. } | InstanceSource::File { .. }) =>
            {
                return bad("tightness needs an adversarial instance".into())
            }
            _ => {}
        }
        let needs_enumeration =
            self.opt == OptMode::BruteForce || self.algorithm == Algorithm::Bruteforce;
        if needs_enumeration {
            if let Some(n) = self.instance.as_ref().and_then(InstanceSource::size_hint) {
                self.check_cap(n)?;
            }
        }
        Ok(())
    }

    fn check_cap(&self, n: usize) -> Result<(), HarnessError> {
        let subsets = binomial(n as u64, self.k.min(n) as u64);
        if subsets > self.enumeration_cap as u128 {
            return Err(HarnessError::Spec(format!(
                "brute force over C({n}, {}) = {subsets} subsets exceeds cap {}",
                self.k.min(n),
                self.enumeration_cap
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses one per core.
    pub threads: Option<usize>,
    /// Record wall time per trial (makes reports non-reproducible).
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub seed: u64,
    pub status: String,
    /// What actually ran, e.g. `tworound` or `greedy(p>=1)`.
    pub route: String,
    pub value: Option<f64>,
    pub opt: Option<f64>,
    pub ratio: Option<f64>,
    pub greedy_value: Option<f64>,
    pub ratio_vs_greedy: Option<f64>,
    pub rounds: Option<usize>,
    pub max_central_load: Option<usize>,
    pub oracle_calls: Option<u64>,
    pub budget_violations: usize,
    pub wall_ms: Option<f64>,
    pub error: Option<String>,
    pub solution: Vec<Element>,
    pub ledger: Option<RoundLedger>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct CsvRow<'a> {
    seed: u64,
    status: &'a str,
    route: &'a str,
    value: Option<f64>,
    opt: Option<f64>,
    ratio: Option<f64>,
    greedy_value: Option<f64>,
    ratio_vs_greedy: Option<f64>,
    rounds: Option<usize>,
    max_central_load: Option<usize>,
    oracle_calls: Option<u64>,
    budget_violations: usize,
    wall_ms: Option<f64>,
    error: Option<&'a str>,
}

/// Fixed CSV column set, in order.
pub const CSV_COLUMNS: [&str; 14] = [
    "seed",
    "status",
    "route",
    "value",
    "opt",
    "ratio",
    "greedy_value",
    "ratio_vs_greedy",
    "rounds",
    "max_central_load",
    "oracle_calls",
    "budget_violations",
    "wall_ms",
    "error",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub errors: usize,
    pub min_ratio: Option<f64>,
    pub mean_ratio: Option<f64>,
    /// Share of trials with at least one budget violation.
    pub violation_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub rows: Vec<TrialRow>,
    pub summary: Summary,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(CsvRow {
                seed: r.seed,
                status: &r.status,
                route: &r.route,
                value: r.value,
                opt: r.opt,
                ratio: r.ratio,
                greedy_value: r.greedy_value,
                ratio_vs_greedy: r.ratio_vs_greedy,
                rounds: r.rounds,
                max_central_load: r.max_central_load,
                oracle_calls: r.oracle_calls,
                budget_violations: r.budget_violations,
                wall_ms: r.wall_ms,
                error: r.error.as_deref(),
            })?;
        }
        if self.rows.is_empty() {
            w.write_record(CSV_COLUMNS)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn summarize(rows: &[TrialRow]) -> Summary {
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let violated = rows.iter().filter(|r| r.budget_violations > 0).count();
    Summary {
        trials: rows.len(),
        errors: rows.iter().filter(|r| r.error.is_some()).count(),
        min_ratio: ratios.iter().copied().reduce(f64::min),
        mean_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
        violation_rate: if rows.is_empty() {
            0.0
        } else {
            violated as f64 / rows.len() as f64
        },
    }
}

/// Runs every trial of `spec`. Per-trial failures become error rows; only
/// spec and shared-instance problems abort the batch.
pub fn run_experiment(spec: &ExperimentSpec, opts: RunOptions) -> Result<ExperimentReport, HarnessError> {
    spec.validate()?;
    let shared = match &spec.instance {
        Some(src) if !src.is_generated() => Some(src.build(spec.k, spec.t, 0)?),
        None => Some(instance::adversarial(spec.t, spec.k, 1.0)?),
        _ => None,
    };
    if let Some(inst) = &shared {
        let needs_enumeration =
            spec.opt == OptMode::BruteForce || spec.algorithm == Algorithm::Bruteforce;
        if needs_enumeration {
            spec.check_cap(inst.len())?;
        }
    }
    let shared_oracle = shared.as_ref().map(|i| i.oracle()).transpose()?;

    let mut seeds = spec.seed_list();
    if spec.algorithm == Algorithm::Tightness {
        seeds.truncate(1);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Spec(format!("thread pool: {e}")))?;
    let mut rows: Vec<TrialRow> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let start = Instant::now();
                let mut row = match run_trial(spec, shared.as_ref(), shared_oracle.as_ref(), seed) {
                    Ok(row) => row,
                    Err(e) => error_row(spec, seed, e),
                };
                if opts.timing {
                    row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
                }
                row
            })
            .collect()
    });
    rows.sort_by_key(|r| r.seed);
    let summary = summarize(&rows);
    Ok(ExperimentReport {
        spec: spec.clone(),
        rows,
        summary,
    })
}

fn error_row(spec: &ExperimentSpec, seed: u64, e: TrialError) -> TrialRow {
    TrialRow {
        seed,
        status: "error".into(),
        route: spec.algorithm.name().into(),
        value: None,
        opt: None,
        ratio: None,
        greedy_value: None,
        ratio_vs_greedy: None,
        rounds: None,
        max_central_load: None,
        oracle_calls: None,
        budget_violations: usize::from(e.budget),
        wall_ms: None,
        error: Some(e.msg),
        solution: Vec::new(),
        ledger: None,
    }
}

struct TrialError {
    msg: String,
    budget: bool,
}

impl<E: fmt::Display> From<E> for TrialError {
    fn from(e: E) -> Self {
        let msg = e.to_string();
        TrialError {
            budget: msg.contains("budget"),
            msg,
        }
    }
}

fn run_trial(
    spec: &ExperimentSpec,
    shared: Option<&Instance>,
    shared_oracle: Option<&Oracle>,
    seed: u64,
) -> Result<TrialRow, TrialError> {
    let (inst, oracle) = match (shared, shared_oracle) {
        (Some(i), Some(o)) => (i.clone(), o.fresh()),
        _ => {
            let src = spec.instance.as_ref().expect("validated: generated source");
            let inst = src.build(spec.k, spec.t, seed)?;
            let oracle = inst.oracle()?;
            (inst, oracle)
        }
    };
    let n = inst.len();
    let ground: Vec<Element> = (0..n).collect();
    let k = spec.k;

    let mut opt = match spec.opt {
        OptMode::BruteForce => Some(brute_force_opt(&oracle.fresh(), &ground, k, spec.enumeration_cap)?.value),
        OptMode::Value(v) => Some(v),
        OptMode::None => None,
    };
    // The baseline is meaningless on the adversarial instance and costs n·k
    // evaluations there.
    let greedy_value = if spec.algorithm == Algorithm::Tightness {
        None
    } else {
        Some(sequential_greedy(&oracle.fresh(), &ground, k)?.value())
    };

    let mut route = spec.algorithm.name().to_string();
    let mut run: Option<RunOutput> = None;
    let (value, solution) = match spec.algorithm {
        Algorithm::Greedy => {
            let g = sequential_greedy(&oracle, &ground, k)?;
            (g.value(), g.elements().to_vec())
        }
        Algorithm::Bruteforce => {
            let b = brute_force_opt(&oracle, &ground, k, spec.enumeration_cap)?;
            (b.value, b.witness)
        }
        Algorithm::Tightness => {
            let adv = inst
                .adversarial()?
                .ok_or_else(|| TrialError::from("tightness needs an adversarial instance"))?;
            let out = tightness_with_oracle(&adv, &oracle)?;
            opt.get_or_insert(adv.opt());
            (out.ratio * adv.opt(), Vec::new())
        }
        alg => {
            let guard = nominal_sample_prob(n, k) >= 1.0 && spec.cluster.sample_prob.is_none();
            if guard {
                route = "greedy(p>=1)".into();
                let g = sequential_greedy(&oracle, &ground, k)?;
                (g.value(), g.elements().to_vec())
            } else {
                let cfg = cluster_config(spec, n, seed)?;
                let out = run_distributed(alg, spec, &cfg, &oracle, opt)?;
                let result = (out.value(), out.solution.elements().to_vec());
                run = Some(out);
                result
            }
        }
    };
    if spec.algorithm == Algorithm::Bruteforce {
        opt.get_or_insert(value);
    }
    let ratio = opt.map(|o| if o > 0.0 { value / o } else { 1.0 });
    let ratio_vs_greedy = greedy_value.map(|g| if g > 0.0 { value / g } else { 1.0 });
    let (rounds, max_central_load, violations, ledger) = match run {
        Some(out) => {
            let rounds = if spec.count_distribution_round {
                out.ledger.rounds_with_distribution()
            } else {
                out.ledger.rounds()
            };
            (
                Some(rounds),
                Some(out.ledger.max_central_load()),
                out.ledger.violations().len(),
                Some(out.ledger),
            )
        }
        None => (None, None, 0, None),
    };
    Ok(TrialRow {
        seed,
        status: "ok".into(),
        route,
        value: Some(value),
        opt,
        ratio,
        greedy_value,
        ratio_vs_greedy,
        rounds,
        max_central_load,
        oracle_calls: Some(oracle.call_count()),
        budget_violations: violations,
        wall_ms: None,
        error: None,
        solution,
        ledger,
    })
}

fn cluster_config(spec: &ExperimentSpec, n: usize, seed: u64) -> Result<ClusterConfig, TrialError> {
    let o = &spec.cluster;
    let mut cfg = ClusterConfig::new(n, spec.k, seed)?.with_enforcement(o.enforcement);
    if let Some(m) = o.machines {
        cfg = cfg.with_machines(m);
    }
    if let Some(p) = o.sample_prob {
        cfg = cfg.with_sample_prob(p);
    }
    if let Some(b) = o.budget_regular {
        cfg.memory_budget_regular = b;
    }
    if let Some(b) = o.budget_central {
        cfg.memory_budget_central = b;
    }
    Ok(cfg)
}

fn run_distributed(
    alg: Algorithm,
    spec: &ExperimentSpec,
    cfg: &ClusterConfig,
    oracle: &Oracle,
    opt: Option<f64>,
) -> Result<RunOutput, TrialError> {
    let need_opt = || opt.ok_or_else(|| TrialError::from(format!("{alg} needs a known OPT (set opt)")));
    Ok(match alg {
        Algorithm::Tworound => algorithms::two_round_known_opt(cfg, oracle, need_opt()?)?,
        Algorithm::Multiround => algorithms::multi_round(cfg, oracle, need_opt()?, spec.t)?,
        Algorithm::Dense => algorithms::dense_two_round(cfg, oracle, spec.eps)?,
        Algorithm::Sparse => algorithms::sparse_two_round(cfg, oracle, spec.eps, spec.c_large)?,
        Algorithm::Combined => algorithms::combined_two_round(cfg, oracle, spec.eps, spec.c_large)?,
        Algorithm::Unknownopt => algorithms::multi_round_unknown_opt(cfg, oracle, spec.eps, spec.t)?,
        Algorithm::Greedy | Algorithm::Bruteforce | Algorithm::Tightness => {
            unreachable!("not a distributed algorithm")
        }
    })
}

/// Generates an instance of the named kind from `key=value` parameters.
pub fn generate_instance(
    kind: &str,
    params: &[(String, String)],
    seed: u64,
) -> Result<Instance, HarnessError> {
    let get = |key: &str| params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    fn num<T: FromStr>(key: &str, v: Option<&str>) -> Result<Option<T>, HarnessError> {
        v.map(|s| {
            s.parse()
                .map_err(|_| HarnessError::Spec(format!("bad value `{s}` for {key}")))
        })
        .transpose()
    }
    let required = |key: &str| -> Result<usize, HarnessError> {
        num(key, get(key))?.ok_or_else(|| HarnessError::Spec(format!("{kind} needs {key}")))
    };
    let known: &[&str] = match kind {
        "random-coverage" => &["n", "universe", "max_set_size", "exponent"],
        "planted-sparse" => &["n", "k"],
        "uniform-additive" => &["n"],
        "adversarial" => &["t", "k", "v_star"],
        other => return Err(HarnessError::Spec(format!("unknown instance kind `{other}`"))),
    };
    if let Some((k, _)) = params.iter().find(|(k, _)| !known.contains(&k.as_str())) {
        return Err(HarnessError::Spec(format!("{kind} has no parameter `{k}`")));
    }
    let src = match kind {
        "random-coverage" => InstanceSource::RandomCoverage {
            n: required("n")?,
            universe: required("universe")?,
            max_set_size: num("max_set_size", get("max_set_size"))?.unwrap_or_else(default_max_set_size),
            exponent: num("exponent", get("exponent"))?.unwrap_or_else(default_exponent),
        },
        "planted-sparse" => InstanceSource::PlantedSparse {
            n: required("n")?,
            k: Some(required("k")?),
        },
        "uniform-additive" => InstanceSource::UniformAdditive { n: required("n")? },
        _ => InstanceSource::Adversarial {
            t: Some(required("t")?),
            k: Some(required("k")?),
            v_star: num("v_star", get("v_star"))?.unwrap_or_else(default_v_star),
        },
    };
    Ok(src.build(1, 1, seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(alg: Algorithm) -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(
            alg,
            3,
            Some(InstanceSource::RandomCoverage {
                n: 12,
                universe: 20,
                max_set_size: 5,
                exponent: 1.2,
            }),
        );
        spec.seeds = Seeds::Count(10);
        spec.opt = OptMode::BruteForce;
        spec.cluster.sample_prob = Some(0.5);
        spec
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            algorithm = "multiround"
            k = 4
            t = 2
            seeds = [3, 1, 2]
            opt = 12.5
            count_distribution_round = true

            [instance]
            kind = "random-coverage"
            n = 50
            universe = 80

            [cluster]
            enforcement = "fail"
            machines = 3
        "#;
        let spec = ExperimentSpec::from_toml(text).unwrap();
        assert_eq!(spec.seed_list(), vec![3, 1, 2]);
        assert_eq!(spec.opt, OptMode::Value(12.5));
        assert_eq!(spec.cluster.enforcement, Enforcement::Fail);
        let back = toml::to_string(&spec).unwrap();
        assert_eq!(ExperimentSpec::from_toml(&back).unwrap(), spec);
        assert!(ExperimentSpec::from_toml("algorithm = \"x\"\nk = 1").is_err());
        assert!(ExperimentSpec::from_toml("algorithm = \"greedy\"\nk = 1\nbogus = 2").is_err());
        assert!(ExperimentSpec::from_toml("algorithm = \"greedy\"\nk = 1").is_err());
    }

    #[test]
    fn seed_override() {
        let mut spec = small_spec(Algorithm::Tworound);
        spec.override_seed(100);
        assert_eq!(spec.seed_list(), (100..110).collect::<Vec<_>>());
        spec.seeds = Seeds::List(vec![1, 2]);
        spec.override_seed(7);
        assert_eq!(spec.seed_list(), vec![7]);
    }

    #[test]
    fn two_round_batch() {
        let report = run_experiment(&small_spec(Algorithm::Tworound), RunOptions::default()).unwrap();
        assert_eq!(report.rows.len(), 10);
        assert_eq!(report.summary.errors, 0);
        assert!(report.summary.min_ratio.unwrap() >= 0.5 - 1e-9);
        assert!(report.rows.iter().all(|r| r.rounds == Some(2)));
        let csv = report.to_csv().unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_COLUMNS.join(","));
    }

    #[test]
    fn p_guard_routes_to_greedy() {
        let mut spec = small_spec(Algorithm::Tworound);
        spec.cluster.sample_prob = None;
        let report = run_experiment(&spec, RunOptions::default()).unwrap();
        assert!(report.rows.iter().all(|r| r.route == "greedy(p>=1)"));
    }

    #[test]
    fn tightness_single_row() {
        let mut spec = ExperimentSpec::new(Algorithm::Tightness, 1000, None);
        spec.t = 2;
        spec.seeds = Seeds::Count(5);
        let report = run_experiment(&spec, RunOptions::default()).unwrap();
        assert_eq!(report.rows.len(), 1);
        let r = report.rows[0].ratio.unwrap();
        assert!((r - 5.0 / 9.0).abs() < 0.01 * 5.0 / 9.0);
    }

    #[test]
    fn per_trial_errors_do_not_abort() {
        let mut spec = small_spec(Algorithm::Tworound);
        spec.cluster.enforcement = Enforcement::Fail;
        spec.cluster.budget_central = Some(0);
        let report = run_experiment(&spec, RunOptions::default()).unwrap();
        assert_eq!(report.rows.len(), 10);
        assert_eq!(report.summary.errors, 10);
        assert_eq!(report.summary.violation_rate, 1.0);
    }

    #[test]
    fn brute_force_cap_is_a_spec_error() {
        let mut spec = small_spec(Algorithm::Tworound);
        spec.enumeration_cap = 10;
        assert!(matches!(run_experiment(&spec, RunOptions::default()), Err(HarnessError::Spec(_))));
    }

    #[test]
    fn byte_identical_across_thread_counts() {
        let spec = small_spec(Algorithm::Combined);
        let a = run_experiment(&spec, RunOptions { threads: Some(1), timing: false }).unwrap();
        let b = run_experiment(&spec, RunOptions { threads: Some(8), timing: false }).unwrap();
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    #[test]
    fn generate_kinds() {
        let p = |v: &[(&str, &str)]| v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect::<Vec<_>>();
        let inst = generate_instance("adversarial", &p(&[("t", "3"), ("k", "500")]), 0).unwrap();
        assert_eq!(inst.to_text(), "adversarial 3 500 1\n");
        assert!(generate_instance("random-coverage", &p(&[("n", "5")]), 0).is_err());
        assert!(generate_instance("nope", &[], 0).is_err());
        assert!(generate_instance("uniform-additive", &p(&[("n", "5"), ("zz", "1")]), 0).is_err());
    }
}
