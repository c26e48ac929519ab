//! Distributed threshold algorithms on the simulated cluster.

mod engine;
mod schedule;

use serde::Serialize;
use thiserror::Error;

use crate::kernels::{KernelError, PartialSolution};
use crate::oracle::{Oracle, OracleError};
use crate::sim::{ClusterConfig, RoundLedger, SimError};

use engine::{Plan, SparseParams, Thresholds};

pub use schedule::{guaranteed_ratio, GuessGrid, ThresholdSchedule};

/// Default multiplier `c` in the `c·k` candidates each worker forwards in
/// the sparse variant.
pub const DEFAULT_C_LARGE: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgorithmError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("{0}")]
    Invalid(String),
}

/// Self-checks and per-branch values gathered during a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Parallel threshold instances per phase.
    pub instances: usize,
    /// Every worker and C derived the same `G0` for every instance.
    pub g0_consistent: bool,
    /// Every element C received passed the threshold against `G0`.
    pub filter_sound: bool,
    /// Best value over the threshold instances.
    pub threshold_value: Option<f64>,
    /// Best value of the sparse branch.
    pub sparse_value: Option<f64>,
    /// Elements C received on filtered channels, per phase.
    pub filtered_per_phase: Vec<usize>,
    /// Singleton maximum anchoring the guess grid, when one is used.
    pub anchor: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutput {
    pub solution: PartialSolution,
    pub ledger: RoundLedger,
    /// Config actually used, after any budget scaling for parallel guesses.
    pub config: ClusterConfig,
    pub diagnostics: Diagnostics,
}

impl RunOutput {
    pub fn value(&self) -> f64 {
        self.solution.value()
    }
}

fn check_opt(opt: f64) -> Result<(), AlgorithmError> {
    if opt.is_finite() && opt > 0.0 {
        Ok(())
    } else {
        Err(AlgorithmError::Invalid(format!("OPT must be positive, got {opt}")))
    }
}

fn check_t(t: usize) -> Result<(), AlgorithmError> {
    if t == 0 {
        Err(AlgorithmError::Invalid("t must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Two rounds with threshold `OPT/(2k)`; `1/2`-approximate.
pub fn two_round_known_opt(
    cfg: &ClusterConfig,
    oracle: &Oracle,
    opt: f64,
) -> Result<RunOutput, AlgorithmError> {
    multi_round(cfg, oracle, opt, 1)
}

/// `2t` rounds, one fresh partition per threshold `α_1 > .. > α_t`.
pub fn multi_round(
    cfg: &ClusterConfig,
    oracle: &Oracle,
    opt: f64,
    t: usize,
) -> Result<RunOutput, AlgorithmError> {
    check_opt(opt)?;
    check_t(t)?;
    let plan = Plan {
        thresholds: Thresholds::Known { opt },
        t,
        sparse: None,
        max_round: false,
        select_round: false,
    };
    engine::run(cfg, oracle, plan)
}

/// Two rounds, thresholds guessed from the best singleton in the sample.
pub fn dense_two_round(
    cfg: &ClusterConfig,
    oracle: &Oracle,
    eps: f64,
) -> Result<RunOutput, AlgorithmError> {
    let plan = Plan {
        thresholds: Thresholds::SampleGrid { eps },
        t: 1,
        sparse: None,
        max_round: false,
        select_round: false,
    };
    engine::run(cfg, oracle, plan)
}

/// Two rounds; workers forward their `c·k` best singletons and C runs the
/// threshold grid on them.
pub fn sparse_two_round(
    cfg: &ClusterConfig,
    oracle: &Oracle,
    eps: f64,
    c_large: usize,
) -> Result<RunOutput, AlgorithmError> {
    let plan = Plan {
        thresholds: Thresholds::Skip,
        t: 1,
        sparse: Some(sparse_params(eps, c_large)?),
        max_round: false,
        select_round: false,
    };
    engine::run(cfg, oracle, plan)
}

/// Dense and sparse branches side by side in the same two rounds; returns
/// the better solution.
pub fn combined_two_round(
    cfg: &ClusterConfig,
    oracle: &Oracle,
    eps: f64,
    c_large: usize,
) -> Result<RunOutput, AlgorithmError> {
    let plan = Plan {
        thresholds: Thresholds::SampleGrid { eps },
        t: 1,
        sparse: Some(sparse_params(eps, c_large)?),
        max_round: false,
        select_round: false,
    };
    engine::run(cfg, oracle, plan)
}

/// `2t + 2` rounds: a round to find the best singleton `v`, `t` phases run
/// for every OPT guess in `[v, kv]`, and a round to pick the best guess.
pub fn multi_round_unknown_opt(
    cfg: &ClusterConfig,
    oracle: &Oracle,
    eps: f64,
    t: usize,
) -> Result<RunOutput, AlgorithmError> {
    check_t(t)?;
    let plan = Plan {
        thresholds: Thresholds::OptGuesses { eps },
        t,
        sparse: None,
        max_round: true,
        select_round: true,
    };
    engine::run(cfg, oracle, plan)
}

fn sparse_params(eps: f64, c_large: usize) -> Result<SparseParams, AlgorithmError> {
    GuessGrid::half_threshold(1.0, eps, 1)?;
    if c_large == 0 {
        return Err(AlgorithmError::Invalid("c_large must be at least 1".into()));
    }
    Ok(SparseParams { eps, c_large })
}
