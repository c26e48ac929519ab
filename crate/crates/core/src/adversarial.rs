//! The hard instance on which no `t`-level threshold schedule beats
//! `1 - (1 - 1/(t+1))^t`, and the experiment that runs the schedule on it.
//!
//! Elements are numbered level by level: the `n_1` decoys of level 1 first,
//! then level 2, and so on, then the `k` optimal elements. With decoy set
//! `S'` of total value `W` and optimal subset `O'`,
//! `f(S' ∪ O') = W + (1 - W/(k v*)) |O'| v*`.

use serde::Serialize;
use thiserror::Error;

use crate::algorithms::{self, AlgorithmError};
use crate::kernels::{threshold_greedy, KernelError, PartialSolution};
use crate::oracle::{Element, Oracle, OracleError, SetFunction};
use crate::sim::ClusterConfig;

/// Decoy inflation used by [`tightness_experiment`] so that an optimal
/// element whose marginal equals the current threshold is rejected.
pub const DEFAULT_TIE_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdversarialError {
    #[error("invalid adversarial instance: {0}")]
    Invalid(String),
    #[error("decoy value {total} exceeds k·v* = {cap}")]
    Overweight { total: f64, cap: f64 },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversarialInstance {
    k: usize,
    v_star: f64,
    /// `α_0 = v*, α_1, .., α_t`.
    alphas: Vec<f64>,
    /// `n_1 .. n_t`.
    counts: Vec<usize>,
    /// Per-level decoy value, `α_ℓ (1 + margin)`.
    decoy_values: Vec<f64>,
    /// `offsets[ℓ]` is the first id of level `ℓ + 1`; last entry is the
    /// first optimal id.
    offsets: Vec<usize>,
}

impl AdversarialInstance {
    /// Levels `α_ℓ = (1 - 1/(t+1))^ℓ v*`, the schedule's own thresholds.
    pub fn geometric(t: usize, k: usize, v_star: f64) -> Result<Self, AdversarialError> {
        Self::geometric_with_margin(t, k, v_star, 0.0)
    }

    pub fn geometric_with_margin(
        t: usize,
        k: usize,
        v_star: f64,
        margin: f64,
    ) -> Result<Self, AdversarialError> {
        if t == 0 {
            return Err(AdversarialError::Invalid("t must be at least 1".into()));
        }
        let decay = 1.0 - 1.0 / (t as f64 + 1.0);
        let levels = (1..=t).map(|l| decay.powi(l as i32) * v_star).collect();
        Self::with_thresholds(k, v_star, levels, margin)
    }

    /// Arbitrary non-increasing positive thresholds `α_1 ≥ .. ≥ α_t`, each
    /// at most `v*`.
    pub fn with_thresholds(
        k: usize,
        v_star: f64,
        levels: Vec<f64>,
        margin: f64,
    ) -> Result<Self, AdversarialError> {
        if k == 0 {
            return Err(AdversarialError::Invalid("k must be at least 1".into()));
        }
        if !(v_star.is_finite() && v_star > 0.0) {
            return Err(AdversarialError::Invalid(format!("v* must be positive, got {v_star}")));
        }
        if !(margin.is_finite() && margin >= 0.0) {
            return Err(AdversarialError::Invalid(format!("bad tie margin {margin}")));
        }
        let mut alphas = Vec::with_capacity(levels.len() + 1);
        alphas.push(v_star);
        alphas.extend(levels);
        if alphas.len() < 2 {
            return Err(AdversarialError::Invalid("need at least one threshold".into()));
        }
        for w in alphas.windows(2) {
            if !(w[1] > 0.0 && w[1] <= w[0]) {
                return Err(AdversarialError::Invalid(format!(
                    "thresholds must be positive and non-increasing: {alphas:?}"
                )));
            }
        }
        let counts: Vec<usize> = alphas
            .windows(2)
            .map(|w| ((w[0] / w[1] - 1.0) * k as f64).round() as usize)
            .collect();
        let decoy_values: Vec<f64> = alphas[1..].iter().map(|a| a * (1.0 + margin)).collect();
        let total: f64 = counts.iter().zip(&decoy_values).map(|(&c, v)| c as f64 * v).sum();
        let cap = k as f64 * v_star;
        if total > cap * (1.0 + 1e-12) {
            return Err(AdversarialError::Overweight { total, cap });
        }
        let mut offsets = Vec::with_capacity(counts.len() + 1);
        let mut acc = 0;
        for &c in &counts {
            offsets.push(acc);
            acc += c;
        }
        offsets.push(acc);
        Ok(AdversarialInstance {
            k,
            v_star,
            alphas,
            counts,
            decoy_values,
            offsets,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.counts.len()
    }

    pub fn v_star(&self) -> f64 {
        self.v_star
    }

    /// `α_0 .. α_t`.
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `n_1 .. n_t`.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn decoy_count(&self) -> usize {
        self.offsets[self.counts.len()]
    }

    pub fn len(&self) -> usize {
        self.decoy_count() + self.k
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Ids of the decoys of level `level` (1-based).
    pub fn level_ids(&self, level: usize) -> std::ops::Range<Element> {
        self.offsets[level - 1]..self.offsets[level]
    }

    pub fn optimal_ids(&self) -> std::ops::Range<Element> {
        self.decoy_count()..self.len()
    }

    /// Value of one decoy of level `level` (1-based).
    pub fn decoy_value(&self, level: usize) -> f64 {
        self.decoy_values[level - 1]
    }

    pub fn opt(&self) -> f64 {
        self.k as f64 * self.v_star
    }

    /// Sum of the values of the decoys in a sorted set.
    pub fn decoy_weight(&self, set: &[Element]) -> f64 {
        let mut w = 0.0;
        let mut lo = 0;
        for (l, value) in self.decoy_values.iter().enumerate() {
            let hi = lo + set[lo..].partition_point(|&e| e < self.offsets[l + 1]);
            w += (hi - lo) as f64 * value;
            lo = hi;
        }
        w
    }

    pub fn oracle(&self) -> Result<Oracle, AdversarialError> {
        Ok(Oracle::new(self.clone())?)
    }
}

impl SetFunction for AdversarialInstance {
    fn ground_size(&self) -> usize {
        self.len()
    }

    fn value(&self, set: &[Element]) -> f64 {
        let w = self.decoy_weight(set);
        let optimal = set.len() - set.partition_point(|&e| e < self.decoy_count());
        let remaining = (1.0 - w / self.opt()).max(0.0);
        w + remaining * optimal as f64 * self.v_star
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessOutcome {
    pub t: usize,
    pub k: usize,
    pub ratio: f64,
    /// `1 - (1 - 1/(t+1))^t`.
    pub bound: f64,
    /// Decoys accepted per level.
    pub selected_per_level: Vec<usize>,
    pub optimal_selected: usize,
}

/// Runs the sequential threshold process with thresholds `α_1 .. α_t`,
/// scanning in id order (decoys before optimal elements), on the geometric
/// instance with `v* = 1` and the default tie margin.
pub fn tightness_experiment(t: usize, k: usize) -> Result<TightnessOutcome, AdversarialError> {
    let inst = AdversarialInstance::geometric_with_margin(t, k, 1.0, DEFAULT_TIE_MARGIN)?;
    tightness_on(&inst)
}

pub fn tightness_on(inst: &AdversarialInstance) -> Result<TightnessOutcome, AdversarialError> {
    tightness_with_oracle(inst, &inst.oracle()?)
}

/// As [`tightness_on`], charging evaluations to `oracle`, which must be
/// built from `inst`.
pub fn tightness_with_oracle(
    inst: &AdversarialInstance,
    oracle: &Oracle,
) -> Result<TightnessOutcome, AdversarialError> {
    let order: Vec<Element> = (0..inst.len()).collect();
    let mut g = PartialSolution::empty(oracle, inst.k())?;
    for &tau in &inst.alphas()[1..] {
        g = threshold_greedy(oracle, &order, g, tau)?;
    }
    Ok(outcome(inst, &g))
}

/// Same schedule through the distributed `2t`-round algorithm with
/// `OPT = k v*`. The instance has `n = 2k` when levels are geometric, so the
/// sample holds every element and each phase scans in id order.
pub fn tightness_distributed(
    inst: &AdversarialInstance,
    seed: u64,
) -> Result<TightnessOutcome, AdversarialError> {
    let oracle = inst.oracle()?;
    let cfg = ClusterConfig::new(inst.len(), inst.k(), seed).map_err(AlgorithmError::from)?;
    let out = algorithms::multi_round(&cfg, &oracle, inst.opt(), inst.t())?;
    Ok(outcome(inst, &out.solution))
}

fn outcome(inst: &AdversarialInstance, g: &PartialSolution) -> TightnessOutcome {
    let mut sorted = g.elements().to_vec();
    sorted.sort_unstable();
    let selected_per_level = (1..=inst.t())
        .map(|l| {
            let r = inst.level_ids(l);
            sorted.iter().filter(|e| r.contains(e)).count()
        })
        .collect();
    let optimal_selected = sorted.iter().filter(|&&e| e >= inst.decoy_count()).count();
    TightnessOutcome {
        t: inst.t(),
        k: inst.k(),
        ratio: g.value() / inst.opt(),
        bound: algorithms::guaranteed_ratio(inst.t()),
        selected_per_level,
        optimal_selected,
    }
}
