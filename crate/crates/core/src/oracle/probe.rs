use rand::Rng;
use serde::Serialize;

use super::{Element, Evaluator, OracleError, VALUE_TOLERANCE};
use crate::rng::SeedStreams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    NonFinite,
    Negative,
    NonMonotone,
    NonSubmodular,
}

/// A sampled triple `(A ⊆ B, e ∉ B)` on which the oracle broke a property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub trial: usize,
    pub kind: ViolationKind,
    pub smaller: Vec<Element>,
    pub larger: Vec<Element>,
    pub element: Element,
    pub gain_smaller: f64,
    pub gain_larger: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ProbeOutcome {
    Pass { trials: usize },
    Fail(Violation),
}

impl ProbeOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, ProbeOutcome::Pass { .. })
    }
}

/// Randomized check of nonnegativity, monotonicity and diminishing returns.
///
/// Each trial draws a density for `B`, a density for `A` inside `B`, and an
/// element outside `B`, then compares `f_A(e) >= f_B(e) >= 0` up to
/// [`VALUE_TOLERANCE`]. Returns the first violation found.
pub fn probe_structure<E: Evaluator + ?Sized>(
    oracle: &E,
    trials: usize,
    seed: u64,
) -> Result<ProbeOutcome, OracleError> {
    let n = oracle.ground_set().len();
    let mut rng = SeedStreams::new(seed).stream("probe", 0);
    for trial in 0..trials {
        let e = rng.random_range(0..n);
        let outer: f64 = rng.random();
        let inner: f64 = rng.random();
        let larger: Vec<Element> = (0..n)
            .filter(|&x| x != e && rng.random::<f64>() < outer)
            .collect();
        let smaller: Vec<Element> = larger
            .iter()
            .copied()
            .filter(|_| rng.random::<f64>() < inner)
            .collect();

        let f_small = oracle.evaluate(&smaller)?;
        let f_large = oracle.evaluate(&larger)?;
        let gain_smaller = oracle.marginal_from(&smaller, f_small, e)?;
        let gain_larger = oracle.marginal_from(&larger, f_large, e)?;

        let kind = if ![f_small, f_large, gain_smaller, gain_larger]
            .iter()
            .all(|v| v.is_finite())
        {
            Some(ViolationKind::NonFinite)
        } else if f_small < -VALUE_TOLERANCE || f_large < -VALUE_TOLERANCE {
            Some(ViolationKind::Negative)
        } else if gain_larger < -VALUE_TOLERANCE || f_large < f_small - VALUE_TOLERANCE {
            Some(ViolationKind::NonMonotone)
        } else if gain_smaller < gain_larger - VALUE_TOLERANCE {
            Some(ViolationKind::NonSubmodular)
        } else {
            None
        };
        if let Some(kind) = kind {
            return Ok(ProbeOutcome::Fail(Violation {
                trial,
                kind,
                smaller,
                larger,
                element: e,
                gain_smaller,
                gain_larger,
            }));
        }
    }
    Ok(ProbeOutcome::Pass { trials })
}
