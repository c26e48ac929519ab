//! Sequential building blocks: threshold greedy, threshold filter, the classic
//! greedy baseline and exhaustive search for OPT.

use std::collections::HashSet;

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::oracle::{Element, Evaluator, OracleError};

/// Largest number of size-k subsets [`brute_force_opt`] enumerates by default.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("brute force needs {subsets} subsets, cap is {cap}")]
    EnumerationCap { subsets: u128, cap: u64 },
    #[error("cardinality bound must be at least 1")]
    ZeroBound,
    #[error("invalid partial solution: {0}")]
    InvalidSolution(String),
}

/// A chosen set `G` with `|G| <= k`, kept in selection order together with its
/// cached value and the marginal each element had when it was inserted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSolution {
    k: usize,
    elements: Vec<Element>,
    #[serde(skip)]
    members: HashSet<Element>,
    value: f64,
    gains: Vec<f64>,
}

impl PartialSolution {
    /// The empty solution; costs one oracle call for `f(∅)`.
    pub fn empty<E: Evaluator + ?Sized>(oracle: &E, k: usize) -> Result<Self, OracleError> {
        let value = oracle.evaluate(&[])?;
        Ok(PartialSolution {
            k,
            elements: Vec::new(),
            members: HashSet::new(),
            value,
            gains: Vec::new(),
        })
    }

    /// Rebuilds a solution from a known selection order. Per-insertion gains
    /// are recomputed, costing `|elements| + 1` calls.
    pub fn from_elements<E: Evaluator + ?Sized>(
        oracle: &E,
        k: usize,
        elements: &[Element],
    ) -> Result<Self, KernelError> {
        if elements.len() > k {
            return Err(KernelError::InvalidSolution(format!(
                "{} elements exceed bound {k}",
                elements.len()
            )));
        }
        let mut g = Self::empty(oracle, k)?;
        for &e in elements {
            if g.contains(e) {
                return Err(KernelError::InvalidSolution(format!("duplicate element {e}")));
            }
            let gain = oracle.marginal_from(&g.elements, g.value, e)?;
            g.push(e, gain);
        }
        Ok(g)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Marginal of each element at the moment it was added.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.elements.len() >= self.k
    }

    pub fn contains(&self, e: Element) -> bool {
        self.members.contains(&e)
    }

    fn push(&mut self, e: Element, gain: f64) {
        self.elements.push(e);
        self.members.insert(e);
        self.gains.push(gain);
        self.value += gain;
    }
}

/// Scans `seq` in order, adding each element whose marginal w.r.t. the current
/// solution is at least `tau` while fewer than `k` elements are held.
///
/// On return either the solution is full or every element of `seq` has
/// marginal below `tau` w.r.t. the result.
pub fn threshold_greedy<E: Evaluator + ?Sized>(
    oracle: &E,
    seq: &[Element],
    mut g: PartialSolution,
    tau: f64,
) -> Result<PartialSolution, OracleError> {
    for &e in seq {
        if g.is_full() {
            break;
        }
        if g.contains(e) {
            continue;
        }
        let gain = oracle.marginal_from(&g.elements, g.value, e)?;
        if gain >= tau {
            g.push(e, gain);
        }
    }
    Ok(g)
}

/// Returns the elements of `set` (input order kept) whose marginal w.r.t. `g`
/// is at least `tau`. Members of `g` have marginal 0 and are not evaluated.
pub fn threshold_filter<E: Evaluator + ?Sized>(
    oracle: &E,
    set: &[Element],
    g: &PartialSolution,
    tau: f64,
) -> Result<Vec<Element>, OracleError> {
    let mut kept = Vec::new();
    for &e in set {
        let gain = if g.contains(e) {
            0.0
        } else {
            oracle.marginal_from(&g.elements, g.value, e)?
        };
        if gain >= tau {
            kept.push(e);
        }
    }
    Ok(kept)
}

/// Classic greedy: repeatedly take the element of largest marginal (smallest
/// id on ties) until `k` are chosen or no element has positive marginal.
pub fn sequential_greedy<E: Evaluator + ?Sized>(
    oracle: &E,
    ground: &[Element],
    k: usize,
) -> Result<PartialSolution, KernelError> {
    if k == 0 {
        return Err(KernelError::ZeroBound);
    }
    let mut candidates: Vec<Element> = ground.to_vec();
    candidates.sort_unstable();
    candidates.dedup();
    let mut g = PartialSolution::empty(oracle, k)?;
    while !g.is_full() {
        let mut best: Option<(Element, f64)> = None;
        for &e in &candidates {
            if g.contains(e) {
                continue;
            }
            let gain = oracle.marginal_from(&g.elements, g.value, e)?;
            if best.is_none_or(|(_, b)| gain > b) {
                best = Some((e, gain));
            }
        }
        match best {
            Some((e, gain)) if gain > 0.0 => g.push(e, gain),
            _ => break,
        }
    }
    Ok(g)
}

/// Exact optimum over subsets of `ground` with at most `k` elements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForceOpt {
    pub value: f64,
    pub witness: Vec<Element>,
}

/// `C(n, r)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, r: u64) -> u128 {
    let r = r.min(n.saturating_sub(r));
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = match acc.checked_mul(u128::from(n - i)) {
            Some(x) => x / u128::from(i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Enumerates every subset of size exactly `min(k, |ground|)`; monotonicity
/// makes smaller sizes redundant. The first maximizer in lexicographic order
/// is returned as the witness.
pub fn brute_force_opt<E: Evaluator + ?Sized>(
    oracle: &E,
    ground: &[Element],
    k: usize,
    cap: u64,
) -> Result<BruteForceOpt, KernelError> {
    let mut pool: Vec<Element> = ground.to_vec();
    pool.sort_unstable();
    pool.dedup();
    let size = k.min(pool.len());
    let subsets = binomial(pool.len() as u64, size as u64);
    if subsets > u128::from(cap) {
        return Err(KernelError::EnumerationCap { subsets, cap });
    }
    let mut best = BruteForceOpt {
        value: oracle.evaluate(&[])?,
        witness: Vec::new(),
    };
    if size == 0 {
        return Ok(best);
    }
    best.value = f64::NEG_INFINITY;
    for combo in pool.iter().copied().combinations(size) {
        let v = oracle.evaluate(&combo)?;
        if v > best.value {
            best = BruteForceOpt {
                value: v,
                witness: combo,
            };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{AdditiveFunction, CoverageInstance, Oracle, VALUE_TOLERANCE};
    use proptest::prelude::*;

    fn additive(values: &[f64]) -> Oracle {
        Oracle::new(AdditiveFunction::new(values.to_vec()).unwrap()).unwrap()
    }

    fn coverage(universe: usize, sets: Vec<Vec<usize>>) -> Oracle {
        Oracle::new(CoverageInstance::new(universe, sets, None).unwrap()).unwrap()
    }

    #[test]
    fn threshold_greedy_empty_scan() {
        let o = additive(&[1.0, 2.0]);
        let g = PartialSolution::from_elements(&o, 2, &[1]).unwrap();
        let out = threshold_greedy(&o, &[], g.clone(), 0.5).unwrap();
        assert_eq!(out, g);
    }

    #[test]
    fn threshold_greedy_hand_trace() {
        let o = additive(&[10.0, 3.0, 6.0]);
        let g = PartialSolution::empty(&o, 2).unwrap();
        let out = threshold_greedy(&o, &[0, 1, 2], g, 5.0).unwrap();
        assert_eq!(out.elements(), &[0, 2]);
        assert_eq!(out.value(), 16.0);
        assert_eq!(out.gains(), &[10.0, 6.0]);
        // brute force agrees this pair is optimal for k = 2
        let opt = brute_force_opt(&o, &[0, 1, 2], 2, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(opt.value, 16.0);
    }

    #[test]
    fn threshold_zero_fills_to_k() {
        let o = coverage(5, vec![vec![0], vec![0], vec![1, 2], vec![], vec![4]]);
        let g = PartialSolution::empty(&o, 3).unwrap();
        let out = threshold_greedy(&o, &[0, 1, 2, 3, 4], g, 0.0).unwrap();
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn filter_cases() {
        let o = additive(&[10.0, 3.0, 6.0]);
        let empty = PartialSolution::empty(&o, 2).unwrap();
        assert_eq!(threshold_filter(&o, &[0, 1, 2], &empty, 5.0).unwrap(), vec![0, 2]);
        assert_eq!(threshold_filter(&o, &[2, 1, 0], &empty, 0.0).unwrap(), vec![2, 1, 0]);
        let holding = PartialSolution::from_elements(&o, 2, &[0]).unwrap();
        assert_eq!(threshold_filter(&o, &[0, 1, 2], &holding, 1.0).unwrap(), vec![1, 2]);
        assert_eq!(threshold_filter(&o, &[0, 1], &holding, 0.0).unwrap(), vec![0, 1]);
    }

    #[test]
    fn greedy_top_k_on_additive() {
        let o = additive(&[4.0, 9.0, 1.0, 9.0, 7.0]);
        let g = sequential_greedy(&o, &[0, 1, 2, 3, 4], 3).unwrap();
        assert_eq!(g.elements(), &[1, 3, 4]);
        assert_eq!(g.value(), 25.0);
    }

    #[test]
    fn greedy_with_large_k_covers_everything() {
        let o = coverage(6, vec![vec![0, 1], vec![1], vec![2, 3], vec![5]]);
        let g = sequential_greedy(&o, &[0, 1, 2, 3], 10).unwrap();
        assert_eq!(g.value(), o.evaluate(&[0, 1, 2, 3]).unwrap());
        assert!(!g.contains(1));
        assert!(sequential_greedy(&o, &[0], 0).is_err());
    }

    #[test]
    fn brute_force_small_coverage() {
        // sets {1,2}, {2,3}, {4}: best pair covers 3 of the 4 points;
        // enumerating by hand: {0,1}=3, {0,2}=3, {1,2}=3
        let o = coverage(5, vec![vec![1, 2], vec![2, 3], vec![4]]);
        let opt = brute_force_opt(&o, &[0, 1, 2], 2, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(opt.value, 3.0);
        assert_eq!(opt.witness, vec![0, 1]);
        let all = brute_force_opt(&o, &[0, 1, 2], 3, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(all.value, 4.0);
    }

    #[test]
    fn brute_force_k_zero_and_cap() {
        let o = additive(&[1.0, 2.0, 3.0]);
        let z = brute_force_opt(&o, &[0, 1, 2], 0, 1).unwrap();
        assert_eq!(z.value, 0.0);
        assert!(z.witness.is_empty());
        assert_eq!(
            brute_force_opt(&o, &[0, 1, 2], 1, 2),
            Err(KernelError::EnumerationCap { subsets: 3, cap: 2 })
        );
        assert_eq!(
            brute_force_opt(&o, &[0, 1, 2], 2, DEFAULT_ENUMERATION_CAP).unwrap().value,
            5.0
        );
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(14, 3), 364);
        assert_eq!(binomial(3, 5), 1);
        assert_eq!(binomial(60, 30), 118_264_581_564_861_424);
    }

    #[test]
    fn from_elements_rejects_bad_input() {
        let o = additive(&[1.0, 2.0, 3.0]);
        assert!(PartialSolution::from_elements(&o, 1, &[0, 1]).is_err());
        assert!(PartialSolution::from_elements(&o, 3, &[0, 0]).is_err());
    }

    fn coverage_strategy() -> impl Strategy<Value = (Oracle, usize, f64, Vec<Element>)> {
        (
            prop::collection::vec(prop::collection::vec(0usize..20, 0..6), 1..15),
            1usize..5,
            0.0f64..4.0,
            any::<u64>(),
        )
            .prop_map(|(sets, k, tau, shuffle)| {
                let n = sets.len();
                let mut order: Vec<Element> = (0..n).collect();
                order.sort_by_key(|e| (*e as u64).wrapping_mul(shuffle | 1).rotate_left(17));
                (coverage(20, sets), k, tau, order)
            })
    }

    proptest! {
        #[test]
        fn greedy_terminal_condition((o, k, tau, order) in coverage_strategy()) {
            let g = threshold_greedy(&o, &order, PartialSolution::empty(&o, k).unwrap(), tau).unwrap();
            prop_assert!(g.len() <= k);
            if !g.is_full() {
                for &e in &order {
                    prop_assert!(o.marginal(g.elements(), e).unwrap() < tau);
                }
            }
            prop_assert!(g.value() >= tau * g.len() as f64 - VALUE_TOLERANCE);
            prop_assert!((g.value() - o.evaluate(g.elements()).unwrap()).abs() < VALUE_TOLERANCE);
        }

        #[test]
        fn filter_is_exact_marginal_test((o, k, tau, order) in coverage_strategy()) {
            let g = threshold_greedy(&o, &order[..order.len() / 2], PartialSolution::empty(&o, k).unwrap(), tau + 1.0).unwrap();
            let kept = threshold_filter(&o, &order, &g, tau).unwrap();
            for &e in &order {
                let passes = o.marginal(g.elements(), e).unwrap() >= tau;
                prop_assert_eq!(kept.contains(&e), passes);
            }
        }
    }
}
