//! Ground sets, the set-function evaluation interface, and instrumented oracles.
//!
//! A [`SetFunction`] is the raw `f: 2^V -> R+`. Every algorithm talks to it
//! through an [`Evaluator`], which validates element ids and counts calls.
//! [`Oracle`] owns the global call counter; [`MachineOracle`] is a per-machine
//! view that additionally keeps a local count so the simulator can attribute
//! oracle work to the machine that performed it.

mod coverage;
mod probe;

use std::borrow::Cow;
use std::cell::Cell;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

pub use coverage::CoverageInstance;
pub use probe::{probe_structure, ProbeOutcome, Violation, ViolationKind};

/// Element identifier: a dense index into `0..n`.
pub type Element = usize;

/// Absolute tolerance used when comparing oracle values.
pub const VALUE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("element {element} is outside the ground set of size {ground_size}")]
    ElementOutOfRange { element: Element, ground_size: usize },
    #[error("ground set must be non-empty")]
    EmptyGroundSet,
    #[error("invalid oracle: {0}")]
    Invalid(String),
}

/// The universe `V = {0, .., n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self, OracleError> {
        if n == 0 {
            return Err(OracleError::EmptyGroundSet);
        }
        Ok(GroundSet { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn contains(&self, e: Element) -> bool {
        e < self.n
    }

    pub fn elements(&self) -> std::ops::Range<Element> {
        0..self.n
    }

    pub fn check(&self, e: Element) -> Result<(), OracleError> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(OracleError::ElementOutOfRange {
                element: e,
                ground_size: self.n,
            })
        }
    }
}

/// A set function over `0..ground_size()`.
///
/// `value` receives a sorted, duplicate-free slice of in-range ids; callers go
/// through an [`Evaluator`] which guarantees that.
pub trait SetFunction: Send + Sync + fmt::Debug {
    fn ground_size(&self) -> usize;

    fn value(&self, set: &[Element]) -> f64;

    /// Value of the singleton `{e}`.
    fn singleton(&self, e: Element) -> f64 {
        self.value(&[e])
    }
}

/// Counted, validated access to a set function.
pub trait Evaluator {
    fn ground_set(&self) -> GroundSet;

    /// Returns `f(set)`, counting one call.
    fn evaluate(&self, set: &[Element]) -> Result<f64, OracleError>;

    /// `f({e})`, one call.
    fn singleton(&self, e: Element) -> Result<f64, OracleError> {
        self.evaluate(&[e])
    }

    /// `f(set + e) - f(set)`. Costs two calls, or none when `e` is already in `set`.
    fn marginal(&self, set: &[Element], e: Element) -> Result<f64, OracleError> {
        self.ground_set().check(e)?;
        if set.contains(&e) {
            return Ok(0.0);
        }
        let base = self.evaluate(set)?;
        self.marginal_from(set, base, e)
    }

    /// Marginal when the caller already knows `base = f(set)`: always one call.
    /// If `e` is already in `set` the result is `f(set) - base`, i.e. zero for a
    /// correct `base`.
    fn marginal_from(&self, set: &[Element], base: f64, e: Element) -> Result<f64, OracleError> {
        self.ground_set().check(e)?;
        let mut with = Vec::with_capacity(set.len() + 1);
        with.extend_from_slice(set);
        with.push(e);
        Ok(self.evaluate(&with)? - base)
    }
}

fn canonical(ground: GroundSet, set: &[Element]) -> Result<Cow<'_, [Element]>, OracleError> {
    let set = if set.windows(2).all(|w| w[0] < w[1]) {
        Cow::Borrowed(set)
    } else {
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        Cow::Owned(sorted)
    };
    if let Some(&last) = set.last() {
        ground.check(last)?;
    }
    Ok(set)
}

/// A set function plus a thread-safe call counter.
pub struct Oracle {
    function: Arc<dyn SetFunction>,
    ground: GroundSet,
    calls: AtomicU64,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("function", &self.function)
            .field("calls", &self.call_count())
            .finish()
    }
}

impl Oracle {
    pub fn new<F: SetFunction + 'static>(function: F) -> Result<Self, OracleError> {
        Self::from_arc(Arc::new(function))
    }

    pub fn from_arc(function: Arc<dyn SetFunction>) -> Result<Self, OracleError> {
        let ground = GroundSet::new(function.ground_size())?;
        Ok(Oracle {
            function,
            ground,
            calls: AtomicU64::new(0),
        })
    }

    /// Same function, zeroed counter.
    pub fn fresh(&self) -> Oracle {
        Oracle {
            function: Arc::clone(&self.function),
            ground: self.ground,
            calls: AtomicU64::new(0),
        }
    }

    pub fn function(&self) -> &Arc<dyn SetFunction> {
        &self.function
    }

    pub fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    /// A per-machine view sharing this oracle's counter.
    pub fn on_machine(&self) -> MachineOracle<'_> {
        MachineOracle {
            oracle: self,
            local: Cell::new(0),
        }
    }
}

impl Evaluator for Oracle {
    fn ground_set(&self) -> GroundSet {
        self.ground
    }

    fn evaluate(&self, set: &[Element]) -> Result<f64, OracleError> {
        let set = canonical(self.ground, set)?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(self.function.value(&set))
    }

    fn singleton(&self, e: Element) -> Result<f64, OracleError> {
        self.ground.check(e)?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(self.function.singleton(e))
    }
}

/// Oracle handle owned by one simulated machine for the duration of a round.
pub struct MachineOracle<'a> {
    oracle: &'a Oracle,
    local: Cell<u64>,
}

impl MachineOracle<'_> {
    /// Calls made through this handle.
    pub fn local_calls(&self) -> u64 {
        self.local.get()
    }
}

impl Evaluator for MachineOracle<'_> {
    fn ground_set(&self) -> GroundSet {
        self.oracle.ground
    }

    fn evaluate(&self, set: &[Element]) -> Result<f64, OracleError> {
        let v = self.oracle.evaluate(set)?;
        self.local.set(self.local.get() + 1);
        Ok(v)
    }

    fn singleton(&self, e: Element) -> Result<f64, OracleError> {
        let v = self.oracle.singleton(e)?;
        self.local.set(self.local.get() + 1);
        Ok(v)
    }
}

/// `f(S) = sum of per-element values`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveFunction {
    values: Vec<f64>,
}

impl AdditiveFunction {
    pub fn new(values: Vec<f64>) -> Result<Self, OracleError> {
        if values.is_empty() {
            return Err(OracleError::EmptyGroundSet);
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(OracleError::Invalid(format!(
                "additive values must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(AdditiveFunction { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl SetFunction for AdditiveFunction {
    fn ground_size(&self) -> usize {
        self.values.len()
    }

    fn value(&self, set: &[Element]) -> f64 {
        set.iter().map(|&e| self.values[e]).sum()
    }

    fn singleton(&self, e: Element) -> f64 {
        self.values[e]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_sets() -> Oracle {
        Oracle::new(CoverageInstance::new(4, vec![vec![1, 2], vec![2, 3]], None).unwrap()).unwrap()
    }

    #[test]
    fn coverage_union_count() {
        let o = two_sets();
        assert_eq!(o.evaluate(&[0, 1]).unwrap(), 3.0);
        assert_eq!(o.evaluate(&[]).unwrap(), 0.0);
        assert_eq!(o.call_count(), 2);
    }

    #[test]
    fn additive_sum() {
        let o = Oracle::new(AdditiveFunction::new(vec![5.0, 7.0]).unwrap()).unwrap();
        assert_eq!(o.evaluate(&[0, 1]).unwrap(), 12.0);
        assert_eq!(o.marginal(&[0], 1).unwrap(), 7.0);
        assert_eq!(o.marginal(&[], 1).unwrap(), 7.0);
    }

    #[test]
    fn marginal_values_and_costs() {
        let o = two_sets();
        assert_eq!(o.marginal(&[0], 1).unwrap(), 1.0);
        assert_eq!(o.call_count(), 2);
        assert_eq!(o.marginal_from(&[0], 2.0, 1).unwrap(), 1.0);
        assert_eq!(o.call_count(), 3);
        assert_eq!(o.marginal(&[0, 1], 1).unwrap(), 0.0);
        assert_eq!(o.call_count(), 3);
        assert_eq!(o.marginal_from(&[0, 1], 3.0, 1).unwrap(), 0.0);
        assert_eq!(o.call_count(), 4);
    }

    #[test]
    fn out_of_range_is_rejected() {
        let o = two_sets();
        assert_eq!(
            o.evaluate(&[0, 2]),
            Err(OracleError::ElementOutOfRange {
                element: 2,
                ground_size: 2
            })
        );
        assert!(o.marginal(&[], 9).is_err());
        assert_eq!(o.call_count(), 0);
    }

    #[test]
    fn duplicates_are_a_set() {
        let o = Oracle::new(AdditiveFunction::new(vec![5.0, 7.0]).unwrap()).unwrap();
        assert_eq!(o.evaluate(&[1, 1, 0]).unwrap(), 12.0);
    }

    #[test]
    fn machine_view_counts_both() {
        let o = two_sets();
        let m = o.on_machine();
        m.evaluate(&[0]).unwrap();
        m.marginal(&[0], 1).unwrap();
        assert_eq!(m.local_calls(), 3);
        assert_eq!(o.call_count(), 3);
        o.evaluate(&[1]).unwrap();
        assert_eq!(m.local_calls(), 3);
        assert_eq!(o.call_count(), 4);
    }

    #[test]
    fn fresh_resets_counter() {
        let o = two_sets();
        o.evaluate(&[0]).unwrap();
        assert_eq!(o.fresh().call_count(), 0);
    }

    #[test]
    fn additive_rejects_negative() {
        assert!(AdditiveFunction::new(vec![1.0, -1.0]).is_err());
        assert!(AdditiveFunction::new(vec![]).is_err());
    }
}
