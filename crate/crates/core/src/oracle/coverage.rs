use std::cell::RefCell;

use super::{Element, OracleError, SetFunction};

/// Weighted maximum-coverage objective: element `e` covers the universe points
/// in `sets[e]`, and `f(S)` is the total weight of the points covered by `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageInstance {
    universe: usize,
    sets: Vec<Vec<usize>>,
    weights: Option<Vec<f64>>,
}

impl CoverageInstance {
    pub fn new(
        universe: usize,
        sets: Vec<Vec<usize>>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self, OracleError> {
        if sets.is_empty() {
            return Err(OracleError::EmptyGroundSet);
        }
        let mut sets = sets;
        for (e, s) in sets.iter_mut().enumerate() {
            s.sort_unstable();
            s.dedup();
            if let Some(&p) = s.last() {
                if p >= universe {
                    return Err(OracleError::Invalid(format!(
                        "element {e} covers point {p}, universe size is {universe}"
                    )));
                }
            }
        }
        if let Some(w) = &weights {
            if w.len() != universe {
                return Err(OracleError::Invalid(format!(
                    "expected {universe} weights, got {}",
                    w.len()
                )));
            }
            if let Some(bad) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(OracleError::Invalid(format!(
                    "weights must be finite and nonnegative, got {bad}"
                )));
            }
        }
        Ok(CoverageInstance {
            universe,
            sets,
            weights,
        })
    }

    /// An additive function realized as a coverage instance: element `e` is the
    /// only one covering point `e`, whose weight is `values[e]`.
    pub fn additive(values: Vec<f64>) -> Result<Self, OracleError> {
        let n = values.len();
        Self::new(n, (0..n).map(|e| vec![e]).collect(), Some(values))
    }

    pub fn universe_size(&self) -> usize {
        self.universe
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    fn weight(&self, point: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[point])
    }
}

thread_local! {
    // Per-thread point marks; a point is marked when it holds the current stamp.
    static MARKS: RefCell<(Vec<u32>, u32)> = const { RefCell::new((Vec::new(), 0)) };
}

impl CoverageInstance {
    fn distinct_points(&self, set: &[Element]) -> usize {
        MARKS.with(|cell| {
            let mut guard = cell.borrow_mut();
            let (marks, stamp) = &mut *guard;
            if marks.len() < self.universe {
                marks.resize(self.universe, 0);
            }
            *stamp = stamp.wrapping_add(1);
            if *stamp == 0 {
                marks.fill(0);
                *stamp = 1;
            }
            let mut count = 0;
            for &e in set {
                for &p in &self.sets[e] {
                    if marks[p] != *stamp {
                        marks[p] = *stamp;
                        count += 1;
                    }
                }
            }
            count
        })
    }
}

impl SetFunction for CoverageInstance {
    fn ground_size(&self) -> usize {
        self.sets.len()
    }

    fn value(&self, set: &[Element]) -> f64 {
        if self.weights.is_none() {
            return self.distinct_points(set) as f64;
        }
        let mut points: Vec<usize> = set
            .iter()
            .flat_map(|&e| self.sets[e].iter().copied())
            .collect();
        points.sort_unstable();
        points.dedup();
        // ascending point order keeps weighted sums reproducible
        points.iter().map(|&p| self.weight(p)).sum()
    }

    fn singleton(&self, e: Element) -> f64 {
        self.sets[e].iter().map(|&p| self.weight(p)).sum()
    }
}
