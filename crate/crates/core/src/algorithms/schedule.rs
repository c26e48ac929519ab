use serde::Serialize;

use super::AlgorithmError;

/// Worst-case ratio of the `t`-threshold algorithm: `1 - (1 - 1/(t+1))^t`.
pub fn guaranteed_ratio(t: usize) -> f64 {
    1.0 - (1.0 - 1.0 / (t as f64 + 1.0)).powi(t as i32)
}

pub(crate) fn level_values(t: usize, opt_estimate: f64, k: usize) -> Vec<f64> {
    let decay = 1.0 - 1.0 / (t as f64 + 1.0);
    (1..=t)
        .map(|l| decay.powi(l as i32) * opt_estimate / k as f64)
        .collect()
}

/// Geometrically decreasing thresholds `α_l = (1 - 1/(t+1))^l · opt / k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdSchedule {
    t: usize,
    opt_estimate: f64,
    k: usize,
    levels: Vec<f64>,
}

impl ThresholdSchedule {
    pub fn new(t: usize, opt_estimate: f64, k: usize) -> Result<Self, AlgorithmError> {
        if t == 0 {
            return Err(AlgorithmError::Invalid("threshold count t must be at least 1".into()));
        }
        if k == 0 {
            return Err(AlgorithmError::Invalid("k must be at least 1".into()));
        }
        if !(opt_estimate.is_finite() && opt_estimate > 0.0) {
            return Err(AlgorithmError::Invalid(format!(
                "OPT estimate must be positive, got {opt_estimate}"
            )));
        }
        Ok(ThresholdSchedule {
            t,
            opt_estimate,
            k,
            levels: level_values(t, opt_estimate, k),
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn opt_estimate(&self) -> f64 {
        self.opt_estimate
    }

    /// `α_1 .. α_t`.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn guaranteed_ratio(&self) -> f64 {
        guaranteed_ratio(self.t)
    }
}

/// Geometric grid `v (1+ε)^j` for `j` in `j_min..=j_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuessGrid {
    base: f64,
    eps: f64,
    k: usize,
    j_min: i32,
    j_max: i32,
}

fn check_eps(eps: f64) -> Result<(), AlgorithmError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(AlgorithmError::Invalid(format!("ε must lie in (0, 1), got {eps}")))
    }
}

// smallest j >= 0 with (1+eps)^j >= factor
fn steps_up(eps: f64, factor: f64) -> i32 {
    let mut j = 0;
    while (1.0 + eps).powi(j) < factor * (1.0 - 1e-12) {
        j += 1;
    }
    j
}

impl GuessGrid {
    /// Threshold grid for guessing `OPT/(2k)` from a singleton maximum `v`:
    /// `τ_j = v (1+ε)^j / k` spanning at least `[v/(2k), v]`.
    pub fn half_threshold(base: f64, eps: f64, k: usize) -> Result<Self, AlgorithmError> {
        check_eps(eps)?;
        Ok(GuessGrid {
            base,
            eps,
            k,
            j_min: -steps_up(eps, 2.0),
            j_max: steps_up(eps, k as f64),
        })
    }

    /// Grid of OPT estimates `v (1+ε)^j` spanning `[v, kv]`.
    pub fn opt_estimates(base: f64, eps: f64, k: usize) -> Result<Self, AlgorithmError> {
        check_eps(eps)?;
        Ok(GuessGrid {
            base,
            eps,
            k,
            j_min: 0,
            j_max: steps_up(eps, k as f64),
        })
    }

    /// Number of grid points; depends only on `ε` and `k`.
    pub fn len(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn exponents(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    /// `v (1+ε)^j`.
    pub fn values(&self) -> Vec<f64> {
        self.exponents()
            .map(|j| self.base * (1.0 + self.eps).powi(j))
            .collect()
    }

    /// `v (1+ε)^j / k`.
    pub fn thresholds(&self) -> Vec<f64> {
        self.values().into_iter().map(|v| v / self.k as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn schedule_levels() {
        let s = ThresholdSchedule::new(1, 10.0, 5).unwrap();
        assert_eq!(s.levels(), &[1.0]);
        let s = ThresholdSchedule::new(3, 64.0, 1).unwrap();
        assert_eq!(s.levels(), &[48.0, 36.0, 27.0]);
        assert!(ThresholdSchedule::new(0, 1.0, 1).is_err());
        assert!(ThresholdSchedule::new(2, 0.0, 1).is_err());
    }

    #[test]
    fn bounds() {
        assert_eq!(guaranteed_ratio(1), 0.5);
        assert!((guaranteed_ratio(2) - 5.0 / 9.0).abs() < 1e-15);
        assert!((guaranteed_ratio(3) - 37.0 / 64.0).abs() < 1e-15);
        for t in 1..200 {
            assert!(guaranteed_ratio(t + 1) >= guaranteed_ratio(t));
            assert!(guaranteed_ratio(t) < 1.0 - (-1.0f64).exp() + 1e-12);
        }
    }

    #[test]
    fn grid_spacing_and_span() {
        let g = GuessGrid::half_threshold(3.0, 0.1, 25).unwrap();
        let th = g.thresholds();
        for w in th.windows(2) {
            assert!((w[1] / w[0] - 1.1).abs() < 1e-12);
        }
        assert!(th[0] <= 3.0 / 50.0 + 1e-15);
        assert!(*th.last().unwrap() >= 3.0 - 1e-12);
        assert_eq!(GuessGrid::half_threshold(1.0, 0.5, 1).unwrap().exponents(), -2..=0);
        assert!(GuessGrid::opt_estimates(1.0, 1.0, 4).is_err());
    }

    proptest! {
        #[test]
        fn opt_grid_brackets_every_feasible_opt(
            v in 0.01f64..100.0,
            k in 1usize..500,
            frac in 0.0f64..=1.0,
            eps in 0.01f64..0.99,
        ) {
            let opt = v * (1.0 + frac * (k as f64 - 1.0));
            let grid = GuessGrid::opt_estimates(v, eps, k).unwrap();
            let hit = grid
                .values()
                .into_iter()
                .any(|g| g <= opt * (1.0 + 1e-12) && g * (1.0 + eps) >= opt * (1.0 - 1e-12));
            prop_assert!(hit);
        }

        #[test]
        fn half_grid_brackets_half_threshold(
            v in 0.01f64..100.0,
            k in 1usize..500,
            frac in 0.0f64..=1.0,
            eps in 0.01f64..0.99,
        ) {
            let opt = v * (1.0 + frac * (k as f64 - 1.0));
            let target = opt / (2.0 * k as f64);
            let grid = GuessGrid::half_threshold(v, eps, k).unwrap();
            let hit = grid
                .thresholds()
                .into_iter()
                .any(|tau| tau <= target * (1.0 + 1e-12) && tau * (1.0 + eps) >= target * (1.0 - 1e-12));
            prop_assert!(hit);
        }
    }
}
