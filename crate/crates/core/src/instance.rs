//! Instance files and seeded instance generators.
//!
//! Coverage files:
//!
//! ```text
//! # comment
//! coverage <n_elements> <universe_size>
//! 0: 3 17 42
//! 1: 5
//! weights: 1 0.5 ...
//! ```
//!
//! Every id in `0..n` appears exactly once; `weights:` is optional and lists
//! one nonnegative weight per universe point. Adversarial files are a single
//! header line `adversarial <t> <k> <v*>`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Zipf};
use thiserror::Error;

use crate::adversarial::{AdversarialError, AdversarialInstance, DEFAULT_TIE_MARGIN};
use crate::oracle::{CoverageInstance, Oracle, OracleError};
use crate::rng::SeedStreams;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Adversarial(#[from] AdversarialError),
    #[error("invalid generator parameters: {0}")]
    Params(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Coverage(CoverageInstance),
    Adversarial { t: usize, k: usize, v_star: f64 },
}

impl Instance {
    pub fn len(&self) -> usize {
        match self {
            Instance::Coverage(c) => c.sets().len(),
            Instance::Adversarial { t, k, v_star } => {
                AdversarialInstance::geometric(*t, *k, *v_star).map_or(0, |a| a.len())
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The adversarial instance behind an `adversarial` header, with the
    /// default tie margin.
    pub fn adversarial(&self) -> Result<Option<AdversarialInstance>, InstanceError> {
        match self {
            Instance::Adversarial { t, k, v_star } => Ok(Some(
                AdversarialInstance::geometric_with_margin(*t, *k, *v_star, DEFAULT_TIE_MARGIN)?,
            )),
            Instance::Coverage(_) => Ok(None),
        }
    }

    pub fn oracle(&self) -> Result<Oracle, InstanceError> {
        match self {
            Instance::Coverage(c) => Ok(Oracle::new(c.clone())?),
            Instance::Adversarial { .. } => {
                let inst = self.adversarial()?.expect("adversarial variant");
                Ok(inst.oracle()?)
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(InstanceError::Parse {
            line: 0,
            msg: "empty instance file".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let err = |line: usize, msg: String| InstanceError::Parse { line, msg };
        match fields.as_slice() {
            ["adversarial", t, k, v] => {
                let t = t.parse().map_err(|_| err(hline, format!("bad t `{t}`")))?;
                let k = k.parse().map_err(|_| err(hline, format!("bad k `{k}`")))?;
                let v_star = v.parse().map_err(|_| err(hline, format!("bad v* `{v}`")))?;
                if let Some((line, _)) = lines.next() {
                    return Err(err(line, "unexpected content after adversarial header".into()));
                }
                AdversarialInstance::geometric(t, k, v_star)?;
                Ok(Instance::Adversarial { t, k, v_star })
            }
            ["coverage", n, u] => {
                let n: usize = n.parse().map_err(|_| err(hline, format!("bad n `{n}`")))?;
                let u: usize = u.parse().map_err(|_| err(hline, format!("bad universe `{u}`")))?;
                let mut sets: Vec<Option<Vec<usize>>> = vec![None; n];
                let mut weights = None;
                for (line, body) in lines {
                    let (key, rest) = body
                        .split_once(':')
                        .ok_or_else(|| err(line, format!("expected `<id>: ...`, got `{body}`")))?;
                    let key = key.trim();
                    if key == "weights" {
                        if weights.is_some() {
                            return Err(err(line, "duplicate weights line".into()));
                        }
                        let w = rest
                            .split_whitespace()
                            .map(|x| x.parse::<f64>().map_err(|_| err(line, format!("bad weight `{x}`"))))
                            .collect::<Result<Vec<_>, _>>()?;
                        weights = Some(w);
                        continue;
                    }
                    let id: usize = key.parse().map_err(|_| err(line, format!("bad element id `{key}`")))?;
                    if id >= n {
                        return Err(err(line, format!("element id {id} out of range 0..{n}")));
                    }
                    if sets[id].is_some() {
                        return Err(err(line, format!("duplicate element id {id}")));
                    }
                    let pts = rest
                        .split_whitespace()
                        .map(|x| x.parse::<usize>().map_err(|_| err(line, format!("bad point `{x}`"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    sets[id] = Some(pts);
                }
                let sets = sets
                    .into_iter()
                    .enumerate()
                    .map(|(e, s)| s.ok_or_else(|| err(hline, format!("element {e} has no line"))))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Instance::Coverage(CoverageInstance::new(u, sets, weights)?))
            }
            _ => Err(err(hline, format!("unknown header `{header}`"))),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            Instance::Adversarial { t, k, v_star } => {
                let _ = writeln!(out, "adversarial {t} {k} {v_star}");
            }
            Instance::Coverage(c) => {
                let _ = writeln!(out, "coverage {} {}", c.sets().len(), c.universe_size());
                for (e, s) in c.sets().iter().enumerate() {
                    let _ = write!(out, "{e}:");
                    for p in s {
                        let _ = write!(out, " {p}");
                    }
                    out.push('\n');
                }
                if let Some(w) = c.weights() {
                    out.push_str("weights:");
                    for x in w {
                        let _ = write!(out, " {x}");
                    }
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn read(path: &Path) -> Result<Self, InstanceError> {
        let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), InstanceError> {
        fs::write(path, self.to_text()).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

fn positive(name: &str, v: usize) -> Result<(), InstanceError> {
    if v == 0 {
        Err(InstanceError::Params(format!("{name} must be positive")))
    } else {
        Ok(())
    }
}

/// Unweighted coverage; set sizes follow a Zipf law on `1..=max_set_size`
/// with the given exponent, points drawn uniformly without replacement.
pub fn random_coverage(
    n: usize,
    universe: usize,
    max_set_size: usize,
    exponent: f64,
    seed: u64,
) -> Result<Instance, InstanceError> {
    positive("n", n)?;
    positive("universe", universe)?;
    positive("max set size", max_set_size)?;
    let cap = max_set_size.min(universe);
    let zipf = Zipf::new(cap as f64, exponent).map_err(|e| InstanceError::Params(e.to_string()))?;
    let mut rng = SeedStreams::new(seed).stream("generate", 0);
    let sets = (0..n)
        .map(|_| {
            let size = (zipf.sample(&mut rng) as usize).clamp(1, cap);
            let mut pts = index::sample(&mut rng, universe, size).into_vec();
            pts.sort_unstable();
            pts
        })
        .collect();
    Ok(Instance::Coverage(CoverageInstance::new(universe, sets, None)?))
}

/// Additive: exactly `k` elements of value 1 at random positions; the rest
/// have values uniform in `[0, 1/n)`.
pub fn planted_sparse(n: usize, k: usize, seed: u64) -> Result<Instance, InstanceError> {
    positive("n", n)?;
    positive("k", k)?;
    if k > n {
        return Err(InstanceError::Params(format!("k = {k} exceeds n = {n}")));
    }
    let mut rng = SeedStreams::new(seed).stream("generate", 0);
    let mut values: Vec<f64> = (0..n).map(|_| rng.random::<f64>() / n as f64).collect();
    for e in index::sample(&mut rng, n, k) {
        values[e] = 1.0;
    }
    Ok(Instance::Coverage(CoverageInstance::additive(values)?))
}

/// Additive with values uniform in `[0, 1)`.
pub fn uniform_additive(n: usize, seed: u64) -> Result<Instance, InstanceError> {
    positive("n", n)?;
    let mut rng = SeedStreams::new(seed).stream("generate", 0);
    let values = (0..n).map(|_| rng.random::<f64>()).collect();
    Ok(Instance::Coverage(CoverageInstance::additive(values)?))
}

pub fn adversarial(t: usize, k: usize, v_star: f64) -> Result<Instance, InstanceError> {
    AdversarialInstance::geometric(t, k, v_star)?;
    Ok(Instance::Adversarial { t, k, v_star })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Evaluator;

    #[test]
    fn parse_coverage() {
        let text = "# tiny\ncoverage 3 4\n1: 2 3\n0: 0 1   # first\n2:\nweights: 1 2 0.5 4\n";
        let inst = Instance::parse(text).unwrap();
        let Instance::Coverage(c) = &inst else { panic!() };
        assert_eq!(c.sets(), &[vec![0, 1], vec![2, 3], vec![]]);
        let o = inst.oracle().unwrap();
        assert_eq!(o.evaluate(&[0, 1]).unwrap(), 7.5);
        assert_eq!(Instance::parse(&inst.to_text()).unwrap(), inst);
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "",
            "coverage 2 3\n0: 1\n0: 2\n",
            "coverage 2 3\n0: 1\n",
            "coverage 2 3\n0: 1\n1: 3\n",
            "coverage 1 3\n0: 1\nweights: 1 1\n",
            "coverage 1 3\n0: x\n",
            "cover 1 3\n",
            "adversarial 0 5 1\n",
            "adversarial 2 5 1\n0: 1\n",
        ] {
            assert!(Instance::parse(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn adversarial_header() {
        let inst = adversarial(3, 500, 1.0).unwrap();
        assert_eq!(inst.to_text(), "adversarial 3 500 1\n");
        assert_eq!(Instance::parse("adversarial 3 500 1").unwrap(), inst);
        assert_eq!(inst.len(), 3 * 167 + 500);
    }

    #[test]
    fn generators() {
        let inst = random_coverage(100, 500, 50, 1.5, 9).unwrap();
        assert_eq!(inst.to_text().lines().filter(|l| l.contains(':')).count(), 100);
        assert_eq!(inst, random_coverage(100, 500, 50, 1.5, 9).unwrap());

        let inst = planted_sparse(10_000, 100, 1).unwrap();
        let o = inst.oracle().unwrap();
        let ones = (0..10_000).filter(|&e| o.singleton(e).unwrap() == 1.0).count();
        assert_eq!(ones, 100);

        let inst = uniform_additive(50, 2).unwrap();
        assert_eq!(Instance::parse(&inst.to_text()).unwrap(), inst);
        assert!(planted_sparse(5, 6, 0).is_err());
    }
}
