//! One round-program skeleton shared by every distributed variant.
//!
//! A run is an optional maxima round, then `t` phases of two rounds each,
//! then an optional selection round. Each phase draws a fresh
//! PartitionAndSample; in its first round every worker runs ThresholdGreedy
//! on the sample and ThresholdFilter on its shard for every parallel
//! threshold instance, and in its second round the central machine completes
//! each instance. Instances differ only in where their thresholds come from.

use std::collections::BTreeMap;

use crate::kernels::{threshold_filter, threshold_greedy, KernelError, PartialSolution};
use crate::oracle::{Element, Evaluator, Oracle};
use crate::sim::{
    Channel, Cluster, ClusterConfig, Envelope, MachineCtx, MachineId, Message, SimError,
};

use super::schedule::{level_values, GuessGrid};
use super::{AlgorithmError, Diagnostics, RunOutput};

#[derive(Debug, Clone, Copy)]
pub(crate) enum Thresholds {
    /// One instance, `α_l` from a given OPT estimate.
    Known { opt: f64 },
    /// `t = 1`; grid `v(1+ε)^j/k` anchored at the best singleton of the sample.
    SampleGrid { eps: f64 },
    /// One `t`-level schedule per OPT guess `v(1+ε)^j`, `v` the best singleton overall.
    OptGuesses { eps: f64 },
    /// No threshold instances (sparse routing only).
    Skip,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SparseParams {
    pub eps: f64,
    pub c_large: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Plan {
    pub thresholds: Thresholds,
    pub t: usize,
    pub sparse: Option<SparseParams>,
    pub max_round: bool,
    pub select_round: bool,
}

impl Plan {
    fn instance_count(&self, k: usize) -> Result<usize, AlgorithmError> {
        Ok(match self.thresholds {
            Thresholds::Known { .. } => 1,
            Thresholds::SampleGrid { eps } => GuessGrid::half_threshold(1.0, eps, k)?.len(),
            Thresholds::OptGuesses { eps } => GuessGrid::opt_estimates(1.0, eps, k)?.len(),
            Thresholds::Skip => 0,
        })
    }

    /// `levels[j][phase]` for every instance `j`.
    fn levels(&self, anchor: f64, k: usize) -> Result<Vec<Vec<f64>>, SimError> {
        let invalid = |e: AlgorithmError| SimError::InvalidConfig(e.to_string());
        Ok(match self.thresholds {
            Thresholds::Known { opt } => vec![level_values(self.t, opt, k)],
            Thresholds::SampleGrid { eps } => GuessGrid::half_threshold(anchor, eps, k)
                .map_err(invalid)?
                .thresholds()
                .into_iter()
                .map(|tau| vec![tau])
                .collect(),
            Thresholds::OptGuesses { eps } => GuessGrid::opt_estimates(anchor, eps, k)
                .map_err(invalid)?
                .values()
                .into_iter()
                .map(|g| level_values(self.t, g, k))
                .collect(),
            Thresholds::Skip => Vec::new(),
        })
    }

    fn uses_sample(&self) -> bool {
        !matches!(self.thresholds, Thresholds::Skip)
    }
}

#[derive(Default)]
struct Mailbox {
    sample: Vec<Element>,
    shard: Vec<Element>,
    solutions: BTreeMap<usize, Vec<Element>>,
    filtered: BTreeMap<usize, Vec<Element>>,
    candidates: Vec<Element>,
    maxima: Vec<Element>,
}

impl Mailbox {
    fn open(inbox: Vec<Envelope>) -> Result<Self, SimError> {
        let mut mb = Mailbox::default();
        for env in inbox {
            let els = env.packet.elements;
            match env.packet.channel {
                Channel::Sample => mb.sample = els,
                Channel::Shard => mb.shard = els,
                Channel::Solution(j) => {
                    mb.solutions.insert(j, els);
                }
                Channel::Filtered(j) => mb.filtered.entry(j).or_default().extend(els),
                Channel::Candidates => mb.candidates.extend(els),
                Channel::Maxima => mb.maxima.extend(els),
                Channel::Custom(c) => {
                    return Err(SimError::Protocol(format!("unexpected custom channel {c}")))
                }
            }
        }
        Ok(mb)
    }
}

enum Note {
    Idle,
    Worker { g0: Vec<Vec<Element>> },
    Central(Box<CentralNote>),
    Selected(PartialSolution),
}

struct CentralNote {
    g0: Vec<Vec<Element>>,
    solutions: Vec<PartialSolution>,
    sparse_best: Option<PartialSolution>,
    filter_sound: bool,
    filtered_units: usize,
    anchor: f64,
}

fn rebuild<E: Evaluator + ?Sized>(
    oracle: &E,
    k: usize,
    elements: Option<&Vec<Element>>,
) -> Result<PartialSolution, SimError> {
    match elements {
        None => Ok(PartialSolution::empty(oracle, k)?),
        Some(els) => PartialSolution::from_elements(oracle, k, els).map_err(|e| match e {
            KernelError::Oracle(o) => SimError::Oracle(o),
            other => SimError::Protocol(other.to_string()),
        }),
    }
}

fn best_singleton<E: Evaluator + ?Sized>(
    oracle: &E,
    elements: &[Element],
) -> Result<Option<(Element, f64)>, SimError> {
    let mut best: Option<(Element, f64)> = None;
    for &e in elements {
        let v = oracle.singleton(e)?;
        if best.is_none_or(|(b, bv)| v > bv || (v == bv && e < b)) {
            best = Some((e, v));
        }
    }
    Ok(best)
}

fn anchor_value(ctx: &MachineCtx<'_>, plan: &Plan, mb: &Mailbox) -> Result<f64, SimError> {
    let pool = match plan.thresholds {
        Thresholds::SampleGrid { .. } => &mb.sample,
        Thresholds::OptGuesses { .. } => &mb.maxima,
        Thresholds::Known { .. } | Thresholds::Skip => return Ok(0.0),
    };
    Ok(best_singleton(&ctx.oracle, pool)?.map_or(0.0, |(_, v)| v))
}

/// The `cap` shard elements of largest singleton value, ties by smaller id.
fn top_singletons(
    ctx: &MachineCtx<'_>,
    shard: &[Element],
    cap: usize,
) -> Result<Vec<Element>, SimError> {
    let mut scored = shard
        .iter()
        .map(|&e| Ok((ctx.oracle.singleton(e)?, e)))
        .collect::<Result<Vec<(f64, Element)>, SimError>>()?;
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.truncate(cap);
    Ok(scored.into_iter().map(|(_, e)| e).collect())
}

fn sorted_unique(mut v: Vec<Element>) -> Vec<Element> {
    v.sort_unstable();
    v.dedup();
    v
}

fn better(a: Option<PartialSolution>, b: PartialSolution) -> Option<PartialSolution> {
    match a {
        Some(a) if a.value() >= b.value() => Some(a),
        _ => Some(b),
    }
}

fn hold(inbox: Vec<Envelope>) -> Vec<Message> {
    inbox
        .into_iter()
        .map(|env| Message {
            to: MachineId::Central,
            packet: env.packet,
        })
        .collect()
}

fn everyone(workers: usize) -> impl Iterator<Item = MachineId> {
    (0..workers).map(MachineId::Worker).chain(std::iter::once(MachineId::Central))
}

fn scale_budgets(cfg: &mut ClusterConfig, plan: &Plan, instances: usize) {
    let k = cfg.k;
    let m = cfg.machines;
    let carried = if plan.t > 1 { instances * k } else { 0 };
    let maxima = if plan.max_round { m } else { 0 };
    cfg.memory_budget_regular += carried + maxima;
    cfg.memory_budget_central = cfg.memory_budget_central * instances.max(1)
        + carried
        + maxima
        + if plan.select_round { instances * k } else { 0 }
        + plan.sparse.map_or(0, |s| m * s.c_large * k);
}

pub(crate) fn run(
    cfg: &ClusterConfig,
    oracle: &Oracle,
    plan: Plan,
) -> Result<RunOutput, AlgorithmError> {
    cfg.validate()?;
    if cfg.n != oracle.ground_set().len() {
        return Err(AlgorithmError::Invalid(format!(
            "config n = {} but the oracle has {} elements",
            cfg.n,
            oracle.ground_set().len()
        )));
    }
    let k = cfg.k;
    let instances = plan.instance_count(k)?;
    let mut cfg = cfg.clone();
    scale_budgets(&mut cfg, &plan, instances);
    let workers = cfg.machines;
    let audit = oracle.fresh();
    let mut cluster = Cluster::new(cfg.clone(), oracle)?;

    let mut diagnostics = Diagnostics {
        instances,
        g0_consistent: true,
        filter_sound: true,
        ..Diagnostics::default()
    };

    if plan.max_round {
        cluster.partition_and_sample(0, false)?;
        cluster.run_round(|ctx, inbox| {
            if ctx.id == MachineId::Central {
                return Ok((hold(inbox), Note::Idle));
            }
            let mb = Mailbox::open(inbox)?;
            let mut msgs = Vec::new();
            if let Some((e, _)) = best_singleton(&ctx.oracle, &mb.shard)? {
                msgs.extend(everyone(workers).map(|to| Message::new(to, Channel::Maxima, vec![e])));
            }
            Ok((msgs, Note::Idle))
        })?;
    }

    let mut last: Option<CentralNote> = None;
    for phase in 1..=plan.t {
        let idx = phase - 1;
        let first = phase == 1;
        let final_phase = phase == plan.t;
        cluster.partition_and_sample(phase as u64, plan.uses_sample())?;

        let notes = cluster.run_round(|ctx, inbox| {
            if ctx.id == MachineId::Central {
                return Ok((hold(inbox), Note::Idle));
            }
            let mb = Mailbox::open(inbox)?;
            let anchor = anchor_value(ctx, &plan, &mb)?;
            let mut msgs = Vec::new();
            let mut g0s = Vec::new();
            for (j, levels) in plan.levels(anchor, k)?.iter().enumerate() {
                let tau = levels[idx];
                let prev = rebuild(&ctx.oracle, k, mb.solutions.get(&j))?;
                let g0 = threshold_greedy(&ctx.oracle, &mb.sample, prev, tau)?;
                if !g0.is_full() {
                    let kept = threshold_filter(&ctx.oracle, &mb.shard, &g0, tau)?;
                    if !kept.is_empty() {
                        msgs.push(Message::new(MachineId::Central, Channel::Filtered(j), kept));
                    }
                }
                g0s.push(g0.elements().to_vec());
            }
            if let (true, Some(sp)) = (first, plan.sparse) {
                let top = top_singletons(ctx, &mb.shard, sp.c_large * k)?;
                if !top.is_empty() {
                    msgs.push(Message::new(MachineId::Central, Channel::Candidates, top));
                }
            }
            Ok((msgs, Note::Worker { g0: g0s }))
        })?;
        let worker_g0: Vec<Vec<Vec<Element>>> = notes
            .into_iter()
            .filter_map(|n| match n {
                Note::Worker { g0 } => Some(g0),
                _ => None,
            })
            .collect();
        if worker_g0.windows(2).any(|w| w[0] != w[1]) {
            diagnostics.g0_consistent = false;
        }

        let notes = cluster.run_round(|ctx, inbox| {
            if ctx.id != MachineId::Central {
                return Ok((Vec::new(), Note::Idle));
            }
            let mb = Mailbox::open(inbox)?;
            let anchor = anchor_value(ctx, &plan, &mb)?;
            let mut g0s = Vec::new();
            let mut solutions = Vec::new();
            let mut filter_sound = true;
            let mut filtered_units = 0;
            for (j, levels) in plan.levels(anchor, k)?.iter().enumerate() {
                let tau = levels[idx];
                let prev = rebuild(&ctx.oracle, k, mb.solutions.get(&j))?;
                let g0 = threshold_greedy(&ctx.oracle, &mb.sample, prev, tau)?;
                let received = mb.filtered.get(&j).cloned().unwrap_or_default();
                filtered_units += received.len();
                let pool = sorted_unique(received);
                for &e in &pool {
                    if !g0.contains(e) && audit.marginal_from(g0.elements(), g0.value(), e)? < tau {
                        filter_sound = false;
                    }
                }
                g0s.push(g0.elements().to_vec());
                solutions.push(threshold_greedy(&ctx.oracle, &pool, g0, tau)?);
            }
            let mut sparse_best = None;
            if let (true, Some(sp)) = (first, plan.sparse) {
                let pool = sorted_unique(mb.candidates.clone());
                let v = best_singleton(&ctx.oracle, &pool)?.map_or(0.0, |(_, v)| v);
                let grid = GuessGrid::half_threshold(v, sp.eps, k)
                    .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
                for tau in grid.thresholds() {
                    let empty = PartialSolution::empty(&ctx.oracle, k)?;
                    sparse_best = better(sparse_best, threshold_greedy(&ctx.oracle, &pool, empty, tau)?);
                }
            }
            let mut msgs = Vec::new();
            if !final_phase {
                for to in everyone(workers) {
                    for (j, g) in solutions.iter().enumerate() {
                        msgs.push(Message::new(to, Channel::Solution(j), g.elements().to_vec()));
                    }
                    if !mb.maxima.is_empty() {
                        msgs.push(Message::new(to, Channel::Maxima, mb.maxima.clone()));
                    }
                }
            } else if plan.select_round {
                for (j, g) in solutions.iter().enumerate() {
                    msgs.push(Message::new(
                        MachineId::Central,
                        Channel::Solution(j),
                        g.elements().to_vec(),
                    ));
                }
            }
            let note = CentralNote {
                g0: g0s,
                solutions,
                sparse_best,
                filter_sound,
                filtered_units,
                anchor,
            };
            Ok((msgs, Note::Central(Box::new(note))))
        })?;
        let central = notes
            .into_iter()
            .find_map(|n| match n {
                Note::Central(c) => Some(*c),
                _ => None,
            })
            .ok_or_else(|| SimError::Protocol("central machine produced no result".into()))?;
        if worker_g0.iter().any(|g| *g != central.g0) {
            diagnostics.g0_consistent = false;
        }
        diagnostics.filter_sound &= central.filter_sound;
        diagnostics.filtered_per_phase.push(central.filtered_units);
        if first {
            diagnostics.anchor = Some(central.anchor);
        }
        last = Some(central);
    }
    let last = last.ok_or_else(|| AlgorithmError::Invalid("t must be at least 1".into()))?;

    let threshold_best = last
        .solutions
        .iter()
        .cloned()
        .fold(None, better);
    diagnostics.threshold_value = threshold_best.as_ref().map(|g| g.value());
    diagnostics.sparse_value = last.sparse_best.as_ref().map(|g| g.value());

    let solution = if plan.select_round {
        let notes = cluster.run_round(|ctx, inbox| {
            if ctx.id != MachineId::Central {
                return Ok((Vec::new(), Note::Idle));
            }
            let mb = Mailbox::open(inbox)?;
            let mut best = None;
            for els in mb.solutions.values() {
                best = better(best, rebuild(&ctx.oracle, k, Some(els))?);
            }
            let best = match best {
                Some(b) => b,
                None => PartialSolution::empty(&ctx.oracle, k)?,
            };
            Ok((Vec::new(), Note::Selected(best)))
        })?;
        notes
            .into_iter()
            .find_map(|n| match n {
                Note::Selected(g) => Some(g),
                _ => None,
            })
            .ok_or_else(|| SimError::Protocol("selection round produced no result".into()))?
    } else {
        let mut best = threshold_best;
        if let Some(s) = last.sparse_best {
            best = better(best, s);
        }
        match best {
            Some(b) => b,
            None => PartialSolution::empty(oracle, k)?,
        }
    };

    Ok(RunOutput {
        solution,
        ledger: cluster.into_ledger(),
        config: cfg,
        diagnostics,
    })
}
