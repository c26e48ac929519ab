//! A deterministic, simulated MapReduce cluster: `m` workers plus one central
//! machine, synchronous rounds, and element-unit memory accounting.
//!
//! Machine programs in a round may run in parallel on the rayon pool of the
//! caller. Each program sees only its own inbox; outboxes are merged in
//! machine-id order at the barrier, so results never depend on scheduling.

mod ledger;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{Element, MachineOracle, Oracle, OracleError};
use crate::rng::SeedStreams;

pub use ledger::{BudgetViolation, MachineStats, RoundKind, RoundLedger, RoundRecord};

/// Default multiplier for both memory budgets.
pub const DEFAULT_BUDGET_FACTOR: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("message addressed to unknown machine {0}")]
    UnknownMachine(MachineId),
    #[error("round {round}: {machine} received {received} elements, budget {budget}")]
    BudgetExceeded {
        round: usize,
        machine: MachineId,
        received: usize,
        budget: usize,
    },
    #[error("invalid cluster configuration: {0}")]
    InvalidConfig(String),
    #[error("protocol error: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Enforcement {
    Off,
    #[default]
    Warn,
    Fail,
}

impl FromStr for Enforcement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(Enforcement::Off),
            "warn" => Ok(Enforcement::Warn),
            "fail" => Ok(Enforcement::Fail),
            other => Err(format!("unknown enforcement mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MachineId {
    Worker(usize),
    Central,
}

impl fmt::Display for MachineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MachineId::Worker(i) => write!(f, "worker {i}"),
            MachineId::Central => write!(f, "central"),
        }
    }
}

/// Unclamped sampling rate `4 sqrt(k/n)`.
pub fn nominal_sample_prob(n: usize, k: usize) -> f64 {
    4.0 * (k as f64 / n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterConfig {
    pub n: usize,
    pub k: usize,
    pub machines: usize,
    pub sample_prob: f64,
    pub memory_budget_regular: usize,
    pub memory_budget_central: usize,
    pub seed: u64,
    pub enforcement: Enforcement,
}

impl ClusterConfig {
    /// Defaults: `m = ceil(sqrt(n/k))`, `p = min(1, 4 sqrt(k/n))`, budgets
    /// `8 ceil(sqrt(nk))` and `8 ceil(sqrt(nk) log2(k+1))`.
    pub fn new(n: usize, k: usize, seed: u64) -> Result<Self, SimError> {
        if n == 0 || k == 0 {
            return Err(SimError::InvalidConfig(format!(
                "n and k must be positive (n = {n}, k = {k})"
            )));
        }
        let machines = (n as f64 / k as f64).sqrt().ceil().max(1.0) as usize;
        let sample_prob = nominal_sample_prob(n, k).min(1.0);
        let mut cfg = ClusterConfig {
            n,
            k,
            machines,
            sample_prob,
            memory_budget_regular: 0,
            memory_budget_central: 0,
            seed,
            enforcement: Enforcement::default(),
        };
        cfg.set_budget_factors(DEFAULT_BUDGET_FACTOR, DEFAULT_BUDGET_FACTOR);
        Ok(cfg)
    }

    pub fn set_budget_factors(&mut self, regular: usize, central: usize) {
        let nk = (self.n as f64 * self.k as f64).sqrt();
        self.memory_budget_regular = regular * nk.ceil() as usize;
        self.memory_budget_central = central * (nk * (self.k as f64 + 1.0).log2()).ceil() as usize;
    }

    pub fn with_machines(mut self, m: usize) -> Self {
        self.machines = m;
        self
    }

    pub fn with_sample_prob(mut self, p: f64) -> Self {
        self.sample_prob = p;
        self
    }

    pub fn with_enforcement(mut self, e: Enforcement) -> Self {
        self.enforcement = e;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n == 0 || self.k == 0 {
            return Err(SimError::InvalidConfig("n and k must be positive".into()));
        }
        if self.machines == 0 {
            return Err(SimError::InvalidConfig("need at least one worker".into()));
        }
        if !(self.sample_prob > 0.0 && self.sample_prob <= 1.0) {
            return Err(SimError::InvalidConfig(format!(
                "sample probability {} not in (0, 1]",
                self.sample_prob
            )));
        }
        Ok(())
    }

    fn budget(&self, machine: MachineId) -> usize {
        match machine {
            MachineId::Worker(_) => self.memory_budget_regular,
            MachineId::Central => self.memory_budget_central,
        }
    }
}

/// What a packet carries; `usize` tags name one of several parallel
/// sub-programs (threshold guesses).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Channel {
    Sample,
    Shard,
    Filtered(usize),
    Solution(usize),
    Candidates,
    Maxima,
    Custom(usize),
}

/// A list of element ids on a channel; memory cost is one unit per element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Packet {
    pub channel: Channel,
    pub elements: Vec<Element>,
}

impl Packet {
    pub fn new(channel: Channel, elements: Vec<Element>) -> Self {
        Packet { channel, elements }
    }

    pub fn units(&self) -> usize {
        self.elements.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Source {
    Input,
    Machine(MachineId),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub from: Source,
    pub packet: Packet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub to: MachineId,
    pub packet: Packet,
}

impl Message {
    pub fn new(to: MachineId, channel: Channel, elements: Vec<Element>) -> Self {
        Message {
            to,
            packet: Packet::new(channel, elements),
        }
    }
}

/// Everything a machine program may touch during one round.
pub struct MachineCtx<'a> {
    pub id: MachineId,
    pub round: usize,
    pub oracle: MachineOracle<'a>,
}

/// Output of [`Cluster::partition_and_sample`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    /// Ascending ids drawn independently with probability `p`.
    pub sample: Vec<Element>,
    /// `parts[i]` goes to worker `i`; ascending ids; disjoint, covering `0..n`.
    pub parts: Vec<Vec<Element>>,
}

/// Draws the sample and the partition for one phase from the seed's named
/// streams. Pure: no delivery, no ledger.
pub fn draw_partition(cfg: &ClusterConfig, phase: u64) -> Partition {
    let streams = SeedStreams::new(cfg.seed);
    let mut sample_rng = streams.stream("sample", phase);
    let mut part_rng = streams.stream("partition", phase);
    let mut sample = Vec::new();
    let mut parts = vec![Vec::new(); cfg.machines];
    for e in 0..cfg.n {
        if cfg.sample_prob >= 1.0 || sample_rng.random::<f64>() < cfg.sample_prob {
            sample.push(e);
        }
        parts[part_rng.random_range(0..cfg.machines)].push(e);
    }
    Partition { sample, parts }
}

/// Outgoing messages, program result and local oracle calls of one machine.
type MachineOutput<R> = (Vec<Message>, R, u64);

pub struct Cluster<'o> {
    cfg: ClusterConfig,
    oracle: &'o Oracle,
    inboxes: Vec<Vec<Envelope>>,
    ledger: RoundLedger,
    parallel: bool,
}

impl<'o> Cluster<'o> {
    pub fn new(cfg: ClusterConfig, oracle: &'o Oracle) -> Result<Self, SimError> {
        cfg.validate()?;
        let m = cfg.machines;
        Ok(Cluster {
            cfg,
            oracle,
            inboxes: vec![Vec::new(); m + 1],
            ledger: RoundLedger::new(m),
            parallel: true,
        })
    }

    /// Run machine programs one after another instead of on the rayon pool.
    pub fn serial(mut self) -> Self {
        self.parallel = false;
        self
    }

    pub fn config(&self) -> &ClusterConfig {
        &self.cfg
    }

    pub fn workers(&self) -> usize {
        self.cfg.machines
    }

    pub fn ledger(&self) -> &RoundLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> RoundLedger {
        self.ledger
    }

    pub fn rounds(&self) -> usize {
        self.ledger.rounds()
    }

    fn slot(&self, id: MachineId) -> Result<usize, SimError> {
        match id {
            MachineId::Worker(i) if i < self.cfg.machines => Ok(i),
            MachineId::Worker(_) => Err(SimError::UnknownMachine(id)),
            MachineId::Central => Ok(self.cfg.machines),
        }
    }

    fn id_of(&self, slot: usize) -> MachineId {
        if slot == self.cfg.machines {
            MachineId::Central
        } else {
            MachineId::Worker(slot)
        }
    }

    /// Places input directly into inboxes for the next compute round.
    pub fn distribute(&mut self, deliveries: Vec<(MachineId, Packet)>) -> Result<(), SimError> {
        let mut stats = vec![MachineStats::default(); self.cfg.machines + 1];
        for (to, packet) in deliveries {
            let slot = self.slot(to)?;
            stats[slot].received += packet.units();
            self.inboxes[slot].push(Envelope {
                from: Source::Input,
                packet,
            });
        }
        self.ledger.push(RoundRecord {
            kind: RoundKind::Distribution,
            round: self.ledger.rounds() + 1,
            machines: stats,
        });
        Ok(())
    }

    /// PartitionAndSample: draws `S` and `V_1..V_m` for `phase`, sends `V_i`
    /// to worker `i` and, if `with_sample`, `S` to every worker and to C.
    pub fn partition_and_sample(
        &mut self,
        phase: u64,
        with_sample: bool,
    ) -> Result<Partition, SimError> {
        let partition = draw_partition(&self.cfg, phase);
        let mut deliveries = Vec::with_capacity(2 * self.cfg.machines + 1);
        for (i, part) in partition.parts.iter().enumerate() {
            if with_sample {
                deliveries.push((
                    MachineId::Worker(i),
                    Packet::new(Channel::Sample, partition.sample.clone()),
                ));
            }
            deliveries.push((MachineId::Worker(i), Packet::new(Channel::Shard, part.clone())));
        }
        if with_sample {
            deliveries.push((
                MachineId::Central,
                Packet::new(Channel::Sample, partition.sample.clone()),
            ));
        }
        self.distribute(deliveries)?;
        Ok(partition)
    }

    /// Executes one synchronous round.
    ///
    /// Every machine (workers, then C) runs `program` on its inbox; the
    /// returned messages are delivered at the barrier. Per-machine results
    /// come back in machine order: workers `0..m`, then C.
    pub fn run_round<R, F>(&mut self, program: F) -> Result<Vec<R>, SimError>
    where
        R: Send,
        F: Fn(&MachineCtx<'_>, Vec<Envelope>) -> Result<(Vec<Message>, R), SimError> + Sync,
    {
        let round = self.ledger.rounds() + 1;
        let slots = self.cfg.machines + 1;
        let mut stats = vec![MachineStats::default(); slots];

        for (slot, stat) in stats.iter_mut().enumerate() {
            let received: usize = self.inboxes[slot].iter().map(|e| e.packet.units()).sum();
            stat.received = received;
            let machine = self.id_of(slot);
            let budget = self.cfg.budget(machine);
            if received > budget {
                let violation = BudgetViolation {
                    round,
                    machine,
                    received,
                    budget,
                };
                match self.cfg.enforcement {
                    Enforcement::Off => {}
                    Enforcement::Warn => {
                        log::warn!("round {round}: {machine} holds {received} > budget {budget}");
                        self.ledger.violation(violation);
                    }
                    Enforcement::Fail => {
                        self.ledger.violation(violation);
                        return Err(SimError::BudgetExceeded {
                            round,
                            machine,
                            received,
                            budget,
                        });
                    }
                }
            }
        }

        let inboxes: Vec<(MachineId, Vec<Envelope>)> = std::mem::take(&mut self.inboxes)
            .into_iter()
            .enumerate()
            .map(|(slot, inbox)| (self.id_of(slot), inbox))
            .collect();
        let oracle = self.oracle;
        let execute = |(id, inbox): (MachineId, Vec<Envelope>)| {
            let ctx = MachineCtx {
                id,
                round,
                oracle: oracle.on_machine(),
            };
            let out = program(&ctx, inbox);
            out.map(|(msgs, r)| (msgs, r, ctx.oracle.local_calls()))
        };
        let outputs: Vec<Result<MachineOutput<R>, SimError>> = if self.parallel {
            inboxes.into_par_iter().map(execute).collect()
        } else {
            inboxes.into_iter().map(execute).collect()
        };

        let mut next: Vec<Vec<Envelope>> = vec![Vec::new(); slots];
        let mut results = Vec::with_capacity(slots);
        for (slot, out) in outputs.into_iter().enumerate() {
            let (messages, result, calls) = out?;
            let from = self.id_of(slot);
            stats[slot].oracle_calls = calls;
            for msg in messages {
                let dest = self.slot(msg.to)?;
                stats[slot].sent += msg.packet.units();
                next[dest].push(Envelope {
                    from: Source::Machine(from),
                    packet: msg.packet,
                });
            }
            results.push(result);
        }
        self.inboxes = next;
        self.ledger.push(RoundRecord {
            kind: RoundKind::Compute,
            round,
            machines: stats,
        });
        Ok(results)
    }

    /// Inbox currently waiting for `machine` (delivered at the last barrier).
    pub fn pending(&self, machine: MachineId) -> Result<&[Envelope], SimError> {
        Ok(&self.inboxes[self.slot(machine)?])
    }
}
