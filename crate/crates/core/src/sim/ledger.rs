use serde::Serialize;

use super::MachineId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundKind {
    /// Input placement by PartitionAndSample; not a synchronous round.
    Distribution,
    /// A compute-then-communicate round ending at a barrier.
    Compute,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MachineStats {
    /// Element units held in the inbox (compute rounds) or delivered (distribution).
    pub received: usize,
    pub sent: usize,
    pub oracle_calls: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub kind: RoundKind,
    /// 1-based compute-round number; distribution steps carry the number of
    /// the compute round they feed.
    pub round: usize,
    /// Workers `0..m`, then the central machine at index `m`.
    pub machines: Vec<MachineStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetViolation {
    pub round: usize,
    pub machine: MachineId,
    pub received: usize,
    pub budget: usize,
}

/// Per-round, per-machine traffic and oracle accounting for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundLedger {
    workers: usize,
    records: Vec<RoundRecord>,
    violations: Vec<BudgetViolation>,
}

impl RoundLedger {
    pub(crate) fn new(workers: usize) -> Self {
        RoundLedger {
            workers,
            records: Vec::new(),
            violations: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, record: RoundRecord) {
        self.records.push(record);
    }

    pub(crate) fn violation(&mut self, v: BudgetViolation) {
        self.violations.push(v);
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn violations(&self) -> &[BudgetViolation] {
        &self.violations
    }

    /// Number of synchronous compute rounds.
    pub fn rounds(&self) -> usize {
        self.count(RoundKind::Compute)
    }

    pub fn distribution_steps(&self) -> usize {
        self.count(RoundKind::Distribution)
    }

    /// Round count with each distribution step charged as a round of its own.
    pub fn rounds_with_distribution(&self) -> usize {
        self.records.len()
    }

    fn count(&self, kind: RoundKind) -> usize {
        self.records.iter().filter(|r| r.kind == kind).count()
    }

    /// Compute round `round` (1-based), if it ran.
    pub fn compute_round(&self, round: usize) -> Option<&RoundRecord> {
        self.records
            .iter()
            .find(|r| r.kind == RoundKind::Compute && r.round == round)
    }

    /// Units held by the central machine at the start of compute round `round`.
    pub fn central_received(&self, round: usize) -> Option<usize> {
        self.compute_round(round)
            .map(|r| r.machines[self.workers].received)
    }

    /// Largest central inbox over all compute rounds.
    pub fn max_central_load(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.kind == RoundKind::Compute)
            .map(|r| r.machines[self.workers].received)
            .max()
            .unwrap_or(0)
    }

    /// Largest worker inbox over all compute rounds.
    pub fn max_worker_load(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.kind == RoundKind::Compute)
            .flat_map(|r| r.machines[..self.workers].iter().map(|s| s.received))
            .max()
            .unwrap_or(0)
    }

    pub fn total_oracle_calls(&self) -> u64 {
        self.records
            .iter()
            .flat_map(|r| r.machines.iter().map(|s| s.oracle_calls))
            .sum()
    }
}
