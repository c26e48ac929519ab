//! Threshold-based monotone submodular maximization under a cardinality
//! constraint, run on a deterministic simulated MapReduce cluster.

pub mod adversarial;
pub mod algorithms;
pub mod harness;
pub mod instance;
pub mod kernels;
pub mod oracle;
pub mod rng;
pub mod sim;
