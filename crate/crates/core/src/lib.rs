//! Controller placement for SDN-enabled satellite-terrestrial networks.
//!
//! The crate chooses where to run SDN controllers on a terrestrial graph so
//! that controllers sit close to satellite gateways while the control paths
//! to every switch stay reliable. The pipeline is:
//!
//! 1. [`topology`]: load a Topology Zoo graph and sample component failure
//!    probabilities.
//! 2. [`reliability`]: shortest paths, Yen's K shortest paths, control-path
//!    error rates and gateway distances.
//! 3. [`objective`]: the latency + error-rate objective and its submodular
//!    complement.
//! 4. [`solvers`]: an exact branch-and-bound search and the randomized double
//!    greedy.
//! 5. [`montecarlo`] and [`experiments`]: stochastic validation and the
//!    repeated-trial harness.

pub mod error;
pub mod experiments;
pub mod format;
pub mod montecarlo;
pub mod objective;
pub mod reliability;
pub mod seed;
pub mod solvers;
pub mod topology;

pub use error::{Error, Result};
pub use objective::{Instance, Placement};
pub use reliability::{ErrorMatrix, NodeCounting, PathMode, PathRecord, ReliabilityOptions};
pub use solvers::{SolveResult, SolverKind};
pub use topology::{FailureAssignment, FailureCase, NodeId, Topology};
