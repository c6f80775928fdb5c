//! Iterative approximate crash-tolerant consensus on directed graphs with
//! bounded-hop relaying: topology conditions, the averaging protocols, a
//! deterministic asynchronous simulator, and convergence metrics.

pub mod conditions;
pub mod graph;
pub mod metrics;
pub mod nodeset;
pub mod protocols;
pub mod scalar;
pub mod sim;
pub mod verify;

pub use nodeset::{NodeId, NodeSet};
pub use num_rational::BigRational;
pub use scalar::Scalar;
