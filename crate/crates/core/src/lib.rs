//! Latency-aware routing of split DNN inference jobs over a multi-hop
//! network of heterogeneous compute nodes.

pub mod error;
pub mod experiment;
pub mod formulations;
pub mod policies;
pub mod sim;
pub mod topology;
pub mod verify;
pub mod workload;

pub use error::{Error, Result};
