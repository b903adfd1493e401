//! Experiment harness, file formats and CLI plumbing for the Little-Zoo
//! curriculum laboratory.
//!
//! The `littlezoo` crate holds the algorithms; this crate adds everything
//! that touches the outside world: goal-space files (JSON lines),
//! parameter-snapshot and estimator checkpoints (binary containers),
//! run directories with CSV metrics, the experiment protocols
//! (curriculum training, estimator benchmarking, generalization reports,
//! goal-space-swap adaptation tests) and the `zoolab` command-line tool.

pub mod config;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod plotdata;
pub mod snapshot_file;
pub mod space_file;

pub use error::LabError;
