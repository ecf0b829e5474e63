//! Exact scheduling of a single batch-processing machine with non-identical
//! job sizes, built around an arc-flow graph per distinct processing time.

pub mod graph;
pub mod instance;
pub mod report;
pub mod solver;
pub mod decode;
pub mod oracle;
pub mod bench;
pub mod milp;
