pub mod arch;
pub mod cli;
pub mod error;
pub mod graph;
pub mod ising;
pub mod netsim;
pub mod qec;
pub mod rates;
pub mod sched;
pub mod solver;
pub mod units;

pub use error::{Error, Result};
