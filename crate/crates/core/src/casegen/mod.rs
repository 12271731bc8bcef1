//! Workload generators: swap and auction protocol logs, random computations, and the
//! spec library.

pub mod auction;
mod chain;
pub mod random;
pub mod specs;
pub mod three_party;
pub mod two_party;

pub use chain::VectorError;
