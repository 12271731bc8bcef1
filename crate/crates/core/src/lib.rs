//! Runtime verification of metric temporal logic over partially synchronous
//! distributed computations.

pub mod casegen;
pub mod computation;
pub mod mtl;
pub mod oracle;
pub mod pipeline;
pub mod progression;
pub mod smt;
