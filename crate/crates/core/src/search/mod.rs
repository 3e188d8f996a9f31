//! Many-objective genetic search for branch coverage.

pub mod emit;
pub mod mosa;
pub mod mutate;
pub mod synth;
pub mod testcase;
