//! Search-based unit-test generation for a dynamically typed language,
//! guided by parameter types inferred from runtime usage traces.

pub mod analysis;
pub mod driver;
pub mod executor;
pub mod export;
pub mod host;
pub mod inference;
pub mod metrics;
pub mod instrument;
pub mod search;
pub mod trace;
pub mod types;
