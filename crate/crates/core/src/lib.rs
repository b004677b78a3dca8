//! Minimal-cost repair of relations under constant edit rules and a
//! partial key constraint.

pub mod cli;
pub mod cost;
pub mod covers;
pub mod dsl;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod lcf;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod rules;
pub mod schema;
pub mod selection;
pub mod sufficient;
pub mod synth;

pub use error::{Error, Result};
