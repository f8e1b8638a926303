//! Task inference over finite implementable languages: statements,
//! extensions, weakness, the weakness prior, weakest-vs-MDL model
//! search, and the binary-arithmetic generalisation experiments.

pub mod error;
pub mod harness;
pub mod lang;
pub mod prior;
pub mod search;
pub mod task;
pub mod taskgen;

pub use error::{Error, Result};
