//! Reputation-aware task allocation and answer aggregation for binary
//! crowdsourcing tasks.
//!
//! Workers are grouped in classes whose average error probabilities are
//! known to the requester. [`allocation`] builds assignments by greedy
//! maximization of an [`objectives`] criterion (or uniformly at random),
//! [`decision`] turns the collected answers into task decisions, and
//! [`simulate`] estimates error probabilities by Monte Carlo.

pub mod allocation;
pub mod commands;
pub mod config;
pub mod decision;
pub mod error;
pub mod model;
pub mod objectives;
pub mod oracle;
pub mod rng;
pub mod simulate;
pub mod verify;

pub use error::{Error, Result, ValidationIssue};
