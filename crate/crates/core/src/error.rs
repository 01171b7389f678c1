use std::fmt;

use thiserror::Error;

/// A single violated invariant found by [`crate::model::validate_problem`].
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    NoTasks,
    EmptyClasses,
    EmptyClass { class: usize },
    PiLength { class: usize, expected: usize, found: usize },
    BadProbability { task: usize, class: usize, value: f64 },
    LoadCount { expected: usize, found: usize },
    NonPositiveLoad { worker: usize },
    NonPositiveBudget,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::NoTasks => write!(f, "task count must be at least 1"),
            ValidationIssue::EmptyClasses => write!(f, "at least one worker class is required"),
            ValidationIssue::EmptyClass { class } => write!(f, "class {class} has no workers"),
            ValidationIssue::PiLength { class, expected, found } => write!(
                f,
                "class {class} has {found} error probabilities, expected one per task ({expected})"
            ),
            ValidationIssue::BadProbability { task, class, value } => write!(
                f,
                "error probability {value} of class {class} on task {task} is outside (0, 1)"
            ),
            ValidationIssue::LoadCount { expected, found } => {
                write!(f, "{found} worker loads given for {expected} workers")
            }
            ValidationIssue::NonPositiveLoad { worker } => {
                write!(f, "worker {worker} has a load limit of zero")
            }
            ValidationIssue::NonPositiveBudget => write!(f, "budget must be at least 1"),
        }
    }
}

fn join_issues(issues: &[ValidationIssue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem: {}", join_issues(.0))]
    InvalidProblem(Vec<ValidationIssue>),

    #[error("probability {0} is outside [0, 1]")]
    ProbabilityDomain(f64),

    #[error("class error probability {0} is outside (0, 1)")]
    ClassProbabilityDomain(f64),

    #[error("invalid worker model: {0}")]
    InvalidModel(String),

    #[error("degree vector has {points} count combinations, the limit is {limit}")]
    LatticeTooLarge { points: u128, limit: u128 },

    #[error("brute-force enumeration over {size} items exceeds the limit of {limit}")]
    EnumerationTooLarge { size: usize, limit: usize },

    #[error("mismatched dimensions: {0}")]
    Dimension(String),

    #[error("degree matrix violates the allocation constraints: {0}")]
    InfeasibleDegrees(String),

    #[error("no regular bipartite graph exists: {0}")]
    InfeasibleRegularGraph(String),

    #[error("cannot realize {needed} class-{class} workers for task {task}: only {available} have spare load")]
    RealizationFailed { task: usize, class: usize, needed: u32, available: usize },

    #[error("answer matrix has no nonzero entries")]
    ZeroMatrix,

    #[error("power iteration did not converge within {iterations} iterations (after restart)")]
    NonConvergence { iterations: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
