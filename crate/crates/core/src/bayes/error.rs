use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BayesError {
    #[error("domain of node `{node}` is invalid: {reason}")]
    InvalidDomain { node: String, reason: String },

    #[error("node `{0}` is declared more than once")]
    DuplicateNode(String),

    #[error("node `{node}` lists parent `{parent}` which does not exist")]
    UnknownParent { node: String, parent: String },

    #[error("node `{node}` has invalid parent `{parent}`: {reason}")]
    InvalidParent {
        node: String,
        parent: String,
        reason: String,
    },

    #[error("network contains a cycle: {}", .nodes.join(" -> "))]
    Cycle { nodes: Vec<String> },

    #[error("CPT of node `{node}` has wrong shape: {reason}")]
    CptShape { node: String, reason: String },

    #[error("CPT of node `{node}`, row {row}: entry {value} is not a probability")]
    InvalidProbability {
        node: String,
        row: String,
        value: f64,
    },

    #[error("CPT of node `{node}`, row {row}: entries sum to {}, expected 1", (.sum * 1e9).round() / 1e9)]
    Normalization { node: String, row: String, sum: f64 },

    #[error("assignment is missing node `{0}`")]
    IncompleteAssignment(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("label `{label}` is not in the domain of node `{node}`")]
    UnknownLabel { node: String, label: String },

    #[error("evidence has probability zero; posterior is undefined")]
    ZeroEvidence,

    #[error("enumeration over {size} joint states exceeds the cap of {cap}")]
    TooLarge { size: u128, cap: u128 },

    #[error("count table row {row} contains a negative or non-finite count")]
    NegativeCount { row: usize },
}
