//! Dynamic Bayesian network over discrete time slots.
//!
//! A template is a single-slice [`Network`] in which each temporal node `X`
//! has an explicit root parent `X_prev` standing for its value in the
//! previous slot. Filtering samples a slice, then feeds the sampled value of
//! `X` forward as hard evidence on `X_prev` in the next slice.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bayes::{sample_posterior, Assignment, BayesError, Cpt, Network, Node};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DbnError {
    #[error(transparent)]
    Bayes(#[from] BayesError),

    #[error("temporal link refers to unknown node `{0}`")]
    UnknownNode(String),

    #[error("previous-state node `{prev}` must be a root node: {reason}")]
    InvalidPrevious { prev: String, reason: String },

    #[error("previous-state node `{prev}` has a different domain from `{node}`")]
    DomainMismatch { node: String, prev: String },

    #[error("no value given for previous-state node `{0}`")]
    MissingPrevious(String),

    #[error("evidence {node}={evidence} contradicts propagated state {node}={propagated}")]
    EvidenceConflict {
        node: String,
        evidence: String,
        propagated: String,
    },

    #[error("unroll horizon must be at least 1")]
    ZeroHorizon,
}

/// Pairs a temporal node with the root node carrying its previous-slot value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalLink {
    pub node: String,
    pub prev: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbnTemplate {
    base: Network,
    links: Vec<TemporalLink>,
    initial_state: Assignment,
}

/// The sampled content of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceState {
    pub slot: u32,
    pub sampled: Assignment,
}

impl DbnTemplate {
    pub fn new(base: Network, links: Vec<TemporalLink>, initial_state: Assignment) -> Result<Self, DbnError> {
        let mut seen_prev = Vec::new();
        for link in &links {
            let node = base
                .node(&link.node)
                .ok_or_else(|| DbnError::UnknownNode(link.node.clone()))?;
            let prev = base
                .node(&link.prev)
                .ok_or_else(|| DbnError::UnknownNode(link.prev.clone()))?;
            if !prev.parents.is_empty() {
                return Err(DbnError::InvalidPrevious {
                    prev: link.prev.clone(),
                    reason: format!("it has parents {:?}", prev.parents),
                });
            }
            if link.prev == link.node || seen_prev.contains(&link.prev) {
                return Err(DbnError::InvalidPrevious {
                    prev: link.prev.clone(),
                    reason: "it is already used by another link".into(),
                });
            }
            if prev.domain != node.domain {
                return Err(DbnError::DomainMismatch {
                    node: link.node.clone(),
                    prev: link.prev.clone(),
                });
            }
            let label = initial_state
                .get(&link.prev)
                .ok_or_else(|| DbnError::MissingPrevious(link.prev.clone()))?;
            if prev.domain.index_of(label).is_none() {
                return Err(BayesError::UnknownLabel {
                    node: link.prev.clone(),
                    label: label.to_string(),
                }
                .into());
            }
            seen_prev.push(link.prev.clone());
        }
        // Only previous-state nodes may appear in the initial state.
        if let Some((name, _)) = initial_state.iter().find(|(n, _)| !seen_prev.iter().any(|p| p == n)) {
            return Err(DbnError::InvalidPrevious {
                prev: name.to_string(),
                reason: "initial state names a node that is not a previous-state parent".into(),
            });
        }
        Ok(Self {
            base,
            links,
            initial_state,
        })
    }

    pub fn base(&self) -> &Network {
        &self.base
    }

    pub fn links(&self) -> &[TemporalLink] {
        &self.links
    }

    pub fn initial_state(&self) -> &Assignment {
        &self.initial_state
    }

    pub fn is_previous_state(&self, name: &str) -> bool {
        self.links.iter().any(|l| l.prev == name)
    }

    /// Sample one slice given the propagated previous state and this slot's evidence.
    pub fn step<R: Rng + ?Sized>(
        &self,
        slot: u32,
        prev: &Assignment,
        evidence: &Assignment,
        rng: &mut R,
    ) -> Result<SliceState, DbnError> {
        let mut combined = evidence.clone();
        for link in &self.links {
            let value = prev
                .get(&link.prev)
                .ok_or_else(|| DbnError::MissingPrevious(link.prev.clone()))?;
            if let Some(given) = evidence.get(&link.prev) {
                if given != value {
                    return Err(DbnError::EvidenceConflict {
                        node: link.prev.clone(),
                        evidence: given.to_string(),
                        propagated: value.to_string(),
                    });
                }
            }
            combined.insert(link.prev.clone(), value);
        }
        let sampled = sample_posterior(&self.base, &combined, rng)?;
        Ok(SliceState { slot, sampled })
    }

    /// Project a sampled slice onto the previous-state nodes of the next slice.
    pub fn extract_next_prev(&self, state: &SliceState) -> Assignment {
        self.links
            .iter()
            .filter_map(|l| state.sampled.get(&l.node).map(|v| (l.prev.clone(), v.to_string())))
            .collect()
    }

    /// Expand the template into a static network over `horizon` slots.
    ///
    /// Slot `t` (1-based) copies every non-previous-state node as `name@t`.
    /// In slot 1 each previous-state node is kept as `prev@1` with a point
    /// prior on its initial value; in later slots its edges are rewired to
    /// `node@(t-1)`.
    pub fn unroll(&self, horizon: u32) -> Result<Network, DbnError> {
        if horizon == 0 {
            return Err(DbnError::ZeroHorizon);
        }
        let prev_to_node = |p: &str| self.links.iter().find(|l| l.prev == p).map(|l| l.node.as_str());
        let mut nodes = Vec::new();

        for link in &self.links {
            let domain = self.base.node(&link.prev).map(|n| n.domain.clone()).unwrap_or_else(|| unreachable!());
            let mut prior = vec![0.0; domain.len()];
            let initial = self.initial_state.get(&link.prev).and_then(|l| domain.index_of(l)).unwrap_or_default();
            prior[initial] = 1.0;
            nodes.push(Node::new(slot_name(&link.prev, 1), domain, Vec::<String>::new(), Cpt::prior(prior)));
        }

        for t in 1..=horizon {
            for node in self.base.nodes() {
                if self.is_previous_state(&node.name) {
                    continue;
                }
                let parents: Vec<String> = node
                    .parents
                    .iter()
                    .map(|p| match prev_to_node(p) {
                        Some(temporal) if t > 1 => slot_name(temporal, t - 1),
                        _ => slot_name(p, t),
                    })
                    .collect();
                nodes.push(Node::new(slot_name(&node.name, t), node.domain.clone(), parents, node.cpt.clone()));
            }
        }
        Ok(Network::build(nodes)?)
    }
}

/// Name of a node's copy in unrolled slot `t`.
pub fn slot_name(name: &str, t: u32) -> String {
    format!("{name}@{t}")
}
