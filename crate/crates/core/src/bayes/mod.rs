//! Discrete Bayesian networks: construction, exact inference, posterior
//! sampling and count-based CPT fitting.

mod error;
mod factor;
mod fit;
mod inference;
mod network;
mod sample;

pub use error::BayesError;
pub use fit::fit_cpt_from_counts;
pub use inference::{
    brute_force_marginal, brute_force_marginal_capped, exact_marginal, joint_probability,
    DEFAULT_ENUMERATION_CAP,
};
pub use network::{
    build_network, Assignment, Cpt, Distribution, Network, Node, ValueDomain, ROW_SUM_TOLERANCE,
};
pub use sample::{sample_posterior, PosteriorSampler};
