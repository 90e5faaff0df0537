//! Occupant behaviour as a dynamic Bayesian network, co-simulated with a
//! single-zone CO2 mass balance driven by buoyancy airflow through the
//! office door and window.
//!
//! The crate is layered bottom-up:
//!
//! * [`bayes`] - discrete networks, variable elimination, exact posterior sampling
//! * [`dbn`] - slice-by-slice filtering with hard state propagation
//! * [`physics`] - stack-effect airflow, CO2 step, CO2 level discretization
//! * [`cosim`] - the per-slot orchestration loop and Monte Carlo ensembles
//! * [`scenario`] - JSON scenario files, CSV/JSON outputs, the office example
//! * [`cli`] - command implementations behind the `occusim` binary

pub mod bayes;
pub mod cli;
pub mod cosim;
pub mod dbn;
pub mod physics;
pub mod scenario;

pub use bayes::{Assignment, BayesError, Distribution, Network};
pub use cosim::{monte_carlo, simulate_day, Aggregate, RunTrace};
pub use scenario::{load_scenario, Scenario, ScenarioError};
