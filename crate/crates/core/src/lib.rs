//! Bias of collider adjustment in linear and dichotomized-treatment
//! structural models: closed forms, a covariance engine, a simulation
//! oracle and parameter sweeps.

pub mod bias;
pub mod error;
pub mod exec;
pub mod kernel;
mod linalg;
pub mod monte_carlo;
pub mod rng;
pub mod scenario;
pub mod sem;
pub mod sweep;

pub use bias::{closed_form_bias, closed_form_bias_with, BiasResult, BinaryFormula, Estimator, Method};
pub use error::{Error, Result};
pub use exec::Execution;
pub use scenario::{
    BinaryButterflyScenario, BinaryMScenario, ButterflyScenario, MScenario, Param, Scenario, Structure, WtoTScenario,
};
