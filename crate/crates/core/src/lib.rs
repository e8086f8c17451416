//! Room-structured recognition of daily-living activities.
//!
//! * [`hmm`]: discrete HMMs (forward likelihood, Viterbi, forward-backward,
//!   sampling) and the room → activity hierarchical composition.
//! * [`grammar`]: the home → room → activity → object hierarchy, scenarios
//!   and dwell-time accounting.
//! * [`anomaly`]: the Possible Delay Time rule and alerting.
//! * [`simulator`]: seeded noisy day simulation.
//! * [`evaluation`]: error series, reports and CSV artifacts.
//! * [`reproduce`]: the end-to-end 7:00-12:00 bundle.
//!
//! The inference core is generic over [`Scalar`] (`f32`, `f64`); the aliases
//! below fix it to `f64`, which the simulator and evaluation use.

use std::fmt;
use std::path::{Path, PathBuf};

pub mod anomaly;
pub mod evaluation;
pub mod fixtures;
pub mod grammar;
pub mod hmm;
pub mod reproduce;
pub mod scalar;
pub mod simulator;

pub use scalar::Scalar;

pub type Hmm = hmm::HmmModel<f64>;
pub type Hmm32 = hmm::HmmModel<f32>;
pub type Path64 = hmm::StatePath<f64>;
pub type HierarchicalHmm = hmm::HierarchicalModel<f64>;

/// Outcome of a report-style check: empty means valid.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport<V> {
    pub violations: Vec<V>,
}

impl<V> ValidationReport<V> {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<V: fmt::Display> ValidationReport<V> {
    pub fn lines(&self) -> Vec<String> {
        self.violations.iter().map(ToString::to_string).collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Model(#[from] hmm::ModelError),
    #[error(transparent)]
    Inference(#[from] hmm::InferenceError),
    #[error(transparent)]
    HierarchyModel(#[from] hmm::HierarchyModelError),
    #[error(transparent)]
    Grammar(#[from] grammar::GrammarError),
    #[error(transparent)]
    Anomaly(#[from] anomaly::AnomalyError),
    #[error(transparent)]
    Simulation(#[from] simulator::SimulationError),
    #[error(transparent)]
    Evaluation(#[from] evaluation::EvaluationError),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_owned(), source }
    }
}
