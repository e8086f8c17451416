//! Discrete hidden Markov models, exact inference, and the two-level
//! room/activity composition.

mod hierarchical;
mod inference;
mod model;

pub use hierarchical::{ActivitySegment, HierarchicalModel, HierarchicalPath, HierarchyModelError};
pub use inference::{Decoder, InferenceError, StatePath};
pub use model::{HmmModel, ModelError, ModelFile, ModelViolation, Param, StochasticMatrix, StochasticVector};
