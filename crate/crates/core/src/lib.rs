//! Information-theoretic safe exploration with Gaussian-process constraint
//! models.
//!
//! The explorer only evaluates parameters whose lower confidence bound on an
//! unknown constraint `f` clears zero, and among those picks the one whose
//! observation is most informative about the safety of some other parameter.

pub mod acquisition;
pub mod baselines;
pub mod domain;
pub mod environments;
pub mod error;
pub mod gp;
pub mod harness;
pub mod safety;
pub mod subspace;

pub use domain::BoxDomain;
pub use error::{Error, Result};
pub use gp::{GpState, NoiseModel, RbfKernel};
pub use safety::SafetyModel;
