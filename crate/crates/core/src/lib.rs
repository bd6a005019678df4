//! Tools for semantic code-clone and plagiarism detection on a small C subset.

pub mod baselines;
pub mod contrastive;
pub mod encode;
pub mod graph;
pub mod harness;
pub mod lang;
pub mod metrics;
pub mod toy;
pub mod transform;
