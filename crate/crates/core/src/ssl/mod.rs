//! Graph-based semi-supervised label inference over a KNN affinity graph.
//!
//! Labeled rows come first in the joint point set, unlabeled rows after them.
//! Both algorithms are binary and read out labels by argmax with ties going
//! to class 0.

mod graph;
mod propagation;

pub use graph::AffinityGraph;
pub use propagation::{label_propagation, label_spreading, PropagationConfig, PropagationOutput};
