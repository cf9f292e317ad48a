//! Variable selection for linear regression by comparison with random
//! Gaussian covariates.
//!
//! A candidate covariate is scored by the exact probability that the best
//! (or the ν-th best) of a set of i.i.d. standard normal covariates would
//! reduce the residual sum of squares at least as much. The crate provides
//!
//! * [`special`]: the regularized incomplete beta function and the tail
//!   transforms all P-values are built from,
//! * [`regression`]: an incremental least-squares engine that residualizes
//!   every candidate column against the active set,
//! * [`stepwise`]: forward selection, repeated selection into disjoint
//!   linear approximations, misclassification counts and averaged fits,
//! * [`post_selection`]: P-values for covariate sets chosen by other methods,
//! * [`interactions`]: interaction (monomial) expansion of a design matrix,
//! * [`graph`]: dependency graphs by neighborhood selection,
//! * [`simulation`]: seeded Monte-Carlo harnesses,
//! * [`table`]: delimited numeric text ingestion and report formatting.
//!
//! Column indices are 0-based throughout the library; the text formats and
//! the command-line interface use 1-based indices.

// Negated comparisons also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod graph;
pub mod interactions;
pub mod post_selection;
pub mod regression;
pub mod simulation;
pub mod special;
pub mod stepwise;
pub mod table;

pub use data::{ColMatrix, Dataset};
pub use error::{Error, Result};
pub use graph::{neighborhood_graph, Edge, EdgeList, EdgeRule, GraphConfig};
pub use interactions::{gen_interactions, interaction_count, MonomialTable};
pub use post_selection::{
    pval_subsets, pval_subsets_augmented, Companion, PostSelectionConfig, PostSelectionResult,
};
pub use regression::{init_state, single_covariate_pvalues, Candidate, ResidualState};
pub use simulation::{
    bidiagonal_graph_sim, simulate_false_positives, tutorial_sim, FpTable, GraphSimResult,
    SimConfig, TutorialResult, TutorialVariant,
};
pub use special::BetaParams;
pub use stepwise::{
    averaged_fit, misclassification_count, repeated_stepwise, step_pvalue, stepwise,
    PvalueConfig, RepeatLimits, SelectionGroup, SelectionGroupList, SelectionPath,
    SelectionStep,
};
