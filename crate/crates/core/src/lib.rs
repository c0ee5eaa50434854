//! Confidence assessment and mining of functional dependencies over
//! probabilistic relations under possible-worlds semantics.
//!
//! Four dependency kinds are supported: probabilistic FDs (pFD), approximate
//! FDs (pAFD) and their conditional forms restricted by a pattern tableau
//! (CpFD, CpAFD). pFD and CpFD confidences are computed exactly by a pruned
//! search over tuple options; pAFD and CpAFD confidences are estimated by
//! sampling worlds. A brute-force world enumerator serves as ground truth on
//! small inputs.
//!
//! The `parallel` feature (on by default) spreads sampling, enumeration,
//! search branches and mining candidates over the rayon pool. Results are
//! identical with and without it.

pub mod conditional;
pub mod dataio;
mod error;
pub mod miner;
pub mod model;
pub mod numeric;
pub mod pafd_estimators;
mod par;
pub mod pfd_exact;
pub mod specificity;
pub mod worlds_oracle;

pub use error::{Error, Result};
pub use model::{
    AttrSet, AttributeSchema, ConfidenceReport, DependencyKind, DependencySpec, Marker, Method,
    OptionAssignment, OptionContent, Pattern, PatternTableau, ProbRelation, ProbTuple,
    RelationKind,
};
