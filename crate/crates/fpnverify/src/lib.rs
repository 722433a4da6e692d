//! Verification and validation of fuzzy rule bases via fuzzy Petri nets.
//!
//! A rule base with certainty factors is normalized into Horn clauses and
//! mapped to a fuzzy Petri net. Structural errors (incompleteness,
//! inconsistency, circularity, redundancy) are detected by generating and
//! searching an ω-reachability graph; semantic errors are detected by
//! comparing the model against an SME-provided referent, statically (set
//! comparison) and dynamically (min-product forward chaining against
//! reference-value assertions).
//!
//! See the guide under `book/` for a narrative walk-through; its code
//! snippets run as doc-tests of this crate.

pub mod error;
pub mod fpn;
pub mod inference;
pub mod reachability;
pub mod report;
pub mod rulebase;
pub mod schema;
pub mod validation;
pub mod verification;

pub use error::{Error, Result};
pub use fpn::{build_fpn, export_dot, FuzzyPetriNet, Place, Transition};
pub use inference::{apply_clause, forward_chain, InferenceConfig, TruthAssignment};
pub use reachability::{
    build_reachability_graph, enabled_transitions, export_graph_dot, initial_marking, Marking,
    ReachabilityGraph,
};
pub use rulebase::{
    normalize, normalize_model, BehaviorModel, Connective, HornClause, LinguisticTerm,
    Proposition, PropertyKind, Rule, RuleKind, VariableDecl,
};
pub use schema::{parse_inputs, parse_model, parse_referent};
pub use validation::{
    dynamic_validate, static_validate, DynamicReport, ReferenceValue, Relation, RuleBaseChoice,
    StaticReport, ValidationReferent, Verdict,
};
pub use verification::{
    detect_circularity, detect_incompleteness, detect_inconsistency, detect_redundancy, verify,
    Finding, FindingKind, Severity, Subject, VerificationReport,
};

// The guide's code snippets double as doc-tests so the book can never
// drift from the library (mdbook itself cannot run them).
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/rule-bases.md")]
    mod rule_bases {}
    #[doc = include_str!("../../../book/src/petri-nets.md")]
    mod petri_nets {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/inference.md")]
    mod inference {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
}
