//! Semantic validation against an SME-provided referent: static
//! (property/rule set comparison) and dynamic (reasoning against reference
//! values).

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fpn::build_fpn;
use crate::inference::{derivation_trace, forward_chain, InferenceConfig, TruthAssignment};
use crate::rulebase::{normalize_model, BehaviorModel, Proposition, PropertyKind, Rule};

/// The SME's expected model plus reference-value assertions.
#[derive(Debug, Clone)]
pub struct ValidationReferent {
    pub model: BehaviorModel,
    pub ref_values: Vec<ReferenceValue>,
}

/// Comparison operator of a reference-value assertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Gt,
    Ge,
    Lt,
    Le,
}

impl Relation {
    pub fn holds(self, computed: f64, bound: f64) -> bool {
        match self {
            Relation::Gt => computed > bound,
            Relation::Ge => computed >= bound,
            Relation::Lt => computed < bound,
            Relation::Le => computed <= bound,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Gt => f.write_str(">"),
            Relation::Ge => f.write_str(">="),
            Relation::Lt => f.write_str("<"),
            Relation::Le => f.write_str("<="),
        }
    }
}

/// Given input degrees and one asserted bound on a target proposition.
#[derive(Debug, Clone)]
pub struct ReferenceValue {
    pub id: String,
    pub givens: Vec<(Proposition, f64)>,
    pub target: Proposition,
    pub relation: Relation,
    pub bound: f64,
}

/// Set-level differences between model and referent.
#[derive(Debug, Clone, Default, Serialize)]
pub struct StaticReport {
    pub missing_input_props: BTreeSet<String>,
    pub missing_internal_props: BTreeSet<String>,
    pub missing_output_props: BTreeSet<String>,
    /// Informational: model properties absent from the referent.
    pub extra_input_props: BTreeSet<String>,
    pub extra_internal_props: BTreeSet<String>,
    pub extra_output_props: BTreeSet<String>,
    /// Referent rules with no structurally identical model rule.
    pub missing_rules: Vec<String>,
    /// Model rules with no structurally identical referent rule.
    pub extra_rules: Vec<String>,
    /// Structurally matched pairs (model rule, referent rule) whose
    /// certainty factors differ.
    pub cf_mismatches: Vec<(String, String)>,
}

impl StaticReport {
    /// True when the model semantically misses nothing the referent expects.
    pub fn is_clean(&self) -> bool {
        self.missing_input_props.is_empty()
            && self.missing_internal_props.is_empty()
            && self.missing_output_props.is_empty()
            && self.missing_rules.is_empty()
            && self.extra_rules.is_empty()
            && self.cf_mismatches.is_empty()
    }
}

fn prop_set(model: &BehaviorModel, kind: PropertyKind) -> BTreeSet<String> {
    model.variables_of_kind(kind).map(str::to_string).collect()
}

fn same_structure(a: &Rule, b: &Rule) -> bool {
    a.connective() == b.connective()
        && a.antecedent_set() == b.antecedent_set()
        && a.consequent_set() == b.consequent_set()
}

/// Compare property sets and rule sets without any reasoning.
///
/// Rule matching ignores certainty factors for identity; a structural match
/// with a different cf is reported separately.
pub fn static_validate(model: &BehaviorModel, referent: &ValidationReferent) -> StaticReport {
    let diff = |kind: PropertyKind| {
        let model_set = prop_set(model, kind);
        let referent_set = prop_set(&referent.model, kind);
        let missing: BTreeSet<String> = referent_set.difference(&model_set).cloned().collect();
        let extra: BTreeSet<String> = model_set.difference(&referent_set).cloned().collect();
        (missing, extra)
    };
    let mut report = StaticReport::default();
    (report.missing_input_props, report.extra_input_props) = diff(PropertyKind::Input);
    (report.missing_internal_props, report.extra_internal_props) = diff(PropertyKind::Internal);
    (report.missing_output_props, report.extra_output_props) = diff(PropertyKind::Output);

    let mut matched_model: Vec<bool> = vec![false; model.rules().len()];
    for ref_rule in referent.model.rules() {
        // Prefer an exact match (structure + cf) over a cf-mismatched one.
        let exact = model.rules().iter().enumerate().find(|(i, r)| {
            !matched_model[*i] && same_structure(r, ref_rule) && r.cf() == ref_rule.cf()
        });
        let candidate = exact.or_else(|| {
            model
                .rules()
                .iter()
                .enumerate()
                .find(|(i, r)| !matched_model[*i] && same_structure(r, ref_rule))
        });
        match candidate {
            Some((i, r)) => {
                matched_model[i] = true;
                if r.cf() != ref_rule.cf() {
                    report
                        .cf_mismatches
                        .push((r.id().to_string(), ref_rule.id().to_string()));
                }
            }
            None => report.missing_rules.push(ref_rule.id().to_string()),
        }
    }
    for (i, r) in model.rules().iter().enumerate() {
        if !matched_model[i] {
            report.extra_rules.push(r.id().to_string());
        }
    }
    report
}

/// Which rule base to reason over during dynamic validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleBaseChoice {
    Model,
    Referent,
}

impl fmt::Display for RuleBaseChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleBaseChoice::Model => f.write_str("model"),
            RuleBaseChoice::Referent => f.write_str("referent"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("PASS"),
            Verdict::Fail => f.write_str("FAIL"),
        }
    }
}

/// The outcome of checking one reference value.
#[derive(Debug, Clone, Serialize)]
pub struct RefValueOutcome {
    pub id: String,
    pub target: Proposition,
    pub computed: f64,
    pub relation: Relation,
    pub bound: f64,
    pub verdict: Verdict,
    /// Set when the computed degree is within epsilon of the bound.
    pub near_miss: bool,
    /// Rules on the best derivation path, in dependency order.
    pub trace: Vec<String>,
    /// Extra diagnosis, e.g. "underivable" when the target has no place.
    pub note: Option<String>,
}

/// Per-reference-value verdicts for one rule base.
#[derive(Debug, Clone, Serialize)]
pub struct DynamicReport {
    pub base: RuleBaseChoice,
    pub outcomes: Vec<RefValueOutcome>,
}

impl DynamicReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.verdict == Verdict::Pass)
    }
}

/// Reason the chosen rule base on each reference value's givens and check
/// the asserted bound.
///
/// Chains whose linguistic terms disagree across rule levels are bridged by
/// the term fallback (see [`InferenceConfig::term_fallback`]), mirroring how
/// reference values are validated by merging rules.
pub fn dynamic_validate(
    choice: RuleBaseChoice,
    model: &BehaviorModel,
    referent: &ValidationReferent,
    cfg: &InferenceConfig,
) -> Result<DynamicReport> {
    let base = match choice {
        RuleBaseChoice::Model => model,
        RuleBaseChoice::Referent => &referent.model,
    };
    let clauses = normalize_model(base);
    let net = build_fpn(&clauses, base);
    let run_cfg = InferenceConfig {
        term_fallback: true,
        ..*cfg
    };

    let mut outcomes = Vec::with_capacity(referent.ref_values.len());
    for rv in &referent.ref_values {
        for (prop, _) in &rv.givens {
            if net.place_index(prop).is_none() {
                return Err(Error::UnknownProposition(format!(
                    "{prop} (given of {}, not in the {choice} rule base)",
                    rv.id
                )));
            }
        }
        let inputs = TruthAssignment::from_inputs(&net, &rv.givens)?;
        let result = forward_chain(&net, &clauses, &inputs, &run_cfg)?;
        let (computed, trace, note) = match net.place_index(&rv.target) {
            Some(idx) => (
                result.degree(idx),
                derivation_trace(&net, &clauses, &result, idx, &run_cfg),
                None,
            ),
            None => (0.0, Vec::new(), Some("underivable".to_string())),
        };
        let verdict = if note.is_none() && rv.relation.holds(computed, rv.bound) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        outcomes.push(RefValueOutcome {
            id: rv.id.clone(),
            target: rv.target.clone(),
            computed,
            relation: rv.relation,
            bound: rv.bound,
            verdict,
            // Small slop so a slack stated in decimal (e.g. 0.00075) is not
            // defeated by binary rounding of the computed degree.
            near_miss: (computed - rv.bound).abs() <= cfg.epsilon + 1e-12,
            trace,
            note,
        });
    }
    Ok(DynamicReport {
        base: choice,
        outcomes,
    })
}
