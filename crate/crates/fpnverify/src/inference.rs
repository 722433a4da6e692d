//! Forward-chaining fuzzy reasoning with certainty factors.
//!
//! A clause fires when every antecedent degree reaches the enabling
//! threshold; the consequent receives `min(antecedents) * cf`. Competing
//! derivations of one place combine by MAX, and iteration runs to the least
//! fixpoint.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::fpn::FuzzyPetriNet;
use crate::rulebase::{HornClause, Proposition, PropertyKind};

/// Per-place truth degrees, the runtime counterpart of the net.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthAssignment {
    degrees: Vec<f64>,
}

impl TruthAssignment {
    pub fn zeros(len: usize) -> Self {
        TruthAssignment {
            degrees: vec![0.0; len],
        }
    }

    /// Build an assignment from `(proposition, degree)` pairs, resolving
    /// each proposition against the net.
    pub fn from_inputs(net: &FuzzyPetriNet, inputs: &[(Proposition, f64)]) -> Result<Self> {
        let mut a = Self::zeros(net.places().len());
        for (prop, degree) in inputs {
            let idx = net
                .place_index(prop)
                .ok_or_else(|| Error::UnknownProposition(prop.to_string()))?;
            a.set(idx, *degree)?;
        }
        Ok(a)
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn degree(&self, place: usize) -> f64 {
        self.degrees[place]
    }

    pub fn set(&mut self, place: usize, degree: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&degree) {
            return Err(Error::schema(
                format!("place {place}"),
                format!("degree {degree} outside [0, 1]"),
            ));
        }
        self.degrees[place] = degree;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.degrees.iter().copied().enumerate()
    }
}

/// Reasoning parameters. Aggregation of competing derivations is fixed to
/// MAX.
#[derive(Debug, Clone, Copy)]
pub struct InferenceConfig {
    /// Enabling threshold: a clause fires only when every antecedent degree
    /// is at least this value.
    pub threshold: f64,
    /// Comparison slack used for near-miss reporting in dynamic validation.
    pub epsilon: f64,
    /// When set, an internal or output antecedent place that no clause
    /// produces borrows the highest degree among the places of the same
    /// variable. Dynamic validation turns this on so that chains whose
    /// linguistic terms disagree across rule levels still evaluate.
    pub term_fallback: bool,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            threshold: 0.0,
            epsilon: 0.0,
            term_fallback: false,
        }
    }
}

/// Evaluate one clause against an assignment.
///
/// Returns `None` when some antecedent is below the threshold, otherwise
/// `min(antecedent degrees) * cf`. Fact clauses return their cf.
pub fn apply_clause(
    net: &FuzzyPetriNet,
    clause: &HornClause,
    assignment: &TruthAssignment,
    cfg: &InferenceConfig,
) -> Result<Option<f64>> {
    let mut min_degree = 1.0f64;
    for antecedent in &clause.antecedents {
        let idx = net
            .place_index(antecedent)
            .ok_or_else(|| Error::UnknownProposition(antecedent.to_string()))?;
        let degree = assignment.degree(idx);
        if degree < cfg.threshold {
            return Ok(None);
        }
        min_degree = min_degree.min(degree);
    }
    Ok(Some(min_degree * clause.cf))
}

/// Places eligible for the term fallback: non-input, produced by no clause.
fn fallback_places(net: &FuzzyPetriNet, clauses: &[HornClause]) -> HashSet<usize> {
    let produced: HashSet<usize> = clauses
        .iter()
        .filter_map(|c| c.consequent.as_ref())
        .filter_map(|p| net.place_index(p))
        .collect();
    net.places()
        .iter()
        .filter(|p| p.kind != PropertyKind::Input && !produced.contains(&p.index))
        .map(|p| p.index)
        .collect()
}

fn effective(
    net: &FuzzyPetriNet,
    assignment: &TruthAssignment,
    fallback: &HashSet<usize>,
    cfg: &InferenceConfig,
) -> TruthAssignment {
    if !cfg.term_fallback {
        return assignment.clone();
    }
    let mut eff = assignment.clone();
    for &idx in fallback {
        if assignment.degree(idx) > 0.0 {
            continue;
        }
        let borrowed = net
            .same_variable_places(idx)
            .iter()
            .map(|q| assignment.degree(*q))
            .fold(0.0f64, f64::max);
        eff.set(idx, borrowed).expect("borrowed degree in range");
    }
    eff
}

/// Run every clause to the least fixpoint and return the resulting degrees.
///
/// `inputs` may assign positive degrees only to input-property places; all
/// other places start at zero and receive whatever the clauses derive.
pub fn forward_chain(
    net: &FuzzyPetriNet,
    clauses: &[HornClause],
    inputs: &TruthAssignment,
    cfg: &InferenceConfig,
) -> Result<TruthAssignment> {
    if inputs.len() != net.places().len() {
        return Err(Error::MarkingMismatch {
            expected: net.places().len(),
            found: inputs.len(),
        });
    }
    for place in net.places() {
        if place.kind != PropertyKind::Input && inputs.degree(place.index) > 0.0 {
            return Err(Error::schema(
                place.proposition.to_string(),
                "inputs may only assign degrees to input properties",
            ));
        }
    }
    let fallback = fallback_places(net, clauses);
    let mut degrees = inputs.clone();
    let max_rounds = clauses.len() + 2;
    for _ in 0..max_rounds {
        let eff = effective(net, &degrees, &fallback, cfg);
        let mut changed = false;
        for clause in clauses {
            let Some(target) = clause.consequent.as_ref() else {
                continue;
            };
            let idx = net
                .place_index(target)
                .ok_or_else(|| Error::UnknownProposition(target.to_string()))?;
            if let Some(value) = apply_clause(net, clause, &eff, cfg)? {
                if value > degrees.degree(idx) {
                    degrees.set(idx, value)?;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(degrees);
        }
    }
    Err(Error::NonConvergence(max_rounds))
}

/// Rules on the best derivation path of `target`, in dependency order.
///
/// Walks backwards from the target through the clauses whose applied value
/// equals the fixpoint degree, following term-fallback hops when enabled.
pub fn derivation_trace(
    net: &FuzzyPetriNet,
    clauses: &[HornClause],
    result: &TruthAssignment,
    target: usize,
    cfg: &InferenceConfig,
) -> Vec<String> {
    let fallback = fallback_places(net, clauses);
    let eff = effective(net, result, &fallback, cfg);
    let mut trace = Vec::new();
    let mut visited = HashSet::new();
    visit(net, clauses, &eff, result, &fallback, cfg, target, &mut visited, &mut trace);
    trace
}

#[allow(clippy::too_many_arguments)]
fn visit(
    net: &FuzzyPetriNet,
    clauses: &[HornClause],
    eff: &TruthAssignment,
    result: &TruthAssignment,
    fallback: &HashSet<usize>,
    cfg: &InferenceConfig,
    place: usize,
    visited: &mut HashSet<usize>,
    trace: &mut Vec<String>,
) {
    if !visited.insert(place) {
        return;
    }
    if cfg.term_fallback && fallback.contains(&place) {
        // The degree was borrowed from the best same-variable place.
        if let Some(&source) = net
            .same_variable_places(place)
            .iter()
            .max_by(|a, b| result.degree(**a).total_cmp(&result.degree(**b)))
        {
            visit(net, clauses, eff, result, fallback, cfg, source, visited, trace);
        }
        return;
    }
    let degree = result.degree(place);
    if degree <= 0.0 {
        return;
    }
    let best = clauses.iter().find(|c| {
        c.consequent
            .as_ref()
            .and_then(|p| net.place_index(p))
            .map(|idx| idx == place)
            .unwrap_or(false)
            && matches!(
                apply_clause(net, c, eff, cfg),
                Ok(Some(v)) if (v - degree).abs() <= 1e-12
            )
    });
    if let Some(clause) = best {
        for antecedent in &clause.antecedents {
            if let Some(idx) = net.place_index(antecedent) {
                visit(net, clauses, eff, result, fallback, cfg, idx, visited, trace);
            }
        }
        if !trace.contains(&clause.source_rule) {
            trace.push(clause.source_rule.clone());
        }
    }
}
