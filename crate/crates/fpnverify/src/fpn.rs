//! The fuzzy Petri net: places for propositions, transitions for Horn
//! clauses, and DOT export.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::reachability::Marking;
use crate::rulebase::{BehaviorModel, HornClause, Proposition, PropertyKind};

/// A place together with the proposition it stands for.
#[derive(Debug, Clone, Serialize)]
pub struct Place {
    pub index: usize,
    pub proposition: Proposition,
    pub kind: PropertyKind,
}

/// A transition: one Horn clause with its certainty factor and incidence.
#[derive(Debug, Clone, Serialize)]
pub struct Transition {
    pub index: usize,
    pub source_rule: String,
    pub cf: f64,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

/// Places, transitions and the incidence between them. Immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct FuzzyPetriNet {
    places: Vec<Place>,
    transitions: Vec<Transition>,
    model_ref: String,
    index: HashMap<Proposition, usize>,
}

impl FuzzyPetriNet {
    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn model_ref(&self) -> &str {
        &self.model_ref
    }

    pub fn place_index(&self, prop: &Proposition) -> Option<usize> {
        self.index.get(prop).copied()
    }

    /// The place carrying the same (variable, term) with the negation flag
    /// flipped, if it exists.
    pub fn negated_twin(&self, place: usize) -> Option<usize> {
        let twin = self.places[place].proposition.negated_twin();
        self.place_index(&twin)
    }

    /// Indices of all non-negated places over the same variable, excluding
    /// `place` itself.
    pub fn same_variable_places(&self, place: usize) -> Vec<usize> {
        let p = &self.places[place].proposition;
        self.places
            .iter()
            .filter(|q| {
                q.index != place
                    && q.proposition.variable == p.variable
                    && q.proposition.negated == p.negated
            })
            .map(|q| q.index)
            .collect()
    }
}

/// Build the net from normalized clauses.
///
/// One place per distinct proposition, ordered input properties first, then
/// internal, then output, in first-use order within each group; one
/// transition per clause, in clause order.
pub fn build_fpn(clauses: &[HornClause], model: &BehaviorModel) -> FuzzyPetriNet {
    let mut groups: [Vec<Proposition>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut seen: HashMap<Proposition, ()> = HashMap::new();
    let mut record = |prop: &Proposition| {
        if seen.contains_key(prop) {
            return;
        }
        seen.insert(prop.clone(), ());
        let kind = model
            .kind_of(&prop.variable)
            .expect("clause variables are declared in the model");
        let slot = match kind {
            PropertyKind::Input => 0,
            PropertyKind::Internal => 1,
            PropertyKind::Output => 2,
        };
        groups[slot].push(prop.clone());
    };
    for clause in clauses {
        for a in &clause.antecedents {
            record(a);
        }
        if let Some(c) = &clause.consequent {
            record(c);
        }
    }

    let mut places = Vec::new();
    let mut index = HashMap::new();
    for (slot, kind) in [
        PropertyKind::Input,
        PropertyKind::Internal,
        PropertyKind::Output,
    ]
    .iter()
    .enumerate()
    {
        for prop in &groups[slot] {
            let idx = places.len();
            index.insert(prop.clone(), idx);
            places.push(Place {
                index: idx,
                proposition: prop.clone(),
                kind: *kind,
            });
        }
    }

    let transitions = clauses
        .iter()
        .enumerate()
        .map(|(i, clause)| Transition {
            index: i,
            source_rule: clause.source_rule.clone(),
            cf: clause.cf,
            inputs: clause.antecedents.iter().map(|p| index[p]).collect(),
            outputs: clause
                .consequent
                .iter()
                .map(|p| index[p])
                .collect(),
        })
        .collect();

    FuzzyPetriNet {
        places,
        transitions,
        model_ref: model.name().to_string(),
        index,
    }
}

/// Render the net as a DOT digraph: circles for places, boxes for
/// transitions, one arc per incidence entry. Marked places are filled when
/// a marking is supplied.
pub fn export_dot(net: &FuzzyPetriNet, marking: Option<&Marking>) -> Result<String> {
    if let Some(m) = marking {
        if m.len() != net.places.len() {
            return Err(Error::MarkingMismatch {
                expected: net.places.len(),
                found: m.len(),
            });
        }
    }
    let mut out = String::new();
    out.push_str("digraph fpn {\n  rankdir=LR;\n");
    for place in &net.places {
        let marked = marking.map(|m| m.is_marked(place.index)).unwrap_or(false);
        let style = if marked { ", style=filled, fillcolor=lightgrey" } else { "" };
        writeln!(
            out,
            "  p{} [shape=circle, label=\"{}\"{}];",
            place.index, place.proposition, style
        )
        .unwrap();
    }
    for t in &net.transitions {
        writeln!(
            out,
            "  t{} [shape=box, label=\"{} / {}\"];",
            t.index, t.source_rule, t.cf
        )
        .unwrap();
    }
    for t in &net.transitions {
        for i in &t.inputs {
            writeln!(out, "  p{} -> t{};", i, t.index).unwrap();
        }
        for o in &t.outputs {
            writeln!(out, "  t{} -> p{};", t.index, o).unwrap();
        }
    }
    out.push_str("}\n");
    Ok(out)
}
