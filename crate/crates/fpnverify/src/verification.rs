//! Structural verification: incompleteness, inconsistency, circularity and
//! redundancy detection over the net, the reachability graph and the
//! normalized clause set.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::fpn::{build_fpn, FuzzyPetriNet};
use crate::reachability::{build_reachability_graph, initial_marking, ReachabilityGraph};
use crate::rulebase::{
    normalize_model, BehaviorModel, HornClause, Proposition, PropertyKind, Rule,
};

/// What a finding is about: a rule or a place.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subject {
    Rule(String),
    Place(Proposition),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Rule(id) => f.write_str(id),
            Subject::Place(p) => write!(f, "{p}"),
        }
    }
}

/// The error classes reported by the detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    DanglingAntecedent,
    DeadEndConsequent,
    ExplicitInconsistency,
    CandidateInconsistency,
    Circularity,
    DuplicateRule,
    SubsumedByCondition,
    SubsumedByConclusion,
}

impl FindingKind {
    /// The coarse class this kind belongs to.
    pub fn group(self) -> &'static str {
        match self {
            FindingKind::DanglingAntecedent | FindingKind::DeadEndConsequent => "incompleteness",
            FindingKind::ExplicitInconsistency | FindingKind::CandidateInconsistency => {
                "inconsistency"
            }
            FindingKind::Circularity => "circularity",
            FindingKind::DuplicateRule
            | FindingKind::SubsumedByCondition
            | FindingKind::SubsumedByConclusion => "redundancy",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            FindingKind::ExplicitInconsistency
            | FindingKind::Circularity
            | FindingKind::DanglingAntecedent
            | FindingKind::DeadEndConsequent => Severity::Error,
            FindingKind::CandidateInconsistency
            | FindingKind::DuplicateRule
            | FindingKind::SubsumedByCondition
            | FindingKind::SubsumedByConclusion => Severity::Warning,
        }
    }
}

impl fmt::Display for FindingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FindingKind::DanglingAntecedent => "incompleteness/dangling-antecedent",
            FindingKind::DeadEndConsequent => "incompleteness/dead-end-consequent",
            FindingKind::ExplicitInconsistency => "inconsistency/explicit",
            FindingKind::CandidateInconsistency => "inconsistency/candidate",
            FindingKind::Circularity => "circularity",
            FindingKind::DuplicateRule => "redundancy/duplicate",
            FindingKind::SubsumedByCondition => "redundancy/subsumed-by-condition",
            FindingKind::SubsumedByConclusion => "redundancy/subsumed-by-conclusion",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

/// One detected structural problem with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub severity: Severity,
    pub subjects: Vec<Subject>,
    pub message: String,
}

impl Finding {
    fn new(kind: FindingKind, subjects: Vec<Subject>, message: String) -> Self {
        Finding {
            kind,
            severity: kind.severity(),
            subjects,
            message,
        }
    }

    pub fn rule_subjects(&self) -> Vec<&str> {
        self.subjects
            .iter()
            .filter_map(|s| match s {
                Subject::Rule(id) => Some(id.as_str()),
                Subject::Place(_) => None,
            })
            .collect()
    }

    pub fn place_subjects(&self) -> Vec<&Proposition> {
        self.subjects
            .iter()
            .filter_map(|s| match s {
                Subject::Place(p) => Some(p),
                Subject::Rule(_) => None,
            })
            .collect()
    }
}

/// Node/edge counts, the fired steps and the loop flag of the reachability
/// graph, reported alongside the findings.
#[derive(Debug, Clone, Serialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    /// Rule ids fired per maximal step.
    pub steps: Vec<Vec<String>>,
    /// Rules whose firing added no new omega.
    pub no_effect: Vec<String>,
    pub looped: bool,
}

/// Findings plus the graph summary for one model.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub model_ref: String,
    pub findings: Vec<Finding>,
    pub graph_summary: GraphSummary,
}

impl VerificationReport {
    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Error)
    }
}

fn sorted_rule_subjects(ids: impl IntoIterator<Item = String>) -> Vec<Subject> {
    let set: BTreeSet<String> = ids.into_iter().collect();
    set.into_iter().map(Subject::Rule).collect()
}

/// Detect dangling antecedents and dead-end consequents.
///
/// Detection works at variable granularity: an antecedent dangles when no
/// rule derives any state of its variable and the variable is not an input
/// property; a consequent is dead-end when no rule consumes any state of
/// its variable and the variable is not an output property. Facts and
/// queries are exempt on their empty side by construction.
pub fn detect_incompleteness(
    net: &FuzzyPetriNet,
    clauses: &[HornClause],
    model: &BehaviorModel,
) -> Vec<Finding> {
    let produced_vars: HashSet<&str> = clauses
        .iter()
        .filter_map(|c| c.consequent.as_ref())
        .map(|p| p.variable.as_str())
        .collect();
    let consumed_vars: HashSet<&str> = clauses
        .iter()
        .flat_map(|c| c.antecedents.iter())
        .map(|p| p.variable.as_str())
        .collect();

    let mut findings = Vec::new();
    let mut seen: HashSet<&Proposition> = HashSet::new();
    for place in net.places() {
        let prop = &place.proposition;
        if !seen.insert(prop) {
            continue;
        }
        let used_by: Vec<String> = clauses
            .iter()
            .filter(|c| c.antecedents.contains(prop))
            .map(|c| c.source_rule.clone())
            .collect();
        let produced_by: Vec<String> = clauses
            .iter()
            .filter(|c| c.consequent.as_ref() == Some(prop))
            .map(|c| c.source_rule.clone())
            .collect();

        if !used_by.is_empty()
            && !produced_vars.contains(prop.variable.as_str())
            && model.kind_of(&prop.variable) != Some(PropertyKind::Input)
        {
            let mut subjects = sorted_rule_subjects(used_by.iter().cloned());
            subjects.push(Subject::Place(prop.clone()));
            findings.push(Finding::new(
                FindingKind::DanglingAntecedent,
                subjects,
                format!(
                    "antecedent {prop} of rule(s) {} is never derived and is not an input property",
                    used_by.join(", ")
                ),
            ));
        }
        if !produced_by.is_empty()
            && !consumed_vars.contains(prop.variable.as_str())
            && model.kind_of(&prop.variable) != Some(PropertyKind::Output)
        {
            let mut subjects = sorted_rule_subjects(produced_by.iter().cloned());
            subjects.push(Subject::Place(prop.clone()));
            findings.push(Finding::new(
                FindingKind::DeadEndConsequent,
                subjects,
                format!(
                    "consequent {prop} of rule(s) {} is never consumed and is not an output property",
                    produced_by.join(", ")
                ),
            ));
        }
    }
    findings
}

/// Rules on the derivation chain of `place`, walked backwards over the
/// transitions that actually fired.
fn derivation_chain(
    net: &FuzzyPetriNet,
    graph: &ReachabilityGraph,
    place: usize,
) -> BTreeSet<String> {
    let fired: HashSet<usize> = graph.fired.iter().copied().collect();
    let mut chain = BTreeSet::new();
    let mut stack = vec![place];
    let mut visited = HashSet::new();
    while let Some(p) = stack.pop() {
        if !visited.insert(p) {
            continue;
        }
        for t in net.transitions() {
            if fired.contains(&t.index) && t.outputs.contains(&p) {
                chain.insert(t.source_rule.clone());
                stack.extend(t.inputs.iter().copied());
            }
        }
    }
    chain
}

/// Detect explicit (P and ~P both reachable) and candidate (two states of
/// one variable derived from identical antecedents) inconsistencies.
pub fn detect_inconsistency(
    net: &FuzzyPetriNet,
    graph: &ReachabilityGraph,
    clauses: &[HornClause],
) -> Vec<Finding> {
    let final_marking = graph.final_marking();
    let mut findings = Vec::new();

    // Explicit: a place and its negated twin are both reachable.
    for place in net.places() {
        if place.proposition.negated || !final_marking.is_marked(place.index) {
            continue;
        }
        let Some(twin) = net.negated_twin(place.index) else {
            continue;
        };
        if !final_marking.is_marked(twin) {
            continue;
        }
        let mut rules = derivation_chain(net, graph, place.index);
        rules.extend(derivation_chain(net, graph, twin));
        let mut subjects = sorted_rule_subjects(rules.iter().cloned());
        subjects.push(Subject::Place(place.proposition.clone()));
        subjects.push(Subject::Place(net.places()[twin].proposition.clone()));
        findings.push(Finding::new(
            FindingKind::ExplicitInconsistency,
            subjects,
            format!(
                "both {} and {} are derivable (via {})",
                place.proposition,
                net.places()[twin].proposition,
                rules.into_iter().collect::<Vec<_>>().join(", ")
            ),
        ));
    }

    // Candidate: two different states of one variable, both reachable,
    // derived by clauses with identical antecedent sets.
    let producers: HashMap<usize, Vec<&HornClause>> = {
        let mut map: HashMap<usize, Vec<&HornClause>> = HashMap::new();
        for c in clauses {
            if let Some(idx) = c.consequent.as_ref().and_then(|p| net.place_index(p)) {
                map.entry(idx).or_default().push(c);
            }
        }
        map
    };
    for p in net.places() {
        if p.proposition.negated || !final_marking.is_marked(p.index) {
            continue;
        }
        for q in net.places() {
            if q.index <= p.index
                || q.proposition.negated
                || q.proposition.variable != p.proposition.variable
                || !final_marking.is_marked(q.index)
            {
                continue;
            }
            let (Some(cp), Some(cq)) = (producers.get(&p.index), producers.get(&q.index)) else {
                continue;
            };
            let mut rules = BTreeSet::new();
            for a in cp {
                for b in cq {
                    if a.antecedent_set() == b.antecedent_set() {
                        rules.insert(a.source_rule.clone());
                        rules.insert(b.source_rule.clone());
                    }
                }
            }
            if rules.is_empty() {
                continue;
            }
            let mut subjects = sorted_rule_subjects(rules.iter().cloned());
            subjects.push(Subject::Place(p.proposition.clone()));
            subjects.push(Subject::Place(q.proposition.clone()));
            findings.push(Finding::new(
                FindingKind::CandidateInconsistency,
                subjects,
                format!(
                    "{} and {} are different states of `{}` derived from identical antecedents by {}",
                    p.proposition,
                    q.proposition,
                    p.proposition.variable,
                    rules.into_iter().collect::<Vec<_>>().join(", ")
                ),
            ));
        }
    }
    findings
}

/// Detect circular rule dependencies via strongly connected components of
/// the bipartite place/clause digraph.
pub fn detect_circularity(clauses: &[HornClause]) -> Vec<Finding> {
    let mut graph: DiGraph<(), ()> = DiGraph::new();
    let mut prop_nodes: HashMap<&Proposition, NodeIndex> = HashMap::new();
    let mut clause_nodes: Vec<NodeIndex> = Vec::new();

    fn prop_node<'a>(
        g: &mut DiGraph<(), ()>,
        map: &mut HashMap<&'a Proposition, NodeIndex>,
        p: &'a Proposition,
    ) -> NodeIndex {
        *map.entry(p).or_insert_with(|| g.add_node(()))
    }
    for clause in clauses {
        let cn = graph.add_node(());
        clause_nodes.push(cn);
        for a in &clause.antecedents {
            let pn = prop_node(&mut graph, &mut prop_nodes, a);
            graph.add_edge(pn, cn, ());
        }
        if let Some(c) = &clause.consequent {
            let pn = prop_node(&mut graph, &mut prop_nodes, c);
            graph.add_edge(cn, pn, ());
        }
    }

    let clause_of: HashMap<NodeIndex, usize> = clause_nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (*n, i))
        .collect();

    let mut findings = Vec::new();
    for component in tarjan_scc(&graph) {
        if component.len() < 2 {
            continue;
        }
        let members: HashSet<NodeIndex> = component.iter().copied().collect();
        let mut in_cycle: Vec<usize> = component
            .iter()
            .filter_map(|n| clause_of.get(n).copied())
            .collect();
        if in_cycle.is_empty() {
            continue;
        }
        in_cycle.sort_unstable();

        // Walk the component from its first clause to list rules in cycle
        // order.
        let mut ordered: Vec<String> = Vec::new();
        let mut stack = vec![clause_nodes[in_cycle[0]]];
        let mut visited: HashSet<NodeIndex> = HashSet::new();
        while let Some(node) = stack.pop() {
            if !visited.insert(node) {
                continue;
            }
            if let Some(ci) = clause_of.get(&node) {
                let rule = clauses[*ci].source_rule.clone();
                if !ordered.contains(&rule) {
                    ordered.push(rule);
                }
            }
            let mut next: Vec<NodeIndex> = graph
                .neighbors(node)
                .filter(|n| members.contains(n))
                .collect();
            next.sort_unstable();
            // Reverse so the smallest neighbor is visited first.
            for n in next.into_iter().rev() {
                stack.push(n);
            }
        }
        let subjects = ordered.iter().cloned().map(Subject::Rule).collect();
        findings.push(Finding::new(
            FindingKind::Circularity,
            subjects,
            format!("rules {} form a circular dependency", ordered.join(" -> ")),
        ));
    }
    findings
}

/// True when rule `a`'s consequents are a strict subset of rule `b`'s with
/// identical antecedents.
fn subsumed_by_conclusion(a: &Rule, b: &Rule) -> bool {
    a.connective() == b.connective()
        && a.antecedent_set() == b.antecedent_set()
        && a.consequent_set().is_subset(&b.consequent_set())
        && a.consequents().len() < b.consequents().len()
}

/// Detect duplicate and subsumed rules at clause and rule level.
pub fn detect_redundancy(clauses: &[HornClause], rules: &[Rule]) -> Vec<Finding> {
    let rule_by_id: HashMap<&str, &Rule> = rules.iter().map(|r| (r.id(), r)).collect();
    let mut dedup: BTreeSet<(FindingKind, Vec<Subject>)> = BTreeSet::new();
    let mut findings = Vec::new();
    let mut push = |findings: &mut Vec<Finding>, kind, subjects: Vec<Subject>, message| {
        if dedup.insert((kind, subjects.clone())) {
            findings.push(Finding::new(kind, subjects, message));
        }
    };

    let cf_note = |a: &HornClause, b: &HornClause| {
        if a.cf == b.cf {
            String::new()
        } else {
            format!(" (certainty factors differ: {} vs {})", a.cf, b.cf)
        }
    };

    for (i, a) in clauses.iter().enumerate() {
        for b in clauses.iter().skip(i + 1) {
            if a.source_rule == b.source_rule {
                continue;
            }
            if a.consequent != b.consequent {
                continue;
            }
            let (sa, sb) = (a.antecedent_set(), b.antecedent_set());
            if sa == sb {
                // Identical clauses from a strict-subset conclusion pair are
                // reported as subsumed-by-conclusion, not as duplicates.
                let conclusion_pair = match (
                    rule_by_id.get(a.source_rule.as_str()),
                    rule_by_id.get(b.source_rule.as_str()),
                ) {
                    (Some(ra), Some(rb)) => {
                        subsumed_by_conclusion(ra, rb) || subsumed_by_conclusion(rb, ra)
                    }
                    _ => false,
                };
                if conclusion_pair {
                    continue;
                }
                let subjects =
                    sorted_rule_subjects([a.source_rule.clone(), b.source_rule.clone()]);
                let msg = format!(
                    "rules {} and {} derive the same conclusion from identical conditions{}",
                    a.source_rule,
                    b.source_rule,
                    cf_note(a, b)
                );
                push(&mut findings, FindingKind::DuplicateRule, subjects, msg);
            } else if sa.is_superset(&sb) {
                let subjects = vec![
                    Subject::Rule(a.source_rule.clone()),
                    Subject::Rule(b.source_rule.clone()),
                ];
                let msg = format!(
                    "rule {} has a more restrictive condition than {} for the same conclusion{}",
                    a.source_rule,
                    b.source_rule,
                    cf_note(a, b)
                );
                push(&mut findings, FindingKind::SubsumedByCondition, subjects, msg);
            } else if sb.is_superset(&sa) {
                let subjects = vec![
                    Subject::Rule(b.source_rule.clone()),
                    Subject::Rule(a.source_rule.clone()),
                ];
                let msg = format!(
                    "rule {} has a more restrictive condition than {} for the same conclusion{}",
                    b.source_rule,
                    a.source_rule,
                    cf_note(a, b)
                );
                push(&mut findings, FindingKind::SubsumedByCondition, subjects, msg);
            }
        }
    }

    for (i, a) in rules.iter().enumerate() {
        for b in rules.iter().skip(i + 1) {
            if subsumed_by_conclusion(a, b) {
                let subjects = vec![
                    Subject::Rule(a.id().to_string()),
                    Subject::Rule(b.id().to_string()),
                ];
                let msg = format!(
                    "rule {} has less implied conclusion than {}",
                    a.id(),
                    b.id()
                );
                push(&mut findings, FindingKind::SubsumedByConclusion, subjects, msg);
            } else if subsumed_by_conclusion(b, a) {
                let subjects = vec![
                    Subject::Rule(b.id().to_string()),
                    Subject::Rule(a.id().to_string()),
                ];
                let msg = format!(
                    "rule {} has less implied conclusion than {}",
                    b.id(),
                    a.id()
                );
                push(&mut findings, FindingKind::SubsumedByConclusion, subjects, msg);
            }
        }
    }

    findings
}

/// Run the full structural verification pipeline over one model.
pub fn verify(model: &BehaviorModel) -> VerificationReport {
    let clauses = normalize_model(model);
    let net = build_fpn(&clauses, model);
    let root = initial_marking(&net);
    let graph = build_reachability_graph(&net, &root);

    let mut findings = Vec::new();
    findings.extend(detect_incompleteness(&net, &clauses, model));
    findings.extend(detect_inconsistency(&net, &graph, &clauses));
    findings.extend(detect_circularity(&clauses));
    findings.extend(detect_redundancy(&clauses, model.rules()));
    findings.sort_by(|a, b| {
        (a.kind, &a.subjects).cmp(&(b.kind, &b.subjects))
    });

    let rule_names = |ts: &[usize]| -> Vec<String> {
        let set: BTreeSet<String> = ts
            .iter()
            .map(|t| net.transitions()[*t].source_rule.clone())
            .collect();
        set.into_iter().collect()
    };
    let steps = graph
        .edges
        .iter()
        .map(|e| rule_names(&e.fired))
        .collect();
    let no_effect =
        rule_names(&graph.no_effect_firings.iter().copied().collect::<Vec<_>>());

    VerificationReport {
        model_ref: model.name().to_string(),
        findings,
        graph_summary: GraphSummary {
            nodes: graph.nodes.len(),
            edges: graph.edges.len(),
            steps,
            no_effect,
            looped: graph.looped,
        },
    }
}
