//! The special ω-reachability graph used for structural verification.
//!
//! Markings are boolean: a place is either unmarked or holds ω. All enabled
//! not-yet-fired transitions fire together at each step (maximal-step
//! semantics), so the graph is a path of at most `|T| + 2` nodes, possibly
//! ending in a self-loop when a step reproduces its own marking.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::fpn::FuzzyPetriNet;
use crate::rulebase::PropertyKind;

/// A per-place ω/unmarked vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marking(Vec<bool>);

impl Marking {
    pub fn unmarked(len: usize) -> Self {
        Marking(vec![false; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_marked(&self, place: usize) -> bool {
        self.0[place]
    }

    pub fn mark(&mut self, place: usize) {
        self.0[place] = true;
    }

    pub fn marked_count(&self) -> usize {
        self.0.iter().filter(|m| **m).count()
    }

    /// Indices of all ω places.
    pub fn marked_places(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.then_some(i))
            .collect()
    }
}

/// One maximal step: all transitions in `fired` fired together.
#[derive(Debug, Clone, Serialize)]
pub struct Edge {
    pub from: usize,
    pub fired: Vec<usize>,
    pub to: usize,
}

/// The graph produced by [`build_reachability_graph`]. Node 0 is the root.
#[derive(Debug, Clone)]
pub struct ReachabilityGraph {
    pub nodes: Vec<Marking>,
    pub edges: Vec<Edge>,
    /// Every transition fired anywhere, in firing order.
    pub fired: Vec<usize>,
    /// Transitions whose firing marked nothing that was not already covered
    /// by the pre-step marking or a co-firing transition.
    pub no_effect_firings: BTreeSet<usize>,
    /// True when a step reproduced its own marking (the repetitive-marking
    /// loop).
    pub looped: bool,
}

impl ReachabilityGraph {
    pub fn final_marking(&self) -> &Marking {
        self.nodes.last().expect("graph always has a root node")
    }
}

/// All places whose variable is an input property start at ω; everything
/// else is unmarked.
pub fn initial_marking(net: &FuzzyPetriNet) -> Marking {
    let mut m = Marking::unmarked(net.places().len());
    for place in net.places() {
        if place.kind == PropertyKind::Input {
            m.mark(place.index);
        }
    }
    m
}

/// Among the transitions not yet fired, those whose input places are all ω.
/// Transitions with no inputs (facts) are enabled whenever unfired.
pub fn enabled_transitions(
    net: &FuzzyPetriNet,
    marking: &Marking,
    already_fired: &BTreeSet<usize>,
) -> Vec<usize> {
    net.transitions()
        .iter()
        .filter(|t| !already_fired.contains(&t.index))
        .filter(|t| t.inputs.iter().all(|p| marking.is_marked(*p)))
        .map(|t| t.index)
        .collect()
}

/// Fire maximal steps until no unfired transition is enabled.
pub fn build_reachability_graph(net: &FuzzyPetriNet, root: &Marking) -> ReachabilityGraph {
    assert_eq!(root.len(), net.places().len(), "root marking sized to net");
    let mut graph = ReachabilityGraph {
        nodes: vec![root.clone()],
        edges: Vec::new(),
        fired: Vec::new(),
        no_effect_firings: BTreeSet::new(),
        looped: false,
    };
    let mut fired_set: BTreeSet<usize> = BTreeSet::new();

    loop {
        let current_idx = graph.nodes.len() - 1;
        let current = graph.nodes[current_idx].clone();
        let step = enabled_transitions(net, &current, &fired_set);
        if step.is_empty() {
            break;
        }

        let mut next = current.clone();
        for t in &step {
            for o in &net.transitions()[*t].outputs {
                next.mark(*o);
            }
        }

        // A firing is no-effect when each of its outputs was already ω
        // before the step or is also produced by a co-firing transition;
        // sink transitions (no outputs) are exempt.
        for t in &step {
            let outputs = &net.transitions()[*t].outputs;
            if outputs.is_empty() {
                continue;
            }
            let covered = outputs.iter().all(|o| {
                current.is_marked(*o)
                    || step
                        .iter()
                        .any(|u| u != t && net.transitions()[*u].outputs.contains(o))
            });
            if covered {
                graph.no_effect_firings.insert(*t);
            }
        }

        fired_set.extend(step.iter().copied());
        graph.fired.extend(step.iter().copied());

        if next == current {
            // Repetitive marking: record the edge on the same node. Only a
            // step with producing transitions counts as the terminal loop;
            // a sink-only step just fires and continues.
            graph.edges.push(Edge {
                from: current_idx,
                fired: step.clone(),
                to: current_idx,
            });
            if step
                .iter()
                .any(|t| !net.transitions()[*t].outputs.is_empty())
            {
                graph.looped = true;
                break;
            }
            continue;
        }

        graph.nodes.push(next);
        graph.edges.push(Edge {
            from: current_idx,
            fired: step,
            to: current_idx + 1,
        });
    }
    graph
}

/// Render the graph as DOT, nodes labeled by their ω-index sets and edges
/// by the rules fired.
pub fn export_graph_dot(net: &FuzzyPetriNet, graph: &ReachabilityGraph) -> String {
    let mut out = String::new();
    out.push_str("digraph reachability {\n  rankdir=LR;\n");
    for (i, node) in graph.nodes.iter().enumerate() {
        let label = node
            .marked_places()
            .iter()
            .map(|p| format!("P{p}"))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(out, "  n{i} [shape=ellipse, label=\"{{{label}}}\"];").unwrap();
    }
    for edge in &graph.edges {
        let label = edge
            .fired
            .iter()
            .map(|t| net.transitions()[*t].source_rule.clone())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(out, "  n{} -> n{} [label=\"{}\"];", edge.from, edge.to, label).unwrap();
    }
    out.push_str("}\n");
    out
}
