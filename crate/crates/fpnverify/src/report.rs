//! Deterministic text and structured (JSON) rendering of reports.
//!
//! Output carries no timestamps; identical inputs render byte-identically.
//! Structured documents are versioned via `format_version`.

use serde::Serialize;
use serde_json::json;

use crate::inference::TruthAssignment;
use crate::fpn::FuzzyPetriNet;
use crate::validation::{DynamicReport, StaticReport};
use crate::verification::VerificationReport;

/// Version of the structured output schema.
pub const FORMAT_VERSION: u32 = 1;

fn structured(command: &str, report: impl Serialize) -> String {
    let doc = json!({
        "format_version": FORMAT_VERSION,
        "command": command,
        "report": report,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("reports serialize");
    s.push('\n');
    s
}

fn list_or_none<I: IntoIterator<Item = S>, S: AsRef<str>>(items: I) -> String {
    let joined: Vec<String> = items.into_iter().map(|s| s.as_ref().to_string()).collect();
    if joined.is_empty() {
        "(none)".to_string()
    } else {
        joined.join(", ")
    }
}

pub fn verification_text(report: &VerificationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("model: {}\n", report.model_ref));
    let g = &report.graph_summary;
    out.push_str(&format!(
        "graph: nodes={} edges={} looped={}\n",
        g.nodes, g.edges, g.looped
    ));
    for (i, step) in g.steps.iter().enumerate() {
        out.push_str(&format!("step {}: fired {}\n", i + 1, list_or_none(step)));
    }
    out.push_str(&format!("no-effect firings: {}\n", list_or_none(&g.no_effect)));
    out.push_str(&format!("findings: {}\n", report.findings.len()));
    for f in &report.findings {
        let subjects = f
            .subjects
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        out.push_str(&format!(
            "{} | {} | {} | {}\n",
            f.kind, f.severity, subjects, f.message
        ));
    }
    out
}

pub fn verification_structured(report: &VerificationReport) -> String {
    structured("verify", report)
}

pub fn static_text(report: &StaticReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "missing input properties: {}\n",
        list_or_none(&report.missing_input_props)
    ));
    out.push_str(&format!(
        "missing internal properties: {}\n",
        list_or_none(&report.missing_internal_props)
    ));
    out.push_str(&format!(
        "missing output properties: {}\n",
        list_or_none(&report.missing_output_props)
    ));
    out.push_str(&format!(
        "extra input properties (informational): {}\n",
        list_or_none(&report.extra_input_props)
    ));
    out.push_str(&format!(
        "extra internal properties (informational): {}\n",
        list_or_none(&report.extra_internal_props)
    ));
    out.push_str(&format!(
        "extra output properties (informational): {}\n",
        list_or_none(&report.extra_output_props)
    ));
    out.push_str(&format!("missing rules: {}\n", list_or_none(&report.missing_rules)));
    out.push_str(&format!("extra rules: {}\n", list_or_none(&report.extra_rules)));
    let mismatches: Vec<String> = report
        .cf_mismatches
        .iter()
        .map(|(m, r)| format!("{m}/{r}"))
        .collect();
    out.push_str(&format!("cf mismatches: {}\n", list_or_none(&mismatches)));
    out.push_str(&format!(
        "result: {}\n",
        if report.is_clean() {
            "clean"
        } else {
            "semantic incompleteness detected"
        }
    ));
    out
}

pub fn static_structured(report: &StaticReport) -> String {
    structured("validate-static", report)
}

pub fn dynamic_text(report: &DynamicReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("dynamic validation over {} rule base\n", report.base));
    for o in &report.outcomes {
        let near = if o.near_miss { " (near miss)" } else { "" };
        let note = o
            .note
            .as_ref()
            .map(|n| format!(" [{n}]"))
            .unwrap_or_default();
        out.push_str(&format!(
            "{}: {} = {} (required {} {}) -> {}{}{} | trace: {}\n",
            o.id,
            o.target,
            o.computed,
            o.relation,
            o.bound,
            o.verdict,
            near,
            note,
            list_or_none(&o.trace)
        ));
    }
    out.push_str(&format!(
        "result: {}\n",
        if report.all_passed() {
            "all reference values passed"
        } else {
            "semantic incorrectness detected"
        }
    ));
    out
}

pub fn dynamic_structured(report: &DynamicReport) -> String {
    structured("validate-dynamic", report)
}

pub fn reasoning_text(net: &FuzzyPetriNet, degrees: &TruthAssignment) -> String {
    let mut out = String::new();
    for place in net.places() {
        out.push_str(&format!(
            "p{} {} = {}\n",
            place.index,
            place.proposition,
            degrees.degree(place.index)
        ));
    }
    out
}

pub fn reasoning_structured(net: &FuzzyPetriNet, degrees: &TruthAssignment) -> String {
    let entries: Vec<serde_json::Value> = net
        .places()
        .iter()
        .map(|p| {
            json!({
                "place": p.index,
                "proposition": p.proposition,
                "degree": degrees.degree(p.index),
            })
        })
        .collect();
    structured("reason", json!({ "degrees": entries }))
}
