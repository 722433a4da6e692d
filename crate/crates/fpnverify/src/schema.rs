//! Document parsing for model, referent and inputs files (TOML).
//!
//! Unknown fields are rejected so that typos surface as errors instead of
//! silently vanishing.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::rulebase::{
    BehaviorModel, Connective, LinguisticTerm, Proposition, PropertyKind, Rule, RuleKind,
    VariableDecl,
};
use crate::validation::{ReferenceValue, Relation, ValidationReferent};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    name: String,
    variables: Vec<RawVariable>,
    #[serde(default)]
    rules: Vec<RawRule>,
    ref_values: Option<Vec<RawRefValue>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariable {
    id: String,
    kind: String,
    terms: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    id: String,
    kind: Option<String>,
    #[serde(rename = "if", default)]
    antecedents: Vec<RawProposition>,
    connective: Option<String>,
    #[serde(rename = "then", default)]
    consequents: Vec<RawProposition>,
    cf: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProposition {
    var: String,
    term: String,
    #[serde(default)]
    negated: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRefValue {
    id: String,
    given: Vec<RawGiven>,
    assert: RawAssertion,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGiven {
    var: String,
    term: String,
    #[serde(default)]
    negated: bool,
    degree: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAssertion {
    var: String,
    term: String,
    #[serde(default)]
    negated: bool,
    relation: String,
    bound: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInputs {
    inputs: Vec<RawGiven>,
}

fn proposition(raw: &RawProposition) -> Result<Proposition> {
    if raw.negated {
        Proposition::negation_of(&raw.var, &raw.term)
    } else {
        Proposition::new(&raw.var, &raw.term)
    }
}

fn given(raw: &RawGiven) -> Result<(Proposition, f64)> {
    let prop = if raw.negated {
        Proposition::negation_of(&raw.var, &raw.term)?
    } else {
        Proposition::new(&raw.var, &raw.term)?
    };
    if !(0.0..=1.0).contains(&raw.degree) {
        return Err(Error::schema(
            prop.to_string(),
            format!("degree {} outside [0, 1]", raw.degree),
        ));
    }
    Ok((prop, raw.degree))
}

fn variable(raw: &RawVariable) -> Result<VariableDecl> {
    let kind = match raw.kind.as_str() {
        "input" => PropertyKind::Input,
        "internal" => PropertyKind::Internal,
        "output" => PropertyKind::Output,
        other => {
            return Err(Error::schema(
                &raw.id,
                format!("unknown variable kind `{other}` (expected input|internal|output)"),
            ));
        }
    };
    let terms = match &raw.terms {
        Some(ts) => Some(
            ts.iter()
                .map(|t| LinguisticTerm::new(t))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    VariableDecl::new(&raw.id, kind, terms)
}

fn rule(raw: &RawRule) -> Result<Rule> {
    let kind = match raw.kind.as_deref() {
        None | Some("normal") => RuleKind::Normal,
        Some("fact") => RuleKind::Fact,
        Some("query") => RuleKind::Query,
        Some(other) => {
            return Err(Error::schema(
                &raw.id,
                format!("unknown rule kind `{other}` (expected normal|fact|query)"),
            ));
        }
    };
    let connective = match raw.connective.as_deref() {
        None | Some("and") => Connective::And,
        Some("or") => Connective::Or,
        Some(other) => {
            return Err(Error::schema(
                &raw.id,
                format!("unknown connective `{other}` (expected and|or)"),
            ));
        }
    };
    let antecedents = raw
        .antecedents
        .iter()
        .map(proposition)
        .collect::<Result<Vec<_>>>()?;
    let consequents = raw
        .consequents
        .iter()
        .map(proposition)
        .collect::<Result<Vec<_>>>()?;
    Rule::new(&raw.id, kind, antecedents, connective, consequents, raw.cf)
}

fn model_from_raw(raw: &RawDocument) -> Result<BehaviorModel> {
    let variables = raw
        .variables
        .iter()
        .map(variable)
        .collect::<Result<Vec<_>>>()?;
    let rules = raw.rules.iter().map(rule).collect::<Result<Vec<_>>>()?;
    BehaviorModel::new(&raw.name, variables, rules)
}

fn parse_raw(text: &str) -> Result<RawDocument> {
    toml::from_str(text).map_err(|e| Error::Syntax(e.to_string()))
}

/// Parse a model document. `ref_values` are not allowed here.
pub fn parse_model(text: &str) -> Result<BehaviorModel> {
    let raw = parse_raw(text)?;
    if raw.ref_values.is_some() {
        return Err(Error::schema(
            &raw.name,
            "`ref_values` is only allowed in referent documents",
        ));
    }
    model_from_raw(&raw)
}

/// Parse a referent document: a model document plus `ref_values`.
pub fn parse_referent(text: &str) -> Result<ValidationReferent> {
    let raw = parse_raw(text)?;
    let model = model_from_raw(&raw)?;
    let raw_values = raw.ref_values.ok_or_else(|| {
        Error::schema(&raw.name, "referent documents require a `ref_values` list")
    })?;
    let mut ref_values = Vec::with_capacity(raw_values.len());
    for rv in &raw_values {
        let givens = rv.given.iter().map(given).collect::<Result<Vec<_>>>()?;
        let target = if rv.assert.negated {
            Proposition::negation_of(&rv.assert.var, &rv.assert.term)?
        } else {
            Proposition::new(&rv.assert.var, &rv.assert.term)?
        };
        let relation = match rv.assert.relation.as_str() {
            "gt" => Relation::Gt,
            "ge" => Relation::Ge,
            "lt" => Relation::Lt,
            "le" => Relation::Le,
            other => {
                return Err(Error::schema(
                    &rv.id,
                    format!("unknown relation `{other}` (expected gt|ge|lt|le)"),
                ));
            }
        };
        if !(0.0..=1.0).contains(&rv.assert.bound) {
            return Err(Error::schema(
                &rv.id,
                format!("bound {} outside [0, 1]", rv.assert.bound),
            ));
        }
        ref_values.push(ReferenceValue {
            id: rv.id.clone(),
            givens,
            target,
            relation,
            bound: rv.assert.bound,
        });
    }
    Ok(ValidationReferent { model, ref_values })
}

/// Parse an inputs document for the `reason` command: a `inputs` list of
/// `{var, term, degree}` entries.
pub fn parse_inputs(text: &str) -> Result<Vec<(Proposition, f64)>> {
    let raw: RawInputs = toml::from_str(text).map_err(|e| Error::Syntax(e.to_string()))?;
    raw.inputs.iter().map(given).collect()
}
