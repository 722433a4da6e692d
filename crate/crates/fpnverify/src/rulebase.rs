//! Rule-base data model: linguistic propositions, rules with certainty
//! factors, behavior models partitioned into input/internal/output
//! properties, and Horn-clause normalization.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Default vocabulary used when a variable declares no terms of its own.
pub const DEFAULT_TERMS: [&str; 5] = ["vl", "l", "m", "h", "vh"];

/// A linguistic value such as `vl`, `m` or `vh`.
///
/// Labels are compared by exact equality after trimming and case-folding,
/// which happens once at construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LinguisticTerm(String);

impl LinguisticTerm {
    pub fn new(label: &str) -> Result<Self> {
        let normalized = label.trim().to_lowercase();
        if normalized.is_empty() {
            return Err(Error::schema(label, "linguistic term label is empty"));
        }
        Ok(LinguisticTerm(normalized))
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LinguisticTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A (possibly negated) statement "variable is term".
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Proposition {
    pub variable: String,
    pub term: LinguisticTerm,
    pub negated: bool,
}

impl Proposition {
    pub fn new(variable: &str, term: &str) -> Result<Self> {
        Self::build(variable, term, false)
    }

    pub fn negation_of(variable: &str, term: &str) -> Result<Self> {
        Self::build(variable, term, true)
    }

    fn build(variable: &str, term: &str, negated: bool) -> Result<Self> {
        let variable = variable.trim().to_string();
        if variable.is_empty() {
            return Err(Error::schema(variable, "variable identifier is empty"));
        }
        Ok(Proposition {
            variable,
            term: LinguisticTerm::new(term)?,
            negated,
        })
    }

    /// The same statement with the negation flag flipped.
    pub fn negated_twin(&self) -> Proposition {
        Proposition {
            variable: self.variable.clone(),
            term: self.term.clone(),
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "~{}({})", self.variable, self.term)
        } else {
            write!(f, "{}({})", self.variable, self.term)
        }
    }
}

/// How a rule's antecedents are joined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Connective {
    And,
    Or,
}

/// Source rules (`fact`) fire unconditionally, sink rules (`query`) consume
/// without producing; everything else is `normal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Normal,
    Fact,
    Query,
}

/// Which partition of the model a variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyKind {
    Input,
    Internal,
    Output,
}

/// A declared model variable together with its term vocabulary.
#[derive(Debug, Clone)]
pub struct VariableDecl {
    pub id: String,
    pub kind: PropertyKind,
    pub terms: Vec<LinguisticTerm>,
}

impl VariableDecl {
    pub fn new(id: &str, kind: PropertyKind, terms: Option<Vec<LinguisticTerm>>) -> Result<Self> {
        let id = id.trim().to_string();
        if id.is_empty() {
            return Err(Error::schema(&id, "variable identifier is empty"));
        }
        let terms = match terms {
            Some(ts) if !ts.is_empty() => ts,
            Some(_) => {
                return Err(Error::schema(&id, "term vocabulary must not be empty"));
            }
            None => DEFAULT_TERMS
                .iter()
                .map(|t| LinguisticTerm::new(t))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(VariableDecl { id, kind, terms })
    }
}

/// An uncertain rule: `if <antecedents> then <consequents>` with a
/// certainty factor in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    id: String,
    kind: RuleKind,
    antecedents: Vec<Proposition>,
    connective: Connective,
    consequents: Vec<Proposition>,
    cf: f64,
}

fn check_cf(element: &str, cf: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&cf) {
        return Err(Error::schema(
            element,
            format!("certainty factor {cf} outside [0, 1]"),
        ));
    }
    Ok(())
}

impl Rule {
    pub fn new(
        id: &str,
        kind: RuleKind,
        antecedents: Vec<Proposition>,
        connective: Connective,
        consequents: Vec<Proposition>,
        cf: f64,
    ) -> Result<Self> {
        let id = id.trim().to_string();
        if id.is_empty() {
            return Err(Error::schema(&id, "rule identifier is empty"));
        }
        check_cf(&id, cf)?;
        match kind {
            RuleKind::Normal => {
                if antecedents.is_empty() || consequents.is_empty() {
                    return Err(Error::schema(
                        &id,
                        "normal rules need at least one antecedent and one consequent",
                    ));
                }
            }
            RuleKind::Fact => {
                if !antecedents.is_empty() {
                    return Err(Error::schema(&id, "fact rules must have no antecedents"));
                }
                if consequents.is_empty() {
                    return Err(Error::schema(&id, "fact rules need at least one consequent"));
                }
            }
            RuleKind::Query => {
                if !consequents.is_empty() {
                    return Err(Error::schema(&id, "query rules must have no consequents"));
                }
                if antecedents.is_empty() {
                    return Err(Error::schema(&id, "query rules need at least one antecedent"));
                }
            }
        }
        if connective == Connective::Or && consequents.len() > 1 {
            return Err(Error::schema(
                &id,
                "an OR rule may only have a single consequent",
            ));
        }
        let mut seen = HashSet::new();
        for p in antecedents.iter().chain(consequents.iter()) {
            if !seen.insert(p.clone()) {
                return Err(Error::schema(
                    &id,
                    format!("proposition {p} appears more than once in the rule"),
                ));
            }
        }
        Ok(Rule {
            id,
            kind,
            antecedents,
            connective,
            consequents,
            cf,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn antecedents(&self) -> &[Proposition] {
        &self.antecedents
    }

    pub fn connective(&self) -> Connective {
        self.connective
    }

    pub fn consequents(&self) -> &[Proposition] {
        &self.consequents
    }

    pub fn cf(&self) -> f64 {
        self.cf
    }

    pub fn antecedent_set(&self) -> BTreeSet<&Proposition> {
        self.antecedents.iter().collect()
    }

    pub fn consequent_set(&self) -> BTreeSet<&Proposition> {
        self.consequents.iter().collect()
    }
}

/// An AND-joined rule with at most one consequent, the normalization target
/// for every rule kind. Query rules keep `consequent: None`.
#[derive(Debug, Clone, PartialEq)]
pub struct HornClause {
    pub source_rule: String,
    pub antecedents: Vec<Proposition>,
    pub consequent: Option<Proposition>,
    pub cf: f64,
}

impl HornClause {
    pub fn antecedent_set(&self) -> BTreeSet<&Proposition> {
        self.antecedents.iter().collect()
    }
}

/// Split a rule into Horn clauses.
///
/// AND rules yield one clause per consequent with identical antecedents;
/// OR rules yield one clause per antecedent; the certainty factor is
/// carried over unchanged and every clause remembers its source rule.
pub fn normalize(rule: &Rule) -> Vec<HornClause> {
    match rule.kind {
        RuleKind::Query => vec![HornClause {
            source_rule: rule.id.clone(),
            antecedents: rule.antecedents.clone(),
            consequent: None,
            cf: rule.cf,
        }],
        RuleKind::Fact => rule
            .consequents
            .iter()
            .map(|c| HornClause {
                source_rule: rule.id.clone(),
                antecedents: Vec::new(),
                consequent: Some(c.clone()),
                cf: rule.cf,
            })
            .collect(),
        RuleKind::Normal => match rule.connective {
            Connective::And => rule
                .consequents
                .iter()
                .map(|c| HornClause {
                    source_rule: rule.id.clone(),
                    antecedents: rule.antecedents.clone(),
                    consequent: Some(c.clone()),
                    cf: rule.cf,
                })
                .collect(),
            Connective::Or => rule
                .antecedents
                .iter()
                .map(|a| HornClause {
                    source_rule: rule.id.clone(),
                    antecedents: vec![a.clone()],
                    consequent: Some(rule.consequents[0].clone()),
                    cf: rule.cf,
                })
                .collect(),
        },
    }
}

/// A named rule base partitioned into input, internal and output properties.
#[derive(Debug, Clone)]
pub struct BehaviorModel {
    name: String,
    variables: Vec<VariableDecl>,
    rules: Vec<Rule>,
}

impl BehaviorModel {
    pub fn new(name: &str, variables: Vec<VariableDecl>, rules: Vec<Rule>) -> Result<Self> {
        let name = name.trim().to_string();
        let mut by_id: HashMap<&str, &VariableDecl> = HashMap::new();
        for v in &variables {
            if by_id.insert(&v.id, v).is_some() {
                return Err(Error::schema(
                    &v.id,
                    "variable is declared more than once",
                ));
            }
        }
        let mut rule_ids = HashSet::new();
        for rule in &rules {
            if !rule_ids.insert(rule.id.clone()) {
                return Err(Error::schema(&rule.id, "duplicate rule id"));
            }
            for (prop, side) in rule
                .antecedents
                .iter()
                .map(|p| (p, "antecedent"))
                .chain(rule.consequents.iter().map(|p| (p, "consequent")))
            {
                let decl = by_id.get(prop.variable.as_str()).ok_or_else(|| {
                    Error::schema(
                        &rule.id,
                        format!("{side} references undeclared variable `{}`", prop.variable),
                    )
                })?;
                if !decl.terms.contains(&prop.term) {
                    return Err(Error::schema(
                        &rule.id,
                        format!(
                            "term `{}` is not in the vocabulary of variable `{}`",
                            prop.term, prop.variable
                        ),
                    ));
                }
                match (side, decl.kind) {
                    ("consequent", PropertyKind::Input) => {
                        return Err(Error::schema(
                            &rule.id,
                            format!(
                                "consequent variable `{}` must be an internal or output property",
                                prop.variable
                            ),
                        ));
                    }
                    // Query rules may observe any variable, including outputs.
                    ("antecedent", PropertyKind::Output) if rule.kind != RuleKind::Query => {
                        return Err(Error::schema(
                            &rule.id,
                            format!(
                                "antecedent variable `{}` must be an input or internal property",
                                prop.variable
                            ),
                        ));
                    }
                    _ => {}
                }
            }
        }
        Ok(BehaviorModel {
            name,
            variables,
            rules,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[VariableDecl] {
        &self.variables
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn kind_of(&self, variable: &str) -> Option<PropertyKind> {
        self.variables
            .iter()
            .find(|v| v.id == variable)
            .map(|v| v.kind)
    }

    pub fn variables_of_kind(&self, kind: PropertyKind) -> impl Iterator<Item = &str> {
        self.variables
            .iter()
            .filter(move |v| v.kind == kind)
            .map(|v| v.id.as_str())
    }

    /// A copy of the model with the given rules removed, used to apply an
    /// SME refinement decision before analysis.
    pub fn without_rules(&self, drop: &[String]) -> Result<BehaviorModel> {
        for id in drop {
            if !self.rules.iter().any(|r| &r.id == id) {
                return Err(Error::UnknownRule(id.clone()));
            }
        }
        let rules = self
            .rules
            .iter()
            .filter(|r| !drop.contains(&r.id))
            .cloned()
            .collect();
        BehaviorModel::new(&self.name, self.variables.clone(), rules)
    }
}

/// Normalize every rule of the model, preserving rule order.
pub fn normalize_model(model: &BehaviorModel) -> Vec<HornClause> {
    model.rules().iter().flat_map(normalize).collect()
}
