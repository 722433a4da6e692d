//! Acceptance gate: one test per criterion, each printing a PASS/FAIL line
//! (visible with `--nocapture` or on failure).

use std::collections::BTreeSet;
use std::panic::{catch_unwind, resume_unwind, UnwindSafe};

use fpnverify::inference::{forward_chain, InferenceConfig, TruthAssignment};
use fpnverify::reachability::{build_reachability_graph, initial_marking};
use fpnverify::rulebase::{
    normalize_model, BehaviorModel, Connective, Proposition, PropertyKind, Rule, RuleKind,
    VariableDecl,
};
use fpnverify::validation::{dynamic_validate, static_validate, RuleBaseChoice, Verdict};
use fpnverify::verification::{
    detect_circularity, detect_incompleteness, detect_redundancy, verify, Finding, FindingKind,
};
use fpnverify::{build_fpn, parse_model, parse_referent, FuzzyPetriNet};

const TOLERANCE: f64 = 1e-9;

fn criterion<F: FnOnce() + UnwindSafe>(n: u32, name: &str, f: F) {
    let outcome = catch_unwind(f);
    let verdict = if outcome.is_ok() { "PASS" } else { "FAIL" };
    println!("criterion {n} ({name}): {verdict}");
    if let Err(cause) = outcome {
        resume_unwind(cause);
    }
}

fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {path}: {e}"))
}

fn case_study() -> BehaviorModel {
    parse_model(&fixture("casestudy.toml")).unwrap()
}

fn fired_rules(net: &FuzzyPetriNet, fired: &[usize]) -> BTreeSet<String> {
    fired
        .iter()
        .map(|t| net.transitions()[*t].source_rule.clone())
        .collect()
}

fn rule_set(ids: &[&str]) -> BTreeSet<String> {
    ids.iter().map(|s| s.to_string()).collect()
}

fn finding_pairs(findings: &[Finding]) -> BTreeSet<(FindingKind, Vec<String>)> {
    findings
        .iter()
        .map(|f| {
            (
                f.kind,
                f.rule_subjects().iter().map(|s| s.to_string()).collect(),
            )
        })
        .collect()
}

#[test]
fn criterion_1_case_study_structure() {
    criterion(1, "case-study net structure", || {
        let model = case_study();
        let clauses = normalize_model(&model);
        let net = build_fpn(&clauses, &model);
        assert_eq!(net.places().len(), 28);
        let count = |kind: PropertyKind| net.places().iter().filter(|p| p.kind == kind).count();
        assert_eq!(count(PropertyKind::Input), 18);
        assert_eq!(count(PropertyKind::Internal), 8);
        assert_eq!(count(PropertyKind::Output), 2);
        assert_eq!(net.transitions().len(), 10);
    });
}

#[test]
fn criterion_2_reachability_graph() {
    criterion(2, "case-study reachability graph", || {
        let model = case_study();
        let clauses = normalize_model(&model);
        let net = build_fpn(&clauses, &model);
        let graph = build_reachability_graph(&net, &initial_marking(&net));

        assert_eq!(graph.nodes.len(), 3, "root + two steps");
        assert_eq!(graph.edges.len(), 2);
        assert_eq!(
            fired_rules(&net, &graph.edges[0].fired),
            rule_set(&["R1", "R2", "R3", "R4", "R6", "R7", "R8", "R9"])
        );
        assert_eq!(
            fired_rules(&net, &graph.edges[1].fired),
            rule_set(&["R5", "R10"])
        );
        let final_marking = graph.final_marking();
        assert_eq!(final_marking.marked_count(), net.places().len());
        assert!(!graph.looped);
        assert!(graph.no_effect_firings.is_empty());
    });
}

#[test]
fn criterion_3_case_study_verification() {
    criterion(3, "case-study verification verdicts", || {
        let model = case_study();
        let report = verify(&model);

        assert_eq!(report.findings.len(), 1);
        let finding = &report.findings[0];
        assert_eq!(finding.kind, FindingKind::CandidateInconsistency);
        let rules: BTreeSet<String> = finding
            .rule_subjects()
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(rules, rule_set(&["R4", "R9"]));
        let places = finding.place_subjects();
        assert_eq!(places.len(), 2);
        assert!(places.iter().all(|p| p.variable == "Att"));

        let revised = model.without_rules(&["R9".to_string()]).unwrap();
        assert!(verify(&revised).findings.is_empty());
    });
}

#[test]
fn criterion_4_toy_fixtures() {
    criterion(4, "toy fixtures exact finding sets", || {
        let toy = |name: &str| parse_model(&fixture(&format!("toys/{name}.toml"))).unwrap();

        let report = verify(&toy("incompleteness"));
        assert_eq!(report.findings.len(), 2);
        let dangling = report
            .findings
            .iter()
            .find(|f| f.kind == FindingKind::DanglingAntecedent)
            .expect("dangling finding");
        assert_eq!(
            dangling.place_subjects(),
            vec![&Proposition::new("P3", "t").unwrap()]
        );
        let dead_end = report
            .findings
            .iter()
            .find(|f| f.kind == FindingKind::DeadEndConsequent)
            .expect("dead-end finding");
        assert_eq!(
            dead_end.place_subjects(),
            vec![&Proposition::new("P4", "t").unwrap()]
        );

        let report = verify(&toy("inconsistency"));
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].kind, FindingKind::ExplicitInconsistency);
        assert!(report.findings[0].rule_subjects().contains(&"r3"));

        let report = verify(&toy("circularity"));
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].kind, FindingKind::Circularity);
        let cycle: BTreeSet<String> = report.findings[0]
            .rule_subjects()
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(cycle, rule_set(&["r1", "r2", "r3"]));

        let report = verify(&toy("redundancy"));
        let expected: BTreeSet<(FindingKind, Vec<String>)> = [
            (FindingKind::DuplicateRule, vec!["r1", "r2"]),
            (FindingKind::SubsumedByCondition, vec!["r1", "r3"]),
            (FindingKind::SubsumedByCondition, vec!["r2", "r3"]),
            (FindingKind::SubsumedByConclusion, vec!["r4", "r5"]),
        ]
        .into_iter()
        .map(|(k, ids)| (k, ids.into_iter().map(str::to_string).collect()))
        .collect();
        assert_eq!(finding_pairs(&report.findings), expected);
    });
}

#[test]
fn criterion_5_static_validation() {
    criterion(5, "static validation set differences", || {
        let model = case_study().without_rules(&["R9".to_string()]).unwrap();
        let referent = parse_referent(&fixture("referent.toml")).unwrap();
        let report = static_validate(&model, &referent);

        assert!(report.missing_input_props.is_empty());
        assert_eq!(
            report.missing_internal_props,
            BTreeSet::from(["scientific_reputation".to_string()])
        );
        assert!(report.missing_output_props.is_empty());
        assert_eq!(report.missing_rules, vec!["R3ref", "R7ref"]);
        assert_eq!(report.extra_rules, vec!["R3", "R7"]);
        assert!(report.cf_mismatches.is_empty());
    });
}

#[test]
fn criterion_6_dynamic_validation() {
    criterion(6, "dynamic validation computations", || {
        let model = case_study();
        let referent = parse_referent(&fixture("referent.toml")).unwrap();
        let cfg = InferenceConfig::default();
        let report =
            dynamic_validate(RuleBaseChoice::Referent, &model, &referent, &cfg).unwrap();

        assert_eq!(report.outcomes.len(), 3);
        let expected = [
            ("Tea", "vh", 0.6175, Verdict::Fail),
            ("Reg", "h", 0.455, Verdict::Pass),
            ("Pop", "h", 0.29925, Verdict::Fail),
        ];
        for (outcome, (var, term, degree, verdict)) in report.outcomes.iter().zip(expected) {
            assert_eq!(outcome.target, Proposition::new(var, term).unwrap());
            assert!(
                (outcome.computed - degree).abs() < TOLERANCE,
                "{var}({term}): {} vs {degree}",
                outcome.computed
            );
            assert_eq!(outcome.verdict, verdict);
        }

        // Intermediate chain values of the third reference value.
        let base = &referent.model;
        let clauses = normalize_model(base);
        let net = build_fpn(&clauses, base);
        let chain_cfg = InferenceConfig {
            term_fallback: true,
            ..cfg
        };
        let inputs =
            TruthAssignment::from_inputs(&net, &referent.ref_values[2].givens).unwrap();
        let degrees = forward_chain(&net, &clauses, &inputs, &chain_cfg).unwrap();
        let degree_of = |var: &str, term: &str| {
            degrees.degree(net.place_index(&Proposition::new(var, term).unwrap()).unwrap())
        };
        assert!((degree_of("Beh", "vh") - 0.315).abs() < TOLERANCE);
        assert!((degree_of("Att", "m") - 0.4875).abs() < TOLERANCE);

        // A slack of 0.00075 marks the third value as a near miss.
        let near_cfg = InferenceConfig {
            epsilon: 0.00075,
            ..cfg
        };
        let near =
            dynamic_validate(RuleBaseChoice::Referent, &model, &referent, &near_cfg).unwrap();
        assert!(!near.outcomes[0].near_miss);
        assert!(!near.outcomes[1].near_miss);
        assert!(near.outcomes[2].near_miss);
    });
}

// ---------------------------------------------------------------------------
// Criterion 7: randomized properties, >= 1000 cases each.

mod random_models {
    use super::*;
    use proptest::prelude::*;

    /// Specification of one random layered clause: consequent variable
    /// index, bitmask over lower-indexed variables as antecedents, cf.
    pub type ClauseSpec = (usize, u8, f64);

    #[derive(Debug, Clone)]
    pub struct ModelSpec {
        pub nvars: usize,
        pub clauses: Vec<ClauseSpec>,
        pub input_degrees: [f64; 2],
    }

    /// Layered models: v0, v1 inputs, the last variable an output, the rest
    /// internal; every clause points from lower-indexed variables to a
    /// strictly higher-indexed one, so the net is acyclic by construction.
    pub fn model_spec() -> impl Strategy<Value = ModelSpec> {
        (3usize..=6)
            .prop_flat_map(|nvars| {
                (
                    Just(nvars),
                    prop::collection::vec(
                        (2usize..nvars, any::<u8>(), 0.05f64..=1.0),
                        1..8,
                    ),
                    prop::array::uniform2(0.0f64..=1.0),
                )
            })
            .prop_map(|(nvars, clauses, input_degrees)| ModelSpec {
                nvars,
                clauses,
                input_degrees,
            })
    }

    pub fn var_name(i: usize) -> String {
        format!("v{i}")
    }

    /// A variable whose only linguistic term is `t`.
    pub fn decl(name: &str, kind: PropertyKind) -> VariableDecl {
        let terms = vec![fpnverify::LinguisticTerm::new("t").unwrap()];
        VariableDecl::new(name, kind, Some(terms)).unwrap()
    }

    pub fn prop_of(i: usize) -> Proposition {
        Proposition::new(&var_name(i), "t").unwrap()
    }

    pub fn build(spec: &ModelSpec) -> BehaviorModel {
        let variables = (0..spec.nvars)
            .map(|i| {
                let kind = if i < 2 {
                    PropertyKind::Input
                } else if i == spec.nvars - 1 {
                    PropertyKind::Output
                } else {
                    PropertyKind::Internal
                };
                decl(&var_name(i), kind)
            })
            .collect();
        let rules = spec
            .clauses
            .iter()
            .enumerate()
            .map(|(n, (target, mask, cf))| {
                let mut antecedents: Vec<Proposition> = (0..*target)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(prop_of)
                    .collect();
                if antecedents.is_empty() {
                    antecedents.push(prop_of(0));
                }
                Rule::new(
                    &format!("r{n}"),
                    RuleKind::Normal,
                    antecedents,
                    Connective::And,
                    vec![prop_of(*target)],
                    *cf,
                )
                .unwrap()
            })
            .collect();
        BehaviorModel::new("random", variables, rules).unwrap()
    }

    /// The given degrees restricted to input places the net actually has
    /// (a random model may never mention one of the declared inputs).
    pub fn present_inputs(net: &FuzzyPetriNet, degrees: [f64; 2]) -> Vec<(Proposition, f64)> {
        [(prop_of(0), degrees[0]), (prop_of(1), degrees[1])]
            .into_iter()
            .filter(|(p, _)| net.place_index(p).is_some())
            .collect()
    }

    pub fn chain(model: &BehaviorModel, degrees: [f64; 2]) -> (FuzzyPetriNet, TruthAssignment) {
        let clauses = normalize_model(model);
        let net = build_fpn(&clauses, model);
        let inputs =
            TruthAssignment::from_inputs(&net, &present_inputs(&net, degrees)).unwrap();
        let result =
            forward_chain(&net, &clauses, &inputs, &InferenceConfig::default()).unwrap();
        (net, result)
    }
}

#[test]
fn criterion_7_property_suite() {
    use proptest::prelude::*;
    use proptest::test_runner::{Config, TestRunner};
    use random_models::*;

    criterion(7, "randomized property suite", || {
        let config = Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        };

        // (a) forward_chain is clause-order independent.
        TestRunner::new(config.clone())
            .run(
                &(model_spec(), any::<u64>()),
                |(spec, seed)| {
                    let model = build(&spec);
                    let clauses = normalize_model(&model);
                    let net = build_fpn(&clauses, &model);
                    let inputs =
                        TruthAssignment::from_inputs(&net, &present_inputs(&net, spec.input_degrees))
                            .unwrap();
                    let cfg = InferenceConfig::default();
                    let baseline = forward_chain(&net, &clauses, &inputs, &cfg).unwrap();

                    // Poor man's shuffle: rotate by the seed and reverse.
                    let mut shuffled = clauses.clone();
                    let rotation = seed as usize % shuffled.len();
                    shuffled.rotate_left(rotation);
                    shuffled.reverse();
                    let permuted = forward_chain(&net, &shuffled, &inputs, &cfg).unwrap();
                    for (place, degree) in baseline.iter() {
                        prop_assert!((permuted.degree(place) - degree).abs() < 1e-12);
                    }
                    Ok(())
                },
            )
            .unwrap();

        // (b) outputs are monotone in inputs.
        TestRunner::new(config.clone())
            .run(
                &(model_spec(), 0usize..2, 0.0f64..=1.0),
                |(spec, which, bump)| {
                    let model = build(&spec);
                    let (_, low) = chain(&model, spec.input_degrees);
                    let mut raised = spec.input_degrees;
                    raised[which] = raised[which].max(bump);
                    let (_, high) = chain(&model, raised);
                    for (place, degree) in low.iter() {
                        prop_assert!(high.degree(place) >= degree - 1e-12);
                    }
                    Ok(())
                },
            )
            .unwrap();

        // (c) a derived degree never exceeds the smallest antecedent degree
        // of the clause that produced it (cf <= 1 attenuates).
        TestRunner::new(config.clone())
            .run(&model_spec(), |spec| {
                let model = build(&spec);
                let clauses = normalize_model(&model);
                let (net, result) = chain(&model, spec.input_degrees);
                for place in net.places() {
                    if place.kind == PropertyKind::Input {
                        continue;
                    }
                    let degree = result.degree(place.index);
                    if degree <= 0.0 {
                        continue;
                    }
                    let supported = clauses.iter().any(|c| {
                        c.consequent.as_ref().and_then(|p| net.place_index(p))
                            == Some(place.index)
                            && {
                                let min_antecedent = c
                                    .antecedents
                                    .iter()
                                    .map(|a| result.degree(net.place_index(a).unwrap()))
                                    .fold(f64::INFINITY, f64::min);
                                (min_antecedent * c.cf - degree).abs() < 1e-12
                                    && degree <= min_antecedent + 1e-12
                            }
                    });
                    prop_assert!(supported, "place {} unexplained", place.index);
                }
                Ok(())
            })
            .unwrap();

        // (d) injected structural errors are detected.
        TestRunner::new(config.clone())
            .run(&(model_spec(), any::<u16>()), |(spec, pick)| {
                let model = build(&spec);
                let clauses = normalize_model(&model);
                let net = build_fpn(&clauses, &model);

                // Duplicated rule => DuplicateRule naming both ids.
                let source = &model.rules()[pick as usize % model.rules().len()];
                let mut rules = model.rules().to_vec();
                rules.push(
                    Rule::new(
                        "dup",
                        RuleKind::Normal,
                        source.antecedents().to_vec(),
                        Connective::And,
                        source.consequents().to_vec(),
                        source.cf(),
                    )
                    .unwrap(),
                );
                let dup_clauses: Vec<_> = rules.iter().flat_map(fpnverify::normalize).collect();
                let findings = detect_redundancy(&dup_clauses, &rules);
                prop_assert!(findings.iter().any(|f| f.kind == FindingKind::DuplicateRule
                    && f.rule_subjects().contains(&"dup")
                    && f.rule_subjects().contains(&source.id())));

                // Fresh unproduced antecedent => DanglingAntecedent.
                let mut variables = model.variables().to_vec();
                variables.push(decl("fresh", PropertyKind::Internal));
                let mut rules = model.rules().to_vec();
                rules.push(
                    Rule::new(
                        "needs_fresh",
                        RuleKind::Normal,
                        vec![Proposition::new("fresh", "t").unwrap()],
                        Connective::And,
                        vec![prop_of(spec.nvars - 1)],
                        1.0,
                    )
                    .unwrap(),
                );
                let dangling_model = BehaviorModel::new("dangling", variables, rules).unwrap();
                let dangling_clauses = normalize_model(&dangling_model);
                let dangling_net = build_fpn(&dangling_clauses, &dangling_model);
                let findings =
                    detect_incompleteness(&dangling_net, &dangling_clauses, &dangling_model);
                prop_assert!(findings
                    .iter()
                    .any(|f| f.kind == FindingKind::DanglingAntecedent
                        && f.place_subjects()
                            .iter()
                            .any(|p| p.variable == "fresh")));

                // Artificially closed cycle => Circularity.
                let mut variables = model.variables().to_vec();
                for extra in ["c1", "c2"] {
                    variables.push(decl(extra, PropertyKind::Internal));
                }
                let mut rules = model.rules().to_vec();
                for (id, from, to) in [("loop1", "c1", "c2"), ("loop2", "c2", "c1")] {
                    rules.push(
                        Rule::new(
                            id,
                            RuleKind::Normal,
                            vec![Proposition::new(from, "t").unwrap()],
                            Connective::And,
                            vec![Proposition::new(to, "t").unwrap()],
                            1.0,
                        )
                        .unwrap(),
                    );
                }
                let cyclic_model = BehaviorModel::new("cyclic", variables, rules).unwrap();
                let findings = detect_circularity(&normalize_model(&cyclic_model));
                prop_assert!(findings.iter().any(|f| f.kind == FindingKind::Circularity
                    && f.rule_subjects().contains(&"loop1")
                    && f.rule_subjects().contains(&"loop2")));

                drop(net);
                Ok(())
            })
            .unwrap();

        // (e) normalize-then-infer equals direct rule evaluation for a
        // single rule of each shape, against a brute-force oracle.
        TestRunner::new(config)
            .run(
                &(
                    prop::collection::vec(0.0f64..=1.0, 5),
                    1usize..=4,
                    1usize..=2,
                    0.05f64..=1.0,
                    prop::bool::ANY,
                ),
                |(degrees, nante, ncons, cf, or_rule)| {
                    // Places x0..x4 are inputs, y0/y1 outputs.
                    let mut variables: Vec<VariableDecl> = (0..5)
                        .map(|i| decl(&format!("x{i}"), PropertyKind::Input))
                        .collect();
                    for j in 0..2 {
                        variables.push(decl(&format!("y{j}"), PropertyKind::Output));
                    }
                    let antecedents: Vec<Proposition> = (0..nante)
                        .map(|i| Proposition::new(&format!("x{i}"), "t").unwrap())
                        .collect();
                    let (connective, ncons) = if or_rule {
                        (Connective::Or, 1)
                    } else {
                        (Connective::And, ncons)
                    };
                    let consequents: Vec<Proposition> = (0..ncons)
                        .map(|j| Proposition::new(&format!("y{j}"), "t").unwrap())
                        .collect();
                    let rule = Rule::new(
                        "r",
                        RuleKind::Normal,
                        antecedents.clone(),
                        connective,
                        consequents.clone(),
                        cf,
                    )
                    .unwrap();
                    let model = BehaviorModel::new("one", variables, vec![rule]).unwrap();
                    let clauses = normalize_model(&model);
                    let net = build_fpn(&clauses, &model);
                    let given: Vec<(Proposition, f64)> = antecedents
                        .iter()
                        .cloned()
                        .zip(degrees.iter().copied())
                        .collect();
                    let inputs = TruthAssignment::from_inputs(&net, &given).unwrap();
                    let result =
                        forward_chain(&net, &clauses, &inputs, &InferenceConfig::default())
                            .unwrap();

                    let ante_degrees = &degrees[..nante];
                    let expected = if or_rule {
                        ante_degrees.iter().fold(0.0f64, |acc, d| acc.max(d * cf))
                    } else {
                        ante_degrees.iter().fold(f64::INFINITY, |a, b| a.min(*b)) * cf
                    };
                    for consequent in &consequents {
                        let place = net.place_index(consequent).unwrap();
                        prop_assert!((result.degree(place) - expected).abs() < 1e-12);
                    }
                    Ok(())
                },
            )
            .unwrap();
    });
}

#[test]
fn criterion_8_cli_determinism() {
    criterion(8, "byte-identical CLI reruns", || {
        let bin = env!("CARGO_BIN_EXE_fpnverify");
        let root = format!("{}/../../fixtures", env!("CARGO_MANIFEST_DIR"));
        let path = |name: &str| format!("{root}/{name}");

        let mut invocations: Vec<Vec<String>> = Vec::new();
        for model in [
            "casestudy.toml",
            "toys/incompleteness.toml",
            "toys/inconsistency.toml",
            "toys/circularity.toml",
            "toys/redundancy.toml",
        ] {
            invocations.push(vec!["verify".into(), path(model)]);
            invocations.push(vec![
                "export-dot".into(),
                path(model),
                "--kind".into(),
                "net".into(),
            ]);
            invocations.push(vec![
                "export-dot".into(),
                path(model),
                "--kind".into(),
                "reachability".into(),
            ]);
        }
        invocations.push(vec![
            "validate-static".into(),
            path("casestudy.toml"),
            path("referent.toml"),
        ]);
        invocations.push(vec![
            "validate-dynamic".into(),
            path("casestudy.toml"),
            path("referent.toml"),
        ]);
        invocations.push(vec![
            "reason".into(),
            path("casestudy.toml"),
            path("refvalue3.inputs.toml"),
        ]);

        for format in ["text", "structured"] {
            for args in &invocations {
                let run = || {
                    std::process::Command::new(bin)
                        .arg("--format")
                        .arg(format)
                        .args(args)
                        .output()
                        .expect("spawn fpnverify")
                };
                let first = run();
                let second = run();
                assert_eq!(
                    first.stdout, second.stdout,
                    "stdout differs: --format {format} {args:?}"
                );
                assert_eq!(first.stderr, second.stderr);
                assert_eq!(first.status.code(), second.status.code());
            }
        }
    });
}
