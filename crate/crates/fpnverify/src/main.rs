use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fpnverify::inference::{forward_chain, InferenceConfig, TruthAssignment};
use fpnverify::reachability::{build_reachability_graph, export_graph_dot, initial_marking};
use fpnverify::rulebase::{normalize_model, BehaviorModel};
use fpnverify::validation::{dynamic_validate, static_validate, RuleBaseChoice};
use fpnverify::{build_fpn, export_dot, parse_inputs, parse_model, parse_referent, report, verify};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Base {
    Model,
    Referent,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DotKind {
    /// The fuzzy Petri net itself.
    Net,
    /// The omega-reachability graph.
    Reachability,
}

#[derive(Parser)]
#[command(name = "fpnverify", version, about = "Verify and validate fuzzy rule bases via fuzzy Petri nets")]
struct Cli {
    /// Output format (also via FPNVERIFY_FORMAT).
    #[arg(long, global = true, value_enum, default_value = "text", env = "FPNVERIFY_FORMAT")]
    format: Format,

    /// Rule ids to drop from the model before analysis (SME refinement).
    #[arg(long, global = true, value_delimiter = ',')]
    drop_rules: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect structural errors in a model.
    Verify { model: PathBuf },
    /// Compare property and rule sets against a referent.
    ValidateStatic { model: PathBuf, referent: PathBuf },
    /// Reason the net against the referent's reference values.
    ValidateDynamic {
        model: PathBuf,
        referent: PathBuf,
        /// Which rule base to reason over.
        #[arg(long, value_enum, default_value = "referent")]
        use_base: Base,
        /// Enabling threshold for clause firing.
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
        /// Near-miss slack around assertion bounds.
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
    /// Forward-chain a model on an inputs document and print all degrees.
    Reason {
        model: PathBuf,
        inputs: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
    },
    /// Export the net (or reachability graph) as DOT.
    ExportDot {
        model: PathBuf,
        /// Write here instead of standard output.
        #[arg(long)]
        dot_path: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "net")]
        kind: DotKind,
    },
}

fn read(path: &PathBuf) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read `{}`: {e}", path.display()))
}

fn load_model(path: &PathBuf, drop_rules: &[String]) -> Result<BehaviorModel, String> {
    let text = read(path)?;
    let model = parse_model(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    model
        .without_rules(drop_rules)
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn check_unit(name: &str, value: f64) -> Result<(), String> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(format!("--{name} must be in [0, 1], got {value}"))
    }
}

fn run(cli: &Cli) -> Result<u8, String> {
    match &cli.command {
        Command::Verify { model } => {
            let model = load_model(model, &cli.drop_rules)?;
            let report_data = verify(&model);
            let out = match cli.format {
                Format::Text => report::verification_text(&report_data),
                Format::Structured => report::verification_structured(&report_data),
            };
            print!("{out}");
            Ok(if report_data.findings.is_empty() { 0 } else { 1 })
        }
        Command::ValidateStatic { model, referent } => {
            let model = load_model(model, &cli.drop_rules)?;
            let referent_text = read(referent)?;
            let referent = parse_referent(&referent_text)
                .map_err(|e| format!("{}: {e}", referent.display()))?;
            let report_data = static_validate(&model, &referent);
            let out = match cli.format {
                Format::Text => report::static_text(&report_data),
                Format::Structured => report::static_structured(&report_data),
            };
            print!("{out}");
            Ok(if report_data.is_clean() { 0 } else { 1 })
        }
        Command::ValidateDynamic {
            model,
            referent,
            use_base,
            threshold,
            epsilon,
        } => {
            check_unit("threshold", *threshold)?;
            check_unit("epsilon", *epsilon)?;
            let model = load_model(model, &cli.drop_rules)?;
            let referent_text = read(referent)?;
            let referent = parse_referent(&referent_text)
                .map_err(|e| format!("{}: {e}", referent.display()))?;
            let choice = match use_base {
                Base::Model => RuleBaseChoice::Model,
                Base::Referent => RuleBaseChoice::Referent,
            };
            let cfg = InferenceConfig {
                threshold: *threshold,
                epsilon: *epsilon,
                ..Default::default()
            };
            let report_data = dynamic_validate(choice, &model, &referent, &cfg)
                .map_err(|e| e.to_string())?;
            let out = match cli.format {
                Format::Text => report::dynamic_text(&report_data),
                Format::Structured => report::dynamic_structured(&report_data),
            };
            print!("{out}");
            Ok(if report_data.all_passed() { 0 } else { 1 })
        }
        Command::Reason {
            model,
            inputs,
            threshold,
        } => {
            check_unit("threshold", *threshold)?;
            let model = load_model(model, &cli.drop_rules)?;
            let inputs_text = read(inputs)?;
            let given =
                parse_inputs(&inputs_text).map_err(|e| format!("{}: {e}", inputs.display()))?;
            let clauses = normalize_model(&model);
            let net = build_fpn(&clauses, &model);
            let assignment =
                TruthAssignment::from_inputs(&net, &given).map_err(|e| e.to_string())?;
            let cfg = InferenceConfig {
                threshold: *threshold,
                ..Default::default()
            };
            let degrees =
                forward_chain(&net, &clauses, &assignment, &cfg).map_err(|e| e.to_string())?;
            let out = match cli.format {
                Format::Text => report::reasoning_text(&net, &degrees),
                Format::Structured => report::reasoning_structured(&net, &degrees),
            };
            print!("{out}");
            Ok(0)
        }
        Command::ExportDot {
            model,
            dot_path,
            kind,
        } => {
            let model = load_model(model, &cli.drop_rules)?;
            let clauses = normalize_model(&model);
            let net = build_fpn(&clauses, &model);
            let dot = match kind {
                DotKind::Net => export_dot(&net, None).map_err(|e| e.to_string())?,
                DotKind::Reachability => {
                    let graph = build_reachability_graph(&net, &initial_marking(&net));
                    export_graph_dot(&net, &graph)
                }
            };
            match dot_path {
                Some(path) => fs::write(path, dot)
                    .map_err(|e| format!("cannot write `{}`: {e}", path.display()))?,
                None => print!("{dot}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
