//! Command-line surface: loading models from files or the catalog,
//! dispatching analyses, and rendering reports.

use std::ffi::OsString;
use std::fmt::Write as _;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bell::{bellify, BellifyResult};
use crate::catalog;
use crate::extension::{canonical_extension, ExtensionReport};
use crate::format::{parse_model_file, render_csv, render_json, render_table};
use crate::ksgen::{random_ks_scenario, KsScenario, RandomKsConfig};
use crate::model::EmpiricalModel;
use crate::scenario::{power_cover, Context, MeasurementScenario};
use crate::solver;

/// Exit code for malformed input (bad files, unknown names, bad flags).
/// Analysis outcomes, including "contextual", are data and exit 0.
pub const EXIT_INPUT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "contextuality",
    about = "Build, validate, and classify finite empirical models",
    color = clap::ColorChoice::Never,
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format for model-valued results.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a model, reporting its shape.
    Validate { model: String },
    /// Place a model in the contextuality hierarchy.
    Classify { model: String },
    /// Possibilistic collapse: keep supports, forget probabilities.
    Collapse { model: String },
    /// Canonically extend a Boolean model to a larger cover.
    Extend {
        model: String,
        /// Target cover: `P<n>` for all n-subsets, or a literal such as
        /// `{ABD,BCD}` (labels may also be space-separated).
        #[arg(long)]
        to: String,
    },
    /// Build the equivalent Bell-type model.
    Bellify { model: String },
    /// Induced sub-model on a subset of the measurements.
    Submodel {
        model: String,
        /// Measurement labels to keep, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        keep: Vec<String>,
    },
    /// Generate a Kochen-Specker model from a cover or at random.
    KsGen {
        /// Cover literal such as `{AB,BC,CA}`.
        #[arg(long, conflicts_with = "random")]
        contexts: Option<String>,
        /// Sample a random constant-context-size cover.
        #[arg(long, requires_all = ["x", "n", "m"])]
        random: bool,
        /// Number of measurements (with --random).
        #[arg(long)]
        x: Option<usize>,
        /// Context size (with --random).
        #[arg(long)]
        n: Option<usize>,
        /// Number of contexts (with --random).
        #[arg(long)]
        m: Option<usize>,
        /// Random seed (with --random).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List or show the built-in example models.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
enum CatalogAction {
    /// One line per entry: name, expected class, note.
    List,
    /// Render one entry's model.
    Show { name: String },
}

/// Runs one invocation and returns its exit code and report text. The
/// binary prints the text and exits with the code; tests call this
/// directly.
pub fn run_command<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version are successful exits in clap's model.
            let code = if e.use_stderr() { EXIT_INPUT_ERROR } else { 0 };
            return (code, e.to_string());
        }
    };
    match dispatch(cli) {
        Ok(report) => (0, report),
        Err(report) => (EXIT_INPUT_ERROR, report),
    }
}

fn dispatch(cli: Cli) -> Result<String, String> {
    let format = cli.format;
    match cli.command {
        Command::Validate { model } => {
            let e = load_model(&model)?;
            Ok(format!(
                "valid: {} contexts over {} measurements ({:?} weights)\n",
                e.scenario().cover().len(),
                e.scenario().measurements().len(),
                e.semiring(),
            ))
        }
        Command::Classify { model } => {
            let e = load_model(&model)?;
            let class = solver::classify(&e).map_err(|err| format!("{err}\n"))?;
            Ok(match format {
                OutputFormat::Json => format!("{{\"class\": \"{class}\"}}\n"),
                OutputFormat::Csv => format!("class\n{class}\n"),
                OutputFormat::Table => format!("{class}\n"),
            })
        }
        Command::Collapse { model } => {
            let e = load_model(&model)?;
            Ok(render_model(&e.possibilistic_collapse(), format))
        }
        Command::Extend { model, to } => {
            let e = load_model(&model)?;
            let target = parse_cover_spec(e.scenario(), &to)?;
            let report = canonical_extension(&e, &target).map_err(|err| format!("{err}\n"))?;
            match report {
                ExtensionReport::WellDefined(f) => Ok(render_model(&f, format)),
                ExtensionReport::EmptySupport(ctx) => {
                    let scenario = describe_target(e.scenario(), &target)?;
                    Ok(format!(
                        "EmptySupport: no assignment on {} is consistent with every row\n",
                        scenario.context_label(&ctx)
                    ))
                }
                ExtensionReport::Incompatible(v) => {
                    let scenario = describe_target(e.scenario(), &target)?;
                    Ok(format!("Incompatible: {}\n", v.describe(&scenario)))
                }
            }
        }
        Command::Bellify { model } => {
            let e = load_model(&model)?;
            match bellify(&e).map_err(|err| format!("{err}\n"))? {
                BellifyResult::Model(bell) => Ok(render_model(&bell.model, format)),
                BellifyResult::Failed(ExtensionReport::EmptySupport(ctx)) => Ok(format!(
                    "extension failed: no consistent assignment on {}\n",
                    e.scenario().context_label(&ctx)
                )),
                BellifyResult::Failed(ExtensionReport::Incompatible(v)) => {
                    Ok(format!("extension failed: {v}\n"))
                }
                BellifyResult::Failed(ExtensionReport::WellDefined(_)) => unreachable!(),
            }
        }
        Command::Submodel { model, keep } => {
            let e = load_model(&model)?;
            let ctx = e
                .scenario()
                .context_from_labels(&keep)
                .map_err(|err| format!("{err}\n"))?;
            let sub = e.induced_submodel(&ctx).map_err(|err| format!("{err}\n"))?;
            Ok(render_model(&sub, format))
        }
        Command::KsGen { contexts, random, x, n, m, seed } => {
            let ks = if random {
                let cfg = RandomKsConfig {
                    measurements: x.unwrap(),
                    context_size: n.unwrap(),
                    contexts: m.unwrap(),
                    seed,
                };
                random_ks_scenario(cfg).map_err(|err| format!("{err}\n"))?
            } else {
                let spec = contexts.ok_or("one of --contexts or --random is required\n")?;
                ks_from_spec(&spec)?
            };
            Ok(render_model(&ks.ks_model(), format))
        }
        Command::Catalog { action } => match action {
            CatalogAction::List => Ok(render_catalog_list(format)),
            CatalogAction::Show { name } => {
                let entry = catalog::get(&name)
                    .ok_or_else(|| format!("no catalog entry named {name:?}\n"))?;
                Ok(render_model(&entry.model, format))
            }
        },
    }
}

/// Loads `catalog:NAME` or a model file path.
fn load_model(spec: &str) -> Result<EmpiricalModel, String> {
    if let Some(name) = spec.strip_prefix("catalog:") {
        return catalog::get(name)
            .map(|e| e.model)
            .ok_or_else(|| format!("no catalog entry named {name:?}\n"));
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|err| format!("cannot read {spec:?}: {err}\n"))?;
    parse_model_file(&text).map_err(|err| format!("{err}\n"))
}

fn render_model(model: &EmpiricalModel, format: OutputFormat) -> String {
    match format {
        OutputFormat::Table => render_table(model),
        OutputFormat::Json => {
            let mut s = render_json(model);
            s.push('\n');
            s
        }
        OutputFormat::Csv => render_csv(model),
    }
}

/// `P<n>` or a `{..,..}` literal of label lists; labels in a literal may
/// be space-separated or concatenated (resolved greedily).
fn parse_cover_spec(
    scenario: &MeasurementScenario,
    spec: &str,
) -> Result<Vec<Context>, String> {
    let spec = spec.trim();
    if let Some(n) = spec.strip_prefix('P').and_then(|rest| rest.parse::<usize>().ok()) {
        return power_cover(scenario.measurements().len(), n).map_err(|err| format!("{err}\n"));
    }
    let inner = spec
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .unwrap_or(spec);
    let mut cover = Vec::new();
    for part in inner.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(format!("empty context in cover literal {spec:?}\n"));
        }
        let labels = split_labels(scenario.measurements(), part)
            .ok_or_else(|| format!("cannot resolve context {part:?} against the measurements\n"))?;
        cover.push(
            scenario
                .context_from_labels(&labels)
                .map_err(|err| format!("{err}\n"))?,
        );
    }
    Ok(cover)
}

/// Splits a context token into measurement labels: on whitespace if any,
/// otherwise by greedy longest-prefix matching.
fn split_labels(measurements: &[String], token: &str) -> Option<Vec<String>> {
    if token.contains(char::is_whitespace) {
        return Some(token.split_whitespace().map(|s| s.to_string()).collect());
    }
    let mut out = Vec::new();
    let mut rest = token;
    while !rest.is_empty() {
        let best = measurements
            .iter()
            .filter(|m| rest.starts_with(m.as_str()))
            .max_by_key(|m| m.len())?;
        out.push(best.clone());
        rest = &rest[best.len()..];
    }
    Some(out)
}

fn describe_target(
    scenario: &MeasurementScenario,
    target: &[Context],
) -> Result<MeasurementScenario, String> {
    scenario.with_cover(target.to_vec()).map_err(|err| format!("{err}\n"))
}

/// Builds a Kochen-Specker scenario from a cover literal; the
/// measurement set is collected from the contexts in appearance order.
fn ks_from_spec(spec: &str) -> Result<KsScenario, String> {
    let inner = spec
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .unwrap_or(spec.trim());
    let mut measurements: Vec<String> = Vec::new();
    let mut cover: Vec<Vec<String>> = Vec::new();
    for part in inner.split(',') {
        let part = part.trim();
        let labels: Vec<String> = if part.contains(char::is_whitespace) {
            part.split_whitespace().map(|s| s.to_string()).collect()
        } else {
            // Without separators every character is one measurement.
            part.chars().map(|c| c.to_string()).collect()
        };
        for l in &labels {
            if !measurements.contains(l) {
                measurements.push(l.clone());
            }
        }
        cover.push(labels);
    }
    let scenario = MeasurementScenario::new(
        measurements,
        vec!["0".into(), "1".into()],
        cover,
    )
    .map_err(|err| format!("{err}\n"))?;
    KsScenario::new(scenario).map_err(|err| format!("{err}\n"))
}

fn render_catalog_list(format: OutputFormat) -> String {
    let entries = catalog::entries();
    match format {
        OutputFormat::Json => {
            let items: Vec<serde_json::Value> = entries
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "name": e.name,
                        "expected": e.expected.to_string(),
                        "note": e.note,
                    })
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&items).expect("serializes");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut out = String::from("name,expected,note\n");
            for e in &entries {
                writeln!(out, "{},{},\"{}\"", e.name, e.expected, e.note).unwrap();
            }
            out
        }
        OutputFormat::Table => {
            let name_w = entries.iter().map(|e| e.name.len()).max().unwrap();
            let class_w = entries
                .iter()
                .map(|e| e.expected.to_string().len())
                .max()
                .unwrap();
            let mut out = String::new();
            for e in &entries {
                writeln!(
                    out,
                    "{:<name_w$}  {:<class_w$}  {}",
                    e.name,
                    e.expected.to_string(),
                    e.note.split_whitespace().collect::<Vec<_>>().join(" "),
                )
                .unwrap();
            }
            out
        }
    }
}
