use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, CommandFactory, Parser, Subcommand, ValueEnum};
use monodromy_core::clusters::{nesting_tree, ForestDoc};
use monodromy_core::intersection::BranchInput;
use monodromy_core::monodromy::{emit_presentation, prepare};
use monodromy_core::quotients::{load_group, orbit_report, EnumerationOptions, DEFAULT_TUPLE_CAP};
use monodromy_core::topocheck::{verify_topology, WitnessFamily};
use monodromy_core::Error;

#[derive(Parser)]
#[command(name = "monodromy", version, about = "Monodromy of punctured projective lines from cluster data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Relators,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Print the cluster forest of a branch-point document.
    Clusters {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Print the presentation of the fundamental group with the monodromy
    /// generator.
    Present {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Enumerate G-cover classes and the degrees of their fields of moduli.
    Orbits {
        /// Built-in group name (s3, d4, q8, z5, ...) or a Cayley-table JSON file.
        #[arg(long)]
        group: String,
        #[arg(long)]
        input: PathBuf,
        /// Residue characteristic; defaults to the document's p, 0 for none.
        #[arg(long)]
        p: Option<u64>,
        /// Keep only tuples generating the whole group (connected covers).
        #[arg(long, default_value_t = true, action = ArgAction::Set)]
        surjective_only: bool,
        #[arg(long, default_value_t = DEFAULT_TUPLE_CAP)]
        max_tuples: u128,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Check separating circles and recover the monodromy by strand tracking.
    VerifyTopology {
        #[arg(long)]
        family: PathBuf,
        /// Overrides the family's sample count.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::MalformedInput(format!("{}: {e}", path.display())))
}

fn load_input(path: &Path) -> Result<BranchInput, Error> {
    BranchInput::from_json(&read(path)?)
}

fn usage_error(msg: &str) -> ! {
    Cli::command().error(clap::error::ErrorKind::InvalidValue, msg).exit()
}

fn require(format: Format, allowed: &[Format], name: &str) {
    if !allowed.contains(&format) {
        let names: Vec<String> = allowed
            .iter()
            .filter_map(|f| f.to_possible_value().map(|v| v.get_name().to_string()))
            .collect();
        usage_error(&format!("{name} supports --format {}", names.join(", ")));
    }
}

fn run(cli: Cli) -> Result<String, Error> {
    match cli.command {
        Command::Clusters { input, format } => {
            require(format, &[Format::Json, Format::Text], "clusters");
            let (forest, meta) = prepare(&load_input(&input)?)?;
            Ok(match format {
                Format::Json => ForestDoc::new(&forest, &meta.order).to_json(),
                _ => {
                    let order: Vec<String> = meta.order.iter().map(|i| i.to_string()).collect();
                    let mut out = format!("order: {}\n", order.join(" "));
                    if forest.is_empty() {
                        out.push_str("no clusters\n");
                    } else {
                        out.push_str(&nesting_tree(&forest).render());
                    }
                    out
                }
            })
        }
        Command::Present { input, format } => {
            require(format, &[Format::Text, Format::Json, Format::Relators], "present");
            let (forest, meta) = prepare(&load_input(&input)?)?;
            let pres = emit_presentation(&forest, meta);
            Ok(match format {
                Format::Json => pres.to_json(),
                Format::Relators => pres.to_relators(),
                _ => pres.to_text(),
            })
        }
        Command::Orbits { group, input, p, surjective_only, max_tuples, threads, format } => {
            require(format, &[Format::Json, Format::Csv, Format::Text], "orbits");
            if threads == 0 {
                usage_error("--threads must be at least 1");
            }
            let doc = load_input(&input)?;
            let (forest, meta) = prepare(&doc)?;
            let g = load_group(&group)?;
            let a = monodromy_core::monodromy::monodromy_automorphism(&forest);
            let opts = EnumerationOptions { surjective_only, max_tuples, threads };
            let report = orbit_report(&g, &a, p.unwrap_or(meta.p), opts)?;
            Ok(match format {
                Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
                Format::Csv => report.to_csv(),
                _ => format!(
                    "group {} of order {}, |Z| = {}, exponent of G/Z = {}\n{} classes, max degree {}\n{}\n",
                    report.group,
                    report.order,
                    report.center_order,
                    report.exponent_mod_center,
                    report.classes.len(),
                    report.max_degree,
                    report.verdict
                ),
            })
        }
        Command::VerifyTopology { family, samples, format } => {
            require(format, &[Format::Text, Format::Json], "verify-topology");
            let mut w = WitnessFamily::from_json(&read(&family)?)?;
            if let Some(s) = samples {
                w.samples = s;
                w.validate()?;
            }
            let report = verify_topology(&w)?;
            Ok(match format {
                Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
                _ => report.to_text(),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let doc = serde_json::json!({ "error": { "code": e.code(), "message": e.to_string() } });
            eprintln!("{doc}");
            ExitCode::from(1)
        }
    }
}
