//! `grasp`: secure code generation guided by a practice graph.
//!
//! Subcommands: `graph validate|reduce|build|review` manage the practice
//! DAG; `gen` produces run records for scenarios × samples under a
//! strategy; `eval` adds validity, security findings, and test outcomes;
//! `score` turns an evaluated store into metrics reports; `trace`
//! pretty-prints one traversal. Exit status: 0 success, 1 domain error,
//! 2 environment error, 64 usage error.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use config::{FileConfig, Overrides};
use error::CliError;

#[derive(Parser)]
#[command(name = "grasp", version, about = "Graph-guided secure code generation and evaluation")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonOverrides {
    /// Practice graph document (JSON).
    #[arg(long)]
    graph: Option<String>,
    /// Scenario manifest (JSON array).
    #[arg(long)]
    manifest: Option<String>,
    /// Provider: replay, live, or record.
    #[arg(long)]
    provider: Option<String>,
    /// Replay transcript (JSON Lines).
    #[arg(long)]
    fixtures: Option<String>,
    /// Transcript file the record provider appends to.
    #[arg(long)]
    record_to: Option<String>,
    /// Reply used when a lenient replay misses; omits for strict replay.
    #[arg(long)]
    fallback_reply: Option<String>,
    /// Output directory for run artifacts.
    #[arg(long, short = 'o')]
    out: Option<String>,
    /// Model label stamped into run records.
    #[arg(long)]
    model_id: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect and transform practice graphs.
    Graph {
        #[command(subcommand)]
        action: GraphAction,
    },
    /// Generate run records for every scenario × sample.
    Gen {
        #[command(flatten)]
        common: CommonOverrides,
        /// Strategy: base, zero-shot, plan-and-solve, grasp, flat-scp,
        /// full-traversal.
        #[arg(long)]
        strategy: Option<String>,
        /// Relevance threshold 1..=5.
        #[arg(long)]
        tau: Option<u8>,
        /// Samples per scenario.
        #[arg(long)]
        samples: Option<u32>,
        /// Worker threads.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Evaluate a run store: validity, security findings, tests.
    Eval {
        #[command(flatten)]
        common: CommonOverrides,
        /// Run store produced by gen.
        #[arg(long)]
        run: PathBuf,
        /// External analyzer command template with {file} and {rule};
        /// defaults to the built-in pattern analyzer.
        #[arg(long)]
        analyzer_cmd: Option<String>,
        /// Output store path (default: `<out>/evaluated.jsonl`).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Worker threads.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Compute metrics over an evaluated run store.
    Score {
        #[command(flatten)]
        common: CommonOverrides,
        /// Evaluated run store.
        #[arg(long)]
        run: PathBuf,
        /// Comma-separated k values for secure-pass@k.
        #[arg(long, value_delimiter = ',')]
        ks: Option<Vec<u32>>,
        /// Samples per scenario the ks must fit inside.
        #[arg(long)]
        samples: Option<u32>,
    },
    /// Pretty-print one persisted traversal trace.
    Trace {
        /// Trace file written by gen (`traces/<scenario>__<sample>.json`).
        trace_file: PathBuf,
    },
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum GraphAction {
    /// Check structural and shape invariants; exit 1 on violations.
    Validate { graph: PathBuf },
    /// Remove edges implied by longer paths; print the changelog.
    Reduce {
        graph: PathBuf,
        /// Write the reduced document here instead of stdout.
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
    },
    /// Build a graph from a practice checklist via the provider.
    Build {
        #[command(flatten)]
        common: CommonOverrides,
        /// Practice checklist: one practice per line, # comments.
        #[arg(long)]
        practices: PathBuf,
        /// Source id of the practice that anchors the graph (p000, …).
        #[arg(long)]
        root: String,
        /// Exclusion rules: `pattern<TAB>reason` lines.
        #[arg(long)]
        exclude: Option<PathBuf>,
        /// Output graph document.
        #[arg(long, default_value = "graph.json")]
        output: PathBuf,
        /// Also write the normalized practice records here.
        #[arg(long)]
        records: Option<PathBuf>,
        /// Also write a review document here.
        #[arg(long)]
        review: Option<PathBuf>,
    },
    /// Export a review document, or import an edited one as an overlay.
    Review {
        /// Graph document to review.
        graph: Option<PathBuf>,
        /// Write the review (or overlay) here instead of stdout.
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
        /// Re-import an edited review as an edge-kind overlay (JSON).
        #[arg(long)]
        import: Option<PathBuf>,
    },
}

fn overrides(common: CommonOverrides) -> Overrides {
    Overrides {
        graph: common.graph,
        manifest: common.manifest,
        provider_kind: common.provider,
        fixtures: common.fixtures,
        record_to: common.record_to,
        fallback_reply: common.fallback_reply,
        output_dir: common.out,
        model_id: common.model_id,
        ..Overrides::default()
    }
}

fn load_file_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    match path {
        Some(path) => FileConfig::load(path),
        None => Ok(FileConfig::default()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file_config = load_file_config(&cli.config)?;
    match cli.command {
        Command::Graph { action } => match action {
            GraphAction::Validate { graph } => commands::graphcmd::validate(&graph),
            GraphAction::Reduce { graph, out } => {
                commands::graphcmd::reduce(&graph, out.as_deref())
            }
            GraphAction::Build { common, practices, root, exclude, output, records, review } => {
                let config = config::resolve(file_config, overrides(common))?;
                commands::graphcmd::build(
                    &config,
                    &commands::graphcmd::BuildArgs {
                        practices,
                        root,
                        exclude,
                        output,
                        review_output: review,
                        records_output: records,
                    },
                )
            }
            GraphAction::Review { graph, out, import } => {
                commands::graphcmd::review(&commands::graphcmd::ReviewArgs {
                    graph,
                    output: out,
                    import,
                })
            }
        },
        Command::Gen { common, strategy, tau, samples, workers } => {
            let mut flags = overrides(common);
            flags.strategy = strategy;
            flags.tau = tau;
            flags.samples = samples;
            flags.workers = workers;
            let config = config::resolve(file_config, flags)?;
            commands::gen::run(&config)
        }
        Command::Eval { common, run, analyzer_cmd, output, workers } => {
            let mut flags = overrides(common);
            flags.workers = workers;
            let config = config::resolve(file_config, flags)?;
            let manifest = config
                .manifest_path
                .clone()
                .ok_or_else(|| CliError::domain("eval needs a scenario manifest (--manifest)"))?;
            let output = output.unwrap_or_else(|| config.output_dir.join("evaluated.jsonl"));
            commands::evalcmd::run(&commands::evalcmd::EvalArgs {
                run_store: run,
                manifest,
                output,
                analyzer_cmd,
                workers: config.workers,
            })
        }
        Command::Score { common, run, ks, samples } => {
            let mut flags = overrides(common);
            flags.ks = ks;
            flags.samples = samples;
            // Scoring must not reject stores smaller than the generation
            // default: without an explicit sample count, cap at the
            // largest requested k.
            if flags.samples.is_none() {
                flags.samples = flags.ks.as_ref().and_then(|ks| ks.iter().max().copied());
            }
            let config = config::resolve(file_config, flags)?;
            let out_dir = Some(config.output_dir.clone());
            commands::score::run(
                &config,
                &commands::score::ScoreArgs { run_store: run, output_dir: out_dir },
            )
        }
        Command::Trace { trace_file } => commands::tracecmd::run(&trace_file),
    }
}

fn main() -> ExitCode {
    // Die quietly when a downstream pager closes the pipe instead of
    // panicking mid-print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version print and succeed; anything else is a
            // usage error under the documented contract.
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(64);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
