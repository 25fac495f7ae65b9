use std::path::{Path, PathBuf};
use std::process::ExitCode;

use awtest_core::pipeline::{BackendChoice, Dataset, Pipeline, PipelineConfig};
use awtest_core::prompt::PromptMode;
use awtest_core::report::{Format, Grouping};
use clap::{Parser, Subcommand};

/// Generate, inject, build, run and score LLM-written unit tests for a C++
/// package workspace.
#[derive(Debug, Parser)]
#[command(name = "awtest", version, arg_required_else_help = true)]
struct Cli {
    /// Workspace root (holds `src/` and `awtest.json`).
    #[arg(short = 'C', long, global = true, default_value = ".")]
    root: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse sources into a symbol model and per-package call graphs.
    Analyze,
    /// Ingest the official tests' lcov tracefile: coverage table and uncovered code.
    Coverage {
        /// lcov tracefile from the official test run.
        lcov: PathBuf,
    },
    /// Select focal functions into the covered and uncovered datasets.
    Bench {
        /// Official tracefile; defaults to the config entry or the one saved by `coverage`.
        #[arg(long)]
        lcov: Option<PathBuf>,
    },
    /// Prompt the model and write generated test files.
    Gen {
        #[arg(long, value_parser = parse_mode)]
        mode: Option<PromptMode>,
        #[arg(long, value_parser = parse_with::<BackendChoice>)]
        backend: Option<BackendChoice>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long, value_parser = parse_with::<Dataset>)]
        dataset: Option<Dataset>,
        /// Response directory for the scripted backend.
        #[arg(long)]
        script_dir: Option<PathBuf>,
    },
    /// Register generated tests in the packages' CMakeLists.txt.
    Inject,
    /// Build and run the injected tests, classify failures and capture coverage.
    Run {
        /// Per-case test timeout in seconds.
        #[arg(long)]
        timeout: Option<u64>,
    },
    /// Render metric tables.
    Report {
        #[arg(long, default_value = "md", value_parser = parse_with::<Format>)]
        format: Format,
        #[arg(long, default_value = "module", value_parser = parse_with::<Grouping>)]
        group_by: Grouping,
        /// `metrics.json` of an earlier run to print deltas against.
        #[arg(long)]
        baseline: Option<PathBuf>,
        /// Title mode label; defaults to the configured mode.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<PromptMode>,
    },
    /// Remove injections and generated test files.
    Clean {
        /// Also delete `.awtest/` state, keeping transcripts.
        #[arg(long)]
        state: bool,
    },
}

fn parse_with<T: std::str::FromStr<Err = awtest_core::Error>>(s: &str) -> Result<T, String> {
    s.parse::<T>().map_err(|e| e.to_string())
}

fn parse_mode(s: &str) -> Result<PromptMode, String> {
    match s.parse::<PromptMode>()? {
        PromptMode::Docgen => Err("mode must be `basic` or `awtest`".into()),
        m => Ok(m),
    }
}

fn open(root: &Path, edit: impl FnOnce(&mut PipelineConfig)) -> awtest_core::Result<Pipeline> {
    let mut config = PipelineConfig::load(root)?;
    edit(&mut config);
    Pipeline::new(root, config)
}

fn dispatch(cli: Cli) -> awtest_core::Result<()> {
    let root = cli.root.as_path();
    match cli.command {
        Command::Analyze => {
            let s = open(root, |_| {})?.analyze()?;
            println!(
                "{} packages, {} files, {} function definitions, {} call edges",
                s.packages, s.units, s.functions, s.edges
            );
            for f in s.unparsed {
                println!("parse errors: {f}");
            }
        }
        Command::Coverage { lcov } => {
            let s = open(root, |_| {})?.coverage(&lcov)?;
            print!("{}", s.table.render(Format::Markdown));
            println!("{} uncovered findings", s.findings.len());
        }
        Command::Bench { lcov } => {
            let b = open(root, |_| {})?.bench(lcov.as_deref())?;
            println!(
                "covered: {} functions, uncovered: {} functions",
                b.covered.len(),
                b.uncovered.len()
            );
        }
        Command::Gen {
            mode,
            backend,
            model,
            dataset,
            script_dir,
        } => {
            let p = open(root, |c| {
                c.mode = mode.unwrap_or(c.mode);
                c.backend = backend.unwrap_or(c.backend);
                c.model = model.unwrap_or_else(|| c.model.clone());
                c.dataset = dataset.unwrap_or(c.dataset);
                if script_dir.is_some() {
                    c.script_dir = script_dir;
                }
            })?;
            let records = p.gen()?;
            let written = records.iter().filter(|r| r.test_file.is_some()).count();
            println!("{written} of {} test files written", records.len());
            for r in records.iter().filter(|r| r.error.is_some()) {
                println!("{}: {}", r.focal, r.error.as_deref().unwrap_or_default());
            }
        }
        Command::Inject => {
            let s = open(root, |_| {})?.inject()?;
            println!("{} targets registered in {} packages", s.targets, s.packages);
        }
        Command::Run { timeout } => {
            let p = open(root, |c| {
                if let Some(t) = timeout {
                    c.harness.test_timeout_s = t;
                }
            })?;
            let outcomes = p.run()?;
            let built = outcomes.iter().filter(|o| o.built()).count();
            let cases: usize = outcomes.iter().map(|o| o.cases.len()).sum();
            let passed: usize = outcomes.iter().flat_map(|o| &o.cases).filter(|c| c.passed()).count();
            println!(
                "{built} of {} test files built; {passed} of {cases} cases passed",
                outcomes.len()
            );
        }
        Command::Report {
            format,
            group_by,
            baseline,
            mode,
        } => {
            let p = open(root, |c| c.mode = mode.unwrap_or(c.mode))?;
            print!("{}", p.report(group_by, format, baseline.as_deref())?);
        }
        Command::Clean { state } => {
            let s = open(root, |_| {})?.clean(state)?;
            println!(
                "{} packages restored, {} generated test files removed",
                s.packages_restored, s.test_files_removed
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help and version requests print normally and succeed.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
