use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qhat_cli::{parse_spec, run_tasks, Cache, TaskKind, TaskSpec};

/// Generalized q-Schur algebras, their inverse limit and specializations.
#[derive(Parser)]
#[command(name = "qhat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build S(π) for every π of the spec.
    Build(Opts),
    /// Check the defining relations of S(π).
    Verify(Opts),
    /// Compare dim S(π) with the Weyl dimension formula.
    Dims(Opts),
    /// Check the truncation maps along a chain ending at π.
    Maps(Opts),
    /// Check the limit-level identities at π.
    Limit(Opts),
    /// Run the separation or kernel probe.
    Probe(Opts),
    /// Specialize S(π) at the spec's ring.
    Specialize(Opts),
    /// Run the spec's task list.
    Run(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Args)]
struct Opts {
    /// Job specification file.
    #[arg(long)]
    spec: PathBuf,
    /// Directory for cached algebras; no disk cache when absent.
    #[arg(long, env = "QHAT_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, opts) = match cli.command {
        Command::Build(o) => (Some(TaskKind::Build), o),
        Command::Verify(o) => (Some(TaskKind::Verify), o),
        Command::Dims(o) => (Some(TaskKind::Dims), o),
        Command::Maps(o) => (Some(TaskKind::Maps), o),
        Command::Limit(o) => (Some(TaskKind::Limit), o),
        Command::Probe(o) => (Some(TaskKind::Probe), o),
        Command::Specialize(o) => (Some(TaskKind::Specialize), o),
        Command::Run(o) => (None, o),
    };
    let text = match std::fs::read_to_string(&opts.spec) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", opts.spec.display());
            return ExitCode::from(2);
        }
    };
    let spec = match parse_spec(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!(
                "error: {}:{}:{}: {}",
                opts.spec.display(),
                e.line,
                e.column,
                e.message
            );
            return ExitCode::from(2);
        }
    };
    let tasks = match kind {
        None => spec.ordered_tasks(),
        Some(k) => {
            let mut ts: Vec<TaskSpec> =
                spec.tasks.iter().filter(|t| t.kind == k).cloned().collect();
            if ts.is_empty() {
                ts.push(TaskSpec::new(k));
            }
            ts
        }
    };
    let needs_ring = tasks.iter().any(|t| {
        t.kind == TaskKind::Specialize
            || (t.kind == TaskKind::Probe && t.param("kind", "separation") == "kernel")
    });
    if needs_ring && spec.ring.is_none() {
        eprintln!(
            "error: {}: this task needs a 'ring' line",
            opts.spec.display()
        );
        return ExitCode::from(2);
    }
    if !tasks.is_empty() && spec.datum.is_none() {
        eprintln!("error: {}: missing 'datum' line", opts.spec.display());
        return ExitCode::from(2);
    }
    let report = run_tasks(&spec, &tasks, opts.cache_dir.map(Cache::new));
    match opts.format {
        Format::Json => print!("{}", report.to_json_string()),
        Format::Human => print!("{}", report.to_human()),
    }
    ExitCode::from(report.exit_code() as u8)
}
