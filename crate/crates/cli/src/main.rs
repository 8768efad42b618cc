use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gstrat::catalan::{parse_level_file, solve_level, LevelError};
use gstrat::dsl::{self, write_atomic, RunOptions, ScriptError};
use gstrat::format::serialize_named;
use gstrat::strategy::EngineConfig;

#[derive(Parser)]
#[command(name = "gstrat", version, about = "Explore graph spaces with rewriting strategies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a strategy script.
    Run(RunArgs),
    /// Catalan puzzle tools.
    #[command(subcommand)]
    Catalan(CatalanCommand),
}

#[derive(Args)]
struct RunArgs {
    script: PathBuf,
    /// Write the derivation graph in DOT format.
    #[arg(long, value_name = "FILE")]
    dot: Option<PathBuf>,
    /// Write the derivation graph as JSON.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
    /// Print the full run report.
    #[arg(long)]
    stats: bool,
    #[command(flatten)]
    cap: RepeatCap,
    /// Leave timings out of the output so repeated runs print identical text.
    #[arg(long)]
    seedless_deterministic: bool,
}

#[derive(Args)]
struct RepeatCap {
    /// Iteration cap for unbounded repeat.
    #[arg(long, value_name = "N", env = "GSTRAT_MAX_REPEAT")]
    max_repeat: Option<u64>,
}

#[derive(Subcommand)]
enum CatalanCommand {
    /// Search for a solution of each level in a level file.
    Solve {
        levelfile: PathBuf,
        /// Only solve the level with this name.
        #[arg(long)]
        level: Option<String>,
        /// Write the explored derivation graph in DOT format (needs a single level).
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
        /// Print every intermediate graph of a solution.
        #[arg(long)]
        states: bool,
        #[command(flatten)]
        cap: RepeatCap,
    },
}

enum Failure {
    Script(String),
    Io(String),
}

impl From<ScriptError> for Failure {
    fn from(e: ScriptError) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Script(e.to_string())
        }
    }
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let options = RunOptions { max_repeat: args.cap.max_repeat, dot: args.dot, json: args.json };
    let (report, _) = dsl::run_script(&args.script, &options)?;
    if args.stats {
        let text = report.to_string();
        if args.seedless_deterministic {
            for line in text.lines().filter(|l| !l.starts_with("wall time")) {
                println!("{line}");
            }
        } else {
            println!("{text}");
        }
    } else {
        println!("{} new graphs, {} derivations", report.stats.new_graphs, report.stats.derivations);
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn solve(levelfile: &Path, only: Option<&str>, dot: Option<&Path>, states: bool, max_repeat: Option<u64>) -> Result<(), Failure> {
    let mut levels = parse_level_file(&read(levelfile)?).map_err(|e: LevelError| Failure::Script(e.to_string()))?;
    if let Some(name) = only {
        levels.retain(|l| l.name == name);
        if levels.is_empty() {
            return Err(Failure::Script(format!("no level named '{name}'")));
        }
    }
    if dot.is_some() && levels.len() != 1 {
        return Err(Failure::Script(format!("--dot needs a single level, the file has {}; select one with --level", levels.len())));
    }
    let mut config = EngineConfig::default();
    if let Some(cap) = max_repeat {
        config.repeat_cap = cap;
    }
    for level in &levels {
        let solve = solve_level(level, config).map_err(|e| Failure::Script(format!("level {}: {e}", level.name)))?;
        let explored = solve.engine.derivations.vertices().len();
        match (&solve.solution, solve.contracted_vertices()) {
            (Some(path), Some(vertices)) => {
                println!("level {}: solved in {} move(s), {explored} graphs explored", level.name, path.len() - 1);
                let repo = &solve.engine.repo;
                for (i, (w, v)) in path.windows(2).zip(&vertices).enumerate() {
                    let (from, to) = (repo.graph(w[0]).vertex_count(), repo.graph(w[1]).vertex_count());
                    println!("  move {}: contract vertex {v} ({from} -> {to} vertices)", i + 1);
                }
                if states {
                    for (i, &g) in path.iter().enumerate() {
                        print!("{}", serialize_named("graph", &format!("state{i}"), repo.graph(g)));
                    }
                }
            }
            _ => println!("level {}: no solution, {explored} graphs explored", level.name),
        }
        if let Some(path) = dot {
            write_atomic(path, &solve.engine.derivations.to_dot(&solve.engine.repo))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Catalan(CatalanCommand::Solve { levelfile, level, dot, states, cap }) => {
            solve(&levelfile, level.as_deref(), dot.as_deref(), states, cap.max_repeat)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Script(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
