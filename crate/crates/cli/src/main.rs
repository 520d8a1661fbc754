use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tracklab::scenario::{run_scenario, ScenarioConfig, EXPERIMENT_NAMES};
use tracklab::Error;

/// Runs tracking-problem experiments described by JSON scenario files.
#[derive(Parser)]
#[command(name = "tracklab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its reports.
    Run {
        config: PathBuf,
        /// Overrides the seed of the scenario.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check a scenario file without running it.
    Validate { config: PathBuf },
    /// List the available control-to-state maps.
    ListMaps,
    /// List the available experiments.
    ListExperiments,
}

const MAPS: [(&str, &str); 5] = [
    ("affine", "u ↦ Ku + c for a given matrix K and offset c"),
    ("abs", "componentwise |u|"),
    ("square", "componentwise u²"),
    (
        "semilinear1d",
        "-y'' + max(0, y) = u on (0, 1), finite differences",
    ),
    (
        "parabolic-obstacle",
        "final state of y_t - y_xx ≥ u with obstacle y ≥ ψ",
    ),
];

const EXPERIMENTS: [(&str, &str); 8] = [
    ("solve", "multistart search for all global minimizers"),
    ("scan", "number of global minimizers over a grid of targets"),
    (
        "find-nonunique",
        "ridge bisection for a target with two global minimizers",
    ),
    (
        "segment",
        "uniqueness on the segments from a ridge target to its solutions",
    ),
    (
        "witness",
        "target sequences with a common limit and separated solutions",
    ),
    ("affinity", "chord defect of the control-to-state map"),
    ("sweep-nu", "global minimizers across Tikhonov weights"),
    ("linf-demo", "continuum of minimizers under the max-norm"),
];

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        2
    } else if e.is_non_convergence() {
        3
    } else {
        1
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(&e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed, out } => {
            let mut cfg = match ScenarioConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            if let Some(s) = seed {
                cfg.solver.seed = s;
            }
            match run_scenario(&cfg, &out) {
                Ok(run) => {
                    print!("{}", run.summary);
                    for f in &run.files {
                        println!("wrote {}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Validate { config } => {
            match ScenarioConfig::load(&config).and_then(|c| c.prepare().map(|_| c)) {
                Ok(c) => {
                    println!("ok: {} ({})", c.name, c.experiment.name());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::ListMaps => {
            for (name, what) in MAPS {
                println!("{name:<20} {what}");
            }
            ExitCode::SUCCESS
        }
        Command::ListExperiments => {
            debug_assert!(EXPERIMENTS.iter().map(|e| e.0).eq(EXPERIMENT_NAMES));
            for (name, what) in EXPERIMENTS {
                println!("{name:<16} {what}");
            }
            ExitCode::SUCCESS
        }
    }
}
