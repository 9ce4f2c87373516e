//! Command-line front end.
//!
//! Subcommands map one-to-one onto the library experiments: `optimize` for a
//! single user position, `sweep` and `heatmap` for the batch experiments,
//! `validate` for the numerical self-checks. Results are CSV, written to
//! `--out` or stdout.
//!
//! Exit codes: 0 success, 1 usage error, 2 configuration or runtime error,
//! 3 failed self-checks.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use omnisurface::channel::{direct_expected_power, expected_channel_power, se_from_power};
use omnisurface::config::ScenarioConfig;
use omnisurface::experiments::{heatmap, size_sweep, Scenario};
use omnisurface::geometry::side_of;
use omnisurface::optimizer::{
    branch_and_bound, brute_force, continuous_solution, nearest_solution, BnbOptions,
    CandidateMode, PhaseProblem,
};
use omnisurface::report::{heatmap_csv, phases_csv, sweep_csv, validate_csv};
use omnisurface::{validate, Point3d, Result};

/// Prints a line of payload to stdout. A closed pipe (for example
/// `sweep | head`) ends the run quietly; any other write failure is fatal.
macro_rules! out {
    ($($arg:tt)*) => {
        write_stdout(format_args!($($arg)*), true)
    };
}

/// Same as `out!` without the trailing newline.
macro_rules! out_raw {
    ($($arg:tt)*) => {
        write_stdout(format_args!($($arg)*), false)
    };
}

fn write_stdout(args: std::fmt::Arguments, newline: bool) {
    use std::io::Write;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let result = if newline {
        lock.write_fmt(args).and_then(|()| lock.write_all(b"\n"))
    } else {
        lock.write_fmt(args)
    };
    if let Err(e) = result {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: failed to write output: {e}");
        std::process::exit(2);
    }
}

#[derive(Parser)]
#[command(
    name = "omnisurface",
    version,
    about = "Simulator and phase optimizer for a two-sided metasurface downlink"
)]
struct Cli {
    /// TOML configuration file; the built-in reference scenario when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the experiment master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Print the fully resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    emit_config: bool,

    #[command(subcommand)]
    command: Command,
}

/// Phase solver selected on the command line.
#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Continuous co-phasing optimum (no state grid).
    Continuous,
    /// Per-element nearest grid state.
    Nearest,
    /// Exact search over the two states bracketing each continuous optimum.
    BnbBracketing,
    /// Exact search over all states of every element.
    BnbFull,
    /// Exhaustive enumeration over all states (small panels only).
    BruteForce,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize the panel for one user position and report the result.
    Optimize {
        /// User position as `x,y,z` in metres.
        #[arg(long, value_parser = parse_mu)]
        mu: MuArg,
        /// Solver to run.
        #[arg(long, value_enum, default_value_t = MethodArg::Nearest)]
        method: MethodArg,
        /// Write the chosen phases as CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Average spectral efficiency versus panel size, over random users.
    Sweep {
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected spectral efficiency on an x/y grid around the panel.
    Heatmap {
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the numerical self-checks.
    Validate {
        /// Smaller sample counts for a fast smoke run.
        #[arg(long)]
        quick: bool,
        /// Also write the outcomes as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy)]
struct MuArg {
    x: f64,
    y: f64,
    z: f64,
}

fn parse_mu(s: &str) -> std::result::Result<MuArg, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got {} component(s)", parts.len()));
    }
    let mut v = [0.0; 3];
    for (i, p) in parts.iter().enumerate() {
        v[i] = p
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("component {}: {e}", i + 1))?;
    }
    Ok(MuArg {
        x: v[0],
        y: v[1],
        z: v[2],
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::from_file(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.experiment.master_seed = seed;
    }
    if cli.emit_config {
        out_raw!("{}", cfg.effective_toml());
        return Ok(0);
    }
    let scenario: Scenario<f64> = cfg.build()?;

    match cli.command {
        Command::Optimize { mu, method, out } => cmd_optimize(&scenario, mu, method, out),
        Command::Sweep { out } => {
            let points = size_sweep(&scenario)?;
            deliver(out, &sweep_csv(&points))?;
            Ok(0)
        }
        Command::Heatmap { out } => {
            let cells = heatmap(&scenario)?;
            deliver(out, &heatmap_csv(&cells))?;
            Ok(0)
        }
        Command::Validate { quick, out } => {
            let report = validate::run(quick);
            for c in &report.checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                out!("{status} {}: {}", c.name, c.detail);
            }
            if let Some(path) = out {
                std::fs::write(&path, validate_csv(&report.checks))?;
                out!("wrote {}", path.display());
            }
            if report.all_passed() {
                out!("all checks passed");
                Ok(0)
            } else {
                out!("self-checks FAILED");
                Ok(3)
            }
        }
    }
}

fn cmd_optimize(
    scenario: &Scenario<f64>,
    mu: MuArg,
    method: MethodArg,
    out: Option<PathBuf>,
) -> Result<u8> {
    let mu = Point3d::new(mu.x, mu.y, mu.z);
    let side = side_of(&scenario.panel, mu)?;
    let problem = PhaseProblem::from_scene(&scenario.panel, scenario.bs, mu, &scenario.rf)?;
    let result = match method {
        MethodArg::Continuous => continuous_solution(&problem),
        MethodArg::Nearest => nearest_solution(&problem),
        MethodArg::BnbBracketing => branch_and_bound(
            &problem,
            &BnbOptions {
                mode: CandidateMode::Bracketing,
                init: scenario.opts.init,
            },
        )?,
        MethodArg::BnbFull => branch_and_bound(
            &problem,
            &BnbOptions {
                mode: CandidateMode::Full,
                init: scenario.opts.init,
            },
        )?,
        MethodArg::BruteForce => brute_force(&problem, CandidateMode::Full)?,
    };
    let se_expected = se_from_power(
        expected_channel_power(&scenario.panel, scenario.bs, mu, &result.psi, &scenario.rf)?,
        &scenario.rf,
    );
    let se_direct = se_from_power(
        direct_expected_power(scenario.bs, mu, &scenario.rf),
        &scenario.rf,
    );
    out!("method: {}", result.method);
    out!("user side: {side}");
    out!("elements: {}", problem.num_elements());
    out!("los power: {:e}", result.power);
    out!("se (los): {}", result.se);
    out!("se (expected): {se_expected}");
    out!("se (direct only): {se_direct}");
    if result.nodes_visited > 0 {
        out!(
            "nodes visited: {}, pruned: {}",
            result.nodes_visited, result.nodes_pruned
        );
    }
    deliver(out, &phases_csv(&result))?;
    Ok(0)
}

/// Writes content to a file, or prints it when no path was given.
fn deliver(out: Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(&path, content)?;
            out!("wrote {}", path.display());
        }
        None => out_raw!("{content}"),
    }
    Ok(())
}
