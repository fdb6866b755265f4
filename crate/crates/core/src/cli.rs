//! Command-line front end. `main` only parses arguments and forwards here.
//!
//! Exit codes: 0 success (a run that does not converge is still a result),
//! 1 configuration or usage error, 2 divergence, 3 internal error.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{check_gains, compute_metrics, verify_lemma1};
use crate::config::{load_config_with_preset, preset, ScenarioConfig};
use crate::glcheck::run_oracle_suite;
use crate::plant::estimate_bounds;
use crate::sim::{simulate, SimError, Trajectory};
use crate::svg::{trajectory_figures, DEFAULT_MAX_POINTS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fracsmo",
    version,
    about = "Fault estimation in fractional-order systems with a step-by-step super-twisting observer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run plant and observer; write CSV, SVG figures and metrics.
    Simulate(RunArgs),
    /// Report the gain conditions against user or empirical bounds.
    CheckGains(RunArgs),
    /// Simulate, then check the Lyapunov inequality along the error trajectory.
    Verify(RunArgs),
    /// Run the analytic oracle suite for the fractional-derivative engine.
    GlTest,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Scenario file; optional when --preset is given.
    pub config: Option<PathBuf>,
    /// Step size override.
    #[arg(long = "h", value_name = "STEP")]
    pub h: Option<f64>,
    /// Horizon override in seconds.
    #[arg(long, value_name = "SECONDS")]
    pub horizon: Option<f64>,
    /// Directory for output files.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Built-in scenario; a config file, if given, overrides its keys.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

fn internal(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INTERNAL,
        message: message.into(),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            code
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args, out),
        Command::CheckGains(args) => cmd_check_gains(args, out),
        Command::Verify(args) => cmd_verify(args, out),
        Command::GlTest => cmd_gl_test(out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load(args: &RunArgs) -> Result<ScenarioConfig, Failure> {
    let config = match (&args.config, &args.preset) {
        (Some(path), preset_name) => {
            let text = fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
            load_config_with_preset(&text, preset_name.as_deref())
                .map_err(|e| config_error(format!("{}: {e}", path.display())))?
        }
        (None, Some(name)) => preset(name).ok_or_else(|| config_error(format!("unknown preset '{name}'")))?,
        (None, None) => return Err(config_error("a config file or --preset is required")),
    };
    config
        .with_grid(args.h, args.horizon)
        .map_err(|e| config_error(e.to_string()))
}

fn out_dir(args: &RunArgs) -> Result<PathBuf, Failure> {
    let dir = args.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| internal(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| internal(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| internal(format!("{}: {e}", path.display())))
}

fn write_csv(path: &Path, traj: &Trajectory) -> Result<(), Failure> {
    let mut bytes = Vec::new();
    traj.write_csv(&mut bytes).map_err(|e| internal(e.to_string()))?;
    write_file(path, &bytes)
}

/// First time each flag is set, if ever.
fn activation_times(traj: &Trajectory) -> Vec<Option<f64>> {
    traj.flags
        .iter()
        .map(|col| col.iter().position(|&f| f).map(|k| traj.time[k]))
        .collect()
}

fn run_simulation(config: &ScenarioConfig) -> Result<Result<Trajectory, (String, Trajectory)>, Failure> {
    let scenario = config.scenario().map_err(|e| config_error(e.to_string()))?;
    match simulate(&scenario) {
        Ok(traj) => Ok(Ok(traj)),
        Err(SimError::Diverged { time, source, partial }) => {
            Ok(Err((format!("diverged at t = {time}: {source}"), *partial)))
        }
        Err(e @ (SimError::InvalidStep(_) | SimError::InvalidHorizon { .. } | SimError::Dimension { .. })) => {
            Err(config_error(e.to_string()))
        }
        Err(e) => Err(internal(e.to_string())),
    }
}

fn summary(config: &ScenarioConfig, traj: &Trajectory) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "samples: {} (h = {}, horizon = {})",
        traj.len(),
        config.sim.h,
        config.sim.horizon
    );
    for (i, t) in activation_times(traj).iter().enumerate() {
        let text = t.map_or_else(|| "never".to_string(), |t| format!("{t:.3} s"));
        let _ = writeln!(s, "E{} first set: {text}", i + 1);
    }
    s.push_str(&compute_metrics(traj, config.band()).to_text());
    s
}

fn cmd_simulate(args: &RunArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let config = load(args)?;
    let dir = out_dir(args)?;
    let csv_path = dir.join(&config.output.csv);
    match run_simulation(&config)? {
        Ok(traj) => {
            write_csv(&csv_path, &traj)?;
            let svg_dir = dir.join(&config.output.svg);
            for (stem, svg) in trajectory_figures(&traj, DEFAULT_MAX_POINTS) {
                write_file(&svg_dir.join(format!("{stem}.svg")), svg.as_bytes())?;
            }
            let text = summary(&config, &traj);
            write_file(&dir.join("metrics.txt"), text.as_bytes())?;
            let _ = write!(out, "{text}");
            let _ = writeln!(out, "wrote {} and figures in {}", csv_path.display(), svg_dir.display());
            Ok(EXIT_OK)
        }
        Err((message, partial)) => {
            write_csv(&csv_path, &partial)?;
            let _ = writeln!(
                out,
                "{message}\nwrote {} partial rows to {}",
                partial.len(),
                csv_path.display()
            );
            Ok(EXIT_DIVERGED)
        }
    }
}

fn cmd_check_gains(args: &RunArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let config = load(args)?;
    let scenario = config.scenario().map_err(|e| config_error(e.to_string()))?;
    let (bounds, origin) = match &config.bounds {
        Some(b) => (b.clone(), "user-supplied"),
        None => match estimate_bounds(&scenario.plant, config.sim.horizon, config.sim.h) {
            Ok(b) => (b, "empirical (plant trajectory sup-norms x 1.2)"),
            Err(e) => {
                let _ = writeln!(out, "bound estimation failed: {e}");
                return Ok(EXIT_DIVERGED);
            }
        },
    };
    let report = check_gains(&scenario.gains, &bounds).map_err(|e| config_error(e.to_string()))?;
    let _ = writeln!(out, "bounds: {origin}");
    let _ = write!(out, "{}", report.to_text());
    if args.out_dir.is_some() {
        let dir = out_dir(args)?;
        write_file(&dir.join("gains.txt"), report.to_key_values().as_bytes())?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(args: &RunArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let config = load(args)?;
    let p = config.lemma_matrix().map_err(|e| config_error(e.to_string()))?;
    let traj = match run_simulation(&config)? {
        Ok(traj) => traj,
        Err((message, _)) => {
            let _ = writeln!(out, "{message}");
            return Ok(EXIT_DIVERGED);
        }
    };
    let alpha = config
        .scenario()
        .map_err(|e| config_error(e.to_string()))?
        .plant
        .alpha();
    let check = verify_lemma1(
        &traj.error_vectors(),
        &p,
        alpha,
        config.sim.h,
        config.analysis.lemma_tolerance,
    )
    .map_err(|e| internal(e.to_string()))?;
    let mut text = String::new();
    let _ = writeln!(text, "lyapunov inequality 1/2 D^a(e'Pe) <= e'P D^a e on (e1..en, ef)");
    let _ = writeln!(
        text,
        "  P: {}",
        if config.analysis.lemma_p.is_some() {
            "user matrix"
        } else {
            "identity"
        }
    );
    let _ = writeln!(text, "  tolerance: {:e}", check.tolerance);
    let _ = writeln!(text, "  max_violation: {:e}", check.max_violation);
    let _ = writeln!(text, "  max_gap: {:e}", check.max_gap);
    let _ = writeln!(text, "  violations: {}", check.violation_times.len());
    if let Some(t) = check.violation_times.first() {
        let _ = writeln!(text, "  first violation at t = {t}");
    }
    let _ = writeln!(text, "  result: {}", if check.passed() { "PASS" } else { "FAIL" });
    text.push_str(&summary(&config, &traj));
    let _ = write!(out, "{text}");
    if args.out_dir.is_some() {
        let dir = out_dir(args)?;
        write_file(&dir.join("verify.txt"), text.as_bytes())?;
    }
    Ok(EXIT_OK)
}

fn cmd_gl_test(out: &mut dyn Write) -> Result<i32, Failure> {
    let report = run_oracle_suite().map_err(|e| internal(e.to_string()))?;
    let _ = write!(out, "{}", report.to_text());
    if report.all_passed() {
        Ok(EXIT_OK)
    } else {
        Err(internal("oracle suite failed"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_from_args(args, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_are_config_errors() {
        assert_eq!(run_args(&["fracsmo"]).0, EXIT_CONFIG);
        assert_eq!(run_args(&["fracsmo", "bogus"]).0, EXIT_CONFIG);
        assert_eq!(run_args(&["fracsmo", "simulate"]).0, EXIT_CONFIG);
        assert_eq!(run_args(&["fracsmo", "simulate", "--preset", "nope"]).0, EXIT_CONFIG);
        assert_eq!(
            run_args(&["fracsmo", "simulate", "/nonexistent/file.cfg"]).0,
            EXIT_CONFIG
        );
        assert_eq!(run_args(&["fracsmo", "--help"]).0, EXIT_OK);
    }

    #[test]
    fn bad_override_is_config_error() {
        let (code, _, err) = run_args(&["fracsmo", "check-gains", "--preset", "paper-example", "--h", "0"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("sim.h"), "{err}");
    }

    #[test]
    fn check_gains_preset() {
        let (code, out, _) = run_args(&["fracsmo", "check-gains", "--preset", "paper-example", "--horizon", "2"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("bounds: empirical"));
        assert!(out.contains("fault channel (heuristic)"));
    }
}
