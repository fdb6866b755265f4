//! Browser bindings for the fracsmo observer demo.
//!
//! Three operations back the page in `www/`: run a scenario and get its
//! figures, check the gain conditions, and compare the fractional solver with
//! the Mittag-Leffler relaxation curve. Each export wraps a plain Rust function
//! so the logic is testable without a JavaScript host.

use fracsmo::analysis::{check_gains, compute_metrics};
use fracsmo::config::{load_config, ScenarioConfig};
use fracsmo::fraccalc::FractionalOrder;
use fracsmo::glcheck::relaxation_errors;
use fracsmo::plant::estimate_bounds;
use fracsmo::sim::{simulate, SimError, Trajectory};
use fracsmo::svg::{decimate, trajectory_figures, Figure, Series};
use wasm_bindgen::prelude::*;

/// Longest horizon the page will run, in samples.
pub const MAX_SAMPLES: usize = 200_000;

/// Points per plotted series.
const PLOT_POINTS: usize = 1200;

#[wasm_bindgen]
pub struct SimulationResult {
    figures: Vec<(String, String)>,
    summary: String,
    activation: Vec<f64>,
    fault_rmse: f64,
    diverged: bool,
}

#[wasm_bindgen]
impl SimulationResult {
    pub fn figure_count(&self) -> usize {
        self.figures.len()
    }

    pub fn figure_name(&self, index: usize) -> String {
        self.figures.get(index).map(|f| f.0.clone()).unwrap_or_default()
    }

    pub fn figure_svg(&self, index: usize) -> String {
        self.figures.get(index).map(|f| f.1.clone()).unwrap_or_default()
    }

    pub fn summary(&self) -> String {
        self.summary.clone()
    }

    /// First time each activation flag is set; NaN if never.
    pub fn activation_times(&self) -> Vec<f64> {
        self.activation.clone()
    }

    /// Tail RMSE of the fault estimate over the final half.
    pub fn fault_rmse(&self) -> f64 {
        self.fault_rmse
    }

    pub fn diverged(&self) -> bool {
        self.diverged
    }
}

/// The built-in example as editable config text.
#[wasm_bindgen]
pub fn example_config() -> String {
    ScenarioConfig::paper_example().to_text()
}

fn parse_config(text: &str, horizon: Option<f64>) -> Result<ScenarioConfig, String> {
    let config = load_config(text).map_err(|e| e.to_string())?;
    let config = config.with_grid(None, horizon).map_err(|e| e.to_string())?;
    if config.sim.horizon / config.sim.h > MAX_SAMPLES as f64 {
        return Err(format!(
            "horizon / h is limited to {MAX_SAMPLES} samples in the browser; use the command-line tool for longer runs"
        ));
    }
    Ok(config)
}

fn summarize(config: &ScenarioConfig, traj: &Trajectory, note: Option<String>, diverged: bool) -> SimulationResult {
    let metrics = compute_metrics(traj, config.band());
    let activation = traj
        .flags
        .iter()
        .map(|col| col.iter().position(|&f| f).map_or(f64::NAN, |k| traj.time[k]))
        .collect();
    let mut summary = String::new();
    if let Some(note) = note {
        summary.push_str(&note);
        summary.push('\n');
    }
    summary.push_str(&format!("{} samples, h = {}\n", traj.len(), config.sim.h));
    summary.push_str(&metrics.to_text());
    SimulationResult {
        figures: if traj.len() >= 2 {
            trajectory_figures(traj, PLOT_POINTS)
        } else {
            Vec::new()
        },
        summary,
        activation,
        fault_rmse: metrics.get("e_fault").map_or(f64::NAN, |m| m.rmse_tail),
        diverged,
    }
}

/// Runs a scenario. A non-positive `horizon` keeps the config's value.
pub fn run_scenario(text: &str, horizon: f64) -> Result<SimulationResult, String> {
    let config = parse_config(text, (horizon > 0.0).then_some(horizon))?;
    let scenario = config.scenario().map_err(|e| e.to_string())?;
    match simulate(&scenario) {
        Ok(traj) => Ok(summarize(&config, &traj, None, false)),
        Err(SimError::Diverged { time, source, partial }) => Ok(summarize(
            &config,
            &partial,
            Some(format!("stopped at t = {time}: {source}")),
            true,
        )),
        Err(e) => Err(e.to_string()),
    }
}

/// Gain-condition report against user bounds or empirical ones.
pub fn gain_report(text: &str) -> Result<String, String> {
    let config = parse_config(text, None)?;
    let scenario = config.scenario().map_err(|e| e.to_string())?;
    let (bounds, origin) = match &config.bounds {
        Some(b) => (b.clone(), "user-supplied"),
        None => (
            estimate_bounds(&scenario.plant, config.sim.horizon, config.sim.h).map_err(|e| e.to_string())?,
            "empirical",
        ),
    };
    let report = check_gains(&scenario.gains, &bounds).map_err(|e| e.to_string())?;
    Ok(format!("bounds: {origin}\n{}", report.to_text()))
}

/// Solves `D^a x = -x`, `x(0) = 1` and plots it against `E_a(-t^a)`.
/// Returns the SVG; the title carries the largest relative error.
pub fn relaxation_figure(alpha: f64, step: f64, horizon: f64) -> Result<String, String> {
    let order = FractionalOrder::new(alpha).map_err(|e| e.to_string())?;
    if !(step > 0.0 && horizon > step) || horizon / step > MAX_SAMPLES as f64 {
        return Err(format!("need 0 < h < horizon and at most {MAX_SAMPLES} steps"));
    }
    let errors = relaxation_errors(order, step, horizon).map_err(|e| e.to_string())?;
    let mut time = vec![0.0];
    let mut numeric = vec![1.0];
    let mut exact = vec![1.0];
    let mut worst: f64 = 0.0;
    for &(t, err, e) in &errors {
        time.push(t);
        numeric.push(e + err);
        exact.push(e);
        worst = worst.max((err / e).abs());
    }
    let figure = Figure {
        title: format!("D^{alpha} x = -x: GL solver vs Mittag-Leffler (max rel. error {worst:.2e})"),
        x_label: "t".into(),
        y_label: "x".into(),
        series: vec![
            Series {
                label: "E_a(-t^a)".into(),
                points: decimate(&time, &exact, PLOT_POINTS),
            },
            Series {
                label: format!("GL, h = {step}"),
                points: decimate(&time, &numeric, PLOT_POINTS),
            },
        ],
    };
    Ok(figure.to_svg())
}

#[wasm_bindgen(js_name = runScenario)]
pub fn run_scenario_js(text: &str, horizon: f64) -> Result<SimulationResult, JsError> {
    run_scenario(text, horizon).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = gainReport)]
pub fn gain_report_js(text: &str) -> Result<String, JsError> {
    gain_report(text).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = relaxationFigure)]
pub fn relaxation_figure_js(alpha: f64, step: f64, horizon: f64) -> Result<String, JsError> {
    relaxation_figure(alpha, step, horizon).map_err(|e| JsError::new(&e))
}
