//! Analytic oracle suite for the Grünwald–Letnikov engine (`gl-test`).

use std::fmt::Write as _;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::fraccalc::{gl_derivative, gl_derivative_series, FracError, FractionalOrder, GlHistory, GlSolver};

/// Mittag-Leffler function `E_a(z) = sum z^k / Gamma(a k + 1)`, summed until
/// terms drop below round-off. Intended for moderate `|z|` (say below 10).
pub fn mittag_leffler(a: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 1.0;
    }
    let log_abs = z.abs().ln();
    let mut sum = 1.0;
    for k in 1..2000 {
        let kf = k as f64;
        let magnitude = (kf * log_abs - ln_gamma(a * kf + 1.0)).exp();
        let term = if z < 0.0 && k % 2 == 1 { -magnitude } else { magnitude };
        sum += term;
        // terms decay monotonically once a k exceeds |z|^(1/a)
        if magnitude < 1e-17 * sum.abs().max(1e-300) && a * kf > z.abs().powf(1.0 / a) + 2.0 {
            break;
        }
    }
    sum
}

/// Start of the window used for the convergence ratio. The exact solution
/// behaves like `1 - t^a / Gamma(1 + a)` near zero, so the first few samples
/// converge at order `a` only; first order holds away from the origin.
pub const CONVERGENCE_WINDOW_START: f64 = 0.05;

/// Solves `D^a x = -x`, `x(0) = 1` on `[0, horizon]` and returns
/// `(t, x - E_a(-t^a), E_a(-t^a))` at every step after the first.
pub fn relaxation_errors(alpha: FractionalOrder, step: f64, horizon: f64) -> Result<Vec<(f64, f64, f64)>, FracError> {
    let a = alpha.value();
    let steps = (horizon / step).round() as usize;
    let mut solver = GlSolver::new(alpha, step, None)?;
    solver.reserve(steps + 1);
    let mut history = solver.history(1.0);
    history.reserve(steps + 1);
    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        let x = history.last().unwrap_or(1.0);
        let next = solver.next_sample(&history, -x)?;
        history.push(next);
        let t = (k + 1) as f64 * step;
        let exact = mittag_leffler(a, -t.powf(a));
        out.push((t, next - exact, exact));
    }
    Ok(out)
}

fn max_relative(errors: &[(f64, f64, f64)]) -> f64 {
    errors.iter().fold(0.0, |m, &(_, e, x)| m.max((e / x).abs()))
}

fn max_absolute_from(errors: &[(f64, f64, f64)], start: f64) -> f64 {
    errors
        .iter()
        .filter(|p| p.0 >= start - 1e-12)
        .fold(0.0, |m, &(_, e, _)| m.max(e.abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.error.is_finite() && self.error <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(OracleCheck::passed)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {:<48} error {:.3e}  tolerance {:.1e}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.error,
                c.tolerance
            );
        }
        s
    }
}

fn power_law_error(alpha: f64, p: f64, step: f64) -> Result<f64, FracError> {
    let order = FractionalOrder::new(alpha)?;
    let steps = (1.0 / step).round() as usize;
    let samples: Vec<f64> = (0..=steps).map(|k| (k as f64 * step).powf(p)).collect();
    let estimate = gl_derivative(&GlHistory::from_samples(step, samples, None)?, order)?;
    let exact = gamma(p + 1.0) / gamma(p - alpha + 1.0);
    Ok(((estimate - exact) / exact).abs())
}

fn constant_error(step: f64) -> Result<f64, FracError> {
    let mut worst: f64 = 0.0;
    for alpha in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for c in [-3.5, 0.0, 1.0, 1e3] {
            let series = gl_derivative_series(&vec![c; 2001], FractionalOrder::new(alpha)?, step, None)?;
            worst = series.iter().fold(worst, |m, v| m.max(v.abs()));
        }
    }
    Ok(worst)
}

fn backward_difference_error(step: f64) -> Result<f64, FracError> {
    let order = FractionalOrder::new(1.0 - 1e-9)?;
    let samples: Vec<f64> = (0..=2000)
        .map(|k| 1.0 + 2.0 * k as f64 * step + (k as f64 * step).sin())
        .collect();
    let series = gl_derivative_series(&samples, order, step, None)?;
    let mut worst: f64 = 0.0;
    for k in 1..samples.len() {
        let diff = (samples[k] - samples[k - 1]) / step;
        worst = worst.max(((series[k] - diff) / diff).abs());
    }
    Ok(worst)
}

/// Runs every oracle comparison.
pub fn run_oracle_suite() -> Result<OracleReport, FracError> {
    let alpha = FractionalOrder::new(0.7)?;
    let coarse = relaxation_errors(alpha, 1e-3, 2.0)?;
    let fine = relaxation_errors(alpha, 5e-4, 2.0)?;
    let ratio =
        max_absolute_from(&fine, CONVERGENCE_WINDOW_START) / max_absolute_from(&coarse, CONVERGENCE_WINDOW_START);
    let checks = vec![
        OracleCheck {
            name: "D^0.7 t^1.5 at t = 1, h = 1e-3 (relative)".into(),
            error: power_law_error(0.7, 1.5, 1e-3)?,
            tolerance: 1e-2,
        },
        OracleCheck {
            name: "D^a of constants (absolute)".into(),
            error: constant_error(1e-3)?,
            tolerance: 1e-8,
        },
        OracleCheck {
            name: "a = 1 - 1e-9 vs backward difference (rel)".into(),
            error: backward_difference_error(1e-3)?,
            tolerance: 1e-3,
        },
        OracleCheck {
            name: "D^0.7 x = -x vs E_0.7, h = 1e-3 (relative)".into(),
            error: max_relative(&coarse),
            tolerance: 1e-2,
        },
        OracleCheck {
            name: "D^0.7 x = -x vs E_0.7, h = 5e-4 (relative)".into(),
            error: max_relative(&fine),
            tolerance: 1e-2,
        },
        OracleCheck {
            name: "sup error ratio on [0.05, 2], h = 5e-4 / 1e-3".into(),
            error: ratio,
            tolerance: 0.5,
        },
    ];
    Ok(OracleReport { checks })
}
