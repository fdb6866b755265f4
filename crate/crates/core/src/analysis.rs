//! Checkable consequences of the convergence analysis: gain conditions, a
//! trajectory check of the fractional Lyapunov inequality
//! `½ D^a (eᵀPe) <= eᵀP D^a e`, and convergence metrics.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::fraccalc::{gl_derivative_series, FracError, FractionalOrder};
use crate::observer::GainSet;
use crate::plant::Bounds;
use crate::sim::Trajectory;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("bounds must be finite and positive")]
    InvalidBounds,
    #[error("bounds cover {bounds} states but the gains serve {gains}")]
    BoundsDimension { bounds: usize, gains: usize },
    #[error("matrix must be {dim}x{dim}, got {len} entries")]
    MatrixShape { dim: usize, len: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("trajectory needs at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("sample {index} has dimension {got}, expected {expected}")]
    SampleDimension { index: usize, expected: usize, got: usize },
    #[error(transparent)]
    Frac(#[from] FracError),
}

/// How a condition relates to the published analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Stated explicitly for the first step.
    Stated,
    /// Same form as the first step, with the next perturbation bound.
    Extrapolated,
    /// No published condition; rough analog only.
    Heuristic,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Stated => "stated",
            Provenance::Extrapolated => "extrapolated from step-1 analysis",
            Provenance::Heuristic => "heuristic",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaCondition {
    /// `4 d (alpha + d) / (alpha - d)`
    pub threshold_sq: f64,
    /// `sqrt(threshold_sq)`
    pub lambda_min: f64,
    pub holds: bool,
    /// `lambda^2 - threshold_sq`
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepCondition {
    /// 1..=n for the state channels, n + 1 for the fault channel.
    pub step: usize,
    pub provenance: Provenance,
    /// Perturbation bound `d` the switching gain has to dominate.
    pub disturbance: f64,
    pub disturbance_source: String,
    pub alpha_gain: f64,
    pub lambda: f64,
    pub condition_1_holds: bool,
    /// `alpha - d`
    pub condition_1_margin: f64,
    /// `None` when condition 1 fails and the lambda threshold is undefined.
    pub condition_2: Option<LambdaCondition>,
}

impl StepCondition {
    pub fn holds(&self) -> bool {
        self.condition_1_holds && self.condition_2.as_ref().is_some_and(|c| c.holds)
    }
}

/// Advisory gain report. Failing conditions do not stop a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct GainReport {
    pub steps: Vec<StepCondition>,
    pub bounds: Bounds,
}

fn step_condition(
    step: usize,
    provenance: Provenance,
    disturbance: f64,
    disturbance_source: String,
    alpha_gain: f64,
    lambda: f64,
) -> StepCondition {
    let condition_1_holds = alpha_gain > disturbance;
    let condition_2 = condition_1_holds.then(|| {
        let threshold_sq = 4.0 * disturbance * (alpha_gain + disturbance) / (alpha_gain - disturbance);
        LambdaCondition {
            threshold_sq,
            lambda_min: threshold_sq.sqrt(),
            holds: lambda * lambda > threshold_sq,
            margin: lambda * lambda - threshold_sq,
        }
    });
    StepCondition {
        step,
        provenance,
        disturbance,
        disturbance_source,
        alpha_gain,
        lambda,
        condition_1_holds,
        condition_1_margin: alpha_gain - disturbance,
        condition_2,
    }
}

/// Checks `alpha_i > d_i` and `lambda_i^2 > 4 d_i (alpha_i + d_i) / (alpha_i - d_i)` per step.
///
/// Step `i < n` is perturbed by `D^a x_{i+1}`: that is `x_{i+2}` (bound `a_{i+2}`)
/// while `i + 2 <= n`, and `f1 + f2 f` (bound `A2 + A3 A1`) otherwise. Step `n`
/// uses `Ȧ2 + Ȧ3 A1 + A3 Ȧ1 + A3 alpha_n`; the fault channel uses `Ȧ1`.
pub fn check_gains(gains: &GainSet, bounds: &Bounds) -> Result<GainReport, AnalysisError> {
    if !bounds.is_valid() {
        return Err(AnalysisError::InvalidBounds);
    }
    let n = gains.dimension();
    if bounds.a.len() != n {
        return Err(AnalysisError::BoundsDimension {
            bounds: bounds.a.len(),
            gains: n,
        });
    }
    let lambda = gains.lambda();
    let alpha = gains.alpha_gain();
    let mut steps = Vec::with_capacity(n + 1);
    for i in 1..n {
        let (d, source) = if i + 2 <= n {
            (bounds.a[i + 1], format!("a{}", i + 2))
        } else {
            (bounds.a2 + bounds.a3 * bounds.a1, "A2 + A3*A1".to_string())
        };
        let provenance = if i == 1 && i + 2 <= n {
            Provenance::Stated
        } else {
            Provenance::Extrapolated
        };
        steps.push(step_condition(i, provenance, d, source, alpha[i - 1], lambda[i - 1]));
    }
    let d_n = bounds.adot2 + bounds.adot3 * bounds.a1 + bounds.a3 * bounds.adot1 + bounds.a3 * alpha[n - 1];
    steps.push(step_condition(
        n,
        Provenance::Extrapolated,
        d_n,
        format!("Adot2 + Adot3*A1 + A3*Adot1 + A3*alpha{n}"),
        alpha[n - 1],
        lambda[n - 1],
    ));
    steps.push(step_condition(
        n + 1,
        Provenance::Heuristic,
        bounds.adot1,
        "Adot1".to_string(),
        alpha[n],
        lambda[n],
    ));
    Ok(GainReport {
        steps,
        bounds: bounds.clone(),
    })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "FAILS"
    }
}

impl GainReport {
    pub fn all_hold(&self) -> bool {
        self.steps.iter().all(StepCondition::holds)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let b = &self.bounds;
        let a: Vec<String> = b.a.iter().map(|v| format!("{v:.6}")).collect();
        let _ = writeln!(out, "bounds: a = [{}]", a.join(", "));
        let _ = writeln!(
            out,
            "        A1 = {:.6}, A2 = {:.6}, A3 = {:.6}, Adot1 = {:.6}, Adot2 = {:.6}, Adot3 = {:.6}",
            b.a1, b.a2, b.a3, b.adot1, b.adot2, b.adot3
        );
        for s in &self.steps {
            let label = if s.step == b.a.len() + 1 {
                "fault channel".to_string()
            } else {
                format!("step {}", s.step)
            };
            let _ = writeln!(out, "{label} ({})", s.provenance);
            let _ = writeln!(
                out,
                "  condition 1: alpha{} = {} > {} = {:.6}  {} (margin {:+.6})",
                s.step,
                s.alpha_gain,
                s.disturbance_source,
                s.disturbance,
                yes_no(s.condition_1_holds),
                s.condition_1_margin
            );
            match &s.condition_2 {
                Some(c) => {
                    let _ = writeln!(
                        out,
                        "  condition 2: lambda{} = {} > {:.6}  {} (lambda^2 margin {:+.6})",
                        s.step,
                        s.lambda,
                        c.lambda_min,
                        yes_no(c.holds),
                        c.margin
                    );
                }
                None => {
                    let _ = writeln!(out, "  condition 2: skipped (condition 1 fails)");
                }
            }
        }
        let _ = writeln!(
            out,
            "overall: {} (advisory)",
            if self.all_hold() {
                "all conditions hold"
            } else {
                "some conditions fail"
            }
        );
        out
    }

    /// `key = value` lines for scripts.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let b = &self.bounds;
        for (i, v) in b.a.iter().enumerate() {
            let _ = writeln!(out, "bounds.a{} = {v:e}", i + 1);
        }
        for (k, v) in [
            ("A1", b.a1),
            ("A2", b.a2),
            ("A3", b.a3),
            ("Adot1", b.adot1),
            ("Adot2", b.adot2),
            ("Adot3", b.adot3),
        ] {
            let _ = writeln!(out, "bounds.{k} = {v:e}");
        }
        for s in &self.steps {
            let p = format!("step{}", s.step);
            let _ = writeln!(out, "{p}.provenance = {:?}", s.provenance);
            let _ = writeln!(out, "{p}.disturbance = {:e}", s.disturbance);
            let _ = writeln!(out, "{p}.condition1 = {}", s.condition_1_holds);
            let _ = writeln!(out, "{p}.condition1_margin = {:e}", s.condition_1_margin);
            match &s.condition_2 {
                Some(c) => {
                    let _ = writeln!(out, "{p}.condition2 = {}", c.holds);
                    let _ = writeln!(out, "{p}.lambda_min = {:e}", c.lambda_min);
                    let _ = writeln!(out, "{p}.condition2_margin = {:e}", c.margin);
                }
                None => {
                    let _ = writeln!(out, "{p}.condition2 = skipped");
                }
            }
        }
        let _ = writeln!(out, "all_hold = {}", self.all_hold());
        out
    }
}

/// Symmetric positive-definite weight matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SpdMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self, AnalysisError> {
        if data.len() != dim * dim || dim == 0 {
            return Err(AnalysisError::MatrixShape { dim, len: data.len() });
        }
        for i in 0..dim {
            for j in 0..i {
                let (a, b) = (data[i * dim + j], data[j * dim + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(AnalysisError::NotSymmetric);
                }
            }
        }
        // Cholesky succeeds iff every eigenvalue is strictly positive
        let mut l = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let s: f64 = (0..j).map(|k| l[i * dim + k] * l[j * dim + k]).sum();
                if i == j {
                    let d = data[i * dim + i] - s;
                    if !(d > 0.0 && d.is_finite()) {
                        return Err(AnalysisError::NotPositiveDefinite);
                    }
                    l[i * dim + i] = d.sqrt();
                } else {
                    l[i * dim + j] = (data[i * dim + j] - s) / l[j * dim + j];
                }
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `uᵀ P v`
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let d = self.dim;
        u.iter()
            .zip(self.data.chunks_exact(d))
            .map(|(ui, row)| ui * row.iter().zip(v).map(|(p, vj)| p * vj).sum::<f64>())
            .sum()
    }
}

/// Outcome of the Lyapunov inequality check along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub p: SpdMatrix,
    pub tolerance: f64,
    /// `max_k (lhs_k - rhs_k)`; non-positive when the inequality holds everywhere.
    pub max_violation: f64,
    /// `max_k |lhs_k - rhs_k|`
    pub max_gap: f64,
    pub violation_times: Vec<f64>,
}

impl LemmaCheck {
    pub fn passed(&self) -> bool {
        self.violation_times.is_empty()
    }
}

/// `10 h^min(a, 1-a)`
pub fn default_lemma_tolerance(alpha: FractionalOrder, step: f64) -> f64 {
    let a = alpha.value();
    10.0 * step.powf(a.min(1.0 - a))
}

/// Evaluates both sides of `½ D^a (eᵀPe) <= eᵀP D^a e` at every sample.
///
/// `errors[k]` is the error vector at `t = k * step`.
pub fn verify_lemma1(
    errors: &[Vec<f64>],
    p: &SpdMatrix,
    alpha: FractionalOrder,
    step: f64,
    tolerance: Option<f64>,
) -> Result<LemmaCheck, AnalysisError> {
    if errors.len() < 2 {
        return Err(AnalysisError::TooShort(errors.len()));
    }
    let dim = p.dim();
    if let Some((index, e)) = errors.iter().enumerate().find(|(_, e)| e.len() != dim) {
        return Err(AnalysisError::SampleDimension {
            index,
            expected: dim,
            got: e.len(),
        });
    }
    let tolerance = tolerance.unwrap_or_else(|| default_lemma_tolerance(alpha, step));
    let energy: Vec<f64> = errors.iter().map(|e| p.bilinear(e, e)).collect();
    let d_energy = gl_derivative_series(&energy, alpha, step, None)?;
    let mut d_components = Vec::with_capacity(dim);
    for j in 0..dim {
        let component: Vec<f64> = errors.iter().map(|e| e[j]).collect();
        d_components.push(gl_derivative_series(&component, alpha, step, None)?);
    }
    let mut max_violation = f64::NEG_INFINITY;
    let mut max_gap = 0.0f64;
    let mut violation_times = Vec::new();
    let mut de = vec![0.0; dim];
    for (k, e) in errors.iter().enumerate() {
        for (d, series) in de.iter_mut().zip(&d_components) {
            *d = series[k];
        }
        let lhs = 0.5 * d_energy[k];
        let rhs = p.bilinear(e, &de);
        let diff = lhs - rhs;
        max_violation = max_violation.max(diff);
        max_gap = max_gap.max(diff.abs());
        if diff > tolerance {
            violation_times.push(k as f64 * step);
        }
    }
    Ok(LemmaCheck {
        p: p.clone(),
        tolerance,
        max_violation,
        max_gap,
        violation_times,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalMetrics {
    pub name: String,
    /// First time after which the signal never leaves the band.
    pub convergence_time: Option<f64>,
    /// RMSE over the final half of the horizon.
    pub rmse_tail: f64,
    pub sup_error_tail: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub band: f64,
    pub signals: Vec<SignalMetrics>,
}

impl Metrics {
    pub fn get(&self, name: &str) -> Option<&SignalMetrics> {
        self.signals.iter().find(|s| s.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("metrics (band {}):\n", self.band);
        for s in &self.signals {
            let conv = s
                .convergence_time
                .map_or_else(|| "never".to_string(), |t| format!("{t:.3} s"));
            let _ = writeln!(
                out,
                "  {:<8} converged: {:<10} tail rmse: {:.6e}  tail sup: {:.6e}",
                s.name, conv, s.rmse_tail, s.sup_error_tail
            );
        }
        out
    }
}

pub fn signal_metrics(name: &str, time: &[f64], values: &[f64], band: f64) -> SignalMetrics {
    let convergence_time = match values.iter().rposition(|v| v.is_nan() || v.abs() > band) {
        None => time.first().copied(),
        Some(k) if k + 1 < values.len() => Some(time[k + 1]),
        Some(_) => None,
    };
    let tail = &values[values.len() / 2..];
    let (rmse_tail, sup_error_tail) = if tail.is_empty() {
        (0.0, 0.0)
    } else {
        let sq: f64 = tail.iter().map(|v| v * v).sum();
        (
            (sq / tail.len() as f64).sqrt(),
            tail.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        )
    };
    SignalMetrics {
        name: name.to_string(),
        convergence_time,
        rmse_tail,
        sup_error_tail,
    }
}

/// Metrics for `e_1..e_n` and the fault error `f - f̂`.
pub fn compute_metrics(trajectory: &Trajectory, band: f64) -> Metrics {
    let mut signals: Vec<SignalMetrics> = trajectory
        .e
        .iter()
        .enumerate()
        .map(|(i, e)| signal_metrics(&format!("e{}", i + 1), &trajectory.time, e, band))
        .collect();
    let fault_error: Vec<f64> = trajectory
        .fault
        .iter()
        .zip(&trajectory.fhat)
        .map(|(f, fh)| f - fh)
        .collect();
    signals.push(signal_metrics("e_fault", &trajectory.time, &fault_error, band));
    Metrics { band, signals }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(a: Vec<f64>) -> Bounds {
        Bounds {
            a,
            a1: 0.6,
            a2: 1.0,
            a3: 1.2,
            adot1: 0.5,
            adot2: 2.0,
            adot3: 1e-6,
        }
    }

    #[test]
    fn step_one_threshold() {
        let b = bounds(vec![1.0, 1.0, 1.0]);
        let report = |lambda1: f64| {
            let gains = GainSet::new(vec![lambda1, 1.0, 1.0, 1.0], vec![2.0, 5.0, 5.0, 5.0], 0.1).unwrap();
            check_gains(&gains, &b).unwrap().steps[0].clone()
        };
        let pass = report(3.5);
        assert_eq!(pass.provenance, Provenance::Stated);
        assert!(pass.condition_1_holds);
        let c2 = pass.condition_2.clone().unwrap();
        assert!((c2.threshold_sq - 12.0).abs() < 1e-12);
        assert!((c2.lambda_min - 12f64.sqrt()).abs() < 1e-12);
        assert!(c2.holds);
        assert!(!report(3.4).condition_2.unwrap().holds);
    }

    #[test]
    fn condition_two_skipped_on_boundary() {
        let gains = GainSet::new(vec![10.0; 4], vec![1.0, 5.0, 5.0, 5.0], 0.1).unwrap();
        let s = &check_gains(&gains, &bounds(vec![1.0, 1.0, 1.0])).unwrap().steps[0];
        assert!(!s.condition_1_holds);
        assert!(s.condition_2.is_none());
        assert!(!s.holds());
    }

    #[test]
    fn later_steps_use_next_perturbation() {
        let gains = GainSet::new(vec![1.0; 5], vec![1.0; 5], 0.1).unwrap();
        let r = check_gains(&gains, &bounds(vec![1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!(r.steps.len(), 5);
        assert_eq!(r.steps[0].disturbance, 3.0);
        assert_eq!(r.steps[1].disturbance, 4.0);
        assert!((r.steps[2].disturbance - (1.0 + 1.2 * 0.6)).abs() < 1e-15);
        assert_eq!(r.steps[2].provenance, Provenance::Extrapolated);
        let expected = 2.0 + 1e-6 * 0.6 + 1.2 * 0.5 + 1.2 * 1.0;
        assert!((r.steps[3].disturbance - expected).abs() < 1e-15);
        assert_eq!(r.steps[4].provenance, Provenance::Heuristic);
        assert_eq!(r.steps[4].disturbance, 0.5);
        let text = r.to_text();
        assert!(text.contains("fault channel (heuristic)"));
        let kv = r.to_key_values();
        assert!(kv.contains("step1.condition1 = false"));
        assert!(kv.contains("step1.condition2 = skipped"));
    }

    #[test]
    fn invalid_bounds_rejected() {
        let gains = GainSet::new(vec![1.0; 4], vec![1.0; 4], 0.1).unwrap();
        assert_eq!(
            check_gains(&gains, &bounds(vec![1.0, 0.0, 1.0])),
            Err(AnalysisError::InvalidBounds)
        );
        assert!(matches!(
            check_gains(&gains, &bounds(vec![1.0, 1.0])),
            Err(AnalysisError::BoundsDimension { .. })
        ));
    }

    #[test]
    fn spd_validation() {
        assert!(SpdMatrix::new(2, vec![2.0, 1.0, 1.0, 2.0]).is_ok());
        assert_eq!(
            SpdMatrix::new(2, vec![2.0, 1.0, 0.0, 2.0]),
            Err(AnalysisError::NotSymmetric)
        );
        assert_eq!(
            SpdMatrix::new(2, vec![1.0, 2.0, 2.0, 1.0]),
            Err(AnalysisError::NotPositiveDefinite)
        );
        assert!(matches!(
            SpdMatrix::new(2, vec![1.0; 3]),
            Err(AnalysisError::MatrixShape { .. })
        ));
    }

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    #[test]
    fn lemma_on_zero_error() {
        let errors = vec![vec![0.0, 0.0]; 100];
        let check = verify_lemma1(&errors, &SpdMatrix::identity(2), order(0.5), 1e-2, None).unwrap();
        assert!(check.passed());
        assert_eq!(check.max_gap, 0.0);
    }

    #[test]
    fn lemma_integer_limit_is_equality() {
        let h = 1e-3;
        let errors: Vec<Vec<f64>> = (0..2000)
            .map(|k| {
                let t = k as f64 * h;
                vec![t.sin(), (2.0 * t).cos()]
            })
            .collect();
        let check = verify_lemma1(&errors, &SpdMatrix::identity(2), order(1.0 - 1e-9), h, None).unwrap();
        assert!(check.passed());
        assert!(check.max_gap < 1e-2, "{}", check.max_gap);
    }

    #[test]
    fn lemma_on_sinusoids() {
        let h = 1e-3;
        let errors: Vec<Vec<f64>> = (0..3000)
            .map(|k| {
                let t = k as f64 * h;
                vec![t.sin(), t.cos()]
            })
            .collect();
        let check = verify_lemma1(&errors, &SpdMatrix::identity(2), order(0.7), h, None).unwrap();
        assert!(check.passed());
        assert!(check.max_violation <= 1e-9, "{}", check.max_violation);
    }

    #[test]
    fn lemma_precondition() {
        let e = vec![vec![1.0]];
        assert_eq!(
            verify_lemma1(&e, &SpdMatrix::identity(1), order(0.5), 1e-3, None),
            Err(AnalysisError::TooShort(1))
        );
    }

    #[test]
    fn metrics_on_simple_signals() {
        let time: Vec<f64> = (0..300).map(|k| k as f64 * 0.01).collect();
        let zero = vec![0.0; 300];
        let m = signal_metrics("z", &time, &zero, 0.1);
        assert_eq!(m.convergence_time, Some(0.0));
        assert_eq!(m.rmse_tail, 0.0);

        let step: Vec<f64> = (0..300).map(|k| if k < 100 { 1.0 } else { 0.0 }).collect();
        let m = signal_metrics("s", &time, &step, 0.1);
        assert_eq!(m.convergence_time, Some(1.0));

        let never: Vec<f64> = time.iter().map(|t| (5.0 * t).cos()).collect();
        assert_eq!(signal_metrics("c", &time, &never, 0.1).convergence_time, None);
    }

    #[test]
    fn convergence_time_monotone_under_scaling() {
        let time: Vec<f64> = (0..500).map(|k| k as f64 * 0.01).collect();
        let decay: Vec<f64> = time.iter().map(|t| (-t).exp() * (7.0 * t).sin()).collect();
        let base = signal_metrics("d", &time, &decay, 0.05).convergence_time.unwrap();
        for c in [0.9, 0.5, 0.1] {
            let scaled: Vec<f64> = decay.iter().map(|v| c * v).collect();
            let t = signal_metrics("d", &time, &scaled, 0.05).convergence_time.unwrap();
            assert!(t <= base);
        }
    }
}
