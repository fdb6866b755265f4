//! Grünwald–Letnikov fractional differintegration on uniform grids.
//!
//! Signals are sampled at a fixed step `h`. The GL operator is always applied
//! to the signal shifted by its first sample, `x(t) - x(0)`, which makes the
//! discrete operator agree with the Caputo derivative for `0 < alpha < 1`:
//! constants have zero derivative and initial conditions are plain values.
//!
//! The explicit solver for `D^alpha x = g(x, t)` advances one sample with
//!
//! ```text
//! x[k+1] = x[0] + h^alpha * g(x[k], t[k]) - sum_{j=1}^{min(k+1, L)} w_j * (x[k+1-j] - x[0])
//! ```
//!
//! where `w_j = (-1)^j * binom(alpha, j)` and `L` is an optional short-memory
//! window.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FracError {
    #[error("fractional order must lie in (0, 1), got {0}")]
    InvalidOrder(f64),
    #[error("step size must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("memory length must be at least 1")]
    InvalidMemory,
    #[error("history is empty")]
    EmptyHistory,
    #[error("inconsistent histories: {0}")]
    Inconsistent(String),
}

/// Commensurate fractional order, restricted to the open interval (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self, FracError> {
        if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(FracError::InvalidOrder(alpha))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::fmt::Display for FractionalOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// GL coefficients `w_0..=w_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlWeights {
    alpha: FractionalOrder,
    weights: Vec<f64>,
}

impl GlWeights {
    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }

    /// Highest index `N` available.
    pub fn max_index(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, j: usize) -> Option<f64> {
        self.weights.get(j).copied()
    }
}

/// Computes `w_0..=w_count` by the recurrence `w_j = w_{j-1} * (1 - (alpha + 1) / j)`.
///
/// The recurrence avoids the overflow of the Γ-ratio form for large `j`.
pub fn gl_weights(alpha: FractionalOrder, count: usize) -> GlWeights {
    let a = alpha.value();
    let mut weights = Vec::with_capacity(count + 1);
    weights.push(1.0);
    for j in 1..=count {
        let prev = weights[j - 1];
        weights.push(prev * (1.0 - (a + 1.0) / j as f64));
    }
    GlWeights { alpha, weights }
}

/// Uniformly sampled signal history used by the GL convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct GlHistory {
    step: f64,
    samples: Vec<f64>,
    memory: Option<usize>,
}

impl GlHistory {
    /// Empty history. `memory = None` keeps the full memory.
    pub fn new(step: f64, memory: Option<usize>) -> Result<Self, FracError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(FracError::InvalidStep(step));
        }
        if memory == Some(0) {
            return Err(FracError::InvalidMemory);
        }
        Ok(Self {
            step,
            samples: Vec::new(),
            memory,
        })
    }

    pub fn with_initial(step: f64, initial: f64, memory: Option<usize>) -> Result<Self, FracError> {
        let mut history = Self::new(step, memory)?;
        history.push(initial);
        Ok(history)
    }

    pub fn from_samples(step: f64, samples: Vec<f64>, memory: Option<usize>) -> Result<Self, FracError> {
        let mut history = Self::new(step, memory)?;
        history.samples = samples;
        Ok(history)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn memory(&self) -> Option<usize> {
        self.memory
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn initial(&self) -> Option<f64> {
        self.samples.first().copied()
    }

    pub fn last(&self) -> Option<f64> {
        self.samples.last().copied()
    }

    pub fn push(&mut self, value: f64) {
        self.samples.push(value);
    }

    pub fn reserve(&mut self, additional: usize) {
        self.samples.reserve(additional);
    }
}

/// `sum_i w[i] * (x[i] - x0)` with four independent accumulators so the loop
/// vectorizes while staying deterministic.
#[inline]
fn shifted_dot(w: &[f64], x: &[f64], x0: f64) -> f64 {
    debug_assert_eq!(w.len(), x.len());
    let mut acc = [0.0f64; 4];
    let wc = w.chunks_exact(4);
    let xc = x.chunks_exact(4);
    let (wr, xr) = (wc.remainder(), xc.remainder());
    for (a, b) in wc.zip(xc) {
        acc[0] += a[0] * (b[0] - x0);
        acc[1] += a[1] * (b[1] - x0);
        acc[2] += a[2] * (b[2] - x0);
        acc[3] += a[3] * (b[3] - x0);
    }
    let mut sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (a, b) in wr.iter().zip(xr) {
        sum += a * (b - x0);
    }
    sum
}

/// Weights stored in reverse order so the convolution runs as a forward dot
/// product against contiguous history slices.
#[derive(Debug, Clone)]
struct ReversedWeights {
    alpha: FractionalOrder,
    // rev[cap - j] = w_j for j in 1..=cap
    rev: Vec<f64>,
}

impl ReversedWeights {
    fn new(alpha: FractionalOrder, capacity: usize) -> Self {
        let mut this = Self { alpha, rev: Vec::new() };
        this.ensure(capacity.max(16));
        this
    }

    fn capacity(&self) -> usize {
        self.rev.len()
    }

    fn ensure(&mut self, count: usize) {
        if count <= self.capacity() {
            return;
        }
        let cap = count.max(2 * self.capacity());
        let w = gl_weights(self.alpha, cap);
        self.rev = w.as_slice()[1..].iter().rev().copied().collect();
    }

    /// `sum_{j=1}^{m} w_j * (x[end-j] - x0)` where `x` ends at index `end - 1`.
    fn tail_sum(&mut self, samples: &[f64], end: usize, m: usize, x0: f64) -> f64 {
        if m == 0 {
            return 0.0;
        }
        self.ensure(m);
        let cap = self.capacity();
        shifted_dot(&self.rev[cap - m..], &samples[end - m..end], x0)
    }
}

/// GL estimate of `D^alpha x` at the latest sample of `signal`.
pub fn gl_derivative(signal: &GlHistory, alpha: FractionalOrder) -> Result<f64, FracError> {
    let k = signal.len().checked_sub(1).ok_or(FracError::EmptyHistory)?;
    let mut weights = ReversedWeights::new(alpha, k);
    Ok(derivative_at(
        signal.samples(),
        k,
        &mut weights,
        signal.step,
        signal.memory,
        alpha,
    ))
}

fn derivative_at(
    samples: &[f64],
    k: usize,
    weights: &mut ReversedWeights,
    step: f64,
    memory: Option<usize>,
    alpha: FractionalOrder,
) -> f64 {
    let x0 = samples[0];
    let m = memory.map_or(k, |l| k.min(l));
    let sum = (samples[k] - x0) + weights.tail_sum(samples, k, m, x0);
    sum / step.powf(alpha.value())
}

/// GL derivative at every sample of a uniformly sampled signal.
pub fn gl_derivative_series(
    samples: &[f64],
    alpha: FractionalOrder,
    step: f64,
    memory: Option<usize>,
) -> Result<Vec<f64>, FracError> {
    if samples.is_empty() {
        return Err(FracError::EmptyHistory);
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(FracError::InvalidStep(step));
    }
    let mut weights = ReversedWeights::new(alpha, samples.len());
    Ok((0..samples.len())
        .map(|k| derivative_at(samples, k, &mut weights, step, memory, alpha))
        .collect())
}

/// Explicit GL solver for `D^alpha x = g`, shared by every variable of a simulation.
#[derive(Debug, Clone)]
pub struct GlSolver {
    alpha: FractionalOrder,
    step: f64,
    step_pow: f64,
    memory: Option<usize>,
    weights: ReversedWeights,
}

impl GlSolver {
    pub fn new(alpha: FractionalOrder, step: f64, memory: Option<usize>) -> Result<Self, FracError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(FracError::InvalidStep(step));
        }
        if memory == Some(0) {
            return Err(FracError::InvalidMemory);
        }
        Ok(Self {
            alpha,
            step,
            step_pow: step.powf(alpha.value()),
            memory,
            weights: ReversedWeights::new(alpha, 1024),
        })
    }

    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn memory(&self) -> Option<usize> {
        self.memory
    }

    /// Pre-grows the weight table for `count` steps.
    pub fn reserve(&mut self, count: usize) {
        let m = self.memory.map_or(count, |l| count.min(l));
        self.weights.ensure(m);
    }

    pub fn history(&self, initial: f64) -> GlHistory {
        GlHistory {
            step: self.step,
            samples: vec![initial],
            memory: self.memory,
        }
    }

    /// Next sample of a single history under right-hand side `rhs`.
    pub fn next_sample(&mut self, history: &GlHistory, rhs: f64) -> Result<f64, FracError> {
        let samples = history.samples();
        let x0 = *samples.first().ok_or(FracError::EmptyHistory)?;
        let len = samples.len();
        let m = self.memory.map_or(len, |l| len.min(l));
        let memory_term = self.weights.tail_sum(samples, len, m, x0);
        Ok(x0 + self.step_pow * rhs - memory_term)
    }

    /// Next samples for a set of histories that share the grid. Nothing is appended.
    pub fn step_all(&mut self, histories: &[GlHistory], rhs: &[f64]) -> Result<Vec<f64>, FracError> {
        check_consistent(histories, rhs)?;
        if let Some(first) = histories.first() {
            if first.step != self.step {
                return Err(FracError::Inconsistent(format!(
                    "history step {} differs from solver step {}",
                    first.step, self.step
                )));
            }
        }
        histories
            .iter()
            .zip(rhs)
            .map(|(h, &g)| self.next_sample(h, g))
            .collect()
    }
}

fn check_consistent(histories: &[GlHistory], rhs: &[f64]) -> Result<(), FracError> {
    if histories.len() != rhs.len() {
        return Err(FracError::Inconsistent(format!(
            "{} histories but {} right-hand sides",
            histories.len(),
            rhs.len()
        )));
    }
    let Some(first) = histories.first() else {
        return Ok(());
    };
    if first.is_empty() {
        return Err(FracError::EmptyHistory);
    }
    for (i, h) in histories.iter().enumerate().skip(1) {
        if h.step != first.step {
            return Err(FracError::Inconsistent(format!(
                "history {i} has step {} instead of {}",
                h.step, first.step
            )));
        }
        if h.len() != first.len() {
            return Err(FracError::Inconsistent(format!(
                "history {i} has {} samples instead of {}",
                h.len(),
                first.len()
            )));
        }
        if h.memory != first.memory {
            return Err(FracError::Inconsistent(format!(
                "history {i} has a different memory length"
            )));
        }
    }
    Ok(())
}

/// One explicit GL step for each history. The caller commits the returned values.
pub fn gl_step(histories: &[GlHistory], rhs: &[f64], alpha: FractionalOrder) -> Result<Vec<f64>, FracError> {
    check_consistent(histories, rhs)?;
    let Some(first) = histories.first() else {
        return Ok(Vec::new());
    };
    let mut solver = GlSolver::new(alpha, first.step, first.memory)?;
    solver.reserve(first.len());
    solver.step_all(histories, rhs)
}
