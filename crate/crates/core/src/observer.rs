//! Step-by-step super-twisting observer driven only by the output `y = x_1`.
//!
//! Channel `i` (1..=n) pairs the estimate `x̂_i` with an auxiliary variable:
//! `x̃_{i+1}` for `i < n`, and the raw fault estimate `f̃` for `i = n`. Channel
//! `n + 1` pairs the filtered fault estimate `f̂` with `θ̃`. Each channel is a
//! super-twisting pair
//!
//! ```text
//! D^a x̂  = feed + lambda * |e|^0.5 * sign(e)
//! D^a aux = alpha * sign(e)
//! ```
//!
//! and channel `i >= 2` is gated by the activation flag `E_{i-1}`, where
//! `E_i = 1` iff `|e_j| <= eps` for every `j <= i`. A gated-off channel holds
//! its variables at their current values.

use thiserror::Error;

use crate::expr::{sign, Expr};
use crate::fraccalc::{FracError, FractionalOrder, GlHistory, GlSolver};
use crate::plant::{check_divergence, PlantError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObserverError {
    #[error("gain lists must both have n + 1 >= 3 entries (lambda: {lambda}, alpha: {alpha})")]
    GainDimension { lambda: usize, alpha: usize },
    #[error("gain {name}_{index} must be finite and non-negative, got {value}")]
    InvalidGain {
        name: &'static str,
        index: usize,
        value: f64,
    },
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("flag dwell must be at least one step")]
    InvalidDwell,
    #[error("observer state has {got} variables, expected {expected}")]
    StateDimension { expected: usize, got: usize },
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Frac(#[from] FracError),
}

/// Observer gains `lambda_1..lambda_{n+1}`, `alpha_1..alpha_{n+1}` and threshold `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSet {
    lambda: Vec<f64>,
    alpha_gain: Vec<f64>,
    epsilon: f64,
}

impl GainSet {
    pub fn new(lambda: Vec<f64>, alpha_gain: Vec<f64>, epsilon: f64) -> Result<Self, ObserverError> {
        if lambda.len() != alpha_gain.len() || lambda.len() < 3 {
            return Err(ObserverError::GainDimension {
                lambda: lambda.len(),
                alpha: alpha_gain.len(),
            });
        }
        for (name, gains) in [("lambda", &lambda), ("alpha", &alpha_gain)] {
            if let Some((i, &value)) = gains.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
                return Err(ObserverError::InvalidGain {
                    name,
                    index: i + 1,
                    value,
                });
            }
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(ObserverError::InvalidEpsilon(epsilon));
        }
        Ok(Self {
            lambda,
            alpha_gain,
            epsilon,
        })
    }

    /// Plant dimension served by this gain set.
    pub fn dimension(&self) -> usize {
        self.lambda.len() - 1
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn alpha_gain(&self) -> &[f64] {
        &self.alpha_gain
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Estimation errors `e_i = x̃_i - x̂_i` (with `x̃_1 = y`) and `e_f = f̃ - f̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub e: Vec<f64>,
    pub ef: f64,
}

/// The `2n + 2` observer variables and the activation flags `E_1..E_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState {
    pub xhat: Vec<f64>,
    /// `x̃_2..x̃_n`
    pub xtilde: Vec<f64>,
    pub ftilde: f64,
    pub fhat: f64,
    pub thetatilde: f64,
    pub flags: Vec<bool>,
}

impl ObserverState {
    pub fn zeros(n: usize) -> Self {
        Self {
            xhat: vec![0.0; n],
            xtilde: vec![0.0; n - 1],
            ftilde: 0.0,
            fhat: 0.0,
            thetatilde: 0.0,
            flags: vec![false; n],
        }
    }

    /// Builds a state from packed variables `[x̂_1..x̂_n, x̃_2..x̃_n, f̃, f̂, θ̃]`.
    pub fn from_packed(n: usize, values: &[f64]) -> Result<Self, ObserverError> {
        if values.len() != 2 * n + 2 {
            return Err(ObserverError::StateDimension {
                expected: 2 * n + 2,
                got: values.len(),
            });
        }
        Ok(Self {
            xhat: values[..n].to_vec(),
            xtilde: values[n..2 * n - 1].to_vec(),
            ftilde: values[2 * n - 1],
            fhat: values[2 * n],
            thetatilde: values[2 * n + 1],
            flags: vec![false; n],
        })
    }

    pub fn dimension(&self) -> usize {
        self.xhat.len()
    }

    pub fn packed(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.dimension() + 2);
        v.extend_from_slice(&self.xhat);
        v.extend_from_slice(&self.xtilde);
        v.extend_from_slice(&[self.ftilde, self.fhat, self.thetatilde]);
        v
    }

    /// `x̃ = (y, x̃_2, .., x̃_n)`
    pub fn auxiliary_state(&self, y: f64) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dimension());
        v.push(y);
        v.extend_from_slice(&self.xtilde);
        v
    }

    pub fn errors(&self, y: f64) -> ErrorRecord {
        let e = self
            .auxiliary_state(y)
            .iter()
            .zip(&self.xhat)
            .map(|(aux, est)| aux - est)
            .collect();
        ErrorRecord {
            e,
            ef: self.ftilde - self.fhat,
        }
    }
}

/// Packed index of the estimate and auxiliary variable of channel `c` (1-based).
pub fn channel_indices(n: usize, c: usize) -> (usize, usize) {
    debug_assert!((1..=n + 1).contains(&c));
    if c == n + 1 {
        (2 * n, 2 * n + 1)
    } else if c == n {
        (n - 1, 2 * n - 1)
    } else {
        (c - 1, n + c - 1)
    }
}

/// Gate of channel `c`: 1 for the first channel, `E_{c-1}` otherwise.
pub fn channel_gate(flags: &[bool], c: usize) -> bool {
    c == 1 || flags[c - 2]
}

/// `E_i = 1` iff `|e_j| <= epsilon` for all `j <= i`. Recomputed from scratch.
pub fn update_flags(errors: &ErrorRecord, epsilon: f64) -> Vec<bool> {
    let mut all = true;
    errors
        .e
        .iter()
        .map(|e| {
            all = all && e.abs() <= epsilon;
            all
        })
        .collect()
}

#[inline]
fn injection(e: f64) -> (f64, f64) {
    let s = sign(e);
    (e.abs().sqrt() * s, s)
}

/// Gated right-hand sides of all observer variables in packed order.
///
/// Uses `state.flags`, which must already be updated for the current step.
pub fn observer_rhs(
    state: &ObserverState,
    y: f64,
    f1: &Expr,
    f2: &Expr,
    gains: &GainSet,
) -> Result<Vec<f64>, ObserverError> {
    let n = state.dimension();
    let errors = state.errors(y);
    let mut rhs = vec![0.0; 2 * n + 2];
    for c in 1..=n + 1 {
        if !channel_gate(&state.flags, c) {
            continue;
        }
        let e = if c <= n { errors.e[c - 1] } else { errors.ef };
        let feed = if c < n {
            state.xtilde[c - 1]
        } else if c == n {
            let aux = state.auxiliary_state(y);
            let f1v = eval(f1, "f1", &aux)?;
            let f2v = eval(f2, "f2", &aux)?;
            f1v + f2v * state.ftilde
        } else {
            state.thetatilde
        };
        let (root, s) = injection(e);
        let (primary, partner) = channel_indices(n, c);
        rhs[primary] = feed + gains.lambda[c - 1] * root;
        rhs[partner] = gains.alpha_gain[c - 1] * s;
    }
    Ok(rhs)
}

fn eval(e: &Expr, name: &'static str, state: &[f64]) -> Result<f64, ObserverError> {
    e.eval(state, 0.0).map_err(|source| {
        PlantError::Eval {
            name,
            time: f64::NAN,
            state: state.to_vec(),
            source,
        }
        .into()
    })
}

/// Errors and flags in effect for one observer step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub errors: ErrorRecord,
    pub flags: Vec<bool>,
}

/// Observer with its GL histories.
#[derive(Debug, Clone)]
pub struct Observer {
    f1: Expr,
    f2: Expr,
    gains: GainSet,
    dwell: usize,
    counts: Vec<usize>,
    solver: GlSolver,
    histories: Vec<GlHistory>,
    state: ObserverState,
}

impl Observer {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        f1: Expr,
        f2: Expr,
        gains: GainSet,
        alpha: FractionalOrder,
        step: f64,
        memory: Option<usize>,
        initial: ObserverState,
        flag_dwell_steps: usize,
    ) -> Result<Self, ObserverError> {
        let n = gains.dimension();
        if initial.dimension() != n {
            return Err(ObserverError::StateDimension {
                expected: 2 * n + 2,
                got: 2 * initial.dimension() + 2,
            });
        }
        if flag_dwell_steps == 0 {
            return Err(ObserverError::InvalidDwell);
        }
        let solver = GlSolver::new(alpha, step, memory)?;
        let histories = initial.packed().into_iter().map(|v| solver.history(v)).collect();
        Ok(Self {
            f1,
            f2,
            gains,
            dwell: flag_dwell_steps,
            counts: vec![0; n],
            solver,
            histories,
            state: initial,
        })
    }

    pub fn reserve(&mut self, steps: usize) {
        self.solver.reserve(steps);
        for h in &mut self.histories {
            h.reserve(steps);
        }
    }

    pub fn state(&self) -> &ObserverState {
        &self.state
    }

    pub fn gains(&self) -> &GainSet {
        &self.gains
    }

    pub fn histories(&self) -> &[GlHistory] {
        &self.histories
    }

    /// Flags that the next `step(y)` would use, without advancing dwell counters.
    pub fn peek(&self, y: f64) -> StepInfo {
        let errors = self.state.errors(y);
        let raw = update_flags(&errors, self.gains.epsilon);
        let flags = raw
            .iter()
            .zip(&self.counts)
            .map(|(&r, &c)| r && c + 1 >= self.dwell)
            .collect();
        StepInfo { errors, flags }
    }

    /// Updates the flags from the current errors, then advances every variable one GL step.
    pub fn step(&mut self, y: f64, time: f64) -> Result<StepInfo, ObserverError> {
        let info = self.peek(y);
        let raw = update_flags(&info.errors, self.gains.epsilon);
        for (count, r) in self.counts.iter_mut().zip(raw) {
            *count = if r { *count + 1 } else { 0 };
        }
        self.state.flags = info.flags.clone();

        let n = self.state.dimension();
        let rhs = observer_rhs(&self.state, y, &self.f1, &self.f2, &self.gains)?;
        let mut next = self.state.packed();
        for c in 1..=n + 1 {
            if !channel_gate(&self.state.flags, c) {
                continue;
            }
            let (primary, partner) = channel_indices(n, c);
            for idx in [primary, partner] {
                next[idx] = self.solver.next_sample(&self.histories[idx], rhs[idx])?;
            }
        }
        check_divergence(&next, time, |i| format!("observer variable {i}")).map_err(ObserverError::from)?;
        for (h, &v) in self.histories.iter_mut().zip(&next) {
            h.push(v);
        }
        let flags = std::mem::take(&mut self.state.flags);
        self.state = ObserverState::from_packed(n, &next)?;
        self.state.flags = flags;
        Ok(info)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn rec(e: &[f64]) -> ErrorRecord {
        ErrorRecord { e: e.to_vec(), ef: 0.0 }
    }

    fn paper_gains() -> GainSet {
        GainSet::new(vec![0.1; 4], vec![1.0, 2.0, 5.0, 10.0], 0.05).unwrap()
    }

    #[test]
    fn flag_rule() {
        assert_eq!(update_flags(&rec(&[0.0, 0.0, 0.0]), 0.01), vec![true, true, true]);
        assert_eq!(
            update_flags(&rec(&[0.005, 0.02, 0.001]), 0.01),
            vec![true, false, false]
        );
        assert_eq!(update_flags(&rec(&[0.02, 0.0, 0.0]), 0.01), vec![false, false, false]);
        assert_eq!(update_flags(&rec(&[0.01, -0.01, 0.0]), 0.01), vec![true, true, true]);
    }

    #[test]
    fn gain_validation() {
        assert!(matches!(
            GainSet::new(vec![0.1; 3], vec![1.0; 4], 0.1),
            Err(ObserverError::GainDimension { .. })
        ));
        assert!(matches!(
            GainSet::new(vec![0.1, -1.0, 0.1], vec![1.0; 3], 0.1),
            Err(ObserverError::InvalidGain {
                name: "lambda",
                index: 2,
                ..
            })
        ));
        assert!(matches!(
            GainSet::new(vec![0.1; 3], vec![1.0; 3], 0.0),
            Err(ObserverError::InvalidEpsilon(_))
        ));
        assert!(GainSet::new(vec![0.0; 3], vec![0.0; 3], 0.1).is_ok());
    }

    #[test]
    fn packed_layout() {
        let n = 3;
        let values: Vec<f64> = (0..8).map(f64::from).collect();
        let s = ObserverState::from_packed(n, &values).unwrap();
        assert_eq!(s.xhat, vec![0.0, 1.0, 2.0]);
        assert_eq!(s.xtilde, vec![3.0, 4.0]);
        assert_eq!((s.ftilde, s.fhat, s.thetatilde), (5.0, 6.0, 7.0));
        assert_eq!(s.packed(), values);
        assert_eq!(channel_indices(n, 1), (0, 3));
        assert_eq!(channel_indices(n, 2), (1, 4));
        assert_eq!(channel_indices(n, 3), (2, 5));
        assert_eq!(channel_indices(n, 4), (6, 7));
        assert!(ObserverState::from_packed(n, &values[..7]).is_err());
    }

    #[test]
    fn errors_use_output_for_first_channel() {
        let mut s = ObserverState::zeros(3);
        s.xhat = vec![0.5, 1.0, 2.0];
        s.xtilde = vec![1.5, 2.5];
        s.ftilde = 0.25;
        s.fhat = 0.5;
        let e = s.errors(0.75);
        assert_eq!(e.e, vec![0.25, 0.5, 0.5]);
        assert_eq!(e.ef, -0.25);
    }

    #[test]
    fn rhs_on_sliding_surface() {
        let f1 = parse("-0.5*x1 - sin(x2) - x3*abs(x3)").unwrap();
        let f2 = parse("1").unwrap();
        let mut s = ObserverState::zeros(3);
        s.xhat = vec![0.2, 0.3, -0.1];
        s.xtilde = vec![0.3, -0.1];
        s.ftilde = 0.4;
        s.fhat = 0.4;
        s.thetatilde = 0.7;
        s.flags = vec![true; 3];
        let rhs = observer_rhs(&s, 0.2, &f1, &f2, &paper_gains()).unwrap();
        let aux = [0.2, 0.3, -0.1];
        let f1v = f1.eval(&aux, 0.0).unwrap();
        assert_eq!(rhs[0], 0.3);
        assert_eq!(rhs[1], -0.1);
        assert_eq!(rhs[2], f1v + 0.4);
        assert_eq!(rhs[6], 0.7);
        for idx in [3, 4, 5, 7] {
            assert_eq!(rhs[idx], 0.0);
        }
    }

    #[test]
    fn rhs_first_channel_only() {
        let mut s = ObserverState::zeros(3);
        s.xtilde = vec![0.3, 9.0];
        s.thetatilde = 4.0;
        let gains = paper_gains();
        let rhs = observer_rhs(&s, 0.04, &parse("x1").unwrap(), &parse("1").unwrap(), &gains).unwrap();
        assert!((rhs[0] - (0.3 + 0.02)).abs() < 1e-15);
        assert_eq!(rhs[3], 1.0);
        for idx in [1, 2, 4, 5, 6, 7] {
            assert_eq!(rhs[idx], 0.0, "index {idx}");
        }
    }

    #[test]
    fn paper_block_structure() {
        // one flag at a time reproduces the E_1, E_2, E_3 gating of the three-state example
        let gains = paper_gains();
        let f1 = parse("-0.5*x1 - sin(x2) - x3*abs(x3)").unwrap();
        let f2 = parse("1").unwrap();
        let mut s = ObserverState::from_packed(3, &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]).unwrap();
        let y = 0.01;
        for level in 0..=3 {
            s.flags = (0..3).map(|i| i < level).collect();
            let rhs = observer_rhs(&s, y, &f1, &f2, &gains).unwrap();
            for c in 1..=4 {
                let (p, q) = channel_indices(3, c);
                let active = c == 1 || c - 1 <= level;
                assert_eq!(rhs[p] != 0.0 || rhs[q] != 0.0, active, "level {level} channel {c}");
            }
        }
        s.flags = vec![true; 3];
        let rhs = observer_rhs(&s, y, &f1, &f2, &gains).unwrap();
        let e2: f64 = 0.3 - 0.1;
        assert!((rhs[1] - (0.4 + 0.1 * e2.sqrt())).abs() < 1e-15);
        assert_eq!(rhs[4], 2.0);
        assert_eq!(rhs[5], 5.0);
        assert_eq!(rhs[7], -10.0);
    }

    fn observer(gains: GainSet, initial: ObserverState) -> Observer {
        Observer::new(
            parse("-0.5*x1 - sin(x2) - x3*abs(x3)").unwrap(),
            parse("1").unwrap(),
            gains,
            FractionalOrder::new(0.7).unwrap(),
            1e-3,
            None,
            initial,
            1,
        )
        .unwrap()
    }

    #[test]
    fn zero_observer_stays_at_zero() {
        let mut obs = observer(paper_gains(), ObserverState::zeros(3));
        for k in 0..500 {
            obs.step(0.0, k as f64 * 1e-3).unwrap();
            assert!(obs.state().packed().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn frozen_flags_only_move_first_channel() {
        // a tiny epsilon with a large output keeps every flag at zero
        let gains = GainSet::new(vec![0.1; 4], vec![1.0, 2.0, 5.0, 10.0], 1e-12).unwrap();
        let initial = ObserverState::from_packed(3, &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]).unwrap();
        let mut obs = observer(gains, initial.clone());
        for k in 0..300 {
            let info = obs.step(1.0 + k as f64 * 1e-3, k as f64 * 1e-3).unwrap();
            assert!(info.flags.iter().all(|f| !f));
        }
        let end = obs.state().packed();
        let start = initial.packed();
        assert_ne!(end[0], start[0]);
        assert_ne!(end[3], start[3]);
        for idx in [1, 2, 4, 5, 6, 7] {
            assert_eq!(end[idx].to_bits(), start[idx].to_bits());
        }
    }

    #[test]
    fn dwell_delays_activation() {
        let gains = GainSet::new(vec![0.1; 3], vec![1.0; 3], 0.5).unwrap();
        let make = |dwell| {
            Observer::new(
                parse("0").unwrap(),
                parse("0").unwrap(),
                gains.clone(),
                FractionalOrder::new(0.5).unwrap(),
                1e-3,
                None,
                ObserverState::zeros(2),
                dwell,
            )
            .unwrap()
        };
        let mut plain = make(1);
        let mut dwelling = make(3);
        for k in 0..3 {
            let a = plain.step(0.0, 0.0).unwrap();
            let b = dwelling.step(0.0, 0.0).unwrap();
            assert_eq!(a.flags, vec![true, true]);
            assert_eq!(b.flags, vec![k == 2, k == 2]);
        }
        assert!(matches!(
            Observer::new(
                parse("0").unwrap(),
                parse("0").unwrap(),
                gains,
                FractionalOrder::new(0.5).unwrap(),
                1e-3,
                None,
                ObserverState::zeros(2),
                0
            ),
            Err(ObserverError::InvalidDwell)
        ));
    }
}
