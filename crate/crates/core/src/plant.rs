//! Commensurate fractional-order plant in observable canonical form:
//! `D^a x_i = x_{i+1}` for `i < n` and `D^a x_n = f1(x) + f2(x) * f(t)`, output `y = x_1`.

use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::fraccalc::{FracError, FractionalOrder, GlHistory, GlSolver};

/// States whose magnitude exceeds this are treated as divergence.
pub const DIVERGENCE_GUARD: f64 = 1e9;

const BOUND_MARGIN: f64 = 1.2;
const BOUND_FLOOR: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("plant dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("initial state has {got} entries, expected {expected}")]
    InitialState { expected: usize, got: usize },
    #[error("{name} references x{index} but the plant has {n} states")]
    VariableOutOfRange { name: &'static str, index: usize, n: usize },
    #[error("{0} may not depend on time")]
    TimeDependent(&'static str),
    #[error("fault expression may depend on t only")]
    FaultDependsOnState,
    #[error("evaluating {name} at t = {time}, x = {state:?}: {source}")]
    Eval {
        name: &'static str,
        time: f64,
        state: Vec<f64>,
        source: EvalError,
    },
    #[error("trajectory diverged at t = {time} (|{variable}| = {value:e})")]
    Divergence { time: f64, variable: String, value: f64 },
    #[error(transparent)]
    Frac(#[from] FracError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    n: usize,
    alpha: FractionalOrder,
    f1: Expr,
    f2: Expr,
    fault: Expr,
    x0: Vec<f64>,
}

impl PlantModel {
    pub fn new(alpha: FractionalOrder, f1: Expr, f2: Expr, fault: Expr, x0: Vec<f64>) -> Result<Self, PlantError> {
        let n = x0.len();
        if n < 2 {
            return Err(PlantError::Dimension(n));
        }
        for (name, e) in [("f1", &f1), ("f2", &f2)] {
            let index = e.max_state_index();
            if index > n {
                return Err(PlantError::VariableOutOfRange { name, index, n });
            }
            if e.uses_time() {
                return Err(PlantError::TimeDependent(name));
            }
        }
        if fault.max_state_index() > 0 {
            return Err(PlantError::FaultDependsOnState);
        }
        Ok(Self {
            n,
            alpha,
            f1,
            f2,
            fault,
            x0,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }

    pub fn f1(&self) -> &Expr {
        &self.f1
    }

    pub fn f2(&self) -> &Expr {
        &self.f2
    }

    pub fn fault(&self) -> &Expr {
        &self.fault
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.x0
    }

    pub fn fault_at(&self, time: f64) -> Result<f64, PlantError> {
        self.fault.eval(&[], time).map_err(|source| PlantError::Eval {
            name: "fault",
            time,
            state: Vec::new(),
            source,
        })
    }

    pub fn f1_at(&self, state: &[f64], time: f64) -> Result<f64, PlantError> {
        eval_named("f1", &self.f1, state, time)
    }

    pub fn f2_at(&self, state: &[f64], time: f64) -> Result<f64, PlantError> {
        eval_named("f2", &self.f2, state, time)
    }

    /// Right-hand side `(x_2, .., x_n, f1(x) + f2(x) f(t))` and the fault value.
    pub fn rhs(&self, state: &[f64], time: f64) -> Result<(Vec<f64>, f64), PlantError> {
        let fault = self.fault_at(time)?;
        let mut rhs: Vec<f64> = state[1..self.n].to_vec();
        let f1 = self.f1_at(state, time)?;
        // f2 only matters through the product; a vanishing fault gives the
        // same trajectory whatever f2 is.
        let last = if fault == 0.0 {
            f1
        } else {
            f1 + self.f2_at(state, time)? * fault
        };
        rhs.push(last);
        Ok((rhs, fault))
    }
}

fn eval_named(name: &'static str, e: &Expr, state: &[f64], time: f64) -> Result<f64, PlantError> {
    e.eval(state, time).map_err(|source| PlantError::Eval {
        name,
        time,
        state: state.to_vec(),
        source,
    })
}

/// Advances the plant one GL step from the latest samples in `histories`.
///
/// Returns the next state and the fault value at `time`. Nothing is appended.
pub fn plant_step(
    model: &PlantModel,
    solver: &mut GlSolver,
    histories: &[GlHistory],
    time: f64,
) -> Result<(Vec<f64>, f64), PlantError> {
    if histories.len() != model.n {
        return Err(
            FracError::Inconsistent(format!("{} histories for a {}-state plant", histories.len(), model.n)).into(),
        );
    }
    let state: Vec<f64> = histories
        .iter()
        .map(|h| h.last().ok_or(FracError::EmptyHistory))
        .collect::<Result<_, _>>()?;
    let (rhs, fault) = model.rhs(&state, time)?;
    let next = solver.step_all(histories, &rhs)?;
    check_divergence(&next, time, |i| format!("x{}", i + 1))?;
    Ok((next, fault))
}

pub(crate) fn check_divergence(values: &[f64], time: f64, name: impl Fn(usize) -> String) -> Result<(), PlantError> {
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() || v.abs() > DIVERGENCE_GUARD {
            return Err(PlantError::Divergence {
                time,
                variable: name(i),
                value: v,
            });
        }
    }
    Ok(())
}

/// Plant trajectory sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantTrajectory {
    pub step: f64,
    pub time: Vec<f64>,
    /// `states[i][k]` is `x_{i+1}` at sample `k`.
    pub states: Vec<Vec<f64>>,
    pub fault: Vec<f64>,
}

/// Simulates the plant alone for `steps` samples (including the initial one).
pub fn simulate_plant(
    model: &PlantModel,
    step: f64,
    steps: usize,
    memory: Option<usize>,
) -> Result<PlantTrajectory, PlantError> {
    let mut solver = GlSolver::new(model.alpha, step, memory)?;
    solver.reserve(steps);
    let mut histories: Vec<GlHistory> = model.x0.iter().map(|&x| solver.history(x)).collect();
    for h in &mut histories {
        h.reserve(steps);
    }
    let mut time = Vec::with_capacity(steps);
    let mut fault = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = k as f64 * step;
        time.push(t);
        if k + 1 == steps {
            fault.push(model.fault_at(t)?);
            break;
        }
        let (next, f) = plant_step(model, &mut solver, &histories, t)?;
        fault.push(f);
        for (h, v) in histories.iter_mut().zip(next) {
            h.push(v);
        }
    }
    let states = histories.into_iter().map(|h| h.samples().to_vec()).collect();
    Ok(PlantTrajectory {
        step,
        time,
        states,
        fault,
    })
}

/// Constants bounding the plant signals along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    /// `|x_i| < a[i-1]`
    pub a: Vec<f64>,
    /// bound on `|f|`
    pub a1: f64,
    /// bound on `|f1|`
    pub a2: f64,
    /// bound on `|f2|`
    pub a3: f64,
    /// bound on `|D^a f|`
    pub adot1: f64,
    /// bound on `|D^a f1|`
    pub adot2: f64,
    /// bound on `|D^a f2|`
    pub adot3: f64,
}

impl Bounds {
    pub fn is_valid(&self) -> bool {
        self.a
            .iter()
            .chain([self.a1, self.a2, self.a3, self.adot1, self.adot2, self.adot3].iter())
            .all(|v| v.is_finite() && *v > 0.0)
    }
}

fn sup_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn with_margin(sup: f64) -> f64 {
    (sup * BOUND_MARGIN).max(BOUND_FLOOR)
}

/// Empirical bounds: trajectory sup-norms times 1.2, floored at 1e-6.
pub fn estimate_bounds(model: &PlantModel, horizon: f64, step: f64) -> Result<Bounds, PlantError> {
    let steps = (horizon / step).round() as usize;
    let traj = simulate_plant(model, step, steps.max(2), None)?;
    let samples = traj.time.len();
    let mut f1 = Vec::with_capacity(samples);
    let mut f2 = Vec::with_capacity(samples);
    let mut state = vec![0.0; model.n];
    for k in 0..samples {
        for (s, x) in state.iter_mut().zip(&traj.states) {
            *s = x[k];
        }
        f1.push(model.f1_at(&state, traj.time[k])?);
        f2.push(model.f2_at(&state, traj.time[k])?);
    }
    let derivative = |signal: &[f64]| -> Result<f64, PlantError> {
        Ok(sup_abs(&crate::fraccalc::gl_derivative_series(
            signal,
            model.alpha,
            step,
            None,
        )?))
    };
    Ok(Bounds {
        a: traj.states.iter().map(|x| with_margin(sup_abs(x))).collect(),
        a1: with_margin(sup_abs(&traj.fault)),
        a2: with_margin(sup_abs(&f1)),
        a3: with_margin(sup_abs(&f2)),
        adot1: with_margin(derivative(&traj.fault)?),
        adot2: with_margin(derivative(&f1)?),
        adot3: with_margin(derivative(&f2)?),
    })
}
