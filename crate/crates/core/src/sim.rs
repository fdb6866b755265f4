//! Plant/observer co-simulation on a shared grid, and the CSV trajectory format.
//!
//! Within each step the plant is advanced first and its new output sample
//! `y = x_1[k+1]` is handed to the observer, which then advances from its own
//! sample `k`. Row `k` of a [`Trajectory`] holds the plant and observer values
//! at `t_k`, the errors `e_1 = x_1[k] - x̂_1[k]`, `e_i = x̃_i[k] - x̂_i[k]`,
//! `e_f = f̃[k] - f̂[k]`, and the flags used to advance the observer from row
//! `k` to row `k + 1`.

use std::io::{Read, Write};

use thiserror::Error;

use crate::fraccalc::GlSolver;
use crate::observer::{GainSet, Observer, ObserverError, ObserverState, StepInfo};
use crate::plant::{plant_step, PlantError, PlantModel};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("step size must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("horizon {horizon} must exceed the step {step}")]
    InvalidHorizon { horizon: f64, step: f64 },
    #[error("gains serve {gains} states but the plant has {plant}")]
    Dimension { gains: usize, plant: usize },
    #[error("simulation stopped at t = {time}: {source}")]
    Diverged {
        time: f64,
        source: Box<dyn std::error::Error + Send + Sync>,
        /// Rows recorded before the failure.
        partial: Box<Trajectory>,
    },
    #[error(transparent)]
    Observer(#[from] ObserverError),
    #[error(transparent)]
    Plant(#[from] PlantError),
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad header: {0}")]
    Header(String),
    #[error("row {row}, column '{column}': cannot parse '{value}'")]
    Value { row: usize, column: String, value: String },
}

/// Everything needed to run one co-simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub plant: PlantModel,
    pub gains: GainSet,
    pub observer_initial: ObserverState,
    pub flag_dwell_steps: usize,
    pub step: f64,
    pub horizon: f64,
    pub memory_length: Option<usize>,
}

impl Scenario {
    /// Number of recorded samples, `round(horizon / step)`.
    pub fn samples(&self) -> usize {
        (self.horizon / self.step).round() as usize
    }
}

/// Uniformly sampled co-simulation record, stored column-wise.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub time: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub xhat: Vec<Vec<f64>>,
    /// `x̃_2..x̃_n`
    pub xtilde: Vec<Vec<f64>>,
    pub fault: Vec<f64>,
    pub fhat: Vec<f64>,
    pub ftilde: Vec<f64>,
    pub thetatilde: Vec<f64>,
    pub e: Vec<Vec<f64>>,
    pub ef: Vec<f64>,
    pub flags: Vec<Vec<bool>>,
}

impl Trajectory {
    pub fn new(n: usize) -> Self {
        Self {
            x: vec![Vec::new(); n],
            xhat: vec![Vec::new(); n],
            xtilde: vec![Vec::new(); n - 1],
            e: vec![Vec::new(); n],
            flags: vec![Vec::new(); n],
            ..Default::default()
        }
    }

    pub fn dimension(&self) -> usize {
        self.x.len()
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    fn reserve(&mut self, rows: usize) {
        self.time.reserve(rows);
        for col in self
            .x
            .iter_mut()
            .chain(&mut self.xhat)
            .chain(&mut self.xtilde)
            .chain(&mut self.e)
        {
            col.reserve(rows);
        }
        for col in [
            &mut self.fault,
            &mut self.fhat,
            &mut self.ftilde,
            &mut self.thetatilde,
            &mut self.ef,
        ] {
            col.reserve(rows);
        }
    }

    fn record(&mut self, time: f64, x: &[f64], fault: f64, obs: &ObserverState, info: &StepInfo) {
        self.time.push(time);
        for (col, v) in self.x.iter_mut().zip(x) {
            col.push(*v);
        }
        for (col, v) in self.xhat.iter_mut().zip(&obs.xhat) {
            col.push(*v);
        }
        for (col, v) in self.xtilde.iter_mut().zip(&obs.xtilde) {
            col.push(*v);
        }
        self.fault.push(fault);
        self.fhat.push(obs.fhat);
        self.ftilde.push(obs.ftilde);
        self.thetatilde.push(obs.thetatilde);
        for (col, v) in self.e.iter_mut().zip(&info.errors.e) {
            col.push(*v);
        }
        self.ef.push(info.errors.ef);
        for (col, v) in self.flags.iter_mut().zip(&info.flags) {
            col.push(*v);
        }
    }

    /// Column names in CSV order.
    pub fn header(n: usize) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend((1..=n).map(|i| format!("x{i}")));
        h.extend((1..=n).map(|i| format!("xhat{i}")));
        h.extend((2..=n).map(|i| format!("xtilde{i}")));
        h.extend(["f", "fhat", "ftilde", "thetatilde"].map(String::from));
        h.extend((1..=n).map(|i| format!("e{i}")));
        h.push("ef".to_string());
        h.extend((1..=n).map(|i| format!("E{i}")));
        h
    }

    fn row(&self, k: usize) -> Vec<f64> {
        let mut r = vec![self.time[k]];
        r.extend(self.x.iter().map(|c| c[k]));
        r.extend(self.xhat.iter().map(|c| c[k]));
        r.extend(self.xtilde.iter().map(|c| c[k]));
        r.extend([self.fault[k], self.fhat[k], self.ftilde[k], self.thetatilde[k]]);
        r.extend(self.e.iter().map(|c| c[k]));
        r.push(self.ef[k]);
        r
    }

    /// Errors `(e_1, .., e_n, e_f)` per sample.
    pub fn error_vectors(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|k| {
                let mut v: Vec<f64> = self.e.iter().map(|c| c[k]).collect();
                v.push(self.ef[k]);
                v
            })
            .collect()
    }

    /// CSV with a header row; reals use 17 significant digits, flags are 0/1.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), CsvError> {
        let n = self.dimension();
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(Self::header(n))?;
        let mut fields: Vec<String> = Vec::new();
        for k in 0..self.len() {
            fields.clear();
            fields.extend(self.row(k).into_iter().map(|v| format!("{v:.16e}")));
            fields.extend(self.flags.iter().map(|c| if c[k] { "1".into() } else { "0".into() }));
            w.write_record(&fields)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, CsvError> {
        let mut r = csv::Reader::from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
        // 5n + 5 columns including time
        if header.len() < 15 || !(header.len() - 5).is_multiple_of(5) {
            return Err(CsvError::Header(format!("{} columns", header.len())));
        }
        let n = (header.len() - 5) / 5;
        if header != Self::header(n) {
            return Err(CsvError::Header(header.join(",")));
        }
        let mut traj = Self::new(n);
        for (row, record) in r.records().enumerate() {
            let record = record?;
            let mut values = Vec::with_capacity(header.len());
            for (column, field) in header.iter().zip(record.iter()) {
                let bad = || CsvError::Value {
                    row: row + 1,
                    column: column.clone(),
                    value: field.to_string(),
                };
                let v = if column.starts_with('E') {
                    match field {
                        "0" => 0.0,
                        "1" => 1.0,
                        _ => return Err(bad()),
                    }
                } else {
                    field.parse::<f64>().map_err(|_| bad())?
                };
                values.push(v);
            }
            let mut it = values.into_iter();
            let mut take = |count: usize| -> Vec<f64> { it.by_ref().take(count).collect() };
            traj.time.extend(take(1));
            for col in &mut traj.x {
                col.extend(take(1));
            }
            for col in &mut traj.xhat {
                col.extend(take(1));
            }
            for col in &mut traj.xtilde {
                col.extend(take(1));
            }
            let quad = take(4);
            traj.fault.push(quad[0]);
            traj.fhat.push(quad[1]);
            traj.ftilde.push(quad[2]);
            traj.thetatilde.push(quad[3]);
            for col in &mut traj.e {
                col.extend(take(1));
            }
            traj.ef.extend(take(1));
            for col in &mut traj.flags {
                col.extend(take(1).into_iter().map(|v| v == 1.0));
            }
        }
        Ok(traj)
    }
}

fn diverged(time: f64, source: impl std::error::Error + Send + Sync + 'static, partial: &Trajectory) -> SimError {
    SimError::Diverged {
        time,
        source: Box::new(source),
        partial: Box::new(partial.clone()),
    }
}

/// Runs plant and observer together for `scenario.samples()` samples.
///
/// On divergence the rows recorded so far are returned inside the error.
pub fn simulate(scenario: &Scenario) -> Result<Trajectory, SimError> {
    let step = scenario.step;
    if !(step.is_finite() && step > 0.0) {
        return Err(SimError::InvalidStep(step));
    }
    if scenario.horizon.is_nan() || scenario.horizon <= step {
        return Err(SimError::InvalidHorizon {
            horizon: scenario.horizon,
            step,
        });
    }
    let n = scenario.plant.dimension();
    if scenario.gains.dimension() != n {
        return Err(SimError::Dimension {
            gains: scenario.gains.dimension(),
            plant: n,
        });
    }
    let samples = scenario.samples();
    let plant = &scenario.plant;
    let mut solver = GlSolver::new(plant.alpha(), step, scenario.memory_length).map_err(PlantError::from)?;
    solver.reserve(samples);
    let mut histories: Vec<_> = plant.initial_state().iter().map(|&x| solver.history(x)).collect();
    for h in &mut histories {
        h.reserve(samples);
    }
    let mut observer = Observer::new(
        plant.f1().clone(),
        plant.f2().clone(),
        scenario.gains.clone(),
        plant.alpha(),
        step,
        scenario.memory_length,
        scenario.observer_initial.clone(),
        scenario.flag_dwell_steps,
    )?;
    observer.reserve(samples);

    let mut traj = Trajectory::new(n);
    traj.reserve(samples);
    let mut x: Vec<f64> = plant.initial_state().to_vec();
    for k in 0..samples {
        let t = k as f64 * step;
        let fault = match plant.fault_at(t) {
            Ok(f) => f,
            Err(e) => return Err(diverged(t, e, &traj)),
        };
        let errors = observer.state().errors(x[0]);
        if k + 1 == samples {
            let flags = observer.peek(x[0]).flags;
            traj.record(t, &x, fault, observer.state(), &StepInfo { errors, flags });
            break;
        }
        let next = match plant_step(plant, &mut solver, &histories, t) {
            Ok((next, _)) => next,
            Err(e) => {
                let flags = observer.peek(x[0]).flags;
                traj.record(t, &x, fault, observer.state(), &StepInfo { errors, flags });
                return Err(diverged(t, e, &traj));
            }
        };
        let before = observer.state().clone();
        let used = match observer.step(next[0], t) {
            Ok(info) => info,
            Err(e) => {
                let flags = observer.peek(next[0]).flags;
                traj.record(t, &x, fault, &before, &StepInfo { errors, flags });
                return Err(diverged(t, e, &traj));
            }
        };
        traj.record(
            t,
            &x,
            fault,
            &before,
            &StepInfo {
                errors,
                flags: used.flags,
            },
        );
        for (h, &v) in histories.iter_mut().zip(&next) {
            h.push(v);
        }
        x = next;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::fraccalc::FractionalOrder;

    fn scenario(horizon: f64) -> Scenario {
        let plant = PlantModel::new(
            FractionalOrder::new(0.7).unwrap(),
            parse("-0.5*x1 - sin(x2) - x3*abs(x3)").unwrap(),
            parse("1").unwrap(),
            parse("0.5*cos(0.5*pi*t)").unwrap(),
            vec![0.1, 0.1, -0.1],
        )
        .unwrap();
        Scenario {
            plant,
            gains: GainSet::new(vec![0.1; 4], vec![1.0, 2.0, 5.0, 10.0], 0.05).unwrap(),
            observer_initial: ObserverState::zeros(3),
            flag_dwell_steps: 1,
            step: 1e-3,
            horizon,
            memory_length: None,
        }
    }

    #[test]
    fn tiny_run_row_count() {
        let traj = simulate(&scenario(0.01)).unwrap();
        assert_eq!(traj.len(), 10);
        assert_eq!(traj.time[9], 9.0 * 1e-3);
        assert_eq!(traj.x[0][0], 0.1);
        assert_eq!(traj.e[0][0], 0.1);
        assert_eq!(Trajectory::header(3).len(), 20);
    }

    #[test]
    fn csv_round_trip() {
        let traj = simulate(&scenario(0.5)).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let back = Trajectory::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, traj);
        let mut again = Vec::new();
        back.write_csv(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn rejects_bad_grid() {
        let mut s = scenario(0.01);
        s.horizon = 1e-3;
        assert!(matches!(simulate(&s), Err(SimError::InvalidHorizon { .. })));
        s.step = -1.0;
        assert!(matches!(simulate(&s), Err(SimError::InvalidStep(_))));
    }

    #[test]
    fn divergence_returns_partial_rows() {
        let mut s = scenario(5.0);
        s.plant = PlantModel::new(
            FractionalOrder::new(0.9).unwrap(),
            parse("x2^3").unwrap(),
            parse("0").unwrap(),
            parse("0").unwrap(),
            vec![1.0, 5.0],
        )
        .unwrap();
        s.gains = GainSet::new(vec![0.1; 3], vec![1.0; 3], 0.05).unwrap();
        s.observer_initial = ObserverState::zeros(2);
        match simulate(&s) {
            Err(SimError::Diverged { partial, time, .. }) => {
                assert!(!partial.is_empty());
                assert!(time < 5.0);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
