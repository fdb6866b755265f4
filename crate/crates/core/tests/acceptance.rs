//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion. Built with `harness = false`.
//!
//! Oracles here are independent of the library: Mittag-Leffler by direct
//! series with `statrs` gamma, power-law derivatives in closed form, a
//! hand-written channel map for the gating check, and a random expression
//! generator for the parser fuzz.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fracsmo::analysis::{check_gains, verify_lemma1, SpdMatrix};
use fracsmo::config::ScenarioConfig;
use fracsmo::expr::Expr;
use fracsmo::fraccalc::{gl_derivative, gl_derivative_series, FractionalOrder, GlHistory, GlSolver};
use fracsmo::observer::{GainSet, ObserverState};
use fracsmo::plant::{Bounds, PlantModel};
use fracsmo::sim::{simulate, Scenario, Trajectory};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use statrs::function::gamma::gamma;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<Duration, String> {
    let elapsed = start.elapsed();
    ensure(elapsed < limit, || format!("runtime {elapsed:.2?} exceeds {limit:?}"))?;
    Ok(elapsed)
}

// ---------------------------------------------------------------- oracles

/// `sum_k z^k / Gamma(a k + 1)` with the gamma function evaluated directly.
fn ml_series(a: f64, z: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = 1.0;
    for k in 0..170 {
        let g = gamma(a * k as f64 + 1.0);
        if !g.is_finite() {
            break;
        }
        let term = power / g;
        sum += term;
        if k > 10 && term.abs() < 1e-18 {
            break;
        }
        power *= z;
    }
    sum
}

fn paper_fault(t: f64) -> f64 {
    0.5 * (0.5 * PI * t).cos()
}

// ---------------------------------------------------------------- criteria

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let h = 1e-3;
    let alpha = FractionalOrder::new(0.7).unwrap();
    let samples: Vec<f64> = (0..=1000).map(|k| (k as f64 * h).powf(1.5)).collect();
    let estimate = gl_derivative(&GlHistory::from_samples(h, samples, None).unwrap(), alpha).unwrap();
    let exact = gamma(2.5) / gamma(1.8);
    let rel = ((estimate - exact) / exact).abs();
    ensure(rel < 0.01, || {
        format!("D^0.7 t^1.5 at t=1: {estimate} vs {exact} (rel {rel:.2e})")
    })?;

    let mut worst_const: f64 = 0.0;
    for a in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for c in [-2.0, 0.5, 7.0] {
            let d = gl_derivative_series(&[c; 3000], FractionalOrder::new(a).unwrap(), h, None).unwrap();
            worst_const = d.iter().fold(worst_const, |m, v| m.max(v.abs()));
        }
    }
    ensure(worst_const < 1e-8, || format!("constant derivative {worst_const:e}"))?;

    let near_one = FractionalOrder::new(1.0 - 1e-9).unwrap();
    let signal: Vec<f64> = (0..=2000)
        .map(|k| (k as f64 * h * 3.0).sin() + 2.0 * k as f64 * h + 0.5)
        .collect();
    let d = gl_derivative_series(&signal, near_one, h, None).unwrap();
    let mut worst_bd: f64 = 0.0;
    for k in 1..signal.len() {
        let bd = (signal[k] - signal[k - 1]) / h;
        worst_bd = worst_bd.max(((d[k] - bd) / bd).abs());
    }
    ensure(worst_bd < 1e-3, || {
        format!("backward difference rel error {worst_bd:e}")
    })?;
    let elapsed = within_time(start, Duration::from_secs(5))?;
    Ok(format!(
        "power law rel {rel:.2e}, constant {worst_const:.1e}, backward diff rel {worst_bd:.1e}, {elapsed:.2?}"
    ))
}

fn relaxation(h: f64, horizon: f64) -> Vec<(f64, f64)> {
    let alpha = FractionalOrder::new(0.7).unwrap();
    let mut solver = GlSolver::new(alpha, h, None).unwrap();
    let mut hist = solver.history(1.0);
    let steps = (horizon / h).round() as usize;
    let mut out = Vec::with_capacity(steps);
    for k in 1..=steps {
        let x = hist.last().unwrap();
        let next = solver.next_sample(&hist, -x).unwrap();
        hist.push(next);
        out.push((k as f64 * h, next));
    }
    out
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut max_rel = [0.0f64; 2];
    let mut sup_tail = [0.0f64; 2];
    for (i, h) in [1e-3, 5e-4].into_iter().enumerate() {
        for (t, x) in relaxation(h, 2.0) {
            let exact = ml_series(0.7, -t.powf(0.7));
            max_rel[i] = max_rel[i].max(((x - exact) / exact).abs());
            if t >= 0.05 - 1e-12 {
                sup_tail[i] = sup_tail[i].max((x - exact).abs());
            }
        }
    }
    ensure(max_rel[0] < 0.01, || {
        format!("h = 1e-3: max rel error {:.3e}", max_rel[0])
    })?;
    let ratio = sup_tail[1] / sup_tail[0];
    ensure(ratio <= 0.5, || format!("error ratio {ratio:.5} > 0.5"))?;
    let elapsed = within_time(start, Duration::from_secs(10))?;
    Ok(format!(
        "max rel error on [0,2]: {:.2e} (h=1e-3), {:.2e} (h=5e-4); sup-error ratio on [0.05,2]: {ratio:.5}, {elapsed:.2?}",
        max_rel[0], max_rel[1]
    ))
}

struct PaperRun {
    traj: Trajectory,
    epsilon: f64,
    elapsed: Duration,
}

fn paper_run() -> PaperRun {
    let config = ScenarioConfig::paper_example();
    let scenario = config.scenario().unwrap();
    let start = Instant::now();
    let traj = simulate(&scenario).expect("paper example runs");
    PaperRun {
        traj,
        epsilon: config.observer.epsilon,
        elapsed: start.elapsed(),
    }
}

fn golden_metrics_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/paper_metrics.txt")
}

fn criterion_3(run: &PaperRun) -> Outcome {
    let traj = &run.traj;
    let n = traj.dimension();
    ensure(n == 3 && traj.len() == 30_000, || {
        format!("unexpected shape {n} x {}", traj.len())
    })?;
    let first_set: Vec<f64> = traj
        .flags
        .iter()
        .map(|col| col.iter().position(|&f| f).map_or(f64::INFINITY, |k| traj.time[k]))
        .collect();
    ensure(
        first_set[0] < first_set[1] && first_set[1] < first_set[2] && first_set[2].is_finite(),
        || format!("activation order {first_set:?}"),
    )?;

    let band = 2.0 * run.epsilon;
    let tail_start = traj.time.iter().position(|&t| t >= 20.0 - 1e-9).unwrap();
    let mut tail_sup = vec![0.0f64; n];
    for (i, e) in traj.e.iter().enumerate() {
        tail_sup[i] = e[tail_start..].iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    ensure(tail_sup.iter().all(|&s| s <= band), || {
        format!("final-third sup errors {tail_sup:?} exceed {band}")
    })?;

    let half = traj.len() / 2;
    let sq: f64 = (half..traj.len())
        .map(|k| (traj.fhat[k] - paper_fault(traj.time[k])).powi(2))
        .sum();
    let rmse = (sq / (traj.len() - half) as f64).sqrt();
    ensure(rmse <= 0.05, || format!("fault tail RMSE {rmse:.5} > 0.05"))?;

    // frozen regression values from the first validated run
    let mut current = BTreeMap::new();
    current.insert("e1_final_third_sup", tail_sup[0]);
    current.insert("e2_final_third_sup", tail_sup[1]);
    current.insert("e3_final_third_sup", tail_sup[2]);
    current.insert("fault_tail_rmse", rmse);
    let path = golden_metrics_path();
    if std::env::var_os("FRACSMO_UPDATE_GOLDEN").is_some() {
        let text: String = current.iter().map(|(k, v)| format!("{k} = {v:.17e}\n")).collect();
        fs::write(&path, text).unwrap();
    }
    let golden = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    for line in golden.lines().filter(|l| !l.trim().is_empty()) {
        let (key, value) = line.split_once('=').ok_or_else(|| format!("bad golden line {line}"))?;
        let expected: f64 = value.trim().parse().map_err(|_| format!("bad golden value {line}"))?;
        let got = *current
            .get(key.trim())
            .ok_or_else(|| format!("unknown golden key {key}"))?;
        ensure((got - expected).abs() <= 1e-6 * expected.abs(), || {
            format!("{} drifted: {got:e} vs golden {expected:e}", key.trim())
        })?;
    }
    ensure(run.elapsed < Duration::from_secs(60), || {
        format!("runtime {:.2?}", run.elapsed)
    })?;
    Ok(format!(
        "E1/E2/E3 at {:.3}/{:.3}/{:.3} s; final-third sup |e| = {:.2e}/{:.2e}/{:.2e} <= {band}; fault RMSE {rmse:.4} <= 0.05; {:.2?}",
        first_set[0], first_set[1], first_set[2], tail_sup[0], tail_sup[1], tail_sup[2], run.elapsed
    ))
}

const F1_POOL: [&str; 5] = [
    "-x1 - x2",
    "-0.5*x1 - sin(x2) - x3*abs(x3)",
    "-x1 + 0.3*cos(x2)",
    "-2*x2 - x1^3",
    "-sin(x1) - 0.2*x2",
];

fn random_scenario(rng: &mut StdRng) -> Scenario {
    let n = rng.gen_range(2..=4);
    let f1_text = loop {
        let candidate = F1_POOL[rng.gen_range(0..F1_POOL.len())];
        let e = Expr::parse(candidate).unwrap();
        if e.max_state_index() <= n {
            break candidate;
        }
    };
    let fault = format!("{:.3}*sin({:.3}*t)", rng.gen_range(0.0..1.0), rng.gen_range(0.1..3.0));
    let plant = PlantModel::new(
        FractionalOrder::new(rng.gen_range(0.2..0.98)).unwrap(),
        Expr::parse(f1_text).unwrap(),
        Expr::parse("1 + 0.1*sin(x1)").unwrap(),
        Expr::parse(&fault).unwrap(),
        (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect(),
    )
    .unwrap();
    let gains = GainSet::new(
        (0..=n).map(|_| rng.gen_range(0.0..4.0)).collect(),
        (0..=n).map(|_| rng.gen_range(0.0..6.0)).collect(),
        rng.gen_range(0.01..0.5),
    )
    .unwrap();
    let initial: Vec<f64> = (0..2 * n + 2).map(|_| rng.gen_range(-0.3..0.3)).collect();
    Scenario {
        plant,
        gains,
        observer_initial: ObserverState::from_packed(n, &initial).unwrap(),
        flag_dwell_steps: rng.gen_range(1..=3),
        step: 1e-2,
        horizon: 3.0,
        memory_length: if rng.gen_bool(0.3) {
            Some(rng.gen_range(20..200))
        } else {
            None
        },
    }
}

/// Variables of channel `c` (1-based) at row `k`, written out without the library's index map.
fn channel_values(traj: &Trajectory, c: usize, k: usize) -> [f64; 2] {
    let n = traj.dimension();
    if c < n {
        [traj.xhat[c - 1][k], traj.xtilde[c - 1][k]]
    } else if c == n {
        [traj.xhat[n - 1][k], traj.ftilde[k]]
    } else {
        [traj.fhat[k], traj.thetatilde[k]]
    }
}

fn criterion_4() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0004);
    let mut gated_steps = 0usize;
    let mut violations = Vec::new();
    let mut diverged = 0;
    for s in 0..100 {
        let scenario = random_scenario(&mut rng);
        let traj = match simulate(&scenario) {
            Ok(t) => t,
            Err(fracsmo::sim::SimError::Diverged { partial, .. }) => {
                diverged += 1;
                *partial
            }
            Err(e) => return Err(format!("scenario {s}: {e}")),
        };
        let n = traj.dimension();
        for k in 0..traj.len().saturating_sub(1) {
            for c in 2..=n + 1 {
                if traj.flags[c - 2][k] {
                    continue;
                }
                gated_steps += 1;
                let before = channel_values(&traj, c, k);
                let after = channel_values(&traj, c, k + 1);
                if before[0].to_bits() != after[0].to_bits() || before[1].to_bits() != after[1].to_bits() {
                    violations.push((s, k, c));
                }
            }
        }
    }
    ensure(violations.is_empty(), || {
        format!("{} violations, first {:?}", violations.len(), violations[0])
    })?;
    ensure(gated_steps > 1000, || {
        format!("only {gated_steps} gated steps exercised")
    })?;
    Ok(format!(
        "100 scenarios, {gated_steps} gated channel-steps, 0 violations ({diverged} stopped early by the divergence guard)"
    ))
}

fn random_spd(rng: &mut StdRng, dim: usize) -> SpdMatrix {
    let a: Vec<f64> = (0..dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut p = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            p[i * dim + j] = (0..dim).map(|k| a[k * dim + i] * a[k * dim + j]).sum::<f64>();
        }
        p[i * dim + i] += 0.5;
    }
    SpdMatrix::new(dim, p).unwrap()
}

fn criterion_5(run: &PaperRun) -> Outcome {
    let start = Instant::now();
    let alpha = FractionalOrder::new(0.7).unwrap();
    let paper = verify_lemma1(&run.traj.error_vectors(), &SpdMatrix::identity(4), alpha, 1e-3, None)
        .map_err(|e| e.to_string())?;
    ensure(paper.passed(), || {
        format!(
            "paper trajectory: {} violations, max {:e} (tolerance {:e})",
            paper.violation_times.len(),
            paper.max_violation,
            paper.tolerance
        )
    })?;

    let mut rng = StdRng::seed_from_u64(0x5eed_0005);
    let h = 1e-3;
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut count = 0;
    for a in [0.3, 0.5, 0.7, 0.9] {
        let order = FractionalOrder::new(a).unwrap();
        for i in 0..50 {
            let dim = rng.gen_range(1..=4);
            let terms: Vec<Vec<(f64, f64, f64)>> = (0..dim)
                .map(|_| {
                    (0..3)
                        .map(|_| {
                            (
                                rng.gen_range(-1.0..1.0),
                                rng.gen_range(0.1..8.0),
                                rng.gen_range(0.0..PI),
                            )
                        })
                        .collect()
                })
                .collect();
            let offsets: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let errors: Vec<Vec<f64>> = (0..1500)
                .map(|k| {
                    let t = k as f64 * h;
                    terms
                        .iter()
                        .zip(&offsets)
                        .map(|(ts, off)| off + ts.iter().map(|(amp, w, ph)| amp * (w * t + ph).sin()).sum::<f64>())
                        .collect()
                })
                .collect();
            let p = if i % 2 == 0 {
                SpdMatrix::identity(dim)
            } else {
                random_spd(&mut rng, dim)
            };
            let check = verify_lemma1(&errors, &p, order, h, None).map_err(|e| e.to_string())?;
            ensure(check.passed(), || {
                format!("alpha {a}, trajectory {i}: max violation {:e}", check.max_violation)
            })?;
            worst = worst.max(check.max_violation);
            count += 1;
        }
    }
    let elapsed = within_time(start, Duration::from_secs(30))?;
    Ok(format!(
        "paper: max violation {:.1e} (tol {:.2e}); {count} synthetic: max violation {worst:.1e}; {elapsed:.2?}",
        paper.max_violation, paper.tolerance
    ))
}

fn criterion_6() -> Outcome {
    let bounds = Bounds {
        a: vec![1.0, 1.0, 1.0],
        a1: 0.5,
        a2: 1.0,
        a3: 1.0,
        adot1: 0.5,
        adot2: 1.0,
        adot3: 0.1,
    };
    let gains = GainSet::new(vec![4.0, 4.0, 4.0, 4.0], vec![2.0, 3.0, 3.0, 3.0], 0.1).unwrap();
    let report = check_gains(&gains, &bounds).map_err(|e| e.to_string())?;
    let step1 = &report.steps[0];
    let c2 = step1.condition_2.as_ref().ok_or("condition 2 missing for step 1")?;
    // 4 d (a + d) / (a - d) with a = 2, d = 1
    let expected = 12f64.sqrt();
    ensure((c2.lambda_min - expected).abs() <= 1e-12, || {
        format!("lambda_min {} vs {expected}", c2.lambda_min)
    })?;
    ensure((c2.threshold_sq - 12.0).abs() <= 1e-12, || {
        format!("threshold {}", c2.threshold_sq)
    })?;
    ensure(c2.holds, || "lambda1 = 4 > sqrt(12) should hold".into())?;

    let weak = GainSet::new(vec![4.0; 4], vec![0.9, 3.0, 3.0, 3.0], 0.1).unwrap();
    let report = check_gains(&weak, &bounds).map_err(|e| e.to_string())?;
    let step1 = &report.steps[0];
    ensure(!step1.condition_1_holds && step1.condition_2.is_none(), || {
        "condition 2 not skipped when condition 1 fails".into()
    })?;
    ensure(report.to_text().contains("skipped"), || {
        "report does not mention the skip".into()
    })?;
    Ok(format!(
        "lambda_1 threshold {:.15} = sqrt(12); condition 2 skipped when alpha_1 <= a_3",
        c2.lambda_min
    ))
}

fn random_expr(rng: &mut StdRng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..6) {
            0 => format!("{}", rng.gen_range(0..100)),
            1 => format!("{:.3}", rng.gen_range(0.0..10.0)),
            2 => "pi".to_string(),
            3 => "t".to_string(),
            _ => format!("x{}", rng.gen_range(1..=3)),
        };
    }
    match rng.gen_range(0..8) {
        0 => format!("-{}", random_expr(rng, depth - 1)),
        1 => format!("({})", random_expr(rng, depth - 1)),
        2 => {
            let f = ["sin", "cos", "tan", "exp", "sqrt", "abs", "sign"][rng.gen_range(0..7)];
            format!("{f}({})", random_expr(rng, depth - 1))
        }
        _ => {
            let op = ["+", "-", "*", "/", "^"][rng.gen_range(0..5)];
            format!("{} {op} {}", random_expr(rng, depth - 1), random_expr(rng, depth - 1))
        }
    }
}

fn criterion_7() -> Outcome {
    let table: [(&str, f64); 10] = [
        ("1 + 2 * 3", 7.0),
        ("(1 + 2) * 3", 9.0),
        ("2 ^ 3 ^ 2", 512.0),
        ("-2 ^ 2", -4.0),
        ("8 / 4 / 2", 1.0),
        ("10 - 3 - 2", 5.0),
        ("2 * -3", -6.0),
        ("-(1 - 4) * 2", 6.0),
        ("2 ^ -1", 0.5),
        ("1 + 2 * 3 ^ 2 / 6", 4.0),
    ];
    for (text, expected) in table {
        let got = Expr::parse(text)
            .map_err(|e| format!("{text}: {e}"))?
            .eval(&[], 0.0)
            .map_err(|e| e.to_string())?;
        ensure(got == expected, || format!("{text} = {got}, expected {expected}"))?;
    }

    let mut rng = StdRng::seed_from_u64(0x5eed_0007);
    let mut evaluated = 0;
    for case in 0..1000 {
        let text = random_expr(&mut rng, 5);
        let first = Expr::parse(&text).map_err(|e| format!("case {case} '{text}': {e}"))?;
        let printed = first.to_string();
        let second = Expr::parse(&printed).map_err(|e| format!("reparse '{printed}': {e}"))?;
        ensure(first == second, || format!("tree changed: '{text}' -> '{printed}'"))?;
        let state = [
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        ];
        let t = rng.gen_range(0.0..5.0);
        match (first.eval(&state, t), second.eval(&state, t)) {
            (Ok(a), Ok(b)) => {
                ensure(a.to_bits() == b.to_bits(), || format!("'{text}': {a} vs {b}"))?;
                evaluated += 1;
            }
            (Err(_), Err(_)) => {}
            (a, b) => return Err(format!("'{text}': {a:?} vs {b:?}")),
        }
    }
    ensure(evaluated > 500, || format!("only {evaluated} finite evaluations"))?;

    let x0 = [0.1, 0.1, -0.1];
    let f1 = Expr::parse("-0.5*x1 - sin(x2) - x3*abs(x3)")
        .unwrap()
        .eval(&x0, 0.0)
        .unwrap();
    let f1_hand = -0.05 - 0.1f64.sin() + 0.01;
    ensure((f1 - f1_hand).abs() <= 1e-12, || {
        format!("f1(x0) = {f1}, hand {f1_hand}")
    })?;
    let f2 = Expr::parse("1").unwrap().eval(&x0, 0.0).unwrap();
    let fault0 = Expr::parse("0.5*cos(0.5*pi*t)").unwrap().eval(&x0, 0.0).unwrap();
    ensure(f2 == 1.0 && (fault0 - 0.5).abs() <= 1e-12, || {
        format!("f2 {f2}, fault(0) {fault0}")
    })?;
    Ok(format!(
        "10 precedence cases; 1000 round trips ({evaluated} finite, bit-identical); f1(x0) = {f1:.15}"
    ))
}

fn csv_bytes(traj: &Trajectory) -> Vec<u8> {
    let mut out = Vec::new();
    traj.write_csv(&mut out).unwrap();
    out
}

fn criterion_8() -> Outcome {
    let mut paper = ScenarioConfig::paper_example();
    paper.sim.horizon = 3.0;
    let mut rng = StdRng::seed_from_u64(0x5eed_0008);
    let mut scenarios = vec![paper.scenario().unwrap()];
    scenarios.extend((0..4).map(|_| random_scenario(&mut rng)));
    let mut rows = 0;
    for (i, s) in scenarios.iter().enumerate() {
        let run = |s: &Scenario| match simulate(s) {
            Ok(t) => t,
            Err(fracsmo::sim::SimError::Diverged { partial, .. }) => *partial,
            Err(e) => panic!("{e}"),
        };
        let a = csv_bytes(&run(s));
        let b = csv_bytes(&run(s));
        ensure(a == b, || format!("scenario {i}: CSV bytes differ between runs"))?;
        let back = Trajectory::read_csv(a.as_slice()).map_err(|e| e.to_string())?;
        ensure(back == run(s), || {
            format!("scenario {i}: CSV round trip changed values")
        })?;
        ensure(csv_bytes(&back) == a, || {
            format!("scenario {i}: re-written CSV differs")
        })?;
        rows += back.len();
    }
    Ok(format!(
        "{} scenarios, {rows} rows: identical bytes across runs, lossless round trip",
        scenarios.len()
    ))
}

fn main() -> ExitCode {
    let run = paper_run();
    let criteria: Vec<Criterion> = vec![
        ("1 GL oracle suite", Box::new(criterion_1)),
        ("2 Mittag-Leffler solver check", Box::new(criterion_2)),
        ("3 paper experiment reproduction", Box::new(|| criterion_3(&run))),
        ("4 gating contract", Box::new(criterion_4)),
        ("5 Lyapunov inequality verifier", Box::new(|| criterion_5(&run))),
        ("6 gain-condition formula", Box::new(criterion_6)),
        ("7 expression parser", Box::new(criterion_7)),
        ("8 determinism and CSV I/O", Box::new(criterion_8)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
