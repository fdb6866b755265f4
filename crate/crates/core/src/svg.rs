//! Minimal SVG line charts for trajectories.

use std::fmt::Write as _;

use crate::sim::Trajectory;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 48.0;
const TICKS: usize = 5;

/// Points kept per series; each bucket contributes its min and max.
pub const DEFAULT_MAX_POINTS: usize = 2000;

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

/// Bucketed min/max decimation; keeps first and last points and every local
/// extreme at bucket resolution.
pub fn decimate(xs: &[f64], ys: &[f64], max_points: usize) -> Vec<(f64, f64)> {
    let len = xs.len().min(ys.len());
    if len <= max_points.max(4) {
        return xs.iter().copied().zip(ys.iter().copied()).take(len).collect();
    }
    let buckets = (max_points / 2).max(2);
    let mut out = Vec::with_capacity(2 * buckets + 2);
    for b in 0..buckets {
        let lo = b * len / buckets;
        let hi = ((b + 1) * len / buckets).max(lo + 1);
        let (mut imin, mut imax) = (lo, lo);
        for i in lo..hi {
            if ys[i] < ys[imin] {
                imin = i;
            }
            if ys[i] > ys[imax] {
                imax = i;
            }
        }
        let (first, second) = if imin <= imax { (imin, imax) } else { (imax, imin) };
        out.push((xs[first], ys[first]));
        if second != first {
            out.push((xs[second], ys[second]));
        }
    }
    if out.first().map(|p| p.0) != Some(xs[0]) {
        out.insert(0, (xs[0], ys[0]));
    }
    if out.last().map(|p| p.0) != Some(xs[len - 1]) {
        out.push((xs[len - 1], ys[len - 1]));
    }
    out
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".to_string()
        } else {
            s.to_string()
        }
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Figure {
    pub fn to_svg(&self) -> String {
        let (x0, x1) = range(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
        let (y0, y1) = range(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r##"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##
        );
        for i in 0..=TICKS {
            let fx = x0 + (x1 - x0) * i as f64 / TICKS as f64;
            let fy = y0 + (y1 - y0) * i as f64 / TICKS as f64;
            let (px, py) = (sx(fx), sy(fy));
            let _ = writeln!(
                s,
                r##"<line x1="{px:.2}" y1="{MARGIN_TOP}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/>"##,
                MARGIN_TOP + ph
            );
            let _ = writeln!(
                s,
                r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                MARGIN_TOP + ph + 16.0,
                tick_label(fx)
            );
            let _ = writeln!(
                s,
                r##"<line x1="{MARGIN_LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/>"##,
                MARGIN_LEFT + pw
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                MARGIN_LEFT - 6.0,
                py + 4.0,
                tick_label(fy)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            HEIGHT - 10.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            MARGIN_TOP + ph / 2.0,
            MARGIN_TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for (i, series) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let mut pts = String::new();
            for &(x, y) in series.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
                let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(y));
            }
            let dash = if i == 0 { "" } else { r#" stroke-dasharray="6 3""# };
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.2"{dash} points="{}"/>"#,
                pts.trim_end()
            );
            let ly = MARGIN_TOP + 14.0 + 16.0 * i as f64;
            let lx = MARGIN_LEFT + pw - 130.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"{dash}/>"#,
                lx + 24.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
                lx + 30.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn series(label: &str, time: &[f64], values: &[f64], max_points: usize) -> Series {
    Series {
        label: label.to_string(),
        points: decimate(time, values, max_points),
    }
}

/// Per state: state vs estimate and the estimation error; then the fault vs
/// its estimate and the fault error. Returns `(file stem, svg)` pairs.
pub fn trajectory_figures(traj: &Trajectory, max_points: usize) -> Vec<(String, String)> {
    let t = &traj.time;
    let mut out = Vec::new();
    for i in 0..traj.dimension() {
        let k = i + 1;
        let fig = Figure {
            title: format!("State x{k} and its estimate"),
            x_label: "t [s]".into(),
            y_label: format!("x{k}"),
            series: vec![
                series(&format!("x{k}"), t, &traj.x[i], max_points),
                series(&format!("xhat{k}"), t, &traj.xhat[i], max_points),
            ],
        };
        out.push((format!("state_x{k}"), fig.to_svg()));
        let fig = Figure {
            title: format!("Estimation error e{k}"),
            x_label: "t [s]".into(),
            y_label: format!("e{k}"),
            series: vec![series(&format!("e{k}"), t, &traj.e[i], max_points)],
        };
        out.push((format!("error_e{k}"), fig.to_svg()));
    }
    let fig = Figure {
        title: "Fault and its estimate".into(),
        x_label: "t [s]".into(),
        y_label: "f".into(),
        series: vec![
            series("f", t, &traj.fault, max_points),
            series("fhat", t, &traj.fhat, max_points),
        ],
    };
    out.push(("fault".into(), fig.to_svg()));
    let err: Vec<f64> = traj.fault.iter().zip(&traj.fhat).map(|(f, g)| f - g).collect();
    let fig = Figure {
        title: "Fault estimation error f - fhat".into(),
        x_label: "t [s]".into(),
        y_label: "f - fhat".into(),
        series: vec![series("f - fhat", t, &err, max_points)],
    };
    out.push(("error_fault".into(), fig.to_svg()));
    out
}
