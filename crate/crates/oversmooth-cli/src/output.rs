//! Deterministic emission of tables, figure data, and rate reports.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a given
//! configuration always produces the same bytes (the wall-time column is the
//! one deliberate exception; it measures, it does not reproduce).

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

use oversmooth::experiment::{ExperimentRecord, FigureData};
use oversmooth::GridFunction;

pub const TABLE_HEADER: &str =
    "delta,seed,alpha_star,error,ratio,ladder_length,wall_time_ms,failed";

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn table_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::new();
    out.push_str(TABLE_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.delta,
            r.seed,
            fmt_opt(r.alpha_star),
            fmt_opt(r.error),
            fmt_opt(r.ratio),
            r.ladder_length,
            r.wall_time_ms,
            u8::from(r.failed),
        )
        .expect("writing to a string cannot fail");
    }
    out
}

/// Nodal data for one reconstruction: abscissa, reconstruction, reference.
pub fn rung_data(u: &GridFunction, u_true: &GridFunction) -> String {
    let mut out = String::from("# x u u_true\n");
    let grid = u.grid();
    for (i, x) in grid.nodes().enumerate() {
        writeln!(out, "{} {} {}", x, u.value(i), u_true.value(i))
            .expect("writing to a string cannot fail");
    }
    out
}

pub fn figure_summary(fd: &FigureData) -> String {
    let mut out = String::from("# reconstruction error along the parameter ladder\n");
    for (alpha, err) in fd.alphas.iter().zip(&fd.errors) {
        writeln!(out, "alpha = {alpha}  error = {err}").expect("infallible");
    }
    writeln!(
        out,
        "selected: alpha = {}  error = {}",
        fd.selected_alpha, fd.selected_error
    )
    .expect("infallible");
    let first = fd.errors[0];
    let last = *fd.errors.last().expect("nonempty ladder");
    writeln!(
        out,
        "shape: first {} selected, last {} selected",
        if first > fd.selected_error { ">" } else { "<=" },
        if last > fd.selected_error { ">" } else { "<=" },
    )
    .expect("infallible");
    out
}

/// Minimal self-contained SVG overlay of a reconstruction against the
/// reference solution.
pub fn rung_svg(u: &GridFunction, u_true: &GridFunction, alpha: f64, error: f64) -> String {
    const W: f64 = 480.0;
    const H: f64 = 320.0;
    const M: f64 = 40.0;
    let ys: Vec<f64> = u.values().iter().chain(u_true.values()).copied().collect();
    let y_min = ys.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0);
    let y_max = ys
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(1.0);
    let span = (y_max - y_min).max(1e-12);
    let grid = u.grid();
    let map = |x: f64, y: f64| {
        (
            M + x * (W - 2.0 * M),
            H - M - (y - y_min) / span * (H - 2.0 * M),
        )
    };
    let path = |f: &GridFunction| {
        let mut d = String::new();
        for (i, x) in grid.nodes().enumerate() {
            let (px, py) = map(x, f.value(i));
            let _ = write!(d, "{}{px:.2},{py:.2} ", if i == 0 { "M" } else { "L" });
        }
        d
    };
    let (ax0, ay0) = map(0.0, y_min);
    let (ax1, ay1) = map(1.0, y_max);
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<rect x=\"{ax0:.2}\" y=\"{ay1:.2}\" width=\"{bw:.2}\" height=\"{bh:.2}\" ",
            "fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n",
            "<path d=\"{ref_path}\" fill=\"none\" stroke=\"gray\" stroke-width=\"1\" ",
            "stroke-dasharray=\"4 3\"/>\n",
            "<path d=\"{u_path}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n",
            "<text x=\"{tx:.2}\" y=\"{ty:.2}\" font-family=\"monospace\" font-size=\"12\">",
            "alpha = {alpha:e}, error = {error:.3}</text>\n",
            "</svg>\n"
        ),
        w = W,
        h = H,
        ax0 = ax0,
        ay1 = ay1,
        bw = ax1 - ax0,
        bh = ay0 - ay1,
        ref_path = path(u_true),
        u_path = path(u),
        tx = M + 8.0,
        ty = M + 16.0,
        alpha = alpha,
        error = error,
    )
}

pub fn rates_csv(deltas: &[f64], medians: &[f64]) -> String {
    let mut out = String::from("delta,median_error\n");
    for (d, m) in deltas.iter().zip(medians) {
        writeln!(out, "{d},{m}").expect("infallible");
    }
    out
}

pub fn rates_report(slope: f64, target: f64, deltas: &[f64], medians: &[f64]) -> String {
    let mut out = String::new();
    writeln!(out, "log-log slope of median error against noise level").expect("infallible");
    writeln!(out, "fitted slope : {slope:.4}").expect("infallible");
    writeln!(out, "target p/(p+a): {target:.4}").expect("infallible");
    writeln!(out, "difference   : {:+.4}", slope - target).expect("infallible");
    writeln!(out).expect("infallible");
    for (d, m) in deltas.iter().zip(medians) {
        writeln!(out, "delta = {d}  median error = {m}").expect("infallible");
    }
    out
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}
