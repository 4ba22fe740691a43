use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use clap::Args;
use cytoloc_core::BenchReport;
use serde::Deserialize;

use crate::report::{read_json, EvalSummary};
use crate::{inputs, Ctx};

#[derive(Args)]
pub struct PlotArgs {
    /// JSON list of {"label", "eval", "bench", "size"} entries; paths are
    /// relative to this file.
    spec: PathBuf,
    /// El column to plot [default: the first in each report].
    #[arg(long)]
    alpha: Option<f64>,
    /// SVG output.
    #[arg(short, long)]
    output: PathBuf,
    /// CSV of the plotted values.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    #[serde(default)]
    label: String,
    eval: PathBuf,
    bench: PathBuf,
    /// Circle area is proportional to this (model memory, say).
    size: f64,
}

struct Point {
    label: String,
    rate: f64,
    el: f64,
    size: f64,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const MAX_RADIUS: f64 = 30.0;
const TICKS: usize = 5;

fn load(entry: Entry, index: usize, base: &Path, alpha: Option<f64>) -> Result<Point> {
    let eval_path = base.join(&entry.eval);
    let eval: EvalSummary = read_json(&eval_path)?;
    let bench: BenchReport = read_json(&base.join(&entry.bench))?;
    let column = match alpha {
        Some(a) => eval
            .localization_error
            .iter()
            .find(|c| c.alpha == a)
            .with_context(|| format!("{}: no El column for alpha {a}", eval_path.display()))?,
        None => eval
            .localization_error
            .first()
            .with_context(|| format!("{}: no El columns", eval_path.display()))?,
    };
    let el = column
        .value
        .with_context(|| format!("{}: El(alpha={}) is undefined", eval_path.display(), column.alpha))?;
    ensure!(
        entry.size.is_finite() && entry.size >= 0.0,
        "entry {}: size must be a non-negative number",
        index + 1
    );
    let label = if entry.label.is_empty() {
        format!("series-{}", index + 1)
    } else {
        entry.label
    };
    Ok(Point {
        label,
        rate: bench.nuclei_per_second,
        el,
        size: entry.size,
    })
}

/// Upper axis limit: the smallest 1, 2 or 5 times a power of ten above `v`.
fn nice_ceiling(v: f64) -> f64 {
    if v.is_nan() || v <= 0.0 {
        return 1.0;
    }
    let magnitude = 10f64.powf(v.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|&c| c >= v)
        .unwrap_or(10.0 * magnitude)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn render_svg(points: &[Point]) -> String {
    let x_max = nice_ceiling(points.iter().map(|p| p.rate).fold(0.0, f64::max) * 1.1);
    let y_max = nice_ceiling(points.iter().map(|p| p.el).fold(0.0, f64::max) * 1.1);
    let size_max = points.iter().map(|p| p.size).fold(0.0, f64::max);
    let (plot_w, plot_h) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |v: f64| LEFT + v / x_max * plot_w;
    let sy = |v: f64| TOP + plot_h - v / y_max * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{LEFT} {TOP} V{} H{}" fill="none" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w
    );
    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let (x, y) = (sx(f * x_max), sy(f * y_max));
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 20.0,
            f * x_max
        );
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{}" y="{y:.2}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            f * y_max
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">inference rate (nuclei/s)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18 {}) rotate(-90)" text-anchor="middle">localization error</text>"#,
        TOP + plot_h / 2.0
    );
    for p in points {
        let r = if size_max > 0.0 {
            MAX_RADIUS * (p.size / size_max).sqrt()
        } else {
            MAX_RADIUS / 4.0
        };
        let (cx, cy) = (sx(p.rate), sy(p.el));
        let _ = writeln!(
            s,
            r#"<circle class="point" cx="{cx:.3}" cy="{cy:.3}" r="{r:.6}" fill="steelblue" fill-opacity="0.5" stroke="steelblue"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text class="label" x="{:.3}" y="{:.3}">{}</text>"#,
            cx + r + 4.0,
            cy,
            escape(&p.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn run(ctx: &Ctx, args: PlotArgs) -> Result<()> {
    let entries: Vec<Entry> = read_json(&args.spec)?;
    ensure!(!entries.is_empty(), "{}: no entries to plot", args.spec.display());
    let base = args.spec.parent().unwrap_or(Path::new(""));
    let points = entries
        .into_iter()
        .enumerate()
        .map(|(i, e)| load(e, i, base, args.alpha))
        .collect::<Result<Vec<_>>>()?;

    inputs::write_text(&args.output, &render_svg(&points))?;
    if let Some(path) = &args.csv {
        let mut text = String::from("label,inference_rate,localization_error,size\n");
        for p in &points {
            let _ = writeln!(text, "{},{},{},{}", csv_field(&p.label), p.rate, p.el, p.size);
        }
        inputs::write_text(path, &text)?;
    }
    for p in &points {
        ctx.say(format_args!(
            "{}: {:.1} nuclei/s, El {:.4}, size {}",
            p.label, p.rate, p.el, p.size
        ));
    }
    ctx.say(format_args!("wrote {}", args.output.display()));
    Ok(())
}
