//! Self-contained SVG rendering of fullness sweeps.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use blocksplit::bounds::{harmonic_difference, table_bound};

use crate::commands::write_output;
use crate::error::{CliError, Result};
use crate::table::{read_sweep, SweepRow};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;
const Y_MIN: f64 = 0.5;
const Y_MAX: f64 = 1.0;
/// Largest `i` drawn for the deferred-even segments.
const MAX_SEGMENT_INDEX: usize = 64;

const PALETTE: [&str; 6] = ["#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Overlay {
    #[default]
    None,
    /// Deferred-even closed form `2iα(H_2i − H_i)` on `α ∈ (1/(2i), 1/(2i−1)]`.
    DeferredSegments,
    /// Piecewise lower bounds per batch-to-block ratio.
    Bounds,
}

impl std::str::FromStr for Overlay {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "lemma61" => Ok(Self::DeferredSegments),
            "table1" => Ok(Self::Bounds),
            _ => Err(CliError::Param(format!(
                "unknown overlay `{s}` (none|lemma61|table1)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub block_size: usize,
    pub overlay: Overlay,
    pub title: Option<String>,
}

struct Frame {
    x_lo: f64,
    x_hi: f64,
}

impl Frame {
    fn px(&self, alpha: f64) -> f64 {
        LEFT + (alpha - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, fill: f64) -> f64 {
        TOP + (Y_MAX - fill) / (Y_MAX - Y_MIN) * (HEIGHT - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn points(frame: &Frame, pts: impl Iterator<Item = (f64, f64)>) -> String {
    let mut out = String::new();
    for (x, y) in pts {
        let _ = write!(out, "{:.2},{:.2} ", frame.px(x), frame.py(y));
    }
    out.trim_end().to_string()
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

/// Overlay polylines in α-space; each inner vector is one unbroken piece.
fn overlay_pieces(opts: &PlotOptions, frame: &Frame, batches: &[usize]) -> Result<Vec<Vec<(f64, f64)>>> {
    let b = opts.block_size as f64;
    match opts.overlay {
        Overlay::None => Ok(Vec::new()),
        Overlay::DeferredSegments => Ok((1..=MAX_SEGMENT_INDEX)
            .filter_map(|i| {
                let lo = 1.0 / (2 * i) as f64;
                let hi = 1.0 / (2 * i - 1) as f64;
                let a = lo.max(frame.x_lo);
                let z = hi.min(frame.x_hi);
                (a < z).then(|| {
                    let h = harmonic_difference(i);
                    let f = |alpha: f64| 2.0 * i as f64 * alpha * h;
                    vec![(a, f(a)), (z, f(z))]
                })
            })
            .collect()),
        Overlay::Bounds => {
            let mut pieces: Vec<Vec<(f64, f64)>> = Vec::new();
            let mut last_row = None;
            for &r in batches {
                let bound = table_bound(opts.block_size, r)?;
                let pt = (r as f64 / b, bound.fill);
                match pieces.last_mut() {
                    Some(piece) if last_row == Some(bound.row) => piece.push(pt),
                    _ => pieces.push(vec![pt]),
                }
                last_row = Some(bound.row);
            }
            Ok(pieces)
        }
    }
}

/// Renders one or more sweeps. Fails on an empty series so nothing
/// partial gets written.
pub fn render_svg(series: &[Series], opts: &PlotOptions) -> Result<String> {
    if series.is_empty() {
        return Err(CliError::Param("nothing to plot".into()));
    }
    if let Some(s) = series.iter().find(|s| s.rows.is_empty()) {
        return Err(CliError::Param(format!("{}: no data rows", s.label)));
    }
    if opts.block_size == 0 {
        return Err(CliError::Param("block size must be positive".into()));
    }
    let b = opts.block_size as f64;
    let mut batches: Vec<usize> = series.iter().flat_map(|s| s.rows.iter().map(|r| r.batch)).collect();
    batches.sort_unstable();
    batches.dedup();
    let x_lo = batches[0] as f64 / b;
    let mut x_hi = *batches.last().unwrap() as f64 / b;
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0 / b;
    }
    let frame = Frame { x_lo, x_hi };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let _ = writeln!(
        svg,
        r#"<defs><clipPath id="plot-area"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath></defs>"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    // grid and ticks
    let _ = writeln!(svg, r##"<g stroke="#dddddd" stroke-width="1">"##);
    let mut ticks = String::new();
    let mut fill = Y_MIN;
    while fill <= Y_MAX + 1e-9 {
        let y = frame.py(fill);
        let _ = writeln!(svg, r#"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#, WIDTH - RIGHT);
        let _ = writeln!(
            ticks,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{fill:.1}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
        fill += 0.1;
    }
    let step = nice_step(x_hi - x_lo);
    let mut t = (x_lo / step).ceil() * step;
    while t <= x_hi + 1e-9 {
        let x = frame.px(t);
        let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}"/>"#, HEIGHT - BOTTOM);
        let _ = writeln!(
            ticks,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            HEIGHT - BOTTOM + 16.0,
            format!("{t:.3}").trim_end_matches('0').trim_end_matches('.')
        );
        t += step;
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str(&ticks);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">batch size / block size (r/B)</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">fullness</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    if let Some(title) = &opts.title {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
    }

    let _ = writeln!(svg, r#"<g clip-path="url(#plot-area)">"#);
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut rows = s.rows.clone();
        rows.sort_by_key(|r| r.batch);
        let upper = rows.iter().map(|r| (r.batch as f64 / b, r.max));
        let lower = rows.iter().rev().map(|r| (r.batch as f64 / b, r.min));
        let _ = writeln!(
            svg,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.25" stroke="none"/>"#,
            points(&frame, upper.chain(lower))
        );
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            points(&frame, rows.iter().map(|r| (r.batch as f64 / b, r.mean)))
        );
    }
    for piece in overlay_pieces(opts, &frame, &batches)? {
        let _ = writeln!(
            svg,
            r#"<polyline class="overlay" points="{}" fill="none" stroke="red" stroke-width="1.5"/>"#,
            points(&frame, piece.into_iter())
        );
    }
    let _ = writeln!(svg, "</g>");

    // legend
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let y = TOP + 14.0 + 16.0 * idx as f64;
        let x = WIDTH - RIGHT - 180.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="3"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            y - 4.0,
            x + 18.0,
            y - 4.0,
            x + 24.0,
            y,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Reads every CSV before rendering; any failure leaves `out` untouched.
pub fn cmd_plot(inputs: &[PathBuf], opts: &PlotOptions, out: Option<&Path>) -> Result<()> {
    if inputs.is_empty() {
        return Err(CliError::Param("no input CSV files".into()));
    }
    let series = inputs
        .iter()
        .map(|p| {
            let rows = read_sweep(p)?;
            let label = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string());
            Ok(Series { label, rows })
        })
        .collect::<Result<Vec<_>>>()?;
    let svg = render_svg(&series, opts)?;
    write_output(out, svg.as_bytes())
}
