//! Minimal deterministic SVG emitters: grayscale heatmaps and line charts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use holp_core::DataMatrix;
use thiserror::Error;

/// Largest heatmap side drawn at full resolution.
pub const MAX_HEATMAP_DIM: usize = 1000;
/// Gray level of a constant matrix.
pub const MID_GRAY: u8 = 128;

const HEATMAP_PX: usize = 600;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Error)]
pub enum SvgError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("nothing to draw: {0}")]
    Empty(&'static str),
    #[error("non-finite value at ({0}, {1})")]
    NonFinite(usize, usize),
}

fn write_file(path: &Path, body: &str) -> Result<(), SvgError> {
    fs::write(path, body).map_err(|source| SvgError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Row/column stride used for a matrix side of length `dim`.
pub fn heatmap_stride(dim: usize) -> usize {
    dim.div_ceil(MAX_HEATMAP_DIM).max(1)
}

/// Gray levels (0 = black) of the matrix after subsampling: the maximum maps
/// to black, the minimum to white, a constant matrix to [`MID_GRAY`].
pub fn heatmap_levels(m: &DataMatrix) -> Result<Vec<Vec<u8>>, SvgError> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Err(SvgError::Empty("matrix has no cells"));
    }
    let (sr, sc) = (heatmap_stride(r), heatmap_stride(c));
    let rows: Vec<usize> = (0..r).step_by(sr).collect();
    let cols: Vec<usize> = (0..c).step_by(sc).collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &i in &rows {
        for &j in &cols {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(SvgError::NonFinite(i, j));
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let level = |v: f64| -> u8 {
        if hi > lo {
            (255.0 * (hi - v) / (hi - lo)).round() as u8
        } else {
            MID_GRAY
        }
    };
    Ok(rows
        .iter()
        .map(|&i| cols.iter().map(|&j| level(m[(i, j)])).collect())
        .collect())
}

pub fn render_heatmap(m: &DataMatrix) -> Result<String, SvgError> {
    let levels = heatmap_levels(m)?;
    let (h, w) = (levels.len(), levels[0].len());
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{HEATMAP_PX}" height="{}" viewBox="0 0 {w} {h}" shape-rendering="crispEdges">"#,
        (HEATMAP_PX * h).div_ceil(w)
    );
    for (i, row) in levels.iter().enumerate() {
        let mut j = 0;
        while j < w {
            let g = row[j];
            let start = j;
            while j < w && row[j] == g {
                j += 1;
            }
            let _ = writeln!(
                s,
                r#"<rect x="{start}" y="{i}" width="{}" height="1" fill="rgb({g},{g},{g})"/>"#,
                j - start
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_heatmap(m: &DataMatrix, path: &Path) -> Result<(), SvgError> {
    write_file(path, &render_heatmap(m)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Line chart with axes, ticks, one marker per point and a legend.
pub fn render_curves(series: &[Series], x_label: &str, y_label: &str) -> Result<String, SvgError> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err(SvgError::Empty("no data points"));
    }
    for (k, s) in series.iter().enumerate() {
        if let Some(i) = s.points.iter().position(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(SvgError::NonFinite(k, i));
        }
    }
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = range(all().map(|p| p.0));
    let (y0, y1) = range(all().map(|p| p.1));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + pw * (x - x0) / (x1 - x0);
    let sy = |y: f64| TOP + ph * (1.0 - (y - y0) / (y1 - y0));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (bx, by) = (LEFT, TOP + ph);
    let _ = writeln!(
        s,
        r#"<path d="M{LEFT} {TOP} V{by} H{}" fill="none" stroke="black"/>"#,
        LEFT + pw
    );
    for t in 0..=TICKS {
        let f = t as f64 / TICKS as f64;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{by}" x2="{px:.2}" y2="{}" stroke="black"/>"#, by + 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
            by + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(s, r#"<line x1="{}" y1="{py:.2}" x2="{bx}" y2="{py:.2}" stroke="black"/>"#, bx - 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            bx - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if ser.points.len() > 1 {
            let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                pts.join(" ")
            );
        }
        for &(x, y) in &ser.points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#, sx(x), sy(y));
        }
        let ly = TOP + 10.0 + 20.0 * k as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_curves(series: &[Series], x_label: &str, y_label: &str, path: &Path) -> Result<(), SvgError> {
    write_file(path, &render_curves(series, x_label, y_label)?)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
