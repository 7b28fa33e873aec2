//! Deterministic SVG panels: truth against predictions, and population scatter
//! plots from evolution logs.

use std::fmt::Write as _;

use crate::metrics::Predictor;
use crate::pbt::LogRecord;
use crate::signals::{evaluation_grid, training_grid, Domain, SignalVariant};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Points of `D_T ∪ D_E` used for curves: the training grid followed by the
/// metric evaluation grid, sorted left to right.
pub fn plot_grid(domain: &Domain, rate: usize) -> Vec<f64> {
    let mut xs = training_grid(domain, rate);
    xs.extend(evaluation_grid(domain, rate));
    xs.sort_by(f64::total_cmp);
    xs
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        let c = if lo.is_finite() { lo } else { 0.0 };
        return (c - 1.0, c + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(out, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
    for (v, anchor) in [(f.x.0, "start"), (f.x.1, "end")] {
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{v:.3}</text>"#, f.px(v), b + 16.0);
    }
    for v in [f.y.0, f.y.1] {
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3}</text>"#, l - 4.0, f.py(v) + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#, WIDTH / 2.0, HEIGHT - 8.0);
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{y_label}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn polyline(out: &mut String, f: &Frame, xs: &[f64], ys: &[f64], color: &str, width: f64) {
    // Non-finite predictions break the line into separate segments.
    let mut segment = String::new();
    let flush = |segment: &mut String, out: &mut String| {
        if !segment.is_empty() {
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{}"/>"#,
                segment.trim_end()
            );
            segment.clear();
        }
    };
    for (&x, &y) in xs.iter().zip(ys) {
        if y.is_finite() {
            let _ = write!(segment, "{:.2},{:.2} ", f.px(x), f.py(y.clamp(f.y.0, f.y.1)));
        } else {
            flush(&mut segment, out);
        }
    }
    flush(&mut segment, out);
}

/// Truth and prediction curves over `D_T ∪ D_E` with the training domain shaded.
/// An empty predictor list gives a truth-only panel.
pub fn prediction_svg(
    variant: &SignalVariant,
    predictors: &[(&str, &dyn Predictor)],
    domain: &Domain,
    rate: usize,
) -> String {
    let xs = plot_grid(domain, rate);
    let truth: Vec<f64> = xs.iter().map(|&x| variant.value(x)).collect();
    let curves: Vec<Vec<f64>> = predictors.iter().map(|(_, p)| xs.iter().map(|&x| p.predict(x)).collect()).collect();

    let (lo, hi) = truth.iter().filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    // Predictions may run far off; keep the truth's scale readable.
    let span = (hi - lo).max(1e-9);
    let (mut ylo, mut yhi) = (lo, hi);
    for v in curves.iter().flatten().filter(|v| v.is_finite()) {
        ylo = ylo.min(v.max(lo - span));
        yhi = yhi.max(v.min(hi + span));
    }
    let half = domain.eval_half_width();
    let f = Frame { x: (-half, half), y: padded(ylo, yhi) };

    let mut out = String::new();
    header(&mut out);
    let t = domain.train_half_width();
    let _ = writeln!(
        out,
        r##"<rect x="{:.2}" y="{MARGIN}" width="{:.2}" height="{}" fill="#e8e8e8"/>"##,
        f.px(-t),
        f.px(t) - f.px(-t),
        HEIGHT - 2.0 * MARGIN
    );
    axes(&mut out, &f, "x", "y");
    polyline(&mut out, &f, &xs, &truth, "black", 1.5);
    for (k, ys) in curves.iter().enumerate() {
        polyline(&mut out, &f, &xs, ys, PALETTE[k % PALETTE.len()], 1.0);
    }
    let mut labels = vec![("truth".to_string(), "black")];
    labels.extend(predictors.iter().enumerate().map(|(k, (n, _))| (escape(n), PALETTE[k % PALETTE.len()])));
    for (k, (name, color)) in labels.iter().enumerate() {
        let y = MARGIN + 14.0 + 14.0 * k as f64;
        let _ = writeln!(out, r#"<text x="{:.2}" y="{y:.2}" fill="{color}">{name}</text>"#, MARGIN + 6.0);
    }
    out.push_str("</svg>\n");
    out
}

/// Genetic period against generation for every logged unit, coloured by root
/// ancestor. Failed or untrained units are drawn hollow.
pub fn population_svg(records: &[LogRecord]) -> String {
    let (plo, phi) = records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.period), b.max(r.period)));
    let gmax = records.iter().map(|r| r.generation).max().unwrap_or(0);
    let f = Frame { x: (-0.5, gmax as f64 + 0.5), y: padded(plo, phi) };

    let mut ancestors: Vec<usize> = records.iter().map(|r| r.ancestor).collect();
    ancestors.sort_unstable();
    ancestors.dedup();

    let mut out = String::new();
    header(&mut out);
    axes(&mut out, &f, "generation", "period");
    for r in records {
        let color = PALETTE[ancestors.binary_search(&r.ancestor).unwrap_or(0) % PALETTE.len()];
        let fill = match r.loss {
            Some(l) if l.is_finite() => color,
            _ => "none",
        };
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{fill}" stroke="{color}"><title>id {} loss {}</title></circle>"#,
            f.px(r.generation as f64),
            f.py(r.period),
            r.id,
            r.loss.map_or("unset".to_string(), |l| format!("{l:e}"))
        );
    }
    out.push_str("</svg>\n");
    out
}
