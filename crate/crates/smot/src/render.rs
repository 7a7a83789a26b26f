//! SVG rendering of a coupling.
//!
//! The figure shows two horizontal axes: sources on top, destinations at the
//! bottom, one line segment per support pair. Rows whose kernel drift
//! vanishes are drawn solid black (martingale kernels), strictly drifting
//! rows dashed gray. The output is self-contained, has a fixed 1200×300
//! viewBox, and is formatted deterministically so that identical inputs give
//! byte-identical files.

use std::fmt::Write;

use crate::coupling::{classify_martingale_points, Coupling};

const WIDTH: f64 = 1200.0;
const HEIGHT: f64 = 300.0;
const MARGIN: f64 = 40.0;
const TOP_Y: f64 = 60.0;
const BOT_Y: f64 = 240.0;

fn fnum(v: f64) -> String {
    // fixed decimals keep the output byte-stable
    format!("{v:.3}")
}

/// Render the transport segments of a coupling.
pub fn coupling_svg(p: &Coupling, eps: f64) -> String {
    let cls = classify_martingale_points(p, eps);
    let support = p.support();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (x, y) in &support {
        lo = lo.min(x.to_f64()).min(y.to_f64());
        hi = hi.max(x.to_f64()).max(y.to_f64());
    }
    if support.is_empty() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let scale = (WIDTH - 2.0 * MARGIN) / (hi - lo);
    let sx = |v: f64| MARGIN + (v - lo) * scale;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" width="{w}" height="{h}">"#,
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    // axes
    for ay in [TOP_Y, BOT_Y] {
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="1"/>"#,
            fnum(MARGIN),
            fnum(ay),
            fnum(WIDTH - MARGIN),
            fnum(ay)
        );
    }
    // segments, martingale rows solid and drifting rows dashed
    for (x, y) in &support {
        let martingale = cls.is_martingale_point(x);
        let (stroke, dash) = if martingale {
            ("black", "")
        } else {
            ("gray", r#" stroke-dasharray="6,4""#)
        };
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="1.2"{dash}/>"#,
            fnum(sx(x.to_f64())),
            fnum(TOP_Y),
            fnum(sx(y.to_f64())),
            fnum(BOT_Y)
        );
    }
    // ticks at the atoms of both marginals
    for a in p.first_marginal().atoms() {
        let _ = writeln!(
            svg,
            r#"<circle cx="{}" cy="{}" r="3" fill="white" stroke="black"/>"#,
            fnum(sx(a.x.to_f64())),
            fnum(TOP_Y)
        );
    }
    for a in p.second_marginal().atoms() {
        let _ = writeln!(
            svg,
            r#"<circle cx="{}" cy="{}" r="3" fill="black"/>"#,
            fnum(sx(a.x.to_f64())),
            fnum(BOT_Y)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
