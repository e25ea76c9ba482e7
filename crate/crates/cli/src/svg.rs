//! Deterministic SVG scatter plots for 2-D point sets.

use choquet_core::{EmpiricalMeasure, Error, Result};
use std::path::Path;

const SIZE: f64 = 600.0;
const TARGET_COLOR: &str = "#1f77b4";
const OVERLAY_COLOR: &str = "#d62728";

/// Scatter `points` — and `overlay` on top of them, in a second color — into
/// a 600x600 SVG at `path`.
///
/// Data-to-viewport map: per axis, the joint bounds `[lo, hi]` over both
/// point sets are padded by 5% of the span on each side (a zero-span axis is
/// padded by 1 instead); then `x` maps to `600 * (x - lo) / (hi - lo)` and
/// `y` to `600 - 600 * (y - lo) / (hi - lo)`. Coordinates are written with
/// three decimals, so fixed input yields identical bytes.
pub fn emit_svg_scatter(
    points: &EmpiricalMeasure,
    overlay: Option<&EmpiricalMeasure>,
    path: &Path,
) -> Result<()> {
    let svg = render_scatter(points, overlay)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

pub fn render_scatter(
    points: &EmpiricalMeasure,
    overlay: Option<&EmpiricalMeasure>,
) -> Result<String> {
    let sets: Vec<&EmpiricalMeasure> = std::iter::once(points).chain(overlay).collect();
    for m in &sets {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: m.dim(),
            });
        }
    }

    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for m in &sets {
        for i in 0..m.len() {
            let p = m.point(i);
            for c in 0..2 {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
    }
    for c in 0..2 {
        let span = hi[c] - lo[c];
        let pad = if span == 0.0 { 1.0 } else { 0.05 * span };
        lo[c] -= pad;
        hi[c] += pad;
    }

    let map = |p: &[f64]| {
        let x = SIZE * (p[0] - lo[0]) / (hi[0] - lo[0]);
        let y = SIZE - SIZE * (p[1] - lo[1]) / (hi[1] - lo[1]);
        (x, y)
    };

    let mut out = String::with_capacity(128 + 90 * sets.iter().map(|m| m.len()).sum::<usize>());
    out.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n",
    );
    out.push_str("<rect width=\"600\" height=\"600\" fill=\"white\"/>\n");
    for (m, color) in sets.iter().zip([TARGET_COLOR, OVERLAY_COLOR]) {
        for i in 0..m.len() {
            let (x, y) = map(m.point(i));
            out.push_str(&format!(
                "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"3\" fill=\"{color}\" fill-opacity=\"0.6\"/>\n"
            ));
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
