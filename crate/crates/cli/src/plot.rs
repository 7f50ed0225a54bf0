//! Minimal standalone SVG scatter plots.

use std::fmt::Write as _;
use std::path::Path;

use subweibull_core::stats::{loglog_fit, LineFit};

use crate::error::{SimError, SimResult};
use crate::table::{format_g17, CsvTable};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

/// Render `y` against `x` as SVG text. Under `loglog` both axes are
/// logarithmic and the OLS slope is drawn and annotated.
pub fn render_plot(table: &CsvTable, x: &str, y: &str, loglog: bool) -> SimResult<(String, Option<LineFit>)> {
    let xs = table.floats(x)?;
    let ys = table.floats(y)?;
    if xs.is_empty() {
        return Err(SimError::Plot(format!("no rows to plot for {y} vs {x}")));
    }
    if let Some(v) = xs.iter().chain(&ys).find(|v| !v.is_finite()) {
        return Err(SimError::Plot(format!("non-finite value {v} in {y} vs {x}")));
    }
    if loglog {
        if let Some(v) = xs.iter().chain(&ys).find(|v| **v <= 0.0) {
            return Err(SimError::Plot(format!("log-log plot of {y} vs {x} has nonpositive value {v}")));
        }
    }
    let tx = |v: f64| if loglog { v.ln() } else { v };
    let px: Vec<f64> = xs.iter().map(|v| tx(*v)).collect();
    let py: Vec<f64> = ys.iter().map(|v| tx(*v)).collect();
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) }
    };
    let (x0, x1) = range(&px);
    let (y0, y1) = range(&py);
    let sx = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>"#);
    let scale = if loglog { " (log)" } else { "" };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{x}{scale}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 15 {})">{y}{scale}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let (xa, xb) = (x0, x1);
    let (ya, yb) = (y0, y1);
    let label = |v: f64| format_g17(if loglog { v.exp() } else { v }).chars().take(10).collect::<String>();
    let _ = writeln!(s, r#"<text x="{left}" y="{}" font-size="11" text-anchor="middle">{}</text>"#, bottom + 16.0, label(xa));
    let _ = writeln!(s, r#"<text x="{right}" y="{}" font-size="11" text-anchor="middle">{}</text>"#, bottom + 16.0, label(xb));
    let _ = writeln!(s, r#"<text x="{}" y="{bottom}" font-size="11" text-anchor="end">{}</text>"#, left - 4.0, label(ya));
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#, left - 4.0, top + 4.0, label(yb));

    let fit = if loglog && xs.len() >= 2 && x1 > x0 {
        let f = loglog_fit(&xs, &ys)?;
        let _ = writeln!(
            s,
            r#"<line class="fit" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="steelblue" stroke-dasharray="4 3"/>"#,
            sx(x0),
            sy(f.intercept + f.slope * x0),
            sx(x1),
            sy(f.intercept + f.slope * x1)
        );
        let _ = writeln!(
            s,
            r#"<text class="slope" x="{}" y="{}" font-size="13">slope = {:.4} (se {:.4})</text>"#,
            left + 10.0,
            top - 20.0,
            f.slope,
            f.slope_se
        );
        Some(f)
    } else {
        None
    };
    for (a, b) in px.iter().zip(&py) {
        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="crimson"/>"#, sx(*a), sy(*b));
    }
    s.push_str("</svg>\n");
    Ok((s, fit))
}

pub fn emit_plot(table: &CsvTable, x: &str, y: &str, loglog: bool, path: &Path) -> SimResult<Option<LineFit>> {
    let (svg, fit) = render_plot(table, x, y, loglog)?;
    std::fs::write(path, svg).map_err(|e| SimError::io(path, e))?;
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Cell;

    fn table(points: &[(f64, f64)]) -> CsvTable {
        let mut t = CsvTable::new(["n", "err"]);
        for (a, b) in points {
            t.push(vec![Cell::Num(*a), Cell::Num(*b)]);
        }
        t
    }

    #[test]
    fn two_points_two_circles() {
        let (svg, fit) = render_plot(&table(&[(100.0, 0.1), (400.0, 0.05)]), "n", "err", true).unwrap();
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!((fit.unwrap().slope + 0.5).abs() < 1e-12);
        assert!(svg.contains("slope = -0.5000"));
    }

    #[test]
    fn loglog_rejects_zero() {
        assert!(render_plot(&table(&[(100.0, 0.0), (400.0, 0.05)]), "n", "err", true).is_err());
        assert!(render_plot(&table(&[(100.0, 0.0), (400.0, 0.05)]), "n", "err", false).is_ok());
        assert!(render_plot(&table(&[(1.0, 1.0)]), "n", "missing", false).is_err());
    }
}
