//! Deterministic SVG line plots on log2 axes.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Result};
use bilab_core::bilinop::OperatorRatioSweep;
use bilab_core::fit::fit_line;
use bilab_core::trilinear::TrilinearCertificate;
use bilab_experiments::ghs::GhsReport;
use bilab_experiments::report::{Abscissa, GrowthReport};

use crate::output::write_atomic;

/// Points already in log2 units, plus labels.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotData {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

pub trait Plottable {
    fn plot_data(&self) -> PlotData;
}

fn log2_all(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.log2()).collect()
}

impl Plottable for TrilinearCertificate {
    fn plot_data(&self) -> PlotData {
        let rs: Vec<f64> = self.radii.iter().map(|&r| r as f64).collect();
        PlotData {
            title: format!("{}: slope {:.3}, {}", self.weight, self.slope, self.verdict),
            x_label: "log2 R".into(),
            y_label: "log2 norm".into(),
            xs: log2_all(&rs),
            ys: log2_all(&self.norms),
        }
    }
}

impl Plottable for GrowthReport {
    fn plot_data(&self) -> PlotData {
        let (xs, x_label) = match self.abscissa {
            Abscissa::Index => (self.schedule.clone(), "k".to_string()),
            Abscissa::Log2 => (log2_all(&self.schedule), "log2 X".to_string()),
        };
        PlotData {
            title: format!("{} ({}): slope {:.3}, {}", self.experiment, self.parameter, self.slope, self.outcome),
            x_label,
            y_label: "log2 value".into(),
            xs,
            ys: log2_all(&self.values),
        }
    }
}

impl Plottable for OperatorRatioSweep {
    fn plot_data(&self) -> PlotData {
        PlotData {
            title: format!("{} into {}: slope {:.3}", self.symbol, self.target, self.slope().unwrap_or(f64::NAN)),
            x_label: "log2 bandwidth".into(),
            y_label: "log2 ratio".into(),
            xs: log2_all(&self.bandwidths),
            ys: log2_all(&self.ratios),
        }
    }
}

impl Plottable for GhsReport {
    fn plot_data(&self) -> PlotData {
        // vanishing pieces have no logarithm and are left out
        let (xs, ys) = self.sup_norms.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(k, v)| (k as f64, v.log2())).unzip();
        PlotData { title: format!("{}: dyadic sup norms", self.symbol), x_label: "k".into(), y_label: "log2 sup".into(), xs, ys }
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD_L: f64 = 70.0;
const PAD_R: f64 = 20.0;
const PAD_T: f64 = 40.0;
const PAD_B: f64 = 50.0;

/// Renders the SVG text. Needs at least two finite points.
pub fn render_svg(d: &PlotData) -> Result<String> {
    if d.xs.len() != d.ys.len() {
        bail!("plot has {} abscissae but {} values", d.xs.len(), d.ys.len());
    }
    if d.xs.len() < 2 {
        bail!("a plot needs at least 2 points, got {}", d.xs.len());
    }
    if d.xs.iter().chain(&d.ys).any(|v| !v.is_finite()) {
        bail!("plot points must be finite (values must be positive before the log)");
    }
    let fit = fit_line(&d.xs, &d.ys)?;
    let span = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min).floor();
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ceil();
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 1.0, hi + 1.0)
        }
    };
    let (x0, x1) = span(&d.xs);
    let (y0, y1) = span(&d.ys);
    let px = |x: f64| PAD_L + (x - x0) / (x1 - x0) * (W - PAD_L - PAD_R);
    let py = |y: f64| H - PAD_B - (y - y0) / (y1 - y0) * (H - PAD_T - PAD_B);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(&d.title));
    let _ = writeln!(
        s,
        r#"<rect x="{PAD_L}" y="{PAD_T}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        W - PAD_L - PAD_R,
        H - PAD_T - PAD_B
    );
    // integer ticks, thinned to at most about ten per axis
    let step = |lo: f64, hi: f64| ((hi - lo) / 10.0).ceil().max(1.0);
    let sx = step(x0, x1);
    let mut t = x0;
    while t <= x1 + 1e-9 {
        let _ = writeln!(s, r##"<line x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}" stroke="#ddd"/>"##, px(t), PAD_T, H - PAD_B);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{t}</text>"#, px(t), H - PAD_B + 16.0);
        t += sx;
    }
    let sy = step(y0, y1);
    let mut t = y0;
    while t <= y1 + 1e-9 {
        let _ = writeln!(s, r##"<line x1="{0:.1}" y1="{1:.1}" x2="{2:.1}" y2="{1:.1}" stroke="#ddd"/>"##, PAD_L, py(t), W - PAD_R);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{t}</text>"#, PAD_L - 6.0, py(t) + 4.0);
        t += sy;
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, esc(&d.x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0:.1}" text-anchor="middle" transform="rotate(-90 18 {0:.1})">{1}</text>"#,
        H / 2.0,
        esc(&d.y_label)
    );
    let (fa, fb) = (fit.slope, fit.intercept);
    let _ = writeln!(
        s,
        r##"<line class="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c33" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
        px(x0),
        py(fa * x0 + fb),
        px(x1),
        py(fa * x1 + fb)
    );
    let pts: Vec<String> = d.xs.iter().zip(&d.ys).map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#236" stroke-width="1"/>"##, pts.join(" "));
    for (&x, &y) in d.xs.iter().zip(&d.ys) {
        let _ = writeln!(s, r##"<circle class="marker" cx="{:.2}" cy="{:.2}" r="4" fill="#236"/>"##, px(x), py(y));
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">fit slope {fa:.4}</text>"#, W - PAD_R - 6.0, PAD_T + 16.0);
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes a log-log plot of `report` with its fitted line. Nothing is written
/// when the report has fewer than two plottable points.
pub fn emit_plot<P: Plottable + ?Sized>(report: &P, path: &Path) -> Result<()> {
    let svg = render_svg(&report.plot_data())?;
    write_atomic(path, svg.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(n: usize) -> PlotData {
        PlotData {
            title: "a < b & c".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            xs: (0..n).map(|i| i as f64).collect(),
            ys: (0..n).map(|i| 0.5 * i as f64).collect(),
        }
    }

    #[test]
    fn markers_and_fit_line() {
        let s = render_svg(&data(4)).unwrap();
        assert_eq!(s.matches("class=\"marker\"").count(), 4);
        assert_eq!(s.matches("class=\"fit\"").count(), 1);
        assert!(s.contains("a &lt; b &amp; c"));
        assert!(s.contains("fit slope 0.5000"));
        assert_eq!(s, render_svg(&data(4)).unwrap());
    }

    #[test]
    fn too_few_points_is_an_error() {
        assert!(render_svg(&data(0)).is_err());
        assert!(render_svg(&data(1)).is_err());
        let mut d = data(3);
        d.ys[1] = f64::NEG_INFINITY;
        assert!(render_svg(&d).is_err());
    }
}
