//! Minimal standalone SVG line charts drawn from the exported series.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cournot_mfg::EquilibriumSolution;

use crate::export::write_file;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 56.0;

pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub log_y: bool,
    pub series: Vec<(&'a str, Vec<(f64, f64)>)>,
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub fn render(chart: &Chart) -> Option<String> {
    let tf = |y: f64| if chart.log_y { y.log10() } else { y };
    let pts: Vec<(f64, f64)> = chart
        .series
        .iter()
        .flat_map(|(_, s)| s.iter().map(|&(x, y)| (x, tf(y))))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 * (1.0 + y0.abs()) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#, W / 2.0, chart.title);
    let _ = writeln!(
        svg,
        r#"<path d="M{PAD},{PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let ylab = if chart.log_y { format!("1e{fy:.1}") } else { format!("{fy:.3}") };
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{fx:.3}</text>"#, sx(fx), H - PAD + 16.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{ylab}</text>"#, PAD - 4.0, sy(fy) + 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#, W / 2.0, H - 12.0, chart.x_label);
    for (k, (label, s)) in chart.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut d = String::new();
        for &(x, y) in s {
            let y = tf(y);
            if !(x.is_finite() && y.is_finite()) {
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2}", if d.is_empty() { "M" } else { " L" }, sx(x), sy(y));
        }
        let _ = writeln!(svg, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        let _ = writeln!(svg, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{color}">{label}</text>"#, W - PAD - 120.0, PAD + 14.0 * (k as f64 + 1.0));
    }
    svg.push_str("</svg>\n");
    Some(svg)
}

/// Writes price, production, mass and convergence charts into `dir`.
/// Failures are reported as warnings; the returned list holds what was written.
pub fn emit_plots(sol: &EquilibriumSolution<f64>, dir: &Path) -> (Vec<PathBuf>, Vec<String>) {
    let mut charts = vec![
        ("price.svg", Chart { title: "Price", x_label: "t", log_y: false, series: vec![("P", sol.price.points().collect())] }),
        (
            "production.svg",
            Chart { title: "Aggregate production", x_label: "t", log_y: false, series: vec![("production", sol.production.points().collect())] },
        ),
        ("mass.svg", Chart { title: "Total mass", x_label: "t", log_y: false, series: vec![("mass", sol.mass.points().collect())] }),
    ];
    let mut warnings = Vec::new();
    if sol.history.is_empty() {
        warnings.push("empty iteration history; convergence plot skipped".to_string());
    } else {
        let n = |d: &cournot_mfg::IterationDiagnostics<f64>| d.iteration as f64;
        let mut series = vec![
            ("residual", sol.history.iter().map(|d| (n(d), d.residual)).collect()),
            ("weighted a_n", sol.history.iter().map(|d| (n(d), d.weighted_an)).collect()),
        ];
        let expl: Vec<(f64, f64)> =
            sol.history.iter().filter_map(|d| d.exploitability.filter(|&e| e > 0.0).map(|e| (n(d), e))).collect();
        if !expl.is_empty() {
            series.push(("exploitability", expl));
        }
        charts.push(("convergence.svg", Chart { title: "Convergence", x_label: "iteration", log_y: true, series }));
    }
    let mut written = Vec::new();
    for (file, chart) in charts {
        let path = dir.join(file);
        match render(&chart) {
            None => warnings.push(format!("{}: not enough finite points to plot", path.display())),
            Some(svg) => match write_file(&path, &svg) {
                Ok(()) => written.push(path),
                Err(e) => warnings.push(e.to_string()),
            },
        }
    }
    (written, warnings)
}
