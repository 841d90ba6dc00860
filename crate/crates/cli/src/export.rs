//! CSV artifacts. Every number is written with 17 significant digits so
//! files round-trip to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use cournot_mfg::{EquilibriumSolution, SpaceTimeField};

use crate::error::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Price,
    Production,
    Mass,
    Convergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldWhich {
    U,
    M,
    Q,
}

impl SeriesKind {
    pub const ALL: [SeriesKind; 4] = [SeriesKind::Price, SeriesKind::Production, SeriesKind::Mass, SeriesKind::Convergence];

    pub fn file_name(self) -> &'static str {
        match self {
            SeriesKind::Price => "price.csv",
            SeriesKind::Production => "production.csv",
            SeriesKind::Mass => "mass.csv",
            SeriesKind::Convergence => "convergence.csv",
        }
    }
}

impl FieldWhich {
    pub const ALL: [FieldWhich; 3] = [FieldWhich::U, FieldWhich::M, FieldWhich::Q];

    pub fn file_name(self) -> &'static str {
        match self {
            FieldWhich::U => "field_U.csv",
            FieldWhich::M => "field_M.csv",
            FieldWhich::Q => "field_Q.csv",
        }
    }
}

pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn series_csv(sol: &EquilibriumSolution<f64>, which: SeriesKind) -> String {
    let mut out = String::new();
    match which {
        SeriesKind::Price | SeriesKind::Production | SeriesKind::Mass => {
            let series = match which {
                SeriesKind::Price => &sol.price,
                SeriesKind::Production => &sol.production,
                _ => &sol.mass,
            };
            out.push_str("t,value\n");
            for (t, v) in series.points() {
                let _ = writeln!(out, "{},{}", fmt_num(t), fmt_num(v));
            }
        }
        SeriesKind::Convergence => {
            out.push_str("n,residual,weighted_an,exploitability,J_value\n");
            for d in &sol.history {
                let expl = d.exploitability.map(fmt_num).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    d.iteration,
                    fmt_num(d.residual),
                    fmt_num(d.weighted_an),
                    expl,
                    fmt_num(d.j_value)
                );
            }
        }
    }
    out
}

fn field_of(sol: &EquilibriumSolution<f64>, which: FieldWhich) -> &SpaceTimeField<f64> {
    match which {
        FieldWhich::U => &sol.value,
        FieldWhich::M => &sol.density,
        FieldWhich::Q => &sol.smoothed_policy,
    }
}

/// Largest exportable time index: policies live on transitions only.
pub fn last_time_index(sol: &EquilibriumSolution<f64>, which: FieldWhich) -> usize {
    let field = field_of(sol, which);
    field.grid().time_len(field.alignment()) - 1
}

pub fn field_csv(sol: &EquilibriumSolution<f64>, which: FieldWhich, times: &[usize]) -> Result<String, RunError> {
    let field = field_of(sol, which);
    let grid = field.grid();
    let last = last_time_index(sol, which);
    if let Some(&bad) = times.iter().find(|&&tau| tau > last) {
        return Err(RunError::Usage(format!(
            "time index {bad} out of range for field {which:?} (0..={last})"
        )));
    }
    let mut out = String::from("x");
    for &tau in times {
        let _ = write!(out, ",t={}", fmt_num(grid.t(tau)));
    }
    out.push('\n');
    for i in 0..=grid.space_cells() {
        out.push_str(&fmt_num(grid.x(i)));
        for &tau in times {
            let _ = write!(out, ",{}", fmt_num(field.get(tau, i)));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Five evenly spaced indices covering `0..=last`.
pub fn default_times(last: usize) -> Vec<usize> {
    let mut times: Vec<usize> = (0..5).map(|k| k * last / 4).collect();
    times.dedup();
    times
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    std::fs::write(path, contents).map_err(|e| RunError::io(path, e))
}

pub fn export_series(sol: &EquilibriumSolution<f64>, which: SeriesKind, path: &Path) -> Result<(), RunError> {
    write_file(path, &series_csv(sol, which))
}

pub fn export_field(
    sol: &EquilibriumSolution<f64>,
    which: FieldWhich,
    times: &[usize],
    path: &Path,
) -> Result<(), RunError> {
    write_file(path, &field_csv(sol, which, times)?)
}
