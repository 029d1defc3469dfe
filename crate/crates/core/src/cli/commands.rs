//! Subcommand bodies. Each builds a [`Table`] from the run configuration.

use rayon::prelude::*;

use super::config::{Point, RunConfig};
use super::table::{Cell, Table};
use super::CliError;
use crate::channels::{noisy_rotation, NoiseParams};
use crate::geometry::{BlochVector, Vec3};
use crate::metrology::{
    closed_form_qfi, evolve, noisy_rotation_derivative, optimal_steps_dephasing, qfi_curve,
    split_along_axis, QfiSeries, Regime,
};

/// Table plus notes for standard error.
pub struct Report {
    pub table: Table,
    pub notes: Vec<String>,
}

fn columns(config: &RunConfig, rest: &[&str]) -> Vec<String> {
    let mut c = config.sweep_columns();
    c.extend(rest.iter().map(|s| s.to_string()));
    c
}

/// Evaluates `body` at every sweep point in parallel, keeping grid order.
fn over_points<F>(config: &RunConfig, body: F) -> Result<Vec<Vec<Vec<Cell>>>, CliError>
where
    F: Fn(&Point) -> Result<Vec<Vec<Cell>>, CliError> + Sync,
{
    let points = config.points()?;
    let blocks = points
        .par_iter()
        .map(|p| {
            body(p).map(|rows| {
                rows.into_iter()
                    .map(|r| p.labels.iter().cloned().chain(r).collect())
                    .collect()
            })
        })
        .collect::<Result<Vec<Vec<Vec<Cell>>>, CliError>>()?;
    Ok(blocks)
}

fn flatten(columns: Vec<String>, blocks: Vec<Vec<Vec<Cell>>>) -> Table {
    Table {
        columns,
        rows: blocks.into_iter().flatten().collect(),
    }
}

fn vector_cells(v: Vec3) -> [Cell; 3] {
    [Cell::Real(v.x), Cell::Real(v.y), Cell::Real(v.z)]
}

pub fn matrix(config: &RunConfig) -> Result<Report, CliError> {
    let blocks = over_points(config, |p| {
        let spec = config.gate(p.theta()?)?;
        let m = noisy_rotation(&spec, p.noise)?;
        Ok((0..3)
            .map(|i| {
                let mut row = vec![Cell::Int(i as u64 + 1)];
                row.extend(m.rows()[i].iter().map(|&v| Cell::Real(v)));
                row
            })
            .collect())
    })?;
    Ok(Report {
        table: flatten(columns(config, &["row", "c1", "c2", "c3"]), blocks),
        notes: Vec::new(),
    })
}

pub fn evolve_states(config: &RunConfig) -> Result<Report, CliError> {
    let blocks = over_points(config, |p| {
        let spec = config.gate(p.theta()?)?;
        let b0 = config.initial_state(p.alpha)?;
        let map = noisy_rotation(&spec, p.noise)?;
        let dmap = noisy_rotation_derivative(&spec, p.noise)?;
        let trace = evolve(&map, &dmap, b0, config.steps)?;
        Ok(trace
            .steps
            .iter()
            .map(|s| {
                let mut row = vec![Cell::Int(s.t as u64)];
                row.extend(vector_cells(s.b.vector()));
                row.extend(vector_cells(s.db));
                row.push(Cell::Real(s.b.purity()));
                row
            })
            .collect())
    })?;
    Ok(Report {
        table: flatten(
            columns(config, &["t", "bx", "by", "bz", "dbx", "dby", "dbz", "purity"]),
            blocks,
        ),
        notes: Vec::new(),
    })
}

fn qfi_row(t: usize, qfi: f64, b: BlochVector) -> Vec<Cell> {
    let mut row = vec![Cell::Int(t as u64), Cell::Real(qfi)];
    row.extend(vector_cells(b.vector()));
    row.push(Cell::Real(b.purity()));
    row
}

fn series_rows(label: &str, series: &QfiSeries) -> Vec<Vec<Cell>> {
    series
        .entries
        .iter()
        .map(|e| {
            let mut row = vec![Cell::Text(label.into())];
            row.extend(qfi_row(e.t, e.qfi, e.b));
            row
        })
        .collect()
}

const QFI_COLUMNS: [&str; 6] = ["t", "qfi", "bx", "by", "bz", "purity"];

pub fn qfi(config: &RunConfig) -> Result<Report, CliError> {
    let blocks = over_points(config, |p| {
        let spec = config.gate(p.theta()?)?;
        let b0 = config.initial_state(p.alpha)?;
        let curve = qfi_curve(&spec, p.noise, b0, config.steps)?;
        Ok(curve.entries.iter().map(|e| qfi_row(e.t, e.qfi, e.b)).collect())
    })?;
    Ok(Report {
        table: flatten(columns(config, &QFI_COLUMNS), blocks),
        notes: Vec::new(),
    })
}

/// The complete curve, its dephasing-only counterpart, the curves of the
/// components perpendicular and parallel to the axis, and their sum. The sum
/// row carries the complete state's Bloch vector.
pub fn qfi_decomposed(config: &RunConfig) -> Result<Report, CliError> {
    let points = config.points()?;
    let results = points
        .par_iter()
        .map(|p| {
            let spec = config.gate(p.theta()?)?;
            let b0 = config.initial_state(p.alpha)?;
            let complete = qfi_curve(&spec, p.noise, b0, config.steps)?;
            let dephased = qfi_curve(
                &spec,
                NoiseParams::dephasing(p.noise.k_dephase),
                b0,
                config.steps,
            )?;
            let (perp, par) = split_along_axis(b0, spec.axis());
            let perpendicular = qfi_curve(&spec, p.noise, perp, config.steps)?;
            let parallel = qfi_curve(&spec, p.noise, par, config.steps)?;

            let mut rows = series_rows("complete", &complete);
            rows.extend(series_rows("dephased", &dephased));
            rows.extend(series_rows("perpendicular", &perpendicular));
            rows.extend(series_rows("parallel", &parallel));
            let mut worst_abs: f64 = 0.0;
            let mut worst_rel: f64 = 0.0;
            for ((c, a), b) in complete
                .entries
                .iter()
                .zip(&perpendicular.entries)
                .zip(&parallel.entries)
            {
                let sum = a.qfi + b.qfi;
                let gap = (sum - c.qfi).abs();
                worst_abs = worst_abs.max(gap);
                if c.qfi > 0.0 {
                    worst_rel = worst_rel.max(gap / c.qfi);
                }
                let mut row = vec![Cell::Text("sum".into())];
                row.extend(qfi_row(c.t, sum, c.b));
                rows.push(row);
            }
            let rows: Vec<Vec<Cell>> = rows
                .into_iter()
                .map(|r| p.labels.iter().cloned().chain(r).collect())
                .collect();
            Ok((rows, worst_abs, worst_rel))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut notes = Vec::new();
    let mut table = Table::new(columns(config, &[]));
    table.columns.push("series".into());
    table.columns.extend(QFI_COLUMNS.iter().map(|s| s.to_string()));
    for (i, (rows, abs, rel)) in results.into_iter().enumerate() {
        let at = if config.sweep.is_empty() {
            String::new()
        } else {
            format!(" at sweep point {}", i + 1)
        };
        notes.push(format!(
            "perpendicular + parallel vs complete{at}: max abs deviation {abs:.6e}, max relative deviation {rel:.6e}"
        ));
        table.rows.extend(rows);
    }
    Ok(Report { table, notes })
}

pub fn optimal(config: &RunConfig) -> Result<Report, CliError> {
    let blocks = over_points(config, |p| {
        if !p.noise.k_tilt.is_infinite() {
            return Err(CliError::config(
                "k-tilt",
                "the optimal step count has a closed form only for pure dephasing (k-tilt inf); \
                 run `qfi` with this noise and take the argmax of the qfi column",
            ));
        }
        let steps = optimal_steps_dephasing(p.noise.k_dephase)?;
        let b0 = config.initial_state(p.alpha)?.vector();
        let radius = b0.norm();
        let alpha = if radius == 0.0 {
            std::f64::consts::FRAC_PI_2
        } else {
            (b0.dot(config.axis) / radius).clamp(-1.0, 1.0).acos()
        };
        let theta = p.theta.unwrap_or(std::f64::consts::FRAC_PI_4);
        let qfi = closed_form_qfi(Regime::Dephasing, steps.t_int, theta, p.noise, radius.min(1.0), alpha)?;
        Ok(vec![vec![
            Cell::Real(steps.t_real),
            Cell::Int(steps.t_int as u64),
            Cell::Real(qfi),
        ]])
    })?;
    Ok(Report {
        table: flatten(columns(config, &["t_real", "t_int", "qfi"]), blocks),
        notes: Vec::new(),
    })
}
