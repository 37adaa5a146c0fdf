//! Static SVG rendering of the CSV outputs. The schema comment line in
//! each file selects the figure type.

use anyhow::{bail, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::commands;
use crate::csvio::CsvTable;
use crate::svg::{self, Series, YScale};

pub fn plot_file(input: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let table = CsvTable::load(input)?;
    if table.rows.is_empty() {
        bail!("{}: no data rows, nothing to plot", input.display());
    }
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("plot")
        .to_string();
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut emit = |name: String, svg: String| -> Result<()> {
        let path = out_dir.join(name);
        std::fs::write(&path, svg)?;
        written.push(path);
        Ok(())
    };

    match table.schema.as_str() {
        commands::RMSE_SCHEMA => {
            let series = grouped_series(&table, &["nx", "omega", "order"], "t", "rmse", |key| {
                format!("nx={} w={} order {}", key[0], key[1], key[2])
            })?;
            emit(
                format!("{stem}.svg"),
                svg::line_chart(
                    "Linearization error vs time",
                    "t",
                    "RMSE",
                    YScale::Log,
                    &series,
                ),
            )?;
        }
        commands::VELOCITY_SCHEMA => {
            let (nx, ny, speed, velocity) = velocity_grid(&table)?;
            emit(
                format!("{stem}.svg"),
                svg::velocity_heatmap(&stem, nx, ny, &speed, &velocity),
            )?;
        }
        commands::HHL_SCHEMA => {
            let eps = grouped_series(
                &table,
                &["use_case", "n_steps", "t0", "c_p", "spectrum_source"],
                "n_clock",
                "epsilon",
                |key| {
                    format!(
                        "{} Nt={} t0={} cp={} {}",
                        key[0], key[1], key[2], key[3], key[4]
                    )
                },
            )?;
            emit(
                format!("{stem}_fidelity.svg"),
                svg::line_chart(
                    "Fidelity error vs clock qubits",
                    "clock qubits",
                    "1 - |<x|x_hhl>|^2",
                    YScale::Log,
                    &eps,
                ),
            )?;

            // success probabilities as grouped bars over clock widths
            let clock_col = table.column_index("n_clock")?;
            let mut clocks: Vec<String> = table.rows.iter().map(|r| r[clock_col].clone()).collect();
            clocks.sort_by_key(|c| c.parse::<usize>().unwrap_or(0));
            clocks.dedup();
            let mut bars: Vec<Series> = Vec::new();
            for (column, label) in [
                ("p_success", "ancilla=1 & clock=0"),
                ("p_ancilla", "ancilla=1"),
            ] {
                let mut grouped: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
                for row in &table.rows {
                    let key = format!(
                        "Nt={} t0={} {}",
                        field(&table, row, "n_steps")?,
                        field(&table, row, "t0")?,
                        label
                    );
                    let ci = clocks.iter().position(|c| *c == row[clock_col]).unwrap() as f64;
                    grouped
                        .entry(key)
                        .or_default()
                        .push((ci, table.float(row, column)?));
                }
                for (label, points) in grouped {
                    bars.push(Series { label, points });
                }
            }
            emit(
                format!("{stem}_probability.svg"),
                svg::bar_chart(
                    "Success probabilities",
                    "clock qubits",
                    "probability",
                    &clocks,
                    &bars,
                ),
            )?;

            // c_p study when the sweep has more than one value
            let cp_col = table.column_index("c_p")?;
            let mut cps: Vec<String> = table.rows.iter().map(|r| r[cp_col].clone()).collect();
            cps.sort_by(|a, b| {
                a.parse::<f64>()
                    .unwrap_or(0.0)
                    .partial_cmp(&b.parse::<f64>().unwrap_or(0.0))
                    .unwrap()
            });
            cps.dedup();
            if cps.len() > 1 {
                let series =
                    grouped_series(&table, &["n_steps", "n_clock"], "c_p", "p_success", |key| {
                        format!("Nt={} n_c={}", key[0], key[1])
                    })?;
                emit(
                    format!("{stem}_cp.svg"),
                    svg::line_chart(
                        "Success probability vs rotation scale",
                        "C_p",
                        "P(ancilla=1, clock=0)",
                        YScale::Linear,
                        &series,
                    ),
                )?;
            }
        }
        commands::ZETA_SCHEMA => {
            let series = grouped_series(
                &table,
                &["use_case", "omega", "n_steps"],
                "nx",
                "zeta",
                |key| format!("{} w={} Nt={}", key[0], key[1], key[2]),
            )?;
            emit(
                format!("{stem}.svg"),
                svg::line_chart(
                    "Spectral deviation from the 4x4 reference",
                    "N_x",
                    "zeta",
                    YScale::Linear,
                    &series,
                ),
            )?;
        }
        commands::HISTOGRAM_SCHEMA => {
            let mut points = Vec::new();
            for row in &table.rows {
                let lo = table.float(row, "bin_lo")?;
                let hi = table.float(row, "bin_hi")?;
                points.push(((lo + hi) / 2.0, table.float(row, "count")?));
            }
            emit(
                format!("{stem}.svg"),
                svg::line_chart(
                    "Eigenvalue histogram (positive half)",
                    "lambda",
                    "counts",
                    YScale::Linear,
                    &[Series {
                        label: stem.clone(),
                        points,
                    }],
                ),
            )?;
        }
        other => bail!("{}: unknown schema {other}", input.display()),
    }
    Ok(written)
}

fn field<'a>(table: &CsvTable, row: &'a [String], name: &str) -> Result<&'a str> {
    Ok(&row[table.column_index(name)?])
}

/// Collect (x, y) series grouped by a tuple of key columns, sorted by x.
fn grouped_series(
    table: &CsvTable,
    key_columns: &[&str],
    x: &str,
    y: &str,
    label_of: impl Fn(&[String]) -> String,
) -> Result<Vec<Series>> {
    let mut grouped: BTreeMap<Vec<String>, Vec<(f64, f64)>> = BTreeMap::new();
    for row in &table.rows {
        let mut key = Vec::with_capacity(key_columns.len());
        for column in key_columns {
            key.push(row[table.column_index(column)?].clone());
        }
        grouped
            .entry(key)
            .or_default()
            .push((table.float(row, x)?, table.float(row, y)?));
    }
    Ok(grouped
        .into_iter()
        .map(|(key, mut points)| {
            points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            Series {
                label: label_of(&key),
                points,
            }
        })
        .collect())
}

type VelocityGrid = (usize, usize, Vec<f64>, Vec<[f64; 2]>);

fn velocity_grid(table: &CsvTable) -> Result<VelocityGrid> {
    let mut nx = 0usize;
    let mut ny = 0usize;
    for row in &table.rows {
        nx = nx.max(table.float(row, "x")? as usize + 1);
        ny = ny.max(table.float(row, "y")? as usize + 1);
    }
    let mut speed = vec![0.0; nx * ny];
    let mut velocity = vec![[0.0; 2]; nx * ny];
    for row in &table.rows {
        let x = table.float(row, "x")? as usize;
        let y = table.float(row, "y")? as usize;
        let ux = table.float(row, "ux")?;
        let uy = table.float(row, "uy")?;
        speed[y * nx + x] = (ux * ux + uy * uy).sqrt();
        velocity[y * nx + x] = [ux, uy];
    }
    Ok((nx, ny, speed, velocity))
}
