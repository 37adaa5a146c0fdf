//! The experiment subcommands: linearization-error study, spectra and
//! deviation tables, HHL sweeps, and resource bounds.

use anyhow::{bail, Result};
use rayon::prelude::*;
use std::path::PathBuf;

use crate::config::UseCase;
use crate::csvio::{fmt, CsvWriter};
use crate::manifest::{resource_entry, ReynoldsEntry, RunManifest};
use crate::runner::{lift, primary_velocity, spectrum_source_label, ExperimentContext};

use qlbm::carleman::{evolve_carleman, rmse, CarlemanOrder, CarlemanState, CarlemanSystem};
use qlbm::hhl::{block_fidelity_errors, clock_minimum, run_hhl_with_decomposition, HhlConfig};
use qlbm::lbm::{lbm_step, reynolds_number, Q};
use qlbm::resources::cnot_bounds;
use qlbm::spectra::{histogram, zeta, zeta_bins, DEFAULT_BIN_WIDTH};

pub const RMSE_SCHEMA: &str = "qlbm.rmse.v1";
pub const VELOCITY_SCHEMA: &str = "qlbm.velocity_field.v1";
pub const SPECTRA_SCHEMA: &str = "qlbm.spectra.v1";
pub const HISTOGRAM_SCHEMA: &str = "qlbm.spectrum_histogram.v1";
pub const ZETA_SCHEMA: &str = "qlbm.zeta.v1";
pub const HHL_SCHEMA: &str = "qlbm.hhl.v1";
pub const RESOURCES_SCHEMA: &str = "qlbm.resources.v1";

fn reynolds_entries(ctx: &ExperimentContext) -> Result<Vec<ReynoldsEntry>> {
    let mut entries = Vec::new();
    for &omega in &ctx.config.omega {
        for &v_lid in &ctx.config.lid_velocities() {
            let grid = ctx.grid(ctx.config.nx, ctx.config.ny(), v_lid)?;
            let initial = ctx.initial_field(&grid)?;
            entries.push(ReynoldsEntry {
                omega,
                v_lid,
                reynolds: reynolds_number(&initial, &grid, omega),
            });
        }
    }
    Ok(entries)
}

/// Carleman-vs-reference RMSE over time, both truncation orders, plus
/// velocity-field dumps of the reference solver.
pub fn carleman_rmse(ctx: &ExperimentContext, threads: usize) -> Result<()> {
    let config = &ctx.config;
    let (nx, ny) = (config.nx, config.ny());
    let v_lid = primary_velocity(config);
    let steps = config.evolution_steps;

    struct Job {
        omega: f64,
        order: CarlemanOrder,
    }
    let mut jobs = Vec::new();
    for &omega in &config.omega {
        for order in [CarlemanOrder::First, CarlemanOrder::Second] {
            jobs.push(Job { omega, order });
        }
    }

    let results: Vec<Result<Vec<f64>>> = jobs
        .par_iter()
        .map(|job| {
            let grid = ctx.grid(nx, ny, v_lid)?;
            let f0 = ctx.initial_field(&grid)?;
            let system = lift(CarlemanSystem::build(grid, job.omega, job.order))?;
            let trajectory =
                evolve_carleman(&CarlemanState::from_field(&f0, job.order), &system, steps);
            let mut reference = f0;
            let mut series = Vec::with_capacity(steps);
            for state in trajectory.iter().skip(1) {
                reference = lift(lbm_step(&reference, &grid, job.omega))?;
                series.push(lift(rmse(&state.f, &reference.values))?);
            }
            Ok(series)
        })
        .collect();

    let mut manifest = RunManifest::new("carleman-rmse", config, threads);
    manifest.derived_reynolds = reynolds_entries(ctx)?;

    let path = ctx.output_path("rmse.csv");
    let mut writer = CsvWriter::create(
        &path,
        RMSE_SCHEMA,
        &["use_case", "nx", "ny", "omega", "order", "t", "rmse"],
    )?;
    for (job, series) in jobs.iter().zip(results) {
        let series = series?;
        for (t, value) in series.iter().enumerate() {
            writer.row(&[
                config.use_case.label().to_string(),
                nx.to_string(),
                ny.to_string(),
                fmt(job.omega),
                job.order.as_u8().to_string(),
                (t + 1).to_string(),
                fmt(*value),
            ])?;
        }
    }
    writer.finish()?;
    manifest.record_output(&path);

    // reference-solver fields for the heatmap plots
    for &omega in &config.omega {
        let grid = ctx.grid(nx, ny, v_lid)?;
        let initial = ctx.initial_field(&grid)?;
        let mut field = initial.clone();
        for _ in 0..steps {
            field = lift(lbm_step(&field, &grid, omega))?;
        }
        for (tag, snapshot) in [("initial", &initial), ("final", &field)] {
            let path = ctx.output_path(&format!(
                "velocity_{}_{}_w{}.csv",
                tag,
                config.use_case.label(),
                omega
            ));
            let mut writer =
                CsvWriter::create(&path, VELOCITY_SCHEMA, &["x", "y", "rho", "ux", "uy"])?;
            for y in 0..ny {
                for x in 0..nx {
                    let site = grid.site_index(x, y);
                    let rho = snapshot.density(site);
                    let u = lift(snapshot.velocity(site))?;
                    writer.row(&[x.to_string(), y.to_string(), fmt(rho), fmt(u[0]), fmt(u[1])])?;
                }
            }
            writer.finish()?;
            manifest.record_output(&path);
        }
    }

    manifest.write(&ctx.out_dir)?;
    Ok(())
}

/// Spectra, histograms and the size-deviation table.
pub fn spectra(ctx: &ExperimentContext, threads: usize) -> Result<()> {
    let config = &ctx.config;
    let v_lid = primary_velocity(config);
    let mut sizes = config
        .spectra_sizes
        .clone()
        .unwrap_or_else(|| vec![4, config.nx]);
    if !sizes.contains(&4) {
        sizes.push(4);
    }
    sizes.sort_unstable();
    sizes.dedup();

    let mut manifest = RunManifest::new("spectra", config, threads);
    let spectra_path = ctx.output_path("spectra.csv");
    let mut spectra_csv = CsvWriter::create(
        &spectra_path,
        SPECTRA_SCHEMA,
        &[
            "use_case",
            "nx",
            "ny",
            "omega",
            "n_steps",
            "kind",
            "n_eigenvalues",
            "lambda_min_positive",
            "lambda_max",
            "n_clock_min",
            "histogram_file",
            "cache_key",
        ],
    )?;
    let zeta_path = ctx.output_path("zeta.csv");
    let mut zeta_csv = CsvWriter::create(
        &zeta_path,
        ZETA_SCHEMA,
        &[
            "use_case",
            "omega",
            "n_steps",
            "nx",
            "ref_nx",
            "zeta",
            "zeta_bins",
        ],
    )?;
    let mut hist_paths: Vec<PathBuf> = Vec::new();

    for &omega in &config.omega {
        for &n_steps in &config.n_steps {
            let mut histograms = Vec::new();
            for &size in &sizes {
                let prepared = ctx.prepared(size, size, omega, n_steps, v_lid)?;
                let spectrum = &prepared.exact_spectrum;
                let hist = lift(histogram(spectrum, DEFAULT_BIN_WIDTH))?;
                let hist_name = format!("hist_{}.csv", &prepared.cache_key[..16]);
                let hist_path = ctx.output_path(&hist_name);
                let mut hist_csv = CsvWriter::create(
                    &hist_path,
                    HISTOGRAM_SCHEMA,
                    &["bin_lo", "bin_hi", "count"],
                )?;
                for (bin, &count) in hist.counts.iter().enumerate() {
                    hist_csv.row(&[
                        fmt(bin as f64 * hist.bin_width),
                        fmt((bin + 1) as f64 * hist.bin_width),
                        count.to_string(),
                    ])?;
                }
                hist_csv.finish()?;
                hist_paths.push(hist_path);

                spectra_csv.row(&[
                    config.use_case.label().to_string(),
                    size.to_string(),
                    size.to_string(),
                    fmt(omega),
                    n_steps.to_string(),
                    "exact".to_string(),
                    spectrum.eigenvalues().len().to_string(),
                    fmt(spectrum.lambda_min_positive().unwrap_or(0.0)),
                    fmt(spectrum.lambda_max()),
                    lift(clock_minimum(spectrum))?.to_string(),
                    hist_name,
                    prepared.cache_key.clone(),
                ])?;
                histograms.push((size, hist));
            }
            let reference = &histograms
                .iter()
                .find(|(s, _)| *s == 4)
                .expect("reference size present")
                .1;
            for (size, hist) in &histograms {
                if *size == 4 {
                    continue;
                }
                zeta_csv.row(&[
                    config.use_case.label().to_string(),
                    fmt(omega),
                    n_steps.to_string(),
                    size.to_string(),
                    "4".to_string(),
                    fmt(lift(zeta(hist, reference))?),
                    fmt(lift(zeta_bins(hist, reference))?),
                ])?;
            }
        }
    }
    spectra_csv.finish()?;
    zeta_csv.finish()?;
    manifest.record_output(&spectra_path);
    manifest.record_output(&zeta_path);
    for p in &hist_paths {
        manifest.record_output(p);
    }
    manifest.spectrum_cache_keys = ctx.used_cache_keys();
    manifest.write(&ctx.out_dir)?;
    Ok(())
}

/// Full solver sweeps: one CSV row per parameter tuple.
pub fn hhl(ctx: &ExperimentContext, threads: usize) -> Result<()> {
    let config = &ctx.config;
    if config.carleman_order != 1 {
        bail!("the hhl pipeline evolves the first-order system; set carleman_order = 1");
    }
    let (nx, ny) = (config.nx, config.ny());
    let max_t0 = config.t0.iter().copied().max().unwrap_or(0);

    let mut manifest = RunManifest::new("hhl", config, threads);
    manifest.derived_reynolds = reynolds_entries(ctx)?;
    for &n_clock in &config.n_clock {
        for &n_steps in &config.n_steps {
            let est = cnot_bounds(n_clock, nx * ny, Q, n_steps, None);
            manifest
                .resource_estimates
                .push(resource_entry(n_clock, nx * ny, Q, n_steps, &est));
        }
    }

    let path = ctx.output_path("hhl.csv");
    let mut writer = CsvWriter::create(
        &path,
        HHL_SCHEMA,
        &[
            "use_case",
            "nx",
            "ny",
            "omega",
            "n_steps",
            "t0",
            "n_clock",
            "c_p",
            "v_lid_x",
            "v_lid_y",
            "spectrum_source",
            "epsilon",
            "epsilon_blocks",
            "p_ancilla",
            "p_success",
            "lambda_max",
            "n_clock_min",
            "generic_cnot_bound",
            "local_cnot_bound",
        ],
    )?;

    for &omega in &config.omega {
        for &v_lid in &config.lid_velocities() {
            for &n_steps in &config.n_steps {
                let prepared = ctx.prepared(nx, ny, omega, n_steps, v_lid)?;
                let spectrum = ctx.run_spectrum(&prepared, omega, n_steps, v_lid)?;
                let n_clock_min = lift(clock_minimum(&spectrum))?;
                if config.export_matrices {
                    let key = &prepared.cache_key[..16];
                    for (name, matrix) in [
                        (
                            format!("tilde_a_{key}.txt"),
                            prepared.embedding.a_tilde_padded().clone(),
                        ),
                        (
                            format!("a_matrix_{key}.txt"),
                            prepared.embedding.full_matrix(),
                        ),
                    ] {
                        let path = ctx.output_path(&name);
                        let file = std::fs::File::create(&path)?;
                        lift(qlbm::linsys::write_triplets(&matrix, file))?;
                        manifest.record_output(&path);
                    }
                }
                let system = lift(CarlemanSystem::build(
                    prepared.grid,
                    omega,
                    CarlemanOrder::First,
                ))?;
                let trajectory = evolve_carleman(
                    &CarlemanState::from_field(&prepared.initial, CarlemanOrder::First),
                    &system,
                    max_t0,
                );

                struct RunJob {
                    t0: usize,
                    n_clock: usize,
                    c_p: f64,
                }
                let mut jobs = Vec::new();
                for &t0 in &config.t0 {
                    for &n_clock in &config.n_clock {
                        for &c_p in &config.c_p {
                            jobs.push(RunJob { t0, n_clock, c_p });
                        }
                    }
                }
                let rows: Vec<Result<Vec<String>>> = jobs
                    .par_iter()
                    .map(|job| {
                        let rhs = prepared.embedding.embed_rhs(&trajectory[job.t0].f);
                        let run = lift(run_hhl_with_decomposition(
                            &prepared.embedding,
                            &prepared.decomposition,
                            &rhs,
                            &spectrum,
                            &HhlConfig::new(job.n_clock, job.c_p),
                        ))?;
                        let x_exact = prepared.embedding.solve_embedded(&rhs);
                        let blocks = block_fidelity_errors(
                            &prepared.embedding,
                            &run.solution_state,
                            &x_exact,
                        );
                        let est = cnot_bounds(job.n_clock, nx * ny, Q, n_steps, None);
                        Ok(vec![
                            config.use_case.label().to_string(),
                            nx.to_string(),
                            ny.to_string(),
                            fmt(omega),
                            n_steps.to_string(),
                            job.t0.to_string(),
                            job.n_clock.to_string(),
                            fmt(job.c_p),
                            fmt(v_lid[0]),
                            fmt(v_lid[1]),
                            spectrum_source_label(&spectrum),
                            fmt(run.fidelity_error),
                            blocks.iter().map(|e| fmt(*e)).collect::<Vec<_>>().join(";"),
                            fmt(run.p_ancilla),
                            fmt(run.p_success),
                            fmt(run.lambda_max_used),
                            n_clock_min.to_string(),
                            est.generic_bound.to_string(),
                            est.local_bound.to_string(),
                        ])
                    })
                    .collect();
                for row in rows {
                    writer.row(&row?)?;
                }
            }
        }
    }
    writer.finish()?;
    manifest.record_output(&path);
    manifest.spectrum_cache_keys = ctx.used_cache_keys();
    manifest.write(&ctx.out_dir)?;
    Ok(())
}

/// CNOT-bound table for the configured sweep.
pub fn resources(ctx: &ExperimentContext, threads: usize) -> Result<()> {
    let config = &ctx.config;
    let l_sites = config.nx * config.ny();
    let path = ctx.output_path("resources.csv");
    let mut writer = CsvWriter::create(
        &path,
        RESOURCES_SCHEMA,
        &[
            "n_clock",
            "l_sites",
            "q",
            "n_steps",
            "q_tilde",
            "generic_bound",
            "local_bound",
            "reinit_bound",
        ],
    )?;
    let mut manifest = RunManifest::new("resources", config, threads);
    for &n_clock in &config.n_clock {
        for &n_steps in &config.n_steps {
            let est = cnot_bounds(n_clock, l_sites, Q, n_steps, None);
            writer.row(&[
                n_clock.to_string(),
                l_sites.to_string(),
                Q.to_string(),
                n_steps.to_string(),
                est.q_tilde.to_string(),
                est.generic_bound.to_string(),
                est.local_bound.to_string(),
                est.reinit_bound.to_string(),
            ])?;
            manifest
                .resource_estimates
                .push(resource_entry(n_clock, l_sites, Q, n_steps, &est));
        }
    }
    writer.finish()?;
    manifest.record_output(&path);
    manifest.write(&ctx.out_dir)?;
    Ok(())
}

/// Consistency guard used by the use-case dispatch.
pub fn check_use_case(config: &crate::config::RunConfig) -> Result<()> {
    if config.use_case == UseCase::Liddriven && config.lid_velocities().is_empty() {
        bail!("liddriven sweep needs at least one v_lid entry");
    }
    Ok(())
}
