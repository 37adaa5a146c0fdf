//! End-to-end checks of the binary: determinism of the CSV outputs,
//! recomputability of reported quantities through the library, plot
//! emission, and the failure contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_qlbm")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

const SMALL_HHL: &str = r#"{
    "use_case": "bounceback",
    "nx": 4,
    "omega": [1.1],
    "n_steps": [1, 2],
    "t0": [0, 3],
    "n_clock": [4, 5],
    "evolution_steps": 30
}"#;

#[test]
fn identical_configs_produce_byte_identical_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_HHL);
    let (out_a, out_b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&out_a, &out_b] {
        run_ok(&[
            "hhl",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            "2",
        ]);
        run_ok(&[
            "carleman-rmse",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    for name in [
        "hhl.csv",
        "rmse.csv",
        "velocity_initial_bounceback_w1.1.csv",
        "velocity_final_bounceback_w1.1.csv",
    ] {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn hhl_rows_are_recomputable_through_the_library() {
    use qlbm::carleman::carleman_matrix_first;
    use qlbm::hhl::{run_hhl_with_decomposition, HhlConfig};
    use qlbm::lbm::{init_kolmogorov, Boundary, LatticeGrid};
    use qlbm::linsys::{hermitize_and_pad, SpectralDecomposition, TimeBlockSystem};
    use qlbm::spectra::{spectrum_from_decomposition, SpectrumDescriptor, SpectrumKind};

    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"use_case": "bounceback", "nx": 4, "omega": [1.1],
            "n_steps": [1], "t0": [0], "n_clock": [5]}"#,
    );
    let out = dir.path().join("out");
    run_ok(&[
        "hhl",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(out.join("hhl.csv")).unwrap();
    let row: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    let header: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let get = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    let reported_eps: f64 = get("epsilon").parse().unwrap();
    let reported_p: f64 = get("p_success").parse().unwrap();
    let reported_pa: f64 = get("p_ancilla").parse().unwrap();

    let grid = LatticeGrid::new(4, 4, Boundary::BounceBack).unwrap();
    let c = carleman_matrix_first(&grid, 1.1).unwrap();
    let phi0 = init_kolmogorov(&grid, 0.3, 0.3, 1.0, 1.0).unwrap();
    let system = TimeBlockSystem::assemble(&c, &phi0.values, 1).unwrap();
    let embedding = hermitize_and_pad(&system);
    let decomp = SpectralDecomposition::of_embedding(&embedding);
    let spectrum = spectrum_from_decomposition(
        &decomp,
        SpectrumDescriptor {
            nx: 4,
            ny: 4,
            boundary: Boundary::BounceBack,
            omega: 1.1,
            n_steps: 1,
            kind: SpectrumKind::Exact,
        },
    );
    let rerun = run_hhl_with_decomposition(
        &embedding,
        &decomp,
        embedding.rhs_embedded(),
        &spectrum,
        &HhlConfig::new(5, 1.0),
    )
    .unwrap();
    assert_eq!(rerun.fidelity_error.to_bits(), reported_eps.to_bits());
    assert_eq!(rerun.p_success.to_bits(), reported_p.to_bits());
    assert_eq!(rerun.p_ancilla.to_bits(), reported_pa.to_bits());
}

#[test]
fn substituted_spectrum_runs_and_labels_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"use_case": "bounceback", "nx": 6, "omega": [1.1],
            "n_steps": [1], "t0": [0], "n_clock": [5],
            "spectrum_source": {"substituted": {"nx": 4}}}"#,
    );
    let out = dir.path().join("out");
    let cache = dir.path().join("cache");
    run_ok(&[
        "hhl",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--cache",
        cache.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(out.join("hhl.csv")).unwrap();
    assert!(
        text.contains("substituted4"),
        "source label missing: {text}"
    );
    // second run hits the on-disk spectrum cache
    run_ok(&[
        "hhl",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("out2").to_str().unwrap(),
        "--cache",
        cache.to_str().unwrap(),
    ]);
    assert!(cache.read_dir().unwrap().count() >= 1);
}

#[test]
fn spectra_command_emits_zeta_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"use_case": "bounceback", "nx": 6, "omega": [1.1],
            "n_steps": [1], "spectra_sizes": [4, 6]}"#,
    );
    let out = dir.path().join("out");
    run_ok(&[
        "spectra",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let zeta = fs::read_to_string(out.join("zeta.csv")).unwrap();
    let rows: Vec<&str> = zeta.lines().skip(2).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("bounceback,1.1,1,6,4,"));
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"spectrum_cache_keys\""));
}

#[test]
fn plot_renders_svgs_and_rejects_empty_input() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_HHL);
    let out = dir.path().join("out");
    run_ok(&[
        "hhl",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let plots = dir.path().join("plots");
    run_ok(&[
        "plot",
        out.join("hhl.csv").to_str().unwrap(),
        "--out",
        plots.to_str().unwrap(),
    ]);
    for name in ["hhl_fidelity.svg", "hhl_probability.svg"] {
        let svg = fs::read_to_string(plots.join(name)).unwrap();
        assert!(svg.starts_with("<svg"), "{name} is not an svg");
        assert!(svg.len() > 500);
    }

    // headers only, no data rows
    let empty = dir.path().join("empty.csv");
    fs::write(
        &empty,
        "# schema: qlbm.rmse.v1\nuse_case,nx,ny,omega,order,t,rmse\n",
    )
    .unwrap();
    let output = run(&[
        "plot",
        empty.to_str().unwrap(),
        "--out",
        plots.to_str().unwrap(),
    ]);
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(
        err.contains("\"error\""),
        "stderr not machine readable: {err}"
    );
    assert!(!plots.join("empty.svg").exists());
}

#[test]
fn matrix_export_writes_triplet_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"use_case": "pbc", "nx": 4, "omega": [1.1], "n_steps": [1],
            "t0": [0], "n_clock": [4], "export_matrices": true}"#,
    );
    let out = dir.path().join("out");
    run_ok(&[
        "hhl",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let exported: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().to_string())
        .filter(|n| n.ends_with(".txt"))
        .collect();
    assert_eq!(exported.len(), 2, "expected tilde_a and a_matrix exports");
    for name in exported {
        let text = fs::read_to_string(out.join(&name)).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("% qlbm sparse triplet"));
        let dims: Vec<usize> = lines
            .next()
            .unwrap()
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        assert_eq!(lines.count(), dims[2], "{name}: nnz mismatch");
    }
}

#[test]
fn bad_config_fails_with_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"use_case": "bounceback", "nx": 4, "omega": [9.0]}"#,
    );
    let output = run(&["hhl", "--config", config.to_str().unwrap()]);
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    let record: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert!(record["error"].as_str().unwrap().contains("omega"));
}
