//! Analytic emulation of the HHL linear-system pipeline.
//!
//! The five circuit stages (state preparation, phase estimation,
//! eigenvalue-conditioned ancilla rotations, inverse phase estimation,
//! post-selection) are evaluated in closed form in the eigenbasis of the
//! Hermitian system matrix. With eigenpairs `(lambda_j, u_j)`,
//! `beta_j = <u_j | b/||b||>` and phases `phi_j = lambda_j / (4 lambda_max) mod 1`,
//! the post-selected amplitude on `u_j` is
//!
//! ```text
//! c_j = beta_j * sum_k |alpha_{k|j}|^2 sin(theta_k)
//! ```
//!
//! where `alpha_{k|j}` is the exact phase-estimation kernel and `theta_k`
//! is nonzero only at clock values present in the rotation table. The
//! table is built from a supplied spectrum (exact or substituted from a
//! smaller lattice), one rotation per distinct binary eigenvalue.
//!
//! [`brute_force_oracle`] rebuilds the same pipeline as explicit unitary
//! operations on the full ancilla ⊗ clock ⊗ system register and must
//! agree with the analytic path to 1e-10; it exists to validate the
//! closed forms, not to be fast.

use ndarray::Array2;
use num_complex::Complex64;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use crate::linsys::{HermitianEmbedding, SpectralDecomposition};
use crate::spectra::Spectrum;
use crate::{Error, Result};

/// Total composite-register dimension the brute-force oracle will accept.
pub const ORACLE_DIMENSION_CAP: usize = 1 << 20;

/// Parameters of one emulated run.
#[derive(Debug, Clone, Copy)]
pub struct HhlConfig {
    /// Clock register width.
    pub n_clock: usize,
    /// Scale factor inside the rotation angles `arcsin(c_p / lambda_bar)`.
    pub c_p: f64,
}

impl HhlConfig {
    pub fn new(n_clock: usize, c_p: f64) -> Self {
        assert!((1..=24).contains(&n_clock), "clock width out of range");
        assert!(c_p > 0.0, "c_p must be positive");
        HhlConfig { n_clock, c_p }
    }
}

/// Smallest admissible clock width for a spectrum:
/// `max(1, ceil(log2(ceil(lambda_max / lambda_min))))`.
pub fn clock_minimum(spectrum: &Spectrum) -> Result<usize> {
    let lambda_max = spectrum.lambda_max();
    let lambda_min = spectrum
        .lambda_min_positive()
        .ok_or(Error::NoPositiveEigenvalue)?;
    if lambda_max <= 0.0 {
        return Err(Error::NoPositiveEigenvalue);
    }
    Ok(clock_minimum_of(lambda_max, lambda_min))
}

fn clock_minimum_of(lambda_max: f64, lambda_min_positive: f64) -> usize {
    let ratio = (lambda_max / lambda_min_positive).ceil() as u64;
    ceil_log2_u64(ratio).max(1)
}

fn ceil_log2_u64(x: u64) -> usize {
    assert!(x >= 1);
    (64 - (x - 1).leading_zeros()) as usize
}

fn ceil_log2_usize(x: usize) -> usize {
    assert!(x >= 1);
    x.next_power_of_two().trailing_zeros() as usize
}

/// Hamiltonian-simulation times `t_i = 2^i * 2 pi / (4 lambda_max)` for
/// each clock qubit.
pub fn evolution_times(n_clock: usize, lambda_max: f64) -> Vec<f64> {
    assert!(lambda_max > 0.0);
    (0..n_clock)
        .map(|i| (1u64 << i) as f64 * PI / (2.0 * lambda_max))
        .collect()
}

/// Signed binary approximation of an eigenvalue and its clock index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryEigenvalue {
    pub lambda_bar: i64,
    /// Two's-complement clock position: `lambda_bar mod 2^n_clock`.
    pub clock_index: usize,
}

/// `lambda_bar = round(2^n_clock * lambda / (4 lambda_max))`, with
/// negative eigenvalues wrapping to the upper half of the clock range.
pub fn binary_eigenvalue(lambda: f64, lambda_max: f64, n_clock: usize) -> Result<BinaryEigenvalue> {
    if lambda.abs() > lambda_max {
        return Err(Error::EigenvalueOutOfRange { lambda, lambda_max });
    }
    let n = 1i64 << n_clock;
    let lambda_bar = (n as f64 * lambda / (4.0 * lambda_max)).round() as i64;
    if lambda_bar == 0 {
        return Err(Error::InsufficientClockResolution { lambda, n_clock });
    }
    Ok(BinaryEigenvalue {
        lambda_bar,
        clock_index: lambda_bar.rem_euclid(n) as usize,
    })
}

/// Ancilla rotation angle `arcsin(c_p / lambda_bar)`.
pub fn rotation_angle(lambda_bar: i64, c_p: f64) -> Result<f64> {
    let ratio = c_p / lambda_bar as f64;
    if !(ratio.abs() <= 1.0) {
        return Err(Error::RotationUndefined { c_p, lambda_bar });
    }
    Ok(ratio.asin())
}

/// One controlled rotation at a clock value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationEntry {
    pub clock_index: usize,
    pub lambda_bar: i64,
    pub theta: f64,
}

/// Rotations applied by the ancilla stage, keyed by clock value. Clock
/// values without an entry get the identity; their amplitude ends up
/// discarded by post-selection.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationTable {
    n_clock: usize,
    entries: Vec<RotationEntry>,
}

impl RotationTable {
    pub fn n_clock(&self) -> usize {
        self.n_clock
    }

    /// Entries in ascending clock order.
    pub fn entries(&self) -> &[RotationEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[cfg(test)]
    pub(crate) fn empty(n_clock: usize) -> Self {
        RotationTable {
            n_clock,
            entries: Vec::new(),
        }
    }
}

/// Build the rotation table from the distinct binary eigenvalues of a
/// set of spectrum values. `lambda_scale` plays the role of
/// `lambda_max` in the binning.
///
/// Requires `n_clock >= clock_minimum` for the value set (with the
/// extremes taken over eigenvalue magnitudes, which reduces to the
/// positive-half formula on the symmetric embedded spectra). Above that
/// floor, individual eigenvalues whose binary representation still
/// rounds to zero simply get no rotation: their weight stays on clock
/// value 0 with the ancilla in |0> and is discarded by post-selection.
pub fn build_rotation_table_from_values(
    values: &[f64],
    lambda_scale: f64,
    n_clock: usize,
    c_p: f64,
) -> Result<RotationTable> {
    let lambda_min_magnitude = values
        .iter()
        .copied()
        .filter(|l| *l != 0.0)
        .fold(f64::INFINITY, |acc, l| acc.min(l.abs()));
    if !lambda_min_magnitude.is_finite() {
        return Err(Error::NoPositiveEigenvalue);
    }
    if n_clock < clock_minimum_of(lambda_scale, lambda_min_magnitude) {
        return Err(Error::InsufficientClockResolution {
            lambda: lambda_min_magnitude,
            n_clock,
        });
    }
    let mut map: BTreeMap<usize, RotationEntry> = BTreeMap::new();
    for &lambda in values {
        let be = match binary_eigenvalue(lambda, lambda_scale, n_clock) {
            Ok(be) => be,
            Err(Error::InsufficientClockResolution { .. }) => continue,
            Err(e) => return Err(e),
        };
        if map.contains_key(&be.clock_index) {
            continue;
        }
        let theta = rotation_angle(be.lambda_bar, c_p)?;
        map.insert(
            be.clock_index,
            RotationEntry {
                clock_index: be.clock_index,
                lambda_bar: be.lambda_bar,
                theta,
            },
        );
    }
    Ok(RotationTable {
        n_clock,
        entries: map.into_values().collect(),
    })
}

/// Rotation table of a spectrum, with the scale taken from the spectrum
/// itself.
pub fn build_rotation_table(
    spectrum: &Spectrum,
    n_clock: usize,
    c_p: f64,
) -> Result<RotationTable> {
    let scale = lambda_scale_of(spectrum.eigenvalues())?;
    build_rotation_table_from_values(spectrum.eigenvalues(), scale, n_clock, c_p)
}

/// Largest eigenvalue magnitude; the normalization used by times, phases
/// and binning.
fn lambda_scale_of(values: &[f64]) -> Result<f64> {
    let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale > 0.0 {
        Ok(scale)
    } else {
        Err(Error::NoPositiveEigenvalue)
    }
}

/// Exact phase-estimation amplitudes
/// `alpha_k = (1/2^n) sum_y exp(2 pi i y (phi - k / 2^n))`
/// evaluated as a geometric sum.
pub fn qpe_kernel(phase: f64, n_clock: usize) -> Vec<Complex64> {
    let n = 1usize << n_clock;
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let delta = phase - k as f64 / nf;
            let d = delta - delta.round();
            if d == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                let num = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, 2.0 * PI * nf * d);
                let den = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, 2.0 * PI * d);
                num / den / nf
            }
        })
        .collect()
}

/// `|alpha_{k}|^2` for one clock value (Dirichlet kernel squared).
pub fn kernel_weight(phase: f64, clock_index: usize, n_clock: usize) -> f64 {
    let nf = (1usize << n_clock) as f64;
    let delta = phase - clock_index as f64 / nf;
    let d = delta - delta.round();
    if d == 0.0 {
        1.0
    } else {
        let num = (PI * nf * d).sin();
        let den = nf * (PI * d).sin();
        (num / den) * (num / den)
    }
}

/// `1 - |<a|b>|^2` for unit-norm real states.
pub fn fidelity_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "state dimensions differ");
    let overlap: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    1.0 - overlap * overlap
}

/// Register widths of an emulated run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitCounts {
    pub clock: usize,
    pub system: usize,
    pub ancilla: usize,
}

/// Post-selected output of one run.
#[derive(Debug, Clone)]
pub struct HhlResult {
    /// Normalized state conditioned on ancilla = 1, clock = 0...0.
    pub solution_state: Vec<f64>,
    /// `1 - |<x_exact | solution>|^2`.
    pub fidelity_error: f64,
    /// Probability of measuring the ancilla in 1.
    pub p_ancilla: f64,
    /// Probability of ancilla = 1 and clock = 0...0.
    pub p_success: f64,
    /// Spectrum scale used for times, phases and binning.
    pub lambda_max_used: f64,
    pub rotation_table: RotationTable,
    pub qubit_counts: QubitCounts,
}

/// Run the analytic pipeline on a Hermitian embedding. `rhs` is the full
/// embedded right-hand side (length `embedding.dim()`); the fidelity
/// reference is the exact forward-substitution solution.
pub fn run_hhl(
    embedding: &HermitianEmbedding,
    rhs: &[f64],
    spectrum: &Spectrum,
    config: &HhlConfig,
) -> Result<HhlResult> {
    let decomp = SpectralDecomposition::of_embedding(embedding);
    run_hhl_with_decomposition(embedding, &decomp, rhs, spectrum, config)
}

/// Same as [`run_hhl`] with a precomputed decomposition (sweeps reuse the
/// expensive factorization).
pub fn run_hhl_with_decomposition(
    embedding: &HermitianEmbedding,
    decomp: &SpectralDecomposition,
    rhs: &[f64],
    spectrum: &Spectrum,
    config: &HhlConfig,
) -> Result<HhlResult> {
    let x_exact = embedding.solve_embedded(rhs);
    let scale = lambda_scale_of(spectrum.eigenvalues())?;
    let table = build_rotation_table_from_values(
        spectrum.eigenvalues(),
        scale,
        config.n_clock,
        config.c_p,
    )?;
    analytic_run(decomp, rhs, &x_exact, scale, table, config)
}

/// Analytic pipeline on an arbitrary real symmetric matrix; the rotation
/// table is built from the matrix's own spectrum.
pub fn run_hhl_dense(a: &Array2<f64>, rhs: &[f64], config: &HhlConfig) -> Result<HhlResult> {
    let decomp = SpectralDecomposition::from_symmetric(a);
    let x_exact = crate::linalg::symmetric_solve(a, rhs);
    let values = decomp.sorted_eigenvalues();
    let scale = lambda_scale_of(&values)?;
    let table = build_rotation_table_from_values(&values, scale, config.n_clock, config.c_p)?;
    analytic_run(&decomp, rhs, &x_exact, scale, table, config)
}

/// Closed-form evaluation of the pipeline given the decomposition, the
/// exact solution and the rotation table.
pub(crate) fn analytic_run(
    decomp: &SpectralDecomposition,
    rhs: &[f64],
    x_exact: &[f64],
    lambda_scale: f64,
    table: RotationTable,
    config: &HhlConfig,
) -> Result<HhlResult> {
    let b = normalized(rhs).ok_or(Error::ZeroRhs)?;
    let lambdas = decomp.eigenvalues();
    let betas = decomp.betas(&b);

    // Eigenvalues repeat heavily (padding, symmetric pairs); memoize the
    // kernel sums per distinct value.
    let mut weight_cache: HashMap<u64, (f64, f64)> = HashMap::new();
    let mut coeffs = vec![0.0; lambdas.len()];
    let mut p_ancilla = 0.0;
    let mut p_success = 0.0;
    for (j, (&lambda, &beta)) in lambdas.iter().zip(&betas).enumerate() {
        let (w_sin, w_sin2) = *weight_cache.entry(lambda.to_bits()).or_insert_with(|| {
            let phase = (lambda / (4.0 * lambda_scale)).rem_euclid(1.0);
            let mut w_sin = 0.0;
            let mut w_sin2 = 0.0;
            for entry in table.entries() {
                let q = kernel_weight(phase, entry.clock_index, config.n_clock);
                let s = entry.theta.sin();
                w_sin += q * s;
                w_sin2 += q * s * s;
            }
            (w_sin, w_sin2)
        });
        coeffs[j] = beta * w_sin;
        p_success += coeffs[j] * coeffs[j];
        p_ancilla += beta * beta * w_sin2;
    }

    if !(p_success > 0.0) {
        return Err(Error::PostSelectionImpossible);
    }
    let mut solution = decomp.reconstruct(&coeffs);
    let norm = normalize_in_place(&mut solution);
    debug_assert!((norm * norm - p_success).abs() < 1e-9 * p_success.max(1e-300));

    let x_ref = normalized(x_exact).expect("exact solution must be nonzero");
    Ok(HhlResult {
        fidelity_error: fidelity_error(&x_ref, &solution),
        solution_state: solution,
        p_ancilla,
        p_success,
        lambda_max_used: lambda_scale,
        rotation_table: table,
        qubit_counts: QubitCounts {
            clock: config.n_clock,
            system: ceil_log2_usize(decomp.dim()),
            ancilla: 1,
        },
    })
}

/// Brute-force oracle on a Hermitian embedding: identical result shape,
/// computed by explicit unitaries on the full composite register.
pub fn brute_force_oracle(
    embedding: &HermitianEmbedding,
    rhs: &[f64],
    spectrum: &Spectrum,
    config: &HhlConfig,
) -> Result<HhlResult> {
    let decomp = SpectralDecomposition::of_embedding(embedding);
    brute_force_with_decomposition(embedding, &decomp, rhs, spectrum, config)
}

pub fn brute_force_with_decomposition(
    embedding: &HermitianEmbedding,
    decomp: &SpectralDecomposition,
    rhs: &[f64],
    spectrum: &Spectrum,
    config: &HhlConfig,
) -> Result<HhlResult> {
    let x_exact = embedding.solve_embedded(rhs);
    let scale = lambda_scale_of(spectrum.eigenvalues())?;
    let table = build_rotation_table_from_values(
        spectrum.eigenvalues(),
        scale,
        config.n_clock,
        config.c_p,
    )?;
    oracle_run(decomp, rhs, &x_exact, scale, table, config)
}

/// Brute-force oracle on an arbitrary real symmetric matrix.
pub fn brute_force_oracle_dense(
    a: &Array2<f64>,
    rhs: &[f64],
    config: &HhlConfig,
) -> Result<HhlResult> {
    let decomp = SpectralDecomposition::from_symmetric(a);
    let x_exact = crate::linalg::symmetric_solve(a, rhs);
    let values = decomp.sorted_eigenvalues();
    let scale = lambda_scale_of(&values)?;
    let table = build_rotation_table_from_values(&values, scale, config.n_clock, config.c_p)?;
    oracle_run(&decomp, rhs, &x_exact, scale, table, config)
}

/// Full-register emulation. The system register is held in the eigenbasis
/// (the basis change commutes with every clock/ancilla operation), which
/// keeps the controlled evolutions diagonal without changing any
/// measured quantity.
pub(crate) fn oracle_run(
    decomp: &SpectralDecomposition,
    rhs: &[f64],
    x_exact: &[f64],
    lambda_scale: f64,
    table: RotationTable,
    config: &HhlConfig,
) -> Result<HhlResult> {
    let n_clock = config.n_clock;
    let n_clk = 1usize << n_clock;
    let n_sys = decomp.dim();
    let total = 2 * n_clk * n_sys;
    if total > ORACLE_DIMENSION_CAP {
        return Err(Error::DimensionCap {
            dim: total,
            cap: ORACLE_DIMENSION_CAP,
        });
    }

    let b = normalized(rhs).ok_or(Error::ZeroRhs)?;
    let betas = decomp.betas(&b);
    let lambdas = decomp.eigenvalues();

    // state[(anc * n_clk + k) * n_sys + s]
    let idx = |anc: usize, k: usize, s: usize| (anc * n_clk + k) * n_sys + s;
    let mut state = vec![Complex64::new(0.0, 0.0); total];
    for (s, &beta) in betas.iter().enumerate() {
        state[idx(0, 0, s)] = Complex64::new(beta, 0.0);
    }

    let times = evolution_times(n_clock, lambda_scale);

    hadamard_clock(&mut state, n_clk, n_sys);
    controlled_phases(&mut state, n_clk, n_sys, &times, &lambdas, 1.0);
    fourier_clock(&mut state, n_clk, n_sys, -1.0);

    // per-clock-value ancilla rotations
    let mut sin_t = vec![0.0f64; n_clk];
    let mut cos_t = vec![1.0f64; n_clk];
    for entry in table.entries() {
        sin_t[entry.clock_index] = entry.theta.sin();
        cos_t[entry.clock_index] = entry.theta.cos();
    }
    for k in 0..n_clk {
        if sin_t[k] == 0.0 {
            continue;
        }
        for s in 0..n_sys {
            let a0 = state[idx(0, k, s)];
            let a1 = state[idx(1, k, s)];
            state[idx(0, k, s)] = cos_t[k] * a0 - sin_t[k] * a1;
            state[idx(1, k, s)] = sin_t[k] * a0 + cos_t[k] * a1;
        }
    }

    // inverse phase estimation
    fourier_clock(&mut state, n_clk, n_sys, 1.0);
    controlled_phases(&mut state, n_clk, n_sys, &times, &lambdas, -1.0);
    hadamard_clock(&mut state, n_clk, n_sys);

    let mut p_ancilla = 0.0;
    for k in 0..n_clk {
        for s in 0..n_sys {
            p_ancilla += state[idx(1, k, s)].norm_sqr();
        }
    }
    let mut p_success = 0.0;
    let mut post = vec![0.0f64; n_sys];
    let mut imag_residual: f64 = 0.0;
    for s in 0..n_sys {
        let amp = state[idx(1, 0, s)];
        p_success += amp.norm_sqr();
        post[s] = amp.re;
        imag_residual = imag_residual.max(amp.im.abs());
    }
    if !(p_success > 0.0) {
        return Err(Error::PostSelectionImpossible);
    }
    debug_assert!(
        imag_residual < 1e-8,
        "post-selected state acquired an imaginary part: {imag_residual}"
    );

    let mut solution = decomp.reconstruct(&post);
    normalize_in_place(&mut solution);
    let x_ref = normalized(x_exact).expect("exact solution must be nonzero");
    Ok(HhlResult {
        fidelity_error: fidelity_error(&x_ref, &solution),
        solution_state: solution,
        p_ancilla,
        p_success,
        lambda_max_used: lambda_scale,
        rotation_table: table,
        qubit_counts: QubitCounts {
            clock: config.n_clock,
            system: ceil_log2_usize(decomp.dim()),
            ancilla: 1,
        },
    })
}

fn hadamard_clock(state: &mut [Complex64], n_clk: usize, n_sys: usize) {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut bit = 1usize;
    while bit < n_clk {
        for anc in 0..2 {
            for k in 0..n_clk {
                if k & bit != 0 {
                    continue;
                }
                let k1 = k | bit;
                for s in 0..n_sys {
                    let i0 = (anc * n_clk + k) * n_sys + s;
                    let i1 = (anc * n_clk + k1) * n_sys + s;
                    let x = state[i0];
                    let y = state[i1];
                    state[i0] = (x + y) * inv_sqrt2;
                    state[i1] = (x - y) * inv_sqrt2;
                }
            }
        }
        bit <<= 1;
    }
}

/// Apply `exp(i sign t_b A)` controlled on clock qubit `b`, for every
/// clock qubit, with the system register in the eigenbasis.
fn controlled_phases(
    state: &mut [Complex64],
    n_clk: usize,
    n_sys: usize,
    times: &[f64],
    lambdas: &[f64],
    sign: f64,
) {
    for (b, &t) in times.iter().enumerate() {
        let bit = 1usize << b;
        let phases: Vec<Complex64> = lambdas
            .iter()
            .map(|&l| Complex64::from_polar(1.0, sign * t * l))
            .collect();
        for anc in 0..2 {
            for k in 0..n_clk {
                if k & bit == 0 {
                    continue;
                }
                let base = (anc * n_clk + k) * n_sys;
                for s in 0..n_sys {
                    state[base + s] *= phases[s];
                }
            }
        }
    }
}

/// Discrete Fourier transform on the clock register;
/// `out[k] = (1/sqrt(N)) sum_y exp(sign 2 pi i k y / N) in[y]`.
fn fourier_clock(state: &mut [Complex64], n_clk: usize, n_sys: usize, sign: f64) {
    let nf = n_clk as f64;
    let scale = 1.0 / nf.sqrt();
    let roots: Vec<Complex64> = (0..n_clk)
        .map(|j| Complex64::from_polar(1.0, sign * 2.0 * PI * j as f64 / nf))
        .collect();
    let mut column = vec![Complex64::new(0.0, 0.0); n_clk];
    for anc in 0..2 {
        for s in 0..n_sys {
            for k in 0..n_clk {
                column[k] = state[(anc * n_clk + k) * n_sys + s];
            }
            for k in 0..n_clk {
                let mut acc = Complex64::new(0.0, 0.0);
                for (y, &c) in column.iter().enumerate() {
                    acc += roots[(k * y) % n_clk] * c;
                }
                state[(anc * n_clk + k) * n_sys + s] = acc * scale;
            }
        }
    }
}

/// Per-time-block fidelity errors of a solution state against the exact
/// embedded solution: block `t` holds the state after `t` evolution
/// steps, and each block is compared after normalization.
pub fn block_fidelity_errors(
    embedding: &HermitianEmbedding,
    solution: &[f64],
    x_exact: &[f64],
) -> Vec<f64> {
    assert_eq!(solution.len(), embedding.dim());
    assert_eq!(x_exact.len(), embedding.dim());
    let d = embedding.block_dim();
    (0..=embedding.n_steps())
        .map(|block| {
            let lo = block * d;
            let exact = &x_exact[lo..lo + d];
            let sol = &solution[lo..lo + d];
            let en: f64 = exact.iter().map(|v| v * v).sum();
            let sn: f64 = sol.iter().map(|v| v * v).sum();
            if en == 0.0 || sn == 0.0 {
                return 1.0;
            }
            let dot: f64 = exact.iter().zip(sol).map(|(a, b)| a * b).sum();
            1.0 - dot * dot / (en * sn)
        })
        .collect()
}

fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    Some(v.iter().map(|x| x / norm).collect())
}

fn normalize_in_place(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(norm > 0.0, "cannot normalize the zero vector");
    for x in v.iter_mut() {
        *x /= norm;
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbm::Boundary;
    use crate::spectra::{SpectrumDescriptor, SpectrumKind};
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    fn toy_spectrum(values: &[f64]) -> Spectrum {
        Spectrum::new(
            values.to_vec(),
            SpectrumDescriptor {
                nx: 4,
                ny: 4,
                boundary: Boundary::BounceBack,
                omega: 1.1,
                n_steps: 1,
                kind: SpectrumKind::Exact,
            },
        )
    }

    #[test]
    fn clock_minimum_examples() {
        let flat = toy_spectrum(&[-2.0, 2.0]);
        assert_eq!(clock_minimum(&flat).unwrap(), 1);

        let s = toy_spectrum(&[-3.5, -0.5, 0.5, 3.5]);
        assert_eq!(clock_minimum(&s).unwrap(), 3); // ceil(log2(7)) = 3

        let p = toy_spectrum(&[-4.0, -0.5, 0.5, 4.0]);
        assert_eq!(clock_minimum(&p).unwrap(), 3); // exact power of two

        let none = toy_spectrum(&[-1.0, -2.0]);
        assert!(clock_minimum(&none).is_err());
    }

    #[test]
    fn evolution_times_examples() {
        let t = evolution_times(3, 1.0);
        assert_abs_diff_eq!(t[0], PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t[1] / t[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t[2], 2.0 * PI, epsilon = 1e-15);

        let t = evolution_times(1, 2.0);
        assert_abs_diff_eq!(t[0], PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn binary_eigenvalue_examples() {
        let be = binary_eigenvalue(3.0, 3.0, 7).unwrap();
        assert_eq!(be.lambda_bar, 32);
        assert_eq!(be.clock_index, 32);

        let be = binary_eigenvalue(-3.0, 3.0, 7).unwrap();
        assert_eq!(be.lambda_bar, -32);
        assert_eq!(be.clock_index, 96);

        let be = binary_eigenvalue(1.0, 1.0, 2).unwrap();
        assert_eq!(be.lambda_bar, 1);
        assert_eq!(be.clock_index, 1);

        assert!(matches!(
            binary_eigenvalue(0.001, 1.0, 3),
            Err(Error::InsufficientClockResolution { .. })
        ));
        assert!(matches!(
            binary_eigenvalue(2.0, 1.0, 3),
            Err(Error::EigenvalueOutOfRange { .. })
        ));
    }

    #[test]
    fn table_skips_unrepresentable_values_above_the_clock_floor() {
        // ratio 5 needs 3 clock qubits; at that width 0.4 still rounds
        // to zero and gets no rotation, while anything below the floor
        // is rejected outright
        let values = [-2.0, -0.4, 0.4, 2.0];
        let table = build_rotation_table_from_values(&values, 2.0, 3, 1.0).unwrap();
        let ks: Vec<usize> = table.entries().iter().map(|e| e.clock_index).collect();
        assert_eq!(ks, vec![2, 6]);
        assert!(matches!(
            build_rotation_table_from_values(&values, 2.0, 2, 1.0),
            Err(Error::InsufficientClockResolution { .. })
        ));
    }

    #[test]
    fn rotation_angle_examples() {
        assert_abs_diff_eq!(rotation_angle(1, 1.0).unwrap(), PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rotation_angle(2, 1.0).unwrap(), PI / 6.0, epsilon = 1e-15);
        assert!(rotation_angle(-2, 1.0).unwrap() < 0.0);
        assert!(matches!(
            rotation_angle(1, 2.0),
            Err(Error::RotationUndefined { .. })
        ));
    }

    #[test]
    fn qpe_kernel_is_delta_on_grid_phases() {
        let alpha = qpe_kernel(3.0 / 8.0, 3);
        for (k, a) in alpha.iter().enumerate() {
            let expected = if k == 3 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(a.norm(), expected, epsilon = 1e-12);
        }
        let alpha0 = qpe_kernel(0.0, 3);
        assert_abs_diff_eq!(alpha0[0].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn qpe_kernel_matches_direct_sum_and_dirichlet() {
        let n_clock = 4;
        let n = 1usize << n_clock;
        let phase = (2.0 + 0.5) / n as f64; // midway between bins
        let alpha = qpe_kernel(phase, n_clock);
        for (k, a) in alpha.iter().enumerate() {
            // direct summation
            let mut acc = Complex64::new(0.0, 0.0);
            for y in 0..n {
                acc +=
                    Complex64::from_polar(1.0, 2.0 * PI * y as f64 * (phase - k as f64 / n as f64));
            }
            acc /= n as f64;
            assert_abs_diff_eq!(a.re, acc.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, acc.im, epsilon = 1e-12);
            // Dirichlet magnitude
            assert_abs_diff_eq!(
                a.norm_sqr(),
                kernel_weight(phase, k, n_clock),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn fidelity_error_examples() {
        let a = [1.0, 0.0];
        let b = [0.0, 1.0];
        assert_eq!(fidelity_error(&a, &a), 0.0);
        assert_eq!(fidelity_error(&a, &b), 1.0);
        let c = [0.6, 0.8];
        assert_abs_diff_eq!(fidelity_error(&a, &c), 1.0 - 0.36, epsilon = 1e-15);
    }

    #[test]
    fn diagonal_two_level_example() {
        // A = diag(1, 2), b = (1, 1)/sqrt(2), n_c = 3, c_p = 1: both
        // eigenvalues exactly representable, eps = 0, p = 1/2 (1 + 1/4)
        let a = array![[1.0, 0.0], [0.0, 2.0]];
        let b = [std::f64::consts::FRAC_1_SQRT_2; 2];
        let config = HhlConfig::new(3, 1.0);
        let r = run_hhl_dense(&a, &b, &config).unwrap();
        assert!(r.fidelity_error < 1e-12);
        assert_abs_diff_eq!(r.p_success, 0.625, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_ancilla, 0.625, epsilon = 1e-12);
        assert_eq!(r.qubit_counts.clock, 3);
        assert_eq!(r.qubit_counts.system, 1);
        assert_eq!(r.qubit_counts.ancilla, 1);
        // solution proportional to (1, 1/2)
        let expected = normalized(&[1.0, 0.5]).unwrap();
        assert!(fidelity_error(&expected, &r.solution_state) < 1e-12);
    }

    #[test]
    fn uniform_spectrum_collapses_pipeline() {
        let a = array![[2.0, 0.0], [0.0, 2.0]];
        let b = normalized(&[0.3, 0.4]).unwrap();
        let config = HhlConfig::new(2, 1.0);
        let r = run_hhl_dense(&a, &b, &config).unwrap();
        let entry = r.rotation_table.entries()[0];
        assert_eq!(entry.lambda_bar, 1);
        assert_abs_diff_eq!(entry.theta, PI / 2.0, epsilon = 1e-15);
        assert!(r.fidelity_error < 1e-12);
        assert_abs_diff_eq!(r.p_success, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn oracle_matches_analytic_on_examples() {
        let a = array![[1.0, 0.0], [0.0, 2.0]];
        let b = [std::f64::consts::FRAC_1_SQRT_2; 2];
        let config = HhlConfig::new(3, 1.0);
        let r = run_hhl_dense(&a, &b, &config).unwrap();
        let o = brute_force_oracle_dense(&a, &b, &config).unwrap();
        assert!((r.fidelity_error - o.fidelity_error).abs() < 1e-10);
        assert!((r.p_success - o.p_success).abs() < 1e-10);
        assert!((r.p_ancilla - o.p_ancilla).abs() < 1e-10);
        assert!(fidelity_error(&r.solution_state, &o.solution_state) < 1e-10);

        // n_c = 1, A = I
        let eye = array![[1.0, 0.0], [0.0, 1.0]];
        let config1 = HhlConfig::new(1, 1.0);
        let r = run_hhl_dense(&eye, &b, &config1).unwrap();
        let o = brute_force_oracle_dense(&eye, &b, &config1).unwrap();
        assert!((r.p_success - o.p_success).abs() < 1e-12);
        assert!(r.fidelity_error < 1e-12 && o.fidelity_error < 1e-12);
    }

    fn lcg_matrix(n: usize, seed: u64) -> Array2<f64> {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(11);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let v = next();
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        // keep it comfortably nonsingular
        for i in 0..n {
            a[(i, i)] += if a[(i, i)] >= 0.0 { 1.0 } else { -1.0 };
        }
        a
    }

    #[test]
    fn oracle_matches_analytic_on_random_instance() {
        let a = lcg_matrix(4, 7);
        let b = normalized(&[0.2, -0.5, 0.8, 0.1]).unwrap();
        let config = HhlConfig::new(3, 1.0);
        let r = run_hhl_dense(&a, &b, &config).unwrap();
        let o = brute_force_oracle_dense(&a, &b, &config).unwrap();
        assert!((r.fidelity_error - o.fidelity_error).abs() < 1e-10);
        assert!((r.p_success - o.p_success).abs() < 1e-10);
        assert!((r.p_ancilla - o.p_ancilla).abs() < 1e-10);
        assert!(fidelity_error(&r.solution_state, &o.solution_state) < 1e-10);
    }

    #[test]
    fn exact_representability_gives_exact_solution() {
        // eigenvalues at lambda_bar * 4 lambda_max / 2^n with the largest
        // at 2^(n-2): every phase sits on the clock grid
        let n_clock = 4;
        let a = array![[4.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, -3.0],];
        let b = normalized(&[0.5, 1.0, -0.25]).unwrap();
        let config = HhlConfig::new(n_clock, 1.0);
        let r = run_hhl_dense(&a, &b, &config).unwrap();
        assert!(r.fidelity_error < 1e-12, "eps = {}", r.fidelity_error);
        // p_success <= p_ancilla <= 1
        assert!(r.p_success <= r.p_ancilla + 1e-15);
        assert!(r.p_ancilla <= 1.0 + 1e-15);
    }

    #[test]
    fn c_p_scaling_is_quadratic_with_invariant_state() {
        let a = lcg_matrix(5, 23);
        let b = normalized(&[1.0, 0.3, -0.2, 0.7, 0.05]).unwrap();
        let base = run_hhl_dense(&a, &b, &HhlConfig::new(4, 1.0)).unwrap();
        for c_p in [0.25, 0.5, 0.75] {
            let r = run_hhl_dense(&a, &b, &HhlConfig::new(4, c_p)).unwrap();
            assert_abs_diff_eq!(r.p_success / base.p_success, c_p * c_p, epsilon = 1e-12);
            assert!(fidelity_error(&r.solution_state, &base.solution_state) < 1e-10);
            assert_abs_diff_eq!(r.fidelity_error, base.fidelity_error, epsilon = 1e-10);
        }
    }

    #[test]
    fn c_p_too_large_for_unit_binary_eigenvalue() {
        // smallest binary eigenvalue is 1, so c_p > 1 has no angle
        let a = array![[1.0, 0.0], [0.0, 4.0]];
        let b = normalized(&[1.0, 1.0]).unwrap();
        let err = run_hhl_dense(&a, &b, &HhlConfig::new(4, 1.5)).unwrap_err();
        assert!(matches!(err, Error::RotationUndefined { .. }));
    }

    #[test]
    fn empty_table_makes_post_selection_impossible() {
        let a = array![[1.0, 0.0], [0.0, 2.0]];
        let decomp = SpectralDecomposition::from_symmetric(&a);
        let x = crate::linalg::symmetric_solve(&a, &[1.0, 1.0]);
        let err = analytic_run(
            &decomp,
            &[1.0, 1.0],
            &x,
            2.0,
            RotationTable::empty(3),
            &HhlConfig::new(3, 1.0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::PostSelectionImpossible));
    }

    #[test]
    fn zero_rhs_is_rejected() {
        let a = array![[1.0, 0.0], [0.0, 2.0]];
        assert!(matches!(
            run_hhl_dense(&a, &[0.0, 0.0], &HhlConfig::new(3, 1.0)),
            Err(Error::ZeroRhs)
        ));
    }

    proptest! {
        #[test]
        fn kernel_normalization(phase in 0.0f64..1.0) {
            for n_clock in 1..=5usize {
                let total: f64 = qpe_kernel(phase, n_clock)
                    .iter()
                    .map(|a| a.norm_sqr())
                    .sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn success_probability_bounded_by_ancilla(seed in 0u64..50) {
            let a = lcg_matrix(4, seed);
            let b = normalized(&[0.4, -0.1, 0.9, 0.2]).unwrap();
            let r = match run_hhl_dense(&a, &b, &HhlConfig::new(3, 0.5)) {
                Ok(r) => r,
                // a random spectrum may be too wide for 3 clock qubits
                Err(Error::InsufficientClockResolution { .. }) => return Ok(()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            prop_assert!(r.p_success <= r.p_ancilla + 1e-14);
            prop_assert!(r.p_ancilla <= 1.0 + 1e-14);
            prop_assert!(r.fidelity_error >= -1e-14 && r.fidelity_error <= 1.0 + 1e-14);
            let norm: f64 = r.solution_state.iter().map(|x| x * x).sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }
    }
}
