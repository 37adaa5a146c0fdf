//! Multi-time-step block system and its Hermitian embedding.
//!
//! Evolving `phi(t+1) = C phi(t)` for `N_t` steps is written as one linear
//! system `Ã x = b` with
//!
//! ```text
//! Ã = [  I          ]      b = [ phi_0 ]      x = [ phi(t_0)      ]
//!     [ -C   I      ]          [ 0     ]          [ phi(t_0 + 1)  ]
//!     [     -C   I  ]          [ ...   ]          [ ...           ]
//! ```
//!
//! `Ã` is unit lower triangular, so the exact solution is a forward
//! substitution (`N_t` sparse mat-vecs). The Hermitian system handed to
//! the quantum solver is `A = [[0, Ãᵀ], [Ã, 0]]` with `Ã` first padded to
//! the next power-of-two half dimension by an identity block; padded rows
//! of the right-hand side are zero, so the padding carries no amplitude.

use ndarray::{Array1, Array2};
use std::io::{BufWriter, Write};

use crate::linalg;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Block unit-lower-bidiagonal matrix over `n_steps + 1` time blocks.
pub fn assemble_tilde_a(c: &CsrMatrix, n_steps: usize) -> CsrMatrix {
    assert_eq!(c.nrows(), c.ncols(), "carleman matrix must be square");
    assert!(n_steps >= 1, "at least one time step");
    let d = c.nrows();
    let dim = (n_steps + 1) * d;
    let mut triplets = Vec::with_capacity(dim + n_steps * c.nnz());
    for k in 0..dim {
        triplets.push((k, k, 1.0));
    }
    for block in 0..n_steps {
        let row0 = (block + 1) * d;
        let col0 = block * d;
        for r in 0..d {
            let (cols, vals) = c.row(r);
            for (&cc, &v) in cols.iter().zip(vals) {
                triplets.push((row0 + r, col0 + cc, -v));
            }
        }
    }
    CsrMatrix::from_triplets(dim, dim, triplets)
}

/// Right-hand side `(phi_0, 0, ..., 0)`.
pub fn assemble_b(phi0: &[f64], n_steps: usize) -> Vec<f64> {
    let d = phi0.len();
    let mut b = vec![0.0; (n_steps + 1) * d];
    b[..d].copy_from_slice(phi0);
    b
}

/// The assembled system together with the operator that generated it.
#[derive(Debug, Clone)]
pub struct TimeBlockSystem {
    block_dim: usize,
    n_steps: usize,
    carleman: CsrMatrix,
    tilde_a: CsrMatrix,
    rhs: Vec<f64>,
}

impl TimeBlockSystem {
    pub fn assemble(c: &CsrMatrix, phi0: &[f64], n_steps: usize) -> Result<Self> {
        if phi0.len() != c.nrows() {
            return Err(Error::ShapeMismatch {
                context: "TimeBlockSystem::assemble",
                expected: c.nrows(),
                actual: phi0.len(),
            });
        }
        Ok(TimeBlockSystem {
            block_dim: c.nrows(),
            n_steps,
            carleman: c.clone(),
            tilde_a: assemble_tilde_a(c, n_steps),
            rhs: assemble_b(phi0, n_steps),
        })
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn tilde_a(&self) -> &CsrMatrix {
        &self.tilde_a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn dim(&self) -> usize {
        (self.n_steps + 1) * self.block_dim
    }
}

/// Exact solution by forward recursion: block `k` of `x` is `C^k phi_0`.
pub fn classical_solve(system: &TimeBlockSystem) -> Vec<f64> {
    let d = system.block_dim;
    let mut x = vec![0.0; system.dim()];
    let mut current = system.rhs[..d].to_vec();
    x[..d].copy_from_slice(&current);
    for block in 1..=system.n_steps {
        current = system.carleman.matvec(&current);
        x[block * d..(block + 1) * d].copy_from_slice(&current);
    }
    x
}

/// Hermitian power-of-two embedding of a time-block system.
#[derive(Debug, Clone)]
pub struct HermitianEmbedding {
    /// Unpadded dimension of `Ã`.
    orig_dim: usize,
    /// Padded half dimension; `A` is `2 * half_dim` square.
    half_dim: usize,
    block_dim: usize,
    n_steps: usize,
    /// `Ã` with an identity block appended up to `half_dim`.
    a_tilde_padded: CsrMatrix,
    /// `(0, b, 0-padding)`, length `2 * half_dim`.
    rhs_embedded: Vec<f64>,
    /// System qubit count `ceil(log2(2 (N_t + 1) d))`.
    n_system_qubits: usize,
    /// Total dimensions added by padding.
    padding_dim: usize,
}

/// Embed `Ã x = b` as the symmetric system `A (x, 0) = (0, b)` and pad to
/// the next power of two with an identity diagonal.
pub fn hermitize_and_pad(system: &TimeBlockSystem) -> HermitianEmbedding {
    let m = system.dim();
    let n_system_qubits = ceil_log2(2 * m);
    let half_dim = 1usize << (n_system_qubits - 1);
    let mut triplets = Vec::with_capacity(system.tilde_a.nnz() + (half_dim - m));
    for r in 0..m {
        let (cols, vals) = system.tilde_a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            triplets.push((r, c, v));
        }
    }
    for k in m..half_dim {
        triplets.push((k, k, 1.0));
    }
    let a_tilde_padded = CsrMatrix::from_triplets(half_dim, half_dim, triplets);
    let mut rhs_embedded = vec![0.0; 2 * half_dim];
    rhs_embedded[half_dim..half_dim + m].copy_from_slice(&system.rhs);
    HermitianEmbedding {
        orig_dim: m,
        half_dim,
        block_dim: system.block_dim,
        n_steps: system.n_steps,
        a_tilde_padded,
        rhs_embedded,
        n_system_qubits,
        padding_dim: 2 * (half_dim - m),
    }
}

fn ceil_log2(n: usize) -> usize {
    assert!(n >= 1);
    n.next_power_of_two().trailing_zeros() as usize
}

impl HermitianEmbedding {
    /// Dimension of `A`.
    pub fn dim(&self) -> usize {
        2 * self.half_dim
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn orig_dim(&self) -> usize {
        self.orig_dim
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_system_qubits(&self) -> usize {
        self.n_system_qubits
    }

    pub fn padding_dim(&self) -> usize {
        self.padding_dim
    }

    pub fn a_tilde_padded(&self) -> &CsrMatrix {
        &self.a_tilde_padded
    }

    pub fn rhs_embedded(&self) -> &[f64] {
        &self.rhs_embedded
    }

    /// Embed a fresh initial block as `(0, phi_0, 0, ..., 0)`.
    pub fn embed_rhs(&self, phi0: &[f64]) -> Vec<f64> {
        assert_eq!(phi0.len(), self.block_dim, "initial block dimension");
        let mut rhs = vec![0.0; self.dim()];
        rhs[self.half_dim..self.half_dim + self.block_dim].copy_from_slice(phi0);
        rhs
    }

    /// Materialize `A = [[0, Ãᵀ], [Ã, 0]]` (padded) as a sparse matrix.
    pub fn full_matrix(&self) -> CsrMatrix {
        let h = self.half_dim;
        let mut triplets = Vec::with_capacity(2 * self.a_tilde_padded.nnz());
        for r in 0..h {
            let (cols, vals) = self.a_tilde_padded.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                triplets.push((h + r, c, v)); // Ã block
                triplets.push((c, h + r, v)); // Ãᵀ block
            }
        }
        CsrMatrix::from_triplets(2 * h, 2 * h, triplets)
    }

    /// Exact solution of `A x̂ = rhs` using the triangular structure:
    /// with `rhs = (r1, r2)` the blocks are `x̂ = (Ã⁻¹ r2, Ã⁻ᵀ r1)`.
    pub fn solve_embedded(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.dim(), "embedded rhs dimension");
        let h = self.half_dim;
        let lower = unit_lower_solve(&self.a_tilde_padded, &rhs[h..]);
        let upper = unit_upper_solve_transposed(&self.a_tilde_padded, &rhs[..h]);
        let mut x = Vec::with_capacity(self.dim());
        x.extend_from_slice(&lower);
        x.extend_from_slice(&upper);
        x
    }
}

/// Forward substitution for a unit-lower-triangular CSR matrix.
pub fn unit_lower_solve(l: &CsrMatrix, b: &[f64]) -> Vec<f64> {
    assert_eq!(l.nrows(), b.len());
    let mut x = b.to_vec();
    for r in 0..l.nrows() {
        let (cols, vals) = l.row(r);
        let mut acc = b[r];
        for (&c, &v) in cols.iter().zip(vals) {
            if c < r {
                acc -= v * x[c];
            } else {
                debug_assert!(c == r && v == 1.0, "matrix must be unit lower triangular");
            }
        }
        x[r] = acc;
    }
    x
}

/// Solve `Lᵀ x = b` for unit-lower-triangular `L` (backward substitution
/// running over the rows of `L`).
fn unit_upper_solve_transposed(l: &CsrMatrix, b: &[f64]) -> Vec<f64> {
    assert_eq!(l.nrows(), b.len());
    let mut x = b.to_vec();
    for r in (0..l.nrows()).rev() {
        let xr = x[r];
        let (cols, vals) = l.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            if c < r {
                x[c] -= v * xr;
            }
        }
    }
    x
}

/// Eigendecomposition of an embedded (or generic symmetric) matrix.
///
/// For an embedding the eigenpairs come from the SVD of the padded `Ã`:
/// each singular triplet `(σ, u, v)` yields eigenpairs
/// `A (v, ±u)/√2 = ±σ (v, ±u)/√2`, and the identity padding contributes
/// `±1` pairs supported on the padded coordinates. This keeps the
/// spectrum symmetric about zero by construction.
pub enum SpectralDecomposition {
    Dense {
        /// Ascending.
        eigenvalues: Vec<f64>,
        /// Eigenvector `j` in row `j`.
        vectors_rows: Array2<f64>,
    },
    SplitSvd {
        /// Descending singular values of the unpadded `Ã`.
        sigma: Vec<f64>,
        /// Left singular vector `j` in row `j` (length `m`).
        u_rows: Array2<f64>,
        /// Right singular vector `j` in row `j` (length `m`).
        v_rows: Array2<f64>,
        /// Unpadded dimension.
        m: usize,
        /// Padded half dimension.
        half_dim: usize,
    },
}

impl SpectralDecomposition {
    pub fn of_embedding(embedding: &HermitianEmbedding) -> Self {
        // The padded block is diagonal, so only the unpadded Ã needs a
        // dense SVD.
        let m = embedding.orig_dim;
        let mut dense = Array2::zeros((m, m));
        for r in 0..m {
            let (cols, vals) = embedding.a_tilde_padded.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                dense[(r, c)] = v;
            }
        }
        let svd = linalg::singular_value_decomposition(&dense);
        SpectralDecomposition::SplitSvd {
            sigma: svd.sigma,
            u_rows: svd.u_rows,
            v_rows: svd.v_rows,
            m,
            half_dim: embedding.half_dim,
        }
    }

    pub fn from_symmetric(a: &Array2<f64>) -> Self {
        let (eigenvalues, vectors_rows) = linalg::symmetric_eigen(a);
        SpectralDecomposition::Dense {
            eigenvalues,
            vectors_rows,
        }
    }

    /// Dimension of the decomposed matrix.
    pub fn dim(&self) -> usize {
        match self {
            SpectralDecomposition::Dense { eigenvalues, .. } => eigenvalues.len(),
            SpectralDecomposition::SplitSvd { half_dim, .. } => 2 * half_dim,
        }
    }

    /// Eigenvalues in the internal component order used by `betas` and
    /// `reconstruct`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match self {
            SpectralDecomposition::Dense { eigenvalues, .. } => eigenvalues.clone(),
            SpectralDecomposition::SplitSvd {
                sigma, m, half_dim, ..
            } => {
                let mut vals = Vec::with_capacity(2 * half_dim);
                vals.extend_from_slice(sigma);
                vals.extend(std::iter::repeat_n(1.0, half_dim - m));
                vals.extend(sigma.iter().map(|s| -s));
                vals.extend(std::iter::repeat_n(-1.0, half_dim - m));
                vals
            }
        }
    }

    /// Eigenvalues sorted ascending.
    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let mut vals = self.eigenvalues();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals
    }

    /// Coefficients of `rhs` in the eigenbasis, aligned with
    /// [`Self::eigenvalues`].
    pub fn betas(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.dim(), "rhs dimension");
        match self {
            SpectralDecomposition::Dense { vectors_rows, .. } => {
                let r = Array1::from(rhs.to_vec());
                vectors_rows.dot(&r).to_vec()
            }
            SpectralDecomposition::SplitSvd {
                u_rows,
                v_rows,
                m,
                half_dim,
                ..
            } => {
                let (m, h) = (*m, *half_dim);
                let r1 = Array1::from(rhs[..m].to_vec());
                let r2 = Array1::from(rhs[h..h + m].to_vec());
                let p = v_rows.dot(&r1);
                let q = u_rows.dot(&r2);
                let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
                let mut betas = Vec::with_capacity(2 * h);
                for j in 0..m {
                    betas.push((p[j] + q[j]) * inv_sqrt2);
                }
                for k in m..h {
                    betas.push((rhs[k] + rhs[h + k]) * inv_sqrt2);
                }
                for j in 0..m {
                    betas.push((p[j] - q[j]) * inv_sqrt2);
                }
                for k in m..h {
                    betas.push((rhs[k] - rhs[h + k]) * inv_sqrt2);
                }
                betas
            }
        }
    }

    /// Assemble `sum_j coeffs[j] * eigenvector_j`.
    pub fn reconstruct(&self, coeffs: &[f64]) -> Vec<f64> {
        match self {
            SpectralDecomposition::Dense { vectors_rows, .. } => {
                let c = Array1::from(coeffs.to_vec());
                vectors_rows.t().dot(&c).to_vec()
            }
            SpectralDecomposition::SplitSvd {
                u_rows,
                v_rows,
                m,
                half_dim,
                ..
            } => {
                let (m, h) = (*m, *half_dim);
                assert_eq!(coeffs.len(), 2 * h, "coefficient count");
                let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
                let mut plus = Array1::zeros(m);
                let mut minus = Array1::zeros(m);
                for j in 0..m {
                    plus[j] = (coeffs[j] + coeffs[h + j]) * inv_sqrt2;
                    minus[j] = (coeffs[j] - coeffs[h + j]) * inv_sqrt2;
                }
                let top = v_rows.t().dot(&plus);
                let bottom = u_rows.t().dot(&minus);
                let mut out = vec![0.0; 2 * h];
                out[..m].copy_from_slice(top.as_slice().unwrap());
                out[h..h + m].copy_from_slice(bottom.as_slice().unwrap());
                for k in m..h {
                    out[k] = (coeffs[k] + coeffs[h + k]) * inv_sqrt2;
                    out[h + k] = (coeffs[k] - coeffs[h + k]) * inv_sqrt2;
                }
                out
            }
        }
    }
}

/// Write a sparse matrix in the text triplet format:
/// a `%` comment header, a `rows cols nnz` line, then one
/// `row col value` line per stored entry in row-major order.
pub fn write_triplets<W: Write>(matrix: &CsrMatrix, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "% qlbm sparse triplet format v1")?;
    writeln!(w, "{} {} {}", matrix.nrows(), matrix.ncols(), matrix.nnz())?;
    for r in 0..matrix.nrows() {
        let (cols, vals) = matrix.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            writeln!(w, "{} {} {}", r, c, v)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carleman::carleman_matrix_first;
    use crate::lbm::{init_kolmogorov, Boundary, LatticeGrid};
    use approx::assert_abs_diff_eq;

    fn small_system() -> (TimeBlockSystem, CsrMatrix) {
        let grid = LatticeGrid::new(2, 2, Boundary::BounceBack).unwrap();
        let c = carleman_matrix_first(&grid, 1.1).unwrap();
        let phi0 = init_kolmogorov(&grid, 0.2, 0.2, 1.0, 1.0).unwrap().values;
        let system = TimeBlockSystem::assemble(&c, &phi0, 3).unwrap();
        (system, c)
    }

    #[test]
    fn single_step_block_pattern() {
        let c = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 0.5), (0, 1, 0.25), (1, 0, -1.0)]);
        let a = assemble_tilde_a(&c, 1);
        // [[I, 0], [-C, I]]
        assert_eq!(a.get(0, 0), 1.0);
        assert_eq!(a.get(1, 1), 1.0);
        assert_eq!(a.get(2, 2), 1.0);
        assert_eq!(a.get(3, 3), 1.0);
        assert_eq!(a.get(2, 0), -0.5);
        assert_eq!(a.get(2, 1), -0.25);
        assert_eq!(a.get(3, 0), 1.0);
        assert_eq!(a.get(0, 2), 0.0);
    }

    #[test]
    fn tilde_a_nonzero_count() {
        let (system, c) = small_system();
        assert_eq!(system.tilde_a().nnz(), 4 * system.block_dim() + 3 * c.nnz());
    }

    #[test]
    fn tilde_a_is_unit_lower_triangular() {
        let (system, _) = small_system();
        let a = system.tilde_a();
        for r in 0..a.nrows() {
            let (cols, vals) = a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                assert!(c <= r, "upper entry at ({r}, {c})");
                if c == r {
                    assert_eq!(v, 1.0);
                }
            }
        }
        // unit triangular: product of singular values is |det| = 1
        let svd = linalg::singular_value_decomposition(&a.to_dense());
        let log_det: f64 = svd.sigma.iter().map(|s| s.ln()).sum();
        assert_abs_diff_eq!(log_det, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn rhs_carries_initial_block_only() {
        let phi0 = vec![1.0, -2.0, 0.5];
        let b = assemble_b(&phi0, 2);
        assert_eq!(&b[..3], &phi0[..]);
        assert!(b[3..].iter().all(|&v| v == 0.0));
        let norm_b: f64 = b.iter().map(|v| v * v).sum::<f64>();
        let norm_phi: f64 = phi0.iter().map(|v| v * v).sum::<f64>();
        assert_eq!(norm_b, norm_phi);
    }

    #[test]
    fn classical_solve_blocks_and_residual() {
        let (system, c) = small_system();
        let x = classical_solve(&system);
        let d = system.block_dim();
        assert_eq!(&x[..d], system.rhs()[..d].to_vec().as_slice());
        let block1 = c.matvec(&system.rhs()[..d]);
        assert_eq!(&x[d..2 * d], block1.as_slice());

        let ax = system.tilde_a().matvec(&x);
        let mut res = 0.0f64;
        let mut bnorm = 0.0f64;
        for k in 0..x.len() {
            res += (ax[k] - system.rhs()[k]).powi(2);
            bnorm += system.rhs()[k].powi(2);
        }
        assert!(res.sqrt() <= 1e-10 * bnorm.sqrt());
    }

    #[test]
    fn identity_system_has_unit_spectrum() {
        let c = CsrMatrix::from_triplets(3, 3, vec![]);
        let system = TimeBlockSystem::assemble(&c, &[1.0, 0.0, 0.0], 1).unwrap();
        let embedding = hermitize_and_pad(&system);
        let decomp = SpectralDecomposition::of_embedding(&embedding);
        for v in decomp.eigenvalues() {
            assert_abs_diff_eq!(v.abs(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn embedding_dimensions_and_padding() {
        let (system, _) = small_system();
        // d = 36, N_t = 3 -> m = 144, 2m = 288 -> n_b = 9, half = 256
        let e = hermitize_and_pad(&system);
        assert_eq!(e.orig_dim(), 144);
        assert_eq!(e.n_system_qubits(), 9);
        assert_eq!(e.half_dim(), 256);
        assert_eq!(e.dim(), 512);
        assert_eq!(e.padding_dim(), 2 * (256 - 144));
        // padded rows of the embedded rhs are zero
        let rhs = e.rhs_embedded();
        assert!(rhs[..256].iter().all(|&v| v == 0.0));
        assert!(rhs[256 + 144..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn full_matrix_is_symmetric_with_zero_diagonal_blocks() {
        let (system, _) = small_system();
        let e = hermitize_and_pad(&system);
        let a = e.full_matrix();
        let h = e.half_dim();
        for r in 0..a.nrows() {
            let (cols, vals) = a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                assert_eq!(a.get(c, r), v, "asymmetric at ({r}, {c})");
                let same_block = (r < h) == (c < h);
                assert!(!same_block, "entry inside a zero diagonal block");
            }
        }
    }

    #[test]
    fn embedded_solve_recovers_classical_solution() {
        let (system, _) = small_system();
        let e = hermitize_and_pad(&system);
        let xhat = e.solve_embedded(e.rhs_embedded());
        let x = classical_solve(&system);
        let m = e.orig_dim();
        for k in 0..m {
            assert_abs_diff_eq!(xhat[k], x[k], epsilon = 1e-10);
        }
        // padded block coordinates and the whole second block are zero
        assert!(xhat[m..e.half_dim()].iter().all(|&v| v.abs() < 1e-12));
        assert!(xhat[e.half_dim()..].iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn solve_checked_against_full_matrix() {
        let (system, _) = small_system();
        let e = hermitize_and_pad(&system);
        let xhat = e.solve_embedded(e.rhs_embedded());
        let ax = e.full_matrix().matvec(&xhat);
        for k in 0..ax.len() {
            assert_abs_diff_eq!(ax[k], e.rhs_embedded()[k], epsilon = 1e-9);
        }
    }

    #[test]
    fn split_decomposition_matches_dense_symmetric_solver() {
        let grid = LatticeGrid::new(2, 2, Boundary::Periodic).unwrap();
        let c = carleman_matrix_first(&grid, 1.3).unwrap();
        let phi0 = init_kolmogorov(&grid, 0.1, 0.2, 1.0, 1.0).unwrap().values;
        let system = TimeBlockSystem::assemble(&c, &phi0, 1).unwrap();
        let e = hermitize_and_pad(&system);
        let split = SpectralDecomposition::of_embedding(&e);
        let dense = SpectralDecomposition::from_symmetric(&e.full_matrix().to_dense());
        let a = split.sorted_eigenvalues();
        let b = dense.sorted_eigenvalues();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-9);
        }
    }

    #[test]
    fn spectrum_is_symmetric_in_pairs() {
        let (system, _) = small_system();
        let e = hermitize_and_pad(&system);
        let vals = SpectralDecomposition::of_embedding(&e).sorted_eigenvalues();
        let n = vals.len();
        for k in 0..n {
            assert_abs_diff_eq!(vals[k], -vals[n - 1 - k], epsilon = 1e-10);
        }
    }

    #[test]
    fn betas_and_reconstruct_are_mutually_inverse() {
        let (system, _) = small_system();
        let e = hermitize_and_pad(&system);
        let decomp = SpectralDecomposition::of_embedding(&e);
        let rhs = e.rhs_embedded();
        let betas = decomp.betas(rhs);
        let back = decomp.reconstruct(&betas);
        for k in 0..rhs.len() {
            assert_abs_diff_eq!(back[k], rhs[k], epsilon = 1e-10);
        }
        // eigen-action: reconstruct(lambda .* betas) == A * rhs
        let scaled: Vec<f64> = decomp
            .eigenvalues()
            .iter()
            .zip(&betas)
            .map(|(l, b)| l * b)
            .collect();
        let ax = e.full_matrix().matvec(rhs);
        let rec = decomp.reconstruct(&scaled);
        for k in 0..rhs.len() {
            assert_abs_diff_eq!(rec[k], ax[k], epsilon = 1e-9);
        }
    }

    #[test]
    fn padding_leaves_solution_unchanged() {
        // same physical system at N_t = 1 and N_t = 3 gives different
        // padding; classical blocks must agree with the embedded solve
        let (system, _) = small_system();
        let x = classical_solve(&system);
        let e = hermitize_and_pad(&system);
        let xhat = e.solve_embedded(e.rhs_embedded());
        for k in 0..system.dim() {
            assert!((x[k] - xhat[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn triplet_export_round_trips() {
        let (system, _) = small_system();
        let m = system.tilde_a();
        let mut buf = Vec::new();
        write_triplets(m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with('%'));
        let dims: Vec<usize> = lines
            .next()
            .unwrap()
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        assert_eq!(dims, vec![m.nrows(), m.ncols(), m.nnz()]);
        let mut triplets = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let r: usize = it.next().unwrap().parse().unwrap();
            let c: usize = it.next().unwrap().parse().unwrap();
            let v: f64 = it.next().unwrap().parse().unwrap();
            triplets.push((r, c, v));
        }
        let back = CsrMatrix::from_triplets(m.nrows(), m.ncols(), triplets);
        assert_eq!(&back, m);
    }
}
