//! Dense symmetric eigendecomposition and SVD on top of LAPACK
//! (`dsyevd` / `dgesdd` from the system OpenBLAS).
//!
//! Matrices are `ndarray` row-major. LAPACK is column-major, so the
//! wrappers hand LAPACK the transposed view and swap the output roles
//! accordingly; the tests pin the conventions.

use ndarray::{Array1, Array2};
use std::os::raw::c_int;

#[link(name = "openblas")]
extern "C" {
    fn dsyevd_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const c_int,
        a: *mut f64,
        lda: *const c_int,
        w: *mut f64,
        work: *mut f64,
        lwork: *const c_int,
        iwork: *mut c_int,
        liwork: *const c_int,
        info: *mut c_int,
    );
    fn dgesdd_(
        jobz: *const u8,
        m: *const c_int,
        n: *const c_int,
        a: *mut f64,
        lda: *const c_int,
        s: *mut f64,
        u: *mut f64,
        ldu: *const c_int,
        vt: *mut f64,
        ldvt: *const c_int,
        work: *mut f64,
        lwork: *const c_int,
        iwork: *mut c_int,
        info: *mut c_int,
    );
}

/// Eigendecomposition of a real symmetric matrix.
///
/// Returns eigenvalues in ascending order and the eigenvector matrix with
/// eigenvector `j` stored in row `j`.
pub fn symmetric_eigen(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "symmetric_eigen requires a square matrix");
    if n == 0 {
        return (Vec::new(), Array2::zeros((0, 0)));
    }
    // Row-major buffer seen column-major by LAPACK is the transpose; for a
    // symmetric input that is the same matrix.
    let mut buf: Vec<f64> = a.iter().copied().collect();
    let mut w = vec![0.0f64; n];
    let nn = n as c_int;
    let jobz = b'V';
    let uplo = b'L';
    let mut info: c_int = 0;

    // Workspace query.
    let minus_one: c_int = -1;
    let mut work_query = 0.0f64;
    let mut iwork_query: c_int = 0;
    unsafe {
        dsyevd_(
            &jobz,
            &uplo,
            &nn,
            buf.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            &mut work_query,
            &minus_one,
            &mut iwork_query,
            &minus_one,
            &mut info,
        );
    }
    assert_eq!(info, 0, "dsyevd workspace query failed: info = {info}");
    let lwork = work_query as c_int;
    let liwork = iwork_query;
    let mut work = vec![0.0f64; lwork as usize];
    let mut iwork = vec![0 as c_int; liwork as usize];
    unsafe {
        dsyevd_(
            &jobz,
            &uplo,
            &nn,
            buf.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    assert_eq!(info, 0, "dsyevd failed: info = {info}");
    // LAPACK stores eigenvector j as column j of its column-major output,
    // which is row j of the row-major reinterpretation.
    let vectors = Array2::from_shape_vec((n, n), buf).expect("dsyevd output shape");
    (w, vectors)
}

/// Singular value decomposition `a = uᵀ_rows · diag(sigma) · v_rows`.
pub struct Svd {
    /// Singular values, descending.
    pub sigma: Vec<f64>,
    /// Left singular vector `j` stored in row `j`.
    pub u_rows: Array2<f64>,
    /// Right singular vector `j` stored in row `j`.
    pub v_rows: Array2<f64>,
}

/// Full SVD of a square matrix via the divide-and-conquer driver.
pub fn singular_value_decomposition(a: &Array2<f64>) -> Svd {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "SVD wrapper requires a square matrix");
    if n == 0 {
        return Svd {
            sigma: Vec::new(),
            u_rows: Array2::zeros((0, 0)),
            v_rows: Array2::zeros((0, 0)),
        };
    }
    // LAPACK sees b = aᵀ and factors b = u_b s v_bᵀ, hence a = v_b s u_bᵀ:
    // left vectors of `a` are columns of v_b, right vectors are columns of u_b.
    let mut buf: Vec<f64> = a.iter().copied().collect();
    let mut sigma = vec![0.0f64; n];
    let mut u_buf = vec![0.0f64; n * n];
    let mut vt_buf = vec![0.0f64; n * n];
    let nn = n as c_int;
    let jobz = b'A';
    let mut info: c_int = 0;
    let mut iwork = vec![0 as c_int; 8 * n];

    let minus_one: c_int = -1;
    let mut work_query = 0.0f64;
    unsafe {
        dgesdd_(
            &jobz,
            &nn,
            &nn,
            buf.as_mut_ptr(),
            &nn,
            sigma.as_mut_ptr(),
            u_buf.as_mut_ptr(),
            &nn,
            vt_buf.as_mut_ptr(),
            &nn,
            &mut work_query,
            &minus_one,
            iwork.as_mut_ptr(),
            &mut info,
        );
    }
    assert_eq!(info, 0, "dgesdd workspace query failed: info = {info}");
    let lwork = work_query as c_int;
    let mut work = vec![0.0f64; lwork as usize];
    unsafe {
        dgesdd_(
            &jobz,
            &nn,
            &nn,
            buf.as_mut_ptr(),
            &nn,
            sigma.as_mut_ptr(),
            u_buf.as_mut_ptr(),
            &nn,
            vt_buf.as_mut_ptr(),
            &nn,
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &mut info,
        );
    }
    assert_eq!(info, 0, "dgesdd failed: info = {info}");

    // u_buf holds u_b column-major = u_bᵀ row-major: its rows are the right
    // singular vectors of `a`.
    let v_rows = Array2::from_shape_vec((n, n), u_buf).expect("dgesdd u shape");
    // vt_buf holds v_bᵀ column-major = v_b row-major: its columns are the
    // left singular vectors of `a`; transpose to store them as rows.
    let v_b = Array2::from_shape_vec((n, n), vt_buf).expect("dgesdd vt shape");
    let u_rows = v_b.t().as_standard_layout().to_owned();
    Svd {
        sigma,
        u_rows,
        v_rows,
    }
}

/// Solve `a x = b` for symmetric `a` through its eigendecomposition.
///
/// Intended for small test systems; fails on (numerically) singular input.
pub fn symmetric_solve(a: &Array2<f64>, b: &[f64]) -> Vec<f64> {
    let (vals, vecs_rows) = symmetric_eigen(a);
    let b = Array1::from(b.to_vec());
    let proj = vecs_rows.dot(&b);
    let scaled: Array1<f64> = proj
        .iter()
        .zip(&vals)
        .map(|(p, l)| {
            assert!(l.abs() > 1e-12, "symmetric_solve: singular matrix");
            p / l
        })
        .collect();
    vecs_rows.t().dot(&scaled).to_vec()
}
