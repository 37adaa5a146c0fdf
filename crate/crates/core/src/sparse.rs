//! Compressed sparse row matrices with deterministic assembly.
//!
//! Rows are stored with sorted column indices; triplet assembly merges
//! duplicates by summation in (row, column) order, so a matrix built from
//! the same triplets is bit-identical across runs.

use ndarray::Array2;

/// Real matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from triplets. Duplicate entries are summed; exact zeros are
    /// dropped after merging.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        for &(r, c, _) in &triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
        }
        triplets.sort_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut iter = triplets.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v != 0.0 {
                indptr[r + 1] += 1;
                indices.push(c);
                values.push(v);
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.indptr[r];
        let hi = self.indptr[r + 1];
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    /// Entry at (r, c); zero if not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        let mut y = vec![0.0; self.nrows];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
        y
    }

    /// Sparse-sparse product `self * rhs`.
    pub fn matmul(&self, rhs: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, rhs.nrows, "matmul dimension mismatch");
        let mut scratch = vec![0.0f64; rhs.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&mid, &a) in cols.iter().zip(vals) {
                let (rcols, rvals) = rhs.row(mid);
                for (&c, &b) in rcols.iter().zip(rvals) {
                    if scratch[c] == 0.0 && !touched.contains(&c) {
                        touched.push(c);
                    }
                    scratch[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if scratch[c] != 0.0 {
                    triplets.push((r, c, scratch[c]));
                }
                scratch[c] = 0.0;
            }
            touched.clear();
        }
        CsrMatrix::from_triplets(self.nrows, rhs.ncols, triplets)
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &CsrMatrix) -> CsrMatrix {
        let nrows = self.nrows * rhs.nrows;
        let ncols = self.ncols * rhs.ncols;
        let mut triplets = Vec::with_capacity(self.nnz() * rhs.nnz());
        for ra in 0..self.nrows {
            let (acols, avals) = self.row(ra);
            for rb in 0..rhs.nrows {
                let (bcols, bvals) = rhs.row(rb);
                let r = ra * rhs.nrows + rb;
                for (&ca, &va) in acols.iter().zip(avals) {
                    for (&cb, &vb) in bcols.iter().zip(bvals) {
                        triplets.push((r, ca * rhs.ncols + cb, va * vb));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(nrows, ncols, triplets)
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                triplets.push((c, r, v));
            }
        }
        CsrMatrix::from_triplets(self.ncols, self.nrows, triplets)
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.ncols];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                sums[c] += v;
            }
        }
        sums
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut dense = Array2::zeros((self.nrows, self.ncols));
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                dense[(r, c)] = v;
            }
        }
        dense
    }

    /// True when the matrix is a permutation: exactly one unit entry per
    /// row and per column.
    pub fn is_permutation(&self) -> bool {
        if self.nrows != self.ncols || self.nnz() != self.nrows {
            return false;
        }
        let mut seen = vec![false; self.ncols];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            if cols.len() != 1 || vals[0] != 1.0 || seen[cols[0]] {
                return false;
            }
            seen[cols[0]] = true;
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_merge_and_sort() {
        let m = CsrMatrix::from_triplets(
            2,
            3,
            vec![
                (1, 2, 1.0),
                (0, 1, 2.0),
                (1, 2, 0.5),
                (0, 0, -1.0),
                (1, 0, 0.0),
            ],
        );
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 0), -1.0);
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(m.get(1, 2), 1.5);
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn matvec_matches_dense() {
        let m = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 2.0), (0, 1, 1.0), (1, 0, -3.0)]);
        let y = m.matvec(&[1.0, 4.0]);
        assert_eq!(y, vec![6.0, -3.0]);
    }

    #[test]
    fn matmul_small() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0)]);
        let b = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 4.0), (1, 0, 1.0), (1, 1, -1.0)]);
        let c = a.matmul(&b);
        assert_eq!(c.get(0, 0), 6.0);
        assert_eq!(c.get(0, 1), -2.0);
        assert_eq!(c.get(1, 0), 3.0);
        assert_eq!(c.get(1, 1), -3.0);
    }

    #[test]
    fn kron_identity() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (1, 0, 2.0)]);
        let k = CsrMatrix::identity(2).kron(&a);
        assert_eq!(k.nrows(), 4);
        assert_eq!(k.get(0, 1), 1.0);
        assert_eq!(k.get(1, 0), 2.0);
        assert_eq!(k.get(2, 3), 1.0);
        assert_eq!(k.get(3, 2), 2.0);
    }

    #[test]
    fn transpose_roundtrip() {
        let a = CsrMatrix::from_triplets(2, 3, vec![(0, 2, 5.0), (1, 0, -1.0)]);
        let t = a.transpose();
        assert_eq!(t.nrows(), 3);
        assert_eq!(t.get(2, 0), 5.0);
        assert_eq!(t.transpose(), a);
    }

    #[test]
    fn permutation_detection() {
        assert!(CsrMatrix::identity(4).is_permutation());
        let swap = CsrMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (1, 0, 1.0)]);
        assert!(swap.is_permutation());
        let not = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 0, 1.0)]);
        assert!(!not.is_permutation());
    }
}
