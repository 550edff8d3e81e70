//! Compressed-row sparse matrices.

use super::NumericsError;

/// Entries with magnitude at or below this are not stored.
pub const DROP_TOLERANCE: f64 = 1e-300;

/// Square sparse matrix in compressed-row layout.
///
/// Column indices are sorted and unique within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

/// Accumulates (row, col, value) triplets; duplicates are summed on build.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    n: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            ..Default::default()
        }
    }

    pub fn with_capacity(n: usize, nnz: usize) -> Self {
        Self {
            n,
            rows: Vec::with_capacity(nnz),
            cols: Vec::with_capacity(nnz),
            vals: Vec::with_capacity(nnz),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n && col < self.n);
        self.rows.push(row);
        self.cols.push(col);
        self.vals.push(value);
    }

    pub fn build(self, symmetric: bool) -> SparseOperator {
        let n = self.n;
        let mut counts = vec![0usize; n + 1];
        for &r in &self.rows {
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; self.rows.len()];
        let mut vals = vec![0.0; self.rows.len()];
        for k in 0..self.rows.len() {
            let slot = next[self.rows[k]];
            cols[slot] = self.cols[k];
            vals[slot] = self.vals[k];
            next[self.rows[k]] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(cols.len());
        let mut values = Vec::with_capacity(cols.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_unstable_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < scratch.len() {
                let c = scratch[k].0;
                let mut v = 0.0;
                while k < scratch.len() && scratch[k].0 == c {
                    v += scratch[k].1;
                    k += 1;
                }
                if v.abs() > DROP_TOLERANCE {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseOperator {
            n,
            row_ptr,
            col_idx,
            values,
            symmetric,
        }
    }
}

impl SparseOperator {
    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut b = TripletBuilder::with_capacity(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            b.push(i, i, v);
        }
        b.build(true)
    }

    /// Builds from a dense row-major matrix, dropping zeros.
    pub fn from_dense(rows: &[Vec<f64>], symmetric: bool) -> Self {
        let n = rows.len();
        let mut b = TripletBuilder::new(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    b.push(i, j, v);
                }
            }
        }
        b.build(symmetric)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Result<f64, NumericsError> {
        if x.len() != self.n || y.len() != self.n {
            return Err(NumericsError::DimensionMismatch {
                expected: self.n,
                found: if x.len() != self.n { x.len() } else { y.len() },
            });
        }
        let mut s = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            let mut r = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                r += self.values[k] * y[self.col_idx[k]];
            }
            s += xi * r;
        }
        Ok(s)
    }

    /// Linear combination `a·self + b·other` over the union pattern.
    pub fn add_scaled(&self, a: f64, other: &SparseOperator, b: f64) -> SparseOperator {
        assert_eq!(self.n, other.n);
        let mut builder = TripletBuilder::with_capacity(self.n, self.nnz() + other.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                builder.push(i, j, a * v);
            }
            for (j, v) in other.row(i) {
                builder.push(i, j, b * v);
            }
        }
        builder.build(self.symmetric && other.symmetric)
    }

    /// Largest relative mismatch `|a_ij − a_ji| / max(|a_ij|, |a_ji|)`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let w = self.get(j, i);
                let scale = v.abs().max(w.abs());
                if scale > 0.0 {
                    worst = worst.max((v - w).abs() / scale);
                }
            }
        }
        worst
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v).sum())
            .collect()
    }

    pub fn total_sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Replaces rows and columns of flagged nodes by the identity.
pub fn eliminate_dirichlet(a: &SparseOperator, fixed: &[bool]) -> SparseOperator {
    eliminate_dirichlet_with_diagonal(a, fixed, 1.0)
}

/// Like [`eliminate_dirichlet`] but places `diag` on fixed diagonal entries.
/// A zero diagonal removes the fixed rows entirely (used for the mass matrix
/// of the eigenproblem so boundary modes do not appear).
pub fn eliminate_dirichlet_with_diagonal(
    a: &SparseOperator,
    fixed: &[bool],
    diag: f64,
) -> SparseOperator {
    assert_eq!(fixed.len(), a.n, "flag length must equal dimension");
    let mut b = TripletBuilder::with_capacity(a.n, a.nnz());
    for i in 0..a.n {
        if fixed[i] {
            if diag != 0.0 {
                b.push(i, i, diag);
            }
            continue;
        }
        for (j, v) in a.row(i) {
            if !fixed[j] {
                b.push(i, j, v);
            }
        }
    }
    b.build(a.symmetric)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_sums_duplicates_and_sorts() {
        let mut b = TripletBuilder::new(3);
        b.push(0, 2, 1.0);
        b.push(0, 0, 2.0);
        b.push(0, 2, 0.5);
        b.push(2, 1, -1.0);
        b.push(1, 1, 0.0);
        let a = b.build(false);
        assert_eq!(a.row(0).collect::<Vec<_>>(), vec![(0, 2.0), (2, 1.5)]);
        assert_eq!(a.row(1).count(), 0, "explicit zero must be dropped");
        assert_eq!(a.get(2, 1), -1.0);
    }

    #[test]
    fn elimination_without_boundary_is_identity_map() {
        let a = SparseOperator::from_dense(
            &[
                vec![2.0, -1.0, 0.0],
                vec![-1.0, 2.0, -1.0],
                vec![0.0, -1.0, 2.0],
            ],
            true,
        );
        assert_eq!(eliminate_dirichlet(&a, &[false; 3]), a);
        assert_eq!(
            eliminate_dirichlet(&a, &[true; 3]),
            SparseOperator::identity(3)
        );
    }

    #[test]
    fn one_dimensional_laplacian_interior_block() {
        // Three-node P1 stiffness on [0, 2h] with h = 0.25.
        let h = 0.25;
        let k = 1.0 / h;
        let a = SparseOperator::from_dense(
            &[vec![k, -k, 0.0], vec![-k, 2.0 * k, -k], vec![0.0, -k, k]],
            true,
        );
        let e = eliminate_dirichlet(&a, &[true, false, true]);
        assert!((e.get(1, 1) - 2.0 / h).abs() < 1e-14);
        assert_eq!(e.get(0, 1), 0.0);
        assert_eq!(e.get(0, 0), 1.0);
        assert_eq!(e.symmetry_defect(), 0.0);
    }

    #[test]
    fn zero_diagonal_elimination_drops_rows() {
        let a = SparseOperator::from_dense(&[vec![1.0, 0.5], vec![0.5, 1.0]], true);
        let e = eliminate_dirichlet_with_diagonal(&a, &[true, false], 0.0);
        assert_eq!(e.nnz(), 1);
        assert_eq!(e.get(1, 1), 1.0);
    }
}
