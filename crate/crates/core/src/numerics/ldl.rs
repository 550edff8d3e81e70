//! Sparse LDLᵀ factorization (up-looking, row by row).
//!
//! The symbolic phase computes a nested-dissection ordering, the elimination
//! tree and column counts once per sparsity pattern; the numeric phase can
//! then be repeated for every matrix whose pattern is contained in the
//! analysed one (Newton iterations reuse the analysis of the stiffness).

use std::sync::Arc;

use super::ordering::{invert, nested_dissection};
use super::sparse::SparseOperator;
use super::NumericsError;

/// Relative pivot threshold below which a pivot counts as zero.
const PIVOT_FLOOR: f64 = 1e-13;

/// How pivots are screened during numeric factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pivoting {
    /// Every pivot must be positive (SPD matrices).
    Positive,
    /// Pivots of either sign are accepted; only vanishing ones are rejected.
    Nonzero,
}

#[derive(Debug)]
pub struct LdlSymbolic {
    n: usize,
    perm: Vec<usize>,
    pinv: Vec<usize>,
    parent: Vec<usize>,
    col_ptr: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl LdlSymbolic {
    pub fn analyze(a: &SparseOperator) -> Arc<Self> {
        let perm = nested_dissection(a);
        Self::with_ordering(a, perm)
    }

    pub fn with_ordering(a: &SparseOperator, perm: Vec<usize>) -> Arc<Self> {
        let n = a.dim();
        let pinv = invert(&perm);
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for (j, _) in a.row(perm[k]) {
                let mut i = pinv[j];
                if i < k {
                    while flag[i] != k {
                        if parent[i] == NONE {
                            parent[i] = k;
                        }
                        lnz[i] += 1;
                        flag[i] = k;
                        i = parent[i];
                    }
                }
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for k in 0..n {
            col_ptr[k + 1] = col_ptr[k] + lnz[k];
        }
        Arc::new(Self {
            n,
            perm,
            pinv,
            parent,
            col_ptr,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of strictly lower entries reserved for L.
    pub fn factor_nnz(&self) -> usize {
        self.col_ptr[self.n]
    }
}

#[derive(Debug, Clone)]
pub struct LdlFactor {
    symbolic: Arc<LdlSymbolic>,
    li: Vec<usize>,
    lx: Vec<f64>,
    lnz: Vec<usize>,
    d: Vec<f64>,
}

impl LdlFactor {
    /// Numeric factorization of `a`, whose pattern must be contained in the
    /// pattern `symbolic` was computed from.
    pub fn factor(
        symbolic: &Arc<LdlSymbolic>,
        a: &SparseOperator,
        pivoting: Pivoting,
    ) -> Result<Self, NumericsError> {
        let n = symbolic.n;
        if a.dim() != n {
            return Err(NumericsError::DimensionMismatch {
                expected: n,
                found: a.dim(),
            });
        }
        let nnz = symbolic.factor_nnz();
        let mut li = vec![0usize; nnz];
        let mut lx = vec![0.0; nnz];
        let mut lnz = vec![0usize; n];
        let mut d = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut pattern = vec![0usize; n];
        let mut flag = vec![NONE; n];
        let parent = &symbolic.parent;
        let lp = &symbolic.col_ptr;

        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            let row = symbolic.perm[k];
            let mut akk = 0.0;
            for (j, v) in a.row(row) {
                let mut i = symbolic.pinv[j];
                if i > k {
                    continue;
                }
                if i == k {
                    akk = v;
                }
                y[i] += v;
                let mut len = 0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                    if i == NONE {
                        return Err(NumericsError::PatternMismatch);
                    }
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            d[k] = y[k];
            y[k] = 0.0;
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = 0.0;
                let start = lp[i];
                let end = start + lnz[i];
                for p in start..end {
                    y[li[p]] -= lx[p] * yi;
                }
                let l_ki = yi / d[i];
                d[k] -= l_ki * yi;
                if end >= lp[i + 1] {
                    return Err(NumericsError::PatternMismatch);
                }
                li[end] = k;
                lx[end] = l_ki;
                lnz[i] += 1;
            }
            let scale = akk.abs().max(f64::MIN_POSITIVE);
            match pivoting {
                Pivoting::Positive if !(d[k] > PIVOT_FLOOR * scale) => {
                    return Err(NumericsError::NotSpd { row, pivot: d[k] });
                }
                Pivoting::Nonzero if !(d[k].abs() > PIVOT_FLOOR * scale) => {
                    return Err(NumericsError::Singular { row });
                }
                _ => {}
            }
        }
        Ok(Self {
            symbolic: Arc::clone(symbolic),
            li,
            lx,
            lnz,
            d,
        })
    }

    /// Convenience: analyse and factor in one go.
    pub fn new(a: &SparseOperator, pivoting: Pivoting) -> Result<Self, NumericsError> {
        let symbolic = LdlSymbolic::analyze(a);
        Self::factor(&symbolic, a, pivoting)
    }

    pub fn symbolic(&self) -> &Arc<LdlSymbolic> {
        &self.symbolic
    }

    /// Number of negative pivots (the inertia index of the matrix).
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let sym = &self.symbolic;
        let n = sym.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = sym.perm.iter().map(|&old| b[old]).collect();
        for j in 0..n {
            let xj = x[j];
            let start = sym.col_ptr[j];
            for p in start..start + self.lnz[j] {
                x[self.li[p]] -= self.lx[p] * xj;
            }
        }
        for (xj, dj) in x.iter_mut().zip(&self.d) {
            *xj /= dj;
        }
        for j in (0..n).rev() {
            let start = sym.col_ptr[j];
            let mut s = x[j];
            for p in start..start + self.lnz[j] {
                s -= self.lx[p] * x[self.li[p]];
            }
            x[j] = s;
        }
        let mut out = vec![0.0; n];
        for (new, &old) in sym.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }

    /// Solve followed by `steps` rounds of iterative refinement against `a`.
    pub fn solve_refined(&self, a: &SparseOperator, b: &[f64], steps: usize) -> Vec<f64> {
        let mut x = self.solve(b);
        for _ in 0..steps {
            let ax = a.matvec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let dx = self.solve(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::sparse::norm2;

    #[test]
    fn indefinite_matrix_with_nonzero_pivots() {
        let a = SparseOperator::from_dense(
            &[
                vec![2.0, 1.0, 0.0],
                vec![1.0, -3.0, 1.0],
                vec![0.0, 1.0, 4.0],
            ],
            true,
        );
        assert!(matches!(
            LdlFactor::new(&a, Pivoting::Positive),
            Err(NumericsError::NotSpd { .. })
        ));
        let f = LdlFactor::new(&a, Pivoting::Nonzero).unwrap();
        assert_eq!(f.negative_pivots(), 1);
        let b = [1.0, 2.0, 3.0];
        let x = f.solve(&b);
        let r: Vec<f64> = a.matvec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) < 1e-14);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = SparseOperator::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]], true);
        assert!(matches!(
            LdlFactor::new(&a, Pivoting::Nonzero),
            Err(NumericsError::Singular { .. })
        ));
    }
}
