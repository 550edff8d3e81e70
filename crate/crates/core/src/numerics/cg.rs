//! Jacobi-preconditioned conjugate gradients.

use super::sparse::{dot, norm2, SparseOperator};
use super::NumericsError;

pub fn pcg(
    a: &SparseOperator,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, NumericsError> {
    let n = a.dim();
    if b.len() != n {
        return Err(NumericsError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let inv_diag: Vec<f64> = a
        .diag()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(NumericsError::NotSpd {
                row: it,
                pivot: pap,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rnorm = norm2(&r);
        if rnorm <= rel_tol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(NumericsError::NotConverged {
        iterations: max_iter,
        residual: norm2(&r) / bnorm,
    })
}
