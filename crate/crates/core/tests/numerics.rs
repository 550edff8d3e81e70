use lelab_core::numerics::{cg::pcg, dot_l2, spd_solve, NumericsError, SparseOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// `BᵀB + I` with a sparse random B.
fn random_spd(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Vec<Vec<f64>> {
    let b: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if rng.gen::<f64>() < density {
                        rng.gen_range(-1.0..1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = (0..n).map(|k| b[k][i] * b[k][j]).sum::<f64>();
        }
        a[i][i] += 1.0;
    }
    a
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn identity_and_diagonal_solves() {
    let b = vec![3.0, -1.0, 0.5];
    assert_eq!(spd_solve(&SparseOperator::identity(3), &b).unwrap(), b);
    let x = spd_solve(&SparseOperator::diagonal(&[2.0, 4.0]), &[2.0, 8.0]).unwrap();
    assert!(max_abs_diff(&x, &[1.0, 2.0]) < 1e-15);
}

#[test]
fn random_50_by_50_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let a = random_spd(&mut rng, 50, 0.1);
    let b: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x = spd_solve(&SparseOperator::from_dense(&a, true), &b).unwrap();
    let oracle = dense_solve(a, b);
    assert!(max_abs_diff(&x, &oracle) < 1e-8);
}

#[test]
fn hundred_random_small_systems_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..100 {
        let n = rng.gen_range(2..30);
        let a = random_spd(&mut rng, n, 0.3);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let op = SparseOperator::from_dense(&a, true);
        let x = spd_solve(&op, &b).unwrap();
        let oracle = dense_solve(a, b.clone());
        assert!(max_abs_diff(&x, &oracle) < 1e-8, "trial {trial}");
        let y = pcg(&op, &b, 1e-12, 1000).unwrap();
        assert!(max_abs_diff(&y, &oracle) < 1e-8, "cg trial {trial}");
    }
}

#[test]
fn solve_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = SparseOperator::from_dense(&random_spd(&mut rng, 40, 0.2), true);
    let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
    assert_eq!(spd_solve(&a, &b).unwrap(), spd_solve(&a, &b).unwrap());
}

#[test]
fn negative_definite_is_rejected() {
    let a = SparseOperator::diagonal(&[1.0, -1.0]);
    assert!(matches!(
        spd_solve(&a, &[1.0, 1.0]),
        Err(NumericsError::NotSpd { .. })
    ));
}

#[test]
fn cg_reports_iteration_cap() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = SparseOperator::from_dense(&random_spd(&mut rng, 30, 0.5), true);
    let b = vec![1.0; 30];
    assert!(matches!(
        pcg(&a, &b, 1e-14, 2),
        Err(NumericsError::NotConverged { .. })
    ));
}

#[test]
fn l2_pairing_dimension_checked() {
    let m = SparseOperator::identity(3);
    assert_eq!(dot_l2(&m, &[1.0, 2.0, 3.0], &[0.0; 3]).unwrap(), 0.0);
    assert!(matches!(
        dot_l2(&m, &[1.0, 2.0], &[1.0, 2.0]),
        Err(NumericsError::DimensionMismatch { .. })
    ));
}
