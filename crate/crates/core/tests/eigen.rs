use std::f64::consts::PI;

use lelab_core::fem::{assemble_mass, assemble_stiffness, Field};
use lelab_core::geometry::{generate_mesh, Domain, Mesh};
use lelab_core::numerics::{dot_l2, principal_eigenpair, sparse::norm2};

/// J₀ by its power series.
fn bessel_j0(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= -(x * x / 4.0) / ((k * k) as f64);
        sum += term;
    }
    sum
}

fn first_bessel_zero() -> f64 {
    let (mut a, mut b) = (2.0, 3.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if bessel_j0(a) * bessel_j0(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

fn eigen_on(mesh: &Mesh) -> lelab_core::numerics::EigenPair {
    let k = assemble_stiffness(mesh).unwrap();
    let m = assemble_mass(mesh).unwrap();
    let e = principal_eigenpair(&k, &m, mesh.boundary_flags()).unwrap();
    let kphi = k.matvec(&e.phi);
    let mphi = m.matvec(&e.phi);
    let res: Vec<f64> = kphi
        .iter()
        .zip(&mphi)
        .zip(mesh.boundary_flags())
        .map(|((a, b), &f)| if f { 0.0 } else { a - e.lambda * b })
        .collect();
    let kint: Vec<f64> = kphi
        .iter()
        .zip(mesh.boundary_flags())
        .map(|(a, &f)| if f { 0.0 } else { *a })
        .collect();
    assert!(norm2(&res) <= 1e-8 * norm2(&kint));
    let lumped = m.row_sums();
    let l1: f64 = lumped.iter().zip(&e.phi).map(|(w, v)| w * v.abs()).sum();
    assert!((l1 - 1.0).abs() < 1e-10);
    for (i, &v) in e.phi.iter().enumerate() {
        if !mesh.is_boundary(i) {
            assert!(v > 0.0);
        }
    }
    e
}

#[test]
fn bessel_zero_oracle() {
    assert!((first_bessel_zero() - 2.404826).abs() < 1e-6);
}

#[test]
fn unit_disk_principal_eigenvalue() {
    let mesh = generate_mesh(&Domain::unit_disk(), 0.05).unwrap();
    let e = eigen_on(&mesh);
    let exact = first_bessel_zero().powi(2);
    assert!((e.lambda - exact).abs() < 0.02 * exact, "λ = {}", e.lambda);
}

#[test]
fn eigenvalue_scales_with_inverse_square_radius() {
    let mesh = generate_mesh(&Domain::unit_disk(), 0.1).unwrap();
    let big = generate_mesh(&Domain::disk(2.0).unwrap(), 0.2).unwrap();
    let l1 = eigen_on(&mesh).lambda;
    let l2 = eigen_on(&big).lambda;
    assert!((l2 / (l1 / 4.0) - 1.0).abs() < 0.01);
    let ell = generate_mesh(&Domain::ellipse(2.0, 1.0).unwrap(), 0.1).unwrap();
    eigen_on(&ell);
}

#[test]
fn l2_pairings() {
    let h = 0.05;
    let mesh = generate_mesh(&Domain::unit_disk(), h).unwrap();
    let m = assemble_mass(&mesh).unwrap();
    let one = vec![1.0; mesh.node_count()];
    assert!((dot_l2(&m, &one, &one).unwrap() - PI).abs() < 2.0 * h * h);
    let zero = vec![0.0; mesh.node_count()];
    let f = Field::interpolate(&mesh, |p| 1.0 - p[0] * p[0] - p[1] * p[1]);
    assert_eq!(dot_l2(&m, f.values(), &zero).unwrap(), 0.0);
    let v = dot_l2(&m, f.values(), &one).unwrap();
    assert!((v - PI / 2.0).abs() < 0.02 * PI / 2.0);
}
