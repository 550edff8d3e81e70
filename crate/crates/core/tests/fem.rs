use std::f64::consts::PI;
use std::sync::Arc;

use lelab_core::fem::{
    assemble_mass, assemble_stiffness, assemble_weighted_mass, dirichlet_energy, integrate_power,
    nonlinear_jacobian, nonlinear_load, nonlinear_residual, normal_derivative, Discretization,
    Field, QuadratureRule,
};
use lelab_core::geometry::{generate_mesh, Domain, Mesh};
use lelab_core::numerics::sparse::{dot, norm2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disk_mesh(h: f64) -> Arc<Mesh> {
    Arc::new(generate_mesh(&Domain::unit_disk(), h).unwrap())
}

fn torsion(d: &Discretization) -> Vec<f64> {
    d.solve_dirichlet(&d.lumped_mass()).unwrap()
}

fn center_node(mesh: &Mesh) -> usize {
    mesh.nodes().iter().position(|p| *p == [0.0, 0.0]).unwrap()
}

fn single_triangle(p: [[f64; 2]; 3]) -> Mesh {
    Mesh::from_parts(p.to_vec(), vec![[0, 1, 2]], 1.0).unwrap()
}

#[test]
fn right_triangle_element_matrices() {
    let m = single_triangle([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
    let k = assemble_stiffness(&m).unwrap().to_dense();
    // Hand-computed P1 gradients: ∇λ = (−1,−1), (1,0), (0,1); area 1/2.
    let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((k[i][j] - expected[i][j]).abs() < 1e-15);
        }
    }
    let mass = assemble_mass(&m).unwrap().to_dense();
    for i in 0..3 {
        for j in 0..3 {
            let e = 0.5 / 12.0 * if i == j { 2.0 } else { 1.0 };
            assert!((mass[i][j] - e).abs() < 1e-15);
        }
    }
}

#[test]
fn stiffness_kernel_and_mass_total() {
    let h = 0.1;
    let mesh = disk_mesh(h);
    let k = assemble_stiffness(&mesh).unwrap();
    let ones = vec![1.0; mesh.node_count()];
    assert!(norm2(&k.matvec(&ones)) < 1e-12);
    assert!(k.symmetry_defect() < 1e-14);
    let m = assemble_mass(&mesh).unwrap();
    assert!((m.total_sum() - PI).abs() < 2.0 * h * h);
    assert!((m.total_sum() - mesh.area()).abs() < 1e-12);
}

#[test]
fn torsion_problem_on_disk() {
    let mesh = disk_mesh(0.05);
    let d = Discretization::new(mesh.clone()).unwrap();
    let u = torsion(&d);
    let c = u[center_node(&mesh)];
    assert!((c - 0.25).abs() < 0.01 * 0.25, "u(0) = {c}");

    let int_u = integrate_power(&mesh, &u, 1.0).unwrap();
    assert!((int_u - PI / 8.0).abs() < 0.01 * PI / 8.0);
    let e = dirichlet_energy(&mesh, &u).unwrap();
    assert!((e - PI / 8.0).abs() < 0.01 * PI / 8.0);
    let uku = dot(&u, &d.stiffness().matvec(&u));
    assert!((e - uku).abs() < 1e-12 * e);

    let trace = normal_derivative(&mesh, &u).unwrap();
    for edge in &trace.edges {
        assert!((edge.u_nu + 0.5).abs() < 0.05 * 0.5, "u_nu = {}", edge.u_nu);
    }
}

#[test]
fn zero_field_cases() {
    let mesh = disk_mesh(0.2);
    let z = vec![0.0; mesh.node_count()];
    assert!(nonlinear_residual(&mesh, &z, 3.0)
        .unwrap()
        .iter()
        .all(|&v| v == 0.0));
    let j = nonlinear_jacobian(&mesh, &z, 3.0).unwrap();
    assert_eq!(j, assemble_stiffness(&mesh).unwrap());
    assert!(normal_derivative(&mesh, &z)
        .unwrap()
        .edges
        .iter()
        .all(|e| e.u_nu == 0.0));
    assert_eq!(dirichlet_energy(&mesh, &z).unwrap(), 0.0);
}

#[test]
fn negative_values_do_not_contribute() {
    let mesh = disk_mesh(0.2);
    let neg = vec![-1.0; mesh.node_count()];
    assert!(nonlinear_load(&mesh, &neg, 3.0)
        .unwrap()
        .iter()
        .all(|&v| v == 0.0));
    assert_eq!(integrate_power(&mesh, &neg, 2.0).unwrap(), 0.0);
}

#[test]
fn constant_weight_jacobian_is_shifted_mass() {
    let mesh = disk_mesh(0.2);
    let ones = vec![1.0; mesh.node_count()];
    let m = assemble_mass(&mesh).unwrap();
    let w = assemble_weighted_mass(&mesh, &ones, QuadratureRule::order2(), |v| v).unwrap();
    let diff = w.add_scaled(1.0, &m, -1.0);
    assert!(diff.values().iter().all(|v| v.abs() < 1e-15));
    let j = nonlinear_jacobian(&mesh, &ones, 2.0).unwrap();
    let expected = assemble_stiffness(&mesh).unwrap().add_scaled(1.0, &m, -2.0);
    let diff = j.add_scaled(1.0, &expected, -1.0);
    assert!(diff.values().iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn constant_power_integral_is_area() {
    let h = 0.1;
    let mesh = disk_mesh(h);
    let v = integrate_power(&mesh, &vec![1.0; mesh.node_count()], 7.0).unwrap();
    assert!((v - PI).abs() < 2.0 * h * h);
}

#[test]
fn jacobian_matches_finite_differences() {
    let mesh = disk_mesh(0.1);
    let d = Discretization::new(mesh.clone()).unwrap();
    let base = torsion(&d);
    let p = 3.0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let u: Vec<f64> = base
            .iter()
            .zip(mesh.boundary_flags())
            .map(|(&v, &b)| {
                if b {
                    0.0
                } else {
                    8.0 * v * rng.gen_range(0.8..1.2)
                }
            })
            .collect();
        let w: Vec<f64> = mesh
            .boundary_flags()
            .iter()
            .map(|&b| if b { 0.0 } else { rng.gen_range(-1.0..1.0) })
            .collect();
        let eps = 1e-6;
        let up: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + eps * b).collect();
        let r0 = d.residual(&u, p).unwrap();
        let r1 = d.residual(&up, p).unwrap();
        let fd: Vec<f64> = r1.iter().zip(&r0).map(|(a, b)| (a - b) / eps).collect();
        let jw = d.jacobian_dirichlet(&u, p).unwrap().matvec(&w);
        let err: Vec<f64> = fd
            .iter()
            .zip(&jw)
            .zip(mesh.boundary_flags())
            .map(|((a, b), &f)| if f { 0.0 } else { a - b })
            .collect();
        let rel = norm2(&err) / norm2(&jw);
        assert!(rel < 1e-5, "relative FD error {rel}");
    }
}

#[test]
fn field_contracts() {
    let mesh = disk_mesh(0.2);
    assert!(Field::from_values(&mesh, vec![0.0; 3]).is_err());
    let f = Field::interpolate_dirichlet(&mesh, |p| 1.0 - p[0] * p[0] - p[1] * p[1]);
    assert!(f.vanishes_on_boundary(&mesh));
    assert_eq!(f.max().1, 1.0);
    let mut buf = Vec::new();
    f.write_text(&mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap().lines().count(),
        mesh.node_count()
    );
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `∫_T (Σ u_i λ_i)^q` by multinomial expansion and the exact moments
/// `∫ λ1^a λ2^b λ3^c = 2A a!b!c!/(a+b+c+2)!`.
fn exact_linear_power(area: f64, u: [f64; 3], q: u32) -> f64 {
    let mut total = 0.0;
    for a in 0..=q {
        for b in 0..=(q - a) {
            let c = q - a - b;
            let coeff = factorial(q) / (factorial(a) * factorial(b) * factorial(c));
            let moment = 2.0 * area * factorial(a) * factorial(b) * factorial(c) / factorial(q + 2);
            total +=
                coeff * u[0].powi(a as i32) * u[1].powi(b as i32) * u[2].powi(c as i32) * moment;
        }
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn power_quadrature_is_exact_for_low_degree(
        pts in proptest::array::uniform6(-2.0f64..2.0),
        u in proptest::array::uniform3(0.0f64..3.0),
        q in 1u32..=4,
    ) {
        let mut p = [[pts[0], pts[1]], [pts[2], pts[3]], [pts[4], pts[5]]];
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
            - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
        prop_assume!(area.abs() > 1e-2);
        let mut vals = u;
        if area < 0.0 {
            p.swap(1, 2);
            vals.swap(1, 2);
        }
        let mesh = single_triangle(p);
        let got = integrate_power(&mesh, &vals, f64::from(q)).unwrap();
        let exact = exact_linear_power(area.abs(), vals, q);
        prop_assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0));
    }
}
