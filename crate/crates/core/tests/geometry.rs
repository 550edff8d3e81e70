use std::f64::consts::{PI, TAU};

use lelab_core::geometry::{
    generate_mesh, generate_mesh_with, Domain, GeometryError, MeshOptions, PeakRefinement,
    MIN_ANGLE_DEG,
};
use proptest::prelude::*;

fn area_error(domain: &Domain, h: f64, exact: f64) -> f64 {
    let mesh = generate_mesh(domain, h).unwrap();
    mesh.validate(Some(domain)).unwrap();
    assert!(mesh.min_angle_deg() >= MIN_ANGLE_DEG);
    (mesh.area() - exact).abs()
}

#[test]
fn boundary_point_examples() {
    let p = Domain::unit_disk().boundary_point(0.0);
    assert!((p[0] - 1.0).abs() < 1e-15 && p[1].abs() < 1e-15);
    let p = Domain::ellipse(2.0, 1.0).unwrap().boundary_point(PI / 2.0);
    assert!(p[0].abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-15);
    let p = Domain::fourier(vec![0.0, 0.0, 0.1], vec![])
        .unwrap()
        .boundary_point(0.0);
    assert!((p[0] - 1.1).abs() < 1e-15 && p[1].abs() < 1e-15);
}

#[test]
fn outward_normal_examples() {
    let disk = Domain::unit_disk();
    for t in [0.0, 0.7, 2.0, 4.5] {
        let n = disk.outward_normal(t);
        assert!((n[0] - t.cos()).abs() < 1e-14 && (n[1] - t.sin()).abs() < 1e-14);
    }
    let n = Domain::ellipse(2.0, 1.0).unwrap().outward_normal(0.0);
    assert!((n[0] - 1.0).abs() < 1e-14 && n[1].abs() < 1e-14);
}

#[test]
fn star_shape_margins() {
    assert!((Domain::unit_disk().star_shape_margin() - 1.0).abs() < 1e-12);
    assert!((Domain::disk(2.5).unwrap().star_shape_margin() - 2.5).abs() < 1e-12);
    // Dense sampling oracle of (x, ν) along the ellipse.
    let e = Domain::ellipse(2.0, 1.0).unwrap();
    let sampled = (0..20000)
        .map(|i| {
            let t = TAU * i as f64 / 20000.0;
            let x = e.boundary_point(t);
            let n = e.outward_normal(t);
            x[0] * n[0] + x[1] * n[1]
        })
        .fold(f64::INFINITY, f64::min);
    assert!((e.star_shape_margin() - sampled).abs() < 1e-6);
    assert!((e.star_shape_margin() - 1.0).abs() < 1e-6);
}

#[test]
fn distance_examples() {
    let d = Domain::unit_disk();
    assert!((d.distance_to_boundary([0.0, 0.0]) - 1.0).abs() < 1e-8);
    assert!((d.distance_to_boundary([0.5, 0.0]) - 0.5).abs() < 1e-8);
    let e = Domain::ellipse(2.0, 1.0).unwrap();
    assert!((e.distance_to_boundary([0.0, 0.0]) - 1.0).abs() < 1e-8);
}

#[test]
fn disk_and_ellipse_mesh_areas() {
    let disk = Domain::unit_disk();
    let e1 = area_error(&disk, 0.1, PI);
    let e2 = area_error(&disk, 0.05, PI);
    assert!(e1 < 2.0 * 0.01, "disk area error {e1}");
    assert!(e2 < e1);
    let ell = Domain::ellipse(2.0, 1.0).unwrap();
    let e3 = area_error(&ell, 0.1, 2.0 * PI);
    assert!(e3 < 2.0 * 0.01, "ellipse area error {e3}");
}

#[test]
fn area_converges_at_second_order() {
    let domains = [
        (Domain::unit_disk(), PI),
        (Domain::ellipse(2.0, 1.0).unwrap(), 2.0 * PI),
    ];
    for (domain, exact) in domains {
        let errs: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&h| area_error(&domain, h, exact))
            .collect();
        let order = (errs[0] / errs[2]).ln() / 4f64.ln();
        assert!(order >= 1.8, "observed order {order} from {errs:?}");
    }
}

#[test]
fn fourier_domain_meshes() {
    let d = Domain::fourier(vec![0.0, 0.0, 0.1], vec![0.0, 0.05]).unwrap();
    let m = generate_mesh(&d, 0.05).unwrap();
    m.validate(Some(&d)).unwrap();
    assert!((m.area() - d.area()).abs() < 2.0 * 0.05 * 0.05);
}

#[test]
fn refined_mesh_reaches_tiny_elements() {
    let d = Domain::unit_disk();
    let opts = MeshOptions::refined(0.1, PeakRefinement::at([0.0, 0.0]));
    let m = generate_mesh_with(&d, &opts).unwrap();
    m.validate(Some(&d)).unwrap();
    assert!(m.min_angle_deg() >= MIN_ANGLE_DEG);
    let center = m.nodes().iter().position(|p| *p == [0.0, 0.0]).unwrap();
    assert!(m.local_size(center) < 1e-12);
    assert!((m.area() - PI).abs() < 2.0 * 0.01);

    let off = MeshOptions::refined(0.1, PeakRefinement::at([0.3, -0.2]));
    let m = generate_mesh_with(&d, &off).unwrap();
    m.validate(Some(&d)).unwrap();
    assert!(m.nodes().iter().any(|p| *p == [0.3, -0.2]));
}

#[test]
fn invalid_inputs() {
    assert!(matches!(
        Domain::disk(-1.0),
        Err(GeometryError::InvalidParameter(_))
    ));
    assert!(matches!(
        Domain::fourier(vec![1.2], vec![]),
        Err(GeometryError::InvalidParameter(_))
    ));
    let d = Domain::unit_disk();
    let outside = MeshOptions::refined(0.1, PeakRefinement::at([2.0, 0.0]));
    assert!(generate_mesh_with(&d, &outside).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn normal_matches_central_difference(theta in 0.0..TAU) {
        let d = Domain::fourier(vec![0.0, 0.0, 0.1], vec![0.04, 0.0, 0.0, 0.02]).unwrap();
        let eps = 1e-5;
        let a = d.boundary_point(theta - eps);
        let b = d.boundary_point(theta + eps);
        let t = [b[0] - a[0], b[1] - a[1]];
        let len = t[0].hypot(t[1]);
        let expected = [t[1] / len, -t[0] / len];
        let n = d.outward_normal(theta);
        prop_assert!((n[0] - expected[0]).abs() < 1e-8);
        prop_assert!((n[1] - expected[1]).abs() < 1e-8);
        let x = d.boundary_point(theta);
        prop_assert!(x[0] * n[0] + x[1] * n[1] > 0.0);
    }
}
