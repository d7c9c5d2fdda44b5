mod common;

use std::f64::consts::TAU;

use common::{chart, Covector};
use contactfib::contact::{
    contact_density, exact_symplectomorphism_potential, liouville_field, symplectic_determinant,
    symplectic_matrix, verify_contact, verify_exact_symplectic, Boundary, PotentialOptions,
    DEFAULT_THRESHOLD,
};
use contactfib::grid::SampleGrid;
use contactfib::{Chart, DifferentialForm, SmoothMap};

#[test]
fn contact_density_examples() {
    let xyz = chart("xyz", &["x", "y", "z"], -1.0, 1.0);
    let a = DifferentialForm::parse(&xyz, "dz + x*dy").unwrap();
    assert_eq!(contact_density(&a).unwrap().simplify().as_const(), Some(1.0));
    let flat = DifferentialForm::parse(&xyz, "dz").unwrap();
    assert!(contact_density(&flat).unwrap().simplify().is_zero());

    // oracle: α ∧ dα by brute-force wedge, in the (r, θ, z) order
    let rtz = chart("rtz", &["r", "theta", "z"], 0.1, 1.0);
    let a = DifferentialForm::parse(&rtz, "dz + r^2*dtheta").unwrap();
    let density = contact_density(&a).unwrap();
    for r in [0.1, 0.4, 0.8] {
        let p = [r, 1.0, 0.5];
        let oracle = Covector::at(&a, &p).wedge(&Covector::at(&a.d(), &p));
        let want = oracle.coeff(&[0, 1, 2]);
        assert!((want - 2.0 * r).abs() < 1e-15);
        assert!((density.eval_at(&rtz.coords, &p).unwrap() - want).abs() < 1e-14);
    }
}

#[test]
fn verify_contact_examples() {
    let xyz = chart("xyz", &["x", "y", "z"], -1.0, 1.0);
    let grid = SampleGrid::uniform(&xyz, 21).unwrap();
    let a = DifferentialForm::parse(&xyz, "dz + x*dy").unwrap();
    let rep = verify_contact(&a, &grid, DEFAULT_THRESHOLD).unwrap();
    assert!(rep.passed);
    assert_eq!(rep.min_value, 1.0);
    assert_eq!(rep.grid.points, 21 * 21 * 21);

    let flat = DifferentialForm::parse(&xyz, "dz").unwrap();
    let rep = verify_contact(&flat, &grid, DEFAULT_THRESHOLD).unwrap();
    assert!(!rep.passed);
    assert_eq!(rep.min_value, 0.0);

    // K dθ_B + ½ r² dθ_F: oracle density K·r, normalized by M²
    let c = Chart::new("P", &["phi", "r", "psi"], &[(0.0, TAU), (0.1, 1.0), (0.0, TAU)])
        .unwrap()
        .shared();
    let s = DifferentialForm::parse(&c, "dphi + 0.5*r^2*dpsi").unwrap();
    let grid = SampleGrid::uniform(&c, 15).unwrap();
    let rep = verify_contact(&s, &grid, DEFAULT_THRESHOLD).unwrap();
    assert!(rep.passed);
    let oracle_min = grid
        .points()
        .iter()
        .map(|p| {
            let v = Covector::at(&s, p).wedge(&Covector::at(&s.d(), p));
            v.coeff(&[0, 1, 2])
        })
        .fold(f64::INFINITY, f64::min);
    assert!((oracle_min - 0.1).abs() < 1e-15);
    assert!((rep.min_value * rep.scale.powi(2) - oracle_min).abs() < 1e-14);
}

#[test]
fn symplectic_matrix_examples() {
    let xy = chart("xy", &["x", "y"], -1.0, 1.0);
    let w = DifferentialForm::parse(&xy, "dx wedge dy").unwrap();
    let m = symplectic_matrix(&w, &[0.3, -0.2]).unwrap();
    assert_eq!((m[(0, 1)], m[(1, 0)], m[(0, 0)], m[(1, 1)]), (1.0, -1.0, 0.0, 0.0));

    let rt = chart("rt", &["r", "theta"], 0.1, 1.0);
    let w = DifferentialForm::parse(&rt, "r*dr wedge dtheta").unwrap();
    let m = symplectic_matrix(&w, &[0.5, 0.0]).unwrap();
    assert_eq!((m[(0, 1)], m[(1, 0)]), (0.5, -0.5));

    let c4 = chart("c4", &["x", "y", "z", "w"], -1.0, 1.0);
    let w = DifferentialForm::parse(&c4, "dx wedge dy").unwrap();
    assert_eq!(symplectic_determinant(&w, &[0.1; 4]).unwrap(), 0.0);
}

#[test]
fn liouville_examples() {
    let xy = chart("xy", &["x", "y"], -1.0, 1.0);
    let grid = SampleGrid::uniform(&xy, 7).unwrap();
    let beta = DifferentialForm::parse(&xy, "0.5*(x*dy - y*dx)").unwrap();
    let chi = liouville_field(&beta, &grid).unwrap();
    for (p, v) in chi.samples() {
        assert!((v[0] - 0.5 * p[0]).abs() < 1e-14 && (v[1] - 0.5 * p[1]).abs() < 1e-14);
    }

    let beta = DifferentialForm::parse(&xy, "x*dy").unwrap();
    let chi = liouville_field(&beta, &grid).unwrap();
    for (p, v) in chi.samples() {
        assert!((v[0] - p[0]).abs() < 1e-14 && v[1].abs() < 1e-14);
    }

    // oracle: solve ι_χ(r dr∧dθ) = ½r² dθ by hand, χ = (r/2)∂r
    let rt = chart("rt", &["r", "theta"], 0.1, 1.0);
    let grid = SampleGrid::uniform(&rt, 9).unwrap();
    let beta = DifferentialForm::parse(&rt, "0.5*r^2*dtheta").unwrap();
    let chi = liouville_field(&beta, &grid).unwrap();
    for (p, v) in chi.samples() {
        let (a, b) = (0.0, 0.5 * p[0] * p[0]);
        // [[0, r], [-r, 0]]ᵀ χ = (a, b)  ⇒  χ_r = b / r, χ_θ = -a / r
        let want = [b / p[0], -a / p[0]];
        assert!((v[0] - want[0]).abs() < 1e-14 && (v[1] - want[1]).abs() < 1e-14);
    }
}

#[test]
fn exact_symplectic_examples() {
    let disk = chart("D", &["x", "y"], -1.0, 1.0);
    let grid = SampleGrid::uniform(&disk, 15).unwrap();
    let beta = DifferentialForm::parse(&disk, "0.5*(x*dy - y*dx)").unwrap();
    let circle = Chart::new("S", &["phi"], &[(0.0, TAU)]).unwrap().with_periodic("phi").unwrap().shared();
    let param = SmoothMap::parse(&circle, &disk, &["cos(phi)", "sin(phi)"]).unwrap();
    let boundary = [Boundary::Level {
        defining: contactfib::parse::parse_expr("x^2 + y^2 - 1").unwrap(),
        param,
        per_axis: 64,
    }];
    let rep = verify_exact_symplectic(&beta, &grid, Some(&boundary), DEFAULT_THRESHOLD).unwrap();
    assert!(rep.passed, "{rep:?}");
    let outward = rep
        .components
        .iter()
        .find(|c| c.quantity.starts_with("outward"))
        .unwrap();
    assert!((outward.min_value - 0.5).abs() < 1e-12);

    let flat = DifferentialForm::parse(&disk, "dx").unwrap();
    assert!(!verify_exact_symplectic(&flat, &grid, None, DEFAULT_THRESHOLD).unwrap().passed);

    let ann = Chart::new("A", &["r", "theta"], &[(0.1, 1.0), (0.0, TAU)])
        .unwrap()
        .with_periodic("theta")
        .unwrap()
        .shared();
    let grid = SampleGrid::uniform(&ann, 15).unwrap();
    let beta = DifferentialForm::parse(&ann, "0.5*r^2*dtheta").unwrap();
    let face = [Boundary::Face {
        coord: "r".into(),
        upper: true,
    }];
    let rep = verify_exact_symplectic(&beta, &grid, Some(&face), DEFAULT_THRESHOLD).unwrap();
    assert!(rep.passed);
}

#[test]
fn potential_examples() {
    let xy = chart("xy", &["x", "y"], -1.0, 1.0);
    let grid = SampleGrid::uniform(&xy, 11).unwrap();
    let opts = PotentialOptions::default();

    let beta = DifferentialForm::parse(&xy, "0.5*(x*dy - y*dx)").unwrap();
    let id = SmoothMap::identity(&xy);
    let res = exact_symplectomorphism_potential(&id, &beta, &grid, &opts).unwrap();
    assert!(res.psi.values.iter().all(|v| *v == 0.0));

    let c = 0.7f64;
    let rot = SmoothMap::parse(
        &xy,
        &xy,
        &[
            &format!("cos({c})*x - sin({c})*y"),
            &format!("sin({c})*x + cos({c})*y"),
        ],
    )
    .unwrap();
    let res = exact_symplectomorphism_potential(&rot, &beta, &grid, &opts).unwrap();
    assert!(res.psi.max_abs_gradient() < 1e-12);

    // oracle: line integral of c dy from the basepoint
    let beta = DifferentialForm::parse(&xy, "x*dy").unwrap();
    let shift = SmoothMap::parse(&xy, &xy, &["x + 0.3", "y"]).unwrap();
    let res = exact_symplectomorphism_potential(&shift, &beta, &grid, &opts).unwrap();
    let base = res.basepoint.clone();
    for node in res.psi.nodes() {
        let oracle = 0.3 * (node[1] - base[1]);
        assert!((res.psi.value(&node) - oracle).abs() < 1e-12);
    }
}
