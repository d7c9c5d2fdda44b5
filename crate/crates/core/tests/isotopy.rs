mod common;

use common::{chart, Covector};
use contactfib::bundle::{assemble_sigma, mapping_torus_spec};
use contactfib::contact::DEFAULT_THRESHOLD;
use contactfib::grid::SampleGrid;
use contactfib::isotopy::{
    concatenate_lambda, endpoint_forms, max_coeff_difference, normalize_family,
    rotating_base_family, spec_at, verify_family_contact, ContactFamily,
};
use contactfib::{DifferentialForm, ScalarExpr};

fn xyz() -> std::sync::Arc<contactfib::Chart> {
    chart("xyz", &["x", "y", "z"], -1.0, 1.0)
}

fn family(src: &str) -> ContactFamily {
    ContactFamily::single("alpha", DifferentialForm::parse(&xyz(), src).unwrap()).unwrap()
}

#[test]
fn normalize_examples() {
    let c = xyz();
    let grid = SampleGrid::uniform(&c, 5).unwrap();
    let alpha = family("dz + (1 + t)*x*dy");
    let p = [0.3, -0.4, 0.1];

    let same = normalize_family(&alpha, &ScalarExpr::one(), &grid).unwrap();
    for t in [0.0, 0.25, 0.5, 1.0] {
        let d = Covector::at(&same.form_at(t).unwrap(), &p)
            .max_diff(&Covector::at(&alpha.form_at(t).unwrap(), &p));
        assert!(d < 1e-15);
    }

    let constant = family("dz + x*dy");
    let half = normalize_family(&constant, &ScalarExpr::constant(2.0), &grid).unwrap();
    let want = DifferentialForm::parse(&c, "0.5*dz + 0.5*x*dy").unwrap();
    assert!(Covector::at(&half.form_at(1.0).unwrap(), &p).max_diff(&Covector::at(&want, &p)) < 1e-15);
    assert!(Covector::at(&half.form_at(0.0).unwrap(), &p)
        .max_diff(&Covector::at(&constant.form_at(0.0).unwrap(), &p))
        < 1e-15);

    // 1 − ½ + ½/2 = ¾
    let mid = Covector::at(&half.form_at(0.5).unwrap(), &p);
    assert!((mid.coeff(&[2]) - 0.75).abs() < 1e-15);
    assert!((mid.coeff(&[1]) - 0.75 * p[0]).abs() < 1e-15);

    let bad = parse("x");
    assert!(normalize_family(&constant, &bad, &grid).is_err());
}

fn parse(s: &str) -> ScalarExpr {
    contactfib::parse::parse_expr(s).unwrap()
}

#[test]
fn concatenation_examples() {
    let spec = mapping_torus_spec(5.0, false).unwrap();
    let mus = rotating_base_family(&spec, "theta", 0.3).unwrap();
    let (k0, k1, k) = (70.0, 70.0, 90.0);
    let lambda = concatenate_lambda(&mus, &spec, k0, k1, k).unwrap();
    let (s0, s1) = endpoint_forms(&spec, &mus, k0, k1).unwrap();
    assert_eq!(lambda.len(), s0.len());

    for (i, rf) in lambda.iter().enumerate() {
        let grid = SampleGrid::uniform(rf.family.chart(), 7).unwrap();
        let at0 = rf.family.form_at(0.0).unwrap();
        let at1 = rf.family.form_at(1.0).unwrap();
        assert!(max_coeff_difference(&at0, &s0[i], &grid).unwrap() <= 1e-12);
        assert!(max_coeff_difference(&at1, &s1[i], &grid).unwrap() <= 1e-12);
        // both branch formulas at the seams
        for (seam, left, right) in [(1.0 / 3.0, 0, 1), (2.0 / 3.0, 1, 2)] {
            let a = rf.family.segment_at(left, seam).unwrap();
            let b = rf.family.segment_at(right, seam).unwrap();
            assert!(max_coeff_difference(&a, &b, &grid).unwrap() <= 1e-12);
        }
    }
    // Λ at ⅓ is Kμ₀ + β + f dΨ
    let direct = assemble_sigma(&spec_at(&spec, &mus, 0.0).unwrap(), k).unwrap();
    for (rf, r) in lambda.iter().zip(&direct.regions) {
        let grid = SampleGrid::uniform(&r.chart, 7).unwrap();
        let at = rf.family.form_at(1.0 / 3.0).unwrap();
        assert!(max_coeff_difference(&at, &r.sigma, &grid).unwrap() <= 1e-12);
    }

    assert!(concatenate_lambda(&mus, &spec, k0, 100.0, k).is_err());
}

#[test]
fn constant_family_concatenates_to_constant() {
    let spec = mapping_torus_spec(5.0, false).unwrap();
    let mus: Vec<ContactFamily> = spec
        .pieces
        .iter()
        .map(|p| ContactFamily::single(&p.name, p.mu.clone()).unwrap())
        .collect();
    let lambda = concatenate_lambda(&mus, &spec, 32.0, 32.0, 32.0).unwrap();
    let sigma = assemble_sigma(&spec, 32.0).unwrap();
    for (rf, r) in lambda.iter().zip(&sigma.regions) {
        let grid = SampleGrid::uniform(&r.chart, 5).unwrap();
        for i in 0..=12 {
            let at = rf.family.form_at(i as f64 / 12.0).unwrap();
            assert!(max_coeff_difference(&at, &r.sigma, &grid).unwrap() <= 1e-12);
        }
    }
}

#[test]
fn family_contact_examples() {
    let c = xyz();
    let grid = SampleGrid::uniform(&c, 9).unwrap();

    let rep = verify_family_contact(&family("dz + x*dy"), &grid, 11, DEFAULT_THRESHOLD).unwrap();
    assert!(rep.passed);
    assert_eq!(rep.components.len(), 11);
    assert!(rep.components.iter().all(|r| r.min_value == rep.components[0].min_value));

    // dz + x'dy' with (x', y') the rotation of (x, y) by 2πt: dα = dx∧dy, so
    // the raw density is 1 and the normalized one is 1/M_t²
    let rot = family(
        "dz + (cos(2*pi*t)*x - sin(2*pi*t)*y)*(sin(2*pi*t)*dx + cos(2*pi*t)*dy)",
    );
    let rep = verify_family_contact(&rot, &grid, 101, DEFAULT_THRESHOLD).unwrap();
    assert!(rep.passed);
    for comp in &rep.components {
        let t = comp.t.unwrap();
        let (s, co) = (std::f64::consts::TAU * t).sin_cos();
        let m = grid
            .points()
            .iter()
            .map(|p| {
                let xr = co * p[0] - s * p[1];
                1f64.max((xr * s).abs()).max((xr * co).abs())
            })
            .fold(0.0, f64::max);
        assert!((comp.min_value - 1.0 / (m * m)).abs() < 1e-12, "t = {t}");
    }

    let through_dz = family("dz + (1 - 2*t)^2*x*dy");
    let rep = verify_family_contact(&through_dz, &grid, 101, DEFAULT_THRESHOLD).unwrap();
    assert!(!rep.passed);
    assert_eq!(rep.worst_leaf().t, Some(0.5));
    let failing: Vec<f64> = rep
        .components
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.t.unwrap())
        .collect();
    assert_eq!(failing, vec![0.5]);
}
