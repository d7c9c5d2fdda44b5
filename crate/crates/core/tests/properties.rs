mod common;

use common::gen::Gen;
use common::{chart, laws};
use contactfib::bundle::{
    assemble_sigma, boundary_deviation, fiber_correction_residual, mapping_torus_spec,
    verify_bundle_contact,
};
use contactfib::contact::{
    exact_symplectomorphism_potential, liouville_field, verify_contact, ContactDensity,
    PotentialOptions, DEFAULT_THRESHOLD,
};
use contactfib::fiber_sum::{annulus_samples, darboux_sum_spec, DEFAULT_EPSILON};
use contactfib::grid::SampleGrid;
use contactfib::isotopy::{
    concatenate_lambda, endpoint_forms, max_coeff_difference, normalize_family,
    rotating_base_family, ContactFamily, PARAM,
};
use contactfib::{DifferentialForm, ScalarExpr, SmoothMap};
use proptest::prelude::*;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cases(200))]

    #[test]
    fn d_squared_vanishes(seed in any::<u64>()) {
        prop_assert!(laws::dd(seed) < 1e-10);
    }

    #[test]
    fn pullback_commutes_with_d(seed in any::<u64>()) {
        prop_assert!(laws::pullback_d(seed) < 1e-10);
    }

    #[test]
    fn pullback_distributes_over_wedge(seed in any::<u64>()) {
        prop_assert!(laws::pullback_wedge(seed) < 1e-10);
    }

    #[test]
    fn wedge_is_graded_anticommutative(seed in any::<u64>()) {
        prop_assert!(laws::anticommute(seed) < 1e-12);
    }

    #[test]
    fn interior_is_an_antiderivation(seed in any::<u64>()) {
        prop_assert!(laws::interior(seed) < 1e-10);
    }
}

proptest! {
    #![proptest_config(cases(100))]

    #[test]
    fn binomial_identity(seed in any::<u64>()) {
        for (n, m) in [(0, 1), (1, 1), (1, 2), (2, 1)] {
            prop_assert!(laws::binomial_identity(n, m, seed) < 1e-9, "(n, m) = ({n}, {m})");
        }
    }
}

/// `dz + x dy` plus a small random perturbation.
fn random_contact(g: &mut Gen) -> DifferentialForm {
    let c = chart("C", &["x", "y", "z"], -1.0, 1.0);
    DifferentialForm::parse(&c, "dz + x*dy")
        .unwrap()
        .add(&g.perturbation(&c, 0.05))
        .unwrap()
}

proptest! {
    #![proptest_config(cases(40))]

    #[test]
    fn scaling_keeps_density_sign(seed in any::<u64>(), k in 0.01f64..100.0) {
        let mut g = Gen::new(seed);
        let a = random_contact(&mut g);
        let ka = a.scale(&ScalarExpr::constant(k));
        let (da, dka) = (ContactDensity::new(&a).unwrap(), ContactDensity::new(&ka).unwrap());
        let grid = SampleGrid::uniform(a.chart(), 7).unwrap();
        for p in grid.points() {
            let (x, y) = (da.density(p), dka.density(p));
            prop_assert_eq!(x.signum(), y.signum());
            prop_assert!((y - k * k * x).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn orientation_flip_negates_density(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let a = random_contact(&mut g);
        let flipped_chart = (**a.chart()).clone().with_orientation(-1).unwrap().shared();
        let b = DifferentialForm::from_element(&flipped_chart, a.element().clone());
        let grid = SampleGrid::uniform(a.chart(), 7).unwrap();
        let fgrid = SampleGrid::uniform(&flipped_chart, 7).unwrap();
        let ra = verify_contact(&a, &grid, DEFAULT_THRESHOLD).unwrap();
        let rb = verify_contact(&b, &fgrid, DEFAULT_THRESHOLD).unwrap();
        let da = ContactDensity::new(&a).unwrap();
        let max = grid.points().iter().map(|p| da.density(p)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((rb.min_value + max / ra.scale.powi(2)).abs() < 1e-15);
        prop_assert!(ra.passed && !rb.passed);
    }

    #[test]
    fn liouville_round_trip(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let c = chart("F", &["u", "v", "p", "q"], -1.0, 1.0);
        let beta = DifferentialForm::parse(&c, "0.5*(u*dv - v*du) + 0.5*(p*dq - q*dp)")
            .unwrap()
            .add(&g.perturbation(&c, 0.1))
            .unwrap();
        let grid = SampleGrid::uniform(&c, 5).unwrap();
        let chi = liouville_field(&beta, &grid).unwrap();
        let omega = beta.d().compile().unwrap();
        let b = beta.compile().unwrap();
        for (p, x) in chi.samples() {
            let back = omega.eval(p).interior(x);
            let diff = back.add(&b.eval(p).neg()).max_abs();
            prop_assert!(diff < 1e-8);
        }
    }

    #[test]
    fn identity_has_constant_potential(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let c = chart("F", &["u", "v"], -1.0, 1.0);
        let beta = DifferentialForm::parse(&c, "0.5*(u*dv - v*du)")
            .unwrap()
            .add(&g.perturbation(&c, 0.1))
            .unwrap();
        let grid = SampleGrid::uniform(&c, 9).unwrap();
        let res = exact_symplectomorphism_potential(
            &SmoothMap::identity(&c), &beta, &grid, &PotentialOptions::default()).unwrap();
        prop_assert!(res.psi.max_abs_gradient() < 1e-12);
    }

    #[test]
    fn normalize_is_conformal(seed in any::<u64>(), t in 0.0f64..=1.0) {
        let mut g = Gen::new(seed);
        let c = chart("C", &["x", "y", "z"], -1.0, 1.0);
        let pert = g.perturbation(&c, 0.05).scale(&ScalarExpr::var(PARAM));
        let alpha = DifferentialForm::parse(&c, "dz + x*dy").unwrap().add(&pert).unwrap();
        let fam = ContactFamily::single("alpha", alpha).unwrap();
        let h = (g.expr(&c.coords, 2) * 0.3).sin().exp();
        let grid = SampleGrid::uniform(&c, 5).unwrap();
        let mu = normalize_family(&fam, &h, &grid).unwrap();
        let (a, m) = (fam.form_at(t).unwrap().compile().unwrap(), mu.form_at(t).unwrap().compile().unwrap());
        let hc = h.compile(&c.coords).unwrap();
        for _ in 0..20 {
            let p = g.point(3);
            let factor = 1.0 - t + t / hc.eval(&p);
            prop_assert!(factor > 0.0);
            let (av, mv) = (a.eval(&p), m.eval(&p));
            let diff = mv.add(&av.scale(&-factor)).max_abs();
            prop_assert!(diff <= 1e-12 * mv.max_abs().max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn doubling_k_keeps_contact(c in 0.0f64..8.0, k in 1.0f64..200.0) {
        let spec = mapping_torus_spec(c, false).unwrap();
        let at = |k: f64| verify_bundle_contact(&assemble_sigma(&spec, k).unwrap(), 7, DEFAULT_THRESHOLD)
            .unwrap()
            .passed;
        if at(k) {
            prop_assert!(at(2.0 * k));
        }
    }

    #[test]
    fn fiber_correction_is_closed(c in -8.0f64..8.0, k in 1.0f64..200.0) {
        let spec = mapping_torus_spec(c, false).unwrap();
        let b = assemble_sigma(&spec, k).unwrap();
        for r in &b.regions {
            prop_assert!(fiber_correction_residual(r, &spec, 9, 7).unwrap() < 1e-10);
        }
    }

    #[test]
    fn boundary_stays_product(c in -8.0f64..8.0, k in 1.0f64..200.0) {
        let spec = mapping_torus_spec(c, true).unwrap();
        let b = assemble_sigma(&spec, k).unwrap();
        prop_assert!(boundary_deviation(&b, &spec, 15).unwrap() < 1e-12);
    }

    #[test]
    fn lambda_seams_and_endpoints(c in 0.0f64..5.0, a in 0.0f64..0.5, k0 in 1.0f64..50.0, k1 in 1.0f64..50.0, extra in 0.0f64..50.0) {
        let spec = mapping_torus_spec(c, false).unwrap();
        let mus = rotating_base_family(&spec, "theta", a).unwrap();
        let k = k0.max(k1) + extra;
        let lambda = concatenate_lambda(&mus, &spec, k0, k1, k).unwrap();
        let (s0, s1) = endpoint_forms(&spec, &mus, k0, k1).unwrap();
        for (i, rf) in lambda.iter().enumerate() {
            let grid = SampleGrid::uniform(rf.family.chart(), 5).unwrap();
            let fam = &rf.family;
            prop_assert!(max_coeff_difference(&fam.form_at(0.0).unwrap(), &s0[i], &grid).unwrap() <= 1e-12);
            prop_assert!(max_coeff_difference(&fam.form_at(1.0).unwrap(), &s1[i], &grid).unwrap() <= 1e-12);
            for (t, l, r) in [(1.0 / 3.0, 0, 1), (2.0 / 3.0, 1, 2)] {
                let d = max_coeff_difference(&fam.segment_at(l, t).unwrap(), &fam.segment_at(r, t).unwrap(), &grid);
                prop_assert!(d.unwrap() <= 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(cases(200))]

    #[test]
    fn gluing_maps_are_isometric_involutions(seed in any::<u64>(), n in 1usize..=2) {
        let eps = DEFAULT_EPSILON;
        let sum = darboux_sum_spec(n, eps).unwrap();
        let (maps, ups) = sum.gluing_maps().unwrap();
        let back = sum.counterpart_upsilon().unwrap();
        let x = annulus_samples(n, eps, 1, seed).pop().unwrap();
        let y = maps.phi_f.apply(&x).unwrap();
        prop_assert!((ups.norm(&y) - ups.norm(&x)).abs() < 1e-12);
        prop_assert!(maps.phi_f.jacobian_at(&x).unwrap().determinant() < 0.0);

        let mut full = x.clone();
        full.extend([0.3, -0.7]);
        let q = back.apply(&ups.apply(&full).unwrap()).unwrap();
        prop_assert!(full.iter().zip(&q).all(|(a, b)| (a - b).abs() < 1e-12));

        let rho0 = eps / 2f64.sqrt();
        let s = rho0 / ups.norm(&x);
        let mut on_sphere = full;
        on_sphere[0] *= s;
        for k in 1..=n {
            on_sphere[2 * k - 1] *= s;
        }
        prop_assert!((ups.norm(&ups.apply(&on_sphere).unwrap()) - rho0).abs() < 1e-12);
    }
}
