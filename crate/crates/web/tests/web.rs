use contactfib_web::{cutoff_values, search_k, upsilon_points};

#[test]
fn cutoff_shape() {
    let (eps, delta) = (1.0, 0.4);
    let ez = eps - (eps - delta) / 4.0;
    let n = 201;
    let two = cutoff_values(eps, delta, true, n).unwrap();
    let one = cutoff_values(eps, delta, false, n).unwrap();
    for i in 0..n {
        let s = -eps + 2.0 * eps * i as f64 / (n - 1) as f64;
        if s.abs() < delta {
            assert_eq!(two[i], 1.0, "s = {s}");
        }
        if s.abs() >= ez {
            assert_eq!(two[i], 0.0, "s = {s}");
        }
        if s > -delta {
            assert_eq!(one[i], 1.0, "s = {s}");
        }
        assert!((two[i] - two[n - 1 - i]).abs() < 1e-15);
        assert!((0.0..=1.0).contains(&two[i]));
    }
    assert!(cutoff_values(1.0, 1.5, true, 10).is_err());
}

#[test]
fn k_search_examples() {
    let r = search_k(0.0, 5).unwrap();
    assert_eq!(r.k(), 1.0);
    assert!(r.min_density() > 0.0);
    // a 5-point grid misses where the c = 1 form degenerates at K = 1
    let grown = search_k(1.0, 7).unwrap();
    assert!(grown.k() > 1.0);
    assert!(grown.min_density() > 0.0);
    let trials: Vec<(f64, u8)> = grown.trial_k().into_iter().zip(grown.trial_ok()).collect();
    assert!(trials.contains(&(grown.k(), 1)));
    assert!(trials.iter().any(|&(k, ok)| ok == 0 && k < grown.k()));
}

#[test]
fn gluing_swaps_annulus_boundaries() {
    let eps: f64 = 0.4;
    let pts = [0.21, 0.01, 0.0, 0.3, 0.05, 0.0, 0.25, 0.2];
    let img = upsilon_points(eps, &pts).unwrap();
    for (p, q) in pts.chunks(2).zip(img.chunks(2)) {
        let rho = p[0].hypot(p[1]);
        if rho <= eps / 2.0 || rho >= 3f64.sqrt() * eps / 2.0 {
            assert!(q[0].is_nan() && q[1].is_nan());
            continue;
        }
        let s = (eps * eps - rho * rho).sqrt() / rho;
        assert!((q[0] - s * p[0]).abs() < 1e-12);
        assert!((q[1] + s * p[1]).abs() < 1e-12);
    }
}
