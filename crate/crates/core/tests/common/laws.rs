//! Residuals of the exterior-calculus laws and the product identity for one
//! random case each, keyed by a seed.

use std::sync::Arc;

use contactfib::bundle::product_contact;
use contactfib::{Chart, DifferentialForm};
use rand::Rng;

use super::gen::Gen;
use super::{binomial, chart};

const POINTS: usize = 50;

fn charts(g: &mut Gen) -> (Arc<Chart>, Arc<Chart>) {
    let dim = g.rng.gen_range(2..=4);
    let src = ["a", "b", "c", "e"];
    let tgt = ["x", "y", "z", "w"];
    (chart("S", &src[..dim], -1.0, 1.0), chart("T", &tgt[..dim], -1.0, 1.0))
}

fn max_diff(a: &DifferentialForm, b: &DifferentialForm, g: &mut Gen) -> f64 {
    let d = a.sub(b).unwrap().compile().unwrap();
    let dim = a.chart().dim();
    (0..POINTS)
        .map(|_| d.eval(&g.point(dim)).max_abs())
        .fold(0.0, f64::max)
}

fn max_abs(a: &DifferentialForm, g: &mut Gen) -> f64 {
    max_diff(a, &DifferentialForm::zero(a.chart(), a.degree()), g)
}

pub fn dd(seed: u64) -> f64 {
    let mut g = Gen::new(seed);
    let (c, _) = charts(&mut g);
    let k = g.rng.gen_range(0..c.dim() - 1);
    let a = g.form(&c, k);
    max_abs(&a.d().d(), &mut g)
}

pub fn pullback_d(seed: u64) -> f64 {
    let mut g = Gen::new(seed);
    let (s, t) = charts(&mut g);
    let f = g.map(&s, &t);
    let k = g.rng.gen_range(0..t.dim());
    let a = g.form(&t, k);
    let lhs = f.pullback(&a.d()).unwrap();
    let rhs = f.pullback(&a).unwrap().d();
    max_diff(&lhs, &rhs, &mut g)
}

pub fn pullback_wedge(seed: u64) -> f64 {
    let mut g = Gen::new(seed);
    let (s, t) = charts(&mut g);
    let f = g.map(&s, &t);
    let k = g.rng.gen_range(0..=t.dim().min(2));
    let l = g.rng.gen_range(0..=t.dim() - k);
    let (a, b) = (g.form(&t, k), g.form(&t, l));
    let lhs = f.pullback(&a.wedge(&b).unwrap()).unwrap();
    let rhs = f.pullback(&a).unwrap().wedge(&f.pullback(&b).unwrap()).unwrap();
    max_diff(&lhs, &rhs, &mut g)
}

pub fn anticommute(seed: u64) -> f64 {
    let mut g = Gen::new(seed);
    let (c, _) = charts(&mut g);
    let k = g.rng.gen_range(0..=c.dim());
    let l = g.rng.gen_range(0..=c.dim() - k);
    let (a, b) = (g.form(&c, k), g.form(&c, l));
    let ab = a.wedge(&b).unwrap();
    let mut ba = b.wedge(&a).unwrap();
    if (k * l) % 2 == 1 {
        ba = ba.neg();
    }
    max_diff(&ab, &ba, &mut g)
}

pub fn interior(seed: u64) -> f64 {
    let mut g = Gen::new(seed);
    let (c, _) = charts(&mut g);
    let k = g.rng.gen_range(1..=c.dim());
    let l = g.rng.gen_range(0..=c.dim() - k);
    let (a, b) = (g.form(&c, k), g.form(&c, l));
    let x = g.field(&c);
    let lhs = a.wedge(&b).unwrap().interior(&x).unwrap();
    let first = a.interior(&x).unwrap().wedge(&b).unwrap();
    let mut second = if l == 0 {
        DifferentialForm::zero(&c, k - 1)
    } else {
        a.wedge(&b.interior(&x).unwrap()).unwrap()
    };
    if k % 2 == 1 {
        second = second.neg();
    }
    let rhs = first.add(&second).unwrap();
    max_diff(&lhs, &rhs, &mut g)
}

/// Relative error of `σ∧(dσ)^{n+m} = C(n+m, m) μ∧(dμ)ⁿ∧(dβ)ᵐ` at one
/// random point, for a perturbed standard μ and β.
pub fn binomial_identity(n: usize, m: usize, seed: u64) -> f64 {
    let mut g = Gen::new(seed);
    let base_names: Vec<String> = if n == 0 {
        vec!["theta".into()]
    } else {
        (1..=n)
            .flat_map(|k| [format!("x{k}"), format!("y{k}")])
            .chain(["z".to_string()])
            .collect()
    };
    let fib_names: Vec<String> = (1..=m).flat_map(|k| [format!("u{k}"), format!("v{k}")]).collect();
    fn refs(v: &[String]) -> Vec<&str> {
        v.iter().map(String::as_str).collect()
    }
    let base = chart("B", &refs(&base_names), -1.0, 1.0);
    let fib = chart("F", &refs(&fib_names), -1.0, 1.0);

    let mu_src = if n == 0 {
        "dtheta".to_string()
    } else {
        let mut s = "dz".to_string();
        for k in 1..=n {
            s += &format!(" + x{k}*dy{k}");
        }
        s
    };
    let mut beta_src = String::new();
    for k in 1..=m {
        beta_src += &format!(" + 0.5*(u{k}*dv{k} - v{k}*du{k})");
    }
    let mu = DifferentialForm::parse(&base, &mu_src)
        .unwrap()
        .add(&g.perturbation(&base, 0.1))
        .unwrap();
    let beta = DifferentialForm::parse(&fib, beta_src.trim_start_matches(" + "))
        .unwrap()
        .add(&g.perturbation(&fib, 0.1))
        .unwrap();
    let sigma = product_contact(&mu, &beta).unwrap();

    let p = g.point(base.dim() + fib.dim());
    let at = |f: &DifferentialForm| f.compile().unwrap().eval(&p);
    let lhs = at(&sigma).wedge(&at(&sigma.d()).power(n + m)).top_coeff();
    let mu_t = mu.extend_to(sigma.chart()).unwrap();
    let db_t = beta.d().extend_to(sigma.chart()).unwrap();
    let rhs = at(&mu_t)
        .wedge(&at(&mu_t.d()).power(n))
        .wedge(&at(&db_t).power(m))
        .top_coeff();
    let want = binomial((n + m) as u64, m as u64) * rhs;
    (lhs - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}
