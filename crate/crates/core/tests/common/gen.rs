//! Seeded random expressions, forms, maps and vector fields.

use std::sync::Arc;

use contactfib::{Chart, DifferentialForm, ScalarExpr, SmoothMap, VectorField};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Gen {
    pub rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn coef(&mut self) -> f64 {
        self.rng.gen_range(-1.0..1.0)
    }

    /// A random expression tree of bounded depth in the given variables.
    pub fn expr(&mut self, vars: &[String], depth: usize) -> ScalarExpr {
        let leaf = depth == 0 || self.rng.gen_bool(0.3);
        if leaf {
            return if self.rng.gen_bool(0.3) {
                ScalarExpr::constant(self.coef())
            } else {
                ScalarExpr::var(vars.choose(&mut self.rng).unwrap())
            };
        }
        let a = self.expr(vars, depth - 1);
        match self.rng.gen_range(0..7) {
            0 | 1 => a + self.expr(vars, depth - 1),
            2 | 3 => a * self.expr(vars, depth - 1),
            4 => a.sin(),
            5 => (a * 0.5).cos(),
            _ => a.powi(2) * self.coef(),
        }
    }

    pub fn point(&mut self, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| self.coef()).collect()
    }

    /// Random `k`-form: each basis term present with probability ~2/3.
    pub fn form(&mut self, chart: &Arc<Chart>, k: usize) -> DifferentialForm {
        let coords: Vec<&str> = chart.coords.iter().map(|s| s.as_str()).collect();
        let mut terms = Vec::new();
        for subset in subsets(chart.dim(), k) {
            if self.rng.gen_bool(0.67) {
                let names: Vec<&str> = subset.iter().map(|&i| coords[i]).collect();
                terms.push((self.expr(&chart.coords, 3), names));
            }
        }
        if terms.is_empty() {
            return DifferentialForm::zero(chart, k);
        }
        let refs: Vec<(ScalarExpr, &[&str])> =
            terms.iter().map(|(e, n)| (e.clone(), n.as_slice())).collect();
        DifferentialForm::from_terms(chart, &refs).unwrap()
    }

    pub fn degree(&mut self, dim: usize) -> usize {
        self.rng.gen_range(0..=dim.min(3))
    }

    pub fn map(&mut self, source: &Arc<Chart>, target: &Arc<Chart>) -> SmoothMap {
        let comps = (0..target.dim()).map(|_| self.expr(&source.coords, 2)).collect();
        SmoothMap::new(source, target, comps).unwrap()
    }

    pub fn field(&mut self, chart: &Arc<Chart>) -> VectorField {
        let comps = (0..chart.dim()).map(|_| self.expr(&chart.coords, 2)).collect();
        VectorField::new(chart, comps).unwrap()
    }

    /// A small random polynomial 1-form, scaled by `scale`.
    pub fn perturbation(&mut self, chart: &Arc<Chart>, scale: f64) -> DifferentialForm {
        let mut out = DifferentialForm::zero(chart, 1);
        for c in &chart.coords {
            let mut coef = ScalarExpr::constant(self.coef());
            for v in &chart.coords {
                coef = coef + ScalarExpr::var(v) * self.coef();
            }
            let term = DifferentialForm::basis(chart, c).unwrap().scale(&(coef * scale));
            out = out.add(&term).unwrap();
        }
        out
    }
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}
