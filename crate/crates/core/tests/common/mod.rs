//! Shared helpers for integration tests: a brute-force numeric exterior
//! algebra used as an oracle, independent of the library's bitmask code.
#![allow(dead_code)]

pub mod gen;
pub mod laws;

use std::collections::BTreeMap;
use std::sync::Arc;

use contactfib::{Chart, DifferentialForm, FormValue};

/// Sign of the permutation sorting `idx`, or `None` on a repeat.
pub fn perm_sign(idx: &[usize]) -> Option<f64> {
    let mut inversions = 0;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            if idx[i] == idx[j] {
                return None;
            }
            if idx[i] > idx[j] {
                inversions += 1;
            }
        }
    }
    Some(if inversions % 2 == 0 { 1.0 } else { -1.0 })
}

/// A form at a point: sorted index lists to coefficients.
#[derive(Clone, Debug, Default)]
pub struct Covector(pub BTreeMap<Vec<usize>, f64>);

impl Covector {
    pub fn from_value(v: &FormValue) -> Self {
        let mut out = BTreeMap::new();
        for (mask, c) in v.terms() {
            let idx: Vec<usize> = (0..32).filter(|i| mask & (1 << i) != 0).collect();
            out.insert(idx, *c);
        }
        Covector(out)
    }

    pub fn at(form: &DifferentialForm, p: &[f64]) -> Self {
        Self::from_value(&form.at(p).unwrap())
    }

    /// Adds `c · dx_{idx[0]} ∧ dx_{idx[1]} ∧ …` in any index order.
    pub fn add_term(&mut self, idx: &[usize], c: f64) {
        if let Some(s) = perm_sign(idx) {
            let mut sorted = idx.to_vec();
            sorted.sort_unstable();
            *self.0.entry(sorted).or_insert(0.0) += s * c;
        }
    }

    pub fn wedge(&self, other: &Covector) -> Covector {
        let mut out = Covector::default();
        for (a, ca) in &self.0 {
            for (b, cb) in &other.0 {
                let mut idx = a.clone();
                idx.extend(b);
                out.add_term(&idx, ca * cb);
            }
        }
        out
    }

    pub fn coeff(&self, idx: &[usize]) -> f64 {
        let mut out = Covector::default();
        out.add_term(idx, 1.0);
        match out.0.into_iter().next() {
            Some((sorted, s)) => s * self.0.get(&sorted).copied().unwrap_or(0.0),
            None => 0.0,
        }
    }

    pub fn max_diff(&self, other: &Covector) -> f64 {
        let keys: std::collections::BTreeSet<_> = self.0.keys().chain(other.0.keys()).collect();
        keys.into_iter()
            .map(|k| (self.0.get(k).unwrap_or(&0.0) - other.0.get(k).unwrap_or(&0.0)).abs())
            .fold(0.0, f64::max)
    }
}

pub fn chart(name: &str, coords: &[&str], lo: f64, hi: f64) -> Arc<Chart> {
    Chart::new(name, coords, &vec![(lo, hi); coords.len()]).unwrap().shared()
}

/// `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (n + 1 - i) as f64 / i as f64)
}
