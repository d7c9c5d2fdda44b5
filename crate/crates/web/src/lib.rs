//! wasm-bindgen entry points for the static demo page in `www/`.

use contactfib::bundle::{
    find_admissible_k, make_cutoff, mapping_torus_spec, CutoffKind, CutoffProfile,
};
use contactfib::contact::DEFAULT_THRESHOLD;
use contactfib::fiber_sum::darboux_sum_spec;
use contactfib::ScalarExpr;
use wasm_bindgen::prelude::*;

fn js_err(e: contactfib::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Cutoff values at `samples` evenly spaced points of `[-ε, ε]`.
#[wasm_bindgen]
pub fn cutoff_curve(
    epsilon: f64,
    delta: f64,
    two_sided: bool,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    cutoff_values(epsilon, delta, two_sided, samples).map_err(js_err)
}

pub fn cutoff_values(
    epsilon: f64,
    delta: f64,
    two_sided: bool,
    samples: usize,
) -> contactfib::Result<Vec<f64>> {
    let kind = if two_sided {
        CutoffKind::TwoSided
    } else {
        CutoffKind::OneSided
    };
    let profile = CutoffProfile::new(epsilon, delta, kind)?;
    let f = make_cutoff(&profile, &ScalarExpr::var("s"))?.compile(&["s".to_string()])?;
    let n = samples.max(2);
    Ok((0..n)
        .map(|i| {
            let s = -epsilon + 2.0 * epsilon * i as f64 / (n - 1) as f64;
            f.eval(&[s])
        })
        .collect())
}

/// Outcome of the K search on the mapping torus with monodromy potential `c·y`.
#[wasm_bindgen]
pub struct KResult {
    k: f64,
    min_density: f64,
    argmin: Vec<f64>,
    trial_k: Vec<f64>,
    trial_ok: Vec<u8>,
}

#[wasm_bindgen]
impl KResult {
    #[wasm_bindgen(getter)]
    pub fn k(&self) -> f64 {
        self.k
    }

    #[wasm_bindgen(getter)]
    pub fn min_density(&self) -> f64 {
        self.min_density
    }

    #[wasm_bindgen(getter)]
    pub fn argmin(&self) -> Vec<f64> {
        self.argmin.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn trial_k(&self) -> Vec<f64> {
        self.trial_k.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn trial_ok(&self) -> Vec<u8> {
        self.trial_ok.clone()
    }
}

#[wasm_bindgen]
pub fn mapping_torus_k(c: f64, grid: usize) -> Result<KResult, JsError> {
    search_k(c, grid).map_err(js_err)
}

pub fn search_k(c: f64, grid: usize) -> contactfib::Result<KResult> {
    let spec = mapping_torus_spec(c, false)?;
    let found = find_admissible_k(&spec, grid.max(3), DEFAULT_THRESHOLD)?;
    let leaf = found.report.worst_leaf();
    Ok(KResult {
        k: found.k,
        min_density: leaf.min_value,
        argmin: leaf.argmin_point.clone(),
        trial_k: found.trials.iter().map(|t| t.0).collect(),
        trial_ok: found.trials.iter().map(|t| t.1 as u8).collect(),
    })
}

/// Images under the 3-dimensional gluing map of points `(z, r)` given as a
/// flat list of pairs, at angle 0 and fiber point (0, 0). Points outside
/// the annulus map to NaN.
#[wasm_bindgen]
pub fn upsilon_image(epsilon: f64, zr: &[f64]) -> Result<Vec<f64>, JsError> {
    upsilon_points(epsilon, zr).map_err(js_err)
}

pub fn upsilon_points(epsilon: f64, zr: &[f64]) -> contactfib::Result<Vec<f64>> {
    let (_, ups) = darboux_sum_spec(1, epsilon)?.gluing_maps()?;
    let mut out = Vec::with_capacity(zr.len());
    for p in zr.chunks_exact(2) {
        match ups.apply(&[p[0], p[1], 0.0, 0.0, 0.0]) {
            Ok(q) => out.extend([q[0], q[1]]),
            Err(_) => out.extend([f64::NAN, f64::NAN]),
        }
    }
    Ok(out)
}
