//! Executes scenario tasks in order. A task that errors is recorded and the
//! run moves on.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::bundle::{
    assemble_sigma, boundary_deviation, find_admissible_k, verify_bundle_contact,
    verify_compatibility, FibrationSpec, DEFAULT_SLICES,
};
use crate::contact::{
    exact_symplectomorphism_potential, verify_contact, verify_exact_symplectic, Boundary,
    PotentialOptions, DEFAULT_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::fiber_sum::{
    assemble_summed_fibration, gluing_invariants, shell, verify_gluing_pullback, SumSpec,
    SPHERE_PER_AXIS,
};
use crate::grid::{PositivityReport, SampleGrid, DEFAULT_PER_AXIS};
use crate::isotopy::{
    concatenate_lambda, endpoint_forms, max_coeff_difference, spec_at, upper_k,
    verify_bundle_family, verify_family_contact, BaseFamily, DEFAULT_T_SAMPLES,
};
use crate::map::SmoothMap;

use super::document::{Family, Scenario, Task, TaskKind};
use super::report::{RunReport, Settings, Status, TaskReport};

/// Tolerance for forms that must agree exactly up to rounding.
pub const AGREEMENT_TOL: f64 = 1e-12;
/// Tolerance for a retained region against its original form.
pub const RETAINED_TOL: f64 = 1e-10;
/// Random annulus points for the gluing-map checks.
pub const GLUING_SAMPLES: usize = 200;

#[derive(Default)]
struct Outcome {
    passed: bool,
    message: Option<String>,
    reports: Vec<PositivityReport>,
    values: BTreeMap<String, f64>,
}

impl Outcome {
    fn value(&mut self, key: &str, v: f64) {
        self.values.insert(key.to_string(), v);
    }

    fn fail(&mut self, why: String) {
        self.passed = false;
        match &mut self.message {
            Some(m) => {
                m.push_str("; ");
                m.push_str(&why);
            }
            None => self.message = Some(why),
        }
    }

    fn report(&mut self, rep: PositivityReport) {
        if !rep.passed {
            let leaf = rep.worst_leaf();
            let why = format!(
                "{}: {:e} at {:?}",
                leaf.quantity, leaf.min_value, leaf.argmin_point
            );
            self.fail(why);
        }
        self.reports.push(rep);
    }
}

/// Resolved numeric parameters for one task: command-line settings win
/// over task fields, which win over defaults.
struct Params {
    per_axis: usize,
    threshold: f64,
    t_samples: usize,
    seed: u64,
}

impl Params {
    fn new(task: &Task, s: &Settings) -> Self {
        Params {
            per_axis: s.grid.or(task.grid).unwrap_or(DEFAULT_PER_AXIS),
            threshold: s.threshold.or(task.threshold).unwrap_or(DEFAULT_THRESHOLD),
            t_samples: s.t_samples.or(task.t_samples).unwrap_or(DEFAULT_T_SAMPLES),
            seed: s.seed,
        }
    }
}

/// Errors that mean the property under test does not hold, as opposed to
/// the computation breaking down.
fn is_check_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::NotSymplectic(_) | Error::NotExact(_) | Error::DominanceNotReached(_) | Error::Singular(_)
    )
}

fn run_verify_contact(doc: &Scenario, task: &Task, p: &Params) -> Result<Outcome> {
    let form = &doc.forms[&task.target];
    let grid = SampleGrid::uniform(form.chart(), p.per_axis)?;
    let rep = verify_contact(form, &grid, p.threshold)?;
    let mut out = Outcome {
        passed: true,
        ..Default::default()
    };
    out.value("min_density", rep.min_value);
    out.report(rep);
    Ok(out)
}

fn run_verify_exact_symplectic(doc: &Scenario, task: &Task, p: &Params) -> Result<Outcome> {
    let form = &doc.forms[&task.target];
    let grid = SampleGrid::uniform(form.chart(), p.per_axis)?;
    let faces: Vec<Boundary> = task
        .outward
        .iter()
        .map(|(c, upper)| Boundary::Face {
            coord: c.clone(),
            upper: *upper,
        })
        .collect();
    let outward = (!faces.is_empty()).then_some(faces.as_slice());
    let rep = verify_exact_symplectic(form, &grid, outward, p.threshold)?;
    let mut out = Outcome {
        passed: true,
        ..Default::default()
    };
    out.report(rep);
    Ok(out)
}

fn run_potential(doc: &Scenario, task: &Task, p: &Params) -> Result<Outcome> {
    let map = &doc.maps[&task.target];
    let beta = &doc.forms[task.form.as_ref().expect("checked at load")];
    let grid = SampleGrid::uniform(map.source(), p.per_axis)?;
    let defaults = PotentialOptions::default();
    let opts = PotentialOptions {
        basepoint: None,
        loops: task.loops.unwrap_or(defaults.loops),
        seed: p.seed,
        tolerance: task.tolerance.unwrap_or(defaults.tolerance),
    };
    let res = exact_symplectomorphism_potential(map, beta, &grid, &opts)?;
    let mut out = Outcome {
        passed: true,
        ..Default::default()
    };
    out.value("closedness_residual", res.max_closedness_residual);
    out.value("path_discrepancy", res.max_path_discrepancy);
    out.value("max_abs_gradient", res.psi.max_abs_gradient());
    Ok(out)
}

/// Contactness at `k`, fiber compatibility, and the product form near the
/// horizontal boundary when the spec declares it.
fn bundle_checks(spec: &FibrationSpec, k: f64, task: &Task, p: &Params, out: &mut Outcome) -> Result<()> {
    let bundle = assemble_sigma(spec, k)?;
    out.report(verify_bundle_contact(&bundle, p.per_axis, p.threshold)?);
    let slices = task.slices.unwrap_or(DEFAULT_SLICES);
    out.report(verify_compatibility(&bundle, spec, slices, p.per_axis, p.threshold)?);
    if spec.horizontal_boundary_trivial {
        let dev = boundary_deviation(&bundle, spec, p.per_axis)?;
        out.value("boundary_deviation", dev);
        if !(dev <= AGREEMENT_TOL) {
            out.fail(format!("σ differs from Kμ + β near the horizontal boundary by {dev:e}"));
        }
    }
    Ok(())
}

fn run_assemble(doc: &Scenario, task: &Task, p: &Params) -> Result<Outcome> {
    let spec = &doc.fibrations[&task.target];
    let k = task.k.unwrap_or(1.0);
    let mut out = Outcome {
        passed: true,
        ..Default::default()
    };
    out.value("K", k);
    bundle_checks(spec, k, task, p, &mut out)?;
    Ok(out)
}

fn k_search(spec: &FibrationSpec, task: &Task, p: &Params, out: &mut Outcome) -> Result<f64> {
    let search = find_admissible_k(spec, p.per_axis, p.threshold)?;
    out.value("K", search.k);
    out.value("K_trials", search.trials.len() as f64);
    if let Some(max) = task.max_k {
        if !(search.k < max) {
            out.fail(format!("K = {} is not below {max}", search.k));
        }
    }
    Ok(search.k)
}

fn run_find_k(doc: &Scenario, task: &Task, p: &Params) -> Result<Outcome> {
    let spec = &doc.fibrations[&task.target];
    let mut out = Outcome {
        passed: true,
        ..Default::default()
    };
    let k = k_search(spec, task, p, &mut out)?;
    bundle_checks(spec, k, task, p, &mut out)?;
    Ok(out)
}

fn run_base_family(
    spec: &FibrationSpec,
    mus: &BaseFamily,
    p: &Params,
    out: &mut Outcome,
) -> Result<()> {
    let k0 = find_admissible_k(&spec_at(spec, mus, 0.0)?, p.per_axis, p.threshold)?.k;
    let k1 = find_admissible_k(&spec_at(spec, mus, 1.0)?, p.per_axis, p.threshold)?.k;
    let k = upper_k(spec, mus, p.per_axis, p.t_samples, p.threshold)?
        .max(k0)
        .max(k1);
    out.value("K0", k0);
    out.value("K1", k1);
    out.value("K", k);
    let lambda = concatenate_lambda(mus, spec, k0, k1, k)?;
    out.report(verify_bundle_family(&lambda, p.per_axis, p.t_samples, p.threshold)?);
    let (s0, s1) = endpoint_forms(spec, mus, k0, k1)?;
    let mut seam: f64 = 0.0;
    let mut ends: f64 = 0.0;
    for (i, rf) in lambda.iter().enumerate() {
        let f = &rf.family;
        let grid = SampleGrid::uniform(f.chart(), p.per_axis)?;
        for (j, t) in [(0, 1.0 / 3.0), (1, 2.0 / 3.0)] {
            let d = max_coeff_difference(&f.segment_at(j, t)?, &f.segment_at(j + 1, t)?, &grid)?;
            seam = seam.max(d);
        }
        ends = ends.max(max_coeff_difference(&f.segment_at(0, 0.0)?, &s0[i], &grid)?);
        ends = ends.max(max_coeff_difference(&f.segment_at(2, 1.0)?, &s1[i], &grid)?);
    }
    out.value("seam_difference", seam);
    out.value("endpoint_difference", ends);
    if !(seam <= AGREEMENT_TOL) {
        out.fail(format!("Λ disagrees across the thirds by {seam:e}"));
    }
    if !(ends <= AGREEMENT_TOL) {
        out.fail(format!("Λ misses σ₀ or σ₁ by {ends:e}"));
    }
    Ok(())
}

fn run_family(doc: &Scenario, task: &Task, p: &Params) -> Result<Outcome> {
    let mut out = Outcome {
        passed: true,
        ..Default::default()
    };
    match &doc.families[&task.target] {
        Family::Chart(f) => {
            let grid = SampleGrid::uniform(f.chart(), p.per_axis)?;
            out.report(verify_family_contact(f, &grid, p.t_samples, p.threshold)?);
        }
        Family::Base { fibration, mus } => {
            run_base_family(&doc.fibrations[fibration], mus, p, &mut out)?;
        }
    }
    Ok(out)
}

/// Largest difference between each retained shell region of the summed
/// bundle and the original form pulled back to it.
pub fn retained_residual(sum: &SumSpec, summed: &FibrationSpec, per_axis: usize) -> Result<f64> {
    let bundle = assemble_sigma(summed, 1.0)?;
    let (sl, sr) = sum.sigmas()?;
    let right_index = sum.left.pieces.len();
    let mut worst: f64 = 0.0;
    for (index, original, piece) in [
        (sum.left_piece, &sl, &sum.left.pieces[sum.left_piece]),
        (right_index, &sr, &sum.right.pieces[sum.right_piece]),
    ] {
        let region = &bundle.regions[index];
        let sh = shell(sum.n, sum.epsilon, piece.chart(), "retained")?;
        let mut comps = sh.components().to_vec();
        comps.extend(sum.left.fiber.coords.iter().map(|c| crate::ScalarExpr::var(c)));
        let lift = SmoothMap::new(&region.chart, original.chart(), comps)?;
        let grid = SampleGrid::uniform(&region.chart, per_axis)?;
        worst = worst.max(max_coeff_difference(&lift.pullback(original)?, &region.sigma, &grid)?);
    }
    Ok(worst)
}

fn run_fiber_sum(doc: &Scenario, task: &Task, p: &Params, settings: &Settings) -> Result<Outcome> {
    let sum = &doc.sums[&task.target];
    let mut out = Outcome {
        passed: true,
        ..Default::default()
    };
    let inv = gluing_invariants(sum, GLUING_SAMPLES, p.seed)?;
    out.value("phi_norm_error", inv.norm_error);
    out.value("phi_max_jacobian_det", inv.max_phi_det);
    out.value("fixed_sphere_error", inv.fixed_sphere_error);
    if !(inv.norm_error <= AGREEMENT_TOL) {
        out.fail(format!("Φ changes norms by {:e}", inv.norm_error));
    }
    if !(inv.max_phi_det < 0.0) {
        out.fail(format!("Φ_F preserves orientation somewhere (det {:e})", inv.max_phi_det));
    }
    if !(inv.fixed_sphere_error <= AGREEMENT_TOL) {
        out.fail(format!("Υ moves the gluing sphere by {:e}", inv.fixed_sphere_error));
    }
    if let Some(e) = inv.involution_error {
        out.value("involution_error", e);
        if !(e <= AGREEMENT_TOL) {
            out.fail(format!("Υ' ∘ Υ misses the identity by {e:e}"));
        }
    }
    let (_, ups) = sum.gluing_maps()?;
    let (sl, sr) = sum.sigmas()?;
    let sphere_axis = settings.grid.or(task.grid).unwrap_or(SPHERE_PER_AXIS);
    let glue = verify_gluing_pullback(&sl, &sr, &ups, &sum.left.fiber, sphere_axis)?;
    out.value("gluing_residual", -glue.min_value);
    let glued = glue.passed;
    out.report(glue);
    if !glued {
        return Ok(out);
    }
    let summed = assemble_summed_fibration(sum, sphere_axis)?;
    let k = k_search(&summed, task, p, &mut out)?;
    bundle_checks(&summed, k, task, p, &mut out)?;
    let retained = retained_residual(sum, &summed, p.per_axis)?;
    out.value("retained_residual", retained);
    if !(retained <= RETAINED_TOL) {
        out.fail(format!("retained regions differ from the originals by {retained:e}"));
    }
    Ok(out)
}

pub fn run_task(doc: &Scenario, index: usize, settings: &Settings) -> TaskReport {
    let task = &doc.run[index];
    let p = Params::new(task, settings);
    let start = Instant::now();
    let result = match task.kind {
        TaskKind::VerifyContact => run_verify_contact(doc, task, &p),
        TaskKind::VerifyExactSymplectic => run_verify_exact_symplectic(doc, task, &p),
        TaskKind::Potential => run_potential(doc, task, &p),
        TaskKind::Assemble => run_assemble(doc, task, &p),
        TaskKind::FindK => run_find_k(doc, task, &p),
        TaskKind::Family => run_family(doc, task, &p),
        TaskKind::FiberSum => run_fiber_sum(doc, task, &p, settings),
    };
    let wall_time_s = start.elapsed().as_secs_f64();
    let (observed, out) = match result {
        Ok(out) if out.passed => (Status::Passed, out),
        Ok(out) => (Status::Failed, out),
        Err(e) if is_check_failure(&e) => (
            Status::Failed,
            Outcome {
                message: Some(e.to_string()),
                ..Default::default()
            },
        ),
        Err(e) => (
            Status::Error,
            Outcome {
                message: Some(e.to_string()),
                ..Default::default()
            },
        ),
    };
    let status = match observed {
        Status::Error => Status::Error,
        s if (s == Status::Passed) != task.expect_fail => Status::Passed,
        _ => Status::Failed,
    };
    TaskReport {
        index,
        task: task.kind.name().to_string(),
        target: task.target.clone(),
        expect: if task.expect_fail { "fail" } else { "pass" }.to_string(),
        status,
        observed,
        message: out.message,
        reports: out.reports,
        values: out.values,
        wall_time_s,
    }
}

/// Runs every task in order.
pub fn run_suite(doc: &Scenario, settings: &Settings) -> RunReport {
    let mut report = RunReport::new(&doc.name, &doc.digest, settings.clone());
    for i in 0..doc.run.len() {
        report.push(run_task(doc, i, settings));
    }
    report
}
