//! One-parameter families of contact forms and the concatenated bundle
//! family `Λₜ` joining two bundle contact forms.

use std::sync::Arc;

use rayon::prelude::*;

use crate::bundle::{assemble_sigma, assemble_with, find_admissible_k, FibrationSpec};
use crate::chart::Chart;
use crate::contact::verify_contact;
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::form::DifferentialForm;
use crate::grid::{PositivityReport, SampleGrid};

/// Reserved name of the family parameter inside expressions.
pub const PARAM: &str = "t";
pub const DEFAULT_T_SAMPLES: usize = 101;

/// A piece of a family on `[t0, t1]`; `form` uses [`PARAM`] as the local
/// parameter running over `[0, 1]`.
#[derive(Clone, Debug)]
pub struct FamilySegment {
    pub t0: f64,
    pub t1: f64,
    pub form: DifferentialForm,
}

#[derive(Clone, Debug)]
pub struct ContactFamily {
    pub label: String,
    pub segments: Vec<FamilySegment>,
}

impl ContactFamily {
    /// A family over `[0, 1]` given by one expression in `t`.
    pub fn single(label: &str, form: DifferentialForm) -> Result<Self> {
        let f = ContactFamily {
            label: label.to_string(),
            segments: vec![FamilySegment {
                t0: 0.0,
                t1: 1.0,
                form,
            }],
        };
        f.validate()?;
        Ok(f)
    }

    pub fn from_segments(label: &str, segments: Vec<FamilySegment>) -> Result<Self> {
        let f = ContactFamily {
            label: label.to_string(),
            segments,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .segments
            .first()
            .ok_or_else(|| Error::spec(format!("family `{}` has no segments", self.label)))?;
        let chart = first.form.chart();
        if chart.coords.iter().any(|c| c == PARAM) {
            return Err(Error::spec(format!(
                "chart `{}` uses the reserved parameter name `{PARAM}`",
                chart.name
            )));
        }
        let mut t = 0.0;
        for s in &self.segments {
            if s.form.degree() != 1 || **s.form.chart() != **chart {
                return Err(Error::spec(format!(
                    "family `{}`: every segment must be a 1-form on `{}`",
                    self.label, chart.name
                )));
            }
            if (s.t0 - t).abs() > 1e-12 || !(s.t1 > s.t0) {
                return Err(Error::spec(format!(
                    "family `{}`: segments must tile [0, 1] in order",
                    self.label
                )));
            }
            for (_, c) in s.form.terms() {
                for v in c.variables() {
                    if v != PARAM && !chart.coords.contains(&v) {
                        return Err(Error::UnknownCoordinate(v));
                    }
                }
            }
            t = s.t1;
        }
        if (t - 1.0).abs() > 1e-12 {
            return Err(Error::spec(format!(
                "family `{}`: segments end at {t}, not 1",
                self.label
            )));
        }
        Ok(())
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.segments[0].form.chart()
    }

    /// The member of segment `i` at global time `t`.
    pub fn segment_at(&self, i: usize, t: f64) -> Result<DifferentialForm> {
        let s = self
            .segments
            .get(i)
            .ok_or_else(|| Error::spec(format!("family `{}` has no segment {i}", self.label)))?;
        let local = (t - s.t0) / (s.t1 - s.t0);
        Ok(s.form.substitute(PARAM, &ScalarExpr::constant(local)))
    }

    pub fn form_at(&self, t: f64) -> Result<DifferentialForm> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::spec(format!("t = {t} lies outside [0, 1]")));
        }
        let i = self
            .segments
            .iter()
            .position(|s| t <= s.t1)
            .unwrap_or(self.segments.len() - 1);
        self.segment_at(i, t)
    }
}

/// `μₜ = (1 − t + t/h) αₜ`.
pub fn normalize_family(
    family: &ContactFamily,
    h: &ScalarExpr,
    grid: &SampleGrid,
) -> Result<ContactFamily> {
    let chart = family.chart();
    let ch = h.compile(&chart.coords)?;
    let (min, at) = grid.scan_min(|p| Ok(ch.eval(p)))?;
    if !(min > 0.0) {
        return Err(Error::spec(format!(
            "normalizing function must be positive, found {min} at {at:?}"
        )));
    }
    let segments = family
        .segments
        .iter()
        .map(|s| {
            let big_t = ScalarExpr::constant(s.t0)
                + ScalarExpr::constant(s.t1 - s.t0) * ScalarExpr::var(PARAM);
            let factor = ScalarExpr::one() - big_t.clone() + big_t / h.clone();
            FamilySegment {
                t0: s.t0,
                t1: s.t1,
                form: s.form.scale(&factor),
            }
        })
        .collect();
    ContactFamily::from_segments(&format!("{} normalized", family.label), segments)
}

/// Runs [`verify_contact`] at `t_samples` evenly spaced times.
pub fn verify_family_contact(
    family: &ContactFamily,
    grid: &SampleGrid,
    t_samples: usize,
    threshold: f64,
) -> Result<PositivityReport> {
    if t_samples < 2 {
        return Err(Error::spec("a family needs at least 2 t-samples"));
    }
    let parts = (0..t_samples)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / (t_samples - 1) as f64;
            let mut rep = verify_contact(&family.form_at(t)?, grid, threshold)?;
            rep.t = Some(t);
            rep.quantity = format!("contact density at t = {t}");
            Ok(rep)
        })
        .collect::<Result<Vec<_>>>()?;
    PositivityReport::combine(&format!("family {}", family.label), parts)
}

/// Base families, one per piece of a fibration.
pub type BaseFamily = Vec<ContactFamily>;

fn base_at(mus: &BaseFamily, t: f64) -> Result<Vec<DifferentialForm>> {
    mus.iter().map(|f| f.form_at(t)).collect()
}

fn check_base_family(spec: &FibrationSpec, mus: &BaseFamily) -> Result<()> {
    if mus.len() != spec.pieces.len() {
        return Err(Error::spec(format!(
            "{} base families for {} pieces",
            mus.len(),
            spec.pieces.len()
        )));
    }
    for (f, p) in mus.iter().zip(&spec.pieces) {
        if **f.chart() != **p.chart() {
            return Err(Error::ChartMismatch {
                expected: p.chart().name.clone(),
                found: f.chart().name.clone(),
            });
        }
    }
    Ok(())
}

/// The fibration with its base form replaced by the member at `t`.
pub fn spec_at(spec: &FibrationSpec, mus: &BaseFamily, t: f64) -> Result<FibrationSpec> {
    check_base_family(spec, mus)?;
    let mut out = spec.clone();
    for (p, mu) in out.pieces.iter_mut().zip(base_at(mus, t)?) {
        p.mu = mu;
    }
    Ok(out)
}

/// Largest admissible K over `t_samples` members of the base family.
pub fn upper_k(
    spec: &FibrationSpec,
    mus: &BaseFamily,
    per_axis: usize,
    t_samples: usize,
    threshold: f64,
) -> Result<f64> {
    let ks = (0..t_samples)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / (t_samples.max(2) - 1) as f64;
            Ok(find_admissible_k(&spec_at(spec, mus, t)?, per_axis, threshold)?.k)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ks.into_iter().fold(0.0, f64::max))
}

/// `Λₜ` on one region of the total space.
#[derive(Clone, Debug)]
pub struct RegionFamily {
    pub name: String,
    pub family: ContactFamily,
}

/// `Λₜ = λ¹_{3t}, λ²_{3t−1}, λ³_{3t−2}` on the thirds of `[0, 1]`, per region.
pub fn concatenate_lambda(
    mus: &BaseFamily,
    spec: &FibrationSpec,
    k0: f64,
    k1: f64,
    k: f64,
) -> Result<Vec<RegionFamily>> {
    check_base_family(spec, mus)?;
    if k < k0.max(k1) {
        return Err(Error::spec(format!(
            "K = {k} is below max(K0, K1) = {}",
            k0.max(k1)
        )));
    }
    let t = ScalarExpr::var(PARAM);
    let lerp = |a: f64, b: f64| ScalarExpr::constant(a) + ScalarExpr::constant(b - a) * t.clone();
    let mu0 = base_at(mus, 0.0)?;
    let mu1 = base_at(mus, 1.0)?;
    let mut mut_ = Vec::new();
    for f in mus {
        if f.segments.len() != 1 {
            return Err(Error::spec(format!(
                "base family `{}` must be a single segment",
                f.label
            )));
        }
        mut_.push(f.segments[0].form.clone());
    }
    let branches = [
        assemble_with(spec, &lerp(k0, k), &mu0)?,
        assemble_with(spec, &ScalarExpr::constant(k), &mut_)?,
        assemble_with(spec, &lerp(k, k1), &mu1)?,
    ];
    let thirds = [(0.0, 1.0 / 3.0), (1.0 / 3.0, 2.0 / 3.0), (2.0 / 3.0, 1.0)];
    (0..branches[0].regions.len())
        .map(|r| {
            let segments = branches
                .iter()
                .zip(thirds)
                .map(|(b, (t0, t1))| FamilySegment {
                    t0,
                    t1,
                    form: b.regions[r].sigma.clone(),
                })
                .collect();
            let name = branches[0].regions[r].name.clone();
            Ok(RegionFamily {
                family: ContactFamily::from_segments(&format!("Lambda on {name}"), segments)?,
                name,
            })
        })
        .collect()
}

/// The assembled forms `σ₀`, `σ₁` at the family endpoints.
pub fn endpoint_forms(
    spec: &FibrationSpec,
    mus: &BaseFamily,
    k0: f64,
    k1: f64,
) -> Result<(Vec<DifferentialForm>, Vec<DifferentialForm>)> {
    let s0 = assemble_sigma(&spec_at(spec, mus, 0.0)?, k0)?;
    let s1 = assemble_sigma(&spec_at(spec, mus, 1.0)?, k1)?;
    Ok((
        s0.regions.into_iter().map(|r| r.sigma).collect(),
        s1.regions.into_iter().map(|r| r.sigma).collect(),
    ))
}

/// Contactness of `Λₜ` on every region at every sampled `t`.
pub fn verify_bundle_family(
    families: &[RegionFamily],
    per_axis: usize,
    t_samples: usize,
    threshold: f64,
) -> Result<PositivityReport> {
    let parts = families
        .iter()
        .map(|rf| {
            let grid = SampleGrid::uniform(rf.family.chart(), per_axis)?;
            let mut rep = verify_family_contact(&rf.family, &grid, t_samples, threshold)?;
            rep.quantity = format!("family on {}", rf.name);
            Ok(rep)
        })
        .collect::<Result<Vec<_>>>()?;
    PositivityReport::combine("bundle family", parts)
}

/// Largest coefficient difference between two forms over a grid.
pub fn max_coeff_difference(
    a: &DifferentialForm,
    b: &DifferentialForm,
    grid: &SampleGrid,
) -> Result<f64> {
    let d = a.sub(b)?.compile()?;
    Ok(grid.scan_max(|p| Ok(d.eval(p).max_abs()))?.0)
}

/// `(1 + a cos(θ − 2πt)) dθ` on each piece chart with coordinate `coord`.
pub fn rotating_base_family(spec: &FibrationSpec, coord: &str, a: f64) -> Result<BaseFamily> {
    spec.pieces
        .iter()
        .map(|p| {
            let src = format!("(1 + {a}*cos({coord} - 2*pi*t))*d{coord}");
            ContactFamily::single(
                &format!("rotating on {}", p.name),
                DifferentialForm::parse(p.chart(), &src)?,
            )
        })
        .collect()
}
