//! Contact forms on contact symplectic fibrations presented by base pieces
//! glued along collars: `σ = Kμ + β + f dΨ`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::contact::{verify_contact, verify_exact_symplectic};
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::form::{DifferentialForm, ExteriorElement};
use crate::grid::{PositivityReport, SampleGrid};
use crate::map::SmoothMap;

pub const DEFAULT_EPSILON: f64 = 0.2;
pub const DEFAULT_DELTA: f64 = 0.1;
/// The K search gives up beyond this value.
pub const K_LIMIT: f64 = 1099511627776.0; // 2^40
/// Ratio at which the downward K bisection stops.
pub const K_RATIO: f64 = 1.1;
pub const DEFAULT_SLICES: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    /// `≡ 1` on `(−δ, δ)`, `≡ 0` near `±ε`.
    TwoSided,
    /// `≡ 1` on `(−δ, ε]`, `≡ 0` near `−ε`.
    OneSided,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub epsilon: f64,
    pub delta: f64,
    pub kind: CutoffKind,
}

impl CutoffProfile {
    pub fn new(epsilon: f64, delta: f64, kind: CutoffKind) -> Result<Self> {
        if !(epsilon > 0.0 && delta > 0.0 && delta < epsilon) {
            return Err(Error::spec(format!(
                "cutoff needs 0 < δ < ε, got δ = {delta}, ε = {epsilon}"
            )));
        }
        Ok(CutoffProfile {
            epsilon,
            delta,
            kind,
        })
    }
}

/// The cutoff as an expression in `x`. It vanishes identically from
/// `ε_z = ε − (ε − δ)/4` outward.
pub fn make_cutoff(profile: &CutoffProfile, x: &ScalarExpr) -> Result<ScalarExpr> {
    let p = CutoffProfile::new(profile.epsilon, profile.delta, profile.kind)?;
    let ez = p.epsilon - (p.epsilon - p.delta) / 4.0;
    let w = ScalarExpr::constant(ez - p.delta);
    let ez = ScalarExpr::constant(ez);
    let rise = ((&ez + x) / &w).step();
    Ok(match p.kind {
        CutoffKind::OneSided => rise,
        CutoffKind::TwoSided => ((&ez - x) / &w).step() * rise,
    })
}

/// A base piece `Wⁱ` with the base contact form written on its chart.
#[derive(Clone, Debug)]
pub struct Piece {
    pub name: String,
    pub mu: DifferentialForm,
}

impl Piece {
    pub fn chart(&self) -> &Arc<Chart> {
        self.mu.chart()
    }
}

/// An earlier collar's cutoff carried into a later one (`fᵢ = gᵢ fᵢ₋₁`).
#[derive(Clone, Debug)]
pub struct Inherited {
    pub collar: usize,
    /// The earlier collar's normal coordinate, in this collar's coordinates.
    pub normal: ScalarExpr,
}

/// A collar `H × [−ε, ε]` around a hypersurface where pieces meet. Its
/// chart carries the normal coordinate; the side `normal > 0` lies in the
/// earlier pieces.
#[derive(Clone, Debug)]
pub struct Collar {
    pub name: String,
    pub chart: Arc<Chart>,
    pub normal: String,
    pub delta: f64,
    pub kind: CutoffKind,
    /// Pieces on either side, earlier first.
    pub joins: (usize, usize),
    /// Embedding into the chart of the piece `embed_piece`.
    pub embed: SmoothMap,
    pub embed_piece: usize,
    /// `Ψ` over collar and fiber coordinates.
    pub potential: ScalarExpr,
    pub inherits: Vec<Inherited>,
}

impl Collar {
    pub fn epsilon(&self) -> Result<f64> {
        let i = self.chart.index_of(&self.normal)?;
        let (lo, hi) = self.chart.bounds[i];
        if (lo + hi).abs() > 1e-12 {
            return Err(Error::spec(format!(
                "collar `{}`: normal coordinate must range over [−ε, ε], got [{lo}, {hi}]",
                self.name
            )));
        }
        Ok(hi)
    }

    pub fn profile(&self) -> Result<CutoffProfile> {
        CutoffProfile::new(self.epsilon()?, self.delta, self.kind)
    }
}

/// Declares that two collars overlap through `map` (first chart → second
/// chart); their potentials must agree there.
#[derive(Clone, Debug)]
pub struct Overlap {
    pub first: usize,
    pub second: usize,
    pub map: SmoothMap,
}

#[derive(Clone, Debug)]
pub struct FibrationSpec {
    pub name: String,
    pub fiber: Arc<Chart>,
    pub beta: DifferentialForm,
    pub pieces: Vec<Piece>,
    pub collars: Vec<Collar>,
    pub overlaps: Vec<Overlap>,
    pub horizontal_boundary_trivial: bool,
    /// `g ≥ 0` on fiber coordinates marks a neighborhood of `∂F`.
    pub boundary_neighborhood: Option<ScalarExpr>,
}

const AGREEMENT_TOL: f64 = 1e-10;
const CONSTANT_TOL: f64 = 1e-12;
const CHECK_PER_AXIS: usize = 9;

impl FibrationSpec {
    pub fn base_dim(&self) -> usize {
        self.pieces.first().map_or(0, |p| p.chart().dim())
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber.dim()
    }

    /// Structural checks plus the numeric input obligations on potentials.
    /// Contactness of `μ` is not checked here; a non-contact base shows up
    /// as a failed K search.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::spec(format!("fibration `{}`: {m}", self.name)));
        if self.pieces.is_empty() {
            return bad("no base pieces".into());
        }
        if self.beta.degree() != 1 || **self.beta.chart() != *self.fiber {
            return bad("β must be a 1-form on the fiber chart".into());
        }
        if self.fiber.dim() % 2 == 1 {
            return bad("fiber dimension must be even".into());
        }
        let bdim = self.base_dim();
        if bdim % 2 == 0 {
            return bad("base dimension must be odd".into());
        }
        for p in &self.pieces {
            if p.chart().dim() != bdim || p.mu.degree() != 1 {
                return bad(format!("piece `{}` must carry a 1-form on a {bdim}-chart", p.name));
            }
            self.check_disjoint(p.chart())?;
        }
        for (i, c) in self.collars.iter().enumerate() {
            let who = format!("collar `{}`", c.name);
            if c.chart.dim() != bdim {
                return bad(format!("{who} chart must have dimension {bdim}"));
            }
            self.check_disjoint(&c.chart)?;
            c.profile()?;
            let (a, b) = c.joins;
            if !(a < b && b < self.pieces.len()) {
                return bad(format!("{who} joins invalid pieces ({a}, {b})"));
            }
            if c.embed_piece >= self.pieces.len() || **c.embed.source() != *c.chart {
                return bad(format!("{who} embedding has the wrong source or piece"));
            }
            if **c.embed.target() != **self.pieces[c.embed_piece].chart() {
                return bad(format!("{who} embedding must land in its piece chart"));
            }
            for v in c.potential.variables() {
                if !c.chart.coords.contains(&v) && !self.fiber.coords.contains(&v) {
                    return Err(Error::UnknownCoordinate(v));
                }
            }
            for inh in &c.inherits {
                if inh.collar >= i {
                    return bad(format!("{who} may only inherit from earlier collars"));
                }
                for v in inh.normal.variables() {
                    if !c.chart.coords.contains(&v) {
                        return Err(Error::UnknownCoordinate(v));
                    }
                }
            }
        }
        for k in 1..self.pieces.len() {
            if !self.collars.iter().any(|c| c.joins.1 == k) {
                return bad(format!(
                    "piece `{}` is not attached to earlier pieces by any collar",
                    self.pieces[k].name
                ));
            }
        }
        if self.horizontal_boundary_trivial {
            let g = self.boundary_neighborhood.as_ref().ok_or_else(|| {
                Error::spec("horizontal boundary triviality needs a boundary neighborhood")
            })?;
            for v in g.variables() {
                if !self.fiber.coords.contains(&v) {
                    return Err(Error::UnknownCoordinate(v));
                }
            }
            self.check_constant_near_boundary(g)?;
        }
        self.check_overlaps()
    }

    fn check_disjoint(&self, chart: &Chart) -> Result<()> {
        for c in &chart.coords {
            if self.fiber.coords.contains(c) {
                return Err(Error::spec(format!(
                    "coordinate `{c}` is used by both `{}` and the fiber",
                    chart.name
                )));
            }
        }
        Ok(())
    }

    fn check_constant_near_boundary(&self, g: &ScalarExpr) -> Result<()> {
        for c in &self.collars {
            let chart = c.chart.product(&self.fiber)?.shared();
            let grid = SampleGrid::uniform(&chart, CHECK_PER_AXIS)?;
            let partials = chart
                .coords
                .iter()
                .map(|v| c.potential.diff(v).compile(&chart.coords))
                .collect::<Result<Vec<_>>>()?;
            let g = g.compile(&chart.coords)?;
            let (worst, at) = grid.scan_max(|p| {
                Ok(if g.eval(p) >= 0.0 {
                    partials.iter().map(|d| d.eval(p).abs()).fold(0.0, f64::max)
                } else {
                    0.0
                })
            })?;
            if worst > CONSTANT_TOL {
                return Err(Error::spec(format!(
                    "potential of collar `{}` is not constant near the fiber boundary \
                     (|dΨ| = {worst:e} at {at:?})",
                    c.name
                )));
            }
        }
        Ok(())
    }

    fn check_overlaps(&self) -> Result<()> {
        for o in &self.overlaps {
            let (a, b) = match (self.collars.get(o.first), self.collars.get(o.second)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::spec("overlap refers to a missing collar")),
            };
            if **o.map.source() != *a.chart || **o.map.target() != *b.chart {
                return Err(Error::spec(format!(
                    "overlap map must go from `{}` to `{}`",
                    a.chart.name, b.chart.name
                )));
            }
            let mut sub: std::collections::HashMap<String, ScalarExpr> = b
                .chart
                .coords
                .iter()
                .cloned()
                .zip(o.map.components().iter().cloned())
                .collect();
            for f in &self.fiber.coords {
                sub.insert(f.clone(), ScalarExpr::var(f));
            }
            let moved = b.potential.substitute(&sub);
            let chart = a.chart.product(&self.fiber)?.shared();
            let grid = SampleGrid::uniform(&chart, CHECK_PER_AXIS)?;
            let pa = a.potential.compile(&chart.coords)?;
            let pb = moved.compile(&chart.coords)?;
            let nb = a.chart.dim();
            let (worst, at) = grid.scan_max(|p| {
                let image = o.map.apply(&p[..nb])?;
                Ok(if b.chart.contains(&image, 1e-12) {
                    (pa.eval(p) - pb.eval(p)).abs()
                } else {
                    0.0
                })
            })?;
            if worst > AGREEMENT_TOL {
                return Err(Error::spec(format!(
                    "potentials of `{}` and `{}` differ by {worst:e} at {at:?}",
                    a.name, b.name
                )));
            }
        }
        Ok(())
    }

    /// The cumulative cutoff `fᵢ` of collar `i`, in its own coordinates.
    pub fn cutoff(&self, i: usize) -> Result<ScalarExpr> {
        let c = &self.collars[i];
        let mut f = make_cutoff(&c.profile()?, &ScalarExpr::var(&c.normal))?;
        for inh in &c.inherits {
            let prev = &self.collars[inh.collar];
            f = f * make_cutoff(&prev.profile()?, &inh.normal)?;
        }
        Ok(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Piece,
    Collar,
}

/// One chart of the total space with its part of the assembled form.
#[derive(Clone, Debug)]
pub struct Region {
    pub name: String,
    pub kind: RegionKind,
    /// Base coordinates first, then fiber coordinates.
    pub chart: Arc<Chart>,
    pub base_dim: usize,
    pub sigma: DifferentialForm,
    /// `Kμ + β` on the same chart.
    pub product: DifferentialForm,
    pub cutoff: Option<ScalarExpr>,
}

#[derive(Clone, Debug)]
pub struct BundleContactForm {
    pub k: ScalarExpr,
    pub regions: Vec<Region>,
}

/// `σ = μ + β` on the product chart.
pub fn product_contact(mu: &DifferentialForm, beta: &DifferentialForm) -> Result<DifferentialForm> {
    if mu.chart().dim() % 2 == 0 || mu.degree() != 1 {
        return Err(Error::Dimension(format!(
            "μ must be a 1-form on an odd-dimensional chart, `{}` has dimension {}",
            mu.chart().name,
            mu.chart().dim()
        )));
    }
    if beta.chart().dim() % 2 == 1 || beta.degree() != 1 {
        return Err(Error::Dimension(format!(
            "β must be a 1-form on an even-dimensional chart, `{}` has dimension {}",
            beta.chart().name,
            beta.chart().dim()
        )));
    }
    let chart = mu.chart().product(beta.chart())?.shared();
    mu.extend_to(&chart)?.add(&beta.extend_to(&chart)?)
}

fn orientation_sign(map: &SmoothMap) -> Result<i8> {
    let det = map.jacobian_at(&map.source().center())?.determinant();
    if det == 0.0 || !det.is_finite() {
        return Err(Error::spec(format!(
            "embedding of `{}` is singular at its center",
            map.source().name
        )));
    }
    Ok(if det > 0.0 { 1 } else { -1 } * map.target().orientation)
}

/// Assembles `Kμ + β + fᵢ dΨᵢ`; `k` and the per-piece base forms may be
/// symbolic (e.g. in a family parameter).
pub fn assemble_with(
    spec: &FibrationSpec,
    k: &ScalarExpr,
    mus: &[DifferentialForm],
) -> Result<BundleContactForm> {
    spec.validate()?;
    if mus.len() != spec.pieces.len() {
        return Err(Error::spec(format!(
            "{} base forms for {} pieces",
            mus.len(),
            spec.pieces.len()
        )));
    }
    for (m, p) in mus.iter().zip(&spec.pieces) {
        if **m.chart() != **p.chart() || m.degree() != 1 {
            return Err(Error::ChartMismatch {
                expected: p.chart().name.clone(),
                found: m.chart().name.clone(),
            });
        }
    }
    let bdim = spec.base_dim();
    let mut regions = Vec::new();
    for (p, mu) in spec.pieces.iter().zip(mus) {
        let chart = p.chart().product(&spec.fiber)?.shared();
        let sigma = mu
            .scale(k)
            .extend_to(&chart)?
            .add(&spec.beta.extend_to(&chart)?)?;
        regions.push(Region {
            name: p.name.clone(),
            kind: RegionKind::Piece,
            chart,
            base_dim: bdim,
            product: sigma.clone(),
            sigma,
            cutoff: None,
        });
    }
    for (i, c) in spec.collars.iter().enumerate() {
        let oriented = (*c.chart)
            .clone()
            .with_orientation(orientation_sign(&c.embed)?)?
            .shared();
        let embed = SmoothMap::new(&oriented, c.embed.target(), c.embed.components().to_vec())?;
        let mu = embed.pullback(&mus[c.embed_piece])?;
        let chart = oriented.product(&spec.fiber)?.shared();
        let product = mu
            .scale(k)
            .extend_to(&chart)?
            .add(&spec.beta.extend_to(&chart)?)?;
        let f = spec.cutoff(i)?;
        let psi = DifferentialForm::scalar(&chart, c.potential.clone()).d();
        let sigma = product.add(&psi.scale(&f))?;
        regions.push(Region {
            name: c.name.clone(),
            kind: RegionKind::Collar,
            chart,
            base_dim: bdim,
            sigma,
            product,
            cutoff: Some(f),
        });
    }
    Ok(BundleContactForm {
        k: k.clone(),
        regions,
    })
}

pub fn assemble_sigma(spec: &FibrationSpec, k: f64) -> Result<BundleContactForm> {
    if !(k > 0.0) {
        return Err(Error::spec(format!("K must be positive, got {k}")));
    }
    let mus: Vec<DifferentialForm> = spec.pieces.iter().map(|p| p.mu.clone()).collect();
    assemble_with(spec, &ScalarExpr::constant(k), &mus)
}

/// Contactness of every region of an assembled form.
pub fn verify_bundle_contact(
    bundle: &BundleContactForm,
    per_axis: usize,
    threshold: f64,
) -> Result<PositivityReport> {
    let parts = bundle
        .regions
        .par_iter()
        .map(|r| {
            let grid = SampleGrid::uniform(&r.chart, per_axis)?;
            let mut rep = verify_contact(&r.sigma, &grid, threshold)?;
            rep.quantity = format!("contact density on {}", r.name);
            Ok(rep)
        })
        .collect::<Result<Vec<_>>>()?;
    PositivityReport::combine("bundle contact density", parts)
}

#[derive(Clone, Debug)]
pub struct KSearch {
    pub k: f64,
    pub report: PositivityReport,
    /// Every K tried, with its pass/fail outcome, in order.
    pub trials: Vec<(f64, bool)>,
}

/// Smallest tried K (doubling from 1, then bisecting down to within
/// [`K_RATIO`]) for which the assembled form is contact everywhere.
pub fn find_admissible_k(spec: &FibrationSpec, per_axis: usize, threshold: f64) -> Result<KSearch> {
    let mut trials = Vec::new();
    let mut try_k = |k: f64| -> Result<PositivityReport> {
        let rep = verify_bundle_contact(&assemble_sigma(spec, k)?, per_axis, threshold)?;
        trials.push((k, rep.passed));
        Ok(rep)
    };
    let mut k = 1.0;
    let mut report = try_k(k)?;
    while !report.passed {
        k *= 2.0;
        if k > K_LIMIT {
            return Err(Error::DominanceNotReached(K_LIMIT));
        }
        report = try_k(k)?;
    }
    if k > 1.0 {
        let mut lo = k / 2.0;
        while k / lo > K_RATIO {
            let mid = (lo * k).sqrt();
            let rep = try_k(mid)?;
            if rep.passed {
                k = mid;
                report = rep;
            } else {
                lo = mid;
            }
        }
    }
    Ok(KSearch { k, report, trials })
}

/// Restriction of a form to the fiber over the base point `b`: base
/// coordinates frozen, base differentials dropped.
pub fn restrict_to_fiber(
    sigma: &DifferentialForm,
    base_dim: usize,
    b: &[f64],
    fiber: &Arc<Chart>,
) -> Result<DifferentialForm> {
    let chart = sigma.chart();
    let sub: std::collections::HashMap<String, ScalarExpr> = chart.coords[..base_dim]
        .iter()
        .cloned()
        .zip(b.iter().map(|v| ScalarExpr::constant(*v)))
        .collect();
    let mut elem = ExteriorElement::zero(fiber.dim(), sigma.degree());
    for (idx, c) in sigma.terms() {
        if idx.iter().any(|&i| i < base_dim) {
            continue;
        }
        let mut mask = 0u32;
        for i in idx {
            mask |= 1 << (i - base_dim);
        }
        elem.insert(mask, c.substitute(&sub));
    }
    Ok(DifferentialForm::from_element(fiber, elem))
}

fn slice_points(region: &Region, count: usize) -> Result<Vec<Vec<f64>>> {
    let base = Chart {
        name: format!("{} base", region.name),
        coords: region.chart.coords[..region.base_dim].to_vec(),
        bounds: region.chart.bounds[..region.base_dim].to_vec(),
        periodic: region.chart.periodic[..region.base_dim].to_vec(),
        orientation: 1,
        radial: region.chart.radial[..region.base_dim].to_vec(),
    }
    .validated()?
    .shared();
    let mut per_axis = 1;
    while (per_axis as f64).powi(region.base_dim as i32) < count as f64 {
        per_axis += 1;
    }
    let grid = SampleGrid::uniform(&base, per_axis)?;
    let pts = grid.points();
    let stride = (pts.len() as f64 / count as f64).max(1.0);
    Ok((0..count.min(pts.len()))
        .map(|k| pts[((k as f64) * stride) as usize].clone())
        .collect())
}

/// Nondegeneracy of `dσ` on fiber slices over `slices` base points spread
/// across the regions.
pub fn verify_compatibility(
    bundle: &BundleContactForm,
    spec: &FibrationSpec,
    slices: usize,
    per_axis: usize,
    threshold: f64,
) -> Result<PositivityReport> {
    let per_region = slices.div_ceil(bundle.regions.len().max(1)).max(1);
    let grid = SampleGrid::uniform(&spec.fiber, per_axis)?;
    let mut parts = Vec::new();
    for r in &bundle.regions {
        for b in slice_points(r, per_region)? {
            let slice = restrict_to_fiber(&r.sigma, r.base_dim, &b, &spec.fiber)?;
            let mut rep = verify_exact_symplectic(&slice, &grid, None, threshold)?;
            rep.quantity = format!("fiber over {b:?} in {}", r.name);
            parts.push(rep);
        }
    }
    PositivityReport::combine("fiber compatibility", parts)
}

/// Largest `|d(σ|_F − β)|` over fiber slices of a region; zero when the
/// fiber correction is closed.
pub fn fiber_correction_residual(
    region: &Region,
    spec: &FibrationSpec,
    slices: usize,
    per_axis: usize,
) -> Result<f64> {
    let grid = SampleGrid::uniform(&spec.fiber, per_axis)?;
    let mut worst: f64 = 0.0;
    for b in slice_points(region, slices)? {
        let slice = restrict_to_fiber(&region.sigma, region.base_dim, &b, &spec.fiber)?;
        let d = slice.sub(&spec.beta)?.d().compile()?;
        let (m, _) = grid.scan_max(|p| Ok(d.eval(p).max_abs()))?;
        worst = worst.max(m);
    }
    Ok(worst)
}

/// Largest coefficient of `σ − (Kμ + β)` over the declared neighborhood of
/// the horizontal boundary.
pub fn boundary_deviation(
    bundle: &BundleContactForm,
    spec: &FibrationSpec,
    per_axis: usize,
) -> Result<f64> {
    let g = spec
        .boundary_neighborhood
        .as_ref()
        .ok_or_else(|| Error::spec("no boundary neighborhood declared"))?;
    let mut worst: f64 = 0.0;
    for r in &bundle.regions {
        let diff = r.sigma.sub(&r.product)?.compile()?;
        let g = g.compile(&r.chart.coords)?;
        let grid = SampleGrid::uniform(&r.chart, per_axis)?;
        let (m, _) = grid.scan_max(|p| {
            Ok(if g.eval(p) >= 0.0 {
                diff.eval(p).max_abs()
            } else {
                0.0
            })
        })?;
        worst = worst.max(m);
    }
    Ok(worst)
}

/// The square `[−1, 1]²` with `β = ½(x dy − y dx)`.
pub fn square_fiber() -> Result<(Arc<Chart>, DifferentialForm)> {
    let fiber = Chart::new("F", &["x", "y"], &[(-1.0, 1.0), (-1.0, 1.0)])?.shared();
    let beta = DifferentialForm::parse(&fiber, "0.5*(x*dy - y*dx)")?;
    Ok((fiber, beta))
}

/// Mapping torus over the circle, cut into the arcs `[0, π]` and `[π, 2π]`.
/// The monodromy at `θ = π` has potential `c·y` (cut off away from the
/// fiber boundary when `boundary_trivial`); the seam at `θ = 0` is trivial.
pub fn mapping_torus_spec(c: f64, boundary_trivial: bool) -> Result<FibrationSpec> {
    use std::f64::consts::PI;
    let (fiber, beta) = square_fiber()?;
    let w1 = Chart::new("W1", &["theta"], &[(0.0, PI)])?.shared();
    let w2 = Chart::new("W2", &["theta"], &[(PI, 2.0 * PI)])?.shared();
    let pieces = vec![
        Piece {
            name: "W1".into(),
            mu: DifferentialForm::parse(&w1, "dtheta")?,
        },
        Piece {
            name: "W2".into(),
            mu: DifferentialForm::parse(&w2, "dtheta")?,
        },
    ];
    let h = Chart::new("H", &["s"], &[(-DEFAULT_EPSILON, DEFAULT_EPSILON)])?.shared();
    let psi = if boundary_trivial {
        crate::parse::parse_expr(&format!("{c}*y*(1 - step((x^2 + y^2 - 0.25)/0.24))"))?
    } else {
        ScalarExpr::constant(c) * ScalarExpr::var("y")
    };
    let collar = |name: &str, embed: &str, potential: ScalarExpr| -> Result<Collar> {
        Ok(Collar {
            name: name.into(),
            chart: h.clone(),
            normal: "s".into(),
            delta: DEFAULT_DELTA,
            kind: CutoffKind::TwoSided,
            joins: (0, 1),
            embed: SmoothMap::parse(&h, &w1, &[embed])?,
            embed_piece: 0,
            potential,
            inherits: vec![],
        })
    };
    Ok(FibrationSpec {
        name: "mapping_torus".into(),
        fiber,
        beta,
        pieces,
        collars: vec![
            collar("H_pi", "pi - s", psi)?,
            collar("H_0", "s", ScalarExpr::zero())?,
        ],
        overlaps: vec![],
        horizontal_boundary_trivial: boundary_trivial,
        boundary_neighborhood: if boundary_trivial {
            Some(crate::parse::parse_expr("x^2 + y^2 - 0.64")?)
        } else {
            None
        },
    })
}
