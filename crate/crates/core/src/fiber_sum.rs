//! Fiber connected sum of two fibrations along fibers sitting over Darboux
//! balls: the parity-dependent map `Φ`, the annulus identification `Υ`, and
//! the summed fibration.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use crate::bundle::{Collar, CutoffKind, FibrationSpec, Piece};
use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::form::DifferentialForm;
use crate::grid::{PositivityReport, SampleGrid};
use crate::map::SmoothMap;

pub const DEFAULT_EPSILON: f64 = 0.4;
/// Agreement required between `σ₁` and `(Υ|_{S₁})*σ₂`.
pub const GLUING_TOL: f64 = 1e-9;
pub const SPHERE_PER_AXIS: usize = 15;
const FIBER_PER_AXIS: usize = 3;
/// Polar angles stay this far from the coordinate singularities.
const ANGLE_MARGIN: f64 = 0.1;
pub const DEFAULT_COLLAR_HALFWIDTH: f64 = 0.04;

fn theta(k: usize) -> String {
    format!("theta{k}")
}

fn radius(k: usize) -> String {
    format!("r{k}")
}

/// Darboux coordinates `(z, r₁, θ₁, …, r_n, θ_n)` on a ball of radius
/// `√3 ε / 2`.
pub fn darboux_chart(name: &str, n: usize, epsilon: f64) -> Result<Chart> {
    if n == 0 {
        return Err(Error::Dimension("Darboux charts need n ≥ 1".into()));
    }
    let outer = 3f64.sqrt() * epsilon / 2.0;
    let mut coords = vec!["z".to_string()];
    let mut bounds = vec![(-outer, outer)];
    for k in 1..=n {
        coords.push(radius(k));
        bounds.push((0.0, outer));
        coords.push(theta(k));
        bounds.push((0.0, TAU));
    }
    let mut c = Chart {
        name: name.to_string(),
        periodic: vec![false; coords.len()],
        radial: vec![false; coords.len()],
        orientation: 1,
        coords,
        bounds,
    };
    for k in 1..=n {
        c = c.with_periodic(&theta(k))?.with_radial(&radius(k))?;
    }
    c.validated()
}

/// `dz + Σ r_k² dθ_k`.
pub fn darboux_form(chart: &Arc<Chart>, n: usize) -> Result<DifferentialForm> {
    let mut src = "dz".to_string();
    for k in 1..=n {
        src += &format!(" + {}^2*d{}", radius(k), theta(k));
    }
    DifferentialForm::parse(chart, &src)
}

/// `(u, v, w) ↦ (x = (u+v)/2, y = (v−u)/2, z = w + u·v/2)` from the chart
/// `(u₁, v₁, …, u_n, v_n, w)` to `(x₁, y₁, …, x_n, y_n, z)`.
pub fn darboux_change(n: usize) -> Result<SmoothMap> {
    if n == 0 {
        return Err(Error::Dimension("the Darboux change needs n ≥ 1".into()));
    }
    let mut src_coords = Vec::new();
    let mut tgt_coords = Vec::new();
    for k in 1..=n {
        src_coords.push(format!("u{k}"));
        src_coords.push(format!("v{k}"));
        tgt_coords.push(format!("x{k}"));
        tgt_coords.push(format!("y{k}"));
    }
    src_coords.push("w".into());
    tgt_coords.push("z".into());
    let b = vec![(-1.0, 1.0); 2 * n + 1];
    fn refs(v: &[String]) -> Vec<&str> {
        v.iter().map(|s| s.as_str()).collect()
    }
    let src = Chart::new("uvw", &refs(&src_coords), &b)?.shared();
    let tgt = Chart::new("xyz", &refs(&tgt_coords), &b)?.shared();
    let mut comps = Vec::new();
    let mut uv = ScalarExpr::zero();
    for k in 1..=n {
        let u = ScalarExpr::var(&format!("u{k}"));
        let v = ScalarExpr::var(&format!("v{k}"));
        comps.push((&u + &v) * 0.5);
        comps.push((&v - &u) * 0.5);
        uv = uv + &u * &v;
    }
    comps.push(ScalarExpr::var("w") + uv * 0.5);
    SmoothMap::new(&src, &tgt, comps)
}

/// The parity-dependent bundle map and its fiber part.
#[derive(Clone, Debug)]
pub struct GluingMaps {
    pub n: usize,
    /// On the Darboux ball.
    pub phi_f: SmoothMap,
    /// On `ball × F`, covering the fiber identification.
    pub phi: SmoothMap,
}

/// `Φ_F(z, r, θ) = (z, −r, θ)` for odd `n`, `(−z, r, −θ)` for even `n`.
pub fn build_phi(
    n: usize,
    ball: &Arc<Chart>,
    fiber: &Arc<Chart>,
    fiber_id: Option<&SmoothMap>,
) -> Result<GluingMaps> {
    if ball.dim() != 2 * n + 1 || ball.coords[0] != "z" {
        return Err(Error::spec(format!(
            "`{}` is not a Darboux chart for n = {n}",
            ball.name
        )));
    }
    let odd = n % 2 == 1;
    let mut comps = Vec::new();
    let z = ScalarExpr::var("z");
    comps.push(if odd { z } else { -z });
    for k in 1..=n {
        let r = ScalarExpr::var(&radius(k));
        let t = ScalarExpr::var(&theta(k));
        comps.push(if odd { -r } else { r });
        comps.push(if odd { t } else { -t });
    }
    let phi_f = SmoothMap::new(ball, ball, comps.clone())?;
    let total = ball.product(fiber)?.shared();
    let fib: Vec<ScalarExpr> = match fiber_id {
        Some(m) => {
            if **m.source() != **fiber || **m.target() != **fiber {
                return Err(Error::spec("fiber identification must map the fiber to itself"));
            }
            m.components().to_vec()
        }
        None => fiber.coords.iter().map(|c| ScalarExpr::var(c)).collect(),
    };
    comps.extend(fib);
    let phi = SmoothMap::new(&total, &total, comps)?;
    Ok(GluingMaps { n, phi_f, phi })
}

/// `‖x‖` in Darboux coordinates.
pub fn ball_norm(n: usize) -> ScalarExpr {
    let mut s = ScalarExpr::var("z").powi(2);
    for k in 1..=n {
        s = s + ScalarExpr::var(&radius(k)).powi(2);
    }
    s.sqrt()
}

/// `h(ρ) = √(ε² − ρ²)`.
pub fn h(epsilon: f64, rho: f64) -> f64 {
    (epsilon * epsilon - rho * rho).sqrt()
}

/// `Υ(p, x) = (p, h(‖x‖)/‖x‖ · Φ_F(x))` on the annulus `ε/2 < ‖x‖ < √3ε/2`.
#[derive(Clone, Debug)]
pub struct Upsilon {
    pub n: usize,
    pub epsilon: f64,
    pub map: SmoothMap,
}

impl Upsilon {
    pub fn inner(&self) -> f64 {
        self.epsilon / 2.0
    }

    pub fn outer(&self) -> f64 {
        3f64.sqrt() * self.epsilon / 2.0
    }

    fn norm_at(&self, p: &[f64]) -> f64 {
        let mut s = p[0] * p[0];
        for k in 1..=self.n {
            s += p[2 * k - 1] * p[2 * k - 1];
        }
        s.sqrt()
    }

    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        let norm = self.norm_at(p);
        if !(norm > self.inner() && norm < self.outer()) {
            return Err(Error::OutsideAnnulus {
                norm,
                lower: self.inner(),
                upper: self.outer(),
            });
        }
        self.map.apply(p)
    }

    /// `‖x‖` of the ball part of a point.
    pub fn norm(&self, p: &[f64]) -> f64 {
        self.norm_at(p)
    }
}

/// Builds `Υ` from `Φ`, as a map from the left `ball × F` chart to the
/// right one.
pub fn build_upsilon(maps: &GluingMaps, epsilon: f64, target: &Arc<Chart>) -> Result<Upsilon> {
    if !(epsilon > 0.0) {
        return Err(Error::spec(format!("ε must be positive, got {epsilon}")));
    }
    let n = maps.n;
    let rho = ball_norm(n);
    let lambda = (ScalarExpr::constant(epsilon * epsilon) - rho.powi(2)).sqrt() / rho;
    let source = maps.phi.source();
    let comps: Vec<ScalarExpr> = maps
        .phi
        .components()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            // z and the radii scale; angles and fiber coordinates do not
            let scaled = i == 0 || (i <= 2 * n && i % 2 == 1);
            if scaled {
                &lambda * c
            } else {
                c.clone()
            }
        })
        .collect();
    if target.coords != source.coords {
        return Err(Error::ChartMismatch {
            expected: source.name.clone(),
            found: target.name.clone(),
        });
    }
    Ok(Upsilon {
        n,
        epsilon,
        map: SmoothMap::new(source, target, comps)?,
    })
}

/// Hyperspherical ball coordinates `(z, r₁, …, r_n)` of radius `rho` at
/// polar angles `a₁ … a_n`.
fn spherical(rho: &ScalarExpr, angles: &[ScalarExpr]) -> (ScalarExpr, Vec<ScalarExpr>) {
    let n = angles.len();
    let z = rho * &angles[0].cos();
    let mut radii = Vec::with_capacity(n);
    let mut prefix = rho * &angles[0].sin();
    for k in 1..n {
        radii.push(&prefix * &angles[k].cos());
        prefix = &prefix * &angles[k].sin();
    }
    radii.push(prefix);
    (z, radii)
}

fn angle_bounds(k: usize) -> (f64, f64) {
    // the first angle spans (0, π); the rest keep every radius positive
    if k == 0 {
        (ANGLE_MARGIN, PI - ANGLE_MARGIN)
    } else {
        (ANGLE_MARGIN, FRAC_PI_2 - ANGLE_MARGIN)
    }
}

fn ball_components(
    n: usize,
    rho: &ScalarExpr,
    angles: &[ScalarExpr],
) -> Vec<ScalarExpr> {
    let (z, radii) = spherical(rho, angles);
    let mut comps = vec![z];
    for k in 1..=n {
        comps.push(radii[k - 1].clone());
        comps.push(ScalarExpr::var(&theta(k)));
    }
    comps
}

fn with_fiber(chart: &Arc<Chart>, fiber: &Arc<Chart>, mut comps: Vec<ScalarExpr>, target: &Arc<Chart>) -> Result<SmoothMap> {
    let total = chart.product(fiber)?.shared();
    comps.extend(fiber.coords.iter().map(|c| ScalarExpr::var(c)));
    SmoothMap::new(&total, target, comps)
}

/// The gluing sphere `‖x‖ = ε/√2` in arc-length latitude coordinates
/// `(s₁, …, s_n, θ₁, …, θ_n)` with `s_k = (ε/√2)·a_k`.
pub fn sphere_chart(n: usize, epsilon: f64) -> Result<Arc<Chart>> {
    let rho0 = epsilon / 2f64.sqrt();
    let mut coords = Vec::new();
    let mut bounds = Vec::new();
    for k in 0..n {
        let (lo, hi) = angle_bounds(k);
        coords.push(format!("s{}", k + 1));
        bounds.push((rho0 * lo, rho0 * hi));
    }
    for k in 1..=n {
        coords.push(theta(k));
        bounds.push((0.0, TAU));
    }
    let refs: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
    let mut c = Chart::new("S", &refs, &bounds)?;
    for k in 1..=n {
        c = c.with_periodic(&theta(k))?;
    }
    Ok(c.shared())
}

/// Inclusion of `S × F` into `ball × F`.
pub fn sphere_inclusion(
    n: usize,
    epsilon: f64,
    fiber: &Arc<Chart>,
    target: &Arc<Chart>,
) -> Result<SmoothMap> {
    let rho0 = epsilon / 2f64.sqrt();
    let sphere = sphere_chart(n, epsilon)?;
    let angles: Vec<ScalarExpr> = (1..=n)
        .map(|k| ScalarExpr::var(&format!("s{k}")) * (1.0 / rho0))
        .collect();
    let comps = ball_components(n, &ScalarExpr::constant(rho0), &angles);
    with_fiber(&sphere, fiber, comps, target)
}

/// Compares `ι*σ₁` with `(Υ ∘ ι)*σ₂` on `S₁ × F`. The report holds the
/// negated largest coefficient difference against `−GLUING_TOL`, so it
/// passes exactly when the residual is below the tolerance.
pub fn verify_gluing_pullback(
    sigma_left: &DifferentialForm,
    sigma_right: &DifferentialForm,
    upsilon: &Upsilon,
    fiber: &Arc<Chart>,
    per_axis: usize,
) -> Result<PositivityReport> {
    let n = upsilon.n;
    let iota = sphere_inclusion(n, upsilon.epsilon, fiber, sigma_left.chart())?;
    let glued = iota.then(&upsilon.map)?;
    if **glued.target() != **sigma_right.chart() {
        return Err(Error::ChartMismatch {
            expected: glued.target().name.clone(),
            found: sigma_right.chart().name.clone(),
        });
    }
    let one = iota.pullback(sigma_left)?;
    let two = glued.pullback(sigma_right)?;
    let diff = one.sub(&two)?.compile()?;
    let chart = iota.source();
    let mut res = vec![per_axis; 2 * n];
    res.extend(vec![FIBER_PER_AXIS; fiber.dim()]);
    let grid = SampleGrid::new(chart, res, vec![])?;
    let (worst, at) = grid.scan_max(|p| Ok(diff.eval(p).max_abs()))?;
    Ok(PositivityReport::new(
        "negated gluing residual",
        -worst,
        at,
        grid.meta(),
        -GLUING_TOL,
        1.0,
    ))
}

/// Two fibrations to be summed along the fibers over their Darboux balls.
#[derive(Clone, Debug)]
pub struct SumSpec {
    pub name: String,
    pub left: FibrationSpec,
    pub right: FibrationSpec,
    /// Pieces holding the Darboux balls.
    pub left_piece: usize,
    pub right_piece: usize,
    pub n: usize,
    pub epsilon: f64,
    pub left_center: Vec<f64>,
    pub right_center: Vec<f64>,
    /// `φ₂ ∘ φ₁⁻¹` on the fiber; identity when absent.
    pub fiber_identification: Option<SmoothMap>,
    /// `ψ` with `φ*β = β + dψ` for a non-identity identification.
    pub fiber_potential: Option<ScalarExpr>,
    pub collar_halfwidth: f64,
}

impl SumSpec {
    pub fn validate(&self) -> Result<()> {
        self.left.validate()?;
        self.right.validate()?;
        if *self.left.fiber != *self.right.fiber
            || !self.left.beta.sub(&self.right.beta)?.simplify().is_zero()
        {
            return Err(Error::spec("both sides must share the fiber model (F, β)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::spec("ε must be positive"));
        }
        let want_right = if self.n % 2 == 1 { 1 } else { -1 };
        for (side, spec, idx, orient) in [
            ("left", &self.left, self.left_piece, 1),
            ("right", &self.right, self.right_piece, want_right),
        ] {
            let piece = spec.pieces.get(idx).ok_or_else(|| {
                Error::spec(format!("{side} side has no piece {idx}"))
            })?;
            let c = piece.chart();
            let model = darboux_chart(&c.name, self.n, self.epsilon)?;
            if c.coords != model.coords {
                return Err(Error::spec(format!(
                    "{side} piece `{}` must use Darboux coordinates {:?}",
                    piece.name, model.coords
                )));
            }
            for (i, (lo, hi)) in model.bounds.iter().enumerate() {
                let (a, b) = c.bounds[i];
                if a > *lo + 1e-12 || b < *hi - 1e-12 {
                    return Err(Error::spec(format!(
                        "{side} piece `{}` does not contain the ball of radius √3ε/2",
                        piece.name
                    )));
                }
            }
            if c.orientation != orient {
                return Err(Error::spec(format!(
                    "{side} piece `{}` must have orientation {orient} for n = {}",
                    piece.name, self.n
                )));
            }
        }
        if self.left.name == self.right.name {
            let d: f64 = self
                .left_center
                .iter()
                .zip(&self.right_center)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            if !(d > 2.0 * self.epsilon) {
                return Err(Error::spec(format!(
                    "the two fibers of `{}` must be disjoint: centers are {d} apart, need > {}",
                    self.left.name,
                    2.0 * self.epsilon
                )));
            }
        }
        if self.fiber_identification.is_some() && self.fiber_potential.is_none() {
            return Err(Error::spec(
                "a non-identity fiber identification needs its potential",
            ));
        }
        let rho0 = self.epsilon / 2f64.sqrt();
        let eta = self.collar_halfwidth;
        if !(eta > 0.0 && rho0 - eta > self.epsilon / 2.0 && rho0 + eta < 3f64.sqrt() * self.epsilon / 2.0)
        {
            return Err(Error::spec(format!(
                "collar half-width {eta} does not fit inside the annulus"
            )));
        }
        Ok(())
    }

    fn ball(&self, right: bool) -> Arc<Chart> {
        let (spec, i) = if right {
            (&self.right, self.right_piece)
        } else {
            (&self.left, self.left_piece)
        };
        spec.pieces[i].chart().clone()
    }

    /// The Darboux-form contact forms `K_jμ_j + β` on `ball × F`.
    pub fn sigmas(&self) -> Result<(DifferentialForm, DifferentialForm)> {
        let l = crate::bundle::product_contact(&self.left.pieces[self.left_piece].mu, &self.left.beta)?;
        let r =
            crate::bundle::product_contact(&self.right.pieces[self.right_piece].mu, &self.right.beta)?;
        Ok((l, r))
    }

    /// `Υ'` from the right side back to the left; identity fiber
    /// identification only.
    pub fn counterpart_upsilon(&self) -> Result<Upsilon> {
        if self.fiber_identification.is_some() {
            return Err(Error::spec("the counterpart map needs the identity fiber identification"));
        }
        let maps = build_phi(self.n, &self.ball(true), &self.right.fiber, None)?;
        let target = self.ball(false).product(&self.left.fiber)?.shared();
        build_upsilon(&maps, self.epsilon, &target)
    }

    pub fn gluing_maps(&self) -> Result<(GluingMaps, Upsilon)> {
        let ball = self.ball(false);
        let maps = build_phi(self.n, &ball, &self.left.fiber, self.fiber_identification.as_ref())?;
        let target = self.ball(true).product(&self.right.fiber)?.shared();
        let ups = build_upsilon(&maps, self.epsilon, &target)?;
        Ok((maps, ups))
    }
}

/// The shell `ε/√2 ≤ ‖x‖ ≤ √3ε/2` of a Darboux ball in coordinates
/// `(rho, a₁, …, a_n, θ₁, …, θ_n)` and its map into the ball.
pub fn shell(n: usize, epsilon: f64, ball: &Arc<Chart>, name: &str) -> Result<SmoothMap> {
    let rho0 = epsilon / 2f64.sqrt();
    let mut coords = vec!["rho".to_string()];
    let mut bounds = vec![(rho0, 3f64.sqrt() * epsilon / 2.0)];
    for k in 0..n {
        coords.push(format!("a{}", k + 1));
        bounds.push(angle_bounds(k));
    }
    for k in 1..=n {
        coords.push(theta(k));
        bounds.push((0.0, TAU));
    }
    let refs: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
    let mut c = Chart::new(name, &refs, &bounds)?;
    for k in 1..=n {
        c = c.with_periodic(&theta(k))?;
    }
    let angles: Vec<ScalarExpr> = (1..=n).map(|k| ScalarExpr::var(&format!("a{k}"))).collect();
    let comps = ball_components(n, &ScalarExpr::var("rho"), &angles);
    let probe = SmoothMap::new(&c.clone().shared(), ball, comps.clone())?;
    let det = probe.jacobian_at(&c.center())?.determinant();
    let sign = if det > 0.0 { 1 } else { -1 } * ball.orientation;
    let c = c.with_orientation(sign)?.shared();
    SmoothMap::new(&c, ball, comps)
}

/// The fibration over the summed base: each Darboux piece becomes its outer
/// shell, and a new collar around the gluing sphere joins the two sides.
/// Fails unless the gluing pullback check passes.
pub fn assemble_summed_fibration(sum: &SumSpec, per_axis: usize) -> Result<FibrationSpec> {
    sum.validate()?;
    let (_, ups) = sum.gluing_maps()?;
    let (sl, sr) = sum.sigmas()?;
    let report = verify_gluing_pullback(&sl, &sr, &ups, &sum.left.fiber, per_axis)?;
    if !report.passed {
        return Err(Error::spec(format!(
            "gluing pullback mismatch {:e} exceeds {GLUING_TOL:e}",
            -report.min_value
        )));
    }
    let n = sum.n;
    let rho0 = sum.epsilon / 2f64.sqrt();
    let mut pieces = Vec::new();
    let shell_piece = |spec: &FibrationSpec, i: usize, tag: &str| -> Result<Piece> {
        let p = &spec.pieces[i];
        let s = shell(n, sum.epsilon, p.chart(), &format!("{}_{tag}", p.name))?;
        Ok(Piece {
            name: s.source().name.clone(),
            mu: s.pullback(&p.mu)?,
        })
    };
    for (i, p) in sum.left.pieces.iter().enumerate() {
        pieces.push(if i == sum.left_piece {
            shell_piece(&sum.left, i, "shell")?
        } else {
            p.clone()
        });
    }
    let offset = pieces.len();
    // the right Darboux piece comes first so it directly follows the seam
    let mut order: Vec<usize> = vec![sum.right_piece];
    order.extend((0..sum.right.pieces.len()).filter(|&i| i != sum.right_piece));
    let new_index = |i: usize| offset + order.iter().position(|&j| j == i).unwrap();
    for &i in &order {
        pieces.push(if i == sum.right_piece {
            shell_piece(&sum.right, i, "shell")?
        } else {
            sum.right.pieces[i].clone()
        });
    }
    let mut collars = sum.left.collars.clone();
    for c in &sum.right.collars {
        let mut c = c.clone();
        let (a, b) = (new_index(c.joins.0), new_index(c.joins.1));
        c.joins = (a.min(b), a.max(b));
        c.embed_piece = new_index(c.embed_piece);
        c.inherits
            .iter_mut()
            .for_each(|inh| inh.collar += sum.left.collars.len());
        if c.embed_piece == new_index(sum.right_piece) {
            return Err(Error::spec(format!(
                "collar `{}` embeds into the Darboux piece, which the sum removes",
                c.name
            )));
        }
        collars.push(c);
    }
    for c in &sum.left.collars {
        if c.embed_piece == sum.left_piece {
            return Err(Error::spec(format!(
                "collar `{}` embeds into the Darboux piece, which the sum removes",
                c.name
            )));
        }
    }
    // seam collar: w = rho − ε/√2, embedded into the left shell
    let eta = sum.collar_halfwidth;
    let left_shell = pieces[sum.left_piece].chart().clone();
    let mut coords = vec!["w".to_string()];
    let mut bounds = vec![(-eta, eta)];
    for (c, b) in left_shell.coords.iter().zip(&left_shell.bounds).skip(1) {
        coords.push(c.clone());
        bounds.push(*b);
    }
    let refs: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
    let mut hc = Chart::new(&format!("{}_seam", sum.name), &refs, &bounds)?;
    for k in 1..=n {
        hc = hc.with_periodic(&theta(k))?;
    }
    let hc = hc.shared();
    let mut comps = vec![ScalarExpr::var("w") + rho0];
    comps.extend(coords[1..].iter().map(|c| ScalarExpr::var(c)));
    let embed = SmoothMap::new(&hc, &left_shell, comps)?;
    collars.push(Collar {
        name: format!("{}_seam", sum.name),
        chart: hc,
        normal: "w".into(),
        delta: eta / 2.0,
        kind: CutoffKind::TwoSided,
        joins: (sum.left_piece, new_index(sum.right_piece)),
        embed,
        embed_piece: sum.left_piece,
        potential: sum.fiber_potential.clone().unwrap_or_else(ScalarExpr::zero),
        inherits: vec![],
    });
    let out = FibrationSpec {
        name: sum.name.clone(),
        fiber: sum.left.fiber.clone(),
        beta: sum.left.beta.clone(),
        pieces,
        collars,
        overlaps: vec![],
        horizontal_boundary_trivial: false,
        boundary_neighborhood: None,
    };
    out.validate()?;
    Ok(out)
}

/// A one-piece fibration over a Darboux ball with the square fiber; for the
/// reversed side the chart is oriented by `-1` and carries `−(dz + Σr²dθ)`.
pub fn darboux_ball_fibration(name: &str, n: usize, epsilon: f64, reversed: bool) -> Result<FibrationSpec> {
    let (fiber, beta) = crate::bundle::square_fiber()?;
    let mut chart = darboux_chart(&format!("U_{name}"), n, epsilon)?;
    if reversed {
        chart = chart.with_orientation(-1)?;
    }
    let chart = chart.shared();
    let mut mu = darboux_form(&chart, n)?;
    if reversed {
        mu = mu.neg();
    }
    Ok(FibrationSpec {
        name: name.to_string(),
        fiber,
        beta,
        pieces: vec![Piece {
            name: format!("U_{name}"),
            mu,
        }],
        collars: vec![],
        overlaps: vec![],
        horizontal_boundary_trivial: false,
        boundary_neighborhood: None,
    })
}

/// Sum of two trivial square-fiber bundles over Darboux balls, using the
/// orientation convention the parity of `n` calls for.
pub fn darboux_sum_spec(n: usize, epsilon: f64) -> Result<SumSpec> {
    let reversed = n % 2 == 0;
    Ok(SumSpec {
        name: format!("sum_n{n}"),
        left: darboux_ball_fibration("E1", n, epsilon, false)?,
        right: darboux_ball_fibration("E2", n, epsilon, reversed)?,
        left_piece: 0,
        right_piece: 0,
        n,
        epsilon,
        left_center: vec![0.0; 2 * n + 1],
        right_center: vec![0.0; 2 * n + 1],
        fiber_identification: None,
        fiber_potential: None,
        collar_halfwidth: DEFAULT_COLLAR_HALFWIDTH,
    })
}

/// Random points of the ball part with `ε/2 < ‖x‖ < √3ε/2`, away from the
/// polar axes.
pub fn annulus_samples(n: usize, epsilon: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (epsilon / 2.0, 3f64.sqrt() * epsilon / 2.0);
    (0..count)
        .map(|_| {
            let rho = rng.gen_range(lo + 1e-3 * epsilon..hi - 1e-3 * epsilon);
            let angles: Vec<f64> = (0..n)
                .map(|k| {
                    let (a, b) = angle_bounds(k);
                    rng.gen_range(a..b)
                })
                .collect();
            let mut p = vec![rho * angles[0].cos()];
            let mut prefix = rho * angles[0].sin();
            let mut radii = Vec::with_capacity(n);
            for a in &angles[1..] {
                radii.push(prefix * a.cos());
                prefix *= a.sin();
            }
            radii.push(prefix);
            for r in radii {
                p.push(r);
                p.push(rng.gen_range(0.0..TAU));
            }
            p
        })
        .collect()
}

/// Pointwise checks on `Φ` and `Υ` at random annulus points.
#[derive(Clone, Debug, PartialEq)]
pub struct GluingInvariants {
    /// Largest `|‖Φ_F(x)‖ − ‖x‖|`.
    pub norm_error: f64,
    /// Largest Jacobian determinant of `Φ_F` in chart coordinates.
    pub max_phi_det: f64,
    /// Largest `|‖Υ(x)‖ − ε/√2|` over points rescaled onto the sphere.
    pub fixed_sphere_error: f64,
    /// Largest deviation of `Υ' ∘ Υ` from the identity; `None` when the
    /// fiber identification is not the identity.
    pub involution_error: Option<f64>,
}

pub fn gluing_invariants(sum: &SumSpec, count: usize, seed: u64) -> Result<GluingInvariants> {
    let (maps, ups) = sum.gluing_maps()?;
    let n = sum.n;
    let rho0 = sum.epsilon / 2f64.sqrt();
    let fiber_center = sum.left.fiber.center();
    let back = match sum.counterpart_upsilon() {
        Ok(c) => Some(ups.map.then(&c.map)?),
        Err(_) => None,
    };
    let mut out = GluingInvariants {
        norm_error: 0.0,
        max_phi_det: f64::NEG_INFINITY,
        fixed_sphere_error: 0.0,
        involution_error: back.as_ref().map(|_| 0.0),
    };
    for x in annulus_samples(n, sum.epsilon, count, seed) {
        let y = maps.phi_f.apply(&x)?;
        out.norm_error = out.norm_error.max((ups.norm(&y) - ups.norm(&x)).abs());
        out.max_phi_det = out.max_phi_det.max(maps.phi_f.jacobian_at(&x)?.determinant());
        let mut full = x.clone();
        full.extend(&fiber_center);
        if let (Some(b), Some(e)) = (&back, out.involution_error.as_mut()) {
            let q = b.apply(&full)?;
            *e = full.iter().zip(&q).fold(*e, |m, (a, b)| m.max((a - b).abs()));
        }
        let scale = rho0 / ups.norm(&x);
        let mut on_sphere = full;
        on_sphere[0] *= scale;
        for k in 1..=n {
            on_sphere[2 * k - 1] *= scale;
        }
        let image = ups.apply(&on_sphere)?;
        out.fixed_sphere_error = out.fixed_sphere_error.max((ups.norm(&image) - rho0).abs());
    }
    Ok(out)
}
