//! Grid certification of contact forms, exact symplectic forms, Liouville
//! fields and exact symplectomorphisms.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::form::{check_chart, CompiledForm, DifferentialForm, FormValue, VectorField};
use crate::grid::{PositivityReport, SampleGrid};
use crate::map::SmoothMap;

/// Default positivity floor, applied after normalization.
pub const DEFAULT_THRESHOLD: f64 = 1e-8;

/// `n` for a chart of dimension `2n + 1`.
pub fn contact_half_dim(chart: &Chart) -> Result<usize> {
    let dim = chart.dim();
    if dim % 2 == 0 {
        return Err(Error::Dimension(format!(
            "contact forms live on odd-dimensional charts; `{}` has dimension {dim}",
            chart.name
        )));
    }
    Ok(dim / 2)
}

fn require_degree(form: &DifferentialForm, k: usize) -> Result<()> {
    if form.degree() != k {
        return Err(Error::Degree(format!(
            "expected a {k}-form, found degree {}",
            form.degree()
        )));
    }
    Ok(())
}

/// Symbolic `α ∧ (dα)^n` density.
pub fn contact_density(alpha: &DifferentialForm) -> Result<ScalarExpr> {
    let n = contact_half_dim(alpha.chart())?;
    require_degree(alpha, 1)?;
    alpha.wedge(&alpha.d().power(n))?.top_density()
}

/// Numeric evaluator of the contact density: compiles `α` and `dα` once
/// and wedges pointwise values.
#[derive(Clone, Debug)]
pub struct ContactDensity {
    n: usize,
    orientation: f64,
    alpha: CompiledForm,
    dalpha: CompiledForm,
}

impl ContactDensity {
    pub fn new(alpha: &DifferentialForm) -> Result<Self> {
        let n = contact_half_dim(alpha.chart())?;
        require_degree(alpha, 1)?;
        Ok(ContactDensity {
            n,
            orientation: alpha.chart().orientation as f64,
            alpha: alpha.compile()?,
            dalpha: alpha.d().compile()?,
        })
    }

    pub fn density(&self, p: &[f64]) -> f64 {
        let a = self.alpha.eval(p);
        let da = self.dalpha.eval(p);
        self.orientation * a.wedge(&da.power(self.n)).top_coeff()
    }

    /// Largest coefficient magnitude of `α` at `p`.
    pub fn coeff_max(&self, p: &[f64]) -> f64 {
        self.alpha.eval(p).max_abs()
    }

    pub fn half_dim(&self) -> usize {
        self.n
    }
}

fn check_grid(form: &DifferentialForm, grid: &SampleGrid) -> Result<()> {
    check_chart(grid.chart(), form.chart())
}

/// Scans `α ∧ (dα)^n / M^{n+1}` over the grid, `M` being the largest
/// coefficient magnitude of `α` on the grid.
pub fn verify_contact(
    alpha: &DifferentialForm,
    grid: &SampleGrid,
    threshold: f64,
) -> Result<PositivityReport> {
    check_grid(alpha, grid)?;
    let eval = ContactDensity::new(alpha)?;
    let (m, _) = grid.scan_max(|p| Ok(eval.coeff_max(p)))?;
    let scale = if m > 0.0 { m } else { 1.0 };
    let norm = scale.powi(eval.n as i32 + 1);
    let (min, at) = grid.scan_min(|p| Ok(eval.density(p) / norm))?;
    Ok(PositivityReport::new(
        "contact density",
        min,
        at,
        grid.meta(),
        threshold,
        scale,
    ))
}

/// Antisymmetric matrix `A` with `ω = Σ_{i<j} A_ij dx_i ∧ dx_j`.
pub fn matrix_of(value: &FormValue) -> DMatrix<f64> {
    let dim = value.dim();
    let mut a = DMatrix::zeros(dim, dim);
    for (mask, c) in value.terms() {
        let idx = crate::form::mask_indices(mask);
        let (i, j) = (idx[0], idx[1]);
        a[(i, j)] = *c;
        a[(j, i)] = -*c;
    }
    a
}

pub fn symplectic_matrix(omega: &DifferentialForm, p: &[f64]) -> Result<DMatrix<f64>> {
    require_degree(omega, 2)?;
    Ok(matrix_of(&omega.at(p)?))
}

/// Determinant of the coefficient matrix; a nondegeneracy question, so odd
/// dimensions are rejected.
pub fn symplectic_determinant(omega: &DifferentialForm, p: &[f64]) -> Result<f64> {
    let dim = omega.chart().dim();
    if dim % 2 == 1 {
        return Err(Error::Dimension(format!(
            "a 2-form on an odd-dimensional chart ({dim}) is always degenerate"
        )));
    }
    Ok(symplectic_matrix(omega, p)?.determinant())
}

/// Solves `ι_χ ω = β` for `χ` given pointwise values. With the full
/// antisymmetric `A`, the `dx_k` coefficient of `ι_χ ω` is `Σ_i χ_i A_ik`.
fn solve_dual(omega: &FormValue, beta: &FormValue, p: &[f64]) -> Result<Vec<f64>> {
    let a = matrix_of(omega);
    let dim = a.nrows();
    let b = DVector::from_iterator(dim, (0..dim).map(|k| beta.coeff(1 << k)));
    let m = a.transpose();
    let scale = a.amax().max(1.0);
    let lu = m.lu();
    if lu.determinant().abs() <= 1e-12 * scale.powi(dim as i32) {
        return Err(Error::Singular(p.to_vec()));
    }
    let x = lu.solve(&b).ok_or_else(|| Error::Singular(p.to_vec()))?;
    Ok(x.iter().copied().collect())
}

/// The `dβ`-dual field of `β`, solved exactly at any requested point.
#[derive(Clone, Debug)]
pub struct LiouvilleField {
    chart: Arc<Chart>,
    beta: CompiledForm,
    omega: CompiledForm,
    symbolic: Option<VectorField>,
    samples: Vec<(Vec<f64>, Vec<f64>)>,
}

impl LiouvilleField {
    pub fn at(&self, p: &[f64]) -> Result<Vec<f64>> {
        solve_dual(&self.omega.eval(p), &self.beta.eval(p), p)
    }

    /// Closed-form solution by Cramer's rule, when the chart is small.
    pub fn symbolic(&self) -> Option<&VectorField> {
        self.symbolic.as_ref()
    }

    /// Field values at every grid point it was built on.
    pub fn samples(&self) -> &[(Vec<f64>, Vec<f64>)] {
        &self.samples
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }
}

pub fn liouville_field(beta: &DifferentialForm, grid: &SampleGrid) -> Result<LiouvilleField> {
    check_grid(beta, grid)?;
    require_degree(beta, 1)?;
    let omega = beta.d();
    let cb = beta.compile()?;
    let co = omega.compile()?;
    let samples = grid
        .points()
        .par_iter()
        .map(|p| Ok((p.clone(), solve_dual(&co.eval(p), &cb.eval(p), p)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LiouvilleField {
        chart: beta.chart().clone(),
        beta: cb,
        omega: co,
        symbolic: symbolic_dual(beta, &omega),
        samples,
    })
}

fn symbolic_dual(beta: &DifferentialForm, omega: &DifferentialForm) -> Option<VectorField> {
    let chart = beta.chart();
    let dim = chart.dim();
    if dim > 4 || dim % 2 == 1 {
        return None;
    }
    let omega = omega.simplify();
    let mut a = vec![vec![ScalarExpr::zero(); dim]; dim];
    for (idx, c) in omega.terms() {
        a[idx[0]][idx[1]] = c.clone();
        a[idx[1]][idx[0]] = -c.clone();
    }
    // M = Aᵀ
    let m: Vec<Vec<ScalarExpr>> = (0..dim)
        .map(|i| (0..dim).map(|j| a[j][i].clone()).collect())
        .collect();
    let det = laplace_det(&m).simplify();
    if det.is_zero() {
        return None;
    }
    let beta = beta.simplify();
    let b: Vec<ScalarExpr> = (0..dim)
        .map(|k| beta.element().coeff(1 << k))
        .collect();
    let comps = (0..dim)
        .map(|i| {
            let mi: Vec<Vec<ScalarExpr>> = m
                .iter()
                .enumerate()
                .map(|(r, row)| {
                    let mut row = row.clone();
                    row[i] = b[r].clone();
                    row
                })
                .collect();
            (&laplace_det(&mi).simplify() / &det).simplify()
        })
        .collect();
    VectorField::new(chart, comps).ok()
}

fn laplace_det(m: &[Vec<ScalarExpr>]) -> ScalarExpr {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = ScalarExpr::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<ScalarExpr>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][j] * &laplace_det(&minor);
        acc = if j % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

/// Part of the boundary along which the Liouville field must point out.
#[derive(Clone, Debug)]
pub enum Boundary {
    /// A face `coord = lower` or `coord = upper` of the chart box.
    Face { coord: String, upper: bool },
    /// The level set `g = 0`, outward where `g` increases, sampled through
    /// a parametrization.
    Level {
        defining: ScalarExpr,
        param: SmoothMap,
        per_axis: usize,
    },
}

impl Boundary {
    fn label(&self) -> String {
        match self {
            Boundary::Face { coord, upper } => {
                format!("outward on {coord} = {}", if *upper { "max" } else { "min" })
            }
            Boundary::Level { defining, .. } => format!("outward on {{{defining} = 0}}"),
        }
    }

    /// Sample points with unit outward normals.
    fn samples(&self, grid: &SampleGrid) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        let chart = grid.chart();
        match self {
            Boundary::Face { coord, upper } => {
                let i = chart.index_of(coord)?;
                let (lo, hi) = chart.bounds[i];
                let level = if *upper { hi } else { lo };
                let mut normal = vec![0.0; chart.dim()];
                normal[i] = if *upper { 1.0 } else { -1.0 };
                // rebuild the grid with this coordinate pinned
                let mut pts: Vec<Vec<f64>> = Vec::new();
                for p in grid.points() {
                    let mut q = p.clone();
                    q[i] = level;
                    if !pts.contains(&q) {
                        pts.push(q);
                    }
                }
                Ok(pts.into_iter().map(|p| (p, normal.clone())).collect())
            }
            Boundary::Level {
                defining,
                param,
                per_axis,
            } => {
                check_chart(param.target(), chart)?;
                let pgrid = SampleGrid::uniform(param.source(), *per_axis)?;
                let grad: Vec<_> = chart
                    .coords
                    .iter()
                    .map(|c| defining.diff(c).compile(&chart.coords))
                    .collect::<Result<_>>()?;
                pgrid
                    .points()
                    .iter()
                    .map(|s| {
                        let p = param.apply(s)?;
                        let g: Vec<f64> = grad.iter().map(|e| e.eval(&p)).collect();
                        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                        if !(norm > 0.0) {
                            return Err(Error::Singular(p));
                        }
                        Ok((p, g.iter().map(|x| x / norm).collect()))
                    })
                    .collect()
            }
        }
    }
}

/// Nondegeneracy of `dβ` over the grid and, if requested, strict outward
/// pointing of the Liouville field along the listed boundary pieces.
pub fn verify_exact_symplectic(
    beta: &DifferentialForm,
    grid: &SampleGrid,
    outward: Option<&[Boundary]>,
    threshold: f64,
) -> Result<PositivityReport> {
    check_grid(beta, grid)?;
    require_degree(beta, 1)?;
    let dim = beta.chart().dim();
    if dim % 2 == 1 {
        return Err(Error::Dimension(format!(
            "exact symplectic forms live on even-dimensional charts; `{}` has dimension {dim}",
            beta.chart().name
        )));
    }
    if let Some(b) = outward {
        if b.is_empty() {
            return Err(Error::spec(
                "outwardness requested but no boundary declared",
            ));
        }
    }
    let omega = beta.d().compile()?;
    let (m, _) = grid.scan_max(|p| Ok(omega.eval(p).max_abs()))?;
    let scale = if m > 0.0 { m } else { 1.0 };
    let (min, at) = grid.scan_min(|p| {
        Ok(matrix_of(&omega.eval(p)).determinant() / scale.powi(dim as i32))
    })?;
    let nondeg = PositivityReport::new(
        "symplectic determinant",
        min,
        at,
        grid.meta(),
        threshold,
        scale,
    );
    let boundaries = match outward {
        Some(b) if nondeg.passed => b,
        _ => return Ok(nondeg),
    };
    let cb = beta.compile()?;
    let mut parts = vec![nondeg];
    for b in boundaries {
        let samples = b.samples(grid)?;
        let values = samples
            .par_iter()
            .map(|(p, n)| {
                let chi = solve_dual(&omega.eval(p), &cb.eval(p), p)?;
                Ok(chi.iter().zip(n).map(|(a, b)| a * b).sum::<f64>())
            })
            .collect::<Result<Vec<f64>>>()?;
        let (k, v) = values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bk, bv), (k, &v)| {
                if v < bv {
                    (k, v)
                } else {
                    (bk, bv)
                }
            });
        let mut meta = grid.meta();
        meta.points = samples.len();
        parts.push(PositivityReport::new(
            &b.label(),
            v,
            samples[k].0.clone(),
            meta,
            threshold,
            1.0,
        ));
    }
    PositivityReport::combine("exact symplectic", parts)
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

const QUAD_POINTS: usize = 16;

/// `∫ γ` along the straight segment `a → b`.
fn segment_integral(gamma: &CompiledForm, a: &[f64], b: &[f64], rule: &[(f64, f64)]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let mut q = vec![0.0; a.len()];
    let mut acc = 0.0;
    for &(s, w) in rule {
        for k in 0..a.len() {
            q[k] = a[k] + s * d[k];
        }
        let g = gamma.eval(&q);
        let dot: f64 = (0..a.len()).map(|k| g.coeff(1 << k) * d[k]).sum();
        acc += w * dot;
    }
    acc
}

#[derive(Clone, Debug)]
pub struct PotentialOptions {
    /// Defaults to the chart center.
    pub basepoint: Option<Vec<f64>>,
    pub loops: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for PotentialOptions {
    fn default() -> Self {
        PotentialOptions {
            basepoint: None,
            loops: 20,
            seed: 42,
            tolerance: 1e-8,
        }
    }
}

/// A function tabulated on a tensor grid, multilinearly interpolated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedPotential {
    pub coords: Vec<String>,
    pub axes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl TabulatedPotential {
    fn cell(&self, p: &[f64]) -> Vec<(usize, f64)> {
        self.axes
            .iter()
            .zip(p)
            .map(|(ax, &x)| {
                if ax.len() == 1 {
                    return (0, 0.0);
                }
                let k = match ax.iter().position(|&a| a > x) {
                    Some(0) => 0,
                    Some(k) => k - 1,
                    None => ax.len() - 2,
                }
                .min(ax.len() - 2);
                let t = ((x - ax[k]) / (ax[k + 1] - ax[k])).clamp(0.0, 1.0);
                (k, t)
            })
            .collect()
    }

    fn node(&self, idx: &[usize]) -> f64 {
        let mut flat = 0;
        for (i, ax) in self.axes.iter().enumerate() {
            flat = flat * ax.len() + idx[i];
        }
        self.values[flat]
    }

    /// Interpolated value, or `∂/∂x_deriv` of the interpolant.
    fn blend(&self, p: &[f64], deriv: Option<usize>) -> f64 {
        let cell = self.cell(p);
        let dim = cell.len();
        let mut acc = 0.0;
        for corner in 0..(1usize << dim) {
            let mut w = 1.0;
            let mut idx = vec![0; dim];
            for i in 0..dim {
                let hi = corner >> i & 1 == 1;
                let (k, t) = cell[i];
                let single = self.axes[i].len() == 1;
                if single && hi {
                    w = 0.0;
                    break;
                }
                idx[i] = if hi { k + 1 } else { k };
                w *= if deriv == Some(i) {
                    if single {
                        0.0
                    } else {
                        let h = self.axes[i][k + 1] - self.axes[i][k];
                        if hi {
                            1.0 / h
                        } else {
                            -1.0 / h
                        }
                    }
                } else if single {
                    1.0
                } else if hi {
                    t
                } else {
                    1.0 - t
                };
            }
            if w != 0.0 {
                acc += w * self.node(&idx);
            }
        }
        acc
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        self.blend(p, None)
    }

    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        (0..self.axes.len()).map(|i| self.blend(p, Some(i))).collect()
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        let total: usize = self.axes.iter().map(|a| a.len()).product();
        (0..total).map(move |flat| {
            let mut rest = flat;
            let mut p = vec![0.0; self.axes.len()];
            for i in (0..self.axes.len()).rev() {
                let n = self.axes[i].len();
                p[i] = self.axes[i][rest % n];
                rest /= n;
            }
            p
        })
    }

    /// Largest gradient component over the tabulation nodes.
    pub fn max_abs_gradient(&self) -> f64 {
        self.nodes()
            .flat_map(|p| self.gradient(&p))
            .fold(0.0, |m, g| m.max(g.abs()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialResult {
    pub psi: TabulatedPotential,
    pub basepoint: Vec<f64>,
    pub max_closedness_residual: f64,
    pub max_path_discrepancy: f64,
}

/// Finds `ψ` with `φ*β − β = dψ` on a star-shaped chart, by integrating
/// along rays from the basepoint. Both charts carry the same `β`, matched
/// by coordinate position.
pub fn exact_symplectomorphism_potential(
    phi: &SmoothMap,
    beta: &DifferentialForm,
    grid: &SampleGrid,
    opts: &PotentialOptions,
) -> Result<PotentialResult> {
    require_degree(beta, 1)?;
    let src = phi.source();
    check_chart(grid.chart(), src)?;
    if src.dim() != phi.target().dim() {
        return Err(Error::Dimension(format!(
            "`{}` and `{}` must have equal dimension",
            src.name,
            phi.target().name
        )));
    }
    let same = SmoothMap::new(
        src,
        phi.target(),
        src.coords.iter().map(|c| ScalarExpr::var(c)).collect(),
    )?;
    let gamma = phi.pullback(beta)?.sub(&same.pullback(beta)?)?.simplify();
    let dgamma = gamma.d().compile()?;
    let (closed, _) = grid.scan_max(|p| Ok(dgamma.eval(p).max_abs()))?;
    if closed > opts.tolerance {
        return Err(Error::NotSymplectic(closed));
    }
    let cg = gamma.compile()?;
    let base = opts.basepoint.clone().unwrap_or_else(|| src.center());
    if !src.contains(&base, 1e-12) {
        return Err(Error::spec(format!("basepoint {base:?} lies outside `{}`", src.name)));
    }
    let rule = gauss_legendre(QUAD_POINTS);
    let mut psi = TabulatedPotential {
        coords: src.coords.clone(),
        axes: grid.axes().to_vec(),
        values: Vec::new(),
    };
    let nodes: Vec<Vec<f64>> = psi.nodes().collect::<Vec<_>>();
    psi.values = nodes
        .par_iter()
        .map(|p| segment_integral(&cg, &base, p, &rule))
        .collect();
    if let Some(v) = psi.values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("potential value {v}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..opts.loops {
        let k = rng.gen_range(3..=6);
        let verts: Vec<Vec<f64>> = (0..k)
            .map(|_| src.bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect())
            .collect();
        let total: f64 = (0..k)
            .map(|i| segment_integral(&cg, &verts[i], &verts[(i + 1) % k], &rule))
            .sum();
        if !total.is_finite() {
            return Err(Error::NonFinite("loop integral".into()));
        }
        worst = worst.max(total.abs());
    }
    if worst > opts.tolerance {
        return Err(Error::NotExact(worst));
    }
    Ok(PotentialResult {
        psi,
        basepoint: base,
        max_closedness_residual: closed,
        max_path_discrepancy: worst,
    })
}
