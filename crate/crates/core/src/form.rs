//! Differential forms on a chart.
//!
//! Basis elements `dx_{i1} ∧ … ∧ dx_{ik}` with `i1 < … < ik` are stored as
//! bitmasks, so a chart has at most 32 coordinates. The algebra is written
//! once over a [`Coefficient`] ring and instantiated twice: symbolically
//! (`ScalarExpr`) for [`DifferentialForm`], numerically (`f64`) for
//! pointwise values in grid scans.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::{CompiledExpr, ScalarExpr};
use crate::parse::parse_form_terms;

pub trait Coefficient: Clone + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
}

impl Coefficient for ScalarExpr {
    fn zero() -> Self {
        ScalarExpr::zero()
    }
    fn one() -> Self {
        ScalarExpr::one()
    }
    fn is_zero(&self) -> bool {
        ScalarExpr::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
}

/// Sign of `dx_I ∧ dx_J` relative to the sorted basis element of `I ∪ J`,
/// or `None` when the index sets overlap.
pub fn wedge_sign(a: u32, b: u32) -> Option<i32> {
    if a & b != 0 {
        return None;
    }
    let mut inversions = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        inversions += (a >> j).count_ones();
    }
    Some(if inversions % 2 == 0 { 1 } else { -1 })
}

pub fn mask_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

/// Sign and mask of `dx_{i1} ∧ … ∧ dx_{ik}` for indices in arbitrary order.
pub fn sort_indices(indices: &[usize]) -> Option<(i32, u32)> {
    let mut mask = 0u32;
    let mut sign = 1;
    for &i in indices {
        let bit = 1u32 << i;
        sign *= wedge_sign(mask, bit)?;
        mask |= bit;
    }
    Some((sign, mask))
}

/// An element of the exterior algebra over a `dim`-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct ExteriorElement<C> {
    dim: usize,
    degree: usize,
    terms: BTreeMap<u32, C>,
}

/// Pointwise value of a form.
pub type FormValue = ExteriorElement<f64>;

impl<C: Coefficient> ExteriorElement<C> {
    pub fn zero(dim: usize, degree: usize) -> Self {
        ExteriorElement {
            dim,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(dim: usize, c: C) -> Self {
        let mut out = Self::zero(dim, 0);
        out.insert(0, c);
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &C)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn coeff(&self, mask: u32) -> C {
        self.terms.get(&mask).cloned().unwrap_or_else(C::zero)
    }

    /// Adds `c` to the coefficient of `mask`; zero coefficients are dropped.
    pub fn insert(&mut self, mask: u32, c: C) {
        debug_assert_eq!(mask.count_ones() as usize, self.degree);
        let merged = match self.terms.remove(&mask) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(mask, merged);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(*m, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg())
    }

    pub fn scale(&self, k: &C) -> Self {
        self.map_coeffs(|c| k.mul(c))
    }

    pub fn map_coeffs(&self, f: impl Fn(&C) -> C) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        for (m, c) in &self.terms {
            out.insert(*m, f(c));
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim, self.degree + other.degree);
        if self.degree + other.degree > self.dim {
            return out;
        }
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some(sign) = wedge_sign(*ma, *mb) {
                    let prod = ca.mul(cb);
                    out.insert(ma | mb, if sign > 0 { prod } else { prod.neg() });
                }
            }
        }
        out
    }

    pub fn power(&self, k: usize) -> Self {
        let mut acc = Self::scalar(self.dim, C::one());
        for _ in 0..k {
            acc = acc.wedge(self);
            if acc.is_zero() {
                return Self::zero(self.dim, self.degree * k);
            }
        }
        acc
    }

    /// Interior product with a vector given by its components.
    pub fn interior(&self, vector: &[C]) -> Self {
        let mut out = Self::zero(self.dim, self.degree.saturating_sub(1));
        if self.degree == 0 {
            return out;
        }
        for (m, c) in &self.terms {
            for (k, i) in mask_indices(*m).into_iter().enumerate() {
                let x = &vector[i];
                if x.is_zero() {
                    continue;
                }
                let prod = x.mul(c);
                out.insert(m & !(1 << i), if k % 2 == 0 { prod } else { prod.neg() });
            }
        }
        out
    }

    /// Coefficient of `dx_0 ∧ … ∧ dx_{n-1}` (not orientation-adjusted).
    pub fn top_coeff(&self) -> C {
        let full = if self.dim == 32 {
            u32::MAX
        } else {
            (1u32 << self.dim) - 1
        };
        self.coeff(full)
    }
}

impl FormValue {
    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

pub(crate) fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn check_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<()> {
    if same_chart(a, b) {
        Ok(())
    } else {
        Err(Error::ChartMismatch {
            expected: a.name.clone(),
            found: b.name.clone(),
        })
    }
}

/// A differential form of fixed degree on a chart, with symbolic
/// coefficients. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialForm {
    chart: Arc<Chart>,
    elem: ExteriorElement<ScalarExpr>,
}

impl DifferentialForm {
    pub fn zero(chart: &Arc<Chart>, degree: usize) -> Self {
        DifferentialForm {
            chart: chart.clone(),
            elem: ExteriorElement::zero(chart.dim(), degree),
        }
    }

    pub fn scalar(chart: &Arc<Chart>, f: ScalarExpr) -> Self {
        DifferentialForm {
            chart: chart.clone(),
            elem: ExteriorElement::scalar(chart.dim(), f),
        }
    }

    /// The coordinate differential `d<coord>`.
    pub fn basis(chart: &Arc<Chart>, coord: &str) -> Result<Self> {
        let i = chart.index_of(coord)?;
        let mut elem = ExteriorElement::zero(chart.dim(), 1);
        elem.insert(1 << i, ScalarExpr::one());
        Ok(DifferentialForm {
            chart: chart.clone(),
            elem,
        })
    }

    /// Builds a form from `(coefficient, coordinate names)` terms; each
    /// name list is wedged in the order given.
    pub fn from_terms(chart: &Arc<Chart>, terms: &[(ScalarExpr, &[&str])]) -> Result<Self> {
        let mut degree = None;
        let mut elem = None;
        for (c, names) in terms {
            let idx = names
                .iter()
                .map(|n| chart.index_of(n))
                .collect::<Result<Vec<_>>>()?;
            push_term(chart, &mut degree, &mut elem, c.clone(), &idx)?;
        }
        Ok(Self::finish_terms(chart, degree, elem))
    }

    /// Parses a form such as `dz + x*dy` or `r*dr wedge dtheta`.
    pub fn parse(chart: &Arc<Chart>, src: &str) -> Result<Self> {
        let terms = parse_form_terms(src, &chart.coords)?;
        let mut degree = None;
        let mut elem = None;
        for t in terms {
            push_term(chart, &mut degree, &mut elem, t.coeff, &t.differentials)?;
        }
        Ok(Self::finish_terms(chart, degree, elem))
    }

    fn finish_terms(
        chart: &Arc<Chart>,
        degree: Option<usize>,
        elem: Option<ExteriorElement<ScalarExpr>>,
    ) -> Self {
        DifferentialForm {
            chart: chart.clone(),
            elem: elem.unwrap_or_else(|| ExteriorElement::zero(chart.dim(), degree.unwrap_or(0))),
        }
    }

    pub fn from_element(chart: &Arc<Chart>, elem: ExteriorElement<ScalarExpr>) -> Self {
        assert_eq!(elem.dim(), chart.dim(), "element dimension must match chart");
        DifferentialForm {
            chart: chart.clone(),
            elem,
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.elem.degree()
    }

    pub fn element(&self) -> &ExteriorElement<ScalarExpr> {
        &self.elem
    }

    pub fn is_zero(&self) -> bool {
        self.elem.is_zero()
    }

    /// Iterates `(coordinate indices, coefficient)` over stored terms.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, &ScalarExpr)> {
        self.elem.terms().map(|(m, c)| (mask_indices(m), c))
    }

    /// Coefficient of the basis element named by coordinates in any order,
    /// with the permutation sign applied.
    pub fn coeff(&self, coords: &[&str]) -> Result<ScalarExpr> {
        let idx = coords
            .iter()
            .map(|c| self.chart.index_of(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(match sort_indices(&idx) {
            Some((sign, mask)) if idx.len() == self.degree() => {
                let c = self.elem.coeff(mask);
                if sign > 0 {
                    c
                } else {
                    -c
                }
            }
            _ => ScalarExpr::zero(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_chart(&self.chart, &other.chart)?;
        if self.degree() != other.degree() {
            return Err(Error::Degree(format!(
                "cannot add forms of degree {} and {}",
                self.degree(),
                other.degree()
            )));
        }
        Ok(DifferentialForm {
            chart: self.chart.clone(),
            elem: self.elem.add(&other.elem),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        DifferentialForm {
            chart: self.chart.clone(),
            elem: self.elem.neg(),
        }
    }

    /// Multiplication by a function.
    pub fn scale(&self, f: &ScalarExpr) -> Self {
        DifferentialForm {
            chart: self.chart.clone(),
            elem: self.elem.scale(f),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> Self {
        DifferentialForm {
            chart: self.chart.clone(),
            elem: self.elem.map_coeffs(f),
        }
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        check_chart(&self.chart, &other.chart)?;
        Ok(DifferentialForm {
            chart: self.chart.clone(),
            elem: self.elem.wedge(&other.elem),
        })
    }

    /// Exterior derivative.
    pub fn d(&self) -> Self {
        let dim = self.chart.dim();
        let mut out = ExteriorElement::zero(dim, self.degree() + 1);
        if self.degree() >= dim {
            return DifferentialForm {
                chart: self.chart.clone(),
                elem: out,
            };
        }
        for (m, c) in self.elem.terms() {
            for (j, name) in self.chart.coords.iter().enumerate() {
                if m & (1 << j) != 0 {
                    continue;
                }
                let dc = c.diff(name);
                if dc.is_zero() {
                    continue;
                }
                let below = (m & ((1u32 << j) - 1)).count_ones();
                out.insert(m | (1 << j), if below % 2 == 0 { dc } else { -dc });
            }
        }
        DifferentialForm {
            chart: self.chart.clone(),
            elem: out,
        }
    }

    pub fn interior(&self, x: &VectorField) -> Result<Self> {
        check_chart(&self.chart, &x.chart)?;
        if self.degree() == 0 {
            return Err(Error::Degree(
                "interior product of a 0-form is undefined".into(),
            ));
        }
        Ok(DifferentialForm {
            chart: self.chart.clone(),
            elem: self.elem.interior(&x.components),
        })
    }

    /// k-fold wedge power; `a^0` is the constant function 1.
    pub fn power(&self, k: usize) -> Self {
        DifferentialForm {
            chart: self.chart.clone(),
            elem: self.elem.power(k),
        }
    }

    /// The coefficient of a top-degree form against the chart's
    /// coordinate order, times the chart orientation.
    pub fn top_density(&self) -> Result<ScalarExpr> {
        if self.degree() != self.chart.dim() {
            return Err(Error::Degree(format!(
                "top density needs degree {}, found {}",
                self.chart.dim(),
                self.degree()
            )));
        }
        let c = self.elem.top_coeff();
        Ok(if self.chart.orientation < 0 { -c } else { c })
    }

    pub fn substitute(&self, name: &str, value: &ScalarExpr) -> Self {
        self.map_coeffs(|c| c.substitute_one(name, value.clone()))
    }

    pub fn simplify(&self) -> Self {
        self.map_coeffs(|c| c.simplify())
    }

    /// Re-expresses the form on another chart that contains all of this
    /// chart's coordinates (matched by name).
    pub fn extend_to(&self, chart: &Arc<Chart>) -> Result<Self> {
        let map = self
            .chart
            .coords
            .iter()
            .map(|c| chart.index_of(c))
            .collect::<Result<Vec<_>>>()?;
        let mut elem = ExteriorElement::zero(chart.dim(), self.degree());
        for (m, c) in self.elem.terms() {
            let idx: Vec<usize> = mask_indices(m).into_iter().map(|i| map[i]).collect();
            let (sign, mask) = sort_indices(&idx).expect("distinct coordinates");
            elem.insert(mask, if sign > 0 { c.clone() } else { -c.clone() });
        }
        Ok(DifferentialForm {
            chart: chart.clone(),
            elem,
        })
    }

    /// Pointwise value through the slow tree evaluator; extra named values
    /// (e.g. a family parameter) may be supplied.
    pub fn at(&self, point: &[f64]) -> Result<FormValue> {
        let mut out = ExteriorElement::zero(self.chart.dim(), self.degree());
        for (m, c) in self.elem.terms() {
            out.insert(m, c.eval_at(&self.chart.coords, point)?);
        }
        Ok(out)
    }

    pub fn compile(&self) -> Result<CompiledForm> {
        self.compile_with(&[])
    }

    /// Compiles coefficients against the chart coordinates followed by
    /// `extra` parameter names.
    pub fn compile_with(&self, extra: &[&str]) -> Result<CompiledForm> {
        let mut names = self.chart.coords.clone();
        names.extend(extra.iter().map(|s| s.to_string()));
        let terms = self
            .elem
            .terms()
            .map(|(m, c)| Ok((m, c.compile(&names)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(CompiledForm {
            dim: self.chart.dim(),
            degree: self.degree(),
            terms,
        })
    }
}

fn push_term(
    chart: &Arc<Chart>,
    degree: &mut Option<usize>,
    elem: &mut Option<ExteriorElement<ScalarExpr>>,
    coeff: ScalarExpr,
    idx: &[usize],
) -> Result<()> {
    match degree {
        Some(d) if *d != idx.len() => {
            return Err(Error::Degree(format!(
                "mixed degrees {} and {} in one form",
                d,
                idx.len()
            )))
        }
        _ => *degree = Some(idx.len()),
    }
    if idx.len() > chart.dim() {
        return Err(Error::Degree(format!(
            "degree {} exceeds chart dimension {}",
            idx.len(),
            chart.dim()
        )));
    }
    let e = elem.get_or_insert_with(|| ExteriorElement::zero(chart.dim(), idx.len()));
    if let Some((sign, mask)) = sort_indices(idx) {
        e.insert(mask, if sign > 0 { coeff } else { -coeff });
    }
    Ok(())
}

impl fmt::Display for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.elem.terms().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let basis: Vec<String> = mask_indices(m)
                .into_iter()
                .map(|i| format!("d{}", self.chart.coords[i]))
                .collect();
            if basis.is_empty() {
                write!(f, "({c})")?;
            } else if c.is_one() {
                write!(f, "{}", basis.join(" wedge "))?;
            } else {
                write!(f, "({c})*{}", basis.join(" wedge "))?;
            }
        }
        Ok(())
    }
}

/// Coefficients compiled for fast repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledForm {
    dim: usize,
    degree: usize,
    terms: Vec<(u32, CompiledExpr)>,
}

impl CompiledForm {
    pub fn eval(&self, point: &[f64]) -> FormValue {
        let mut out = ExteriorElement::zero(self.dim, self.degree);
        for (m, c) in &self.terms {
            out.insert(*m, c.eval(point));
        }
        out
    }
}

/// A vector field on a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    chart: Arc<Chart>,
    components: Vec<ScalarExpr>,
}

impl VectorField {
    pub fn new(chart: &Arc<Chart>, components: Vec<ScalarExpr>) -> Result<Self> {
        if components.len() != chart.dim() {
            return Err(Error::Dimension(format!(
                "vector field on `{}` needs {} components, got {}",
                chart.name,
                chart.dim(),
                components.len()
            )));
        }
        Ok(VectorField {
            chart: chart.clone(),
            components,
        })
    }

    /// The coordinate field `∂/∂coord`.
    pub fn coordinate(chart: &Arc<Chart>, coord: &str) -> Result<Self> {
        let i = chart.index_of(coord)?;
        let mut components = vec![ScalarExpr::zero(); chart.dim()];
        components[i] = ScalarExpr::one();
        Self::new(chart, components)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn components(&self) -> &[ScalarExpr] {
        &self.components
    }

    pub fn at(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.components
            .iter()
            .map(|c| c.eval_at(&self.chart.coords, point))
            .collect()
    }
}
