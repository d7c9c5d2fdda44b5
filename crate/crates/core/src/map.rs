use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::form::{DifferentialForm, ExteriorElement};

/// A chart-to-chart map given by one expression per target coordinate,
/// each written in the source coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothMap {
    source: Arc<Chart>,
    target: Arc<Chart>,
    components: Vec<ScalarExpr>,
}

impl SmoothMap {
    pub fn new(source: &Arc<Chart>, target: &Arc<Chart>, components: Vec<ScalarExpr>) -> Result<Self> {
        if components.len() != target.dim() {
            return Err(Error::Dimension(format!(
                "map into `{}` needs {} components, got {}",
                target.name,
                target.dim(),
                components.len()
            )));
        }
        for c in &components {
            for v in c.variables() {
                if !source.coords.contains(&v) {
                    return Err(Error::UnknownCoordinate(v));
                }
            }
        }
        Ok(SmoothMap {
            source: source.clone(),
            target: target.clone(),
            components,
        })
    }

    /// Parses one component expression per target coordinate.
    pub fn parse(source: &Arc<Chart>, target: &Arc<Chart>, components: &[&str]) -> Result<Self> {
        let comps = components
            .iter()
            .map(|s| crate::parse::parse_expr(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, comps)
    }

    pub fn identity(chart: &Arc<Chart>) -> Self {
        SmoothMap {
            source: chart.clone(),
            target: chart.clone(),
            components: chart.coords.iter().map(|c| ScalarExpr::var(c)).collect(),
        }
    }

    /// Identity on coordinate names between two charts sharing them.
    pub fn inclusion(source: &Arc<Chart>, target: &Arc<Chart>) -> Result<Self> {
        let comps = target
            .coords
            .iter()
            .map(|c| {
                if source.coords.contains(c) {
                    Ok(ScalarExpr::var(c))
                } else {
                    Err(Error::UnknownCoordinate(c.clone()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, comps)
    }

    pub fn source(&self) -> &Arc<Chart> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Chart> {
        &self.target
    }

    pub fn components(&self) -> &[ScalarExpr] {
        &self.components
    }

    fn substitution(&self) -> HashMap<String, ScalarExpr> {
        self.target
            .coords
            .iter()
            .cloned()
            .zip(self.components.iter().cloned())
            .collect()
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &SmoothMap) -> Result<SmoothMap> {
        if *self.target != *other.source {
            return Err(Error::ChartMismatch {
                expected: other.source.name.clone(),
                found: self.target.name.clone(),
            });
        }
        let sub = self.substitution();
        Ok(SmoothMap {
            source: self.source.clone(),
            target: other.target.clone(),
            components: other.components.iter().map(|c| c.substitute(&sub)).collect(),
        })
    }

    pub fn apply(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.components
            .iter()
            .map(|c| c.eval_at(&self.source.coords, point))
            .collect()
    }

    /// Symbolic Jacobian, `rows = target`, `cols = source`.
    pub fn jacobian(&self) -> Vec<Vec<ScalarExpr>> {
        self.components
            .iter()
            .map(|c| self.source.coords.iter().map(|u| c.diff(u)).collect())
            .collect()
    }

    pub fn jacobian_at(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        let jac = self.jacobian();
        let mut m = DMatrix::zeros(self.target.dim(), self.source.dim());
        for (i, row) in jac.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                m[(i, j)] = e.eval_at(&self.source.coords, point)?;
            }
        }
        Ok(m)
    }

    /// Pulls a form on the target chart back to the source chart.
    pub fn pullback(&self, form: &DifferentialForm) -> Result<DifferentialForm> {
        if **form.chart() != *self.target {
            return Err(Error::ChartMismatch {
                expected: self.target.name.clone(),
                found: form.chart().name.clone(),
            });
        }
        let sub = self.substitution();
        let dim = self.source.dim();
        let differentials: Vec<ExteriorElement<ScalarExpr>> = self
            .components
            .iter()
            .map(|c| {
                let mut e = ExteriorElement::zero(dim, 1);
                for (i, u) in self.source.coords.iter().enumerate() {
                    e.insert(1 << i, c.diff(u));
                }
                e
            })
            .collect();
        let mut out = ExteriorElement::zero(dim, form.degree());
        for (idx, c) in form.terms() {
            let mut acc = ExteriorElement::scalar(dim, c.substitute(&sub));
            for j in idx {
                acc = acc.wedge(&differentials[j]);
                if acc.is_zero() {
                    break;
                }
            }
            out = out.add(&acc);
        }
        Ok(DifferentialForm::from_element(&self.source, out))
    }
}
