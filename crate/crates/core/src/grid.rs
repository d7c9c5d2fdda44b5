//! Sample grids over chart boxes and positivity reports.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::error::{Error, Result};

/// Points per coordinate when nothing else is requested.
pub const DEFAULT_PER_AXIS: usize = 15;
/// Upper bound on the number of grid points of a default grid.
pub const MAX_POINTS: usize = 200_000;
/// Default lower cutoff for radial coordinates.
pub const RADIAL_FLOOR: f64 = 0.05;

/// Half-open band `lo <= x < hi` of one coordinate that is skipped;
/// a missing end is unbounded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub coord: String,
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
}

impl Exclusion {
    pub fn below(coord: &str, hi: f64) -> Self {
        Exclusion {
            coord: coord.to_string(),
            lo: None,
            hi: Some(hi),
        }
    }

    fn hits(&self, x: f64) -> bool {
        self.lo.map_or(true, |lo| x >= lo) && self.hi.map_or(true, |hi| x < hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub chart: String,
    pub coords: Vec<String>,
    pub resolution: Vec<usize>,
    pub exclusions: Vec<Exclusion>,
    pub points: usize,
}

#[derive(Clone, Debug)]
pub struct SampleGrid {
    chart: Arc<Chart>,
    resolution: Vec<usize>,
    exclusions: Vec<(usize, Exclusion)>,
    axes: Vec<Vec<f64>>,
    points: Vec<Vec<f64>>,
}

impl SampleGrid {
    pub fn new(chart: &Arc<Chart>, resolution: Vec<usize>, exclusions: Vec<Exclusion>) -> Result<Self> {
        if resolution.len() != chart.dim() {
            return Err(Error::Dimension(format!(
                "grid on `{}` needs {} resolutions, got {}",
                chart.name,
                chart.dim(),
                resolution.len()
            )));
        }
        if resolution.iter().any(|&n| n == 0) {
            return Err(Error::EmptyGrid(chart.name.clone()));
        }
        let exclusions = exclusions
            .into_iter()
            .map(|e| Ok((chart.index_of(&e.coord)?, e)))
            .collect::<Result<Vec<_>>>()?;
        let axes: Vec<Vec<f64>> = (0..chart.dim())
            .map(|i| {
                let (lo, hi) = chart.bounds[i];
                let n = resolution[i];
                if chart.periodic[i] {
                    (0..n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
                } else if n == 1 {
                    vec![0.5 * (lo + hi)]
                } else {
                    (0..n)
                        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                        .collect()
                }
            })
            .collect();
        let total: usize = resolution.iter().product();
        let mut points = Vec::new();
        let mut p = vec![0.0; chart.dim()];
        for idx in 0..total {
            let mut rest = idx;
            for i in (0..chart.dim()).rev() {
                p[i] = axes[i][rest % resolution[i]];
                rest /= resolution[i];
            }
            if !exclusions.iter().any(|(i, e)| e.hits(p[*i])) {
                points.push(p.clone());
            }
        }
        if points.is_empty() {
            return Err(Error::EmptyGrid(chart.name.clone()));
        }
        Ok(SampleGrid {
            chart: chart.clone(),
            resolution,
            exclusions,
            axes,
            points,
        })
    }

    /// `per_axis` points per coordinate, lowered until the total stays
    /// under [`MAX_POINTS`]; radial coordinates skip `r < RADIAL_FLOOR`.
    pub fn uniform(chart: &Arc<Chart>, per_axis: usize) -> Result<Self> {
        let mut n = per_axis.max(1);
        while n > 1 && (n as f64).powi(chart.dim() as i32) > MAX_POINTS as f64 {
            n -= 1;
        }
        let exclusions = chart
            .coords
            .iter()
            .zip(&chart.radial)
            .filter(|(_, r)| **r)
            .map(|(c, _)| Exclusion::below(c, RADIAL_FLOOR))
            .collect();
        Self::new(chart, vec![n; chart.dim()], exclusions)
    }

    pub fn default_for(chart: &Arc<Chart>) -> Result<Self> {
        Self::uniform(chart, DEFAULT_PER_AXIS)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn meta(&self) -> GridMeta {
        GridMeta {
            chart: self.chart.name.clone(),
            coords: self.chart.coords.clone(),
            resolution: self.resolution.clone(),
            exclusions: self.exclusions.iter().map(|(_, e)| e.clone()).collect(),
            points: self.points.len(),
        }
    }

    /// Minimum of `f` over the grid with its first minimizing point.
    /// Non-finite values are reported as errors.
    pub fn scan_min<F>(&self, f: F) -> Result<(f64, Vec<f64>)>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let best = self
            .points
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let v = f(p)?;
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("grid point {p:?}")));
                }
                Ok(Some((v, i)))
            })
            .try_reduce(|| None, |a, b| Ok(pick_min(a, b)))?;
        let (v, i) = best.ok_or_else(|| Error::EmptyGrid(self.chart.name.clone()))?;
        Ok((v, self.points[i].clone()))
    }

    pub fn scan_max<F>(&self, f: F) -> Result<(f64, Vec<f64>)>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let (v, p) = self.scan_min(|p| f(p).map(|x| -x))?;
        Ok((-v, p))
    }
}

fn pick_min(a: Option<(f64, usize)>, b: Option<(f64, usize)>) -> Option<(f64, usize)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

/// Result of scanning a quantity that must stay above a threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub quantity: String,
    pub min_value: f64,
    pub argmin_point: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub grid: GridMeta,
    pub threshold: f64,
    /// Normalization applied before comparing with the threshold.
    pub scale: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<PositivityReport>,
}

impl PositivityReport {
    pub fn new(
        quantity: &str,
        min_value: f64,
        argmin_point: Vec<f64>,
        grid: GridMeta,
        threshold: f64,
        scale: f64,
    ) -> Self {
        PositivityReport {
            quantity: quantity.to_string(),
            min_value,
            argmin_point,
            t: None,
            grid,
            threshold,
            scale,
            passed: min_value > threshold,
            components: Vec::new(),
        }
    }

    fn margin(&self) -> f64 {
        self.min_value - self.threshold
    }

    /// Aggregate of sub-reports: headline values come from the component
    /// with the smallest margin; passes iff every component passes.
    pub fn combine(quantity: &str, components: Vec<PositivityReport>) -> Result<Self> {
        let worst = components
            .iter()
            .enumerate()
            .min_by(|(i, a), (j, b)| a.margin().total_cmp(&b.margin()).then(i.cmp(j)))
            .map(|(_, r)| r.clone())
            .ok_or_else(|| Error::EmptyGrid(quantity.to_string()))?;
        let mut out = worst;
        out.quantity = quantity.to_string();
        out.passed = components.iter().all(|c| c.passed);
        out.components = components;
        Ok(out)
    }

    /// The deepest component responsible for the headline value.
    pub fn worst_leaf(&self) -> &PositivityReport {
        let mut cur = self;
        while let Some(next) = cur
            .components
            .iter()
            .filter(|c| c.min_value == cur.min_value && c.argmin_point == cur.argmin_point)
            .last()
        {
            cur = next;
        }
        cur
    }
}
