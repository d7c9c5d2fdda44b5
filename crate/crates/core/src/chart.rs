use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A coordinate domain: an ordered list of named coordinates with a box of
/// bounds. Periodic coordinates are angles with period 2π.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub name: String,
    pub coords: Vec<String>,
    pub bounds: Vec<(f64, f64)>,
    pub periodic: Vec<bool>,
    /// +1 or -1 relative to the coordinate order.
    pub orientation: i8,
    /// Coordinates that are polar radii; default sample grids keep away
    /// from their singular value.
    #[serde(default)]
    pub radial: Vec<bool>,
}

impl Chart {
    pub fn new(name: &str, coords: &[&str], bounds: &[(f64, f64)]) -> Result<Self> {
        let dim = coords.len();
        Chart {
            name: name.to_string(),
            coords: coords.iter().map(|c| c.to_string()).collect(),
            bounds: bounds.to_vec(),
            periodic: vec![false; dim],
            orientation: 1,
            radial: vec![false; dim],
        }
        .validated()
    }

    pub fn with_periodic(mut self, coord: &str) -> Result<Self> {
        let i = self.index_of(coord)?;
        self.periodic[i] = true;
        self.validated()
    }

    pub fn with_radial(mut self, coord: &str) -> Result<Self> {
        let i = self.index_of(coord)?;
        self.radial[i] = true;
        self.validated()
    }

    pub fn with_orientation(mut self, sign: i8) -> Result<Self> {
        self.orientation = sign;
        self.validated()
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn with_bounds(mut self, coord: &str, lo: f64, hi: f64) -> Result<Self> {
        let i = self.index_of(coord)?;
        self.bounds[i] = (lo, hi);
        self.validated()
    }

    pub fn validated(mut self) -> Result<Self> {
        let bad = |reason: String| Error::InvalidChart {
            chart: self.name.clone(),
            reason,
        };
        let dim = self.coords.len();
        if dim == 0 {
            return Err(bad("dimension must be positive".into()));
        }
        if self.radial.is_empty() {
            self.radial = vec![false; dim];
        }
        if self.bounds.len() != dim || self.periodic.len() != dim || self.radial.len() != dim {
            return Err(bad(format!(
                "{} coordinates but {} bounds, {} periodic flags, {} radial flags",
                dim,
                self.bounds.len(),
                self.periodic.len(),
                self.radial.len()
            )));
        }
        if self.orientation != 1 && self.orientation != -1 {
            return Err(bad("orientation must be +1 or -1".into()));
        }
        for (i, c) in self.coords.iter().enumerate() {
            if self.coords[..i].contains(c) {
                return Err(bad(format!("duplicate coordinate `{c}`")));
            }
            let (lo, hi) = self.bounds[i];
            if !(lo < hi) {
                return Err(bad(format!("empty interval [{lo}, {hi}] for `{c}`")));
            }
            if self.periodic[i] && ((hi - lo) - TAU).abs() > 1e-12 {
                return Err(bad(format!("periodic coordinate `{c}` must span 2π")));
            }
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn index_of(&self, coord: &str) -> Result<usize> {
        self.coords
            .iter()
            .position(|c| c == coord)
            .ok_or_else(|| Error::UnknownCoordinate(coord.to_string()))
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.len() == self.dim()
            && self
                .bounds
                .iter()
                .zip(p)
                .all(|(&(lo, hi), &x)| x >= lo - tol && x <= hi + tol)
    }

    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    /// Product chart with `self`'s coordinates first. Orientation multiplies.
    pub fn product(&self, other: &Chart) -> Result<Chart> {
        let mut coords = self.coords.clone();
        coords.extend(other.coords.iter().cloned());
        let mut bounds = self.bounds.clone();
        bounds.extend(other.bounds.iter().copied());
        let mut periodic = self.periodic.clone();
        periodic.extend(other.periodic.iter().copied());
        let mut radial = self.radial.clone();
        radial.extend(other.radial.iter().copied());
        Chart {
            name: format!("{}×{}", self.name, other.name),
            coords,
            bounds,
            periodic,
            orientation: self.orientation * other.orientation,
            radial,
        }
        .validated()
    }

    pub fn shared(self) -> Arc<Chart> {
        Arc::new(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_intervals_and_periods() {
        assert!(Chart::new("a", &["x"], &[(1.0, 1.0)]).is_err());
        assert!(Chart::new("a", &["x", "y"], &[(0.0, 1.0)]).is_err());
        assert!(Chart::new("a", &["x", "x"], &[(0.0, 1.0), (0.0, 1.0)]).is_err());
        let c = Chart::new("a", &["t"], &[(0.0, 6.0)]).unwrap();
        assert!(c.clone().with_periodic("t").is_err());
        let c = Chart::new("a", &["t"], &[(0.0, TAU)]).unwrap();
        assert!(c.with_periodic("t").is_ok());
    }

    #[test]
    fn product_concatenates_and_multiplies_orientation() {
        let a = Chart::new("a", &["x"], &[(0.0, 1.0)])
            .unwrap()
            .with_orientation(-1)
            .unwrap();
        let b = Chart::new("b", &["u", "v"], &[(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let p = a.product(&b).unwrap();
        assert_eq!(p.coords, vec!["x", "u", "v"]);
        assert_eq!(p.orientation, -1);
        assert!(a.product(&a).is_err());
    }
}
