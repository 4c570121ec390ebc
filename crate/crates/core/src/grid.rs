//! Evaluation grids on the unit interval and trapezoid quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered evaluation points in `[0, 1]` with trapezoid weights.
///
/// A grid built from raw source coordinates remembers the affine map back to
/// them: `source = offset + scale * point`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    points: Vec<f64>,
    weights: Vec<f64>,
    offset: f64,
    scale: f64,
}

impl Grid {
    /// Grid from points already on the unit interval.
    pub fn new(points: Vec<f64>) -> Result<Self> {
        Self::with_map(points, 0.0, 1.0)
    }

    /// `m` equally spaced points covering `[0, 1]`.
    pub fn uniform(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {m}")));
        }
        let last = (m - 1) as f64;
        let points = (0..m).map(|j| j as f64 / last).collect();
        Self::new(points)
    }

    /// Rescales strictly increasing source coordinates onto `[0, 1]`.
    pub fn from_source(source: &[f64]) -> Result<Self> {
        if source.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                source.len()
            )));
        }
        let offset = source[0];
        let scale = source[source.len() - 1] - offset;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidGrid("source range must be positive and finite".into()));
        }
        let last = source.len() - 1;
        let points = source
            .iter()
            .enumerate()
            .map(|(j, &s)| match j {
                0 => 0.0,
                j if j == last => 1.0,
                _ => (s - offset) / scale,
            })
            .collect();
        Self::with_map(points, offset, scale)
    }

    fn with_map(points: Vec<f64>, offset: f64, scale: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
            return Err(Error::InvalidGrid("points must lie in [0, 1]".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("points must be strictly increasing".into()));
        }
        let m = points.len();
        let mut weights = vec![0.0; m];
        for j in 0..m - 1 {
            let half = 0.5 * (points[j + 1] - points[j]);
            weights[j] += half;
            weights[j + 1] += half;
        }
        Ok(Self {
            points,
            weights,
            offset,
            scale,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Trapezoid weights; they sum to `last - first`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Maps a grid point back to source coordinates.
    pub fn to_source(&self, index: usize) -> f64 {
        self.offset + self.scale * self.points[index]
    }

    /// Source-coordinate points.
    pub fn source_points(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.to_source(j)).collect()
    }

    /// Evaluates `f` at every grid point.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.points.iter().map(|&t| f(t)).collect()
    }
}

/// Trapezoid-rule integral of `values` over the grid.
pub fn integrate(values: &[f64], grid: &Grid) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "integrand has {} entries, grid has {}",
            values.len(),
            grid.len()
        )));
    }
    let mut acc = 0.0;
    for (j, (&v, &w)) in values.iter().zip(grid.weights()).enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                index: j,
                t: grid.points()[j],
            });
        }
        acc += v * w;
    }
    Ok(acc)
}

/// Inner product of two grid functions, `∫ f g`.
pub fn inner_product(f: &[f64], g: &[f64], grid: &Grid) -> Result<f64> {
    if f.len() != g.len() {
        return Err(Error::InvalidParameter("inner product of mismatched lengths".into()));
    }
    let prod: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    integrate(&prod, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrates_to_one() {
        for m in [2, 3, 17, 100] {
            let g = Grid::uniform(m).unwrap();
            let v = integrate(&vec![1.0; m], &g).unwrap();
            assert!((v - 1.0).abs() < 1e-14);
        }
        let g = Grid::new(vec![0.0, 0.1, 0.15, 0.7, 1.0]).unwrap();
        assert!((integrate(&[1.0; 5], &g).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn linear_is_exact() {
        let g = Grid::uniform(101).unwrap();
        let f = g.map(|t| t);
        assert!((integrate(&f, &g).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quadratic_matches_trapezoid_error() {
        // trapezoid error for t^2 on a uniform mesh is h^2/6 over [0,1]
        let g = Grid::uniform(101).unwrap();
        let f = g.map(|t| t * t);
        let h = 0.01_f64;
        let expected = 1.0 / 3.0 + h * h / 6.0;
        let v = integrate(&f, &g).unwrap();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.333350).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_grids_and_integrands() {
        assert!(Grid::uniform(1).is_err());
        assert!(Grid::new(vec![0.0, 0.5, 0.5]).is_err());
        assert!(Grid::new(vec![0.2, 0.1]).is_err());
        assert!(Grid::from_source(&[3.0]).is_err());
        let g = Grid::uniform(3).unwrap();
        assert!(matches!(
            integrate(&[0.0, f64::NAN, 1.0], &g),
            Err(Error::NonFinite { index: 1, .. })
        ));
    }

    #[test]
    fn source_rescaling_is_recorded() {
        let src: Vec<f64> = (0..176).map(|j| 3.0 + 18.6 * j as f64 / 175.0).collect();
        let g = Grid::from_source(&src).unwrap();
        assert_eq!(g.offset(), 3.0);
        assert!((g.scale() - 18.6).abs() < 1e-12);
        assert_eq!(g.points()[0], 0.0);
        assert_eq!(g.points()[175], 1.0);
        assert!((g.to_source(175) - 21.6).abs() < 1e-12);
        // integral over the source interval is the unit-interval integral times scale
        let f: Vec<f64> = src.iter().map(|s| s * 0.5).collect();
        let unit = integrate(&f, &g).unwrap();
        let direct: f64 = src
            .windows(2)
            .zip(f.windows(2))
            .map(|(s, v)| 0.5 * (s[1] - s[0]) * (v[0] + v[1]))
            .sum();
        assert!((unit * g.scale() - direct).abs() < 1e-10);
    }

    #[test]
    fn weights_sum_to_span() {
        let g = Grid::new(vec![0.1, 0.3, 0.35, 0.9]).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 0.8).abs() < 1e-15);
        assert!(g.weights().iter().all(|w| *w >= 0.0));
    }
}
