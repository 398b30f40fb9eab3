//! Periodic lattice geometry.
//!
//! Every particle lives on the same `d`-dimensional torus of side `L`,
//! discretized with `G` nodes per axis. Node `i` sits at `i * h`; the cell
//! belonging to a node is the half-open interval `[x_i - h/2, x_i + h/2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dimension: usize,
    length: f64,
    points: usize,
    spacing: f64,
}

impl GridSpec {
    pub fn new(dimension: usize, length: f64, points: usize) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(Error::Config(format!("dimension must be 1, 2 or 3, got {dimension}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Config(format!("box length must be positive, got {length}")));
        }
        if points < 2 {
            return Err(Error::Config(format!("need at least 2 points per axis, got {points}")));
        }
        Ok(Self {
            dimension,
            length,
            points,
            spacing: length / points as f64,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Nodes per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of lattice sites available to a single particle, `G^d`.
    pub fn sites(&self) -> usize {
        self.points.pow(self.dimension as u32)
    }

    /// Quadrature weight of one particle block, `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dimension as i32)
    }

    pub fn wrap(&self, x: f64) -> f64 {
        let w = x.rem_euclid(self.length);
        // rem_euclid can round up to exactly L for tiny negative inputs
        if w >= self.length {
            0.0
        } else {
            w
        }
    }

    /// Minimum-image displacement `to - from`, in `[-L/2, L/2)`.
    pub fn displacement(&self, from: f64, to: f64) -> f64 {
        let half = 0.5 * self.length;
        (to - from + half).rem_euclid(self.length) - half
    }

    /// Minimum-image distance between two particle positions.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| self.displacement(x, y).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn node_coordinate(&self, index: usize) -> f64 {
        index as f64 * self.spacing
    }

    /// Index of the node whose cell contains `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        let i = (self.wrap(x) / self.spacing).round() as usize;
        i % self.points
    }

    /// Splits a site index (row-major over the `d` axes) into axis indices.
    pub fn site_axes(&self, site: usize, out: &mut [usize]) {
        let mut rest = site;
        for a in (0..self.dimension).rev() {
            out[a] = rest % self.points;
            rest /= self.points;
        }
    }

    pub fn site_position(&self, site: usize) -> Vec<f64> {
        let mut axes = [0usize; 3];
        self.site_axes(site, &mut axes);
        axes[..self.dimension]
            .iter()
            .map(|&i| self.node_coordinate(i))
            .collect()
    }

    /// Site index of the cell containing the position `x` (length `d`).
    pub fn site_of(&self, x: &[f64]) -> usize {
        x.iter()
            .fold(0, |acc, &xi| acc * self.points + self.nearest_node(xi))
    }

    /// Site index of the wrapped node displacement `to - from`.
    pub fn site_difference(&self, from: usize, to: usize) -> usize {
        let g = self.points;
        let mut a = [0usize; 3];
        let mut b = [0usize; 3];
        self.site_axes(from, &mut a);
        self.site_axes(to, &mut b);
        (0..self.dimension).fold(0, |acc, k| acc * g + (b[k] + g - a[k]) % g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_is_length_over_points() {
        let g = GridSpec::new(1, 10.0, 64).unwrap();
        assert_eq!(g.spacing(), 0.15625);
        assert_eq!(g.spacing() * g.points() as f64, g.length());
    }

    #[test]
    fn minimum_image_wraps_across_boundary() {
        let g = GridSpec::new(1, 10.0, 64).unwrap();
        assert!((g.displacement(9.9, 0.1) - 0.2).abs() < 1e-12);
        assert!((g.displacement(0.1, 9.9) + 0.2).abs() < 1e-12);
        assert!((g.displacement(2.0, 3.5) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(GridSpec::new(1, 10.0, 0).is_err());
        assert!(GridSpec::new(1, 10.0, 1).is_err());
        assert!(GridSpec::new(1, -1.0, 8).is_err());
        assert!(GridSpec::new(1, 0.0, 8).is_err());
        assert!(GridSpec::new(4, 1.0, 8).is_err());
    }

    #[test]
    fn wrap_stays_in_box() {
        let g = GridSpec::new(1, 10.0, 8).unwrap();
        for x in [-1e-17, -10.0, 10.0, 23.7, -0.3] {
            let w = g.wrap(x);
            assert!((0.0..10.0).contains(&w), "{x} -> {w}");
        }
    }

    #[test]
    fn nearest_node_uses_centred_cells() {
        let g = GridSpec::new(1, 8.0, 8).unwrap();
        assert_eq!(g.nearest_node(0.49), 0);
        assert_eq!(g.nearest_node(0.51), 1);
        assert_eq!(g.nearest_node(7.6), 0);
    }

    #[test]
    fn site_difference_in_two_dimensions() {
        let g = GridSpec::new(2, 4.0, 4).unwrap();
        // from (3, 1) to (0, 2): (+1, +1) wrapped
        let from = 3 * 4 + 1;
        let to = 2;
        assert_eq!(g.site_difference(from, to), 4 + 1);
    }
}
