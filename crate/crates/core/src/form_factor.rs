//! Cutoff profiles that smear the electron-photon coupling.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FormFactorKind {
    /// Normalized isotropic gaussian of standard deviation `width`.
    Gaussian { width: f64 },
    /// Smooth bump `exp(-1 / (1 - (r/radius)^2))`, exactly zero for `r >= radius`,
    /// normalized to unit integral.
    Bump { radius: f64 },
}

impl FormFactorKind {
    pub fn scale(&self) -> f64 {
        match *self {
            Self::Gaussian { width } => width,
            Self::Bump { radius } => radius,
        }
    }
}

/// Surface area of the unit sphere in `d` dimensions.
fn unit_sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// `int_0^1 u^(d-1) exp(-1/(1-u^2)) du` by composite Simpson.
fn bump_radial_integral(d: usize) -> f64 {
    let n = 20_000;
    let h = 1.0 / n as f64;
    let f = |u: f64| {
        if u >= 1.0 {
            0.0
        } else {
            u.powi(d as i32 - 1) * (-1.0 / (1.0 - u * u)).exp()
        }
    };
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[derive(Debug, Clone)]
pub struct FormFactor {
    kind: FormFactorKind,
    grid: GridSpec,
    amplitude: f64,
    twist: Option<Vec<f64>>,
    table: Vec<Complex64>,
}

impl FormFactor {
    pub fn new(kind: FormFactorKind, grid: &GridSpec) -> Result<Self> {
        let scale = kind.scale();
        if !(scale > 0.0) || scale >= 0.5 * grid.length() {
            return Err(Error::Config(format!(
                "form factor width/radius must lie in (0, L/2) = (0, {}), got {scale}",
                0.5 * grid.length()
            )));
        }
        let d = grid.dimension();
        let amplitude = match kind {
            FormFactorKind::Gaussian { width } => (2.0 * PI * width * width).powf(-(d as f64) / 2.0),
            FormFactorKind::Bump { radius } => {
                1.0 / (radius.powi(d as i32) * unit_sphere_area(d) * bump_radial_integral(d))
            }
        };
        let mut ff = Self {
            kind,
            grid: *grid,
            amplitude,
            twist: None,
            table: Vec::new(),
        };
        ff.retabulate();
        Ok(ff)
    }

    /// Multiplies the profile by `exp(i kappa . r)`, producing a complex
    /// form factor. Used to exercise the non-real code paths.
    pub fn twisted(mut self, kappa: &[f64]) -> Self {
        assert_eq!(kappa.len(), self.grid.dimension());
        self.twist = Some(kappa.to_vec());
        self.retabulate();
        self
    }

    fn retabulate(&mut self) {
        let grid = self.grid;
        self.table = (0..grid.sites())
            .map(|s| {
                let r: Vec<f64> = grid
                    .site_position(s)
                    .iter()
                    .map(|&x| grid.displacement(0.0, x))
                    .collect();
                self.profile(&r)
            })
            .collect();
    }

    fn radial(&self, r: f64) -> f64 {
        match self.kind {
            FormFactorKind::Gaussian { width } => self.amplitude * (-0.5 * r * r / (width * width)).exp(),
            FormFactorKind::Bump { radius } => {
                let u = r / radius;
                if u >= 1.0 {
                    0.0
                } else {
                    self.amplitude * (-1.0 / (1.0 - u * u)).exp()
                }
            }
        }
    }

    /// `phi(r)` for an already minimum-imaged displacement.
    fn profile(&self, r: &[f64]) -> Complex64 {
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        let base = Complex64::new(self.radial(norm), 0.0);
        match &self.twist {
            Some(kappa) => base * Complex64::from_polar(1.0, kappa.iter().zip(r).map(|(k, x)| k * x).sum()),
            None => base,
        }
    }

    /// `phi(to - from)` with minimum-image wrapping; both are `d`-vectors.
    pub fn between(&self, from: &[f64], to: &[f64]) -> Complex64 {
        let r: Vec<f64> = from
            .iter()
            .zip(to)
            .map(|(&a, &b)| self.grid.displacement(a, b))
            .collect();
        self.profile(&r)
    }

    /// `phi(y - x)` for lattice sites `x` and `y`.
    pub fn between_sites(&self, from: usize, to: usize) -> Complex64 {
        self.table[self.grid.site_difference(from, to)]
    }

    /// Tabulated values indexed by the wrapped site displacement.
    pub fn table(&self) -> &[Complex64] {
        &self.table
    }

    pub fn kind(&self) -> FormFactorKind {
        self.kind
    }

    pub fn peak(&self) -> f64 {
        self.amplitude
    }

    pub fn is_real(&self) -> bool {
        self.twist.is_none()
    }

    /// Radius beyond which `phi` vanishes identically; `L/2` for the gaussian.
    pub fn support_radius(&self) -> f64 {
        match self.kind {
            FormFactorKind::Gaussian { .. } => 0.5 * self.grid.length(),
            FormFactorKind::Bump { radius } => radius,
        }
    }
}
