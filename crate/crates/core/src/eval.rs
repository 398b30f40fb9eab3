//! Evaluation of a lattice state at continuous configurations.
//!
//! Values are multilinear interpolants of the sector arrays. Gradients are
//! spectral derivatives tabulated once per state, then interpolated the same
//! way.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{Configuration, FockState};
use crate::grid::GridSpec;
use crate::spectral::Spectral;

/// Interpolation weights of the `2^A` lattice corners around a point.
#[derive(Debug, Clone, Default)]
pub struct Stencil {
    pub entries: Vec<(usize, f64)>,
}

impl Stencil {
    pub fn new<I: IntoIterator<Item = f64>>(grid: &GridSpec, coords: I) -> Self {
        let g = grid.points();
        let h = grid.spacing();
        let mut entries = vec![(0usize, 1.0f64)];
        for x in coords {
            let s = grid.wrap(x) / h;
            let lo = s.floor();
            let t = s - lo;
            let i0 = (lo as usize) % g;
            let i1 = (i0 + 1) % g;
            let mut next = Vec::with_capacity(entries.len() * 2);
            for &(idx, w) in &entries {
                next.push((idx * g + i0, w * (1.0 - t)));
                next.push((idx * g + i1, w * t));
            }
            entries = next;
        }
        Self { entries }
    }

    pub fn apply(&self, data: &[Complex64]) -> Complex64 {
        self.entries.iter().map(|&(i, w)| data[i] * w).sum()
    }
}

/// Value and gradient of the wavefunction at one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PointValue {
    pub value: Complex64,
    /// One entry per coordinate, electrons first (`d` entries per particle).
    pub gradient: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct StateEvaluator<'a> {
    state: &'a FockState,
    gradients: Vec<Vec<Vec<Complex64>>>,
    sector_max: Vec<f64>,
}

impl<'a> StateEvaluator<'a> {
    pub fn new(state: &'a FockState) -> Self {
        let grid = state.grid();
        let spectral = Spectral::new(grid.points(), grid.length());
        let d = grid.dimension();
        let gradients = (0..=state.max_photons())
            .map(|m| {
                let axes = (state.electrons() + m) * d;
                (0..axes)
                    .map(|a| spectral.derivative(state.sector(m), axes, a))
                    .collect()
            })
            .collect();
        let sector_max = state
            .sectors()
            .iter()
            .map(|a| a.iter().map(|z| z.norm()).fold(0.0, f64::max))
            .collect();
        Self {
            state,
            gradients,
            sector_max,
        }
    }

    pub fn state(&self) -> &'a FockState {
        self.state
    }

    pub fn grid(&self) -> &GridSpec {
        self.state.grid()
    }

    /// Largest amplitude magnitude stored in sector `m`.
    pub fn sector_max(&self, m: usize) -> f64 {
        self.sector_max[m]
    }

    /// Tabulated spectral derivative of sector `m` along coordinate `axis`.
    pub fn gradient_table(&self, m: usize, axis: usize) -> &[Complex64] {
        &self.gradients[m][axis]
    }

    fn check(&self, q: &Configuration) -> Result<()> {
        if q.sector > self.state.max_photons() {
            return Err(Error::Shape(format!(
                "sector {} exceeds photon cap {}",
                q.sector,
                self.state.max_photons()
            )));
        }
        Ok(())
    }

    pub fn value(&self, q: &Configuration) -> Result<Complex64> {
        self.check(q)?;
        Ok(Stencil::new(self.grid(), q.coordinates()).apply(self.state.sector(q.sector)))
    }

    pub fn point_eval(&self, q: &Configuration) -> Result<PointValue> {
        self.check(q)?;
        let stencil = Stencil::new(self.grid(), q.coordinates());
        Ok(PointValue {
            value: stencil.apply(self.state.sector(q.sector)),
            gradient: self.gradients[q.sector].iter().map(|t| stencil.apply(t)).collect(),
        })
    }

    /// `Psi(q with photon j deleted)`.
    pub fn value_without_photon(&self, q: &Configuration, j: usize) -> Complex64 {
        let d = self.grid().dimension();
        let skip = j * d..(j + 1) * d;
        let coords = q
            .electrons
            .iter()
            .chain(q.photons.iter().enumerate().filter(|(k, _)| !skip.contains(k)).map(|(_, y)| y))
            .copied();
        Stencil::new(self.grid(), coords).apply(self.state.sector(q.sector - 1))
    }

    /// Fills `out[s] = Psi(q, y'_s)` for every lattice site `s` of the
    /// appended photon. Requires `q.sector < M_max`.
    pub fn values_with_appended_site(&self, q: &Configuration, out: &mut [Complex64]) {
        let sites = self.grid().sites();
        let stencil = Stencil::new(self.grid(), q.coordinates());
        let data = self.state.sector(q.sector + 1);
        out.iter_mut().for_each(|z| *z = Complex64::default());
        for &(base, w) in &stencil.entries {
            let row = &data[base * sites..(base + 1) * sites];
            for (o, v) in out.iter_mut().zip(row) {
                *o += v * w;
            }
        }
    }
}

/// One-shot evaluation; prefer [`StateEvaluator`] for repeated queries.
pub fn point_eval(state: &FockState, q: &Configuration) -> Result<PointValue> {
    StateEvaluator::new(state).point_eval(q)
}
