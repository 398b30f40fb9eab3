//! Matrix-free application of the cutoff electron-photon Hamiltonian
//! `H = H_F + H_B + H_int (+ V + E0 * m)` on truncated Fock states.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{split_index, Configuration, FockState};
use crate::form_factor::FormFactor;
use crate::grid::GridSpec;
use crate::spectral::Spectral;

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub mass_electron: f64,
    pub mass_photon: f64,
    pub coupling: f64,
    /// External scalar potential acting on each electron, tabulated per site.
    pub potential: Option<Vec<f64>>,
    /// Rest energy added per photon.
    pub photon_rest_energy: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass_electron: 1.0,
            mass_photon: 1.0,
            coupling: 0.0,
            potential: None,
            photon_rest_energy: 0.0,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if !(self.hbar > 0.0 && self.mass_electron > 0.0 && self.mass_photon > 0.0) {
            return Err(Error::Config("hbar and masses must be positive".into()));
        }
        if !self.coupling.is_finite() {
            return Err(Error::Config("coupling must be finite".into()));
        }
        if self.photon_rest_energy < 0.0 {
            return Err(Error::Config("photon rest energy must be non-negative".into()));
        }
        if let Some(v) = &self.potential {
            if v.len() != grid.sites() {
                return Err(Error::Config(format!(
                    "potential has {} entries, grid has {} sites",
                    v.len(),
                    grid.sites()
                )));
            }
        }
        Ok(())
    }
}

/// Harmonic trap `m omega^2 |x - c|^2 / 2` centred in the box.
pub fn harmonic_potential(grid: &GridSpec, mass: f64, omega: f64) -> Vec<f64> {
    let c = 0.5 * grid.length();
    (0..grid.sites())
        .map(|s| {
            let r2: f64 = grid.site_position(s).iter().map(|x| (x - c).powi(2)).sum();
            0.5 * mass * omega * omega * r2
        })
        .collect()
}

const COUPLING_TABLE_MAX_SITES: usize = 1024;

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    grid: GridSpec,
    electrons: usize,
    max_photons: usize,
    params: PhysicalParams,
    form_factor: FormFactor,
    spectral: Spectral,
    /// `phi(y - x)` indexed `[x * sites + y]` when small enough to cache.
    coupling_table: Option<Vec<Complex64>>,
}

impl Hamiltonian {
    pub fn new(
        grid: GridSpec,
        electrons: usize,
        max_photons: usize,
        params: PhysicalParams,
        form_factor: FormFactor,
    ) -> Result<Self> {
        if electrons == 0 {
            return Err(Error::Config("electron count must be at least 1".into()));
        }
        params.validate(&grid)?;
        let sites = grid.sites();
        let coupling_table = (sites <= COUPLING_TABLE_MAX_SITES).then(|| {
            (0..sites * sites)
                .map(|k| form_factor.between_sites(k / sites, k % sites))
                .collect()
        });
        Ok(Self {
            spectral: Spectral::new(grid.points(), grid.length()),
            grid,
            electrons,
            max_photons,
            params,
            form_factor,
            coupling_table,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn electrons(&self) -> usize {
        self.electrons
    }

    pub fn max_photons(&self) -> usize {
        self.max_photons
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn form_factor(&self) -> &FormFactor {
        &self.form_factor
    }

    pub fn zero_state(&self) -> FockState {
        FockState::zeros(self.grid, self.electrons, self.max_photons).expect("validated in constructor")
    }

    fn check(&self, psi: &FockState) {
        assert!(
            psi.grid() == &self.grid && psi.electrons() == self.electrons && psi.max_photons() == self.max_photons,
            "state shape does not match Hamiltonian"
        );
    }

    #[inline]
    fn phi_sites(&self, x: usize, y: usize) -> Complex64 {
        match &self.coupling_table {
            Some(t) => t[x * self.grid.sites() + y],
            None => self.form_factor.between_sites(x, y),
        }
    }

    pub fn apply_kinetic(&self, psi: &FockState) -> FockState {
        self.check(psi);
        let d = self.grid.dimension();
        let hb2 = self.params.hbar * self.params.hbar;
        let mut out = self.zero_state();
        for m in 0..=self.max_photons {
            let coeffs: Vec<f64> = (0..(self.electrons + m) * d)
                .map(|a| {
                    let mass = if a < self.electrons * d {
                        self.params.mass_electron
                    } else {
                        self.params.mass_photon
                    };
                    hb2 / (2.0 * mass)
                })
                .collect();
            *out.sector_mut(m) = self.spectral.quadratic_multiplier(psi.sector(m), &coeffs);
        }
        out
    }

    pub fn apply_diagonal(&self, psi: &FockState) -> FockState {
        self.check(psi);
        let sites = self.grid.sites();
        let e0 = self.params.photon_rest_energy;
        let mut out = self.zero_state();
        for m in 0..=self.max_photons {
            let src = psi.sector(m);
            let dst = out.sector_mut(m);
            let tail = sites.pow(m as u32);
            for (f, (o, v)) in dst.iter_mut().zip(src).enumerate() {
                let mut w = e0 * m as f64;
                if let Some(pot) = &self.params.potential {
                    let mut rest = f / tail;
                    for _ in 0..self.electrons {
                        w += pot[rest % sites];
                        rest /= sites;
                    }
                }
                *o = v * w;
            }
        }
        out
    }

    pub fn apply_interaction(&self, psi: &FockState) -> FockState {
        self.check(psi);
        let mut out = self.zero_state();
        let g = self.params.coupling;
        if g == 0.0 {
            return out;
        }
        let sites = self.grid.sites();
        let ne = self.electrons;
        let hd = self.grid.cell_volume();
        let pow: Vec<usize> = (0..=self.electrons + self.max_photons + 1)
            .map(|k| sites.pow(k as u32))
            .collect();

        for m in 0..=self.max_photons {
            let n = ne + m;
            let mut digits = vec![0usize; n];
            let mut prefix = vec![0usize; n + 1];
            let mut suffix = vec![0usize; n + 1];
            let mut weights = vec![Complex64::default(); sites];
            let mut weights_key = usize::MAX;
            let create = (m >= 1).then(|| (psi.sector(m - 1), g / (m as f64).sqrt()));
            let annihilate =
                (m < self.max_photons).then(|| (psi.sector(m + 1), g / ((m + 1) as f64).sqrt() * hd));
            let dst = out.sector_mut(m);
            for (f, slot) in dst.iter_mut().enumerate() {
                split_index(sites, f, &mut digits);
                for k in 0..n {
                    prefix[k + 1] = prefix[k] * sites + digits[k];
                }
                suffix[n] = 0;
                for k in (0..n).rev() {
                    suffix[k] = digits[k] * pow[n - 1 - k] + suffix[k + 1];
                }
                let mut acc = Complex64::default();

                // photon j of this configuration was created from q with j deleted
                if let Some((src, c)) = create {
                    for j in 0..m {
                        let y = digits[ne + j];
                        let phi: Complex64 = digits[..ne].iter().map(|&x| self.phi_sites(x, y)).sum();
                        let idx = prefix[ne + j] * pow[m - 1 - j] + suffix[ne + j + 1];
                        acc += phi * src[idx] * c;
                    }
                }

                // a photon at any site y', inserted at any slot, is absorbed
                if let Some((src, c)) = annihilate {
                    let key = prefix[ne];
                    if key != weights_key {
                        for (yp, w) in weights.iter_mut().enumerate() {
                            *w = digits[..ne].iter().map(|&x| self.phi_sites(x, yp).conj()).sum();
                        }
                        weights_key = key;
                    }
                    for s in 0..=m {
                        let stride = pow[m - s];
                        let base = prefix[ne + s] * pow[m - s + 1] + suffix[ne + s];
                        let mut sum = Complex64::default();
                        for (yp, w) in weights.iter().enumerate() {
                            sum += w * src[base + yp * stride];
                        }
                        acc += sum * c;
                    }
                }
                *slot = acc;
            }
        }
        out
    }

    pub fn apply(&self, psi: &FockState) -> FockState {
        let mut out = self.apply_kinetic(psi);
        out.axpy(Complex64::new(1.0, 0.0), &self.apply_interaction(psi));
        if self.params.potential.is_some() || self.params.photon_rest_energy != 0.0 {
            out.axpy(Complex64::new(1.0, 0.0), &self.apply_diagonal(psi));
        }
        out
    }

    /// Rayleigh quotient `<Psi|H|Psi> / <Psi|Psi>`.
    pub fn energy(&self, psi: &FockState) -> Result<f64> {
        let n = psi.norm_sqr();
        if !(n > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(psi.inner_unchecked(&self.apply(psi)).re / n)
    }

    fn photon_phi_sum(&self, q: &Configuration, y: &[f64]) -> Complex64 {
        let d = self.grid.dimension();
        (0..self.electrons)
            .map(|i| self.form_factor.between(q.electron(i, d), y))
            .sum()
    }

    /// Coefficient of `Psi(col)` in `(H_int Psi)(row)` for configurations
    /// differing by a single photon, read off the position-space form of the
    /// interaction. Returns `None` when the two configurations are not
    /// connected by one creation or annihilation.
    pub fn interaction_kernel(&self, row: &Configuration, col: &Configuration) -> Option<Complex64> {
        let d = self.grid.dimension();
        let g = self.params.coupling;
        if row.electrons != col.electrons {
            return None;
        }
        if col.sector + 1 == row.sector {
            let m = row.sector;
            let j = (0..m).find(|&j| row.without_photon(j, d) == *col)?;
            let y = row.photon(j, d);
            Some(self.photon_phi_sum(row, y) * (g / (m as f64).sqrt()))
        } else if row.sector + 1 == col.sector {
            let m = row.sector;
            let j = (0..=m).find(|&j| col.without_photon(j, d) == *row)?;
            let y = col.photon(j, d);
            Some(self.photon_phi_sum(row, y).conj() * (g * ((m + 1) as f64).sqrt()))
        } else {
            None
        }
    }
}
