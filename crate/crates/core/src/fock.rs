//! Truncated Fock states on the lattice.
//!
//! Sector `m` holds the amplitude of `N` electrons and `m` photons as a dense
//! array over `(G^d)^(N+m)` sites, particle blocks in row-major order with
//! electrons first. Arrays are stored unsymmetrized; photon symmetry and
//! electron antisymmetry are maintained as invariants.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Flat index of a tuple of particle sites.
pub(crate) fn flat_index(sites: usize, digits: &[usize]) -> usize {
    digits.iter().fold(0, |acc, &p| acc * sites + p)
}

/// Inverse of [`flat_index`].
pub(crate) fn split_index(sites: usize, mut flat: usize, out: &mut [usize]) {
    for d in out.iter_mut().rev() {
        *d = flat % sites;
        flat /= sites;
    }
}

/// All permutations of `0..n` with their parity sign (+1 / -1).
pub(crate) fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        let n = used.len();
        if prefix.len() == n {
            out.push((prefix.clone(), sign));
            return;
        }
        for i in 0..n {
            if used[i] {
                continue;
            }
            // inversions contributed by placing i: count of unused smaller elements
            let smaller_unused = (0..i).filter(|&k| !used[k]).count();
            let s = if smaller_unused % 2 == 0 { sign } else { -sign };
            used[i] = true;
            prefix.push(i);
            rec(prefix, used, s, out);
            prefix.pop();
            used[i] = false;
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], 1.0, &mut out);
    out
}

/// Projects a sector array onto the photon-symmetric (and, for `N >= 2`,
/// electron-antisymmetric) subspace by averaging over block permutations.
pub fn enforce_photon_symmetry(
    array: &[Complex64],
    grid: &GridSpec,
    electrons: usize,
    photons: usize,
) -> Vec<Complex64> {
    let sites = grid.sites();
    let n = electrons + photons;
    debug_assert_eq!(array.len(), sites.pow(n as u32));
    let electron_perms = if electrons >= 2 {
        permutations(electrons)
    } else {
        vec![((0..electrons).collect(), 1.0)]
    };
    let photon_perms = permutations(photons);
    if electron_perms.len() * photon_perms.len() == 1 {
        return array.to_vec();
    }
    let norm = 1.0 / (electron_perms.len() * photon_perms.len()) as f64;
    let mut digits = vec![0usize; n];
    let mut permuted = vec![0usize; n];
    let mut out = vec![Complex64::default(); array.len()];
    for (f, slot) in out.iter_mut().enumerate() {
        split_index(sites, f, &mut digits);
        let mut acc = Complex64::default();
        for (ep, es) in &electron_perms {
            for (pp, _) in &photon_perms {
                for (i, &src) in ep.iter().enumerate() {
                    permuted[i] = digits[src];
                }
                for (j, &src) in pp.iter().enumerate() {
                    permuted[electrons + j] = digits[electrons + src];
                }
                acc += array[flat_index(sites, &permuted)] * *es;
            }
        }
        *slot = acc * norm;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    grid: GridSpec,
    electrons: usize,
    max_photons: usize,
    sectors: Vec<Vec<Complex64>>,
}

impl FockState {
    pub fn zeros(grid: GridSpec, electrons: usize, max_photons: usize) -> Result<Self> {
        if electrons == 0 {
            return Err(Error::Config("electron count must be at least 1".into()));
        }
        let sectors = (0..=max_photons)
            .map(|m| vec![Complex64::default(); grid.sites().pow((electrons + m) as u32)])
            .collect();
        Ok(Self {
            grid,
            electrons,
            max_photons,
            sectors,
        })
    }

    pub fn from_sectors(
        grid: GridSpec,
        electrons: usize,
        max_photons: usize,
        sectors: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        let mut state = Self::zeros(grid, electrons, max_photons)?;
        if sectors.len() != max_photons + 1 {
            return Err(Error::Shape(format!(
                "expected {} sectors, got {}",
                max_photons + 1,
                sectors.len()
            )));
        }
        for (m, data) in sectors.into_iter().enumerate() {
            if data.len() != state.sectors[m].len() {
                return Err(Error::Shape(format!(
                    "sector {m}: expected {} amplitudes, got {}",
                    state.sectors[m].len(),
                    data.len()
                )));
            }
            state.sectors[m] = data;
        }
        Ok(state)
    }

    /// Tabulates `f(m, positions)` at every lattice configuration, where
    /// `positions` lists the `d` coordinates of each particle, electrons first.
    pub fn from_fn<F>(grid: GridSpec, electrons: usize, max_photons: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, &[f64]) -> Complex64,
    {
        let mut state = Self::zeros(grid, electrons, max_photons)?;
        let d = grid.dimension();
        let sites = grid.sites();
        let site_pos: Vec<Vec<f64>> = (0..sites).map(|s| grid.site_position(s)).collect();
        for m in 0..=max_photons {
            let n = electrons + m;
            let mut digits = vec![0usize; n];
            let mut coords = vec![0.0; n * d];
            for (flat, amp) in state.sectors[m].iter_mut().enumerate() {
                split_index(sites, flat, &mut digits);
                for (p, &s) in digits.iter().enumerate() {
                    coords[p * d..(p + 1) * d].copy_from_slice(&site_pos[s]);
                }
                *amp = f(m, &coords);
            }
        }
        Ok(state)
    }

    /// Uniformly random amplitudes in every sector, projected onto the
    /// symmetric subspace.
    pub fn random<R: Rng + ?Sized>(
        grid: GridSpec,
        electrons: usize,
        max_photons: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut state = Self::from_fn(grid, electrons, max_photons, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })?;
        state.enforce_symmetry();
        Ok(state)
    }

    /// Random smooth state: a sum of plane waves with every wavenumber
    /// component bounded by `max_mode` (in units of `2 pi / L`).
    pub fn random_band_limited<R: Rng + ?Sized>(
        grid: GridSpec,
        electrons: usize,
        max_photons: usize,
        max_mode: i64,
        terms: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let d = grid.dimension();
        let k0 = 2.0 * std::f64::consts::PI / grid.length();
        let mut waves: Vec<Vec<(Complex64, Vec<f64>)>> = Vec::new();
        for m in 0..=max_photons {
            let axes = (electrons + m) * d;
            let sector_waves = (0..terms)
                .map(|_| {
                    let amp = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                    let ks = (0..axes)
                        .map(|_| rng.gen_range(-max_mode..=max_mode) as f64 * k0)
                        .collect();
                    (amp, ks)
                })
                .collect();
            waves.push(sector_waves);
        }
        let mut state = Self::from_fn(grid, electrons, max_photons, |m, x| {
            waves[m]
                .iter()
                .map(|(a, ks)| {
                    let phase: f64 = ks.iter().zip(x).map(|(k, xi)| k * xi).sum();
                    a * Complex64::from_polar(1.0, phase)
                })
                .sum()
        })?;
        state.enforce_symmetry();
        Ok(state)
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

    pub fn sector(&self, m: usize) -> &[Complex64] {
        &self.sectors[m]
    }

    pub fn sector_mut(&mut self, m: usize) -> &mut Vec<Complex64> {
        &mut self.sectors[m]
    }

    pub fn sectors(&self) -> &[Vec<Complex64>] {
        &self.sectors
    }

    /// Quadrature weight `h^{d(N+m)}` of sector `m`.
    pub fn sector_weight(&self, m: usize) -> f64 {
        self.grid.cell_volume().powi((self.electrons + m) as i32)
    }

    /// Total number of stored amplitudes.
    pub fn dimension(&self) -> usize {
        self.sectors.iter().map(Vec::len).sum()
    }

    pub fn same_shape(&self, other: &FockState) -> bool {
        self.grid == other.grid
            && self.electrons == other.electrons
            && self.max_photons == other.max_photons
    }

    fn check_shape(&self, other: &FockState) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "states differ: (N={}, M={}, {:?}) vs (N={}, M={}, {:?})",
                self.electrons, self.max_photons, self.grid, other.electrons, other.max_photons, other.grid
            )))
        }
    }

    /// Quadrature inner product `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &FockState) -> Result<Complex64> {
        self.check_shape(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &FockState) -> Complex64 {
        self.sectors
            .iter()
            .zip(&other.sectors)
            .enumerate()
            .map(|(m, (a, b))| {
                let s: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                s * self.sector_weight(m)
            })
            .sum()
    }

    /// Unnormalized probability mass per sector.
    pub fn sector_norms_sqr(&self) -> Vec<f64> {
        self.sectors
            .iter()
            .enumerate()
            .map(|(m, a)| a.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.sector_weight(m))
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.sector_norms_sqr().iter().sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn sector_probabilities(&self) -> Result<Vec<f64>> {
        let masses = self.sector_norms_sqr();
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(masses.into_iter().map(|w| w / total).collect())
    }

    pub fn normalized(&self) -> Result<FockState> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> FockState {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    pub fn scale(&mut self, c: Complex64) {
        for z in self.sectors.iter_mut().flatten() {
            *z *= c;
        }
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: Complex64, x: &FockState) {
        debug_assert!(self.same_shape(x));
        for (dst, src) in self.sectors.iter_mut().zip(&x.sectors) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += a * s;
            }
        }
    }

    pub fn conj(&self) -> FockState {
        let mut out = self.clone();
        for z in out.sectors.iter_mut().flatten() {
            *z = z.conj();
        }
        out
    }

    /// Quadrature norm of `self - other`.
    pub fn distance(&self, other: &FockState) -> Result<f64> {
        self.check_shape(other)?;
        let mut diff = self.clone();
        diff.axpy(Complex64::new(-1.0, 0.0), other);
        Ok(diff.norm())
    }

    pub fn enforce_symmetry(&mut self) {
        for m in 0..=self.max_photons {
            let sym = enforce_photon_symmetry(&self.sectors[m], &self.grid, self.electrons, m);
            self.sectors[m] = sym;
        }
    }

    /// Largest deviation from the symmetry projection, relative to the
    /// largest amplitude.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self
            .sectors
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for m in 0..=self.max_photons {
            let sym = enforce_photon_symmetry(&self.sectors[m], &self.grid, self.electrons, m);
            for (a, b) in sym.iter().zip(&self.sectors[m]) {
                worst = worst.max((a - b).norm());
            }
        }
        worst / scale
    }
}

/// A point of configuration space: sector `m`, `N` electron positions and
/// `m` photon positions, each a `d`-vector stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub sector: usize,
    pub electrons: Vec<f64>,
    pub photons: Vec<f64>,
}

impl Configuration {
    pub fn new(electrons: Vec<f64>, photons: Vec<f64>, dimension: usize) -> Self {
        Self {
            sector: photons.len() / dimension,
            electrons,
            photons,
        }
    }

    pub fn electron(&self, i: usize, d: usize) -> &[f64] {
        &self.electrons[i * d..(i + 1) * d]
    }

    pub fn photon(&self, j: usize, d: usize) -> &[f64] {
        &self.photons[j * d..(j + 1) * d]
    }

    pub fn electron_count(&self, d: usize) -> usize {
        self.electrons.len() / d
    }

    /// The configuration with photon `j` removed.
    pub fn without_photon(&self, j: usize, d: usize) -> Configuration {
        let mut photons = self.photons.clone();
        photons.drain(j * d..(j + 1) * d);
        Configuration {
            sector: self.sector - 1,
            electrons: self.electrons.clone(),
            photons,
        }
    }

    /// The configuration with a photon appended at `y`.
    pub fn with_photon(&self, y: &[f64]) -> Configuration {
        let mut photons = self.photons.clone();
        photons.extend_from_slice(y);
        Configuration {
            sector: self.sector + 1,
            electrons: self.electrons.clone(),
            photons,
        }
    }

    /// All coordinates, electrons first.
    pub fn coordinates(&self) -> impl Iterator<Item = f64> + '_ {
        self.electrons.iter().chain(&self.photons).copied()
    }

    pub fn in_box(&self, grid: &GridSpec) -> bool {
        self.coordinates().all(|x| (0.0..grid.length()).contains(&x))
    }
}

/// Cumulative tables for drawing configurations from `|Psi|^2`.
#[derive(Debug, Clone)]
pub struct ConfigurationSampler {
    grid: GridSpec,
    electrons: usize,
    sector_cdf: Vec<f64>,
    cell_cdf: Vec<Vec<f64>>,
}

impl ConfigurationSampler {
    pub fn new(state: &FockState) -> Result<Self> {
        let probs = state.sector_probabilities()?;
        let mut acc = 0.0;
        let sector_cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let cell_cdf = state
            .sectors()
            .iter()
            .map(|a| {
                let mut c = 0.0;
                a.iter()
                    .map(|z| {
                        c += z.norm_sqr();
                        c
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            grid: *state.grid(),
            electrons: state.electrons(),
            sector_cdf,
            cell_cdf,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        let total = *self.sector_cdf.last().unwrap();
        let u = rng.gen::<f64>() * total;
        let mut m = self.sector_cdf.partition_point(|&c| c <= u);
        // never land on an empty sector because of rounding in the last bin
        while m >= self.sector_cdf.len() || self.cell_cdf[m].last().copied().unwrap_or(0.0) == 0.0 {
            m = if m == 0 { self.sector_cdf.len() - 1 } else { m - 1 };
        }
        let cdf = &self.cell_cdf[m];
        let u = rng.gen::<f64>() * cdf[cdf.len() - 1];
        let flat = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);

        let d = self.grid.dimension();
        let n = self.electrons + m;
        let mut digits = vec![0usize; n];
        split_index(self.grid.sites(), flat, &mut digits);
        let mut axes = [0usize; 3];
        let h = self.grid.spacing();
        let mut coords = Vec::with_capacity(n * d);
        for &site in &digits {
            self.grid.site_axes(site, &mut axes);
            for &i in &axes[..d] {
                let jitter = (rng.gen::<f64>() - 0.5) * h;
                coords.push(self.grid.wrap(self.grid.node_coordinate(i) + jitter));
            }
        }
        let photons = coords.split_off(self.electrons * d);
        Configuration {
            sector: m,
            electrons: coords,
            photons,
        }
    }
}

/// Draws one configuration distributed according to `|Psi|^2`.
pub fn sample_configuration<R: Rng + ?Sized>(state: &FockState, rng: &mut R) -> Result<Configuration> {
    Ok(ConfigurationSampler::new(state)?.sample(rng))
}
