//! Bohmian velocities and minimal jump rates.
//!
//! Velocities: `v_k = (hbar / m_k) Im(d_k Psi / Psi)` per coordinate.
//! Annihilation of photon `j` from `q` (sector `m`):
//! `(2g / (hbar sqrt m)) [-Im(Psi(q without j) sum_i phi(y_j - x_i) / Psi(q))]^+`.
//! Creation of a photon at `y'` (a density in `y'`):
//! `(2g sqrt(m+1) / hbar) [-Im(Psi(q, y') sum_i conj(phi(y' - x_i)) / Psi(q))]^+`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::StateEvaluator;
use crate::fock::{flat_index, split_index, Configuration, FockState};
use crate::hamiltonian::Hamiltonian;
use crate::spectral::Spectral;

/// Relative amplitude below which a configuration counts as a node.
pub const NODE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct VelocitySet {
    pub electrons: Vec<f64>,
    pub photons: Vec<f64>,
    /// Set when the node guard zeroed the velocities.
    pub node: bool,
}

impl VelocitySet {
    pub fn max_speed_component(&self) -> f64 {
        self.electrons.iter().chain(&self.photons).fold(0.0, |a, v| a.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpRates {
    pub annihilation: Vec<f64>,
    /// Creation-rate density at every lattice site of the new photon.
    pub creation_density: Vec<f64>,
    /// Running sum of `creation_density`, for inverse-transform sampling.
    pub creation_cumulative: Vec<f64>,
    pub total_annihilation: f64,
    pub total_creation: f64,
    pub node: bool,
}

impl JumpRates {
    pub fn total(&self) -> f64 {
        self.total_annihilation + self.total_creation
    }

    pub fn max_rate(&self) -> f64 {
        self.annihilation
            .iter()
            .chain(&self.creation_density)
            .fold(0.0, |a, &r| a.max(r))
    }
}

/// Rate for deleting one photon, from the amplitudes at the departure
/// configuration (`m` photons) and at the destination.
pub fn annihilation_rate_value(
    psi_here: Complex64,
    psi_removed: Complex64,
    phi_sum: Complex64,
    coupling: f64,
    hbar: f64,
    photons: usize,
) -> f64 {
    let a = -(psi_removed * phi_sum / psi_here).im;
    2.0 * coupling / (hbar * (photons as f64).sqrt()) * a.max(0.0)
}

/// Creation-rate density for adding a photon to a configuration with
/// `photons` photons. `phi_conj_sum` is `sum_i conj(phi(y' - x_i))`.
pub fn creation_density_value(
    psi_here: Complex64,
    psi_added: Complex64,
    phi_conj_sum: Complex64,
    coupling: f64,
    hbar: f64,
    photons: usize,
) -> f64 {
    let a = -(psi_added * phi_conj_sum / psi_here).im;
    2.0 * coupling * ((photons + 1) as f64).sqrt() / hbar * a.max(0.0)
}

/// Velocity field and jump rates of one frozen wavefunction.
#[derive(Debug, Clone)]
pub struct Guide<'a> {
    eval: StateEvaluator<'a>,
    hamiltonian: &'a Hamiltonian,
    node_guard: f64,
}

impl<'a> Guide<'a> {
    pub fn new(state: &'a FockState, hamiltonian: &'a Hamiltonian) -> Self {
        Self {
            eval: StateEvaluator::new(state),
            hamiltonian,
            node_guard: NODE_GUARD,
        }
    }

    pub fn evaluator(&self) -> &StateEvaluator<'a> {
        &self.eval
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        self.hamiltonian
    }

    fn is_node(&self, sector: usize, value: Complex64) -> bool {
        let max = self.eval.sector_max(sector);
        max == 0.0 || value.norm() < self.node_guard * max
    }

    pub fn velocities(&self, q: &Configuration) -> VelocitySet {
        let params = self.hamiltonian.params();
        let ne = q.electrons.len();
        let pv = self.eval.point_eval(q).expect("configuration within photon cap");
        if self.is_node(q.sector, pv.value) {
            return VelocitySet {
                electrons: vec![0.0; ne],
                photons: vec![0.0; q.photons.len()],
                node: true,
            };
        }
        let v = |k: usize, mass: f64| params.hbar / mass * (pv.gradient[k] / pv.value).im;
        VelocitySet {
            electrons: (0..ne).map(|k| v(k, params.mass_electron)).collect(),
            photons: (0..q.photons.len()).map(|k| v(ne + k, params.mass_photon)).collect(),
            node: false,
        }
    }

    fn phi_sum(&self, q: &Configuration, y: &[f64]) -> Complex64 {
        let d = self.eval.grid().dimension();
        let ff = self.hamiltonian.form_factor();
        (0..q.electron_count(d)).map(|i| ff.between(q.electron(i, d), y)).sum()
    }

    /// One rate per photon; empty in the vacuum sector.
    pub fn annihilation_rates(&self, q: &Configuration) -> (Vec<f64>, bool) {
        let m = q.sector;
        if m == 0 {
            return (Vec::new(), false);
        }
        let d = self.eval.grid().dimension();
        let here = self.eval.value(q).expect("configuration within photon cap");
        if self.is_node(m, here) {
            return (vec![0.0; m], true);
        }
        let p = self.hamiltonian.params();
        let rates = (0..m)
            .map(|j| {
                let removed = self.eval.value_without_photon(q, j);
                let phi = self.phi_sum(q, q.photon(j, d));
                annihilation_rate_value(here, removed, phi, p.coupling, p.hbar, m)
            })
            .collect();
        (rates, false)
    }

    /// Creation-rate density over the lattice sites of the new photon; all
    /// zeros in the top sector of the truncated model.
    pub fn creation_rate_field(&self, q: &Configuration) -> (Vec<f64>, bool) {
        let grid = *self.eval.grid();
        let sites = grid.sites();
        let m = q.sector;
        if m >= self.eval.state().max_photons() || self.hamiltonian.params().coupling == 0.0 {
            return (vec![0.0; sites], false);
        }
        let here = self.eval.value(q).expect("configuration within photon cap");
        if self.is_node(m, here) {
            return (vec![0.0; sites], true);
        }
        let mut added = vec![Complex64::default(); sites];
        self.eval.values_with_appended_site(q, &mut added);
        let p = self.hamiltonian.params();
        let density = added
            .iter()
            .enumerate()
            .map(|(s, &psi_added)| {
                let y = grid.site_position(s);
                let phi = self.phi_sum(q, &y).conj();
                creation_density_value(here, psi_added, phi, p.coupling, p.hbar, m)
            })
            .collect();
        (density, false)
    }

    /// Creation-rate density for a photon appearing at an arbitrary point `y`.
    pub fn creation_density_at(&self, q: &Configuration, y: &[f64]) -> f64 {
        if q.sector >= self.eval.state().max_photons() {
            return 0.0;
        }
        let here = self.eval.value(q).expect("configuration within photon cap");
        if self.is_node(q.sector, here) {
            return 0.0;
        }
        let added = self.eval.value(&q.with_photon(y)).expect("sector below cap");
        let p = self.hamiltonian.params();
        creation_density_value(here, added, self.phi_sum(q, y).conj(), p.coupling, p.hbar, q.sector)
    }

    pub fn rates(&self, q: &Configuration) -> JumpRates {
        let (annihilation, node_a) = self.annihilation_rates(q);
        let (creation_density, node_c) = self.creation_rate_field(q);
        let hd = self.eval.grid().cell_volume();
        let mut acc = 0.0;
        let creation_cumulative: Vec<f64> = creation_density
            .iter()
            .map(|c| {
                acc += c * hd;
                acc
            })
            .collect();
        JumpRates {
            total_annihilation: annihilation.iter().sum(),
            total_creation: creation_cumulative.last().copied().unwrap_or(0.0),
            annihilation,
            creation_density,
            creation_cumulative,
            node: node_a || node_c,
        }
    }

    fn amplitude(&self, q: &Configuration) -> Result<Complex64> {
        self.eval.value(q)
    }

    fn check_adjacent(&self, from: &Configuration, to: &Configuration) -> Result<Complex64> {
        self.hamiltonian.interaction_kernel(from, to).ok_or_else(|| {
            Error::Config(format!(
                "configurations in sectors {} and {} are not related by one photon",
                from.sector, to.sector
            ))
        })
    }

    /// Minimal rate `from -> to` in the general form
    /// `(2/hbar) [-Im conj(Psi(from)) <from|H_int|to> Psi(to)]^+ / |Psi(from)|^2`.
    pub fn general_rate(&self, to: &Configuration, from: &Configuration) -> Result<f64> {
        let kernel = self.check_adjacent(from, to)?;
        let (a, b) = (self.amplitude(from)?, self.amplitude(to)?);
        if self.is_node(from.sector, a) {
            return Ok(0.0);
        }
        let hbar = self.hamiltonian.params().hbar;
        let num = -(a.conj() * kernel * b).im;
        Ok(2.0 / hbar * num.max(0.0) / a.norm_sqr())
    }

    /// The same rate written with the reversed kernel,
    /// `(2/hbar) [Im conj(Psi(to)) <to|H_int|from> Psi(from)]^+ / |Psi(from)|^2`,
    /// where `<to|H_int|from>` is the Hermitian conjugate of `<from|H_int|to>`.
    pub fn alternative_rate(&self, to: &Configuration, from: &Configuration) -> Result<f64> {
        let reversed = self.check_adjacent(from, to)?.conj();
        let (a, b) = (self.amplitude(from)?, self.amplitude(to)?);
        if self.is_node(from.sector, a) {
            return Ok(0.0);
        }
        let hbar = self.hamiltonian.params().hbar;
        let num = (b.conj() * reversed * a).im;
        Ok(2.0 / hbar * num.max(0.0) / a.norm_sqr())
    }
}

/// Terms of the master equation for `|Psi|^2` at one lattice configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MasterTerms {
    /// `d|Psi|^2/dt = (2/hbar) Im(conj(Psi) H Psi)`.
    pub time_derivative: f64,
    /// `-div(|Psi|^2 v)`.
    pub drift: f64,
    /// Probability flowing in from neighbouring sectors.
    pub gain: f64,
    /// Probability flowing out, `|Psi|^2 * total rate`.
    pub loss: f64,
}

impl MasterTerms {
    pub fn residual(&self) -> f64 {
        self.time_derivative - (self.drift + self.gain - self.loss)
    }

    pub fn scale(&self) -> f64 {
        [self.time_derivative, self.drift, self.gain, self.loss]
            .iter()
            .fold(0.0, |a, x| a.max(x.abs()))
    }
}

/// Writes a creation-rate density as CSV rows `y_1,..,y_d,density`.
pub fn write_rate_csv<W: std::io::Write>(mut w: W, grid: &crate::grid::GridSpec, density: &[f64]) -> Result<()> {
    let d = grid.dimension();
    let header: Vec<String> = (1..=d).map(|a| format!("y{a}")).collect();
    writeln!(w, "{},density", header.join(","))?;
    for (s, c) in density.iter().enumerate() {
        for y in grid.site_position(s) {
            write!(w, "{y:.16e},")?;
        }
        writeln!(w, "{c:.16e}")?;
    }
    Ok(())
}

/// Jump terms at one lattice configuration, each already weighted by `|Psi|^2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Exchange {
    pub gain_from_below: f64,
    pub gain_from_above: f64,
    pub annihilation_loss: f64,
    pub creation_loss: f64,
}

/// Both sides of the master equation on the lattice, with all amplitudes and
/// rates read at lattice nodes.
pub struct MasterEquation<'a> {
    state: &'a FockState,
    hamiltonian: &'a Hamiltonian,
    h_psi: FockState,
    drift: Vec<Vec<f64>>,
}

impl<'a> MasterEquation<'a> {
    pub fn new(state: &'a FockState, hamiltonian: &'a Hamiltonian) -> Self {
        let grid = state.grid();
        let d = grid.dimension();
        let spectral = Spectral::new(grid.points(), grid.length());
        let p = hamiltonian.params();
        let ne = state.electrons();
        let drift = (0..=state.max_photons())
            .map(|m| {
                let axes = (ne + m) * d;
                let psi = state.sector(m);
                let mut div = vec![0.0; psi.len()];
                for a in 0..axes {
                    let mass = if a < ne * d { p.mass_electron } else { p.mass_photon };
                    let dpsi = spectral.derivative(psi, axes, a);
                    let current: Vec<Complex64> = psi
                        .iter()
                        .zip(&dpsi)
                        .map(|(z, dz)| Complex64::new(p.hbar / mass * (z.conj() * dz).im, 0.0))
                        .collect();
                    let dj = spectral.derivative(&current, axes, a);
                    for (acc, x) in div.iter_mut().zip(&dj) {
                        *acc -= x.re;
                    }
                }
                div
            })
            .collect();
        Self {
            state,
            hamiltonian,
            h_psi: hamiltonian.apply(state),
            drift,
        }
    }

    /// Jump contributions at a lattice configuration, split by direction.
    pub fn exchange(&self, m: usize, flat: usize) -> Exchange {
        let grid = self.state.grid();
        let sites = grid.sites();
        let ne = self.state.electrons();
        let p = self.hamiltonian.params();
        let ff = self.hamiltonian.form_factor();
        let hd = grid.cell_volume();
        let here = self.state.sector(m)[flat];
        let rho = here.norm_sqr();
        let mut digits = vec![0usize; ne + m];
        split_index(sites, flat, &mut digits);
        let phi_sum = |y: usize| -> Complex64 { digits[..ne].iter().map(|&x| ff.between_sites(x, y)).sum() };

        let mut out = Exchange::default();
        let live = rho > 0.0;
        if m >= 1 {
            let below = self.state.sector(m - 1);
            for j in 0..m {
                let y = digits[ne + j];
                let mut rest = digits.clone();
                rest.remove(ne + j);
                let removed = below[flat_index(sites, &rest)];
                let phi = phi_sum(y);
                // photon j created from the configuration without it
                if removed.norm_sqr() > 0.0 {
                    let c = creation_density_value(removed, here, phi.conj(), p.coupling, p.hbar, m - 1);
                    out.gain_from_below += removed.norm_sqr() * c / m as f64;
                }
                if live {
                    out.annihilation_loss += rho * annihilation_rate_value(here, removed, phi, p.coupling, p.hbar, m);
                }
            }
        }
        if m < self.state.max_photons() {
            let above = self.state.sector(m + 1);
            let base = flat * sites;
            for yp in 0..sites {
                let added = above[base + yp];
                let phi = phi_sum(yp);
                if added.norm_sqr() > 0.0 {
                    let s = annihilation_rate_value(added, here, phi, p.coupling, p.hbar, m + 1);
                    out.gain_from_above += (m + 1) as f64 * hd * added.norm_sqr() * s;
                }
                if live {
                    out.creation_loss += rho * hd * creation_density_value(here, added, phi.conj(), p.coupling, p.hbar, m);
                }
            }
        }
        out
    }

    pub fn terms(&self, m: usize, flat: usize) -> MasterTerms {
        let p = self.hamiltonian.params();
        let here = self.state.sector(m)[flat];
        let x = self.exchange(m, flat);
        MasterTerms {
            time_derivative: 2.0 / p.hbar * (here.conj() * self.h_psi.sector(m)[flat]).im,
            drift: self.drift[m][flat],
            gain: x.gain_from_below + x.gain_from_above,
            loss: x.annihilation_loss + x.creation_loss,
        }
    }

    /// Largest `|time derivative|` over the whole state, used to normalize
    /// residuals.
    pub fn max_time_derivative(&self) -> f64 {
        let hbar = self.hamiltonian.params().hbar;
        self.state
            .sectors()
            .iter()
            .zip(self.h_psi.sectors())
            .flat_map(|(a, b)| a.iter().zip(b).map(move |(x, y)| (2.0 / hbar * (x.conj() * y).im).abs()))
            .fold(0.0, f64::max)
    }
}
