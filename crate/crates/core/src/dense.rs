//! Dense-matrix oracle for small lattices.
//!
//! The basis is the set of lattice delta functions normalized in the
//! quadrature inner product, ordered exactly like the snapshot format
//! (sector by sector, row-major within a sector). In this basis the
//! Hamiltonian matrix is Hermitian and the Euclidean norm of a coordinate
//! vector equals the quadrature norm of the state.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{enforce_photon_symmetry, FockState};
use crate::grid::GridSpec;
use crate::hamiltonian::Hamiltonian;

pub const DEFAULT_DIMENSION_CAP: usize = 20_000;

/// Total number of amplitudes in a truncated Fock space.
pub fn fock_dimension(grid: &GridSpec, electrons: usize, max_photons: usize) -> usize {
    (0..=max_photons)
        .map(|m| grid.sites().pow((electrons + m) as u32))
        .sum()
}

pub fn flatten(state: &FockState) -> DVector<Complex64> {
    let mut out = Vec::with_capacity(state.dimension());
    for m in 0..=state.max_photons() {
        let w = state.sector_weight(m).sqrt();
        out.extend(state.sector(m).iter().map(|z| z * w));
    }
    DVector::from_vec(out)
}

pub fn unflatten(
    v: &DVector<Complex64>,
    grid: GridSpec,
    electrons: usize,
    max_photons: usize,
) -> Result<FockState> {
    let mut state = FockState::zeros(grid, electrons, max_photons)?;
    if v.len() != state.dimension() {
        return Err(Error::Shape(format!(
            "vector of length {} for Fock dimension {}",
            v.len(),
            state.dimension()
        )));
    }
    let mut offset = 0;
    for m in 0..=max_photons {
        let w = 1.0 / state.sector_weight(m).sqrt();
        let sector = state.sector_mut(m);
        for (k, z) in sector.iter_mut().enumerate() {
            *z = v[offset + k] * w;
        }
        offset += sector.len();
    }
    Ok(state)
}

#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub matrix: DMatrix<Complex64>,
    grid: GridSpec,
    electrons: usize,
    max_photons: usize,
    hbar: f64,
}

/// Builds the dense matrix column by column from the matrix-free operator.
pub fn assemble_dense(hamiltonian: &Hamiltonian, cap: usize) -> Result<DenseOperator> {
    let grid = *hamiltonian.grid();
    let (ne, mp) = (hamiltonian.electrons(), hamiltonian.max_photons());
    let dim = fock_dimension(&grid, ne, mp);
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let columns: Vec<DVector<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut e = DVector::<Complex64>::zeros(dim);
            e[j] = Complex64::new(1.0, 0.0);
            let basis = unflatten(&e, grid, ne, mp).expect("dimension checked");
            flatten(&hamiltonian.apply(&basis))
        })
        .collect();
    let matrix = DMatrix::from_columns(&columns);
    Ok(DenseOperator {
        matrix,
        grid,
        electrons: ne,
        max_photons: mp,
        hbar: hamiltonian.params().hbar,
    })
}

#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<Complex64>,
}

impl DenseSpectrum {
    fn from_matrix(matrix: DMatrix<Complex64>) -> Self {
        let eig = SymmetricEigen::new(matrix);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let cols: Vec<_> = order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();
        Self {
            values,
            vectors: DMatrix::from_columns(&cols),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: FockState,
    /// Second eigenvector when the lowest level is degenerate within 1e-10.
    pub degenerate_partner: Option<FockState>,
    pub gap: f64,
}

impl DenseOperator {
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `max |H - H^dagger| / max |H|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dimension();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let a = self.matrix[(i, j)];
                scale = scale.max(a.norm());
                worst = worst.max((a - self.matrix[(j, i)].conj()).norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        let v = flatten(state);
        if v.len() != self.dimension() {
            return Err(Error::Shape("state does not match dense operator".into()));
        }
        unflatten(&(&self.matrix * v), self.grid, self.electrons, self.max_photons)
    }

    pub fn spectrum(&self) -> DenseSpectrum {
        DenseSpectrum::from_matrix(self.hermitian_part())
    }

    fn hermitian_part(&self) -> DMatrix<Complex64> {
        (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0)
    }

    pub fn unflatten(&self, v: &DVector<Complex64>) -> Result<FockState> {
        unflatten(v, self.grid, self.electrons, self.max_photons)
    }

    /// `exp(-i H t / hbar)` as a dense matrix.
    pub fn propagator(&self, spectrum: &DenseSpectrum, t: f64) -> DMatrix<Complex64> {
        let phases = DVector::from_iterator(
            spectrum.values.len(),
            spectrum.values.iter().map(|&e| Complex64::from_polar(1.0, -e * t / self.hbar)),
        );
        let scaled = DMatrix::from_fn(self.dimension(), self.dimension(), |i, j| {
            spectrum.vectors[(i, j)] * phases[j]
        });
        scaled * spectrum.vectors.adjoint()
    }

    pub fn evolve(&self, spectrum: &DenseSpectrum, state: &FockState, t: f64) -> Result<FockState> {
        let u = self.propagator(spectrum, t);
        self.unflatten(&(u * flatten(state)))
    }

    fn needs_symmetry_restriction(&self) -> bool {
        self.electrons >= 2 || self.max_photons >= 2
    }

    /// Orthogonal projector onto the photon-symmetric (electron-antisymmetric)
    /// subspace, in the dense basis.
    pub fn symmetry_projector(&self) -> DMatrix<Complex64> {
        let n = self.dimension();
        let cols: Vec<DVector<Complex64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut e = DVector::<Complex64>::zeros(n);
                e[j] = Complex64::new(1.0, 0.0);
                let mut s = self.unflatten(&e).expect("dimension checked");
                for m in 0..=self.max_photons {
                    let sym = enforce_photon_symmetry(s.sector(m), &self.grid, self.electrons, m);
                    *s.sector_mut(m) = sym;
                }
                flatten(&s)
            })
            .collect();
        DMatrix::from_columns(&cols)
    }

    /// Lowest eigenpair within the physical (symmetry-respecting) subspace,
    /// phase-aligned so the largest-magnitude amplitude is real positive.
    pub fn ground_state(&self) -> Result<GroundState> {
        let matrix = if self.needs_symmetry_restriction() {
            // push the unphysical complement above the whole spectrum
            let p = self.symmetry_projector();
            let id = DMatrix::<Complex64>::identity(self.dimension(), self.dimension());
            let bound: f64 = self.matrix.iter().map(|z| z.norm()).sum::<f64>() + 1.0;
            let h = self.hermitian_part();
            &p * h * &p + (id - &p) * Complex64::new(bound, 0.0)
        } else {
            self.hermitian_part()
        };
        let spectrum = DenseSpectrum::from_matrix(matrix);
        let align = |k: usize| -> Result<FockState> {
            let v = spectrum.vectors.column(k).into_owned();
            let (imax, _) = v
                .iter()
                .enumerate()
                .fold((0, 0.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
            let phase = v[imax].conj() / v[imax].norm();
            let v = v * phase;
            self.unflatten(&(v.clone() / Complex64::new(v.norm(), 0.0)))
        };
        let gap = spectrum.values.get(1).map_or(f64::INFINITY, |e1| e1 - spectrum.values[0]);
        let degenerate_partner = if gap <= 1e-10 { Some(align(1)?) } else { None };
        if degenerate_partner.is_some() {
            log::warn!("lowest eigenvalue is degenerate (gap {gap:e}); returning both vectors");
        }
        Ok(GroundState {
            energy: spectrum.values[0],
            state: align(0)?,
            degenerate_partner,
            gap,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form_factor::{FormFactor, FormFactorKind};
    use crate::hamiltonian::{harmonic_potential, PhysicalParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small(max_photons: usize) -> Hamiltonian {
        let grid = GridSpec::new(1, 10.0, 4).unwrap();
        let ff = FormFactor::new(FormFactorKind::Gaussian { width: 1.0 }, &grid).unwrap();
        let params = PhysicalParams {
            coupling: 0.6,
            photon_rest_energy: 0.3,
            potential: Some(harmonic_potential(&grid, 1.0, 0.5)),
            ..Default::default()
        };
        Hamiltonian::new(grid, 1, max_photons, params, ff).unwrap()
    }

    #[test]
    fn dimension_arithmetic() {
        let grid = GridSpec::new(1, 10.0, 4).unwrap();
        assert_eq!(fock_dimension(&grid, 1, 1), 20);
        let dense = assemble_dense(&small(1), DEFAULT_DIMENSION_CAP).unwrap();
        assert_eq!(dense.dimension(), 20);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            assemble_dense(&small(2), 50),
            Err(Error::DimensionCap { dim: 84, cap: 50 })
        ));
    }

    #[test]
    fn flatten_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = FockState::random(GridSpec::new(1, 10.0, 4).unwrap(), 1, 2, &mut rng).unwrap();
        let v = flatten(&psi);
        assert!((v.norm() - psi.norm()).abs() < 1e-14);
        let back = unflatten(&v, *psi.grid(), 1, 2).unwrap();
        assert!(back.distance(&psi).unwrap() < 1e-14);
    }

    #[test]
    fn assembled_matrix_is_hermitian_and_matches_matrix_free() {
        let h = small(2);
        let dense = assemble_dense(&h, DEFAULT_DIMENSION_CAP).unwrap();
        assert!(dense.hermiticity_defect() <= 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let psi = FockState::random(*h.grid(), 1, 2, &mut rng).unwrap();
            let a = h.apply(&psi);
            let b = dense.apply(&psi).unwrap();
            assert!(a.distance(&b).unwrap() <= 1e-12 * a.norm());
        }
    }

    #[test]
    fn ground_state_is_rayleigh_minimum() {
        let h = small(1);
        let dense = assemble_dense(&h, DEFAULT_DIMENSION_CAP).unwrap();
        let gs = dense.ground_state().unwrap();
        assert!((h.energy(&gs.state).unwrap() - gs.energy).abs() < 1e-10);
        assert!((gs.state.norm() - 1.0).abs() < 1e-12);
        let max_im = gs.state.sectors().iter().flatten().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(max_im < 1e-10);
    }

    #[test]
    fn restricted_ground_state_stays_symmetric() {
        let h = small(2);
        let dense = assemble_dense(&h, DEFAULT_DIMENSION_CAP).unwrap();
        let gs = dense.ground_state().unwrap();
        assert!(gs.state.symmetry_defect() < 1e-10);
        assert!((h.energy(&gs.state).unwrap() - gs.energy).abs() < 1e-10);
    }
}
