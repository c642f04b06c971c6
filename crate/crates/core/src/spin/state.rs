use nalgebra::SymmetricEigen;

use super::operators::{hermitian_deviation, Mat6, C64};
use super::register::{ProductLabel, Register};

/// Density matrix over the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub rho: Mat6,
}

impl QuantumState {
    pub fn from_rho(rho: Mat6) -> Self {
        QuantumState { rho }
    }

    /// Pure product state `|label⟩`.
    pub fn product(label: ProductLabel) -> Self {
        let mut rho = Mat6::zeros();
        let i = label.index();
        rho[(i, i)] = C64::new(1.0, 0.0);
        QuantumState { rho }
    }

    /// Pure eigenstate carrying the given product label.
    pub fn eigenstate(reg: &Register, label: ProductLabel) -> Self {
        let mut pops = [0.0; 6];
        pops[reg.eigen_index(label)] = 1.0;
        Self::from_eigen_populations(reg, &pops)
    }

    /// Diagonal state in the eigenbasis, populations indexed by eigen index.
    pub fn from_eigen_populations(reg: &Register, pops: &[f64; 6]) -> Self {
        let mut d = Mat6::zeros();
        for (k, p) in pops.iter().enumerate() {
            d[(k, k)] = C64::new(*p, 0.0);
        }
        Self::from_eigenbasis(reg, &d)
    }

    pub fn maximally_mixed() -> Self {
        QuantumState {
            rho: Mat6::identity() * C64::new(1.0 / 6.0, 0.0),
        }
    }

    pub fn from_eigenbasis(reg: &Register, rho_e: &Mat6) -> Self {
        let v = &reg.eigen().vectors;
        QuantumState {
            rho: v * rho_e * v.adjoint(),
        }
    }

    pub fn to_eigenbasis(&self, reg: &Register) -> Mat6 {
        let v = &reg.eigen().vectors;
        v.adjoint() * self.rho * v
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermitian_deviation(&self.rho)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (self.rho + self.rho.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// True if Hermitian, unit-trace and positive within the given tolerances.
    pub fn is_physical(&self, tol: f64, positivity_tol: f64) -> bool {
        self.hermiticity_error() <= tol
            && (self.trace() - C64::new(1.0, 0.0)).norm() <= tol
            && self.min_eigenvalue() >= -positivity_tol
    }

    /// Populations of the eigenstates, indexed by eigen index.
    pub fn eigen_populations(&self, reg: &Register) -> [f64; 6] {
        let r = self.to_eigenbasis(reg);
        std::array::from_fn(|k| r[(k, k)].re)
    }

    /// Population of the eigenstate with the given label.
    pub fn population(&self, reg: &Register, label: ProductLabel) -> f64 {
        self.eigen_populations(reg)[reg.eigen_index(label)]
    }

    /// Eigenbasis coherence `⟨to|ρ|from⟩`.
    pub fn coherence(&self, reg: &Register, from: ProductLabel, to: ProductLabel) -> C64 {
        let r = self.to_eigenbasis(reg);
        r[(reg.eigen_index(to), reg.eigen_index(from))]
    }

    /// Optical readout: total population of the `mS = 0` eigenstates.
    pub fn bright_population(&self, reg: &Register) -> f64 {
        let pops = self.eigen_populations(reg);
        (0..6)
            .filter(|&k| reg.label_of(k).ms == 0)
            .map(|k| pops[k])
            .sum()
    }

    /// Frobenius distance between two density matrices.
    pub fn distance(&self, other: &QuantumState) -> f64 {
        (self.rho - other.rho).norm()
    }
}
