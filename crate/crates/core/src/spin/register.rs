use serde::{Deserialize, Serialize};
use std::fmt;

use super::eigen::{eigensystem, Eigensystem};
use super::hamiltonian::{build_hamiltonian, drive_operator};
use super::operators::{Mat6, C64};
use super::params::RegisterParams;
use super::SpinError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Nuclear {
    Up,
    Down,
}

/// Product-state label `|mS, n⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductLabel {
    pub ms: i8,
    pub nuclear: Nuclear,
}

impl ProductLabel {
    pub const fn new(ms: i8, nuclear: Nuclear) -> Self {
        ProductLabel { ms, nuclear }
    }

    /// Position in the product basis.
    pub fn index(self) -> usize {
        let e = (self.ms + 1) as usize;
        2 * e + usize::from(self.nuclear == Nuclear::Down)
    }

    pub fn from_index(i: usize) -> Self {
        assert!(i < 6, "product index out of range");
        let ms = (i / 2) as i8 - 1;
        let nuclear = if i.is_multiple_of(2) { Nuclear::Up } else { Nuclear::Down };
        ProductLabel { ms, nuclear }
    }
}

impl fmt::Display for ProductLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self.nuclear {
            Nuclear::Up => "↑",
            Nuclear::Down => "↓",
        };
        write!(f, "|{},{}⟩", self.ms, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransitionLabel {
    Mw1,
    Mw2,
    Rf1,
    Rf2,
}

impl TransitionLabel {
    pub const ALL: [TransitionLabel; 4] = [
        TransitionLabel::Mw1,
        TransitionLabel::Mw2,
        TransitionLabel::Rf1,
        TransitionLabel::Rf2,
    ];

    /// `(from, to)` product labels. A pulse with phase φ takes `from` to
    /// `from + e^{iφ} to`.
    pub fn endpoints(self) -> (ProductLabel, ProductLabel) {
        use Nuclear::*;
        let p = ProductLabel::new;
        match self {
            TransitionLabel::Mw1 => (p(0, Down), p(1, Down)),
            TransitionLabel::Mw2 => (p(0, Up), p(1, Up)),
            TransitionLabel::Rf1 => (p(1, Down), p(1, Up)),
            TransitionLabel::Rf2 => (p(0, Down), p(0, Up)),
        }
    }

    pub fn is_nuclear(self) -> bool {
        matches!(self, TransitionLabel::Rf1 | TransitionLabel::Rf2)
    }
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TransitionLabel::Mw1 => "MW1",
            TransitionLabel::Mw2 => "MW2",
            TransitionLabel::Rf1 => "RF1",
            TransitionLabel::Rf2 => "RF2",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub label: TransitionLabel,
    /// Eigenstate indices `(from, to)`.
    pub levels: (usize, usize),
    /// `|E_to − E_from|` in Hz.
    pub frequency: f64,
}

/// A register with its Hamiltonian diagonalised and eigenstates labelled.
#[derive(Debug, Clone)]
pub struct Register {
    params: RegisterParams,
    hamiltonian: Mat6,
    eigen: Eigensystem,
    /// Product label of each eigenstate.
    labels: [ProductLabel; 6],
    /// Eigen index of each product label, indexed by `ProductLabel::index`.
    eigen_index: [usize; 6],
}

impl Register {
    pub fn new(params: RegisterParams) -> Result<Self, SpinError> {
        params.validate()?;
        let hamiltonian = build_hamiltonian(&params);
        let eigen = eigensystem(&hamiltonian)?;
        let (labels, eigen_index) = assign_labels(&eigen.vectors)?;
        Ok(Register {
            params,
            hamiltonian,
            eigen,
            labels,
            eigen_index,
        })
    }

    pub fn params(&self) -> &RegisterParams {
        &self.params
    }

    pub fn hamiltonian(&self) -> &Mat6 {
        &self.hamiltonian
    }

    pub fn eigen(&self) -> &Eigensystem {
        &self.eigen
    }

    pub fn label_of(&self, eigen_index: usize) -> ProductLabel {
        self.labels[eigen_index]
    }

    pub fn eigen_index(&self, label: ProductLabel) -> usize {
        self.eigen_index[label.index()]
    }

    pub fn energy(&self, label: ProductLabel) -> f64 {
        self.eigen.values[self.eigen_index(label)]
    }

    pub fn transition(&self, label: TransitionLabel) -> Transition {
        let (a, b) = label.endpoints();
        let (ia, ib) = (self.eigen_index(a), self.eigen_index(b));
        Transition {
            label,
            levels: (ia, ib),
            frequency: (self.eigen.values[ib] - self.eigen.values[ia]).abs(),
        }
    }

    /// Signed `E_to − E_from` of a transition.
    pub fn signed_frequency(&self, label: TransitionLabel) -> f64 {
        let t = self.transition(label);
        self.eigen.values[t.levels.1] - self.eigen.values[t.levels.0]
    }

    /// Largest amplitude that any eigenstate borrows from the other
    /// electron manifolds.
    pub fn max_admixture(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..6 {
            let own = self.labels[k].ms;
            for i in 0..6 {
                if ProductLabel::from_index(i).ms != own {
                    worst = worst.max(self.eigen.vectors[(i, k)].norm());
                }
            }
        }
        worst
    }

    fn check_resolved(&self, label: TransitionLabel) -> Result<Transition, SpinError> {
        let t = self.transition(label);
        let scale = self
            .eigen
            .values
            .iter()
            .fold(1.0f64, |a, v| a.max(v.abs()));
        let tol = 1e-9 * scale;
        for &lvl in &[t.levels.0, t.levels.1] {
            for k in 0..6 {
                if k != lvl && (self.eigen.values[k] - self.eigen.values[lvl]).abs() <= tol {
                    return Err(SpinError::DegenerateTransition(label));
                }
            }
        }
        Ok(t)
    }

    /// Eigenbasis matrix element `⟨to| H₁ |from⟩` of a unit transverse field
    /// (Hz/T).
    pub fn drive_element(&self, label: TransitionLabel) -> Result<C64, SpinError> {
        let t = self.check_resolved(label)?;
        let h1 = drive_operator(&self.params);
        let v = &self.eigen.vectors;
        let from = v.column(t.levels.0);
        let to = v.column(t.levels.1);
        Ok((to.adjoint() * h1 * from)[(0, 0)])
    }

    /// Ratio of the dressed drive matrix element to the bare one of the same
    /// spin species: `γn/2` for nuclear transitions, `γe/√2` for electron
    /// transitions. Effective Rabi frequency = bare Rabi frequency × coupling.
    pub fn coupling(&self, label: TransitionLabel) -> Result<f64, SpinError> {
        let m = self.drive_element(label)?.norm();
        let bare = if label.is_nuclear() {
            self.params.gamma_n * 0.5
        } else {
            self.params.gamma_e * std::f64::consts::FRAC_1_SQRT_2
        };
        Ok(m / bare)
    }

    /// Smallest separation between this transition and any other labelled
    /// transition, used to flag drives that would not be selective.
    pub fn neighbour_spacing(&self, label: TransitionLabel) -> f64 {
        let f = self.transition(label).frequency;
        TransitionLabel::ALL
            .iter()
            .filter(|&&o| o != label)
            .map(|&o| (self.transition(o).frequency - f).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

fn assign_labels(v: &Mat6) -> Result<([ProductLabel; 6], [usize; 6]), SpinError> {
    let mut labels = [ProductLabel::from_index(0); 6];
    let mut eigen_index = [usize::MAX; 6];
    for k in 0..6 {
        let mut best = 0;
        let mut best_w = -1.0;
        for i in 0..6 {
            let w = v[(i, k)].norm_sqr();
            // strict comparison keeps the lower index on ties
            if w > best_w {
                best = i;
                best_w = w;
            }
        }
        if eigen_index[best] != usize::MAX {
            return Err(SpinError::AmbiguousLabels);
        }
        eigen_index[best] = k;
        labels[k] = ProductLabel::from_index(best);
    }
    Ok((labels, eigen_index))
}

/// `(γe/γn)(A⊥/D)(3|mS| − 2)`: the perturbative estimate of the nuclear
/// drive enhancement within a given electron manifold.
pub fn enhancement_factor_analytic(p: &RegisterParams, ms: i32) -> Result<f64, SpinError> {
    if !(-1..=1).contains(&ms) {
        return Err(SpinError::InvalidMs(ms));
    }
    Ok(p.gamma_e / p.gamma_n * p.a_perp / p.zero_field * (3.0 * ms.abs() as f64 - 2.0))
}

/// Dressed-over-bare ratio of the nuclear drive matrix element, from the
/// exact eigenstates.
pub fn enhancement_factor_numeric(
    p: &RegisterParams,
    transition: TransitionLabel,
) -> Result<f64, SpinError> {
    Register::new(*p)?.coupling(transition)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_index_round_trip() {
        for i in 0..6 {
            assert_eq!(ProductLabel::from_index(i).index(), i);
        }
        assert_eq!(ProductLabel::new(1, Nuclear::Down).index(), 5);
    }

    #[test]
    fn analytic_enhancement() {
        let p = RegisterParams::default();
        let one = enhancement_factor_analytic(&p, 1).unwrap();
        assert!((100.0..=135.0).contains(&one), "{one}");
        assert_eq!(one, enhancement_factor_analytic(&p, -1).unwrap());
        let zero = enhancement_factor_analytic(&p, 0).unwrap();
        assert!((zero + 2.0 * one).abs() < 1e-9);
        let q = RegisterParams { a_perp: 0.0, ..p };
        assert_eq!(enhancement_factor_analytic(&q, 1).unwrap(), 0.0);
        assert!(matches!(
            enhancement_factor_analytic(&p, 2),
            Err(SpinError::InvalidMs(2))
        ));
    }

    #[test]
    fn numeric_enhancement_without_mixing_is_unity() {
        let p = RegisterParams {
            a_perp: 0.0,
            ..RegisterParams::default()
        };
        assert_eq!(
            enhancement_factor_numeric(&p, TransitionLabel::Rf1).unwrap(),
            1.0
        );
    }

    #[test]
    fn numeric_enhancement_defaults() {
        let e = enhancement_factor_numeric(&RegisterParams::default(), TransitionLabel::Rf1)
            .unwrap();
        assert!((114.0..=130.0).contains(&e), "{e}");
    }

    #[test]
    fn numeric_tracks_analytic() {
        for a_perp in [50e6, 100e6, 127e6] {
            let p = RegisterParams {
                a_perp,
                ..RegisterParams::default()
            };
            let ratio = enhancement_factor_numeric(&p, TransitionLabel::Rf1).unwrap()
                / enhancement_factor_analytic(&p, 1).unwrap();
            assert!((0.8..=1.2).contains(&ratio), "{a_perp}: {ratio}");
        }
    }

    #[test]
    fn numeric_monotone_towards_unity() {
        let vals: Vec<f64> = [0.0, 1e6, 10e6, 127e6]
            .iter()
            .map(|&a| {
                let p = RegisterParams {
                    a_perp: a,
                    ..RegisterParams::default()
                };
                enhancement_factor_numeric(&p, TransitionLabel::Rf1).unwrap()
            })
            .collect();
        assert_eq!(vals[0], 1.0);
        assert!(vals.windows(2).all(|w| w[1] > w[0]), "{vals:?}");
    }

    #[test]
    fn degenerate_levels_are_rejected() {
        let p = RegisterParams {
            field: 0.0,
            a_par: 0.0,
            a_perp: 0.0,
            ..RegisterParams::uncalibrated()
        };
        let r = Register::new(p).unwrap();
        assert!(matches!(
            r.coupling(TransitionLabel::Rf1),
            Err(SpinError::DegenerateTransition(TransitionLabel::Rf1))
        ));
    }

    #[test]
    fn admixture_is_a_few_percent() {
        let r = Register::new(RegisterParams::default()).unwrap();
        let m = r.max_admixture();
        assert!((0.015..=0.045).contains(&m), "{m}");
    }

    #[test]
    fn transitions_connect_expected_manifolds() {
        let r = Register::new(RegisterParams::default()).unwrap();
        for l in TransitionLabel::ALL {
            let t = r.transition(l);
            let (a, b) = l.endpoints();
            assert_eq!(r.label_of(t.levels.0), a);
            assert_eq!(r.label_of(t.levels.1), b);
        }
        assert!((r.transition(TransitionLabel::Rf1).frequency - 127.2e6).abs() < 1e6);
    }
}
