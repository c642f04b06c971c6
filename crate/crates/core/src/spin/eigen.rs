use nalgebra::{SymmetricEigen, Vector6};

use super::operators::{hermitian_deviation, Mat6, C64};
use super::SpinError;

/// Eigenvalues in ascending order with matching eigenvector columns.
///
/// Each eigenvector is phased so that its largest component is real and
/// positive, which keeps pulse phases well defined across parameter changes.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub values: Vector6<f64>,
    pub vectors: Mat6,
}

pub fn eigensystem(h: &Mat6) -> Result<Eigensystem, SpinError> {
    let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let dev = hermitian_deviation(h);
    if !dev.is_finite() || dev > 1e-12 * scale {
        return Err(SpinError::NotHermitian(dev));
    }
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut values = Vector6::zeros();
    let mut vectors = Mat6::zeros();
    for (k, &src) in order.iter().enumerate() {
        values[k] = eig.eigenvalues[src];
        let col = eig.eigenvectors.column(src);
        let (imax, _) = col
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, z)| {
                if z.norm() > best.1 + 1e-12 {
                    (i, z.norm())
                } else {
                    best
                }
            });
        let pivot = col[imax];
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let norm = col.norm();
        for i in 0..6 {
            vectors[(i, k)] = col[i] * phase / norm;
        }
    }
    Ok(Eigensystem { values, vectors })
}

impl Eigensystem {
    /// `V Λ V†`.
    pub fn reconstruct(&self) -> Mat6 {
        let lambda = Mat6::from_diagonal(&self.values.map(|v| C64::new(v, 0.0)));
        self.vectors * lambda * self.vectors.adjoint()
    }
}
