use nalgebra::{Matrix2, Matrix3, Matrix6};
pub use num_complex::Complex64 as C64;

pub type Mat6 = Matrix6<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Kronecker product of an electron (3×3) and a nuclear (2×2) operator.
pub fn kron(e: &Matrix3<C64>, n: &Matrix2<C64>) -> Mat6 {
    let mut out = Mat6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let eij = e[(i, j)];
            if eij == ZERO {
                continue;
            }
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = eij * n[(k, l)];
                }
            }
        }
    }
    out
}

// Electron basis order: mS = -1, 0, +1.
pub(crate) fn s_z() -> Matrix3<C64> {
    Matrix3::from_diagonal(&nalgebra::Vector3::new(c(-1.0), ZERO, c(1.0)))
}

pub(crate) fn s_x() -> Matrix3<C64> {
    let h = c(std::f64::consts::FRAC_1_SQRT_2);
    Matrix3::new(ZERO, h, ZERO, h, ZERO, h, ZERO, h, ZERO)
}

pub(crate) fn s_y() -> Matrix3<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let p = C64::new(0.0, h);
    Matrix3::new(ZERO, p, ZERO, -p, ZERO, p, ZERO, -p, ZERO)
}

// Nuclear basis order: ↑ (+1/2), ↓ (-1/2).
pub(crate) fn i_z() -> Matrix2<C64> {
    Matrix2::new(c(0.5), ZERO, ZERO, c(-0.5))
}

pub(crate) fn i_x() -> Matrix2<C64> {
    Matrix2::new(ZERO, c(0.5), c(0.5), ZERO)
}

pub(crate) fn i_y() -> Matrix2<C64> {
    Matrix2::new(ZERO, C64::new(0.0, -0.5), C64::new(0.0, 0.5), ZERO)
}

pub(crate) fn e_id() -> Matrix3<C64> {
    Matrix3::identity()
}

pub(crate) fn n_id() -> Matrix2<C64> {
    Matrix2::identity()
}

pub(crate) fn hermitian_deviation(m: &Mat6) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}
