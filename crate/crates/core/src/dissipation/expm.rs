use nalgebra::{DMatrix, SMatrix};

const PADE_ORDER: usize = 6;

fn pade_coefficients() -> [f64; PADE_ORDER + 1] {
    // c_k = (2m−k)! m! / ((2m)! k! (m−k)!)
    let m = PADE_ORDER;
    let mut c = [0.0; PADE_ORDER + 1];
    c[0] = 1.0;
    for k in 1..=m {
        c[k] = c[k - 1] * (m - k + 1) as f64 / ((2 * m - k + 1) * k) as f64;
    }
    c
}

/// Matrix exponential by scaling and squaring with a diagonal [6/6] Padé
/// approximant, after scaling the 1-norm below 1/2.
pub fn expm<const N: usize>(a: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    let d = expm_dyn(&DMatrix::from_column_slice(N, N, a.as_slice()));
    SMatrix::from_column_slice(d.as_slice())
}

pub fn expm_dyn(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = (0..n)
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings);

    let c = pade_coefficients();
    let id = DMatrix::<f64>::identity(n, n);
    let mut power = id.clone();
    let mut num = &id * c[0];
    let mut den = &id * c[0];
    for (k, ck) in c.iter().enumerate().skip(1) {
        power = &power * &scaled;
        num += &power * *ck;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        den += &power * (sign * ck);
    }
    let mut r = den
        .lu()
        .solve(&num)
        .expect("Padé denominator is nonsingular for scaled norm ≤ 1/2");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}
