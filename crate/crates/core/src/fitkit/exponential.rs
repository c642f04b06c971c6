use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use super::{build_result, check_xy, levenberg_marquardt, spread, weights, FitError, FitOptions, FitResult};

const SCAN: usize = 240;

/// `A·exp(−x/T) + c` and its gradient in `(A, T, c)`.
pub fn exponential_model(x: f64, p: &[f64]) -> (f64, [f64; 3]) {
    let e = (-x / p[1]).exp();
    (p[0] * e + p[2], [e, p[0] * e * x / (p[1] * p[1]), 1.0])
}

/// Linear amplitude (and offset, unless fixed) at a given time constant.
fn linear_at(x: &[f64], y: &[f64], w: &[f64], t: f64, fixed: Option<f64>) -> Option<(f64, f64, f64)> {
    let (a, c) = match fixed {
        Some(c) => {
            let (mut num, mut den) = (0.0, 0.0);
            for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
                let e = (-xi / t).exp() * wi;
                num += e * (yi - c) * wi;
                den += e * e;
            }
            if den <= 0.0 {
                return None;
            }
            (num / den, c)
        }
        None => {
            let mut m = Matrix2::zeros();
            let mut b = Vector2::zeros();
            for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
                let v = Vector2::new((-xi / t).exp(), 1.0) * wi;
                m += v * v.transpose();
                b += v * (yi * wi);
            }
            let s = m.cholesky()?.solve(&b);
            (s[0], s[1])
        }
    };
    let rss = x
        .iter()
        .zip(y)
        .zip(w)
        .map(|((&xi, &yi), &wi)| ((a * (-xi / t).exp() + c - yi) * wi).powi(2))
        .sum();
    Some((a, c, rss))
}

/// Fit `A·exp(−x/T) + c` with `T > 0`. With `fixed_offset`, `c` is held at
/// that value. The start comes from a log-spaced scan over `T` with the
/// linear parameters solved exactly at each point.
pub fn fit_exponential(
    x: &[f64],
    y: &[f64],
    fixed_offset: Option<f64>,
    opts: &FitOptions,
) -> Result<FitResult, FitError> {
    let min = if fixed_offset.is_some() { 3 } else { 4 };
    check_xy(x, y, min, opts)?;
    let w = weights(opts, x.len());
    let span = spread(x);
    let mut best = None::<(f64, f64, f64, f64)>;
    for k in 0..SCAN {
        let t = span * 1e-3 * 1e6f64.powf(k as f64 / (SCAN - 1) as f64);
        if let Some((a, c, rss)) = linear_at(x, y, &w, t, fixed_offset) {
            if best.is_none_or(|b| rss < b.3) {
                best = Some((a, t, c, rss));
            }
        }
    }
    let (a0, t0, c0, _) = best.unwrap_or((spread(y), span, 0.0, 0.0));
    let m = x.len();
    let names = [("amplitude", ""), ("time_constant", "s"), ("offset", "")];
    let t_lo = 1e-12 * span;

    let (values, rep) = match fixed_offset {
        None => {
            let rep = levenberg_marquardt(
                |p| {
                    let mut r = DVector::zeros(m);
                    let mut j = DMatrix::zeros(m, 3);
                    for i in 0..m {
                        let (v, g) = exponential_model(x[i], p);
                        r[i] = (v - y[i]) * w[i];
                        for k in 0..3 {
                            j[(i, k)] = g[k] * w[i];
                        }
                    }
                    (r, j)
                },
                &[a0, t0, c0],
                &[
                    (f64::NEG_INFINITY, f64::INFINITY),
                    (t_lo, f64::INFINITY),
                    (f64::NEG_INFINITY, f64::INFINITY),
                ],
                &opts.lm,
            );
            (rep.params.clone(), rep)
        }
        Some(c) => {
            let rep = levenberg_marquardt(
                |p| {
                    let mut r = DVector::zeros(m);
                    let mut j = DMatrix::zeros(m, 2);
                    for i in 0..m {
                        let (v, g) = exponential_model(x[i], &[p[0], p[1], c]);
                        r[i] = (v - y[i]) * w[i];
                        j[(i, 0)] = g[0] * w[i];
                        j[(i, 1)] = g[1] * w[i];
                    }
                    (r, j)
                },
                &[a0, t0],
                &[(f64::NEG_INFINITY, f64::INFINITY), (t_lo, f64::INFINITY)],
                &opts.lm,
            );
            (vec![rep.params[0], rep.params[1], c], rep)
        }
    };
    let mut res = build_result("exponential", &names, &rep, values.clone());
    if values[0].abs() <= 1e-9 * (spread(y) + values[2].abs()) || spread(y) == 0.0 {
        res = res.flag("no decaying component; time constant is not identifiable");
    }
    Ok(res)
}
