use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::{
    build_result, check_xy, levenberg_marquardt, spread, weights, FitError, FitOptions, FitParam,
    FitResult,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineParams {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub offset: f64,
}

const NAMES: [(&str, &str); 4] = [("amplitude", ""), ("frequency", "Hz"), ("phase", "rad"), ("offset", "")];
const MAX_GRID: usize = 4096;

/// `A·cos(2πfx + φ) + c` and its gradient in `(A, f, φ, c)`.
pub fn cosine_model(x: f64, p: &[f64]) -> (f64, [f64; 4]) {
    let th = 2.0 * PI * p[1] * x + p[2];
    let (s, c) = th.sin_cos();
    (
        p[0] * c + p[3],
        [c, -p[0] * s * 2.0 * PI * x, -p[0] * s, 1.0],
    )
}

/// Least-squares `a·cos + b·sin + c` at fixed frequency.
fn linear_at(x: &[f64], y: &[f64], w: &[f64], f: f64) -> Option<(CosineParams, f64)> {
    let mut a = Matrix3::zeros();
    let mut b = Vector3::zeros();
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        let (s, c) = (2.0 * PI * f * xi).sin_cos();
        let v = Vector3::new(c, s, 1.0) * wi;
        a += v * v.transpose();
        b += v * (yi * wi);
    }
    let sol = a.cholesky()?.solve(&b);
    let p = CosineParams {
        amplitude: sol[0].hypot(sol[1]),
        frequency: f,
        phase: (-sol[1]).atan2(sol[0]),
        offset: sol[2],
    };
    let rss = x
        .iter()
        .zip(y)
        .zip(w)
        .map(|((&xi, &yi), &wi)| {
            let m = cosine_model(xi, &[p.amplitude, p.frequency, p.phase, p.offset]).0;
            ((m - yi) * wi).powi(2)
        })
        .sum();
    Some((p, rss))
}

fn nyquist(x: &[f64]) -> f64 {
    let mut xs = x.to_vec();
    xs.sort_by(f64::total_cmp);
    let dmin = xs
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    0.5 / dmin
}

/// Periodogram start: best sinusoid over a frequency grid, where each
/// frequency gets its own linear fit of amplitude, phase and offset.
fn periodogram_guess(x: &[f64], y: &[f64], w: &[f64]) -> CosineParams {
    let span = spread(x);
    let nyq = nyquist(x);
    let fmin = 0.5 / span;
    let mut df = 1.0 / (8.0 * span);
    if (nyq - fmin) / df > MAX_GRID as f64 {
        df = (nyq - fmin) / MAX_GRID as f64;
    }
    let mut best: Option<(CosineParams, f64)> = None;
    let mut f = fmin;
    while f <= nyq {
        if let Some((p, rss)) = linear_at(x, y, w, f) {
            if best.is_none_or(|(_, b)| rss < b) {
                best = Some((p, rss));
            }
        }
        f += df;
    }
    best.map(|b| b.0).unwrap_or(CosineParams {
        amplitude: 0.5 * spread(y),
        frequency: fmin.max(1.0 / span),
        phase: 0.0,
        offset: y.iter().sum::<f64>() / y.len() as f64,
    })
}

fn wrap(phase: f64) -> f64 {
    let p = phase.rem_euclid(2.0 * PI);
    if p > PI {
        p - 2.0 * PI
    } else {
        p
    }
}

/// Fit `A·cos(2πfx + φ) + c` with `A ≥ 0` and `0 < f ≤` Nyquist of the grid.
///
/// Needs at least 8 points covering at least one period. Without a guess
/// the start comes from a periodogram scan. Constant data are returned with
/// `converged = false`.
pub fn fit_cosine(
    x: &[f64],
    y: &[f64],
    guess: Option<CosineParams>,
    opts: &FitOptions,
) -> Result<FitResult, FitError> {
    check_xy(x, y, 8, opts)?;
    let w = weights(opts, x.len());
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    if spread(y) <= 1e-12 * (1.0 + mean.abs()) {
        return Ok(FitResult {
            model: "cosine".into(),
            params: NAMES
                .iter()
                .zip([0.0, 0.0, 0.0, mean])
                .map(|(&(n, u), v)| FitParam {
                    name: n.into(),
                    unit: u.into(),
                    value: v,
                    std_error: if n == "offset" { 0.0 } else { f64::INFINITY },
                })
                .collect(),
            rss: 0.0,
            converged: false,
            iterations: 0,
            message: Some("signal is constant; frequency is not identifiable".into()),
        });
    }
    let g = guess.unwrap_or_else(|| periodogram_guess(x, y, &w));
    let nyq = nyquist(x);
    let bounds = [
        (0.0, f64::INFINITY),
        (1e-12 * nyq, nyq),
        (f64::NEG_INFINITY, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
    ];
    let m = x.len();
    let rep = levenberg_marquardt(
        |p| {
            let mut r = DVector::zeros(m);
            let mut j = DMatrix::zeros(m, 4);
            for i in 0..m {
                let (v, grad) = cosine_model(x[i], p);
                r[i] = (v - y[i]) * w[i];
                for k in 0..4 {
                    j[(i, k)] = grad[k] * w[i];
                }
            }
            (r, j)
        },
        &[g.amplitude.abs(), g.frequency, g.phase, g.offset],
        &bounds,
        &opts.lm,
    );
    let mut v = rep.params.clone();
    v[2] = wrap(v[2]);
    let mut res = build_result("cosine", &NAMES, &rep, v.clone());
    if v[0] <= 1e-9 * spread(y) {
        res = res.flag("amplitude vanishes; frequency is not identifiable");
    }
    Ok(res)
}

impl CosineParams {
    pub fn from_result(r: &FitResult) -> Option<Self> {
        Some(CosineParams {
            amplitude: r.get("amplitude")?,
            frequency: r.get("frequency")?,
            phase: r.get("phase")?,
            offset: r.get("offset")?,
        })
    }
}
