use nalgebra::{DMatrix, DVector};

use super::{build_result, check_sigma, levenberg_marquardt, spread, FitError, FitOptions, FitResult};
use crate::dissipation::RateParams;

const SCAN: usize = 160;

/// `φ = (e^{−kt} − e^{−st})/(k − s)` with its partial derivatives in `k`
/// and `s`, stable through `k = s`.
fn phi(k: f64, s: f64, t: f64) -> (f64, f64, f64) {
    if t == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let u = (s - k) * t;
    let ek = (-k * t).exp();
    let (phi, eg1) = if u.abs() <= 1e-2 {
        // g(u) = (1 − e^{−u})/u, g'(u) by series
        let g = 1.0 - u / 2.0 + u * u / 6.0 - u.powi(3) / 24.0 + u.powi(4) / 120.0 - u.powi(5) / 720.0;
        let g1 = -0.5 + u / 3.0 - u * u / 8.0 + u.powi(3) / 30.0 - u.powi(4) / 144.0;
        (-t * ek * g, ek * g1)
    } else {
        let es = (-s * t).exp();
        let phi = if u > 0.0 {
            -ek * (-u).exp_m1() / (k - s)
        } else {
            es * u.exp_m1() / (k - s)
        };
        (phi, (es * (1.0 + u) - ek) / (u * u))
    };
    (phi, -t * phi + t * t * eg1, -t * t * eg1)
}

/// The two tomography curves at duration `t`: total `mS=0` population and
/// the `|0,↑⟩` population.
pub fn rate_curves(p: &[f64], t: f64) -> (f64, f64) {
    let (a, b, g) = (p[0], p[1], p[2]);
    let k = a + b;
    let (ph, _, _) = phi(k, 2.0 * g, t);
    (1.0 - 0.5 * (-k * t).exp(), 0.5 - 0.5 * (a - g) * ph)
}

/// Gradients of [`rate_curves`] in `(α, β, γ)`.
pub fn rate_curves_jacobian(p: &[f64], t: f64) -> ([f64; 3], [f64; 3]) {
    let (a, b, g) = (p[0], p[1], p[2]);
    let k = a + b;
    let (ph, dk, ds) = phi(k, 2.0 * g, t);
    let dt = 0.5 * t * (-k * t).exp();
    let c = 0.5 * (a - g);
    (
        [dt, dt, 0.0],
        [-0.5 * ph - c * dk, -c * dk, 0.5 * ph - 2.0 * c * ds],
    )
}

/// Joint fit of both initialization-tomography curves for `(α, β, γ)`.
///
/// `sigma`, when given, has one entry per duration (shared by both curves)
/// or one per residual (`2n`, total curve first).
pub fn fit_rate_params(
    t: &[f64],
    total: &[f64],
    up: &[f64],
    opts: &FitOptions,
) -> Result<FitResult, FitError> {
    let n = t.len();
    if total.len() != n || up.len() != n {
        return Err(FitError::LengthMismatch(n, total.len().min(up.len())));
    }
    if n < 4 {
        return Err(FitError::TooFewPoints { need: 4, got: n });
    }
    if t.iter().chain(total).chain(up).any(|v| !v.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let w: Vec<f64> = match &opts.sigma {
        Some(s) if s.len() == n => {
            check_sigma(opts, n)?;
            s.iter().chain(s).map(|v| 1.0 / v).collect()
        }
        Some(_) => {
            check_sigma(opts, 2 * n)?;
            opts.sigma.as_ref().unwrap().iter().map(|v| 1.0 / v).collect()
        }
        None => vec![1.0; 2 * n],
    };
    let span = spread(t);
    if !(span > 0.0) {
        return Err(FitError::NoSpan);
    }
    let names = [("alpha", "1/s"), ("beta", "1/s"), ("gamma", "1/s")];
    if spread(total) < 1e-9 && spread(up) < 1e-9 {
        let rep = super::LmReport {
            params: vec![0.0; 3],
            rss: 0.0,
            converged: false,
            iterations: 0,
            history: vec![],
            jacobian: DMatrix::zeros(2 * n, 3),
            residuals: DVector::zeros(2 * n),
        };
        return Ok(build_result("rates", &names, &rep, vec![0.0; 3])
            .flag("curves are flat; rates are not identifiable"));
    }

    let start = initial_guess(t, total, up, span);
    let rep = levenberg_marquardt(
        |p| {
            let mut r = DVector::zeros(2 * n);
            let mut j = DMatrix::zeros(2 * n, 3);
            for i in 0..n {
                let (y1, y2) = rate_curves(p, t[i]);
                let (g1, g2) = rate_curves_jacobian(p, t[i]);
                r[i] = (y1 - total[i]) * w[i];
                r[n + i] = (y2 - up[i]) * w[n + i];
                for k in 0..3 {
                    j[(i, k)] = g1[k] * w[i];
                    j[(n + i, k)] = g2[k] * w[n + i];
                }
            }
            (r, j)
        },
        &start,
        &[(0.0, f64::INFINITY); 3],
        &opts.lm,
    );
    Ok(build_result("rates", &names, &rep, rep.params.clone()))
}

/// `k = α+β` from the log of the total curve; then `γ` by scan with
/// `α−γ` solved linearly from the `|0,↑⟩` curve.
fn initial_guess(t: &[f64], total: &[f64], up: &[f64], span: f64) -> [f64; 3] {
    let (mut num, mut den) = (0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(total) {
        let q = 2.0 * (1.0 - yi);
        if q > 1e-6 && q < 1.0 && ti > 0.0 {
            num -= ti * q.ln();
            den += ti * ti;
        }
    }
    let k = if den > 0.0 && num > 0.0 { num / den } else { 10.0 / span };
    let mut best = (f64::INFINITY, 0.5 * k, 0.5 * k);
    for i in 0..SCAN {
        let g = k * 1e-3 * 1e5f64.powf(i as f64 / (SCAN - 1) as f64);
        let (mut pn, mut pd) = (0.0, 0.0);
        let phis: Vec<f64> = t.iter().map(|&ti| phi(k, 2.0 * g, ti).0).collect();
        for (&ph, &yi) in phis.iter().zip(up) {
            pn += ph * (yi - 0.5);
            pd += ph * ph;
        }
        if pd <= 0.0 {
            continue;
        }
        let amg = -2.0 * pn / pd;
        let rss: f64 = phis
            .iter()
            .zip(up)
            .map(|(&ph, &yi)| (0.5 - 0.5 * amg * ph - yi).powi(2))
            .sum();
        if rss < best.0 {
            best = (rss, amg, g);
        }
    }
    let (_, amg, g) = best;
    let a = (amg + g).clamp(0.01 * k, 0.99 * k);
    [a, k - a, g]
}

impl FitResult {
    pub fn rate_params(&self) -> Option<RateParams> {
        RateParams::new(self.get("alpha")?, self.get("beta")?, self.get("gamma")?).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipation::analytic_populations;

    #[test]
    fn curves_match_closed_form() {
        for r in [RateParams::reference(), RateParams::new(3e6, 1e6, 2e6).unwrap()] {
            let p = [r.alpha, r.beta, r.gamma];
            for t in [0.0, 0.1e-6, 0.3e-6, 2e-6] {
                let pop = analytic_populations(&r, t).unwrap();
                let (y1, y2) = rate_curves(&p, t);
                assert!((y1 - pop.bright()).abs() < 1e-12);
                assert!((y2 - pop.0[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn phi_continuous_across_branches() {
        let (k, t) = (4e6, 0.7e-6);
        for du in [-2e-2, -1.001e-2, -0.999e-2, 0.0, 0.999e-2, 1.001e-2, 2e-2] {
            let s = k + du / t;
            let (p, dk, ds) = phi(k, s, t);
            let h = 1e-3 * k;
            let fd_k = (phi(k + h, s, t).0 - phi(k - h, s, t).0) / (2.0 * h);
            let fd_s = (phi(k, s + h, t).0 - phi(k, s - h, t).0) / (2.0 * h);
            let direct = if (k - s).abs() > 0.0 {
                ((-k * t).exp() - (-s * t).exp()) / (k - s)
            } else {
                -t * (-k * t).exp()
            };
            assert!((p - direct).abs() < 1e-9 * direct.abs(), "{du}");
            assert!((dk - fd_k).abs() < 1e-5 * fd_k.abs());
            assert!((ds - fd_s).abs() < 1e-5 * fd_s.abs());
        }
    }
}
