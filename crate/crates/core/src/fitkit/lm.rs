use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Converged once every Jacobian column is this close to orthogonal to
    /// the residual vector (cosine of the angle).
    pub gtol: f64,
    /// Converged once an accepted step lowers the cost by less than this
    /// relative amount.
    pub ftol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 500,
            gtol: 1e-10,
            ftol: 1e-15,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmReport {
    pub params: Vec<f64>,
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Cost after the initial point and after each accepted step.
    pub history: Vec<f64>,
    pub jacobian: DMatrix<f64>,
    pub residuals: DVector<f64>,
}

/// Bounded Levenberg–Marquardt with Marquardt's diagonal scaling.
///
/// `eval(p)` returns the residual vector and its Jacobian `∂r/∂p`.
/// Steps are projected back into `bounds`.
pub fn levenberg_marquardt<F>(
    mut eval: F,
    p0: &[f64],
    bounds: &[(f64, f64)],
    opts: &LmOptions,
) -> LmReport
where
    F: FnMut(&[f64]) -> (DVector<f64>, DMatrix<f64>),
{
    let n = p0.len();
    assert_eq!(bounds.len(), n);
    let project = |p: &mut [f64]| {
        for (v, &(lo, hi)) in p.iter_mut().zip(bounds) {
            *v = v.clamp(lo, hi);
        }
    };
    let mut p = p0.to_vec();
    project(&mut p);
    let (mut r, mut j) = eval(&p);
    let mut rss = r.norm_squared();
    let mut history = vec![rss];
    let mut lambda = None::<f64>;
    let mut converged = false;
    let mut iterations = 0;

    if !rss.is_finite() {
        return LmReport {
            params: p,
            rss,
            converged: false,
            iterations,
            history,
            jacobian: j,
            residuals: r,
        };
    }

    while iterations < opts.max_iterations {
        if rss == 0.0 || orthogonal(&r, &j, opts.gtol) {
            converged = true;
            break;
        }
        iterations += 1;
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let dmax = jtj.diagonal().max().max(f64::MIN_POSITIVE);
        let diag: Vec<f64> = jtj.diagonal().iter().map(|&d| d.max(1e-12 * dmax)).collect();
        let mut lam = *lambda.get_or_insert(1e-3);
        let mut accepted = false;
        while lam < 1e16 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lam * diag[i];
            }
            let Some(delta) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lam *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            project(&mut trial);
            if trial == p {
                break;
            }
            let (r2, j2) = eval(&trial);
            let rss2 = r2.norm_squared();
            if rss2.is_finite() && rss2 < rss {
                let gain = (rss - rss2) / rss;
                p = trial;
                r = r2;
                j = j2;
                rss = rss2;
                history.push(rss);
                lambda = Some((lam / 3.0).max(1e-15));
                accepted = true;
                if gain < opts.ftol {
                    converged = true;
                }
                break;
            }
            lam *= 4.0;
        }
        if !accepted {
            // Even a vanishing steepest-descent step fails to go downhill:
            // stationary to rounding, or pinned at a bound.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    LmReport {
        params: p,
        rss,
        converged,
        iterations,
        history,
        jacobian: j,
        residuals: r,
    }
}

fn orthogonal(r: &DVector<f64>, j: &DMatrix<f64>, gtol: f64) -> bool {
    let rn = r.norm();
    if rn == 0.0 {
        return true;
    }
    j.column_iter().all(|c| {
        let cn = c.norm();
        cn == 0.0 || (c.dot(r)).abs() <= gtol * cn * rn
    })
}

/// Parameter standard errors from `s²·(JᵀJ)⁻¹`, with `s² = rss/(m−n)`.
/// Unidentifiable directions give infinity.
pub fn standard_errors(j: &DMatrix<f64>, rss: f64) -> Vec<f64> {
    let (m, n) = j.shape();
    let s2 = if m > n { rss / (m - n) as f64 } else { rss };
    // Column scaling keeps the inversion well conditioned across units.
    let scale: Vec<f64> = j.column_iter().map(|c| c.norm()).collect();
    if scale.iter().any(|&s| s == 0.0 || !s.is_finite()) {
        return vec![f64::INFINITY; n];
    }
    let js = DMatrix::from_fn(m, n, |i, k| j[(i, k)] / scale[k]);
    let jtj = js.transpose() * js;
    match jtj.clone().try_inverse() {
        Some(inv) if (&jtj * &inv - DMatrix::identity(n, n)).amax() < 1e-6 => (0..n)
            .map(|k| (s2 * inv[(k, k)].max(0.0)).sqrt() / scale[k])
            .collect(),
        _ => vec![f64::INFINITY; n],
    }
}
