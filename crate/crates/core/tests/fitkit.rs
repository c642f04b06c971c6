use std::f64::consts::PI;

use nvmem::dissipation::RateParams;
use nvmem::fitkit::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn noisy(y: &mut [f64], sigma: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::new(0.0, sigma).unwrap();
    for v in y {
        *v += n.sample(&mut rng);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn fd_check(f: impl Fn(&[f64]) -> f64, p: &[f64], grad: &[f64]) {
    for k in 0..p.len() {
        let h = 1e-6 * p[k].abs().max(1e-3);
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[k] += h;
        b[k] -= h;
        let fd = (f(&a) - f(&b)) / (2.0 * h);
        let scale = fd.abs().max(grad[k].abs());
        if scale > 1e-12 {
            assert!((fd - grad[k]).abs() <= 1e-4 * scale, "param {k}: fd {fd} vs {}", grad[k]);
        }
    }
}

#[test]
fn jacobians_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let p = [
            rng.gen_range(0.1..2.0),
            rng.gen_range(1e5..1e7),
            rng.gen_range(-PI..PI),
            rng.gen_range(-1.0..1.0),
        ];
        let x = rng.gen_range(0.0..2e-6);
        fd_check(|q| cosine_model(x, q).0, &p, &cosine_model(x, &p).1);

        let p = [rng.gen_range(-2.0..2.0), rng.gen_range(1e-4..1e-2), rng.gen_range(-1.0..1.0)];
        let x = rng.gen_range(0.0..1e-2);
        fd_check(|q| exponential_model(x, q).0, &p, &exponential_model(x, &p).1);

        let p = [rng.gen_range(1e5..1e7), rng.gen_range(1e5..1e7), rng.gen_range(1e5..1e7)];
        let t = rng.gen_range(0.0..3e-6);
        let (g1, g2) = rate_curves_jacobian(&p, t);
        fd_check(|q| rate_curves(q, t).0, &p, &g1);
        fd_check(|q| rate_curves(q, t).1, &p, &g2);
    }
    // on the degenerate line α+β = 2γ
    let p = [3e6, 1e6, 2e6];
    let (g1, g2) = rate_curves_jacobian(&p, 0.8e-6);
    fd_check(|q| rate_curves(q, 0.8e-6).0, &p, &g1);
    fd_check(|q| rate_curves(q, 0.8e-6).1, &p, &g2);
}

#[test]
fn cosine_with_noise_within_one_percent() {
    let f = 4.3e6;
    let x: Vec<f64> = (0..100).map(|i| i as f64 * 10e-9).collect();
    for seed in 0..5 {
        let mut y: Vec<f64> = x.iter().map(|t| 0.5 + 0.5 * (2.0 * PI * f * t).cos()).collect();
        noisy(&mut y, 0.05, seed);
        let r = fit_cosine(&x, &y, None, &FitOptions::default()).unwrap();
        assert!(r.converged);
        assert!(rel(r.get("frequency").unwrap(), f) < 0.01, "{r:?}");
    }
}

#[test]
fn cosine_single_period_window() {
    let f = 150e3;
    let x: Vec<f64> = (0..41).map(|i| 20e-6 - 0.5 / f + i as f64 / f / 40.0).collect();
    let y: Vec<f64> = x.iter().map(|t| 0.5 + 0.4 * (2.0 * PI * f * t + 1.0).cos()).collect();
    let r = fit_cosine(&x, &y, None, &FitOptions::default()).unwrap();
    assert!(r.converged);
    assert!(rel(r.get("amplitude").unwrap(), 0.4) < 1e-6);
}

#[test]
fn accepted_steps_decrease_and_gradient_vanishes() {
    let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.2).collect();
    let mut y: Vec<f64> = x.iter().map(|t| 2.0 * (-t / 1.7).exp() + 0.1).collect();
    noisy(&mut y, 0.01, 3);
    let m = x.len();
    let rep = levenberg_marquardt(
        |p| {
            let mut r = nalgebra::DVector::zeros(m);
            let mut j = nalgebra::DMatrix::zeros(m, 3);
            for i in 0..m {
                let (v, g) = exponential_model(x[i], p);
                r[i] = v - y[i];
                for k in 0..3 {
                    j[(i, k)] = g[k];
                }
            }
            (r, j)
        },
        &[1.0, 1.0, 0.0],
        &[(f64::NEG_INFINITY, f64::INFINITY), (1e-9, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY)],
        &LmOptions::default(),
    );
    assert!(rep.converged);
    assert!(rep.history.windows(2).all(|w| w[1] < w[0]));
    let grad = rep.jacobian.transpose() * &rep.residuals;
    assert!(grad.norm() < 1e-6 * (1.0 + rep.rss), "{}", grad.norm());
}

#[test]
fn exponential_hahn_like_recovery() {
    let x: Vec<f64> = (0..25).map(|i| i as f64 * 0.5e-3).collect();
    let mut y: Vec<f64> = x.iter().map(|t| 0.45 * (-t / 4.1e-3).exp() + 0.5).collect();
    noisy(&mut y, 0.02, 5);
    let r = fit_exponential(&x, &y, None, &FitOptions::default()).unwrap();
    let (t, e) = (r.get("time_constant").unwrap(), r.std_error("time_constant").unwrap());
    assert!(r.converged && e > 0.0);
    assert!((t - 4.1e-3).abs() < 3.0 * e, "{t} ± {e}");
}

fn tomography(r: &RateParams, n: usize, tmax: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let t: Vec<f64> = (0..n).map(|i| tmax * i as f64 / (n - 1) as f64).collect();
    let p = [r.alpha, r.beta, r.gamma];
    let (a, b) = t.iter().map(|&ti| rate_curves(&p, ti)).unzip();
    (t, a, b)
}

#[test]
fn rate_fit_noiseless_and_degenerate() {
    let r = RateParams::reference();
    let (t, a, b) = tomography(&r, 61, 3e-6);
    let f = fit_rate_params(&t, &a, &b, &FitOptions::default()).unwrap();
    assert!(f.converged, "{f:?}");
    assert!(rel(f.get("alpha").unwrap(), r.alpha) < 1e-5);
    assert!(rel(f.get("beta").unwrap(), r.beta) < 1e-5);
    assert!(rel(f.get("gamma").unwrap(), r.gamma) < 1e-5);

    let d = RateParams::new(3e6, 1e6, 2e6).unwrap();
    let (t, a, b) = tomography(&d, 61, 3e-6);
    let f = fit_rate_params(&t, &a, &b, &FitOptions::default()).unwrap();
    assert!(f.converged);
    assert!(rel(f.get("alpha").unwrap(), 3e6) < 1e-4);
    assert!(rel(f.get("beta").unwrap(), 1e6) < 1e-4);
    assert!(rel(f.get("gamma").unwrap(), 2e6) < 1e-4);
}

#[test]
fn rate_fit_flat_is_flagged() {
    let t: Vec<f64> = (0..10).map(|i| i as f64 * 1e-7).collect();
    let f = fit_rate_params(&t, &[1.0; 10], &[0.5; 10], &FitOptions::default()).unwrap();
    assert!(!f.converged);
}

#[test]
fn fits_are_deterministic() {
    let x: Vec<f64> = (0..50).map(|i| i as f64 * 1e-8).collect();
    let mut y: Vec<f64> = x.iter().map(|t| (2.0 * PI * 3e6 * t).cos()).collect();
    noisy(&mut y, 0.1, 9);
    let a = fit_cosine(&x, &y, None, &FitOptions::default()).unwrap();
    let b = fit_cosine(&x, &y, None, &FitOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sigma_weights_are_validated() {
    let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
    let opts = FitOptions {
        sigma: Some(vec![0.0; 10]),
        ..Default::default()
    };
    assert_eq!(fit_exponential(&x, &x, None, &opts), Err(FitError::BadSigma));
}
