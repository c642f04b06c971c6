use std::f64::consts::PI;

use nvmem::dissipation::{analytic_populations, RateParams};
use nvmem::experiments::*;
use nvmem::spin::{Register, RegisterParams, TransitionLabel};
use proptest::prelude::*;

fn grid(n: usize, step: f64) -> Vec<f64> {
    (0..n).map(|i| i as f64 * step).collect()
}

fn bare_rf(setup: &Setup, effective: f64) -> f64 {
    let reg = Register::new(setup.register).unwrap();
    effective / reg.coupling(TransitionLabel::Rf1).unwrap()
}

fn in_unit_range(r: &SweepResult) -> bool {
    r.x.len() == r.y.len() && r.y.iter().all(|&y| (-1e-6..=1.0 + 1e-6).contains(&y))
}

#[test]
fn rabi_frequency_tracks_amplitude() {
    let s = Setup::default();
    let t = grid(101, 5e-9);
    let a = bare_rf(&s, 4.3e6);
    let one = run_rabi(&s, a, &t).unwrap();
    let f1 = one.summary("rabi_frequency_hz").unwrap();
    assert!((f1 / 4.3e6 - 1.0).abs() < 0.02, "{f1}");
    assert!((one.summary("pi_time_s").unwrap() - 116e-9).abs() < 2e-9);
    let two = run_rabi(&s, 2.0 * a, &t).unwrap();
    let f2 = two.summary("rabi_frequency_hz").unwrap();
    assert!((f2 / (2.0 * f1) - 1.0).abs() < 0.01, "{f2}");
    assert!(in_unit_range(&one) && in_unit_range(&two));
}

#[test]
fn rabi_without_drive_is_flat() {
    let r = run_rabi(&Setup::default(), 0.0, &grid(20, 10e-9)).unwrap();
    let first = r.y[0];
    assert!(first > 0.999);
    assert!(r.y.iter().all(|y| (y - first).abs() < 1e-12));
    assert!(r.summary("rabi_frequency_hz").is_none());
}

#[test]
fn fid_fringes_and_envelope() {
    let s = Setup::default();
    let t = grid(401, 0.1e-6);
    let still = run_fid(&s, 0.0, &t).unwrap();
    let env = still.summary("envelope_time_s").unwrap();
    assert!((env / s.register.t2star_n - 1.0).abs() < 0.05, "{env}");
    let falls = still.y.windows(2).filter(|w| w[1] < w[0] - 1e-12).count();
    assert_eq!(falls, 0, "no oscillation at zero detuning");
    let moving = run_fid(&s, 150e3, &t).unwrap();
    let f = moving.summary("fringe_frequency_hz").unwrap();
    assert!((f / 150e3 - 1.0).abs() < 0.01, "{f}");
}

#[test]
fn tomography_matches_closed_form() {
    let s = Setup::default();
    let t = grid(61, 50e-9);
    let (total, up) = run_init_tomography(&s, &t).unwrap();
    for (i, &ti) in t.iter().enumerate() {
        let p = analytic_populations(&s.rates, ti).unwrap();
        assert!((total.y[i] - p.bright()).abs() < 1e-6, "total at {ti}");
        assert!((up.y[i] - p.0[0]).abs() < 1e-6, "up at {ti}");
    }
    let peak = up.summary("peak_population").unwrap();
    assert!((0.754..0.764).contains(&peak), "{peak}");
}

#[test]
fn tomography_limits() {
    let mut s = Setup::default();
    let (total, up) = run_init_tomography(&s, &[30e-6]).unwrap();
    assert!((total.y[0] - 1.0).abs() < 1e-6);
    assert!((up.y[0] - 0.5).abs() < 1e-6);
    s.rates = RateParams::new(0.0, 0.0, 0.0).unwrap();
    s.init_laser = 10e-6;
    let (total, up) = run_init_tomography(&s, &grid(5, 100e-9)).unwrap();
    assert!(total.y.iter().all(|y| (y - total.y[0]).abs() < 1e-12));
    assert!(up.y.iter().all(|y| (y - up.y[0]).abs() < 1e-12));
}

#[test]
fn purification_climbs_to_fixed_point() {
    let s = Setup::default();
    let (r, pts) = run_repeated_init(&s, 10, 150e-9).unwrap();
    assert!((r.y[0] - 0.5).abs() < 1e-9);
    assert!(r.y[10] >= 0.76, "{}", r.y[10]);
    assert!(r.y.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    let pol = pts[10].polarization();
    assert!((0.5..0.8).contains(&pol), "{pol}");
    let (best, p) = optimal_cycle_laser(&s, 10, &grid(21, 50e-9)[1..]).unwrap();
    assert!(p >= r.y[10] - 1e-12);
    assert!((50e-9..=400e-9).contains(&best));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn purification_is_monotone(a in 0.5f64..20.0, b in 0.0f64..1.0, g in 0.0f64..5.0, m in 5.0f64..30.0) {
        // Rates in 1/µs, nuclear-spin-conserving pumping dominant, and a
        // cycle laser long enough to empty mS=1.
        let mut s = Setup::default();
        s.rates = RateParams::new(a * 1e6, a * b * 1e6, g * 1e6).unwrap();
        let tl = m / (a * (1.0 + b)) * 1e-6;
        s.init_laser = 40.0 / (a * (1.0 + b)).min(2.0 * g.max(0.5)) * 1e-6;
        let (r, _) = run_repeated_init(&s, 6, tl).unwrap();
        // Overshoot is limited by the mS=1 population left after each laser.
        let tol = (-m).exp() + 1e-6;
        for w in r.y.windows(2) {
            prop_assert!(w[1] >= w[0] - tol, "{:?}", r.y);
        }
    }
}

fn window_grid(centre: f64, f: f64) -> (Vec<f64>, (f64, f64)) {
    let w = fidelity_window(centre, f);
    ((0..41).map(|i| w.0 + (w.1 - w.0) * i as f64 / 40.0).collect(), w)
}

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

#[test]
fn transfer_phase_covariance() {
    let s = Setup::default();
    let (x, w) = window_grid(20e-6, 150e3);
    let mut base = None;
    for k in 0..8 {
        let phi = k as f64 * PI / 4.0;
        let r = run_transfer_storage(&s, &LossBudget::preset(), phi, &x, 150e3).unwrap();
        assert!(in_unit_range(&r));
        let p = extract_fidelity(&r, w).unwrap().phase;
        let p0 = *base.get_or_insert(p);
        let err = wrap(p - p0 - phi);
        assert!(err.abs() < 0.05, "phi {phi}: error {err}");
    }
}

#[test]
fn transfer_fidelity_budget() {
    let s = Setup::default();
    let ideal = transfer_fidelity(&s, &LossBudget::none(), 150e3, 20e-6).unwrap();
    for st in &ideal.states {
        assert!((st.fidelity - 1.0).abs() < 1e-6, "{st:?}");
    }
    let rep = transfer_fidelity(&s, &LossBudget::preset(), 150e3, 20e-6).unwrap();
    assert!((rep.mean_fidelity - 0.88).abs() < 0.04, "{}", rep.mean_fidelity);
    for st in &rep.states {
        assert!((0.0..=1.0).contains(&st.fidelity));
        assert!((st.fidelity - (1.0 + st.delta) / 2.0).abs() < 1e-12);
    }
    let px = rep.states[0].phase;
    let mx = rep.states[1].phase;
    assert!((wrap(mx - px).abs() - PI).abs() < 0.05);
}

#[test]
fn transfer_rejects_phase_out_of_range() {
    let s = Setup::default();
    assert!(run_transfer_storage(&s, &LossBudget::none(), 2.0 * PI, &[0.0], 150e3).is_err());
    assert!(run_transfer_storage(&s, &LossBudget::none(), -0.1, &[0.0], 150e3).is_err());
}

#[test]
fn fidelity_from_peak_to_peak() {
    assert_eq!(fidelity_from_delta(1.0), 1.0);
    assert_eq!(fidelity_from_delta(0.0), 0.5);
    for (d, f) in [(0.80, 0.90), (0.66, 0.83), (0.72, 0.86), (0.84, 0.92)] {
        assert!((fidelity_from_delta(d) - f).abs() < 1e-12);
    }
    let s = Setup::default();
    let x: Vec<f64> = (0..60).map(|i| i as f64 * 0.2e-6).collect();
    let y = x.iter().map(|t| 0.5 + 0.4 * (2.0 * PI * 150e3 * t).cos()).collect();
    let mut r = run_rabi(&s, 0.0, &[0.0]).unwrap();
    r.x = x;
    r.y = y;
    let fr = extract_fidelity(&r, fidelity_window(6e-6, 150e3)).unwrap();
    assert!((fr.delta - 0.8).abs() < 1e-6);
    assert!((fr.fidelity - 0.9).abs() < 1e-6);
}

fn storage_times() -> Vec<f64> {
    grid(21, 0.5e-3)
}

#[test]
fn cpmg_perfect_refocusing_without_decay() {
    let mut s = Setup::default();
    s.register = RegisterParams {
        t1_e: f64::INFINITY,
        t2_pure_c: f64::INFINITY,
        ..s.register
    };
    let opts = StorageOptions {
        ensemble: 200,
        ..Default::default()
    };
    for n in [1, 2, 4] {
        let (r, _) = run_cpmg_storage(&s, n, &storage_times(), &opts).unwrap();
        assert!(r.y.iter().all(|y| (y - 1.0).abs() < 1e-9), "{:?}", r.y);
    }
}

#[test]
fn cpmg_decay_follows_t1_and_ignores_pulse_count() {
    let mut s = Setup::default();
    s.register.t2_pure_c = f64::INFINITY;
    let opts = StorageOptions::default();
    let mut fits = Vec::new();
    for n in [1, 2, 4] {
        let (r, f) = run_cpmg_storage(&s, n, &storage_times(), &opts).unwrap();
        assert!(in_unit_range(&r));
        assert!((f.time_constant / 3.3e-3 - 1.0).abs() < 0.1, "n={n}: {}", f.time_constant);
        fits.push(f);
    }
    for a in &fits {
        for b in &fits {
            let sigma = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            assert!((a.time_constant - b.time_constant).abs() < 3.0 * sigma);
        }
    }
}

#[test]
fn storage_is_bit_reproducible() {
    let s = Setup::default();
    let opts = StorageOptions {
        ensemble: 300,
        seed: 9,
        ..Default::default()
    };
    let (a, _) = run_cpmg_storage(&s, 2, &storage_times(), &opts).unwrap();
    let (b, _) = run_cpmg_storage(&s, 2, &storage_times(), &opts).unwrap();
    assert_eq!(a, b);
    let (c, _) = run_cpmg_storage(&s, 2, &storage_times(), &StorageOptions { seed: 10, ..opts }).unwrap();
    assert_ne!(a.y, c.y);
}

#[test]
fn extended_dd_refocuses_without_flips() {
    let s = Setup::default();
    for tau in [1e-6, 20e-6, 66e-6] {
        for dn in [0.0, 3.1e3, -12e3] {
            assert!(no_flip_residual(&s, tau, 8, dn).unwrap() < 1e-6);
        }
    }
    assert!(run_extended_dd(&s, 0.0, 4, &StorageOptions::default()).is_err());
    assert!(run_extended_dd(&s, -1e-6, 4, &StorageOptions::default()).is_err());
}

#[test]
fn single_flip_error_is_bounded() {
    let s = Setup::default();
    let tau = s.register.t1_e / 50.0;
    let bound = single_flip_bound(&s, tau).unwrap();
    let errs = single_flip_phase_errors(&s, tau, 2000, 4).unwrap();
    assert!(errs.iter().all(|e| e.abs() <= bound * (1.0 + 1e-12)));
    let max = errs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    assert!(max > 0.9 * bound);
}
