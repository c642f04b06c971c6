//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use nalgebra::Vector4;
use nvmem::dissipation::{analytic_populations, propagate_rates, rate_matrix, DecayParams, Populations, RateParams};
use nvmem::experiments::*;
use nvmem::fitkit::{fit_rate_params, rate_curves, FitOptions};
use nvmem::sequence::{emit, parse_sequence, resolve, validate_timing, Bindings, Channel, ResolveOptions};
use nvmem::spin::{enhancement_factor_numeric, Register, TransitionLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check { pass, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn grid(n: usize, step: f64) -> Vec<f64> {
    (0..n).map(|i| i as f64 * step).collect()
}

fn enhancement() -> Check {
    let s = Setup::default();
    let k = enhancement_factor_numeric(&s.register, TransitionLabel::Rf1).unwrap();
    check((114.0..=130.0).contains(&k), format!("enhancement {k:.2}, window [114, 130]"))
}

fn rk4(r: &RateParams, p0: Populations, t: f64, steps: usize) -> [f64; 4] {
    let m = rate_matrix(r);
    let h = t / steps as f64;
    let mut p = p0.as_vector();
    for _ in 0..steps {
        let k1 = m * p;
        let k2 = m * (p + k1 * (h / 2.0));
        let k3 = m * (p + k2 * (h / 2.0));
        let k4 = m * (p + k3 * h);
        p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    let v: Vector4<f64> = p;
    [v[0], v[1], v[2], v[3]]
}

fn rate_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let gamma: f64 = rng.gen_range(0.1e6..3e6);
        let (alpha, beta) = if i % 4 == 0 {
            let a = rng.gen_range(0.0..2.0 * gamma);
            (a, 2.0 * gamma - a)
        } else {
            (rng.gen_range(0.2e6..1e7), rng.gen_range(0.0..3e6))
        };
        let r = RateParams::new(alpha, beta, gamma).unwrap();
        let t = rng.gen_range(0.0..4e-6);
        let a = analytic_populations(&r, t).unwrap().0;
        let e = propagate_rates(&Populations::SWAPPED, &r, t).unwrap().0;
        let k = rk4(&r, Populations::SWAPPED, t, 4000);
        for j in 0..4 {
            worst = worst.max((a[j] - e[j]).abs()).max((a[j] - k[j]).abs()).max((e[j] - k[j]).abs());
        }
    }
    check(worst < 1e-7, format!("max disagreement {worst:.1e} over 20 points, tolerance 1e-7"))
}

fn tomography_peak() -> Check {
    let r = RateParams::reference();
    let (mut best_t, mut best) = (0.0, 0.0);
    for i in 0..=20_000 {
        let t = i as f64 * 0.1e-9;
        let p = analytic_populations(&r, t).unwrap().0[0];
        if p > best {
            best = p;
            best_t = t;
        }
    }
    let ok = (best - 0.759).abs() <= 0.005
        && (best_t - 0.300e-6).abs() <= 0.01e-6
        && (best - 0.78).abs() <= 0.03
        && (best_t - 330e-9).abs() <= 40e-9;
    check(ok, format!("peak {best:.4} at {:.1} ns", best_t * 1e9))
}

fn purification() -> Check {
    let s = Setup::default();
    let (laser, _) = optimal_cycle_laser(&s, 10, &grid(21, 50e-9)[1..]).unwrap();
    let (_, pts) = run_repeated_init(&s, 10, laser).unwrap();
    let start = pts[0].p0_up();
    let end = pts.last().unwrap().p0_up();
    check(
        (start - 0.5).abs() < 1e-3 && end >= 0.76,
        format!("P(0,up) {start:.3} -> {end:.4} after 10 cycles at {:.0} ns", laser * 1e9),
    )
}

fn pi_time_and_window() -> Check {
    let s = Setup::default();
    let reg = Register::new(s.register).unwrap();
    let bare = 4.3e6 / reg.coupling(TransitionLabel::Rf1).unwrap();
    let r = run_rabi(&s, bare, &grid(101, 5e-9)).unwrap();
    let pi = r.summary("pi_time_s").unwrap();
    let text = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("sequences/transfer.seq")).unwrap();
    let ir = parse_sequence(&text).unwrap();
    let b: Bindings = ir.sweeps.iter().map(|s| (s.name.clone(), s.values()[0])).collect();
    let ev = resolve(&ir, &b, &ResolveOptions::default()).unwrap();
    let i = ev.iter().position(|e| e.channel == Channel::Mw2).unwrap();
    let window = ev[i + 4].end() - ev[i].start;
    check(
        (pi - 125e-9).abs() <= 10e-9 && (window - 300e-9).abs() <= 30e-9,
        format!("RF1 pi {:.1} ns, read-write window {:.1} ns", pi * 1e9, window * 1e9),
    )
}

fn transfer() -> Check {
    let s = Setup::default();
    let rep = transfer_fidelity(&s, &LossBudget::preset(), 150e3, 20e-6).unwrap();
    let per: Vec<String> = rep.states.iter().map(|st| format!("{} {:.3}", st.label, st.fidelity)).collect();
    let ok = (rep.mean_fidelity - 0.88).abs() <= 0.04
        && rep.states.iter().all(|st| (0.83..=0.92).contains(&st.fidelity));
    check(ok, format!("mean F {:.4} ({})", rep.mean_fidelity, per.join(", ")))
}

fn storage() -> Check {
    let times = grid(21, 0.5e-3);
    let opts = StorageOptions {
        ensemble: 1000,
        seed: 1,
        ..Default::default()
    };
    let s = Setup::default();
    let predicted = DecayParams::new(s.register.t1_e, s.register.t2_pure_c).unwrap().combined_time();
    let mut fits = Vec::new();
    let mut ok = true;
    for n in [1, 2, 4] {
        let (_, f) = run_cpmg_storage(&s, n, &times, &opts).unwrap();
        ok &= rel(f.time_constant, predicted) <= 0.1;
        fits.push(f);
    }
    for a in &fits {
        for b in &fits {
            let sigma = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            ok &= (a.time_constant - b.time_constant).abs() <= 3.0 * sigma;
        }
    }
    let mut pure = s.clone();
    pure.register.t2_pure_c = f64::INFINITY;
    let (_, t1) = run_cpmg_storage(&pure, 2, &times, &opts).unwrap();
    ok &= rel(t1.time_constant, 3.3e-3) <= 0.1;
    let taus: Vec<String> = fits.iter().map(|f| format!("{:.3}", f.time_constant * 1e3)).collect();
    check(
        ok,
        format!(
            "n=1,2,4: {} ms vs predicted {:.3} ms; T2C=inf: {:.3} ms",
            taus.join(", "),
            predicted * 1e3,
            t1.time_constant * 1e3
        ),
    )
}

fn extended_dd() -> Check {
    let s = Setup::default();
    let tau = s.register.t1_e / 50.0;
    let mut residual = 0.0f64;
    for dn in [0.0, 3.1e3, -12e3] {
        residual = residual.max(no_flip_residual(&s, tau, 8, dn).unwrap());
    }
    let opts = StorageOptions {
        ensemble: 1000,
        seed: 1,
        ..Default::default()
    };
    let cycles = (4.0 * s.register.t1_e / (4.0 * tau)).ceil() as u32;
    let (_, dd) = run_extended_dd(&s, tau, cycles, &opts).unwrap();
    let (_, plain) = run_periodic_cpmg(&s, tau, cycles, &opts).unwrap();
    let ratio = dd.time_constant / plain.time_constant;
    check(
        residual < 1e-6 && ratio >= 1.5,
        format!(
            "no-flip residual {residual:.1e} rad; tau = T1e/50: extended {:.3} ms / plain {:.3} ms = {ratio:.2} (need >= 1.5)",
            dd.time_constant * 1e3,
            plain.time_constant * 1e3
        ),
    )
}

fn fit_recovery() -> Check {
    let r = RateParams::reference();
    let want = [r.alpha, r.beta, r.gamma];
    let names = ["alpha", "beta", "gamma"];
    let err = |f: &nvmem::fitkit::FitResult| {
        names.iter().zip(want).map(|(n, w)| rel(f.get(n).unwrap(), w)).fold(0.0, f64::max)
    };
    let coarse = grid(61, 50e-9);
    let (total, up): (Vec<f64>, Vec<f64>) = coarse.iter().map(|&ti| rate_curves(&want, ti)).unzip();
    let clean = fit_rate_params(&coarse, &total, &up, &FitOptions::default()).unwrap();

    let t = grid(15_001, 0.2e-9);
    let (total, up): (Vec<f64>, Vec<f64>) = t.iter().map(|&ti| rate_curves(&want, ti)).unzip();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut jitter = |v: &[f64]| v.iter().map(|y| y + noise.sample(&mut rng)).collect::<Vec<_>>();
    let (nt, nu) = (jitter(&total), jitter(&up));
    let noisy = fit_rate_params(&t, &nt, &nu, &FitOptions::default()).unwrap();
    let se = names.iter().zip(want).map(|(n, w)| noisy.std_error(n).unwrap() / w).fold(0.0, f64::max);
    let (ec, en) = (err(&clean), err(&noisy));
    check(
        clean.converged && noisy.converged && ec <= 1e-4 && en <= 0.02,
        format!(
            "max relative error {ec:.1e} noiseless; {en:.4} with sigma 0.01 on {} points (largest standard error {se:.4})",
            t.len()
        ),
    )
}

fn parser_corpus() -> Check {
    let reg = Register::new(Setup::default().register).unwrap();
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("sequences");
    let mut ok = true;
    let mut diags = 0;
    for name in ["rabi", "fid", "purification", "transfer", "extended_dd"] {
        let text = std::fs::read_to_string(dir.join(format!("{name}.seq"))).unwrap();
        let Ok(ir) = parse_sequence(&text) else {
            ok = false;
            continue;
        };
        ok &= parse_sequence(&emit(&ir)).as_ref() == Ok(&ir);
        let b: Bindings = ir.sweeps.iter().map(|s| (s.name.clone(), s.values()[0])).collect();
        match resolve(&ir, &b, &ResolveOptions::default()) {
            Ok(ev) => diags += validate_timing(&ev, &reg).len(),
            Err(_) => ok = false,
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let pieces = ["laser", "mw1", "rf2", "pi", "pi/2", "10ns", "-1us", "repeat", "sweep", "{", "}", "@", "=", "\n", "phase", "t"];
    let fuzz = std::panic::catch_unwind(move || {
        for k in 0..10_000 {
            let text: String = if k % 2 == 0 {
                let bytes: Vec<u8> = (0..rng.gen_range(0..64)).map(|_| rng.gen()).collect();
                String::from_utf8_lossy(&bytes).into_owned()
            } else {
                (0..rng.gen_range(0..20)).map(|_| pieces[rng.gen_range(0..pieces.len())]).collect::<Vec<_>>().join(" ")
            };
            let _ = parse_sequence(&text);
        }
    });
    check(
        ok && diags == 0 && fuzz.is_ok(),
        format!("5 sequences, {diags} diagnostics; 10^4 fuzz inputs {}", if fuzz.is_ok() { "clean" } else { "crashed" }),
    )
}

type Criterion = (&'static str, fn() -> Check, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        ("enhancement factor", enhancement, Duration::from_secs(1)),
        ("rate-model oracles", rate_oracles, Duration::from_secs(1)),
        ("tomography peak", tomography_peak, Duration::from_secs(1)),
        ("purification", purification, Duration::from_secs(5)),
        ("pi time and window", pi_time_and_window, Duration::from_secs(5)),
        ("transfer fidelity", transfer, Duration::from_secs(30)),
        ("CPMG storage decay", storage, Duration::from_secs(120)),
        ("extended DD", extended_dd, Duration::from_secs(120)),
        ("rate fit recovery", fit_recovery, Duration::from_secs(5)),
        ("parser corpus", parser_corpus, Duration::from_secs(10)),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let c = f();
        let took = start.elapsed();
        let pass = c.pass && took <= *limit;
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{:.2}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            c.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
