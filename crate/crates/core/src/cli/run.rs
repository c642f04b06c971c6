use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{RunConfig, SweepConfig};
use super::output::read_columns;
use super::CliError;
use crate::dissipation::DecayParams;
use crate::experiments::{
    optimal_cycle_laser, run_cpmg_storage, run_extended_dd, run_fid, run_init_tomography, run_periodic_cpmg,
    run_rabi, run_repeated_init, run_transfer_storage, transfer_fidelity, StorageOptions, SweepResult, STATES,
};
use crate::fitkit::{fit_cosine, fit_exponential, fit_rate_params, FitOptions};
use crate::sequence::{parse_sequence, resolve, validate_timing, Bindings, Severity};
use crate::spin::{Register, TransitionLabel};

/// Curves and headline numbers of one experiment run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: String,
    /// `(file stem, curve)`.
    pub curves: Vec<(String, SweepResult)>,
    pub summary: BTreeMap<String, f64>,
    pub headline: (String, f64),
    pub extra: serde_json::Value,
    pub seed: Option<u64>,
}

impl Outcome {
    fn new(name: &str) -> Self {
        Outcome {
            name: name.to_string(),
            curves: Vec::new(),
            summary: BTreeMap::new(),
            headline: (String::new(), f64::NAN),
            extra: serde_json::Value::Null,
            seed: None,
        }
    }

    fn headline(mut self, key: &str) -> Self {
        let v = self.summary.get(key).copied().unwrap_or(f64::NAN);
        self.headline = (key.to_string(), v);
        self
    }
}

fn state_stem(label: &str) -> String {
    let sign = if label.starts_with('-') { "m" } else { "p" };
    format!("transfer_{sign}{}", label[1..].to_lowercase())
}

fn storage_options(c: &RunConfig, what: &str) -> Result<StorageOptions, CliError> {
    let seed = c
        .seed
        .ok_or_else(|| CliError::Usage(format!("{what} runs trajectories and needs a seed (`seed =` or --seed)")))?;
    Ok(StorageOptions {
        ensemble: c.ensemble,
        seed,
        nuclear_noise: c.nuclear_noise,
        flips: c.flips,
    })
}

pub fn run_experiment(name: &str, c: &RunConfig) -> Result<Outcome, CliError> {
    let s = &c.setup;
    let mut o = Outcome::new(name);
    Ok(match name {
        "rabi" => {
            let reg = s.register()?;
            let bare = c.rabi / reg.coupling(TransitionLabel::Rf1).map_err(|e| CliError::Runtime(e.to_string()))?;
            let r = run_rabi(s, bare, &c.rabi_grid)?;
            o.summary.extend(r.metadata.summary.clone());
            o.curves.push(("rabi".into(), r));
            o.headline("rabi_frequency_hz")
        }
        "fid" => {
            let r = run_fid(s, c.fid_detuning, &c.fid_grid)?;
            o.summary.extend(r.metadata.summary.clone());
            o.curves.push(("fid".into(), r));
            let key = if c.fid_detuning == 0.0 { "envelope_time_s" } else { "fringe_frequency_hz" };
            o.headline(key)
        }
        "init-tomography" => {
            let (total, up) = run_init_tomography(s, &c.tomography_grid)?;
            o.summary.extend(up.metadata.summary.clone());
            o.curves.push(("init-tomography_total".into(), total));
            o.curves.push(("init-tomography_up".into(), up));
            o.headline("peak_population")
        }
        "purification" => {
            let mut laser = c.purification_laser;
            if let Some(scan) = &c.purification_scan {
                let mut y = Vec::with_capacity(scan.len());
                for &t in scan {
                    y.push(run_repeated_init(s, c.purification_cycles, t)?.0.y.last().copied().unwrap_or(f64::NAN));
                }
                let (best, _) = optimal_cycle_laser(s, c.purification_cycles, scan)?;
                laser = best;
                let mut r = run_repeated_init(s, 0, 0.0)?.0;
                r.name = "purification_scan".into();
                r.x = scan.clone();
                r.y = y;
                r.metadata.summary.clear();
                o.summary.insert("optimal_laser_s".into(), best);
                o.curves.push(("purification_scan".into(), r));
            }
            let (r, _) = run_repeated_init(s, c.purification_cycles, laser)?;
            o.summary.extend(r.metadata.summary.clone());
            o.curves.insert(0, ("purification".into(), r));
            o.headline("p0_up")
        }
        "transfer" => {
            for (label, phi) in STATES {
                let r = run_transfer_storage(s, &c.budget, phi, &c.transfer_grid, c.transfer_detuning)?;
                o.curves.push((state_stem(label), r));
            }
            let rep = transfer_fidelity(s, &c.budget, c.transfer_detuning, c.transfer_centre)?;
            for st in &rep.states {
                o.summary.insert(format!("fidelity_{}", state_stem(&st.label).trim_start_matches("transfer_")), st.fidelity);
            }
            o.summary.insert("mean_fidelity".into(), rep.mean_fidelity);
            o.extra = serde_json::to_value(&rep).unwrap_or_default();
            o.headline("mean_fidelity")
        }
        "cpmg" => {
            let opts = storage_options(c, "cpmg")?;
            o.seed = Some(opts.seed);
            let decay = DecayParams::new(s.register.t1_e, s.register.t2_pure_c).map_err(|e| CliError::Usage(e.to_string()))?;
            o.summary.insert("predicted_time_s".into(), decay.combined_time());
            for &n in &c.cpmg_pulses {
                let (r, f) = run_cpmg_storage(s, n, &c.cpmg_grid, &opts)?;
                o.summary.insert(format!("time_constant_s_n{n}"), f.time_constant);
                o.summary.insert(format!("time_constant_err_s_n{n}"), f.std_error);
                o.curves.push((format!("cpmg{n}"), r));
            }
            let first = c.cpmg_pulses.first().copied().unwrap_or(1);
            o.headline(&format!("time_constant_s_n{first}"))
        }
        "extended-dd" => {
            let opts = storage_options(c, "extended-dd")?;
            o.seed = Some(opts.seed);
            let tau = c.dd_tau.unwrap_or(s.register.t1_e / 50.0);
            let (dd, fd) = run_extended_dd(s, tau, c.dd_cycles, &opts)?;
            let (plain, fp) = run_periodic_cpmg(s, tau, c.dd_cycles, &opts)?;
            o.summary.insert("tau_s".into(), tau);
            o.summary.insert("time_constant_s".into(), fd.time_constant);
            o.summary.insert("cpmg_time_constant_s".into(), fp.time_constant);
            o.summary.insert("storage_ratio".into(), fd.time_constant / fp.time_constant);
            o.curves.push(("extended-dd".into(), dd));
            o.curves.push(("extended-dd_cpmg".into(), plain));
            o.headline("storage_ratio")
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown experiment `{other}`; available: {}",
                super::EXPERIMENTS.join(", ")
            )))
        }
    })
}

pub(crate) fn parse_check(path: &Path, c: &RunConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{file}: {e}")))?;
    let ir = match parse_sequence(&text) {
        Ok(ir) => ir,
        Err(e) => return Err(CliError::Usage(e.render(&file))),
    };
    let reg = Register::new(c.setup.register).map_err(|e| CliError::Usage(e.to_string()))?;
    let first: Bindings = ir.sweeps.iter().map(|s| (s.name.clone(), s.values()[0])).collect();
    let mut points = vec![first.clone()];
    for s in &ir.sweeps {
        if let Some(&last) = s.values().last() {
            let mut b = first.clone();
            b.insert(s.name.clone(), last);
            points.push(b);
        }
    }
    let mut diags = Vec::new();
    let mut count = 0;
    for (i, b) in points.iter().enumerate() {
        let ev = resolve(&ir, b, &c.setup.resolve_options()).map_err(|e| CliError::Usage(e.render(&file)))?;
        if i == 0 {
            count = ev.len();
        }
        for d in validate_timing(&ev, &reg) {
            if !diags.contains(&d) {
                diags.push(d);
            }
        }
    }
    let mut errors = 0;
    for d in &diags {
        writeln!(out, "{}", d.render(&file))?;
        if d.severity == Severity::Error {
            errors += 1;
        }
    }
    if errors > 0 {
        return Err(CliError::Usage(format!("{file}: {errors} error(s)")));
    }
    writeln!(out, "{count} events")?;
    Ok(0)
}

fn column<'a>(names: &[String], cols: &'a [Vec<f64>], name: &str) -> Option<&'a [f64]> {
    names.iter().position(|n| n == name).map(|i| cols[i].as_slice())
}

pub(crate) fn fit(model: &str, paths: &[PathBuf], offset: Option<f64>, out: &mut dyn Write) -> Result<i32, CliError> {
    let load = |p: &PathBuf| read_columns(p).map_err(CliError::Usage);
    let need = |names: &[String], n: usize, p: &PathBuf| {
        if names.len() < n {
            Err(CliError::Usage(format!("{}: expected at least {n} columns", p.display())))
        } else {
            Ok(())
        }
    };
    let bad = |e: crate::fitkit::FitError| CliError::Usage(e.to_string());
    let result = match model {
        "cosine" | "exponential" => {
            if paths.len() != 1 {
                return Err(CliError::Usage(format!("{model} takes one CSV file")));
            }
            let (names, cols) = load(&paths[0])?;
            need(&names, 2, &paths[0])?;
            let opts = FitOptions {
                sigma: column(&names, &cols, "sigma").map(<[f64]>::to_vec),
                ..Default::default()
            };
            if model == "cosine" {
                fit_cosine(&cols[0], &cols[1], None, &opts).map_err(bad)?
            } else {
                fit_exponential(&cols[0], &cols[1], offset, &opts).map_err(bad)?
            }
        }
        "rates" => {
            let (t, total, up) = match paths {
                [one] => {
                    let (names, cols) = load(one)?;
                    need(&names, 3, one)?;
                    (cols[0].clone(), cols[1].clone(), cols[2].clone())
                }
                [a, b] => {
                    let (na, ca) = load(a)?;
                    let (nb, cb) = load(b)?;
                    need(&na, 2, a)?;
                    need(&nb, 2, b)?;
                    if ca[0] != cb[0] {
                        return Err(CliError::Usage("total and up curves need the same duration grid".into()));
                    }
                    (ca[0].clone(), ca[1].clone(), cb[1].clone())
                }
                _ => return Err(CliError::Usage("rates takes one or two CSV files".into())),
            };
            fit_rate_params(&t, &total, &up, &FitOptions::default()).map_err(bad)?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown model `{other}`; available: cosine, exponential, rates"
            )))
        }
    };
    let json = serde_json::to_string_pretty(&result).map_err(|e| CliError::Runtime(e.to_string()))?;
    writeln!(out, "{json}")?;
    Ok(if result.converged { 0 } else { 1 })
}

pub(crate) fn sweep(c: &RunConfig, s: &SweepConfig) -> Result<Vec<(f64, f64)>, CliError> {
    s.values
        .par_iter()
        .map(|&v| {
            let mut point = c.clone();
            point
                .apply(s.parameter, v)
                .map_err(|m| CliError::Usage(format!("sweep {} = {v}: {m}", s.parameter.name())))?;
            let o = run_experiment(&s.experiment, &point)?;
            let y = o.summary.get(&s.metric).copied().ok_or_else(|| {
                let keys: Vec<_> = o.summary.keys().cloned().collect();
                CliError::Usage(format!(
                    "experiment `{}` has no metric `{}`; available: {}",
                    s.experiment,
                    s.metric,
                    keys.join(", ")
                ))
            })?;
            Ok((v, y))
        })
        .collect()
}
