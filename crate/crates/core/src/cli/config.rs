//! TOML run configuration with unit-suffixed values.
//!
//! ```toml
//! seed = 7
//! ensemble = 1000
//!
//! [register]
//! field = "-65G"
//! t1_e = "3.3ms"
//!
//! [rates]
//! inv_alpha = "0.17us"
//! inv_beta = "0.92us"
//! inv_gamma = "1.6us"
//!
//! [rabi]
//! grid = { from = "0ns", to = "500ns", steps = 101 }
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use super::units::{parse_quantity, Dimension};
use crate::dissipation::RateParams;
use crate::experiments::{LossBudget, Setup};
use crate::spin::RegisterParams;

type Q = Spanned<String>;

/// A configuration problem located in the source file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub file: String,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: error: {}", self.file, self.line, self.col, self.message)
    }
}

impl std::error::Error for ConfigError {}

struct Source<'a> {
    file: &'a str,
    text: &'a str,
}

impl Source<'_> {
    fn error(&self, span: Option<Range<usize>>, message: impl Into<String>) -> ConfigError {
        let at = span.map_or(0, |r| r.start).min(self.text.len());
        let before = &self.text[..at];
        let line = before.matches('\n').count() + 1;
        let col = before.rfind('\n').map_or(at, |i| at - i - 1) + 1;
        ConfigError {
            file: self.file.to_string(),
            line,
            col,
            message: message.into(),
        }
    }

    fn quantity(&self, q: &Q, dim: Dimension) -> Result<f64, ConfigError> {
        parse_quantity(q.get_ref(), dim).map_err(|m| self.error(Some(q.span()), m))
    }

    fn positive(&self, q: &Q, dim: Dimension) -> Result<f64, ConfigError> {
        let v = self.quantity(q, dim)?;
        if !(v > 0.0) {
            return Err(self.error(Some(q.span()), format!("`{}` must be positive", q.get_ref())));
        }
        Ok(v)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    from: Q,
    to: Q,
    steps: Spanned<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegister {
    zero_field: Option<Q>,
    field: Option<Q>,
    gamma_e: Option<Q>,
    gamma_n: Option<Q>,
    a_par: Option<Q>,
    a_perp: Option<Q>,
    t1_e: Option<Q>,
    t2star_n: Option<Q>,
    t2_pure_c: Option<Q>,
    t2star_e: Option<Q>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRateRow {
    power: f64,
    inv_alpha: Q,
    inv_beta: Q,
    inv_gamma: Q,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRates {
    inv_alpha: Option<Q>,
    inv_beta: Option<Q>,
    inv_gamma: Option<Q>,
    power: Option<Spanned<f64>>,
    #[serde(default)]
    table: Vec<RawRateRow>,
    table_file: Option<Q>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrive {
    mw_rabi: Option<Q>,
    rf_rabi: Option<Q>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInit {
    laser: Option<Q>,
    cycle_laser: Option<Q>,
    cycles: Option<u32>,
    coherence_threshold: Option<Q>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRabi {
    rabi: Option<Q>,
    grid: Option<RawGrid>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFid {
    detuning: Option<Q>,
    grid: Option<RawGrid>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTomography {
    grid: Option<RawGrid>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPurification {
    cycles: Option<u32>,
    laser: Option<Q>,
    scan: Option<RawGrid>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransfer {
    detuning: Option<Q>,
    grid: Option<RawGrid>,
    window_centre: Option<Q>,
    budget: Option<Spanned<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCpmg {
    pulses: Option<Vec<u32>>,
    grid: Option<RawGrid>,
    nuclear_noise: Option<bool>,
    flips: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDd {
    tau: Option<Q>,
    cycles: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    experiment: Spanned<String>,
    parameter: Spanned<String>,
    metric: Spanned<String>,
    /// A list of quantities, or `{ from, to, steps }`.
    values: Spanned<toml::Value>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    ensemble: Option<Spanned<usize>>,
    out: Option<String>,
    #[serde(default)]
    register: RawRegister,
    #[serde(default)]
    rates: RawRates,
    #[serde(default)]
    drive: RawDrive,
    #[serde(default)]
    init: RawInit,
    #[serde(default)]
    rabi: RawRabi,
    #[serde(default)]
    fid: RawFid,
    #[serde(default)]
    init_tomography: RawTomography,
    #[serde(default)]
    purification: RawPurification,
    #[serde(default)]
    transfer: RawTransfer,
    #[serde(default)]
    cpmg: RawCpmg,
    #[serde(default)]
    extended_dd: RawDd,
    sweep: Option<RawSweep>,
}

/// Laser power → pumping rates, interpolated linearly between rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateTable(pub Vec<(f64, RateParams)>);

impl RateTable {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn at(&self, power: f64) -> Option<RateParams> {
        let rows = &self.0;
        let (first, last) = (rows.first()?, rows.last()?);
        if power <= first.0 {
            return Some(first.1);
        }
        if power >= last.0 {
            return Some(last.1);
        }
        let i = rows.partition_point(|r| r.0 <= power);
        let (p0, r0) = rows[i - 1];
        let (p1, r1) = rows[i];
        let w = (power - p0) / (p1 - p0);
        let mix = |a: f64, b: f64| a + w * (b - a);
        Some(RateParams {
            alpha: mix(r0.alpha, r1.alpha),
            beta: mix(r0.beta, r1.beta),
            gamma: mix(r0.gamma, r1.gamma),
        })
    }
}

/// Parameters that `sweep` can scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    LaserPower,
    CycleLaser,
    Cycles,
    Field,
    T1e,
    T2PureC,
    T2starE,
    T2starN,
    MwRabi,
    RfRabi,
}

impl SweepParameter {
    pub const ALL: [(&'static str, SweepParameter); 10] = [
        ("laser_power", SweepParameter::LaserPower),
        ("cycle_laser", SweepParameter::CycleLaser),
        ("cycles", SweepParameter::Cycles),
        ("field", SweepParameter::Field),
        ("t1_e", SweepParameter::T1e),
        ("t2_pure_c", SweepParameter::T2PureC),
        ("t2star_e", SweepParameter::T2starE),
        ("t2star_n", SweepParameter::T2starN),
        ("mw_rabi", SweepParameter::MwRabi),
        ("rf_rabi", SweepParameter::RfRabi),
    ];

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(_, p)| *p == self).map(|(n, _)| *n).unwrap()
    }

    fn dimension(self) -> Dimension {
        use SweepParameter::*;
        match self {
            LaserPower | Cycles => Dimension::Dimensionless,
            CycleLaser | T1e | T2PureC | T2starE | T2starN => Dimension::Time,
            Field => Dimension::Field,
            MwRabi | RfRabi => Dimension::Frequency,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub experiment: String,
    pub parameter: SweepParameter,
    pub metric: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub setup: Setup,
    /// Recalibrate the secular hyperfine coupling after register changes.
    pub calibrate: bool,
    pub base_rates: RateParams,
    pub rate_table: RateTable,
    pub laser_power: f64,
    pub seed: Option<u64>,
    pub ensemble: usize,
    pub out: Option<PathBuf>,
    pub rabi: f64,
    pub rabi_grid: Vec<f64>,
    pub fid_detuning: f64,
    pub fid_grid: Vec<f64>,
    pub tomography_grid: Vec<f64>,
    pub purification_cycles: u32,
    pub purification_laser: f64,
    pub purification_scan: Option<Vec<f64>>,
    pub transfer_detuning: f64,
    pub transfer_grid: Vec<f64>,
    pub transfer_centre: f64,
    pub budget: LossBudget,
    pub cpmg_pulses: Vec<u32>,
    pub cpmg_grid: Vec<f64>,
    pub nuclear_noise: bool,
    pub flips: bool,
    pub dd_tau: Option<f64>,
    pub dd_cycles: u32,
    pub sweep: Option<SweepConfig>,
}

fn linspace(from: f64, to: f64, steps: u32) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        n => (0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        let setup = Setup::default();
        RunConfig {
            calibrate: true,
            base_rates: setup.rates,
            rate_table: RateTable::default(),
            laser_power: 1.0,
            seed: None,
            ensemble: 1000,
            out: None,
            rabi: setup.rf_rabi,
            rabi_grid: linspace(0.0, 500e-9, 101),
            fid_detuning: 150e3,
            fid_grid: linspace(0.0, 40e-6, 401),
            tomography_grid: linspace(0.0, 3e-6, 61),
            purification_cycles: setup.cycles,
            purification_laser: setup.cycle_laser,
            purification_scan: None,
            transfer_detuning: 150e3,
            transfer_grid: linspace(0.0, 30e-6, 601),
            transfer_centre: 20e-6,
            budget: LossBudget::preset(),
            cpmg_pulses: vec![1, 2, 4],
            cpmg_grid: linspace(0.0, 10e-3, 21),
            nuclear_noise: true,
            flips: true,
            dd_tau: None,
            dd_cycles: 40,
            sweep: None,
            setup,
        }
    }
}

impl RunConfig {
    /// Pumping rates at the configured laser power: from the table when
    /// present, otherwise the base rates scaled linearly.
    pub fn rates_at(&self, power: f64) -> RateParams {
        self.rate_table.at(power).unwrap_or(RateParams {
            alpha: self.base_rates.alpha * power,
            beta: self.base_rates.beta * power,
            gamma: self.base_rates.gamma * power,
        })
    }

    /// Re-derives the dependent parts of `setup` (rates, calibration).
    pub fn finish(&mut self) -> Result<(), String> {
        self.setup.rates = self.rates_at(self.laser_power);
        if self.calibrate {
            self.setup.register = self.setup.register.calibrated().map_err(|e| e.to_string())?;
        }
        self.setup.register.validate().map_err(|e| e.to_string())
    }

    pub fn apply(&mut self, p: SweepParameter, v: f64) -> Result<(), String> {
        use SweepParameter::*;
        let r = &mut self.setup.register;
        match p {
            LaserPower => self.laser_power = v,
            CycleLaser => {
                self.setup.cycle_laser = v;
                self.purification_laser = v;
            }
            Cycles => {
                if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                    return Err(format!("cycle count {v} is not a non-negative integer"));
                }
                self.setup.cycles = v as u32;
                self.purification_cycles = v as u32;
            }
            Field => r.field = v,
            T1e => r.t1_e = v,
            T2PureC => r.t2_pure_c = v,
            T2starE => r.t2star_e = v,
            T2starN => r.t2star_n = v,
            MwRabi => self.setup.mw_rabi = v,
            RfRabi => {
                self.setup.rf_rabi = v;
                self.rabi = v;
            }
        }
        self.finish()
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let file = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            file: file.clone(),
            line: 0,
            col: 0,
            message: format!("cannot read config: {e}"),
        })?;
        Self::parse(&text, &file, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn parse(text: &str, file: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let src = Source { file, text };
        let raw: RawConfig = toml::from_str(text).map_err(|e| src.error(e.span(), e.message().to_string()))?;
        let mut c = RunConfig {
            calibrate: raw.register.a_par.is_none(),
            ..Default::default()
        };
        {
            let r = &raw.register;
            let p = &mut c.setup.register;
            *p = RegisterParams::uncalibrated();
            let set = |slot: &mut f64, q: &Option<Q>, dim| -> Result<(), ConfigError> {
                if let Some(q) = q {
                    *slot = src.quantity(q, dim)?;
                }
                Ok(())
            };
            set(&mut p.zero_field, &r.zero_field, Dimension::Frequency)?;
            set(&mut p.field, &r.field, Dimension::Field)?;
            set(&mut p.a_par, &r.a_par, Dimension::Frequency)?;
            set(&mut p.a_perp, &r.a_perp, Dimension::Frequency)?;
            set(&mut p.t1_e, &r.t1_e, Dimension::Time)?;
            set(&mut p.t2star_n, &r.t2star_n, Dimension::Time)?;
            set(&mut p.t2_pure_c, &r.t2_pure_c, Dimension::Time)?;
            set(&mut p.t2star_e, &r.t2star_e, Dimension::Time)?;
            // Gyromagnetic ratios in Hz/T.
            for (slot, q) in [(&mut p.gamma_e, &r.gamma_e), (&mut p.gamma_n, &r.gamma_n)] {
                if let Some(q) = q {
                    *slot = src.quantity(q, Dimension::Dimensionless)?;
                }
            }
            if r.a_par.is_none() && r.a_perp.is_some() {
                p.a_par = p.a_perp;
            }
            if let Err(e) = p.validate() {
                return Err(src.error(None, format!("[register]: {e}")));
            }
        }

        let rr = &raw.rates;
        let lifetime = |q: &Q| -> Result<f64, ConfigError> {
            let v = src.quantity(q, Dimension::Time)?;
            if !(v > 0.0) {
                return Err(src.error(Some(q.span()), "inverse rates must be positive times"));
            }
            Ok(1.0 / v)
        };
        if let Some(q) = &rr.inv_alpha {
            c.base_rates.alpha = lifetime(q)?;
        }
        if let Some(q) = &rr.inv_beta {
            c.base_rates.beta = lifetime(q)?;
        }
        if let Some(q) = &rr.inv_gamma {
            c.base_rates.gamma = lifetime(q)?;
        }
        let mut table = Vec::new();
        for row in &rr.table {
            let rates = RateParams {
                alpha: lifetime(&row.inv_alpha)?,
                beta: lifetime(&row.inv_beta)?,
                gamma: lifetime(&row.inv_gamma)?,
            };
            table.push((row.power, rates));
        }
        if let Some(q) = &rr.table_file {
            let path = base_dir.join(q.get_ref());
            let rows = read_rate_table(&path).map_err(|m| src.error(Some(q.span()), m))?;
            table.extend(rows);
        }
        table.sort_by(|a, b| a.0.total_cmp(&b.0));
        if table.windows(2).any(|w| w[0].0 == w[1].0) || table.iter().any(|r| !(r.0 >= 0.0)) {
            return Err(src.error(None, "rate table powers must be distinct and non-negative"));
        }
        c.rate_table = RateTable(table);
        if let Some(p) = &rr.power {
            if !(*p.get_ref() >= 0.0) {
                return Err(src.error(Some(p.span()), "laser power must be non-negative"));
            }
            c.laser_power = *p.get_ref();
        }

        if let Some(q) = &raw.drive.mw_rabi {
            c.setup.mw_rabi = src.positive(q, Dimension::Frequency)?;
        }
        if let Some(q) = &raw.drive.rf_rabi {
            c.setup.rf_rabi = src.positive(q, Dimension::Frequency)?;
        }
        c.rabi = c.setup.rf_rabi;

        let init = &raw.init;
        if let Some(q) = &init.laser {
            c.setup.init_laser = src.quantity(q, Dimension::Time)?;
        }
        if let Some(q) = &init.cycle_laser {
            c.setup.cycle_laser = src.quantity(q, Dimension::Time)?;
        }
        if let Some(n) = init.cycles {
            c.setup.cycles = n;
        }
        if let Some(q) = &init.coherence_threshold {
            c.setup.laser_coherence_threshold = src.quantity(q, Dimension::Time)?;
        }
        c.purification_cycles = c.setup.cycles;
        c.purification_laser = c.setup.cycle_laser;

        let grid = |g: &RawGrid, dim| -> Result<Vec<f64>, ConfigError> {
            let from = src.quantity(&g.from, dim)?;
            let to = src.quantity(&g.to, dim)?;
            if from < 0.0 || to < from || !to.is_finite() {
                return Err(src.error(Some(g.from.span()), "grid needs 0 ≤ from ≤ to < inf"));
            }
            Ok(linspace(from, to, *g.steps.get_ref()))
        };
        if let Some(q) = &raw.rabi.rabi {
            c.rabi = src.quantity(q, Dimension::Frequency)?;
        }
        if let Some(g) = &raw.rabi.grid {
            c.rabi_grid = grid(g, Dimension::Time)?;
        }
        if let Some(q) = &raw.fid.detuning {
            c.fid_detuning = src.quantity(q, Dimension::Frequency)?;
        }
        if let Some(g) = &raw.fid.grid {
            c.fid_grid = grid(g, Dimension::Time)?;
        }
        if let Some(g) = &raw.init_tomography.grid {
            c.tomography_grid = grid(g, Dimension::Time)?;
        }
        let pur = &raw.purification;
        if let Some(n) = pur.cycles {
            c.purification_cycles = n;
        }
        if let Some(q) = &pur.laser {
            c.purification_laser = src.quantity(q, Dimension::Time)?;
        }
        if let Some(g) = &pur.scan {
            c.purification_scan = Some(grid(g, Dimension::Time)?);
        }
        let tr = &raw.transfer;
        if let Some(q) = &tr.detuning {
            c.transfer_detuning = src.positive(q, Dimension::Frequency)?;
        }
        if let Some(g) = &tr.grid {
            c.transfer_grid = grid(g, Dimension::Time)?;
        }
        if let Some(q) = &tr.window_centre {
            c.transfer_centre = src.positive(q, Dimension::Time)?;
        }
        if let Some(b) = &tr.budget {
            c.budget = match b.get_ref().as_str() {
                "preset" => LossBudget::preset(),
                "none" => LossBudget::none(),
                other => {
                    return Err(src.error(Some(b.span()), format!("unknown loss budget `{other}` (preset, none)")))
                }
            };
        }
        let cp = &raw.cpmg;
        if let Some(p) = &cp.pulses {
            if p.contains(&0) {
                return Err(src.error(None, "[cpmg] pulse counts must be ≥ 1"));
            }
            c.cpmg_pulses = p.clone();
        }
        if let Some(g) = &cp.grid {
            c.cpmg_grid = grid(g, Dimension::Time)?;
        }
        c.nuclear_noise = cp.nuclear_noise.unwrap_or(true);
        c.flips = cp.flips.unwrap_or(true);
        if let Some(q) = &raw.extended_dd.tau {
            c.dd_tau = Some(src.positive(q, Dimension::Time)?);
        }
        if let Some(n) = raw.extended_dd.cycles {
            c.dd_cycles = n;
        }

        c.seed = raw.seed;
        if let Some(e) = &raw.ensemble {
            if *e.get_ref() < 2 {
                return Err(src.error(Some(e.span()), "ensemble needs at least two trajectories"));
            }
            c.ensemble = *e.get_ref();
        }
        c.out = raw.out.map(|o| base_dir.join(o));

        if let Some(sw) = &raw.sweep {
            let name = sw.parameter.get_ref();
            let parameter = SweepParameter::ALL
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, p)| *p)
                .ok_or_else(|| {
                    let names: Vec<_> = SweepParameter::ALL.iter().map(|(n, _)| *n).collect();
                    src.error(
                        Some(sw.parameter.span()),
                        format!("unknown sweep parameter `{name}` (expected one of {})", names.join(", ")),
                    )
                })?;
            let dim = parameter.dimension();
            let span = Some(sw.values.span());
            let values = match sw.values.get_ref() {
                toml::Value::Array(items) => items
                    .iter()
                    .map(|v| match v {
                        toml::Value::Integer(i) if dim == Dimension::Dimensionless => Ok(*i as f64),
                        toml::Value::Float(f) if dim == Dimension::Dimensionless => Ok(*f),
                        toml::Value::String(t) => parse_quantity(t, dim).map_err(|m| src.error(span.clone(), m)),
                        other => Err(src.error(span.clone(), format!("`{other}`: expected a quoted {dim}"))),
                    })
                    .collect::<Result<_, _>>()?,
                toml::Value::Table(t) => {
                    let q = |k: &str| match t.get(k) {
                        Some(toml::Value::String(v)) => parse_quantity(v, dim).map_err(|m| src.error(span.clone(), m)),
                        Some(toml::Value::Integer(i)) if dim == Dimension::Dimensionless => Ok(*i as f64),
                        Some(toml::Value::Float(f)) if dim == Dimension::Dimensionless => Ok(*f),
                        _ => Err(src.error(span.clone(), format!("sweep range needs `{k}`"))),
                    };
                    let steps = match t.get("steps") {
                        Some(toml::Value::Integer(n)) if (0..=u32::MAX as i64).contains(n) => *n as u32,
                        _ => return Err(src.error(span, "sweep range needs a non-negative integer `steps`")),
                    };
                    let (from, to) = (q("from")?, q("to")?);
                    if to < from {
                        return Err(src.error(span, "sweep range needs from ≤ to"));
                    }
                    linspace(from, to, steps)
                }
                _ => return Err(src.error(span, "`values` must be a list or { from, to, steps }")),
            };
            c.sweep = Some(SweepConfig {
                experiment: sw.experiment.get_ref().clone(),
                parameter,
                metric: sw.metric.get_ref().clone(),
                values,
            });
            if !super::EXPERIMENTS.contains(&sw.experiment.get_ref().as_str()) {
                return Err(src.error(
                    Some(sw.experiment.span()),
                    format!("unknown experiment `{}`", sw.experiment.get_ref()),
                ));
            }
        }

        c.finish().map_err(|m| src.error(None, m))?;
        Ok(c)
    }
}

/// CSV with header `power,alpha,beta,gamma` (rates in 1/s).
fn read_rate_table(path: &Path) -> Result<Vec<(f64, RateParams)>, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("rate table {}: {e}", path.display()))?;
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    let want = ["power", "alpha", "beta", "gamma"];
    if headers.iter().collect::<Vec<_>>() != want {
        return Err(format!("rate table {} needs columns {}", path.display(), want.join(",")));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let v: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("rate table {} row {}: {e}", path.display(), i + 2))?;
        let r = RateParams::new(v[1], v[2], v[3]).map_err(|e| e.to_string())?;
        out.push((v[0], r));
    }
    Ok(out)
}

/// Numeric parameter snapshot for hashing and metadata.
pub fn snapshot(c: &RunConfig) -> BTreeMap<String, serde_json::Value> {
    let mut m = BTreeMap::new();
    m.insert("setup".into(), serde_json::to_value(&c.setup).unwrap_or_default());
    m.insert("laser_power".into(), c.laser_power.into());
    m.insert("ensemble".into(), c.ensemble.into());
    m.insert("seed".into(), c.seed.into());
    m
}
