use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::config::{snapshot, RunConfig, SweepConfig};
use super::run::Outcome;
use super::CliError;
use crate::experiments::SweepResult;

/// SHA-256 of the canonical JSON parameter snapshot.
pub fn params_hash(c: &RunConfig) -> String {
    let json = serde_json::to_string(&snapshot(c)).unwrap_or_default();
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Shortest round-trip formatting.
fn num(v: f64) -> String {
    format!("{v}")
}

pub(crate) fn fmt_value(v: f64) -> String {
    if v != 0.0 && v.is_finite() && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.4e}")
    } else {
        format!("{v:.4}")
    }
}

fn runtime(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", path.display()))
}

/// Writes `#` comment lines, then `x,y[,y_err]` rows.
pub fn write_csv(path: &Path, comments: &[String], r: &SweepResult) -> Result<(), CliError> {
    let file = File::create(path).map_err(runtime(path))?;
    let mut w = BufWriter::new(file);
    for c in comments {
        writeln!(w, "# {c}").map_err(runtime(path))?;
    }
    let mut csv = csv::Writer::from_writer(w);
    let map = |e: csv::Error| CliError::Runtime(format!("{}: {e}", path.display()));
    match &r.y_err {
        Some(err) => {
            csv.write_record(["x", "y", "y_err"]).map_err(map)?;
            for ((x, y), e) in r.x.iter().zip(&r.y).zip(err) {
                csv.write_record([num(*x), num(*y), num(*e)]).map_err(map)?;
            }
        }
        None => {
            csv.write_record(["x", "y"]).map_err(map)?;
            for (x, y) in r.x.iter().zip(&r.y) {
                csv.write_record([num(*x), num(*y)]).map_err(map)?;
            }
        }
    }
    csv.flush().map_err(runtime(path))
}

fn header(kind: &str, c: &RunConfig, seed: Option<u64>) -> Vec<String> {
    vec![
        format!("nvmem {kind}"),
        format!("params_sha256: {}", params_hash(c)),
        format!("seed: {}", seed.map_or("none".to_string(), |s| s.to_string())),
    ]
}

fn write_json(path: &Path, v: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(runtime(path))
}

pub(crate) fn write_outcome(dir: &Path, o: &Outcome, c: &RunConfig) -> Result<(), CliError> {
    let mut files = Vec::new();
    for (stem, r) in &o.curves {
        let path = dir.join(format!("{stem}.csv"));
        let mut comments = header(&o.name, c, o.seed);
        comments.insert(1, format!("curve: {stem}"));
        write_csv(&path, &comments, r)?;
        files.push(format!("{stem}.csv"));
    }
    let meta = serde_json::json!({
        "experiment": o.name,
        "seed": o.seed,
        "params_sha256": params_hash(c),
        "params": snapshot(c),
        "files": files,
        "summary": o.summary,
        "fits": o.curves.iter().map(|(s, r)| (s.clone(), r.metadata.fits.clone())).collect::<std::collections::BTreeMap<_, _>>(),
        "details": o.extra,
    });
    write_json(&dir.join(format!("{}.meta.json", o.name)), &meta)
}

pub(crate) fn write_sweep(
    dir: &Path,
    c: &RunConfig,
    s: &SweepConfig,
    rows: &[(f64, f64)],
) -> Result<PathBuf, CliError> {
    let stem = format!("sweep_{}_{}", s.experiment, s.parameter.name());
    let path = dir.join(format!("{stem}.csv"));
    let mut comments = header("sweep", c, c.seed);
    comments.insert(1, format!("experiment: {} parameter: {} metric: {}", s.experiment, s.parameter.name(), s.metric));
    let r = SweepResult {
        name: stem.clone(),
        x: rows.iter().map(|r| r.0).collect(),
        y: rows.iter().map(|r| r.1).collect(),
        y_err: None,
        metadata: Default::default(),
    };
    write_csv(&path, &comments, &r)?;
    let meta = serde_json::json!({
        "experiment": s.experiment,
        "parameter": s.parameter.name(),
        "metric": s.metric,
        "seed": c.seed,
        "params_sha256": params_hash(c),
        "params": snapshot(c),
        "files": [format!("{stem}.csv")],
    });
    write_json(&dir.join(format!("{stem}.meta.json")), &meta)?;
    Ok(path)
}

/// Reads a `#`-commented CSV with a header row into numeric columns.
pub fn read_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let names: Vec<String> = rdr
        .headers()
        .map_err(|e| format!("{}: {e}", path.display()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut cols = vec![Vec::new(); names.len()];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| format!("{}: {e}", path.display()))?;
        for (k, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| format!("{}: row {}: `{field}` is not a number", path.display(), i + 1))?;
            cols[k].push(v);
        }
    }
    Ok((names, cols))
}
