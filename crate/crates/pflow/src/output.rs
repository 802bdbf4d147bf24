//! Table formats. Floats are written as `{:.12e}` so that CSV output is
//! byte-identical across runs of the same configuration.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use pflow_core::fe::RateTable;
use pflow_core::harness::ConvergenceTable;
use serde::Serialize;

pub const STUDY_HEADER: [&str; 7] = ["level", "h", "kappa", "err_max_l2", "err_f_sq", "newton_total", "notes"];
pub const INTERP_HEADER: [&str; 4] = ["level", "h", "value", "slope_to_prev"];

pub fn sci(x: f64) -> String {
    format!("{x:.12e}")
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("writing to memory cannot fail")
}

pub fn study_csv(table: &ConvergenceTable) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(STUDY_HEADER).expect("in-memory write");
    for r in &table.rows {
        w.write_record([
            r.plan.level.to_string(),
            sci(r.plan.h),
            sci(r.plan.kappa),
            sci(r.err_max_l2),
            sci(r.err_f_sq),
            r.newton_total.to_string(),
            r.notes.clone(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

pub fn rate_csv(table: &RateTable) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(INTERP_HEADER).expect("in-memory write");
    for r in &table.rows {
        w.write_record([
            r.level.to_string(),
            sci(r.h),
            sci(r.value),
            r.slope_to_prev.map(sci).unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

/// `{config, slopes, seed, runtime_seconds, pass}`.
pub fn sidecar<C: Serialize, S: Serialize>(
    config: &C,
    slopes: &S,
    seed: u64,
    runtime_seconds: f64,
    pass: bool,
) -> serde_json::Value {
    serde_json::json!({
        "config": config,
        "slopes": slopes,
        "seed": seed,
        "runtime_seconds": runtime_seconds,
        "pass": pass,
    })
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

/// Writes `bytes` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, bytes),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    bytes
}
