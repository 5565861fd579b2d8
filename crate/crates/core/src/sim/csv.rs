use std::fmt::Write as _;
use std::path::Path;

use crate::error::{IsacError, Result};

use super::SweepResult;

pub const CSV_HEADER: &str =
    "sweep_var,sweep_value,scheme,realization,wc_illum_dbm,min_sinr_db,max_tgt_noise_dbm,pris_dbm,thm1_bound_dbm,iterations,status";

/// Fixed six-decimal formatting; non-finite values print as `NaN`, `inf`
/// or `-inf`.
fn num(x: f64) -> String {
    format!("{x:.6}")
}

pub fn to_csv_string(rows: &[SweepResult]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.sweep_var,
            num(r.sweep_value),
            r.scheme,
            r.realization,
            num(r.wc_illum_dbm),
            num(r.min_sinr_db),
            num(r.max_tgt_noise_dbm),
            num(r.pris_dbm),
            num(r.thm1_bound_dbm),
            r.iterations,
            r.status
        )
        .unwrap();
    }
    out
}

pub fn emit_csv(rows: &[SweepResult], path: &Path) -> Result<()> {
    std::fs::write(path, to_csv_string(rows)).map_err(|e| IsacError::io(path, e))
}
