//! File and console output: CSV tables (comma-separated, header row, LF
//! endings, 17 significant digits) and pretty JSON reports.

use std::fs;
use std::io::Write;
use std::path::Path;

use floq_core::{Error, Result};

use crate::commands::{ConstantsReport, SweepResult};
use crate::config::fmt_g17;

pub fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Usage(format!("serialize: {e}")))?;
    fs::write(path, text + "\n").map_err(|e| Error::Usage(format!("write {path:?}: {e}")))
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    out.push_str("omega,stage,status,witness_k,witness_n,witness_m,distance,psi\n");
    for row in &result.rows {
        let opt_i = |v: Option<i64>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_u = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_f = |v: Option<f64>| v.map(fmt_g17).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_g17(row.omega),
            row.stage,
            row.status,
            opt_i(row.witness_k),
            opt_u(row.witness_n),
            opt_u(row.witness_m),
            opt_f(row.distance),
            opt_f(row.psi),
        ));
    }
    out
}

pub fn write_sweep_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let mut f =
        fs::File::create(path).map_err(|e| Error::Usage(format!("create {path:?}: {e}")))?;
    f.write_all(sweep_csv(result).as_bytes())
        .map_err(|e| Error::Usage(format!("write {path:?}: {e}")))
}

pub fn print_constants(rep: &ConstantsReport) {
    println!("J                = {}", fmt_g17(rep.j));
    println!("Delta_0          = {}", fmt_g17(rep.delta0));
    println!("|Omega_0|        = {}", fmt_g17(rep.omega0_measure));
    println!("q                = {}", fmt_g17(rep.q));
    println!(
        "(alpha, r, sigma) = ({}, {}, {})",
        rep.alpha, rep.r, rep.sigma
    );
    match rep.eps_v {
        Some(e) => println!("eps_V            = {}", fmt_g17(e)),
        None => println!("eps_V            = (model supplies envelopes only)"),
    }
    println!("eps_star         = {}", fmt_g17(rep.eps_star));
    println!(
        "Delta_sigma(J)   = {} (last shell {})",
        fmt_g17(rep.delta_sigma),
        fmt_g17(rep.delta_sigma_tail)
    );
    println!("delta_star       = {}", fmt_g17(rep.delta_star));
    println!("admissible budget = {}", fmt_g17(rep.admissible_budget));
    if let Some(ok) = rep.eps_v_admissible {
        println!("eps_V admissible  = {ok}");
    }
    println!(
        "smallness: eps_V*B = {} (<= ln2/3: {}), eps_V*A*phi(3C) check: {}, e^(dB)+A phi(dC) d^2 <= d: {}",
        fmt_g17(rep.small_b),
        rep.smallness_b_ok,
        rep.smallness_a_ok,
        rep.abd_ok
    );
    println!(
        "series/closed-form agreement: {:.3e} relative",
        rep.series_agreement
    );
}
