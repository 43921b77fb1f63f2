//! File emission: CSV tables and JSON summaries, written atomically with a
//! frozen column schema and 17 significant digits so the outputs reproduce
//! bit-for-bit under IEEE-754 double semantics.

use crate::fields::RadialFieldTable;
use crate::functionals::FunctionalSet;
use crate::solver::RadialGreen;
use crate::verify::VerificationReport;
use serde::Serialize;
use std::io;
use std::path::{Path, PathBuf};

/// 17 significant digits, the shortest representation that survives a
/// parse round-trip for every double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write via a temp file in the same directory and rename into place.
pub fn atomic_write(path: &Path, contents: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

/// Summary block of one solve, emitted as `solve.json`.
#[derive(Debug, Serialize)]
pub struct SolveSummary {
    pub schema_version: u32,
    pub family: String,
    pub n: u32,
    pub k: f64,
    pub k_star: f64,
    pub k_exceeds_admissible: bool,
    pub normalization_c: f64,
    pub normalization_spread: f64,
    pub flux_residual: f64,
    pub m: f64,
    pub volume: f64,
    pub diameter: f64,
    pub node_count: usize,
    pub rtol: f64,
    pub comparison_gauge: bool,
}

impl SolveSummary {
    pub fn new(green: &RadialGreen) -> Self {
        let profile = green.profile();
        Self {
            schema_version: 1,
            family: profile.family.label(),
            n: green.n,
            k: green.k,
            k_star: green.diagnostics.k_star,
            k_exceeds_admissible: green.diagnostics.k_exceeds_admissible,
            normalization_c: green.normalization_c,
            normalization_spread: green.diagnostics.normalization_spread,
            flux_residual: green.diagnostics.flux_residual,
            m: green.m,
            volume: profile.volume(),
            diameter: profile.diameter(),
            node_count: green.diagnostics.node_count,
            rtol: green.diagnostics.rtol,
            comparison_gauge: green.diagnostics.comparison_gauge,
        }
    }
}

/// `green.csv`: the solved profile at the grid nodes.
/// Columns: `rho,f,u,u_prime,b,b_prime,v_sq`.
pub fn green_csv(table: &RadialFieldTable) -> String {
    let green = table.green();
    let mut out = String::from("rho,f,u,u_prime,b,b_prime,v_sq\n");
    for &rho in green.grid() {
        let jet = table.jet(rho);
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(rho),
            fmt_f64(jet.f),
            fmt_f64(jet.u),
            fmt_f64(jet.up),
            fmt_f64(green.b(rho)),
            fmt_f64(green.b_prime(rho)),
            fmt_f64(jet.v_sq),
        ));
    }
    out
}

fn beta_tag(beta: f64) -> String {
    format!("{beta:.4}")
}

/// `functionals.csv`: the named series with their closed-form derivative
/// columns. β-dependent columns carry an `@β` suffix.
pub fn functionals_csv(set: &FunctionalSet) -> String {
    let mut header: Vec<String> =
        ["r", "A", "V", "V_infty"].iter().map(|s| s.to_string()).collect();
    for &beta in &set.betas {
        header.push(format!("A_beta@{}", beta_tag(beta)));
        header.push(format!("V_beta@{}", beta_tag(beta)));
    }
    header.extend(
        [
            "dA_numeric",
            "dA_formula",
            "dA_scaled_formula",
            "dAmV_formula",
            "dV_relation",
            "dVinf_relation",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    for &beta in &set.betas {
        header.push(format!("dAbeta_formula@{}", beta_tag(beta)));
        header.push(format!("dVbeta_relation@{}", beta_tag(beta)));
    }
    let mut out = header.join(",");
    out.push('\n');

    let d_a_numeric = crate::functionals::numeric_derivative(&set.r, &set.a);
    for i in 0..set.r.len() {
        let mut row = vec![
            fmt_f64(set.r[i]),
            fmt_f64(set.a[i]),
            fmt_f64(set.v[i]),
            fmt_f64(set.v_infty[i]),
        ];
        for bi in 0..set.betas.len() {
            row.push(fmt_f64(set.a_beta[bi][i]));
            row.push(fmt_f64(set.v_beta[bi][i]));
        }
        row.push(fmt_f64(d_a_numeric[i]));
        row.push(fmt_f64(set.d_a_formula[i]));
        row.push(fmt_f64(set.d_a_scaled_formula[i]));
        row.push(fmt_f64(set.d_amv_formula[i]));
        row.push(fmt_f64(set.d_v_relation[i]));
        row.push(fmt_f64(set.d_vinf_relation[i]));
        for bi in 0..set.betas.len() {
            row.push(fmt_f64(set.d_a_beta_formula[bi][i]));
            row.push(fmt_f64(set.d_v_beta_relation[bi][i]));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_solve_outputs(
    dir: &Path,
    table: &RadialFieldTable,
    emit_csv: bool,
    emit_json: bool,
) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if emit_csv {
        let path = dir.join("green.csv");
        atomic_write(&path, green_csv(table).as_bytes())?;
        written.push(path);
    }
    if emit_json {
        let summary = SolveSummary::new(table.green());
        let path = dir.join("solve.json");
        atomic_write(&path, pretty_json(&summary).as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_functionals_outputs(dir: &Path, set: &FunctionalSet) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("functionals.csv");
    atomic_write(&path, functionals_csv(set).as_bytes())?;
    Ok(vec![path])
}

/// `report.json` plus the human-readable `report.txt`; an optional suffix
/// keeps sweep outputs apart.
pub fn write_report_outputs(
    dir: &Path,
    report: &VerificationReport,
    suffix: &str,
) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let json_path = dir.join(format!("report{suffix}.json"));
    atomic_write(&json_path, pretty_json(report).as_bytes())?;
    let txt_path = dir.join(format!("report{suffix}.txt"));
    atomic_write(&txt_path, report.render_text().as_bytes())?;
    Ok(vec![json_path, txt_path])
}

fn pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_round_trips() {
        for &x in &[std::f64::consts::PI, 1.0 / 3.0, 2e-300, -4.591e17] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("greenlab-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("x.csv");
        atomic_write(&path, b"one").unwrap();
        atomic_write(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
