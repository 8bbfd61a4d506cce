//! Text artifacts: CSV with `#` comment headers and JSON sidecars.
//!
//! Reals are written as `{:.16e}`, which round-trips every `f64`. Lines end
//! in `\n` on every platform.

use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;

use crate::bounds::{BoundsTable, CriticalTable, Family};
use crate::error::Result;
use crate::witness::{QuasiprobabilityGrid, WitnessSpectrum};

/// Provenance echoed at the top of every artifact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub tool_version: String,
    pub seed: u64,
    pub command: String,
    pub params: Value,
}

impl Provenance {
    pub fn new(command: &str, seed: u64, params: Value) -> Self {
        Self {
            tool_version: crate::TOOL_VERSION.to_string(),
            seed,
            command: command.to_string(),
            params,
        }
    }

    fn comment_block(&self) -> String {
        format!(
            "# tool_version: {}\n# command: {}\n# seed: {}\n# params: {}\n",
            self.tool_version, self.command, self.seed, self.params
        )
    }
}

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn coefficients_csv(spectrum: &WitnessSpectrum, prov: &Provenance) -> String {
    let mut out = prov.comment_block();
    out.push_str("n,c,error_estimate\n");
    for (n, (c, e)) in spectrum
        .coefficients()
        .iter()
        .zip(spectrum.error_estimates())
        .enumerate()
    {
        let _ = writeln!(out, "{n},{},{}", real(*c), real(*e));
    }
    out
}

/// One row per grid point, real part varying slowest.
pub fn grid_csv(grid: &QuasiprobabilityGrid, prov: &Provenance) -> String {
    let mut out = prov.comment_block();
    out.push_str("re_alpha,im_alpha,value\n");
    let ni = grid.spec.len_im();
    for (idx, v) in grid.values.iter().enumerate() {
        let a = grid.spec.point(idx / ni, idx % ni);
        let _ = writeln!(out, "{},{},{}", real(a.re), real(a.im), real(*v));
    }
    out
}

/// Summary of a grid for the JSON file written next to its CSV.
pub fn grid_sidecar(grid: &QuasiprobabilityGrid, prov: &Provenance) -> Result<String> {
    let (min_at, min) = grid.min();
    let (max_at, max) = grid.max();
    let v = json!({
        "provenance": prov,
        "w": grid.w,
        "grid": grid.spec,
        "shape": [grid.spec.len_re(), grid.spec.len_im()],
        "min": {"alpha": [min_at.re, min_at.im], "value": min},
        "max": {"alpha": [max_at.re, max_at.im], "value": max},
        "max_error": grid.max_error,
        "riemann_integral": grid.riemann_integral(),
        "warnings": grid.warnings,
    });
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

/// Bounds with columns normalized to the overall extrema at the same `w`:
/// upper values divided by the overall sup, lower values by the modulus
/// of the overall inf.
pub fn bounds_csv(table: &BoundsTable, prov: &Provenance) -> String {
    let mut out = prov.comment_block();
    out.push_str(
        "w,family,r,upper,lower,upper_normalized,lower_normalized,overall_sup,overall_inf,\
         upper_source,lower_source,upper_converged,lower_converged,heuristic\n",
    );
    for rec in &table.records {
        let Some(overall) = table.overall_at(rec.w) else {
            continue;
        };
        let r = match rec.family {
            Family::Superposition { r } => r.to_string(),
            Family::Gaussian => String::new(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            real(rec.w),
            rec.family,
            r,
            real(rec.upper.value),
            real(rec.lower.value),
            real(rec.upper.value / overall.sup),
            real(rec.lower.value / overall.inf.abs()),
            real(overall.sup),
            real(overall.inf),
            source_name(rec.upper.source),
            source_name(rec.lower.source),
            rec.upper.converged,
            rec.lower.converged,
            rec.upper.heuristic || rec.lower.heuristic,
        );
    }
    out
}

fn source_name(s: crate::bounds::Source) -> &'static str {
    match s {
        crate::bounds::Source::Optimizer => "optimizer",
        crate::bounds::Source::FockLimit => "fock_limit",
        crate::bounds::Source::Nested => "nested",
    }
}

pub fn critical_csv(table: &CriticalTable, prov: &Provenance) -> String {
    let mut out = prov.comment_block();
    if let Some(onset) = table.onset {
        let _ = writeln!(out, "# onset: {}", real(onset));
    }
    out.push_str("w_min,w_max,n_sup,n_inf,kappa,closed\n");
    for row in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            real(row.w_min),
            real(row.w_max),
            row.n_sup,
            row.n_inf,
            row.kappa,
            row.closed
        );
    }
    out
}

/// Data rows of a CSV produced here: comments and the column header
/// skipped, fields split on commas.
pub fn data_rows(csv: &str) -> Vec<Vec<&str>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::fock_state;
    use crate::witness::{quasiprobability_grid, witness_coefficients, GridSpec};

    fn prov() -> Provenance {
        Provenance::new("test", 7, json!({"w": 1.6}))
    }

    #[test]
    fn reals_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn coefficient_table() {
        let s = witness_coefficients(1.6, 3).unwrap();
        let csv = coefficients_csv(&s, &prov());
        assert!(csv.starts_with("# tool_version: nqp "));
        assert!(csv.contains("# seed: 7\n"));
        assert!(!csv.contains('\r'));
        let rows = data_rows(&csv);
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0][1].parse::<f64>().unwrap(), s.coefficients()[0]);
    }

    #[test]
    fn grid_layout() {
        let s = witness_coefficients(1.6, 40).unwrap();
        let spec = GridSpec::square(0.1, 0.1);
        let g = quasiprobability_grid(&fock_state(0, 0).unwrap(), &s, &spec).unwrap();
        let csv = grid_csv(&g, &prov());
        let rows = data_rows(&csv);
        assert_eq!(rows.len(), 9);
        assert_eq!(rows[1][0].parse::<f64>().unwrap(), -0.1);
        assert_eq!(rows[1][1].parse::<f64>().unwrap(), 0.0);
        let side: Value = serde_json::from_str(&grid_sidecar(&g, &prov()).unwrap()).unwrap();
        assert_eq!(side["shape"], json!([3, 3]));
        assert_eq!(side["provenance"]["seed"], json!(7));
    }
}
