//! Mixingale, summability and dispersion reports as flat tables.

use std::fmt::Write as _;

use crate::error::Result;
use crate::inference::maximal_inequality_check;
use crate::mixingale::{
    covariance_sweep, dispersion_sweep, summability_diagnostic, BoundModel, PLATEAU_TOLERANCE, SE_MULTIPLIER,
};
use crate::sim::ModelSpec;

/// One line of a report: `(check, i, j, k, estimate, bound, margin, pass)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRow {
    pub check: &'static str,
    pub i: Option<usize>,
    pub j: Option<usize>,
    /// Radius `k`, or the sample size for sweep rows.
    pub k: Option<f64>,
    pub estimate: f64,
    pub bound: Option<f64>,
    pub margin: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnoseReport {
    pub rows: Vec<DiagnosticRow>,
    /// Thresholds and caveats printed above the table.
    pub notes: Vec<String>,
}

impl DiagnoseReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn extend(&mut self, other: DiagnoseReport) {
        self.rows.extend(other.rows);
        self.notes.extend(other.notes);
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for note in &self.notes {
            writeln!(out, "# {note}").unwrap();
        }
        writeln!(out, "check\ti\tj\tk\testimate\tbound\tmargin\tpass").unwrap();
        let idx = |x: Option<usize>| x.map_or("-".to_string(), |v| (v + 1).to_string());
        let num = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6e}"));
        for r in &self.rows {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:.6e}\t{}\t{}\t{}",
                r.check,
                idx(r.i),
                idx(r.j),
                r.k.map_or("-".to_string(), |v| format!("{v}")),
                r.estimate,
                num(r.bound),
                num(r.margin),
                if r.pass { "PASS" } else { "FAIL" }
            )
            .unwrap();
        }
        out
    }
}

/// Covariance bound for all pairs `i ≤ j`, plus exact zeros past the
/// independence radius. Indices in the table are 1-based.
pub fn covariance_report(spec: &ModelSpec, n: usize, reps: u64, seed: u64) -> Result<DiagnoseReport> {
    let checks = covariance_sweep(spec, n, reps, seed, 1.0)?;
    let mut rows = Vec::with_capacity(checks.len() * 2);
    for c in checks {
        rows.push(DiagnosticRow {
            check: "cov_bound",
            i: Some(c.i),
            j: Some(c.j),
            k: None,
            estimate: c.cov_hat,
            bound: Some(c.bound),
            margin: Some(c.margin),
            pass: c.pass,
        });
        if let Some(zero) = c.zero_pass {
            rows.push(DiagnosticRow {
                check: "cov_zero",
                i: Some(c.i),
                j: Some(c.j),
                k: None,
                estimate: c.cov_hat,
                bound: Some(0.0),
                margin: Some(c.margin),
                pass: zero,
            });
        }
    }
    Ok(DiagnoseReport {
        rows,
        notes: vec![format!("margin = {SE_MULTIPLIER} SE of the Monte Carlo covariance; K = c_i = 1")],
    })
}

pub fn maximal_report(spec: &ModelSpec, a: usize, n: usize, reps: u64, seed: u64) -> Result<DiagnoseReport> {
    let m = maximal_inequality_check(spec, a, n, reps, seed)?;
    Ok(DiagnoseReport {
        rows: vec![DiagnosticRow {
            check: "maximal",
            i: Some(a),
            j: None,
            k: Some(n as f64),
            estimate: m.emp_max_sq,
            bound: Some(m.bound),
            margin: Some(SE_MULTIPLIER * m.se),
            pass: m.pass,
        }],
        notes: vec![],
    })
}

/// Summability totals over `n_grid` from the model's own bound table. Only
/// the plateau row carries the verdict.
pub fn summability_report(spec: &ModelSpec, n_grid: &[usize], reps: u64, seed: u64) -> Result<DiagnoseReport> {
    let n_max = n_grid.iter().copied().max().unwrap_or(0);
    let bounds = BoundModel::estimate(spec, n_max, true, reps, seed)?;
    let rep = summability_diagnostic(&bounds.psi, &bounds.events, n_grid)?;
    let mut rows: Vec<DiagnosticRow> = rep
        .totals
        .iter()
        .map(|&(n, t)| DiagnosticRow {
            check: "summability_total",
            i: None,
            j: None,
            k: Some(n as f64),
            estimate: t,
            bound: None,
            margin: None,
            pass: true,
        })
        .collect();
    let half = rep.total(n_max / 2).unwrap_or(0.0);
    rows.push(DiagnosticRow {
        check: "summability_plateau",
        i: None,
        j: None,
        k: Some(n_max as f64),
        estimate: rep.total(n_max).unwrap_or(0.0) - half,
        bound: Some(PLATEAU_TOLERANCE * half),
        margin: None,
        pass: rep.pass,
    });
    Ok(DiagnoseReport {
        rows,
        notes: vec![format!(
            "plateau: total(n) - total(n/2) < {PLATEAU_TOLERANCE} total(n/2); psi bounds are unconditional (conservative)"
        )],
    })
}

pub fn dispersion_report(spec: &ModelSpec, k: f64, n_grid: &[usize], reps: u64, seed: u64) -> Result<DiagnoseReport> {
    let rep = dispersion_sweep(spec, k, n_grid, reps, seed)?;
    let mut rows: Vec<DiagnosticRow> = rep
        .estimates
        .iter()
        .map(|&(n, e)| DiagnosticRow {
            check: "dispersion",
            i: None,
            j: None,
            k: Some(n as f64),
            estimate: e,
            bound: None,
            margin: None,
            pass: true,
        })
        .collect();
    let (prev, last) = (rep.estimates[rep.estimates.len() - 2].1, rep.estimates[rep.estimates.len() - 1].1);
    rows.push(DiagnosticRow {
        check: "dispersion_plateau",
        i: None,
        j: None,
        k: Some(k),
        estimate: last - prev,
        bound: Some(PLATEAU_TOLERANCE * prev),
        margin: None,
        pass: rep.pass,
    });
    Ok(DiagnoseReport {
        rows,
        notes: vec![format!("dispersion sup_i sum_j P(gap <= {k}) must plateau across the last doubling")],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ModelParams, ZetaLaw};
    use crate::sim::{ModelKind, StatKind};

    #[test]
    fn neighborhood_summability_plateaus() {
        let spec = ModelSpec::neighborhood_degree(1.0).unwrap();
        let r = summability_report(&spec, &[256, 512], 200, 5).unwrap();
        assert!(r.pass(), "{}", r.to_table());
        assert!(r.to_table().contains("summability_plateau"));
    }

    #[test]
    fn iid_uniform_dispersion_fails() {
        let mut spec = ModelSpec::new(
            ModelKind::Distance,
            ModelParams::new(0.0, -1.0, f64::INFINITY, 1.0).unwrap(),
            StatKind::Degree,
        )
        .unwrap();
        spec.law = ZetaLaw::IidUniform;
        let r = dispersion_report(&spec, 1.0, &[32, 64], 20, 1).unwrap();
        assert!(!r.pass());
        spec.law = ZetaLaw::Lattice;
        assert!(dispersion_report(&spec, 1.0, &[32, 64], 20, 1).unwrap().pass());
    }

    #[test]
    fn table_is_one_based() {
        let r = DiagnoseReport {
            rows: vec![DiagnosticRow {
                check: "cov_bound",
                i: Some(0),
                j: Some(4),
                k: None,
                estimate: 0.5,
                bound: Some(1.0),
                margin: Some(0.1),
                pass: true,
            }],
            notes: vec![],
        };
        assert!(r.to_table().contains("cov_bound\t1\t5\t-\t5.000000e-1"));
    }
}
