//! LLN and CLT Monte Carlo experiments.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::blocking::{bandwidths, partition, Bandwidths};
use crate::error::{Error, Result};
use crate::inference::standardized_stat;
use crate::sim::ModelSpec;

use super::config::{ExperimentConfig, MuMode};
use super::ks::{ks_critical_5pct, ks_statistic};

/// LLN: the last/first median ratio must fall in `[LOW·ρ^{-1/2}, HIGH·ρ^{-1/2}]`.
pub const LLN_RATIO_LOW: f64 = 0.48;
pub const LLN_RATIO_HIGH: f64 = 2.0;
pub const KS_MAX: f64 = 0.05;
pub const COVERAGE_RANGE: (f64, f64) = (0.93, 0.97);
pub const ETA_RATIO_RANGE: (f64, f64) = (0.7, 1.3);
/// Floor on the number of draws behind a Monte Carlo mean.
pub const MU_MIN_REPS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Lln,
    Clt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MuSource {
    Analytic,
    McOracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanVector {
    pub mu: Vec<f64>,
    pub source: MuSource,
    pub reps: u64,
}

impl MeanVector {
    pub fn average(&self) -> f64 {
        self.mu.iter().sum::<f64>() / self.mu.len() as f64
    }
}

/// Draw count for a Monte Carlo mean backing an experiment with `reps` replications.
pub fn mu_reps(reps: u64) -> u64 {
    MU_MIN_REPS.max(10 * reps)
}

/// `μ_{i,n}`: closed form when requested and available, otherwise a Monte
/// Carlo mean over `r_mu ≥ 1000` draws on a stream disjoint from replications.
pub fn mu_oracle(spec: &ModelSpec, n: usize, r_mu: u64, seed: u64, padded: bool, mode: MuMode) -> Result<MeanVector> {
    if mode == MuMode::Analytic {
        if let Some(mu) = spec.analytic_mean(n, padded)? {
            return Ok(MeanVector {
                mu,
                source: MuSource::Analytic,
                reps: 0,
            });
        }
    }
    let r = r_mu.max(MU_MIN_REPS);
    Ok(MeanVector {
        mu: spec.mc_mean(n, r, seed, padded)?,
        source: MuSource::McOracle,
        reps: r,
    })
}

/// One replication at one sample size. Studentized fields are `None` in LLN runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationRow {
    pub rep: u64,
    pub n: usize,
    pub s_n: f64,
    pub eta_hat_sq: Option<f64>,
    pub t_stat: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub diag_max: Option<f64>,
    pub diag_sumsq: Option<f64>,
    pub diag_buffer: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub mu_bar: f64,
    pub mu_source: MuSource,
    pub mu_reps: u64,
    pub mean_abs_avg: f64,
    pub median_abs_avg: f64,
    /// Mean of `S_n²/n`, the Monte Carlo variance of `n^{-1/2}S_n`.
    pub var_scaled_sum: f64,
    pub clt: Option<CltSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltSummary {
    pub bandwidth_l: f64,
    pub bandwidth_r: f64,
    pub ks: f64,
    pub ks_critical_5pct: f64,
    pub coverage: f64,
    pub mean_eta_hat_sq: f64,
    pub eta_ratio: f64,
    /// Replications with `η̂² = 0`, left out of the KS and diagnostic means.
    pub degenerate: usize,
    pub mean_blocks: f64,
    pub mean_tie_breaks: f64,
    pub mean_diag_max: f64,
    pub mean_diag_sumsq: f64,
    pub mean_abs_diag_buffer: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub sizes: Vec<SizeSummary>,
    /// Named pass/fail checks; `pass` is their conjunction.
    pub checks: BTreeMap<String, bool>,
    /// Reported, not part of `pass`.
    pub trends: BTreeMap<String, bool>,
    pub pass: bool,
    pub rows: Vec<ReplicationRow>,
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let k = xs.len() as f64;
    xs.sum::<f64>() / k
}

fn base_summary(n: usize, mu: &MeanVector, rows: &[ReplicationRow]) -> SizeSummary {
    let nf = n as f64;
    let abs_avg: Vec<f64> = rows.iter().map(|r| (r.s_n / nf).abs()).collect();
    SizeSummary {
        n,
        mu_bar: mu.average(),
        mu_source: mu.source,
        mu_reps: mu.reps,
        mean_abs_avg: mean(abs_avg.iter().copied()),
        median_abs_avg: median(&abs_avg),
        var_scaled_sum: mean(rows.iter().map(|r| r.s_n * r.s_n / nf)),
        clt: None,
    }
}

fn prepare(cfg: &ExperimentConfig) -> Result<ModelSpec> {
    cfg.validate()?;
    cfg.model_spec()
}

/// Replications of `|S_n/n|` across the grid.
pub fn run_lln(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let spec = prepare(cfg)?;
    let mut sizes = Vec::new();
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        let mu = mu_oracle(&spec, n, mu_reps(cfg.reps), cfg.seed, cfg.padded, cfg.mu_mode)?;
        let block: Vec<ReplicationRow> = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| {
                let real = spec.simulate(cfg.seed, rep, n, cfg.padded)?;
                let s_n = real.v.iter().zip(&mu.mu).map(|(v, m)| v - m).sum();
                Ok(ReplicationRow {
                    rep,
                    n,
                    s_n,
                    eta_hat_sq: None,
                    t_stat: None,
                    ci_low: None,
                    ci_high: None,
                    diag_max: None,
                    diag_sumsq: None,
                    diag_buffer: None,
                })
            })
            .collect::<Result<_>>()?;
        sizes.push(base_summary(n, &mu, &block));
        rows.extend(block);
    }
    let mut checks = BTreeMap::new();
    let medians: Vec<f64> = sizes.iter().map(|s| s.median_abs_avg).collect();
    checks.insert("median_decreasing".into(), medians.windows(2).all(|w| w[1] < w[0]));
    if sizes.len() >= 2 {
        let (first, last) = (&sizes[0], &sizes[sizes.len() - 1]);
        let expected = (first.n as f64 / last.n as f64).sqrt();
        let ratio = last.median_abs_avg / first.median_abs_avg;
        checks.insert(
            "median_ratio_in_band".into(),
            ratio >= LLN_RATIO_LOW * expected && ratio <= LLN_RATIO_HIGH * expected,
        );
    }
    Ok(finish(ExperimentKind::Lln, cfg, sizes, checks, BTreeMap::new(), rows))
}

/// Ratio of last to first median of `|S_n/n|`, if the grid has two sizes.
pub fn lln_median_ratio(s: &ExperimentSummary) -> Option<f64> {
    match s.sizes.as_slice() {
        [first, .., last] => Some(last.median_abs_avg / first.median_abs_avg),
        _ => None,
    }
}

fn finish(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    sizes: Vec<SizeSummary>,
    checks: BTreeMap<String, bool>,
    trends: BTreeMap<String, bool>,
    rows: Vec<ReplicationRow>,
) -> ExperimentSummary {
    let pass = checks.values().all(|&b| b);
    ExperimentSummary {
        kind,
        config: cfg.clone(),
        sizes,
        checks,
        trends,
        pass,
        rows,
    }
}

struct CltDraw {
    row: ReplicationRow,
    blocks: usize,
    tie_breaks: usize,
}

fn clt_replication(
    spec: &ModelSpec,
    cfg: &ExperimentConfig,
    bw: Bandwidths,
    mu: &MeanVector,
    n: usize,
    rep: u64,
) -> Result<CltDraw> {
    let real = spec.simulate(cfg.seed, rep, n, cfg.padded)?;
    let g = real.proximity()?;
    let p = partition::<f64, _>(&g, bw)?;
    let v = real.with_mean(mu.mu.clone())?;
    let res = match standardized_stat(&v, &p) {
        Err(Error::DegenerateVariance) => {
            // Every kept block sum is zero: no studentized value, and the
            // interval collapses to the sample mean.
            let s_n = v.centered()?.into_iter().sum();
            let avg = v.values().iter().sum::<f64>() / n as f64;
            return Ok(CltDraw {
                row: ReplicationRow {
                    rep,
                    n,
                    s_n,
                    eta_hat_sq: Some(0.0),
                    t_stat: None,
                    ci_low: Some(avg),
                    ci_high: Some(avg),
                    diag_max: None,
                    diag_sumsq: None,
                    diag_buffer: None,
                },
                blocks: p.num_blocks(),
                tie_breaks: p.tie_breaks,
            });
        }
        other => other?,
    };
    Ok(CltDraw {
        row: ReplicationRow {
            rep,
            n,
            s_n: res.s_n,
            eta_hat_sq: Some(res.eta_hat_sq),
            t_stat: Some(res.t_stat),
            ci_low: Some(res.ci_low),
            ci_high: Some(res.ci_high),
            diag_max: Some(res.diagnostics.max_abs_x),
            diag_sumsq: Some(res.diagnostics.sum_sq_x),
            diag_buffer: Some(res.diagnostics.buffer_sum),
        },
        blocks: p.num_blocks(),
        tie_breaks: p.tie_breaks,
    })
}

/// Studentized replications: KS distance of `t` to `N(0,1)`, coverage of
/// `n⁻¹Σμ_i` by the 95% interval, and `η̂²` against the Monte Carlo variance.
pub fn run_clt(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let spec = prepare(cfg)?;
    let grid: Vec<(usize, Bandwidths)> = cfg
        .n_grid
        .iter()
        .map(|&n| Ok((n, bandwidths(n, cfg.c_j, cfg.c_t, cfg.epsilon)?)))
        .collect::<Result<_>>()?;
    if let Some(&(n, bw)) = grid.first() {
        if bw.floor_l() < 2 {
            return Err(Error::BlockingInfeasible { n, floor_l: bw.floor_l() });
        }
    }
    let mut sizes = Vec::new();
    let mut rows = Vec::new();
    for (n, bw) in grid {
        let mu = mu_oracle(&spec, n, mu_reps(cfg.reps), cfg.seed, cfg.padded, cfg.mu_mode)?;
        let draws: Vec<CltDraw> = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| clt_replication(&spec, cfg, bw, &mu, n, rep))
            .collect::<Result<_>>()?;
        let block: Vec<ReplicationRow> = draws.iter().map(|d| d.row).collect();
        let mut s = base_summary(n, &mu, &block);
        let target = s.mu_bar;
        let t: Vec<f64> = block.iter().filter_map(|r| r.t_stat).collect();
        let covered = block
            .iter()
            .filter(|r| r.ci_low.unwrap() <= target && target <= r.ci_high.unwrap())
            .count();
        let mean_eta = mean(block.iter().map(|r| r.eta_hat_sq.unwrap()));
        let regular: Vec<&ReplicationRow> = block.iter().filter(|r| r.t_stat.is_some()).collect();
        if regular.is_empty() {
            return Err(Error::DegenerateVariance);
        }
        s.clt = Some(CltSummary {
            bandwidth_l: bw.l,
            bandwidth_r: bw.r,
            ks: ks_statistic(&t)?,
            ks_critical_5pct: ks_critical_5pct(t.len()),
            coverage: covered as f64 / block.len() as f64,
            mean_eta_hat_sq: mean_eta,
            eta_ratio: mean_eta / s.var_scaled_sum,
            degenerate: block.len() - regular.len(),
            mean_blocks: mean(draws.iter().map(|d| d.blocks as f64)),
            mean_tie_breaks: mean(draws.iter().map(|d| d.tie_breaks as f64)),
            mean_diag_max: mean(regular.iter().map(|r| r.diag_max.unwrap())),
            mean_diag_sumsq: mean(regular.iter().map(|r| r.diag_sumsq.unwrap())),
            mean_abs_diag_buffer: mean(regular.iter().map(|r| r.diag_buffer.unwrap().abs())),
        });
        sizes.push(s);
        rows.extend(block);
    }
    let last = sizes.last().and_then(|s| s.clt.as_ref()).expect("nonempty grid");
    let mut checks = BTreeMap::new();
    checks.insert("ks_below_0.05".into(), last.ks < KS_MAX);
    checks.insert(
        "coverage_in_range".into(),
        (COVERAGE_RANGE.0..=COVERAGE_RANGE.1).contains(&last.coverage),
    );
    checks.insert(
        "eta_ratio_in_range".into(),
        (ETA_RATIO_RANGE.0..=ETA_RATIO_RANGE.1).contains(&last.eta_ratio),
    );
    let clts: Vec<&CltSummary> = sizes.iter().filter_map(|s| s.clt.as_ref()).collect();
    let mut trends = BTreeMap::new();
    if clts.len() >= 2 {
        let shrinking = |f: fn(&CltSummary) -> f64| clts.windows(2).all(|w| f(w[1]) < f(w[0]));
        trends.insert("diag_max_shrinks".into(), shrinking(|c| c.mean_diag_max));
        trends.insert("diag_buffer_shrinks".into(), shrinking(|c| c.mean_abs_diag_buffer));
        let first = clts[0].mean_diag_sumsq;
        let final_ = clts[clts.len() - 1].mean_diag_sumsq;
        trends.insert("diag_sumsq_stable".into(), (final_ / first - 1.0).abs() < 0.5);
    }
    Ok(finish(ExperimentKind::Clt, cfg, sizes, checks, trends, rows))
}
