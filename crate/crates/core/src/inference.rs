//! Block sums, the blocked variance estimator and studentized inference.

use rayon::prelude::*;

use crate::blocking::BlockPartition;
use crate::error::{Error, Result};
use crate::mixingale::{BoundModel, SE_MULTIPLIER};
use crate::netstats::StatVector;
use crate::scalar::Real;
use crate::sim::ModelSpec;

/// Two-sided 95% standard normal quantile.
pub const Z_975: f64 = 1.959964;

/// Per-block sums of `v − μ` over kept sets (`x`) and buffers (`u`).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSums<F> {
    pub x: Vec<F>,
    pub u: Vec<F>,
}

impl<F: Real> BlockSums<F> {
    pub fn total(&self) -> F {
        self.x.iter().copied().sum::<F>() + self.u.iter().copied().sum::<F>()
    }
}

fn check_len<F, G>(v: &StatVector<F>, p: &BlockPartition<G>) -> Result<()>
where
    F: Real,
{
    if v.len() != p.n {
        return Err(Error::DimensionMismatch {
            expected: p.n,
            found: v.len(),
        });
    }
    Ok(())
}

pub fn block_sums<F: Real, G: Real>(v: &StatVector<F>, p: &BlockPartition<G>) -> Result<BlockSums<F>> {
    check_len(v, p)?;
    let c = v.centered()?;
    let sum = |set: &[usize]| set.iter().map(|&j| c[j]).sum::<F>();
    Ok(BlockSums {
        x: p.blocks.iter().map(|b| sum(&b.kept)).collect(),
        u: p.blocks.iter().map(|b| sum(&b.buffer)).collect(),
    })
}

/// `η̂² = n⁻¹ Σ_i X̃_i²` with `X̃_i = Σ_{j∈J_i} (v_j − v̄)`.
///
/// Demeaning is by the full-sample mean `v̄`. Subtracting each block's own
/// mean would make every `X̃_i` vanish identically.
pub fn eta_hat_sq<F: Real, G: Real>(v: &StatVector<F>, p: &BlockPartition<G>) -> Result<F> {
    check_len(v, p)?;
    if v.is_empty() {
        return Err(Error::EmptySample);
    }
    let vals = v.values();
    let mean = vals.iter().copied().sum::<F>() / F::from_count(vals.len());
    let total = p
        .blocks
        .iter()
        .filter(|b| !b.kept.is_empty())
        .map(|b| {
            let x = b.kept.iter().map(|&j| vals[j] - mean).sum::<F>();
            x * x
        })
        .sum::<F>();
    Ok(total / F::from_count(p.n))
}

/// `n^{−1/2} S_n / η̂`.
pub fn t_statistic<F: Real>(s_n: F, eta_hat_sq: F, n: usize) -> Result<F> {
    if !(eta_hat_sq > F::zero()) {
        return Err(Error::DegenerateVariance);
    }
    Ok(s_n / (F::from_count(n).sqrt() * eta_hat_sq.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltDiagnostics<F> {
    /// `max_i |X_i| / √n`.
    pub max_abs_x: F,
    /// `Σ X_i² / n`.
    pub sum_sq_x: F,
    /// `Σ U_i / √n`.
    pub buffer_sum: F,
}

pub fn clt_condition_diagnostics<F: Real>(b: &BlockSums<F>, n: usize) -> Result<CltDiagnostics<F>> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let nf = F::from_count(n);
    let root = nf.sqrt();
    Ok(CltDiagnostics {
        max_abs_x: b.x.iter().fold(F::zero(), |m, x| m.max(x.abs())) / root,
        sum_sq_x: b.x.iter().map(|&x| x * x).sum::<F>() / nf,
        buffer_sum: b.u.iter().copied().sum::<F>() / root,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceResult<F> {
    pub s_n: F,
    pub eta_hat_sq: F,
    pub t_stat: F,
    pub ci_low: F,
    pub ci_high: F,
    pub diagnostics: CltDiagnostics<F>,
}

/// Studentized sum and 95% interval for the average mean `n⁻¹ Σ μ_i`.
pub fn standardized_stat<F: Real, G: Real>(
    v: &StatVector<F>,
    p: &BlockPartition<G>,
) -> Result<InferenceResult<F>> {
    let sums = block_sums(v, p)?;
    let s_n = v.centered()?.into_iter().sum::<F>();
    let eta2 = eta_hat_sq(v, p)?;
    let t_stat = t_statistic(s_n, eta2, p.n)?;
    let nf = F::from_count(p.n);
    let mean = v.values().iter().copied().sum::<F>() / nf;
    let half = F::lit(Z_975) * eta2.sqrt() / nf.sqrt();
    Ok(InferenceResult {
        s_n,
        eta_hat_sq: eta2,
        t_stat,
        ci_low: mean - half,
        ci_high: mean + half,
        diagnostics: clt_condition_diagnostics(&sums, p.n)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaximalCheck {
    /// Monte Carlo `E[M²]`.
    pub emp_max_sq: f64,
    pub se: f64,
    /// `(log 2n / log 2)² Σ_{i,j} c_i c_j Σ_cells ψ·P`.
    pub bound: f64,
    pub pass: bool,
}

/// `M = max_{k≤n} |Σ_{i=a+1}^{a+k} (v_i − μ_i)|`.
pub fn max_partial_sum_sq(centered: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut best: f64 = 0.0;
    for &x in centered {
        acc += x;
        best = best.max(acc.abs());
    }
    best * best
}

/// Maximal inequality for the nodes `a..a+n` of padded replications.
pub fn maximal_inequality_check(spec: &ModelSpec, a: usize, n: usize, reps: u64, seed: u64) -> Result<MaximalCheck> {
    if n == 0 || reps < 2 {
        return Err(Error::EmptySample);
    }
    let total = a + n;
    let bounds = BoundModel::estimate(spec, total, true, reps, seed)?;
    let mu = spec.mean(total, reps, seed, true)?;
    let draws: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let v = spec.simulate(seed, r, total, true)?.v;
            let c: Vec<f64> = (a..total).map(|i| v[i] - mu[i]).collect();
            Ok(max_partial_sum_sq(&c))
        })
        .collect::<Result<_>>()?;
    let rf = reps as f64;
    let emp = draws.iter().sum::<f64>() / rf;
    let var = draws.iter().map(|x| (x - emp).powi(2)).sum::<f64>() / (rf - 1.0);
    let se = (var / rf).sqrt();
    let mut series = 0.0;
    for i in a..total {
        for j in a..total {
            series += bounds.psi.constant(i) * bounds.psi.constant(j) * bounds.pair_sum(i, j)?;
        }
    }
    let factor = ((2.0 * n as f64).ln() / std::f64::consts::LN_2).powi(2);
    let bound = factor * series;
    Ok(MaximalCheck {
        emp_max_sq: emp,
        se,
        bound,
        pass: emp <= bound + SE_MULTIPLIER * se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocking::{Bandwidths, Block};

    fn partition(n: usize, blocks: Vec<(Vec<usize>, Vec<usize>)>) -> BlockPartition<f64> {
        BlockPartition {
            n,
            blocks: blocks
                .into_iter()
                .map(|(kept, buffer)| Block {
                    center: kept.first().copied().unwrap_or_else(|| buffer[0]),
                    kept,
                    buffer,
                    cutoff: None,
                })
                .collect(),
            bandwidths: Bandwidths { l: 2.0, r: 1.0 },
            tie_breaks: 0,
        }
    }

    #[test]
    fn block_sum_examples() {
        let v = StatVector::with_mean(vec![1.0, -1.0, 2.0], vec![0.0; 3]).unwrap();
        let p = partition(3, vec![(vec![0, 1], vec![2])]);
        let b = block_sums(&v, &p).unwrap();
        assert_eq!(b.x, vec![0.0]);
        assert_eq!(b.u, vec![2.0]);
        let flat = StatVector::with_mean(vec![0.3; 3], vec![0.3; 3]).unwrap();
        let b = block_sums(&flat, &p).unwrap();
        assert_eq!((b.x[0], b.u[0]), (0.0, 0.0));
        assert_eq!(block_sums(&StatVector::new(vec![1.0; 3]).unwrap(), &p), Err(Error::MissingMean));
    }

    #[test]
    fn eta_examples() {
        let p = partition(2, vec![(vec![0, 1], vec![])]);
        let v = StatVector::new(vec![0.0, 2.0]).unwrap();
        assert_eq!(eta_hat_sq(&v, &p).unwrap(), 0.0);
        let p2 = partition(4, vec![(vec![0, 1], vec![]), (vec![2, 3], vec![])]);
        let c = StatVector::new(vec![5.0; 4]).unwrap();
        assert_eq!(eta_hat_sq(&c, &p2).unwrap(), 0.0);
        // mean 1.5; block sums of deviations −2 and +2
        let v2 = StatVector::<f64>::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!((eta_hat_sq(&v2, &p2).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn t_statistic_examples() {
        assert_eq!(t_statistic(4.0, 4.0, 4).unwrap(), 1.0);
        assert_eq!(t_statistic(0.0, 1.0, 9).unwrap(), 0.0);
        assert_eq!(t_statistic(1.0, 0.0, 9), Err(Error::DegenerateVariance));
    }

    #[test]
    fn interval_width_and_center() {
        let p = partition(4, vec![(vec![0, 1], vec![]), (vec![2, 3], vec![])]);
        let v = StatVector::<f64>::with_mean(vec![0.0, 1.0, 2.0, 3.0], vec![1.5; 4]).unwrap();
        let r = standardized_stat(&v, &p).unwrap();
        assert_eq!(r.s_n, 0.0);
        assert_eq!(r.t_stat, 0.0);
        assert!(((r.ci_low + r.ci_high) / 2.0 - 1.5).abs() < 1e-15);
        let width = 2.0 * Z_975 * r.eta_hat_sq.sqrt() / 2.0;
        assert!((r.ci_high - r.ci_low - width).abs() < 1e-15);
    }

    #[test]
    fn diagnostics_examples() {
        let zero = BlockSums { x: vec![0.0; 3], u: vec![0.0; 3] };
        let d = clt_condition_diagnostics(&zero, 10).unwrap();
        assert_eq!((d.max_abs_x, d.sum_sq_x, d.buffer_sum), (0.0, 0.0, 0.0));
        let one = BlockSums { x: vec![3.0], u: vec![0.0] };
        let d = clt_condition_diagnostics(&one, 9).unwrap();
        assert_eq!((d.max_abs_x, d.sum_sq_x), (1.0, 1.0));
    }

    #[test]
    fn max_partial_sums() {
        assert_eq!(max_partial_sum_sq(&[1.5]), 2.25);
        assert_eq!(max_partial_sum_sq(&[0.0; 5]), 0.0);
        assert_eq!(max_partial_sum_sq(&[1.0, 1.0, -3.0, -1.0]), 4.0);
    }
}
