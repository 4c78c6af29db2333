//! Mixingale coefficient bounds `ψ_{i,k}` and the checks built on them:
//! summability of the weighted bound series, dispersion of characteristics,
//! and Monte Carlo covariance bounds.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::proximity::{partition_event_probs, EventProbs, LambdaMap};
use crate::rng::{tag, Stream};
use crate::scalar::Real;
use crate::sim::{par_sum_rows, ModelKind, ModelSpec, StatKind};

/// Relative increment below which a doubling grid counts as plateaued.
pub const PLATEAU_TOLERANCE: f64 = 0.05;
/// Monte Carlo margins are this many standard errors.
pub const SE_MULTIPLIER: f64 = 3.0;

/// Upper bounds on `E[ψ_{i,k}]` on a radius grid `k_0 = 0 < k_1 < … < k_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiBoundTable<F> {
    radii: Vec<F>,
    bounds: Vec<Vec<F>>,
    c: Vec<F>,
}

impl<F: Real> PsiBoundTable<F> {
    /// `bounds[i][m]` bounds `ψ_{i, radii[m]}`. Rows are replaced by their
    /// running minimum: a bound at radius `k` also bounds every larger radius,
    /// since `ψ_{i,k}` itself is nonincreasing in `k`.
    pub fn new(radii: Vec<F>, bounds: Vec<Vec<F>>) -> Result<Self> {
        if radii.is_empty() || !radii[0].is_zero() || radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotoneGrid);
        }
        let mut bounds = bounds;
        for row in &mut bounds {
            if row.len() != radii.len() {
                return Err(Error::DimensionMismatch {
                    expected: radii.len(),
                    found: row.len(),
                });
            }
            if let Some(&b) = row.iter().find(|b| b.is_nan() || **b < F::zero()) {
                return Err(Error::OutOfDomain {
                    value: b.as_f64(),
                    domain: "[0, inf]",
                });
            }
            for m in 1..row.len() {
                row[m] = row[m].min(row[m - 1]);
            }
        }
        let c = vec![F::one(); bounds.len()];
        Ok(Self { radii, bounds, c })
    }

    pub fn from_fn(n: usize, radii: Vec<F>, f: impl Fn(usize, F) -> F) -> Result<Self> {
        let bounds = (0..n)
            .map(|i| radii.iter().map(|&k| f(i, k)).collect())
            .collect();
        Self::new(radii, bounds)
    }

    pub fn with_constants(mut self, c: Vec<F>) -> Result<Self> {
        if c.len() != self.bounds.len() {
            return Err(Error::DimensionMismatch {
                expected: self.bounds.len(),
                found: c.len(),
            });
        }
        if c.iter().any(|x| x.is_nan() || *x < F::zero()) {
            return Err(invalid("c", "constants must be nonnegative"));
        }
        self.c = c;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    pub fn radii(&self) -> &[F] {
        &self.radii
    }

    /// Radii `k_1..k_M` defining the event cells.
    pub fn cell_radii(&self) -> &[F] {
        &self.radii[1..]
    }

    pub fn bound(&self, i: usize, m: usize) -> F {
        self.bounds[i][m]
    }

    pub fn constant(&self, i: usize) -> F {
        self.c[i]
    }

    /// `Σ_cells ψ · P(cell)` for node `i` against the cell probabilities of
    /// one pair: origin ↦ radius 0, ring `m` ↦ `k_m`, tail ↦ `k_M`.
    pub fn weighted(&self, i: usize, events: &EventProbs) -> Result<f64> {
        let m = self.radii.len() - 1;
        if events.cells.len() != m {
            return Err(Error::IndexMismatch(format!(
                "{} event cells against {m} radii",
                events.cells.len()
            )));
        }
        let row = &self.bounds[i];
        let mut total = events.origin * row[0].as_f64();
        for (p, b) in events.cells.iter().zip(&row[1..]) {
            total += p * b.as_f64();
        }
        Ok(total + events.tail * row[m].as_f64())
    }
}

/// `0` beyond the truncation radius, `|μ| + (E v²)^{1/2}` inside it.
pub fn psi_bound_neighborhood<F: Real>(k: F, kappa_u: F, mu_abs: F, second_moment: F) -> Result<F> {
    if !(kappa_u > F::zero()) {
        return Err(invalid("kappa_u", "must be positive"));
    }
    if mu_abs.is_nan() || mu_abs < F::zero() || second_moment.is_nan() || second_moment < F::zero() {
        return Err(invalid("moments", "must be nonnegative"));
    }
    if k > kappa_u {
        Ok(F::zero())
    } else {
        Ok(mu_abs + second_moment.sqrt())
    }
}

/// `2 Σ_j |P_j − 1| P_j + 3 e^{−k} Σ_j P_j` with `P_j = P(|ζ_i − ζ_j| ≤ k)`.
pub fn psi_bound_logistic<F: Real>(k: F, pair_probs: &[F]) -> Result<F> {
    if let Some(&p) = pair_probs.iter().find(|p| !(**p >= F::zero() && **p <= F::one())) {
        return Err(Error::OutOfDomain {
            value: p.as_f64(),
            domain: "[0, 1]",
        });
    }
    let two = F::lit(2.0);
    let three = F::lit(3.0);
    let mut cross = F::zero();
    let mut mass = F::zero();
    for &p in pair_probs {
        cross += (p - F::one()).abs() * p;
        mass += p;
    }
    Ok(two * cross + three * (-k).exp() * mass)
}

/// Cell probabilities for pairs `(i, j)` with `i ≤ j`.
pub trait EventSource: Sync {
    fn events(&self, i: usize, j: usize) -> &EventProbs;
}

/// Cell probabilities that depend on the pair only through `|i − j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagEvents {
    by_lag: Vec<EventProbs>,
}

impl LagEvents {
    /// `by_lag[d]` for lags `0..by_lag.len()`; larger lags reuse the last entry.
    pub fn new(by_lag: Vec<EventProbs>) -> Result<Self> {
        if by_lag.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(Self { by_lag })
    }

    /// Lag-`d` probabilities for `d < max_lag` from the model, pair `(0, d)`.
    pub fn estimate(
        spec: &ModelSpec,
        map: &LambdaMap<f64>,
        k_grid: &[f64],
        max_lag: usize,
        reps: u64,
        seed: u64,
    ) -> Result<Self> {
        let by_lag = (0..max_lag.max(1))
            .map(|d| partition_event_probs(spec, map, 0, d, k_grid, reps, seed))
            .collect::<Result<_>>()?;
        Self::new(by_lag)
    }

    pub fn lag(&self, d: usize) -> &EventProbs {
        &self.by_lag[d.min(self.by_lag.len() - 1)]
    }
}

impl EventSource for LagEvents {
    fn events(&self, i: usize, j: usize) -> &EventProbs {
        self.lag(i.abs_diff(j))
    }
}

/// The same cell probabilities for every pair.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformEvents(pub EventProbs);

impl EventSource for UniformEvents {
    fn events(&self, _i: usize, _j: usize) -> &EventProbs {
        &self.0
    }
}

/// `log²(i+1)/i²` for the 1-based index `i`.
pub fn summability_weight(i: usize) -> f64 {
    let i = i as f64;
    (i + 1.0).ln().powi(2) / (i * i)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummabilityReport {
    /// `(n, total(n))`, including `n_max/2` when it was not on the grid.
    pub totals: Vec<(usize, f64)>,
    pub pass: bool,
}

impl SummabilityReport {
    pub fn total(&self, n: usize) -> Option<f64> {
        self.totals.iter().find(|t| t.0 == n).map(|t| t.1)
    }
}

/// `Σ_{i≤n} w_i Σ_{i≤j≤n} Σ_cells ψ_{i,k}·P(cell)` for each `n` of the grid.
///
/// Conditional expectations of `ψ` given a cell are replaced by the
/// unconditional bounds of the table, which over-states the series.
pub fn summability_diagnostic<E: EventSource + ?Sized>(
    psi: &PsiBoundTable<f64>,
    events: &E,
    n_grid: &[usize],
) -> Result<SummabilityReport> {
    let n_max = *n_grid.iter().max().ok_or(Error::EmptySample)?;
    if n_grid.contains(&0) {
        return Err(Error::EmptySample);
    }
    if n_max > psi.len() {
        return Err(Error::IndexMismatch(format!(
            "grid reaches n = {n_max} but the bound table covers {} nodes",
            psi.len()
        )));
    }
    // row[i] holds the inner sums over j ≤ n for each grid n, built by one
    // sweep over j per i.
    let mut sizes: Vec<usize> = n_grid.to_vec();
    if n_max >= 2 && !sizes.contains(&(n_max / 2)) {
        sizes.push(n_max / 2);
    }
    sizes.sort_unstable();
    sizes.dedup();
    let per_i: Vec<Vec<f64>> = (0..n_max)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let w = summability_weight(i + 1) * psi.constant(i);
            let mut out = vec![0.0; sizes.len()];
            let mut acc = 0.0;
            let mut s = 0;
            for j in i..n_max {
                while s < sizes.len() && sizes[s] <= j {
                    out[s] = acc;
                    s += 1;
                }
                acc += psi.weighted(i, events.events(i, j))? * psi.constant(j);
            }
            while s < sizes.len() {
                out[s] = acc;
                s += 1;
            }
            // Rows with i ≥ n do not belong to total(n).
            for (slot, &n) in out.iter_mut().zip(&sizes) {
                *slot = if i < n { *slot * w } else { 0.0 };
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let totals: Vec<(usize, f64)> = sizes
        .iter()
        .enumerate()
        .map(|(s, &n)| (n, per_i.iter().map(|row| row[s]).sum()))
        .collect();
    let report = SummabilityReport {
        pass: false,
        totals,
    };
    let pass = plateau(report.total(n_max / 2).unwrap_or(0.0), report.total(n_max).unwrap_or(0.0));
    Ok(SummabilityReport { pass, ..report })
}

/// Plateau rule on a doubling step: `last − half < 5%·half`.
pub fn plateau(half: f64, last: f64) -> bool {
    if half == 0.0 {
        return last == 0.0;
    }
    last - half < PLATEAU_TOLERANCE * half
}

/// `(sup_i Σ_{j≥i} P(ψ-carrying cell)) · sup ψ · Σ_{i≤n} w_i`, the ceiling
/// obtained by pulling the largest bound out of the series.
pub fn summability_ceiling<E: EventSource + ?Sized>(
    psi: &PsiBoundTable<f64>,
    events: &E,
    n: usize,
) -> Result<f64> {
    let m = psi.radii().len() - 1;
    let mut sup_mass: f64 = 0.0;
    let mut sup_psi: f64 = 0.0;
    for i in 0..n {
        let row: Vec<f64> = (0..=m).map(|k| psi.bound(i, k)).collect();
        sup_psi = sup_psi.max(row[0]);
        let mut mass = 0.0;
        for j in i..n {
            let e = events.events(i, j);
            if e.cells.len() != m {
                return Err(Error::IndexMismatch("event cells do not match radii".into()));
            }
            mass += if row[0] > 0.0 { e.origin } else { 0.0 };
            mass += e
                .cells
                .iter()
                .zip(&row[1..])
                .filter(|(_, b)| **b > 0.0)
                .map(|(p, _)| p)
                .sum::<f64>();
            mass += if row[m] > 0.0 { e.tail } else { 0.0 };
        }
        sup_mass = sup_mass.max(mass);
    }
    let weights: f64 = (1..=n).map(summability_weight).sum();
    Ok(sup_mass * sup_psi * weights)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionReport {
    pub k: f64,
    /// `(n, sup_i Σ_j P(gap_ij ≤ k))`.
    pub estimates: Vec<(usize, f64)>,
    pub pass: bool,
}

/// Monte Carlo `sup_i Σ_j P(|ζ_i − ζ_j| ≤ k)` (pair gap `|ζ_ij|` for pair models).
pub fn dispersion_check(spec: &ModelSpec, k: f64, n: usize, reps: u64, seed: u64) -> Result<f64> {
    if k.is_nan() || k < 0.0 {
        return Err(invalid("k", "radius must be nonnegative"));
    }
    if n == 0 || reps == 0 {
        return Err(Error::EmptySample);
    }
    let base = Stream::new(seed, &[tag::EVENTS]);
    let counts = par_sum_rows(reps, n, |r| {
        let s = base.child(r);
        Ok((0..n)
            .map(|i| (0..n).filter(|&j| spec.gap(s, i, j) <= k).count() as f64)
            .collect())
    })?;
    Ok(counts.into_iter().fold(0.0, f64::max) / reps as f64)
}

/// [`dispersion_check`] over a doubling grid; passes when the last step plateaus.
pub fn dispersion_sweep(
    spec: &ModelSpec,
    k: f64,
    n_grid: &[usize],
    reps: u64,
    seed: u64,
) -> Result<DispersionReport> {
    if n_grid.len() < 2 {
        return Err(invalid("n_grid", "needs at least two sizes"));
    }
    let estimates: Vec<(usize, f64)> = n_grid
        .iter()
        .map(|&n| Ok((n, dispersion_check(spec, k, n, reps, seed)?)))
        .collect::<Result<_>>()?;
    let last = estimates[estimates.len() - 1].1;
    let prev = estimates[estimates.len() - 2].1;
    Ok(DispersionReport {
        k,
        estimates,
        pass: plateau(prev, last),
    })
}

/// Cell radii `k_m = m` used for the model's bounds.
pub fn default_grid(spec: &ModelSpec) -> Vec<f64> {
    let m = match (spec.kind.uses_pairs(), spec.effective_params().link_band()) {
        (true, Some(band)) => band + 1,
        _ => 8,
    };
    (1..=m).map(|k| k as f64).collect()
}

/// The `c = 1` map, whose levels are link probabilities at a given gap.
pub fn event_map(spec: &ModelSpec) -> Result<LambdaMap<f64>> {
    let p = spec.effective_params();
    LambdaMap::unnormalized(p.alpha0, p.alpha_zeta)
}

/// Ingredients of the analytic covariance and maximal-inequality bounds.
#[derive(Debug, Clone)]
pub struct BoundModel {
    pub psi: PsiBoundTable<f64>,
    pub events: LagEvents,
}

impl BoundModel {
    /// `ψ` bounds for each observed node plus lag-stationary cell probabilities.
    ///
    /// Supported: degree in the pair models (truncation bound, needs finite
    /// `κ_u`) and degree in the distance model (logistic bound).
    pub fn estimate(spec: &ModelSpec, n: usize, padded: bool, reps: u64, seed: u64) -> Result<Self> {
        if spec.stat != StatKind::Degree {
            return Err(Error::UnsupportedModel(format!(
                "no closed-form mixingale bound for {:?}",
                spec.stat
            )));
        }
        let grid = default_grid(spec);
        let radii: Vec<f64> = std::iter::once(0.0).chain(grid.iter().copied()).collect();
        let map = event_map(spec)?;
        let event_reps = reps.max(1000);
        let psi = match spec.kind {
            ModelKind::Neighborhood | ModelKind::Utility => {
                let kappa = spec.effective_params().kappa_u;
                if kappa.is_infinite() {
                    return Err(Error::UnsupportedModel(
                        "truncation bound needs a finite kappa_u".into(),
                    ));
                }
                let mu = spec.mean(n, reps, seed, padded)?;
                let second = second_moments(spec, n, reps, seed, padded)?;
                PsiBoundTable::from_fn(n, radii, |i, k| {
                    psi_bound_neighborhood(k, kappa, mu[i].abs(), second[i]).unwrap_or(f64::INFINITY)
                })?
            }
            ModelKind::Distance => {
                let offset = if padded { spec.padding()? } else { 0 };
                let close = close_pair_probs(spec, n, offset, &radii, event_reps, seed)?;
                let bounds = close
                    .iter()
                    .map(|per_k| {
                        radii
                            .iter()
                            .zip(per_k)
                            .map(|(&k, probs)| psi_bound_logistic(k, probs))
                            .collect::<Result<Vec<f64>>>()
                    })
                    .collect::<Result<_>>()?;
                PsiBoundTable::new(radii, bounds)?
            }
        };
        let max_lag = match spec.link_reach() {
            Some(r) if spec.kind.uses_pairs() => (r + 2).min(n),
            _ => n,
        };
        let events = LagEvents::estimate(spec, &map, &grid, max_lag, event_reps, seed)?;
        Ok(Self { psi, events })
    }

    /// `Σ_cells ψ_i · P(cell of (i, j))`, without the `2K c_i c_j` factor.
    pub fn pair_sum(&self, i: usize, j: usize) -> Result<f64> {
        self.psi.weighted(i, self.events.events(i, j))
    }
}

/// Monte Carlo `E[v_i²]` on a stream disjoint from the experiments.
pub fn second_moments(spec: &ModelSpec, n: usize, reps: u64, seed: u64, padded: bool) -> Result<Vec<f64>> {
    let reps = reps.max(1000);
    let base = Stream::new(seed, &[tag::MOMENTS]);
    let sums = par_sum_rows(reps, n, |r| {
        Ok(spec
            .simulate_stream(base.child(r), n, padded)?
            .v
            .into_iter()
            .map(|x| x * x)
            .collect())
    })?;
    Ok(sums.into_iter().map(|s| s / reps as f64).collect())
}

/// `close[i][m][j] = P(|ζ_i − ζ_j| ≤ radii[m])` by Monte Carlo.
fn close_pair_probs(
    spec: &ModelSpec,
    n: usize,
    offset: usize,
    radii: &[f64],
    reps: u64,
    seed: u64,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let base = Stream::new(seed, &[tag::EVENTS, u64::MAX]);
    let width = radii.len() * n;
    let sums = par_sum_rows(reps, n * width, |r| {
        let s = base.child(r);
        let mut row = vec![0.0; n * width];
        for i in 0..n {
            for j in 0..n {
                let gap = spec.gap(s, i + offset, j + offset);
                for (m, &k) in radii.iter().enumerate() {
                    if gap <= k {
                        row[i * width + m * n + j] = 1.0;
                    }
                }
            }
        }
        Ok(row)
    })?;
    Ok((0..n)
        .map(|i| {
            (0..radii.len())
                .map(|m| {
                    (0..n)
                        .map(|j| sums[i * width + m * n + j] / reps as f64)
                        .collect()
                })
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceCheck {
    pub i: usize,
    pub j: usize,
    pub cov_hat: f64,
    pub se: f64,
    pub bound: f64,
    pub margin: f64,
    /// `cov_hat ≤ bound + margin`.
    pub pass: bool,
    /// `|cov_hat| ≤ margin`, checked only beyond the independence radius.
    pub zero_pass: Option<bool>,
}

/// Covariance bound `2K c_i c_j Σ_cells ψ·P` against Monte Carlo covariances
/// for every pair `i ≤ j` of an `n`-node sample.
pub fn covariance_sweep(
    spec: &ModelSpec,
    n: usize,
    reps: u64,
    seed: u64,
    k_const: f64,
) -> Result<Vec<CovarianceCheck>> {
    if reps < 2 {
        return Err(invalid("reps", "need at least two replications"));
    }
    let bounds = BoundModel::estimate(spec, n, false, reps, seed)?;
    let draws: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|r| Ok(spec.simulate(seed, r, n, false)?.v))
        .collect::<Result<_>>()?;
    let rf = reps as f64;
    let means: Vec<f64> = (0..n)
        .map(|i| draws.iter().map(|d| d[i]).sum::<f64>() / rf)
        .collect();
    let independence = independence_radius(spec);
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let prods: Vec<f64> = draws
                .iter()
                .map(|d| (d[i] - means[i]) * (d[j] - means[j]))
                .collect();
            let cov_hat = prods.iter().sum::<f64>() / rf;
            let var = prods.iter().map(|p| (p - cov_hat).powi(2)).sum::<f64>() / (rf - 1.0);
            let se = (var / rf).sqrt();
            let margin = SE_MULTIPLIER * se;
            let bound = 2.0
                * k_const
                * bounds.psi.constant(i)
                * bounds.psi.constant(j)
                * bounds.pair_sum(i, j)?;
            out.push(CovarianceCheck {
                i,
                j,
                cov_hat,
                se,
                bound,
                margin,
                pass: cov_hat <= bound + margin,
                zero_pass: independence
                    .filter(|&r| j - i > r)
                    .map(|_| cov_hat.abs() <= margin),
            });
        }
    }
    Ok(out)
}

/// Single-pair version of [`covariance_sweep`].
pub fn covariance_bound_check(
    spec: &ModelSpec,
    i: usize,
    j: usize,
    n: usize,
    reps: u64,
    seed: u64,
) -> Result<CovarianceCheck> {
    if i >= n || j >= n {
        return Err(Error::IndexMismatch(format!("pair ({i}, {j}) outside n = {n}")));
    }
    let (a, b) = (i.min(j), i.max(j));
    covariance_sweep(spec, n, reps, seed, 1.0)?
        .into_iter()
        .find(|c| c.i == a && c.j == b)
        .ok_or_else(|| Error::IndexMismatch("pair not produced".into()))
}

/// Index gap beyond which pair-model statistics share no inputs: `2κ_u + 2`.
pub fn independence_radius(spec: &ModelSpec) -> Option<usize> {
    let kappa = spec.effective_params().kappa_u;
    (spec.kind.uses_pairs() && kappa.is_finite()).then(|| (2.0 * kappa + 2.0).floor() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighborhood_bound_examples() {
        assert_eq!(psi_bound_neighborhood(2.0, 1.0, 0.76, 1.2).unwrap(), 0.0);
        let b = psi_bound_neighborhood(1.0, 1.0, 0.76, 1.2).unwrap();
        assert!((b - (0.76 + 1.2f64.sqrt())).abs() < 1e-15);
        assert!((b - 1.8554).abs() < 1e-4);
        assert!(b >= psi_bound_neighborhood(5.0, 1.0, 0.76, 1.2).unwrap());
        assert!(psi_bound_neighborhood(1.0, 1.0, -0.1, 1.2).is_err());
        assert!(psi_bound_neighborhood(1.0, 1.0, 0.1, -1.2).is_err());
    }

    #[test]
    fn logistic_bound_examples() {
        assert_eq!(psi_bound_logistic(1.0, &[0.0; 4]).unwrap(), 0.0);
        let all = psi_bound_logistic(2.0, &[1.0; 5]).unwrap();
        assert!((all - 3.0 * (-2.0f64).exp() * 5.0).abs() < 1e-14);
        let mixed = psi_bound_logistic(1.0, &[1.0, 0.5, 0.0]).unwrap();
        assert!((mixed - (0.5 + 4.5 * (-1.0f64).exp())).abs() < 1e-14);
        assert!((mixed - 2.1554).abs() < 1e-4);
        assert!(psi_bound_logistic(1.0, &[1.1]).is_err());
    }

    #[test]
    fn table_envelope_is_nonincreasing() {
        let t = PsiBoundTable::new(vec![0.0, 1.0, 2.0], vec![vec![3.0, 3.2, 1.0]]).unwrap();
        assert_eq!(t.bound(0, 1), 3.0);
        assert_eq!(t.bound(0, 2), 1.0);
        assert!(PsiBoundTable::new(vec![1.0, 2.0], vec![vec![1.0, 1.0]]).is_err());
        assert!(PsiBoundTable::new(vec![0.0, 1.0], vec![vec![1.0]]).is_err());
        assert!(PsiBoundTable::new(vec![0.0, 1.0], vec![vec![1.0, -1.0]]).is_err());
    }

    fn point(origin: f64, cells: Vec<f64>, tail: f64) -> EventProbs {
        EventProbs { origin, cells, tail }
    }

    #[test]
    fn summability_zero_bounds_pass() {
        let psi = PsiBoundTable::from_fn(64, vec![0.0, 1.0], |_, _| 0.0).unwrap();
        let r = summability_diagnostic(&psi, &UniformEvents(point(1.0, vec![0.0], 0.0)), &[16, 32, 64])
            .unwrap();
        assert!(r.pass);
        assert!(r.totals.iter().all(|t| t.1 == 0.0));
    }

    #[test]
    fn summability_matches_direct_triple_sum() {
        let psi = PsiBoundTable::from_fn(12, vec![0.0, 1.0, 2.0], |i, k| (1.0 + i as f64 * 0.1) / (1.0 + k))
            .unwrap();
        let ev = LagEvents::new(vec![
            point(1.0, vec![0.0, 0.0], 0.0),
            point(0.0, vec![0.6, 0.3], 0.1),
            point(0.0, vec![0.1, 0.5], 0.4),
            point(0.0, vec![0.0, 0.0], 1.0),
        ])
        .unwrap();
        let r = summability_diagnostic(&psi, &ev, &[5, 12]).unwrap();
        for n in [5usize, 6, 12] {
            let mut direct = 0.0;
            for i in 0..n {
                let mut inner = 0.0;
                for j in i..n {
                    let e = ev.events(i, j);
                    inner += e.origin * psi.bound(i, 0)
                        + e.cells[0] * psi.bound(i, 1)
                        + e.cells[1] * psi.bound(i, 2)
                        + e.tail * psi.bound(i, 2);
                }
                direct += summability_weight(i + 1) * inner;
            }
            assert!((r.total(n).unwrap() - direct).abs() < 1e-12, "n {n}");
        }
    }

    #[test]
    fn dense_counterexample_fails() {
        let psi = PsiBoundTable::from_fn(2048, vec![0.0, 1.0], |_, _| 1.0).unwrap();
        let r = summability_diagnostic(&psi, &UniformEvents(point(0.0, vec![1.0], 0.0)), &[512, 1024, 2048])
            .unwrap();
        assert!(!r.pass);
        assert!(r.total(2048).unwrap() > 1.5 * r.total(1024).unwrap());
    }

    #[test]
    fn weighted_rejects_misaligned_cells() {
        let psi = PsiBoundTable::from_fn(1, vec![0.0, 1.0], |_, _| 1.0).unwrap();
        assert!(psi.weighted(0, &point(0.0, vec![0.5, 0.5], 0.0)).is_err());
    }

    #[test]
    fn plateau_rule() {
        assert!(plateau(0.0, 0.0));
        assert!(!plateau(0.0, 1e-9));
        assert!(plateau(10.0, 10.4));
        assert!(!plateau(10.0, 10.6));
    }

    #[test]
    fn dispersion_examples() {
        let spec = ModelSpec::new(
            ModelKind::Distance,
            crate::models::ModelParams::new(0.0, -1.0, f64::INFINITY, 1.0).unwrap(),
            StatKind::Degree,
        )
        .unwrap();
        let at_zero = dispersion_check(&spec, 0.0, 50, 20, 3).unwrap();
        assert_eq!(at_zero, 1.0);
        let unit = dispersion_check(&spec, 1.0, 100, 50, 3).unwrap();
        assert!(unit <= 5.0);
        let mut iid = spec;
        iid.law = crate::models::ZetaLaw::IidUniform;
        assert_eq!(dispersion_check(&iid, 1.0, 100, 5, 3).unwrap(), 100.0);
    }

    #[test]
    fn independence_radius_for_unit_kappa() {
        let spec = ModelSpec::neighborhood_degree(1.0).unwrap();
        assert_eq!(independence_radius(&spec), Some(4));
    }
}
