//! Proximity `g_ij`, the `Λ` map between proximity levels and radii, and the
//! partition of pairs into proximity cells.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::models::{ModelParams, NodeCharacteristics, PairField};
use crate::scalar::{logistic_cdf, logit, Real};

/// `Λ(k) = c·H(α₀ + α_ζ k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaMap<F> {
    pub alpha0: F,
    pub alpha_zeta: F,
    pub c: F,
}

impl<F: Real> LambdaMap<F> {
    pub fn with_scale(alpha0: F, alpha_zeta: F, c: F) -> Result<Self> {
        if !alpha0.is_finite() {
            return Err(invalid("alpha0", "must be finite"));
        }
        if !(alpha_zeta < F::zero()) || !alpha_zeta.is_finite() {
            return Err(invalid("alpha_zeta", "must be negative and finite"));
        }
        if !(c > F::zero()) || !c.is_finite() {
            return Err(invalid("c", "must be positive and finite"));
        }
        Ok(Self {
            alpha0,
            alpha_zeta,
            c,
        })
    }

    /// `c = (1 + e^{α₀}) e^{−α₀}`, so that `Λ(0) = 1`.
    pub fn normalized(alpha0: F, alpha_zeta: F) -> Result<Self> {
        Self::with_scale(alpha0, alpha_zeta, F::one() / logistic_cdf(alpha0))
    }

    /// `c = 1`: `Λ(k) = H(α₀ + α_ζ k)` is the link probability at gap `k`.
    /// Then `1{g ≤ Λ(k)} = 1{gap ≥ k}` pointwise, but `Λ(0) = H(α₀) < 1`.
    pub fn unnormalized(alpha0: F, alpha_zeta: F) -> Result<Self> {
        Self::with_scale(alpha0, alpha_zeta, F::one())
    }

    pub fn from_params(params: &ModelParams<F>) -> Result<Self> {
        Self::normalized(params.alpha0, params.alpha_zeta)
    }

    pub fn at_origin(&self) -> F {
        let v = self.c * logistic_cdf(self.alpha0);
        if (v - F::one()).abs() <= F::lit(4.0) * F::epsilon() {
            F::one()
        } else {
            v.min(F::one())
        }
    }

    pub fn lambda(&self, k: F) -> Result<F> {
        if k.is_nan() || k < F::zero() {
            return Err(Error::OutOfDomain {
                value: k.as_f64(),
                domain: "[0, inf)",
            });
        }
        if k.is_zero() {
            return Ok(self.at_origin());
        }
        Ok((self.c * logistic_cdf(self.alpha0 + self.alpha_zeta * k)).min(F::one()))
    }

    fn check_level(g: F) -> Result<()> {
        if g > F::zero() && g <= F::one() {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                value: g.as_f64(),
                domain: "(0, 1]",
            })
        }
    }

    /// Closed-form inverse. Levels at or above `Λ(0)` map to radius 0.
    pub fn inverse(&self, g: F) -> Result<F> {
        Self::check_level(g)?;
        if g >= self.at_origin() {
            return Ok(F::zero());
        }
        Ok(((logit(g / self.c) - self.alpha0) / self.alpha_zeta).max(F::zero()))
    }

    /// Inverse by bisection on `k`, to `1e−12` absolute or 200 halvings.
    pub fn inverse_bisect(&self, g: F) -> Result<F> {
        Self::check_level(g)?;
        if g >= self.at_origin() {
            return Ok(F::zero());
        }
        let mut lo = F::zero();
        let mut hi = F::one();
        while self.lambda(hi)? >= g {
            lo = hi;
            hi = hi + hi;
            if !hi.is_finite() {
                return Err(Error::OutOfDomain {
                    value: g.as_f64(),
                    domain: "range of the map",
                });
            }
        }
        let tol = F::lit(1e-12);
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = (lo + hi) / (F::one() + F::one());
            if self.lambda(mid)? >= g {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo + hi) / (F::one() + F::one()))
    }
}

/// `α_ζ⁻¹(log(g/(1−g)) − α₀)`: the characteristic gap whose link probability is `g`.
pub fn g_to_distance<F: Real>(g: F, params: &ModelParams<F>) -> Result<F> {
    if !(g > F::zero() && g < F::one()) {
        return Err(Error::OutOfDomain {
            value: g.as_f64(),
            domain: "(0, 1)",
        });
    }
    if !(params.alpha_zeta < F::zero()) {
        return Err(invalid("alpha_zeta", "must be negative to invert"));
    }
    Ok((logit(g) - params.alpha0) / params.alpha_zeta)
}

/// Access to a proximity matrix, possibly without materializing it.
///
/// Comparisons go through [`score`](Self::score), a strictly increasing
/// transform of `g_ij`. Lazy logistic proximities use the log-odds, which
/// keeps far pairs distinguishable after `g` itself underflows to zero.
pub trait Proximity<F: Real>: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn score(&self, i: usize, j: usize) -> F;

    fn score_to_g(&self, score: F) -> F;

    fn g(&self, i: usize, j: usize) -> F {
        if i == j {
            F::one()
        } else {
            self.score_to_g(self.score(i, j))
        }
    }

    /// Characteristic radius at a score level, when the proximity has one.
    fn radius(&self, _score: F) -> Option<F> {
        None
    }

    /// The `m` nodes closest to `i` with their scores, by descending score
    /// and ascending index among ties. Always starts with `(i, ∞-or-max)`.
    fn ranked_prefix(&self, i: usize, m: usize) -> Vec<(usize, F)>;

    fn neighbor_order(&self, i: usize) -> Vec<usize> {
        self.ranked_prefix(i, self.len())
            .into_iter()
            .map(|(j, _)| j)
            .collect()
    }
}

#[inline]
fn rank_cmp<F: Real>(a: &(usize, F), b: &(usize, F)) -> std::cmp::Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(a.0.cmp(&b.0))
}

/// Takes `m` items from a weakly decreasing score sequence, then fixes the
/// index order within the tie group straddling position `m`.
fn finish_prefix<F: Real>(mut items: impl Iterator<Item = (usize, F)>, m: usize) -> Vec<(usize, F)> {
    let mut out: Vec<(usize, F)> = items.by_ref().take(m).collect();
    if let Some(&(_, last)) = out.last() {
        for item in items {
            if item.1 < last {
                break;
            }
            out.push(item);
        }
    }
    out.sort_by(rank_cmp);
    out.truncate(m);
    out
}

/// Dense symmetric proximity with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityMatrix<F> {
    n: usize,
    g: Vec<F>,
}

impl<F: Real> ProximityMatrix<F> {
    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let mut g = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            g.extend_from_slice(row);
        }
        let m = Self { n, g };
        m.validate()?;
        Ok(m)
    }

    /// Builds from the upper triangle; the diagonal is set to one.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> F) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let mut g = vec![F::one(); n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        let m = Self { n, g };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.g[i * n + i] != F::one() {
                return Err(Error::IndexMismatch(format!("g[{i}][{i}] must be 1")));
            }
            for j in 0..n {
                let v = self.g[i * n + j];
                if !(v >= F::zero() && v <= F::one()) {
                    return Err(Error::OutOfDomain {
                        value: v.as_f64(),
                        domain: "[0, 1]",
                    });
                }
                if v != self.g[j * n + i] {
                    return Err(Error::IndexMismatch(format!("g[{i}][{j}] != g[{j}][{i}]")));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.g[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.g[i * self.n..(i + 1) * self.n]
    }

    /// Materializes any proximity.
    pub fn from_proximity<P: Proximity<F> + ?Sized>(p: &P) -> Result<Self> {
        Self::from_fn(p.len(), |i, j| p.g(i, j))
    }
}

impl<F: Real> Proximity<F> for ProximityMatrix<F> {
    fn len(&self) -> usize {
        self.n
    }

    fn score(&self, i: usize, j: usize) -> F {
        self.get(i, j)
    }

    fn score_to_g(&self, score: F) -> F {
        score
    }

    fn ranked_prefix(&self, i: usize, m: usize) -> Vec<(usize, F)> {
        let mut row: Vec<(usize, F)> = self.row(i).iter().copied().enumerate().collect();
        // The diagonal is maximal but may tie with other unit entries.
        row[i].1 = F::infinity();
        let m = m.min(self.n);
        if m < self.n && m > 0 {
            row.select_nth_unstable_by(m - 1, rank_cmp);
            row.truncate(m);
        }
        row.sort_by(rank_cmp);
        row.truncate(m);
        row[..].iter_mut().for_each(|e| {
            if e.0 == i {
                e.1 = F::one();
            }
        });
        row
    }
}

/// `g_ij = H(α₀ + α_ζ|ζ_i − ζ_j|)` with `g_ii = 1`.
pub fn link_probability_matrix<F: Real>(
    zeta: &NodeCharacteristics<F>,
    params: &ModelParams<F>,
) -> Result<ProximityMatrix<F>> {
    if !(params.alpha_zeta < F::zero()) {
        return Err(invalid("alpha_zeta", "must be negative for a proximity"));
    }
    let z = zeta.as_slice();
    ProximityMatrix::from_fn(z.len(), |i, j| {
        logistic_cdf(params.alpha0 + params.alpha_zeta * (z[i] - z[j]).abs())
    })
}

/// Lazy logistic proximity over scalar node locations.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeProximity<F> {
    z: Vec<F>,
    sorted: Vec<usize>,
    position: Vec<usize>,
    alpha0: F,
    alpha_zeta: F,
}

impl<F: Real> NodeProximity<F> {
    pub fn new(z: Vec<F>, alpha0: F, alpha_zeta: F) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::EmptySample);
        }
        if !(alpha_zeta < F::zero()) {
            return Err(invalid("alpha_zeta", "must be negative for a proximity"));
        }
        let mut sorted: Vec<usize> = (0..z.len()).collect();
        sorted.sort_by(|&a, &b| {
            z[a].partial_cmp(&z[b])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut position = vec![0; z.len()];
        for (p, &i) in sorted.iter().enumerate() {
            position[i] = p;
        }
        Ok(Self {
            z,
            sorted,
            position,
            alpha0,
            alpha_zeta,
        })
    }
}

impl<F: Real> Proximity<F> for NodeProximity<F> {
    fn len(&self) -> usize {
        self.z.len()
    }

    fn score(&self, i: usize, j: usize) -> F {
        if i == j {
            return F::infinity();
        }
        self.alpha0 + self.alpha_zeta * (self.z[i] - self.z[j]).abs()
    }

    fn score_to_g(&self, score: F) -> F {
        logistic_cdf(score)
    }

    fn radius(&self, score: F) -> Option<F> {
        Some(((score - self.alpha0) / self.alpha_zeta).max(F::zero()))
    }

    fn ranked_prefix(&self, i: usize, m: usize) -> Vec<(usize, F)> {
        let n = self.z.len();
        let p = self.position[i];
        let (mut left, mut right) = (p, p + 1);
        let walk = std::iter::once((i, F::infinity())).chain(std::iter::from_fn(move || {
            let l = (left > 0).then(|| self.sorted[left - 1]);
            let r = (right < n).then(|| self.sorted[right]);
            let pick = match (l, r) {
                (None, None) => return None,
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (Some(a), Some(b)) => {
                    let (sa, sb) = (self.score(i, a), self.score(i, b));
                    if sa > sb || (sa == sb && a < b) {
                        a
                    } else {
                        b
                    }
                }
            };
            if Some(pick) == l {
                left -= 1;
            } else {
                right += 1;
            }
            Some((pick, self.score(i, pick)))
        }));
        finish_prefix(walk, m.min(n))
    }
}

/// Lazy logistic proximity over pair characteristics `ζ_ij ∈ [|i−j|−1, |i−j|)`,
/// observed on the window `offset..offset + n` of a larger field.
///
/// Uses the untruncated kernel `H(α₀ + α_ζ|ζ_ij|)`; see [`PairProximity::truncated_g`]
/// for the link probability including the `|ζ_ij| < κ_u` indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairProximity<F> {
    field: PairField,
    offset: usize,
    n: usize,
    alpha0: F,
    alpha_zeta: F,
}

impl<F: Real> PairProximity<F> {
    pub fn new(field: PairField, offset: usize, n: usize, alpha0: F, alpha_zeta: F) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        if !(alpha_zeta < F::zero()) {
            return Err(invalid("alpha_zeta", "must be negative for a proximity"));
        }
        Ok(Self {
            field,
            offset,
            n,
            alpha0,
            alpha_zeta,
        })
    }

    pub fn zeta(&self, i: usize, j: usize) -> F {
        self.field.at(i + self.offset, j + self.offset)
    }

    /// `P(d_ij = 1 | ζ)` under the utility rule with radius `kappa_u`.
    pub fn truncated_g(&self, i: usize, j: usize, kappa_u: F) -> F {
        if i == j {
            return F::one();
        }
        let z = self.zeta(i, j).abs();
        if z < kappa_u {
            logistic_cdf(self.alpha0 + self.alpha_zeta * z)
        } else {
            F::zero()
        }
    }
}

impl<F: Real> Proximity<F> for PairProximity<F> {
    fn len(&self) -> usize {
        self.n
    }

    fn score(&self, i: usize, j: usize) -> F {
        if i == j {
            return F::infinity();
        }
        self.alpha0 + self.alpha_zeta * self.zeta(i, j).abs()
    }

    fn score_to_g(&self, score: F) -> F {
        logistic_cdf(score)
    }

    fn radius(&self, score: F) -> Option<F> {
        Some(((score - self.alpha0) / self.alpha_zeta).max(F::zero()))
    }

    fn ranked_prefix(&self, i: usize, m: usize) -> Vec<(usize, F)> {
        // Gap-d pairs have ζ in [d−1, d), so whole gaps are ordered; only the
        // (at most two) nodes at one gap need comparing.
        let n = self.n;
        let m = m.min(n);
        let mut out = Vec::with_capacity(m);
        if m == 0 {
            return out;
        }
        out.push((i, F::infinity()));
        let mut d = 1;
        while out.len() < m {
            let left = (d <= i).then(|| (i - d, self.score(i, i - d)));
            let right = (i + d < n).then(|| (i + d, self.score(i, i + d)));
            match (left, right) {
                (None, None) => break,
                (Some(x), None) | (None, Some(x)) => out.push(x),
                (Some(a), Some(b)) => {
                    let (first, second) = if rank_cmp(&a, &b).is_le() { (a, b) } else { (b, a) };
                    out.push(first);
                    if out.len() < m {
                        out.push(second);
                    }
                }
            }
            d += 1;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleReport<F> {
    /// Ordered triples `(i, k, j)` with `1/g_ij > 1/g_ik + 1/g_kj`.
    pub violations: Vec<(usize, usize, usize)>,
    /// Largest excess `1/g_ij − 1/g_ik − 1/g_kj`; infinite for zero-proximity violations.
    pub max_violation: F,
}

pub const TRIANGLE_CHECK_MAX_N: usize = 512;

pub fn triangle_check<F: Real>(g: &ProximityMatrix<F>) -> Result<TriangleReport<F>> {
    triangle_check_up_to(g, TRIANGLE_CHECK_MAX_N)
}

/// [`triangle_check`] with an explicit size cap (the scan is cubic).
pub fn triangle_check_up_to<F: Real>(g: &ProximityMatrix<F>, max_n: usize) -> Result<TriangleReport<F>> {
    let n = g.len();
    if n > max_n {
        return Err(invalid("n", format!("triangle check capped at n = {max_n}, got {n}")));
    }
    let mut violations = Vec::new();
    let mut max_violation = F::zero();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let gij = g.get(i, j);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let (gik, gkj) = (g.get(i, k), g.get(k, j));
                if gik.is_zero() || gkj.is_zero() {
                    continue;
                }
                let excess = if gij.is_zero() {
                    F::infinity()
                } else {
                    gij.recip() - gik.recip() - gkj.recip()
                };
                if excess > F::zero() {
                    violations.push((i, k, j));
                    max_violation = max_violation.max(excess);
                }
            }
        }
    }
    Ok(TriangleReport {
        violations,
        max_violation,
    })
}

/// Cells of the proximity partition for one pair: `{g ≥ 1}`, then
/// `{Λ(k_m) < g ≤ Λ(k_{m−1})}` for `m = 1..M` with `Λ(k₀) := 1`, then the
/// remainder `{g ≤ Λ(k_M)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventProbs {
    pub origin: f64,
    pub cells: Vec<f64>,
    pub tail: f64,
}

impl EventProbs {
    pub fn total(&self) -> f64 {
        self.origin + self.cells.iter().sum::<f64>() + self.tail
    }

    /// Point mass on the cell containing `g`.
    pub fn degenerate(g: f64, levels: &[f64]) -> Self {
        let mut e = Self {
            origin: 0.0,
            cells: vec![0.0; levels.len()],
            tail: 0.0,
        };
        match classify(g, levels) {
            Cell::Origin => e.origin = 1.0,
            Cell::Ring(m) => e.cells[m] = 1.0,
            Cell::Tail => e.tail = 1.0,
        }
        e
    }

    fn from_counts(counts: &[u64], reps: u64) -> Self {
        let r = reps as f64;
        let m = counts.len() - 2;
        Self {
            origin: counts[0] as f64 / r,
            cells: counts[1..=m].iter().map(|&c| c as f64 / r).collect(),
            tail: counts[m + 1] as f64 / r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Origin,
    /// 0-based ring index `m − 1`.
    Ring(usize),
    Tail,
}

/// `levels[m] = Λ(k_{m+1})`, nonincreasing.
pub fn classify(g: f64, levels: &[f64]) -> Cell {
    if g >= 1.0 {
        return Cell::Origin;
    }
    match levels.iter().position(|&lam| g > lam) {
        Some(m) => Cell::Ring(m),
        None => Cell::Tail,
    }
}

pub fn check_grid(k_grid: &[f64]) -> Result<()> {
    if k_grid.is_empty()
        || k_grid[0].is_nan()
        || k_grid[0] < 0.0
        || k_grid.windows(2).any(|w| !(w[1] > w[0]))
    {
        return Err(Error::NonMonotoneGrid);
    }
    Ok(())
}

/// `Λ(k_m)` for each radius of a validated grid.
pub fn grid_levels(map: &LambdaMap<f64>, k_grid: &[f64]) -> Result<Vec<f64>> {
    check_grid(k_grid)?;
    k_grid.iter().map(|&k| map.lambda(k)).collect()
}

/// Random proximity of a pair under a model, one draw per `(seed, rep)`.
pub trait ProximitySampler: Sync {
    fn sample_g(&self, seed: u64, rep: u64, i: usize, j: usize) -> f64;
}

/// Monte Carlo cell probabilities of the pair `(i, j)` over `reps` draws.
pub fn partition_event_probs<S: ProximitySampler + ?Sized>(
    sampler: &S,
    map: &LambdaMap<f64>,
    i: usize,
    j: usize,
    k_grid: &[f64],
    reps: u64,
    seed: u64,
) -> Result<EventProbs> {
    if reps == 0 {
        return Err(Error::EmptySample);
    }
    let levels = grid_levels(map, k_grid)?;
    let slots = levels.len() + 2;
    let counts = (0..reps)
        .into_par_iter()
        .fold(
            || vec![0u64; slots],
            |mut acc, rep| {
                let slot = match classify(sampler.sample_g(seed, rep, i, j), &levels) {
                    Cell::Origin => 0,
                    Cell::Ring(m) => m + 1,
                    Cell::Tail => slots - 1,
                };
                acc[slot] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; slots],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(EventProbs::from_counts(&counts, reps))
}
