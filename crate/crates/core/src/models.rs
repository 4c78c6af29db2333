//! Characteristics, shocks and the three link-formation rules.
//!
//! All randomness comes from keyed [`Stream`]s, so a characteristic or shock
//! for a given node (pair) is the same whether it is read through a dense
//! matrix or lazily by the banded formation path.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{tag, Stream};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<F> {
    /// Utility intercept.
    pub alpha0: F,
    /// Homophily slope, nonpositive.
    pub alpha_zeta: F,
    /// Truncation radius of the neighborhood/utility rule; may be `+∞`.
    pub kappa_u: F,
    /// Spacing of the lattice node characteristics.
    pub spacing: F,
}

impl<F: Real> ModelParams<F> {
    pub fn new(alpha0: F, alpha_zeta: F, kappa_u: F, spacing: F) -> Result<Self> {
        let p = Self {
            alpha0,
            alpha_zeta,
            kappa_u,
            spacing,
        };
        p.validate()?;
        Ok(p)
    }

    /// `α₀ = 0`, `α_ζ = −1`: the neighborhood rule as a special case of the utility rule.
    pub fn neighborhood(kappa_u: F) -> Result<Self> {
        Self::new(F::zero(), -F::one(), kappa_u, F::one())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha0.is_finite() {
            return Err(invalid("alpha0", "must be finite"));
        }
        if self.alpha_zeta.is_nan() || self.alpha_zeta > F::zero() {
            return Err(invalid("alpha_zeta", "homophily requires alpha_zeta <= 0"));
        }
        if self.kappa_u.is_nan() || self.kappa_u <= F::zero() {
            return Err(invalid("kappa_u", "must be positive (or +inf)"));
        }
        if !(self.spacing > F::zero() && self.spacing.is_finite()) {
            return Err(invalid("spacing", "must be positive and finite"));
        }
        Ok(())
    }

    /// Largest `|i − j|` at which a pair-characteristic rule can still form a
    /// link (`ζ_ij ≥ |i−j| − 1` must fall below `κ_u`), or `None` when `κ_u = ∞`.
    pub fn link_band(&self) -> Option<usize> {
        if self.kappa_u.is_infinite() {
            None
        } else {
            Some(self.kappa_u.ceil().to_usize().expect("finite kappa"))
        }
    }
}

impl<F: Real> Default for ModelParams<F> {
    fn default() -> Self {
        Self {
            alpha0: F::zero(),
            alpha_zeta: -F::one(),
            kappa_u: F::one(),
            spacing: F::one(),
        }
    }
}

/// How scalar node locations are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZetaLaw {
    /// `ζ_i = s·i + U(−½, ½)`; at most `2(k/s + 1) + 1` nodes within `k` of any node.
    #[default]
    Lattice,
    /// `ζ_i ~ U(0, 1)` iid. Violates the dispersion condition; used as a counterexample.
    IidUniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeCharacteristics<F> {
    zeta: Vec<F>,
}

impl<F: Real> NodeCharacteristics<F> {
    pub fn new(zeta: Vec<F>) -> Result<Self> {
        if zeta.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(Self { zeta })
    }

    pub fn len(&self) -> usize {
        self.zeta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.zeta
    }
}

/// Symmetric matrix of pair characteristics `ζ_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCharacteristics<F> {
    n: usize,
    zeta: Vec<F>,
}

impl<F: Real> PairCharacteristics<F> {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> F) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let mut zeta = vec![F::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let z = f(i, j);
                zeta[i * n + j] = z;
                zeta[j * n + i] = z;
            }
        }
        Ok(Self { n, zeta })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.zeta[i * self.n + j]
    }
}

/// Link shocks `ε_ij`; `ε_ij` and `ε_ji` are separate draws.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockMatrix<F> {
    n: usize,
    eps: Vec<F>,
}

impl<F: Real> ShockMatrix<F> {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> F) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let mut eps = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                eps.push(f(i, j));
            }
        }
        Ok(Self { n, eps })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.eps[i * self.n + j]
    }

    pub fn off_diagonal(&self) -> impl Iterator<Item = F> + '_ {
        let n = self.n;
        self.eps
            .iter()
            .enumerate()
            .filter(move |(k, _)| k / n != k % n)
            .map(|(_, &e)| e)
    }
}

/// Directed binary network with zero diagonal, stored as sorted out-neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    out: Vec<Vec<usize>>,
}

impl AdjacencyMatrix {
    pub fn empty(n: usize) -> Self {
        Self {
            out: vec![Vec::new(); n],
        }
    }

    pub fn from_out_neighbors(mut out: Vec<Vec<usize>>) -> Result<Self> {
        let n = out.len();
        for (i, row) in out.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            if let Some(&j) = row.iter().find(|&&j| j >= n || j == i) {
                return Err(Error::IndexMismatch(format!(
                    "link {i} -> {j} is a self-loop or out of range for n = {n}"
                )));
            }
        }
        Ok(Self { out })
    }

    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        let mut out = Vec::with_capacity(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if row[i] != 0 {
                return Err(Error::IndexMismatch(format!("d[{i}][{i}] must be 0")));
            }
            let mut links = Vec::new();
            for (j, &d) in row.iter().enumerate() {
                match d {
                    0 => {}
                    1 => links.push(j),
                    other => {
                        return Err(Error::IndexMismatch(format!(
                            "d[{i}][{j}] = {other} is not binary"
                        )))
                    }
                }
            }
            out.push(links);
        }
        Ok(Self { out })
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.out[i].binary_search(&j).is_ok()
    }

    pub fn link_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let n = self.len();
        self.out
            .iter()
            .map(|row| {
                let mut dense = vec![0u8; n];
                for &j in row {
                    dense[j] = 1;
                }
                dense
            })
            .collect()
    }

    /// Relabels nodes: node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: perm.len(),
            });
        }
        let mut out = vec![Vec::new(); self.len()];
        for (i, row) in self.out.iter().enumerate() {
            out[perm[i]] = row.iter().map(|&j| perm[j]).collect();
        }
        Self::from_out_neighbors(out)
    }
}

/// Random-access node locations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeField {
    stream: Stream,
    law: ZetaLaw,
    spacing: f64,
}

impl NodeField {
    pub fn new(stream: Stream, law: ZetaLaw, spacing: f64) -> Self {
        Self {
            stream,
            law,
            spacing,
        }
    }

    /// Location of the node with 0-based index `i` (1-based label `i + 1`).
    #[inline]
    pub fn at<F: Real>(&self, i: usize) -> F {
        let u = self.stream.uniform_open(i as u64, 0);
        F::lit(match self.law {
            ZetaLaw::Lattice => self.spacing * (i + 1) as f64 + (u - 0.5),
            ZetaLaw::IidUniform => u,
        })
    }

    pub fn sample<F: Real>(&self, n: usize) -> Result<NodeCharacteristics<F>> {
        NodeCharacteristics::new((0..n).map(|i| self.at(i)).collect())
    }
}

/// Random-access pair characteristics: `ζ_ij = ζ_ji ~ U[|i−j|−1, |i−j|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairField {
    stream: Stream,
}

impl PairField {
    pub fn new(stream: Stream) -> Self {
        Self { stream }
    }

    #[inline]
    pub fn at<F: Real>(&self, i: usize, j: usize) -> F {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let u = self.stream.uniform(lo as u64, hi as u64);
        // The diagonal lands on [-1, 0) and is never used by a formation rule.
        F::lit((hi - lo) as f64 - 1.0 + u)
    }

    pub fn sample<F: Real>(&self, n: usize) -> Result<PairCharacteristics<F>> {
        PairCharacteristics::from_fn(n, |i, j| self.at(i, j))
    }
}

/// Random-access logistic shocks, independent across ordered pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShockField {
    stream: Stream,
}

impl ShockField {
    pub fn new(stream: Stream) -> Self {
        Self { stream }
    }

    #[inline]
    pub fn at<F: Real>(&self, i: usize, j: usize) -> F {
        F::lit(self.stream.logistic(i as u64, j as u64))
    }

    pub fn sample<F: Real>(&self, n: usize) -> Result<ShockMatrix<F>> {
        ShockMatrix::from_fn(n, |i, j| self.at(i, j))
    }
}

pub fn sample_node_characteristics<F: Real>(
    n: usize,
    params: &ModelParams<F>,
    seed: u64,
) -> Result<NodeCharacteristics<F>> {
    params.validate()?;
    NodeField::new(
        Stream::new(seed, &[tag::NODE]),
        ZetaLaw::Lattice,
        params.spacing.as_f64(),
    )
    .sample(n)
}

pub fn sample_pair_characteristics<F: Real>(n: usize, seed: u64) -> Result<PairCharacteristics<F>> {
    PairField::new(Stream::new(seed, &[tag::PAIR])).sample(n)
}

pub fn sample_logistic_shocks<F: Real>(n: usize, seed: u64) -> Result<ShockMatrix<F>> {
    ShockField::new(Stream::new(seed, &[tag::SHOCK])).sample(n)
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `d_ij = 1{α₀ + α_ζ |ζ_i − ζ_j| + ε_ij > 0}`.
pub fn form_network_distance<F: Real>(
    zeta: &NodeCharacteristics<F>,
    params: &ModelParams<F>,
    eps: &ShockMatrix<F>,
) -> Result<AdjacencyMatrix> {
    let n = zeta.len();
    check_dim(n, eps.len())?;
    let z = zeta.as_slice();
    let out = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| {
                    j != i
                        && distance_link(params.alpha0, params.alpha_zeta, (z[i] - z[j]).abs(), eps.get(i, j))
                })
                .collect()
        })
        .collect();
    Ok(AdjacencyMatrix { out })
}

/// `d_ij = 1{−|ζ_ij| + ε_ij > 0} · 1{|ζ_ij| < κ_u}`.
pub fn form_network_neighborhood<F: Real>(
    pair: &PairCharacteristics<F>,
    kappa_u: F,
    eps: &ShockMatrix<F>,
) -> Result<AdjacencyMatrix> {
    if kappa_u.is_nan() || kappa_u <= F::zero() {
        return Err(invalid("kappa_u", "must be positive"));
    }
    let n = pair.len();
    check_dim(n, eps.len())?;
    let out = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| {
                    let z = pair.get(i, j).abs();
                    j != i && -z + eps.get(i, j) > F::zero() && z < kappa_u
                })
                .collect()
        })
        .collect();
    Ok(AdjacencyMatrix { out })
}

/// `d_ij = 1{U_i(j) > 0}` with `U_i(j) = (α₀ + α_ζ|ζ_ij| + ε_ij)·1{|ζ_ij| < κ_u}`.
pub fn form_network_utility<F: Real>(
    pair: &PairCharacteristics<F>,
    params: &ModelParams<F>,
    eps: &ShockMatrix<F>,
) -> Result<AdjacencyMatrix> {
    params.validate()?;
    let n = pair.len();
    check_dim(n, eps.len())?;
    let out = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && utility_link(params, pair.get(i, j), eps.get(i, j)))
                .collect()
        })
        .collect();
    Ok(AdjacencyMatrix { out })
}

#[inline]
fn distance_link<F: Real>(alpha0: F, alpha_zeta: F, dist: F, eps: F) -> bool {
    alpha0 + alpha_zeta * dist + eps > F::zero()
}

#[inline]
pub(crate) fn utility_link<F: Real>(params: &ModelParams<F>, zeta_ij: F, eps: F) -> bool {
    let z = zeta_ij.abs();
    z < params.kappa_u && params.alpha0 + params.alpha_zeta * z + eps > F::zero()
}

/// Utility-rule network on `n` nodes reading only pairs that can link.
///
/// Produces exactly [`form_network_utility`] applied to `pair.sample(n)` and
/// `shocks.sample(n)`, in `O(n · band)` instead of `O(n²)`.
pub fn form_network_utility_banded<F: Real>(
    n: usize,
    pair: &PairField,
    shocks: &ShockField,
    params: &ModelParams<F>,
) -> Result<AdjacencyMatrix> {
    params.validate()?;
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let band = params.link_band().unwrap_or(n).min(n - 1);
    let out = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(band);
            let hi = (i + band).min(n - 1);
            (lo..=hi)
                .filter(|&j| j != i && utility_link(params, pair.at::<F>(i, j), shocks.at::<F>(i, j)))
                .collect()
        })
        .collect();
    Ok(AdjacencyMatrix { out })
}

/// Distance-rule network read directly from the fields.
pub fn form_network_distance_fields<F: Real>(
    n: usize,
    nodes: &NodeField,
    shocks: &ShockField,
    params: &ModelParams<F>,
) -> Result<AdjacencyMatrix> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let z: Vec<F> = (0..n).map(|i| nodes.at(i)).collect();
    let out = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| {
                    j != i
                        && distance_link(
                            params.alpha0,
                            params.alpha_zeta,
                            (z[i] - z[j]).abs(),
                            shocks.at::<F>(i, j),
                        )
                })
                .collect()
        })
        .collect();
    Ok(AdjacencyMatrix { out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::logistic_cdf;

    #[test]
    fn single_node_location_lies_in_its_cell() {
        for seed in 0..50 {
            let z = sample_node_characteristics::<f64>(1, &ModelParams::default(), seed).unwrap();
            assert!(z.as_slice()[0] > 0.5 && z.as_slice()[0] < 1.5);
        }
    }

    #[test]
    fn empty_samples_are_rejected() {
        assert_eq!(
            sample_node_characteristics::<f64>(0, &ModelParams::default(), 1),
            Err(Error::EmptySample)
        );
        assert!(sample_pair_characteristics::<f64>(0, 1).is_err());
        assert!(sample_logistic_shocks::<f64>(0, 1).is_err());
    }

    #[test]
    fn lattice_has_at_most_five_nodes_within_unit_distance() {
        let z = sample_node_characteristics::<f64>(1000, &ModelParams::default(), 9).unwrap();
        let z = z.as_slice();
        for i in 0..z.len() {
            let close = z.iter().filter(|&&w| (w - z[i]).abs() <= 1.0).count();
            assert!(close <= 5, "node {i} has {close}");
        }
    }

    #[test]
    fn samplers_are_deterministic() {
        let p = ModelParams::<f64>::default();
        assert_eq!(
            sample_node_characteristics(64, &p, 3).unwrap(),
            sample_node_characteristics(64, &p, 3).unwrap()
        );
        assert_eq!(
            sample_pair_characteristics::<f64>(40, 3).unwrap(),
            sample_pair_characteristics::<f64>(40, 3).unwrap()
        );
        assert_eq!(
            sample_logistic_shocks::<f64>(40, 3).unwrap(),
            sample_logistic_shocks::<f64>(40, 3).unwrap()
        );
    }

    #[test]
    fn pair_characteristics_support_and_symmetry() {
        let z = sample_pair_characteristics::<f64>(50, 17).unwrap();
        for i in 0..50 {
            for j in 0..50 {
                assert_eq!(z.get(i, j), z.get(j, i));
                if i != j {
                    let d = i.abs_diff(j) as f64;
                    assert!(z.get(i, j) >= d - 1.0 && z.get(i, j) < d);
                }
            }
        }
        // nodes 3 and 5 (1-based) are two apart
        let v = z.get(2, 4);
        assert!((1.0..2.0).contains(&v));
    }

    #[test]
    fn adjacent_pair_characteristic_has_mean_one_half() {
        let field = PairField::new(Stream::new(5, &[tag::PAIR]));
        let m = 100_000;
        let mean: f64 = (0..m).map(|i| field.at::<f64>(i, i + 1)).sum::<f64>() / m as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn distance_rule_examples() {
        let p = ModelParams::new(0.0, -1.0, f64::INFINITY, 1.0).unwrap();
        let zeta = NodeCharacteristics::new(vec![2.0, 2.0, 7.0]).unwrap();
        let eps = ShockMatrix::from_fn(3, |i, j| if (i, j) == (0, 1) { 0.1 } else { 0.0 }).unwrap();
        let d = form_network_distance(&zeta, &p, &eps).unwrap();
        assert!(d.get(0, 1));
        assert!(!d.get(0, 2), "-5 + 0 < 0");
        assert!(!d.get(0, 0));
    }

    #[test]
    fn distance_rule_link_frequency_matches_logistic_cdf() {
        let p = ModelParams::new(0.0, -1.0, f64::INFINITY, 1.0).unwrap();
        let shocks = ShockField::new(Stream::new(21, &[tag::SHOCK]));
        let m = 100_000usize;
        let hits = (0..m)
            .filter(|&k| distance_link(p.alpha0, p.alpha_zeta, 1.0, shocks.at::<f64>(k, 0)))
            .count();
        let freq = hits as f64 / m as f64;
        let expected = 1.0 / (1.0 + std::f64::consts::E);
        assert!((freq - expected).abs() < 0.005, "{freq} vs {expected}");
        assert!((logistic_cdf(-1.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn neighborhood_rule_truncates_and_zeroes_diagonal() {
        let pair = sample_pair_characteristics::<f64>(100, 4).unwrap();
        // shocks large enough that only truncation can stop a link
        let eps = ShockMatrix::from_fn(100, |_, _| 1e6).unwrap();
        let d = form_network_neighborhood(&pair, 1.0, &eps).unwrap();
        for i in 0..100 {
            assert!(!d.get(i, i));
            for &j in d.out_neighbors(i) {
                assert!(i.abs_diff(j) <= 1);
            }
        }
        assert!(form_network_neighborhood(&pair, 0.0, &eps).is_err());
    }

    #[test]
    fn neighborhood_rule_adjacent_link_probability() {
        // P = ∫₀¹ H(−x) dx = 1 + ln 2 − ln(1 + e)
        let expected = 1.0 + 2f64.ln() - (1.0 + std::f64::consts::E).ln();
        let pair = PairField::new(Stream::new(8, &[tag::PAIR]));
        let shocks = ShockField::new(Stream::new(8, &[tag::SHOCK]));
        let p = ModelParams::neighborhood(1.0).unwrap();
        let m = 100_000usize;
        let hits = (0..m)
            .filter(|&k| utility_link(&p, pair.at::<f64>(2 * k, 2 * k + 1), shocks.at::<f64>(2 * k, 2 * k + 1)))
            .count();
        let freq = hits as f64 / m as f64;
        assert!((freq - expected).abs() < 0.005, "{freq} vs {expected}");
    }

    #[test]
    fn utility_rule_reduces_to_neighborhood_rule() {
        let pair = sample_pair_characteristics::<f64>(200, 12).unwrap();
        let eps = sample_logistic_shocks::<f64>(200, 12).unwrap();
        let p = ModelParams::neighborhood(1.0).unwrap();
        assert_eq!(
            form_network_utility(&pair, &p, &eps).unwrap(),
            form_network_neighborhood(&pair, 1.0, &eps).unwrap()
        );
    }

    #[test]
    fn utility_rule_edge_cases() {
        let p = ModelParams::new(0.0, -1.0, 1.0, 1.0).unwrap();
        assert!(!utility_link(&p, 1.5, 1e6), "f_u kills the utility");
        assert!(utility_link(&p, 0.9, 1e6));
        assert!(!utility_link(&p, 1.0, 1e6), "strict boundary");
    }

    #[test]
    fn banded_formation_matches_dense() {
        for kappa in [0.5, 1.0, 2.5] {
            let stream = Stream::new(33, &[]);
            let pair = PairField::new(stream.child(tag::PAIR));
            let shocks = ShockField::new(stream.child(tag::SHOCK));
            let p = ModelParams::new(0.3, -0.8, kappa, 1.0).unwrap();
            let dense = form_network_utility(
                &pair.sample::<f64>(120).unwrap(),
                &p,
                &shocks.sample::<f64>(120).unwrap(),
            )
            .unwrap();
            let banded = form_network_utility_banded(120, &pair, &shocks, &p).unwrap();
            assert_eq!(dense, banded, "kappa {kappa}");
        }
    }

    #[test]
    fn integer_kappa_limits_links_to_band() {
        let stream = Stream::new(2, &[]);
        let pair = PairField::new(stream.child(tag::PAIR));
        let shocks = ShockField::new(stream.child(tag::SHOCK));
        let p = ModelParams::new(2.0, -0.1, 2.0, 1.0).unwrap();
        let d = form_network_utility(&pair.sample::<f64>(60).unwrap(), &p, &shocks.sample(60).unwrap())
            .unwrap();
        for i in 0..60 {
            assert!(d.out_neighbors(i).iter().all(|&j| i.abs_diff(j) <= 2));
        }
    }

    #[test]
    fn shocks_have_logistic_moments() {
        let eps = sample_logistic_shocks::<f64>(1001, 77).unwrap();
        let draws: Vec<f64> = eps.off_diagonal().collect();
        let m = draws.len() as f64;
        assert!(m >= 1e6);
        let mean = draws.iter().sum::<f64>() / m;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m;
        let below = draws.iter().filter(|&&x| x <= 0.0).count() as f64 / m;
        let pi2_3 = std::f64::consts::PI.powi(2) / 3.0;
        assert!(mean.abs() < 0.01, "{mean}");
        assert!((var - pi2_3).abs() < 0.03, "{var}");
        assert!((below - 0.5).abs() < 0.005, "{below}");
    }

    #[test]
    fn directed_links_are_conditionally_uncorrelated() {
        // Fix ζ_ij = 0.5 and compare d_ij with d_ji across shock draws.
        let shocks = ShockField::new(Stream::new(90, &[tag::SHOCK]));
        let p = ModelParams::neighborhood(1.0).unwrap();
        let m = 50_000usize;
        let pairs: Vec<(f64, f64)> = (0..m)
            .map(|k| {
                let a = utility_link(&p, 0.5, shocks.at::<f64>(2 * k, 2 * k + 1)) as u8 as f64;
                let b = utility_link(&p, 0.5, shocks.at::<f64>(2 * k + 1, 2 * k)) as u8 as f64;
                (a, b)
            })
            .collect();
        let n = m as f64;
        let ma = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let mb = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        let prods: Vec<f64> = pairs.iter().map(|&(a, b)| (a - ma) * (b - mb)).collect();
        let cov = prods.iter().sum::<f64>() / n;
        let se = (prods.iter().map(|x| (x - cov).powi(2)).sum::<f64>() / n).sqrt() / n.sqrt();
        assert!(cov.abs() < 3.0 * se, "cov {cov} se {se}");
    }

    #[test]
    fn adjacency_validation() {
        assert!(AdjacencyMatrix::from_dense(&[vec![1, 0], vec![0, 0]]).is_err());
        assert!(AdjacencyMatrix::from_dense(&[vec![0, 2], vec![0, 0]]).is_err());
        let d = AdjacencyMatrix::from_dense(&[vec![0, 1], vec![0, 0]]).unwrap();
        assert_eq!(d.to_dense(), vec![vec![0, 1], vec![0, 0]]);
        assert_eq!(d.link_count(), 1);
    }

    #[test]
    fn generic_over_f32() {
        let p = ModelParams::<f32>::neighborhood(1.0).unwrap();
        let pair = sample_pair_characteristics::<f32>(30, 1).unwrap();
        let eps = sample_logistic_shocks::<f32>(30, 1).unwrap();
        let d = form_network_utility(&pair, &p, &eps).unwrap();
        assert_eq!(d.len(), 30);
    }
}
