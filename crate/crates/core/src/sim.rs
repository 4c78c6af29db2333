//! One replication of a formation model: network, statistic, means and proximity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::models::{
    form_network_distance_fields, form_network_utility_banded, AdjacencyMatrix, ModelParams,
    NodeField, PairField, ShockField, ZetaLaw,
};
use crate::netstats::{self, StatVector};
use crate::proximity::{NodeProximity, PairProximity, Proximity, ProximitySampler};
use crate::rng::{tag, Stream};
use crate::scalar::{logistic_cdf, softplus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Node locations, `d_ij = 1{α₀ + α_ζ|ζ_i − ζ_j| + ε_ij > 0}`.
    Distance,
    /// Pair characteristics, `d_ij = 1{−|ζ_ij| + ε_ij > 0, |ζ_ij| < κ_u}`.
    Neighborhood,
    /// Pair characteristics, `d_ij = 1{α₀ + α_ζ|ζ_ij| + ε_ij > 0, |ζ_ij| < κ_u}`.
    Utility,
}

impl ModelKind {
    pub fn uses_pairs(self) -> bool {
        !matches!(self, ModelKind::Distance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatKind {
    Degree,
    Clustering,
    /// Average degree of out-neighbors.
    PeerAvg,
    /// Average of an iid `U(0,1)` covariate over out-neighbors.
    PeerShock,
    /// Outcome of the linear-in-means model `y = λMy + xβ + u`.
    ReducedFormMean,
}

/// Draws-per-replication threshold below which `ln(1e−12)`-level link
/// probabilities are treated as zero when sizing the padding.
const NEGLIGIBLE_LOGIT: f64 = 27.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub params: ModelParams<f64>,
    pub law: ZetaLaw,
    pub stat: StatKind,
    pub peer_lambda: f64,
    pub peer_beta: f64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, params: ModelParams<f64>, stat: StatKind) -> Result<Self> {
        let spec = Self {
            kind,
            params,
            law: ZetaLaw::Lattice,
            stat,
            peer_lambda: 0.5,
            peer_beta: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Neighborhood model with `κ_u` and the degree statistic.
    pub fn neighborhood_degree(kappa_u: f64) -> Result<Self> {
        Self::new(
            ModelKind::Neighborhood,
            ModelParams::neighborhood(kappa_u)?,
            StatKind::Degree,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.peer_lambda.abs() < 1.0) {
            return Err(invalid("peer_lambda", "must satisfy |lambda| < 1"));
        }
        if !self.peer_beta.is_finite() {
            return Err(invalid("peer_beta", "must be finite"));
        }
        if self.kind.uses_pairs() && self.law != ZetaLaw::Lattice {
            return Err(invalid("zeta_law", "applies to node characteristics only"));
        }
        Ok(())
    }

    /// Parameters actually entering the link rule.
    pub fn effective_params(&self) -> ModelParams<f64> {
        match self.kind {
            ModelKind::Neighborhood => ModelParams {
                alpha0: 0.0,
                alpha_zeta: -1.0,
                ..self.params
            },
            _ => self.params,
        }
    }

    /// Index gap beyond which links are impossible (pair models with finite
    /// `κ_u`) or have log-odds below `−27.7`.
    pub fn link_reach(&self) -> Option<usize> {
        let p = self.effective_params();
        if self.kind.uses_pairs() {
            if let Some(band) = p.link_band() {
                return Some(band);
            }
        }
        if self.law == ZetaLaw::IidUniform {
            return None;
        }
        if p.alpha_zeta >= 0.0 {
            return None;
        }
        // Distance model: |ζ_i − ζ_j| ≥ s|i−j| − 1. Pair model: |ζ_ij| ≥ |i−j| − 1.
        let scale = if self.kind.uses_pairs() { 1.0 } else { p.spacing };
        let gap = (p.alpha0 + NEGLIGIBLE_LOGIT) / (-p.alpha_zeta);
        Some(((gap.max(0.0) + 1.0) / scale).ceil() as usize + 1)
    }

    /// How many link hops the statistic of a node reads.
    fn stat_hops(&self) -> usize {
        match self.stat {
            StatKind::Degree | StatKind::Clustering | StatKind::PeerShock => 1,
            StatKind::PeerAvg => 2,
            StatKind::ReducedFormMean => {
                let lam = self.peer_lambda.abs();
                if lam == 0.0 {
                    1
                } else {
                    ((1e-12f64).ln() / lam.ln()).ceil() as usize + 1
                }
            }
        }
    }

    /// Margin simulated on each side of the observed window in padded mode.
    pub fn padding(&self) -> Result<usize> {
        if self.law == ZetaLaw::IidUniform {
            // Index order carries no geometry; there is no interior to pad.
            return Ok(0);
        }
        let reach = self.link_reach().ok_or_else(|| {
            invalid("model", "links have unbounded reach; padded mode is unavailable")
        })?;
        Ok(reach * self.stat_hops() + 1)
    }

    pub fn replication_stream(seed: u64, rep: u64) -> Stream {
        Stream::new(seed, &[tag::REPLICATION, rep])
    }

    pub fn simulate(&self, seed: u64, rep: u64, n: usize, padded: bool) -> Result<Realization> {
        self.simulate_stream(Self::replication_stream(seed, rep), n, padded)
    }

    pub fn simulate_stream(&self, stream: Stream, n: usize, padded: bool) -> Result<Realization> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let offset = if padded { self.padding()? } else { 0 };
        let total = n + 2 * offset;
        let p = self.effective_params();
        let shocks = ShockField::new(stream.child(tag::SHOCK));
        let network = if self.kind.uses_pairs() {
            form_network_utility_banded(total, &PairField::new(stream.child(tag::PAIR)), &shocks, &p)?
        } else {
            form_network_distance_fields(total, &self.node_field(stream), &shocks, &p)?
        };
        let full = self.statistic(&network, stream)?;
        let v = full[offset..offset + n].to_vec();
        Ok(Realization {
            network,
            offset,
            n,
            v,
            stream,
            spec: *self,
        })
    }

    fn node_field(&self, stream: Stream) -> NodeField {
        NodeField::new(stream.child(tag::NODE), self.law, self.params.spacing)
    }

    fn statistic(&self, d: &AdjacencyMatrix, stream: Stream) -> Result<Vec<f64>> {
        let total = d.len();
        let covariate = || -> Vec<f64> {
            let s = stream.child(tag::COVARIATE);
            (0..total).map(|i| s.uniform_open(i as u64, 0)).collect()
        };
        let out = match self.stat {
            StatKind::Degree => netstats::degree(d),
            StatKind::Clustering => netstats::clustering(d),
            StatKind::PeerAvg => {
                let m = netstats::row_normalized(d);
                netstats::peer_average(&m, netstats::degree::<f64>(d).values())?
            }
            StatKind::PeerShock => netstats::peer_average(&netstats::row_normalized(d), &covariate())?,
            StatKind::ReducedFormMean => {
                let s = stream.child(tag::NODE_SHOCK);
                let u: Vec<f64> = (0..total).map(|i| s.logistic(i as u64, 0)).collect();
                netstats::peer_effects_reduced_form_iterative(
                    &netstats::row_normalized(d),
                    &covariate(),
                    &u,
                    self.peer_lambda,
                    self.peer_beta,
                    1e-13,
                )?
            }
        };
        Ok(out.into_values())
    }

    /// Closed-form `μ_i` when available: degree in a pair model with finite `κ_u`.
    ///
    /// `E[d_ij] = ∫_{g−1}^{min(g, κ_u)} H(α₀ + α_ζ x) dx` at index gap `g`.
    pub fn analytic_mean(&self, n: usize, padded: bool) -> Result<Option<Vec<f64>>> {
        if self.stat != StatKind::Degree || !self.kind.uses_pairs() {
            return Ok(None);
        }
        let p = self.effective_params();
        let Some(band) = p.link_band() else {
            return Ok(None);
        };
        let offset = if padded { self.padding()? } else { 0 };
        let total = n + 2 * offset;
        let probs: Vec<f64> = (1..=band).map(|gap| pair_link_probability(&p, gap)).collect();
        let mu = (offset..offset + n)
            .map(|i| {
                probs
                    .iter()
                    .enumerate()
                    .map(|(k, &pr)| {
                        let gap = k + 1;
                        let sides = usize::from(i >= gap) + usize::from(i + gap < total);
                        sides as f64 * pr
                    })
                    .sum()
            })
            .collect();
        Ok(Some(mu))
    }

    /// `μ_i` by averaging `reps` independent replications on a stream disjoint
    /// from every experiment stream.
    pub fn mc_mean(&self, n: usize, reps: u64, seed: u64, padded: bool) -> Result<Vec<f64>> {
        if reps == 0 {
            return Err(Error::EmptySample);
        }
        let base = Stream::new(seed, &[tag::MU_ORACLE]);
        let sums = par_sum_rows(reps, n, |r| {
            Ok(self.simulate_stream(base.child(r), n, padded)?.v)
        })?;
        Ok(sums.into_iter().map(|s| s / reps as f64).collect())
    }

    /// Analytic mean when available, Monte Carlo otherwise.
    pub fn mean(&self, n: usize, mc_reps: u64, seed: u64, padded: bool) -> Result<Vec<f64>> {
        match self.analytic_mean(n, padded)? {
            Some(mu) => Ok(mu),
            None => self.mc_mean(n, mc_reps, seed, padded),
        }
    }

    /// Link probability of `(i, j)` given the characteristics of one draw.
    pub fn link_probability(&self, stream: Stream, i: usize, j: usize) -> f64 {
        if i == j {
            return 1.0;
        }
        let p = self.effective_params();
        if self.kind.uses_pairs() {
            let z = PairField::new(stream.child(tag::PAIR)).at::<f64>(i, j).abs();
            if z < p.kappa_u {
                logistic_cdf(p.alpha0 + p.alpha_zeta * z)
            } else {
                0.0
            }
        } else {
            let f = self.node_field(stream);
            logistic_cdf(p.alpha0 + p.alpha_zeta * (f.at::<f64>(i) - f.at::<f64>(j)).abs())
        }
    }

    /// Characteristic gap of `(i, j)` in one draw.
    pub fn gap(&self, stream: Stream, i: usize, j: usize) -> f64 {
        if self.kind.uses_pairs() {
            if i == j {
                0.0
            } else {
                PairField::new(stream.child(tag::PAIR)).at::<f64>(i, j).abs()
            }
        } else {
            let f = self.node_field(stream);
            (f.at::<f64>(i) - f.at::<f64>(j)).abs()
        }
    }
}

impl ProximitySampler for ModelSpec {
    fn sample_g(&self, seed: u64, rep: u64, i: usize, j: usize) -> f64 {
        self.link_probability(Stream::new(seed, &[tag::EVENTS, rep]), i, j)
    }
}

/// `∫_{gap−1}^{min(gap, κ_u)} H(α₀ + α_ζ x) dx`.
pub fn pair_link_probability(p: &ModelParams<f64>, gap: usize) -> f64 {
    let lo = gap as f64 - 1.0;
    let hi = (gap as f64).min(p.kappa_u);
    if hi <= lo {
        return 0.0;
    }
    let (a, b) = (p.alpha0, p.alpha_zeta);
    if b == 0.0 {
        return (hi - lo) * logistic_cdf(a);
    }
    (softplus(a + b * hi) - softplus(a + b * lo)) / b
}

/// Sums length-`len` rows over `reps` replications. Chunks are summed in
/// parallel and merged in index order, so the result does not depend on the
/// thread count.
pub fn par_sum_rows(
    reps: u64,
    len: usize,
    f: impl Fn(u64) -> Result<Vec<f64>> + Sync,
) -> Result<Vec<f64>> {
    const CHUNK: u64 = 32;
    let chunks: Vec<Vec<f64>> = (0..reps.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; len];
            for r in c * CHUNK..((c + 1) * CHUNK).min(reps) {
                let row = f(r)?;
                if row.len() != len {
                    return Err(Error::DimensionMismatch {
                        expected: len,
                        found: row.len(),
                    });
                }
                acc.iter_mut().zip(row).for_each(|(a, x)| *a += x);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![0.0; len];
    for c in chunks {
        total.iter_mut().zip(c).for_each(|(a, x)| *a += x);
    }
    Ok(total)
}

/// Proximity of the observed window of one replication.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelProximity {
    Pair(PairProximity<f64>),
    Node(NodeProximity<f64>),
}

impl Proximity<f64> for ModelProximity {
    fn len(&self) -> usize {
        match self {
            Self::Pair(p) => p.len(),
            Self::Node(p) => p.len(),
        }
    }

    fn score(&self, i: usize, j: usize) -> f64 {
        match self {
            Self::Pair(p) => p.score(i, j),
            Self::Node(p) => p.score(i, j),
        }
    }

    fn score_to_g(&self, score: f64) -> f64 {
        logistic_cdf(score)
    }

    fn radius(&self, score: f64) -> Option<f64> {
        match self {
            Self::Pair(p) => p.radius(score),
            Self::Node(p) => p.radius(score),
        }
    }

    fn ranked_prefix(&self, i: usize, m: usize) -> Vec<(usize, f64)> {
        match self {
            Self::Pair(p) => p.ranked_prefix(i, m),
            Self::Node(p) => p.ranked_prefix(i, m),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Realization {
    /// Network over all simulated nodes, padding included.
    pub network: AdjacencyMatrix,
    /// Index of the first observed node in `network`.
    pub offset: usize,
    pub n: usize,
    /// Statistic of the observed nodes.
    pub v: Vec<f64>,
    stream: Stream,
    spec: ModelSpec,
}

impl Realization {
    pub fn stream(&self) -> Stream {
        self.stream
    }

    /// Observed-window proximity. For pair models this is the untruncated
    /// kernel `H(α₀ + α_ζ|ζ_ij|)`: the truncated link probability is zero for
    /// all far pairs and would leave neighbor ranks undefined.
    pub fn proximity(&self) -> Result<ModelProximity> {
        let p = self.spec.effective_params();
        if self.spec.kind.uses_pairs() {
            Ok(ModelProximity::Pair(PairProximity::new(
                PairField::new(self.stream.child(tag::PAIR)),
                self.offset,
                self.n,
                p.alpha0,
                p.alpha_zeta,
            )?))
        } else {
            let field = self.spec.node_field(self.stream);
            let z = (self.offset..self.offset + self.n).map(|i| field.at(i)).collect();
            Ok(ModelProximity::Node(NodeProximity::new(z, p.alpha0, p.alpha_zeta)?))
        }
    }

    pub fn with_mean(&self, mu: Vec<f64>) -> Result<StatVector<f64>> {
        StatVector::with_mean(self.v.clone(), mu)
    }
}
