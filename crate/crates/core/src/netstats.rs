//! Per-node network statistics.

use crate::error::{invalid, Error, Result};
use crate::matrix::SquareMatrix;
use crate::models::AdjacencyMatrix;
use crate::scalar::Real;

/// Statistic values `v_i` with optional means `μ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatVector<F> {
    v: Vec<F>,
    mu: Option<Vec<F>>,
}

impl<F: Real> StatVector<F> {
    pub fn new(v: Vec<F>) -> Result<Self> {
        if let Some(x) = v.iter().find(|x| !x.is_finite()) {
            return Err(Error::OutOfDomain {
                value: x.as_f64(),
                domain: "finite reals",
            });
        }
        Ok(Self { v, mu: None })
    }

    pub fn with_mean(v: Vec<F>, mu: Vec<F>) -> Result<Self> {
        Self::new(v)?.set_mean(mu)
    }

    pub fn set_mean(mut self, mu: Vec<F>) -> Result<Self> {
        if mu.len() != self.v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.v.len(),
                found: mu.len(),
            });
        }
        if let Some(x) = mu.iter().find(|x| !x.is_finite()) {
            return Err(Error::OutOfDomain {
                value: x.as_f64(),
                domain: "finite reals",
            });
        }
        self.mu = Some(mu);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn values(&self) -> &[F] {
        &self.v
    }

    pub fn mean(&self) -> Option<&[F]> {
        self.mu.as_deref()
    }

    /// `v_i − μ_i`.
    pub fn centered(&self) -> Result<Vec<F>> {
        let mu = self.mu.as_ref().ok_or(Error::MissingMean)?;
        Ok(self.v.iter().zip(mu).map(|(&v, &m)| v - m).collect())
    }

    pub fn into_values(self) -> Vec<F> {
        self.v
    }
}

/// Row-normalized link matrix `m_ij = d_ij / n_i`, stored by rows of
/// out-neighbors. Isolated nodes have an all-zero row.
#[derive(Debug, Clone, PartialEq)]
pub struct PeerMatrix<F> {
    rows: Vec<(Vec<usize>, F)>,
}

impl<F: Real> PeerMatrix<F> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        let (links, w) = &self.rows[i];
        if links.binary_search(&j).is_ok() {
            *w
        } else {
            F::zero()
        }
    }

    pub fn row(&self, i: usize) -> (&[usize], F) {
        let (links, w) = &self.rows[i];
        (links, *w)
    }

    pub fn to_dense(&self) -> SquareMatrix<F> {
        SquareMatrix::from_fn(self.len(), |i, j| self.get(i, j))
    }

    pub fn mul_vec(&self, z: &[F]) -> Result<Vec<F>> {
        if z.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: z.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|(links, w)| links.iter().map(|&j| z[j]).sum::<F>() * *w)
            .collect())
    }
}

pub fn degree<F: Real>(d: &AdjacencyMatrix) -> StatVector<F> {
    StatVector {
        v: (0..d.len())
            .map(|i| F::from_count(d.out_neighbors(i).len()))
            .collect(),
        mu: None,
    }
}

/// Transitive triples anchored at `i`: `½ Σ_{j≠k; j,k≠i} d_ij d_ik d_jk`.
///
/// On a symmetric network this is the `j < k` count. On a directed one it
/// averages the two orientations of each out-neighbor pair, which keeps the
/// statistic equivariant under relabeling; the `j < k` count is not.
pub fn clustering<F: Real>(d: &AdjacencyMatrix) -> StatVector<F> {
    let v = (0..d.len())
        .map(|i| {
            let out = d.out_neighbors(i);
            let count: usize = out
                .iter()
                .map(|&j| out.iter().filter(|&&k| k != j && d.get(j, k)).count())
                .sum();
            F::from_count(count) / F::lit(2.0)
        })
        .collect();
    StatVector { v, mu: None }
}

pub fn row_normalized<F: Real>(d: &AdjacencyMatrix) -> PeerMatrix<F> {
    let rows = (0..d.len())
        .map(|i| {
            let links = d.out_neighbors(i).to_vec();
            let w = if links.is_empty() {
                F::zero()
            } else {
                F::one() / F::from_count(links.len())
            };
            (links, w)
        })
        .collect();
    PeerMatrix { rows }
}

/// `v = M z`.
pub fn peer_average<F: Real>(m: &PeerMatrix<F>, z: &[F]) -> Result<StatVector<F>> {
    StatVector::new(m.mul_vec(z)?)
}

fn check_lambda<F: Real>(lambda: F) -> Result<()> {
    if lambda.abs() < F::one() {
        Ok(())
    } else {
        Err(invalid("lambda", "peer effect must satisfy |lambda| < 1"))
    }
}

fn rhs<F: Real>(n: usize, z: &[F], u: &[F], beta: F) -> Result<Vec<F>> {
    for len in [z.len(), u.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }
    Ok(z.iter().zip(u).map(|(&z, &u)| z * beta + u).collect())
}

/// `y = (I − λM)⁻¹(zβ + u)` by dense LU.
pub fn peer_effects_reduced_form<F: Real>(
    m: &PeerMatrix<F>,
    z: &[F],
    u: &[F],
    lambda: F,
    beta: F,
) -> Result<StatVector<F>> {
    check_lambda(lambda)?;
    let n = m.len();
    let b = rhs(n, z, u, beta)?;
    let a = SquareMatrix::from_fn(n, |i, j| {
        let id = if i == j { F::one() } else { F::zero() };
        id - lambda * m.get(i, j)
    });
    StatVector::new(a.solve(&b)?)
}

/// Same system solved by the Neumann series `y = Σ_k (λM)^k b`, which
/// converges geometrically because `M` is row-substochastic. Linear in the
/// number of links per sweep, so it scales to large sparse networks.
pub fn peer_effects_reduced_form_iterative<F: Real>(
    m: &PeerMatrix<F>,
    z: &[F],
    u: &[F],
    lambda: F,
    beta: F,
    tol: F,
) -> Result<StatVector<F>> {
    check_lambda(lambda)?;
    let b = rhs(m.len(), z, u, beta)?;
    let b_inf = b.iter().fold(F::zero(), |a, x| a.max(x.abs()));
    let mut y = b.clone();
    let mut term = b;
    // ‖(λM)^k b‖∞ ≤ |λ|^k ‖b‖∞, so the tail after the last term is bounded
    // by |λ|^k/(1−|λ|)·‖b‖∞.
    let rate = lambda.abs();
    let mut tail = b_inf * rate / (F::one() - rate);
    while tail > tol * b_inf.max(F::min_positive_value()) {
        term = m.mul_vec(&term)?;
        for (yi, ti) in y.iter_mut().zip(term.iter_mut()) {
            *ti *= lambda;
            *yi += *ti;
        }
        tail *= rate;
    }
    StatVector::new(y)
}
