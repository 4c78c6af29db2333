//! Proximity-driven blocking: kept blocks `J` around chosen centers separated
//! by buffer zones `T`.
//!
//! Each node `q` ranks all nodes by descending proximity (ties by ascending
//! index). Its kept set is its top `l` ranks and its buffer is the next `r`
//! ranks. Centers are chosen greedily: the first is node 0; each later center
//! is the unassigned node closest to the already assigned set among those
//! whose whole kept set is still unassigned. When no such node remains, the
//! leftovers form one terminal buffer.

use crate::error::{invalid, Error, Result};
use crate::proximity::Proximity;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidths {
    /// `L_n = c_J n^{3/4}`, the kept-block size.
    pub l: f64,
    /// `R_n = c_T n^{1/4 − ε}`, the buffer size.
    pub r: f64,
}

impl Bandwidths {
    pub fn floor_l(&self) -> usize {
        self.l.floor() as usize
    }

    pub fn floor_r(&self) -> usize {
        self.r.floor() as usize
    }
}

pub fn bandwidths(n: usize, c_j: f64, c_t: f64, epsilon: f64) -> Result<Bandwidths> {
    if n < 4 {
        return Err(invalid("n", "bandwidths need n >= 4"));
    }
    if !(c_j > 0.0 && c_j.is_finite()) {
        return Err(invalid("c_j", "must be positive"));
    }
    if !(c_t > 0.0 && c_t.is_finite()) {
        return Err(invalid("c_t", "must be positive"));
    }
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return Err(invalid("epsilon", "must lie in (0, 1/4)"));
    }
    let n = n as f64;
    Ok(Bandwidths {
        l: c_j * n.powf(0.75),
        r: c_t * n.powf(0.25 - epsilon),
    })
}

/// Cutoff of one node: the kept set is ranks `0..l`, the buffer ranks `l..l+r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff<F> {
    pub l: usize,
    pub r: usize,
    /// Proximity of rank `l − 1`: the kept set is `{j : g_qj ≥ g_k}`.
    pub g_k: F,
    /// Proximity of rank `l + r − 1`.
    pub g_h: F,
    /// Characteristic radii of the two levels, when the proximity has them.
    pub radius_k: Option<F>,
    pub radius_h: Option<F>,
    score_k: F,
    score_h: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cutoffs<F> {
    pub per_node: Vec<Cutoff<F>>,
    /// Nodes whose cut at rank `l` or `l + r` separates equal proximities.
    pub tie_breaks: usize,
    pub bandwidths: Bandwidths,
}

/// Per-node cutoffs read off the order statistics of each proximity row.
pub fn adaptive_cutoffs<F: Real, P: Proximity<F> + ?Sized>(
    g: &P,
    bw: Bandwidths,
) -> Result<Cutoffs<F>> {
    let n = g.len();
    let (l, r) = check_bandwidths(n, bw)?;
    let prefixes: Vec<Vec<(usize, F)>> = (0..n).map(|i| g.ranked_prefix(i, (l + r + 1).min(n))).collect();
    cutoffs_from_prefixes(g, bw, &prefixes)
}

fn check_bandwidths(n: usize, bw: Bandwidths) -> Result<(usize, usize)> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let fl = bw.floor_l();
    let fr = bw.floor_r();
    if fl < 2.min(n) || bw.l.is_nan() {
        return Err(Error::BlockingInfeasible { n, floor_l: fl });
    }
    if fr < 1 || bw.r.is_nan() {
        return Err(invalid("r_n", "floor(R_n) must be at least 1"));
    }
    let l = fl.min(n);
    Ok((l, fr.min(n - l)))
}

/// Cutoffs from ranked prefixes of length at least `min(l + r + 1, n)`.
fn cutoffs_from_prefixes<F: Real, P: Proximity<F> + ?Sized>(
    g: &P,
    bw: Bandwidths,
    prefixes: &[Vec<(usize, F)>],
) -> Result<Cutoffs<F>> {
    let n = g.len();
    let (l, r) = check_bandwidths(n, bw)?;
    let mut per_node = Vec::with_capacity(n);
    let mut tie_breaks = 0;
    for (i, prefix) in prefixes.iter().enumerate() {
        let prefix = &prefix[..(l + r + 1).min(n)];
        let s = |k: usize| prefix[k].1;
        if n >= 2 && s(1) == s(prefix.len() - 1) && is_constant_row(g, i) {
            return Err(Error::DegenerateRow { row: i });
        }
        let tied = |k: usize| k < prefix.len() && k > 0 && s(k - 1) == s(k);
        if tied(l) || (r > 0 && tied(l + r)) {
            tie_breaks += 1;
        }
        let (score_k, score_h) = (s(l - 1), s(l + r - 1));
        per_node.push(Cutoff {
            l,
            r,
            g_k: level_g(g, i, &prefix, l - 1),
            g_h: level_g(g, i, &prefix, l + r - 1),
            radius_k: if l == 1 { Some(F::zero()) } else { g.radius(score_k) },
            radius_h: if l + r == 1 { Some(F::zero()) } else { g.radius(score_h) },
            score_k,
            score_h,
        });
    }
    Ok(Cutoffs {
        per_node,
        tie_breaks,
        bandwidths: bw,
    })
}

fn level_g<F: Real, P: Proximity<F> + ?Sized>(g: &P, i: usize, prefix: &[(usize, F)], rank: usize) -> F {
    g.g(i, prefix[rank].0)
}

fn is_constant_row<F: Real, P: Proximity<F> + ?Sized>(g: &P, i: usize) -> bool {
    let row = g.ranked_prefix(i, g.len());
    let first = g.g(i, row[0].0);
    row.iter().all(|&(j, _)| g.g(i, j) == first)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block<F> {
    pub center: usize,
    /// Kept set `J(q)`, ascending.
    pub kept: Vec<usize>,
    /// Buffer `T(q)`, ascending.
    pub buffer: Vec<usize>,
    /// `None` for the terminal leftover block.
    pub cutoff: Option<Cutoff<F>>,
}

impl<F> Block<F> {
    pub fn is_terminal(&self) -> bool {
        self.cutoff.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition<F> {
    pub n: usize,
    pub blocks: Vec<Block<F>>,
    pub bandwidths: Bandwidths,
    pub tie_breaks: usize,
}

impl<F: Real> BlockPartition<F> {
    pub fn centers(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.center).collect()
    }

    pub fn j_sets(&self) -> Vec<&[usize]> {
        self.blocks.iter().map(|b| b.kept.as_slice()).collect()
    }

    pub fn t_sets(&self) -> Vec<&[usize]> {
        self.blocks.iter().map(|b| b.buffer.as_slice()).collect()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block index of every node and whether it is kept.
    pub fn membership(&self) -> Result<Vec<(usize, bool)>> {
        let mut slot: Vec<Option<(usize, bool)>> = vec![None; self.n];
        for (b, block) in self.blocks.iter().enumerate() {
            for (&j, kept) in block
                .kept
                .iter()
                .map(|j| (j, true))
                .chain(block.buffer.iter().map(|j| (j, false)))
            {
                if j >= self.n {
                    return Err(Error::IndexMismatch(format!("node {j} outside n = {}", self.n)));
                }
                if slot[j].replace((b, kept)).is_some() {
                    return Err(Error::IndexMismatch(format!("node {j} assigned twice")));
                }
            }
        }
        slot.into_iter()
            .enumerate()
            .map(|(j, s)| s.ok_or_else(|| Error::IndexMismatch(format!("node {j} unassigned"))))
            .collect()
    }
}

/// Runs the greedy block construction.
pub fn build_partition<F: Real, P: Proximity<F> + ?Sized>(
    g: &P,
    cutoffs: &Cutoffs<F>,
) -> Result<BlockPartition<F>> {
    let n = g.len();
    if cutoffs.per_node.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: cutoffs.per_node.len(),
        });
    }
    let prefixes = (0..n)
        .map(|q| {
            let c = cutoffs.per_node[q];
            g.ranked_prefix(q, search_len(c.l, c.r, n))
        })
        .collect();
    build_with_prefixes(g, cutoffs, prefixes)
}

fn search_len(l: usize, r: usize, n: usize) -> usize {
    (l + 2 * r + EXTRA_RANKS).min(n)
}

fn build_with_prefixes<F: Real, P: Proximity<F> + ?Sized>(
    g: &P,
    cutoffs: &Cutoffs<F>,
    prefixes: Vec<Vec<(usize, F)>>,
) -> Result<BlockPartition<F>> {
    let n = g.len();
    let mut state = State::new(cutoffs, prefixes);
    let mut blocks = Vec::new();
    let mut next = Some(0);
    while let Some(q) = next {
        let cut = cutoffs.per_node[q];
        let prefix = &state.prefix[q];
        let mut kept: Vec<usize> = prefix[..cut.l].iter().map(|e| e.0).collect();
        let mut buffer: Vec<usize> = prefix[cut.l..cut.l + cut.r]
            .iter()
            .map(|e| e.0)
            .filter(|&j| !state.assigned[j])
            .collect();
        kept.sort_unstable();
        buffer.sort_unstable();
        for &j in kept.iter().chain(&buffer) {
            state.assign(j);
        }
        blocks.push(Block {
            center: q,
            kept,
            buffer,
            cutoff: Some(cut),
        });
        next = if state.remaining == 0 {
            None
        } else {
            state.next_center(g)
        };
    }
    if state.remaining > 0 {
        let rest: Vec<usize> = (0..n).filter(|&j| !state.assigned[j]).collect();
        blocks.push(Block {
            center: rest[0],
            kept: Vec::new(),
            buffer: rest,
            cutoff: None,
        });
    }
    Ok(BlockPartition {
        n,
        blocks,
        bandwidths: cutoffs.bandwidths,
        tie_breaks: cutoffs.tie_breaks,
    })
}

/// Cutoffs and partition in one call.
pub fn partition<F: Real, P: Proximity<F> + ?Sized>(g: &P, bw: Bandwidths) -> Result<BlockPartition<F>> {
    let n = g.len();
    let (l, r) = check_bandwidths(n, bw)?;
    let prefixes: Vec<Vec<(usize, F)>> = (0..n).map(|i| g.ranked_prefix(i, search_len(l, r, n))).collect();
    let cutoffs = cutoffs_from_prefixes(g, bw, &prefixes)?;
    build_with_prefixes(g, &cutoffs, prefixes)
}

/// Slack ranks kept beyond `l + r` so that most closeness queries are
/// answered from the prefix.
const EXTRA_RANKS: usize = 16;

struct State<'a, F> {
    cutoffs: &'a Cutoffs<F>,
    prefix: Vec<Vec<(usize, F)>>,
    /// `(q, rank)` for every appearance of a node in some prefix.
    reverse: Vec<Vec<(u32, u32)>>,
    /// Smallest prefix rank of an assigned node, or the prefix length.
    best_rank: Vec<usize>,
    assigned: Vec<bool>,
    assigned_list: Vec<usize>,
    remaining: usize,
}

impl<'a, F: Real> State<'a, F> {
    fn new(cutoffs: &'a Cutoffs<F>, prefix: Vec<Vec<(usize, F)>>) -> Self {
        let n = prefix.len();
        let mut reverse: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        for (q, row) in prefix.iter().enumerate() {
            for (rank, &(j, _)) in row.iter().enumerate() {
                reverse[j].push((q as u32, rank as u32));
            }
        }
        let best_rank = prefix.iter().map(Vec::len).collect();
        Self {
            cutoffs,
            prefix,
            reverse,
            best_rank,
            assigned: vec![false; n],
            assigned_list: Vec::new(),
            remaining: n,
        }
    }

    fn assign(&mut self, j: usize) {
        debug_assert!(!self.assigned[j]);
        self.assigned[j] = true;
        self.assigned_list.push(j);
        self.remaining -= 1;
        for &(q, rank) in &self.reverse[j] {
            let b = &mut self.best_rank[q as usize];
            *b = (*b).min(rank as usize);
        }
    }

    /// Feasible unassigned node with the largest `max_{i assigned} g_qi`,
    /// smallest index among ties.
    fn next_center<P: Proximity<F> + ?Sized>(&self, g: &P) -> Option<usize> {
        let mut best: Option<(F, usize)> = None;
        let mut unknown: Vec<(F, usize)> = Vec::new();
        let better = |c: F, q: usize, cur: Option<(F, usize)>| match cur {
            None => true,
            Some((bc, bq)) => c > bc || (c == bc && q < bq),
        };
        for q in 0..self.assigned.len() {
            if self.assigned[q] {
                continue;
            }
            let rank = self.best_rank[q];
            if rank < self.cutoffs.per_node[q].l {
                continue;
            }
            let row = &self.prefix[q];
            if rank < row.len() {
                let c = row[rank].1;
                if better(c, q, best) {
                    best = Some((c, q));
                }
            } else if row.len() < self.assigned.len() {
                // No assigned node within the prefix: bounded by its last score.
                unknown.push((row[row.len() - 1].1, q));
            }
        }
        unknown.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
        for (upper, q) in unknown {
            if let Some((bc, _)) = best {
                if upper < bc {
                    break;
                }
            }
            let c = self
                .assigned_list
                .iter()
                .map(|&i| g.score(q, i))
                .fold(F::neg_infinity(), F::max);
            if better(c, q, best) {
                best = Some((c, q));
            }
        }
        best.map(|(_, q)| q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionDiagnostics {
    pub realized_blocks: usize,
    /// `n / (c_T⌊n^{1/4}⌋ + c_J⌊n^{3/4}⌋)`.
    pub formula_blocks: f64,
    /// `sup ||J|·N/n − 1|` over non-terminal blocks, `N` from the formula.
    pub kept_deviation: f64,
    /// Same with the realized number of blocks.
    pub kept_deviation_realized: f64,
    /// `sup ||T|/n^{1/4−ε} − 1|` over non-terminal blocks.
    pub buffer_deviation: f64,
    /// Some non-terminal buffer is empty.
    pub empty_buffer: bool,
}

pub fn partition_diagnostics<F: Real>(p: &BlockPartition<F>, epsilon: f64) -> Result<PartitionDiagnostics> {
    let n = p.n;
    if n < 4 {
        return Err(invalid("n", "diagnostics need n >= 4"));
    }
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return Err(invalid("epsilon", "must lie in (0, 1/4)"));
    }
    let nf = n as f64;
    let c_j = p.bandwidths.l / nf.powf(0.75);
    let c_t = p.bandwidths.r / nf.powf(0.25 - epsilon);
    let formula = nf / (c_t * nf.powf(0.25).floor() + c_j * nf.powf(0.75).floor());
    let realized = p.blocks.len();
    let buffer_scale = nf.powf(0.25 - epsilon);
    let mut kept_dev: f64 = 0.0;
    let mut kept_dev_realized: f64 = 0.0;
    let mut buffer_dev: f64 = 0.0;
    let mut empty_buffer = false;
    for b in p.blocks.iter().filter(|b| !b.is_terminal()) {
        let j = b.kept.len() as f64;
        kept_dev = kept_dev.max((j * formula / nf - 1.0).abs());
        kept_dev_realized = kept_dev_realized.max((j * realized as f64 / nf - 1.0).abs());
        buffer_dev = buffer_dev.max((b.buffer.len() as f64 / buffer_scale - 1.0).abs());
        empty_buffer |= b.buffer.is_empty();
    }
    Ok(PartitionDiagnostics {
        realized_blocks: realized,
        formula_blocks: formula,
        kept_deviation: kept_dev,
        kept_deviation_realized: kept_dev_realized,
        buffer_deviation: buffer_dev,
        empty_buffer,
    })
}

/// Violations of the partition contract; empty when all hold.
pub fn check_invariants<F: Real, P: Proximity<F> + ?Sized>(g: &P, p: &BlockPartition<F>) -> Vec<String> {
    let mut problems = Vec::new();
    let membership = match p.membership() {
        Ok(m) => m,
        Err(e) => return vec![e.to_string()],
    };
    let fl = p.bandwidths.floor_l().min(p.n);
    let fr = p.bandwidths.floor_r();
    let mut centers = p.centers();
    centers.sort_unstable();
    centers.dedup();
    if centers.len() != p.blocks.len() {
        problems.push("centers are not distinct".to_string());
    }
    for (b, block) in p.blocks.iter().enumerate() {
        let Some(cut) = block.cutoff else {
            if b + 1 != p.blocks.len() {
                problems.push(format!("terminal block {b} is not last"));
            }
            continue;
        };
        let size = block.kept.len();
        if size + 1 < fl || size > fl {
            problems.push(format!("block {b}: |J| = {size} outside [{}, {fl}]", fl.saturating_sub(1)));
        }
        if block.buffer.len() > fr {
            problems.push(format!("block {b}: |T| = {} > {fr}", block.buffer.len()));
        }
        let q = block.center;
        for &j in &block.kept {
            if g.score(q, j) < cut.score_k {
                problems.push(format!("block {b}: kept node {j} below the cutoff"));
            }
        }
        // Strict separation, or equality only where a tie was broken by index.
        let inside = |score: F| score > cut.score_k || (score == cut.score_k && p.tie_breaks == 0);
        for (j, &(owner, _)) in membership.iter().enumerate() {
            if owner > b && inside(g.score(q, j)) {
                problems.push(format!("block {b}: later node {j} inside the kept region of {q}"));
            }
            if owner < b && inside(g.score(q, j)) {
                problems.push(format!("center {q} of block {b} has earlier node {j} in its kept region"));
            }
        }
    }
    problems
}
