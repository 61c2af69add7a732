use serde::Serialize;

use super::cover::{entropy_integral, next_combination};
use super::sequence::{
    functional_value, level_capacity, partition_functional_value, truncation_level, AdmissibleSequence,
};
use super::FiniteMetricSpace;
use crate::error::{Error, Result};

/// Candidate sets per level beyond which the exhaustive search refuses to run.
const MAX_LEVEL_CANDIDATES: u128 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaMode {
    Exact,
    Greedy,
    EntropyIntegral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaVariant {
    /// inf over subset sequences of sup_t Σ_{n≥l} 2^{n/α} d(t, T_n)
    Standard,
    /// inf over partition sequences of sup_t Σ_n 2^{n/α} Δ(A_n(t))
    Partition,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaEstimate {
    pub alpha: f64,
    pub p: f64,
    pub l: usize,
    pub value: f64,
    pub mode: GammaMode,
    pub variant: GammaVariant,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<AdmissibleSequence>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must be a positive finite number, got {alpha}")))
    }
}

/// First level n ≥ 1 at which T_n = T is admissible.
fn full_level(size: usize) -> usize {
    let mut n = 1;
    while level_capacity(n) < size {
        n += 1;
    }
    n
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Lexicographically first admissible set at level n.
fn first_set(n: usize, size: usize) -> Vec<usize> {
    let cap = if n == 0 { 1 } else { level_capacity(n) };
    (0..cap.min(size)).collect()
}

/// Exact truncated γ_{α,p} by exhaustive search over admissible sequences.
///
/// Levels below l do not enter the functional and get the lexicographically
/// first admissible sets. From the first level n* with 2^{2^{n*}} ≥ |T| on,
/// T_n = T. Every level in between ranges over all subsets of the maximal
/// allowed size (enlarging a set never increases d(t, T_n)). Ties keep the
/// lexicographically first witness.
pub fn gamma_exact(space: &FiniteMetricSpace, alpha: f64, p: f64, cap: usize) -> Result<GammaEstimate> {
    check_alpha(alpha)?;
    let l = truncation_level(p)?;
    let size = space.len();
    if size > cap {
        return Err(Error::Capacity { what: "exact gamma functional", size, cap });
    }
    let n_star = full_level(size);
    let free: Vec<usize> = (l..n_star).collect();
    for &n in &free {
        let k = if n == 0 { 1 } else { level_capacity(n) };
        if binomial(size, k) > MAX_LEVEL_CANDIDATES {
            return Err(Error::Capacity { what: "exact gamma functional (level candidates)", size, cap: 16 });
        }
    }

    let mut search = Search {
        space,
        alpha,
        free: &free,
        best_value: f64::INFINITY,
        best_sets: Vec::new(),
        current: Vec::new(),
    };
    search.run(0, &vec![0.0; size]);
    let value = if free.is_empty() { 0.0 } else { search.best_value };

    let mut sets = Vec::with_capacity(n_star + 1);
    let mut chosen = search.best_sets.into_iter();
    for n in 0..n_star {
        if n < l {
            sets.push(first_set(n, size));
        } else {
            sets.push(chosen.next().expect("search covers every free level"));
        }
    }
    sets.push((0..size).collect());
    if size == 1 {
        sets.truncate(1);
    }
    let seq = AdmissibleSequence::from_sets(space, sets)?;
    Ok(GammaEstimate {
        alpha,
        p,
        l,
        value,
        mode: GammaMode::Exact,
        variant: GammaVariant::Standard,
        sequence: Some(seq),
    })
}

struct Search<'a> {
    space: &'a FiniteMetricSpace,
    alpha: f64,
    free: &'a [usize],
    best_value: f64,
    best_sets: Vec<Vec<usize>>,
    current: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn run(&mut self, depth: usize, acc: &[f64]) {
        if depth == self.free.len() {
            let v = acc.iter().copied().fold(0.0, f64::max);
            if v < self.best_value {
                self.best_value = v;
                self.best_sets = self.current.clone();
            }
            return;
        }
        let n = self.free[depth];
        let size = self.space.len();
        let k = if n == 0 { 1 } else { level_capacity(n) };
        let weight = 2f64.powf(n as f64 / self.alpha);
        let mut combo: Vec<usize> = (0..k).collect();
        let mut next = vec![0.0; size];
        loop {
            let mut worst: f64 = 0.0;
            for t in 0..size {
                next[t] = acc[t] + weight * self.space.dist_to_set(t, &combo);
                worst = worst.max(next[t]);
            }
            if worst < self.best_value {
                self.current.push(combo.clone());
                self.run(depth + 1, &next);
                self.current.pop();
            }
            if !next_combination(&mut combo, size) {
                break;
            }
        }
    }
}

/// Farthest-point admissible sequence: T_0 is the Chebyshev center and each
/// level extends the previous one by farthest points until it is full or
/// equals T.
pub fn greedy_admissible_sequence(space: &FiniteMetricSpace) -> AdmissibleSequence {
    let order = farthest_point_order(space);
    let size = space.len();
    let mut sets = vec![vec![order[0]]];
    let mut n = 1;
    while sets.last().unwrap().len() < size {
        let k = level_capacity(n).min(size);
        sets.push(order[..k].to_vec());
        n += 1;
    }
    AdmissibleSequence::from_sets(space, sets).expect("farthest-point sequence is admissible")
}

/// All points in farthest-point traversal order from the Chebyshev center.
fn farthest_point_order(space: &FiniteMetricSpace) -> Vec<usize> {
    let size = space.len();
    let (first, _) = space.chebyshev();
    let mut order = vec![first];
    let mut taken = vec![false; size];
    taken[first] = true;
    let mut gap: Vec<f64> = (0..size).map(|t| space.dist(first, t)).collect();
    while order.len() < size {
        let mut far = usize::MAX;
        for t in 0..size {
            if !taken[t] && (far == usize::MAX || gap[t] > gap[far]) {
                far = t;
            }
        }
        taken[far] = true;
        order.push(far);
        for (t, g) in gap.iter_mut().enumerate() {
            *g = g.min(space.dist(far, t));
        }
    }
    order
}

/// Functional value of the farthest-point sequence.
pub fn gamma_greedy(space: &FiniteMetricSpace, alpha: f64, p: f64) -> Result<GammaEstimate> {
    check_alpha(alpha)?;
    let l = truncation_level(p)?;
    let seq = greedy_admissible_sequence(space);
    let value = functional_value(space, &seq, alpha, p)?;
    Ok(GammaEstimate {
        alpha,
        p,
        l,
        value,
        mode: GammaMode::Greedy,
        variant: GammaVariant::Standard,
        sequence: Some(seq),
    })
}

/// Entropy-integral upper estimate of γ_α (up to a constant depending on α).
pub fn gamma_entropy(space: &FiniteMetricSpace, alpha: f64, cover_cap: usize) -> Result<GammaEstimate> {
    let e = entropy_integral(space, alpha, cover_cap)?;
    Ok(GammaEstimate {
        alpha,
        p: 1.0,
        l: 0,
        value: e.value,
        mode: GammaMode::EntropyIntegral,
        variant: GammaVariant::Standard,
        sequence: None,
    })
}

/// γ'_α over partition sequences with 𝒜_0 = {T}.
///
/// Exact mode enumerates refining partitions (as restricted growth strings)
/// on levels 1..n* and uses the discrete partition from n* on. Greedy mode
/// intersects Voronoi cells of the first 2^{2^{n-1}} points of the
/// farthest-point order, level by level.
pub fn gamma_prime(space: &FiniteMetricSpace, alpha: f64, mode: GammaMode, cap: usize) -> Result<GammaEstimate> {
    check_alpha(alpha)?;
    let seq = match mode {
        GammaMode::Exact => {
            if space.len() > cap {
                return Err(Error::Capacity { what: "exact partition functional", size: space.len(), cap });
            }
            exact_partition_sequence(space, alpha)?
        }
        GammaMode::Greedy => greedy_partition_sequence(space)?,
        GammaMode::EntropyIntegral => {
            return Err(Error::Unsupported("the partition functional has no entropy-integral mode".into()));
        }
    };
    let value = partition_functional_value(space, &seq, alpha)?;
    Ok(GammaEstimate {
        alpha,
        p: 1.0,
        l: 0,
        value,
        mode,
        variant: GammaVariant::Partition,
        sequence: Some(seq),
    })
}

fn cells_from_labels(labels: &[usize]) -> Vec<Vec<usize>> {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut cells = vec![Vec::new(); k];
    for (t, &c) in labels.iter().enumerate() {
        cells[c].push(t);
    }
    cells
}

fn discrete(size: usize) -> Vec<Vec<usize>> {
    (0..size).map(|t| vec![t]).collect()
}

fn exact_partition_sequence(space: &FiniteMetricSpace, alpha: f64) -> Result<AdmissibleSequence> {
    let size = space.len();
    let n_star = full_level(size);
    let mut best = PartitionSearch {
        space,
        alpha,
        n_star,
        best_value: f64::INFINITY,
        best_levels: Vec::new(),
        current: Vec::new(),
    };
    let whole = vec![0usize; size];
    let mut acc = vec![space.diameter(); size];
    if n_star == 1 {
        best.best_levels.clear();
    } else {
        best.level(1, &whole, &mut acc);
    }
    let mut levels = vec![vec![(0..size).collect::<Vec<_>>()]];
    for labels in &best.best_levels {
        levels.push(cells_from_labels(labels));
    }
    levels.push(discrete(size));
    if size == 1 {
        levels.truncate(1);
    }
    AdmissibleSequence::from_partitions(space, levels)
}

struct PartitionSearch<'a> {
    space: &'a FiniteMetricSpace,
    alpha: f64,
    n_star: usize,
    best_value: f64,
    best_levels: Vec<Vec<usize>>,
    current: Vec<Vec<usize>>,
}

impl PartitionSearch<'_> {
    /// Enumerates refinements of `parent` with at most 2^{2^n} cells.
    fn level(&mut self, n: usize, parent: &[usize], acc: &mut Vec<f64>) {
        let size = self.space.len();
        let cap = level_capacity(n);
        let mut labels = vec![0usize; size];
        let mut owner_of_label: Vec<usize> = Vec::new();
        self.assign(n, parent, 0, &mut labels, &mut owner_of_label, cap, acc);
    }

    #[allow(clippy::too_many_arguments)]
    fn assign(
        &mut self,
        n: usize,
        parent: &[usize],
        t: usize,
        labels: &mut Vec<usize>,
        owner: &mut Vec<usize>,
        cap: usize,
        acc: &mut Vec<f64>,
    ) {
        let size = self.space.len();
        if t == size {
            let cells = cells_from_labels(labels);
            let weight = 2f64.powf(n as f64 / self.alpha);
            let mut next = acc.clone();
            for cell in &cells {
                let d = weight * self.space.subset_diameter(cell);
                for &s in cell {
                    next[s] += d;
                }
            }
            let worst = next.iter().copied().fold(0.0, f64::max);
            if worst >= self.best_value {
                return;
            }
            self.current.push(labels.clone());
            if n + 1 == self.n_star {
                self.best_value = worst;
                self.best_levels = self.current.clone();
            } else {
                self.level(n + 1, labels, &mut next);
            }
            self.current.pop();
            return;
        }
        // cell t may join an existing cell of the same parent, or open a new one
        for c in 0..owner.len() {
            if owner[c] == parent[t] {
                labels[t] = c;
                self.assign(n, parent, t + 1, labels, owner, cap, acc);
            }
        }
        if owner.len() < cap {
            owner.push(parent[t]);
            labels[t] = owner.len() - 1;
            self.assign(n, parent, t + 1, labels, owner, cap, acc);
            owner.pop();
        }
    }
}

fn greedy_partition_sequence(space: &FiniteMetricSpace) -> Result<AdmissibleSequence> {
    let size = space.len();
    let order = farthest_point_order(space);
    let mut levels = vec![vec![(0..size).collect::<Vec<_>>()]];
    let mut labels = vec![0usize; size];
    let mut n = 1;
    loop {
        let last = levels.last().unwrap();
        if last.iter().all(|c| space.subset_diameter(c) == 0.0) {
            break;
        }
        let k = level_capacity(n - 1).min(size);
        let centers = &order[..k];
        // refine by (previous cell, nearest center)
        let keys: Vec<(usize, usize)> = (0..size).map(|t| (labels[t], space.nearest_in(t, centers).0)).collect();
        let mut distinct = keys.clone();
        distinct.sort_unstable();
        distinct.dedup();
        labels = keys.iter().map(|k| distinct.binary_search(k).unwrap()).collect();
        levels.push(cells_from_labels(&labels));
        n += 1;
    }
    AdmissibleSequence::from_partitions(space, levels)
}
