use serde::{Deserialize, Serialize};

use super::FiniteMetricSpace;
use crate::error::{Error, Result};

/// 2^{2^n}, saturating at `usize::MAX`.
pub fn level_capacity(n: usize) -> usize {
    if n >= 6 {
        return usize::MAX;
    }
    1usize.checked_shl(1u32 << n).unwrap_or(usize::MAX)
}

/// l = ⌊log₂ p⌋ for a moment order p ≥ 1.
pub fn truncation_level(p: f64) -> Result<usize> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("moment order must be a finite p >= 1, got {p}")));
    }
    let mut l = 0usize;
    while 2f64.powi(l as i32 + 1) <= p {
        l += 1;
    }
    Ok(l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Sets,
    Partitions,
}

/// One level of an admissible sequence. For partitions, `points` holds the
/// lowest-index representative of every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub n: usize,
    pub points: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<Vec<usize>>>,
}

/// Admissible sequence of subsets (|T_0| = 1, |T_n| ≤ 2^{2^n}) or of
/// increasing partitions (|𝒜_n| ≤ 2^{2^n}).
///
/// The last stored level is repeated forever; it must sit at distance zero
/// from every point (resp. have zero-diameter cells), so every chaining sum
/// is finite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibleSequence {
    kind: SequenceKind,
    levels: Vec<Level>,
    /// `projections[n][t]` is π_n(t).
    projections: Vec<Vec<usize>>,
}

impl AdmissibleSequence {
    pub fn from_sets(space: &FiniteMetricSpace, sets: Vec<Vec<usize>>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::InvalidSequence("no levels".into()));
        }
        let mut levels = Vec::with_capacity(sets.len());
        let mut projections = Vec::with_capacity(sets.len());
        for (n, mut set) in sets.into_iter().enumerate() {
            set.sort_unstable();
            set.dedup();
            let cap = if n == 0 { 1 } else { level_capacity(n) };
            if set.is_empty() || set.len() > cap {
                return Err(Error::InvalidSequence(format!("|T_{n}| = {} but must lie in 1..={cap}", set.len())));
            }
            if let Some(&bad) = set.iter().find(|&&s| s >= space.len()) {
                return Err(Error::InvalidSequence(format!("T_{n} contains unknown point {bad}")));
            }
            projections.push((0..space.len()).map(|t| space.nearest_in(t, &set).0).collect());
            levels.push(Level { n, points: set, cells: None });
        }
        let last = &levels[levels.len() - 1].points;
        if let Some(t) = (0..space.len()).find(|&t| space.dist_to_set(t, last) > 0.0) {
            return Err(Error::InvalidSequence(format!(
                "last level leaves point {t} at positive distance, so the chaining sum never terminates"
            )));
        }
        Ok(Self { kind: SequenceKind::Sets, levels, projections })
    }

    pub fn from_partitions(space: &FiniteMetricSpace, partitions: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if partitions.is_empty() {
            return Err(Error::InvalidSequence("no levels".into()));
        }
        let size = space.len();
        let mut levels = Vec::with_capacity(partitions.len());
        let mut projections = Vec::with_capacity(partitions.len());
        let mut prev_owner: Option<Vec<usize>> = None;
        for (n, cells) in partitions.into_iter().enumerate() {
            let cells = canonical_cells(cells);
            if cells.len() > level_capacity(n) {
                return Err(Error::InvalidSequence(format!(
                    "|𝒜_{n}| = {} exceeds {}",
                    cells.len(),
                    level_capacity(n)
                )));
            }
            let mut owner = vec![usize::MAX; size];
            for (c, cell) in cells.iter().enumerate() {
                if cell.is_empty() {
                    return Err(Error::InvalidSequence(format!("level {n} has an empty cell")));
                }
                for &t in cell {
                    if t >= size {
                        return Err(Error::InvalidSequence(format!("level {n} contains unknown point {t}")));
                    }
                    if owner[t] != usize::MAX {
                        return Err(Error::InvalidSequence(format!("point {t} lies in two cells at level {n}")));
                    }
                    owner[t] = c;
                }
            }
            if let Some(t) = owner.iter().position(|&c| c == usize::MAX) {
                return Err(Error::InvalidSequence(format!("level {n} does not cover point {t}")));
            }
            if let Some(prev) = &prev_owner {
                for cell in &cells {
                    if cell.iter().any(|&t| prev[t] != prev[cell[0]]) {
                        return Err(Error::InvalidSequence(format!("level {n} does not refine level {}", n - 1)));
                    }
                }
            }
            let reps: Vec<usize> = cells.iter().map(|c| c[0]).collect();
            projections.push(owner.iter().map(|&c| reps[c]).collect());
            levels.push(Level { n, points: reps, cells: Some(cells) });
            prev_owner = Some(owner);
        }
        let last = levels[levels.len() - 1].cells.as_ref().unwrap();
        if let Some(cell) = last.iter().find(|c| space.subset_diameter(c) > 0.0) {
            return Err(Error::InvalidSequence(format!(
                "last level has cell {cell:?} of positive diameter, so the chaining sum never terminates"
            )));
        }
        Ok(Self { kind: SequenceKind::Partitions, levels, projections })
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// T_n, with the last level repeated beyond the stored depth.
    pub fn set(&self, n: usize) -> &[usize] {
        &self.levels[n.min(self.levels.len() - 1)].points
    }

    /// π_n(t).
    pub fn project(&self, n: usize, t: usize) -> usize {
        self.projections[n.min(self.projections.len() - 1)][t]
    }

    /// Cells of 𝒜_n (partition sequences only).
    pub fn cells(&self, n: usize) -> Option<&[Vec<usize>]> {
        self.levels[n.min(self.levels.len() - 1)].cells.as_deref()
    }

    /// A_n(t), the cell of 𝒜_n containing t.
    pub fn cell_of(&self, n: usize, t: usize) -> Option<&[usize]> {
        self.cells(n)?.iter().find(|c| c.contains(&t)).map(Vec::as_slice)
    }

    fn check_space(&self, space: &FiniteMetricSpace) -> Result<()> {
        if self.projections[0].len() != space.len() {
            return Err(Error::InvalidSequence(format!(
                "sequence built for {} points, space has {}",
                self.projections[0].len(),
                space.len()
            )));
        }
        Ok(())
    }
}

fn canonical_cells(cells: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut cells: Vec<Vec<usize>> = cells
        .into_iter()
        .map(|mut c| {
            c.sort_unstable();
            c
        })
        .collect();
    cells.sort_by_key(|c| c.first().copied().unwrap_or(usize::MAX));
    cells
}

/// `sup_t Σ_{n ≥ l} 2^{n/α} d(t, T_n)` with `l = ⌊log₂ p⌋`.
pub fn functional_value(space: &FiniteMetricSpace, seq: &AdmissibleSequence, alpha: f64, p: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    seq.check_space(space)?;
    let l = truncation_level(p)?;
    let mut sup: f64 = 0.0;
    for t in 0..space.len() {
        let mut sum = 0.0;
        for n in l..seq.depth() {
            sum += 2f64.powf(n as f64 / alpha) * space.dist(t, seq.project(n, t));
        }
        sup = sup.max(sum);
    }
    Ok(sup)
}

/// `sup_t Σ_{n ≥ 0} 2^{n/α} Δ(A_n(t))` for a partition sequence.
pub fn partition_functional_value(space: &FiniteMetricSpace, seq: &AdmissibleSequence, alpha: f64) -> Result<f64> {
    if seq.kind != SequenceKind::Partitions {
        return Err(Error::InvalidSequence("partition functional needs a partition sequence".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    seq.check_space(space)?;
    let mut per_point = vec![0.0; space.len()];
    for (n, level) in seq.levels.iter().enumerate() {
        let weight = 2f64.powf(n as f64 / alpha);
        for cell in level.cells.as_ref().unwrap() {
            let diam = space.subset_diameter(cell);
            for &t in cell {
                per_point[t] += weight * diam;
            }
        }
    }
    Ok(per_point.into_iter().fold(0.0, f64::max))
}

/// Partition sequence with 𝒜_0 = {T} and 𝒜_n = {B ∩ C : B ∈ ℬ_{n-1}, C ∈ 𝒞_{n-1}}.
/// A shorter input keeps repeating its last level.
pub fn merge_partitions(
    space: &FiniteMetricSpace,
    b: &AdmissibleSequence,
    c: &AdmissibleSequence,
) -> Result<AdmissibleSequence> {
    if b.kind != SequenceKind::Partitions || c.kind != SequenceKind::Partitions {
        return Err(Error::InvalidSequence("merge_partitions needs two partition sequences".into()));
    }
    b.check_space(space)?;
    c.check_space(space)?;
    let depth = b.depth().max(c.depth());
    let mut out = vec![vec![(0..space.len()).collect::<Vec<_>>()]];
    for n in 1..=depth {
        let mut cells = Vec::new();
        for bc in b.cells(n - 1).unwrap() {
            for cc in c.cells(n - 1).unwrap() {
                let meet: Vec<usize> = bc.iter().copied().filter(|t| cc.contains(t)).collect();
                if !meet.is_empty() {
                    cells.push(meet);
                }
            }
        }
        out.push(cells);
    }
    AdmissibleSequence::from_partitions(space, out)
}
