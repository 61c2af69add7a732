//! Finite semi-metric spaces and the metric-complexity quantities built on
//! them: covering numbers, the entropy integral, admissible sequences and
//! the (truncated) γ-functionals.

mod cover;
mod gamma;
mod sequence;

pub(crate) use cover::next_combination;
pub use cover::{covering_number, covering_profile, entropy_integral, Cover, CoverMode, CoveringProfile, EntropyIntegral};
pub use gamma::{
    gamma_entropy, gamma_exact, gamma_greedy, gamma_prime, greedy_admissible_sequence, GammaEstimate, GammaMode, GammaVariant,
};
pub use sequence::{
    functional_value, level_capacity, merge_partitions, partition_functional_value, truncation_level,
    AdmissibleSequence, Level, SequenceKind,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest |T| for exhaustive γ searches unless the caller raises it.
pub const DEFAULT_GAMMA_CAP: usize = 6;
/// Largest |T| for exact (set-cover) covering numbers.
pub const DEFAULT_COVER_CAP: usize = 20;

const REL_TOL: f64 = 1e-9;

/// Norm used to turn a point cloud into a metric space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PointNorm {
    L1,
    #[default]
    L2,
    Linf,
}

impl PointNorm {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            PointNorm::L1 => diffs.sum(),
            PointNorm::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            PointNorm::Linf => diffs.fold(0.0, f64::max),
        }
    }
}

/// JSON input accepted for a metric space.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricInput {
    Matrix {
        #[serde(default)]
        labels: Option<Vec<String>>,
        dist: Vec<Vec<f64>>,
    },
    Points {
        #[serde(default)]
        labels: Option<Vec<String>>,
        points: Vec<Vec<f64>>,
        #[serde(default)]
        norm: PointNorm,
    },
}

/// A finite index set with a validated semi-metric.
///
/// Distances are stored row-major; zero off-diagonal entries are allowed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    #[serde(serialize_with = "serialize_rows")]
    dist: Vec<f64>,
    #[serde(skip)]
    n: usize,
}

fn serialize_rows<S: serde::Serializer>(dist: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let n = (dist.len() as f64).sqrt().round() as usize;
    let rows: Vec<&[f64]> = if n == 0 { Vec::new() } else { dist.chunks(n).collect() };
    rows.serialize(s)
}

impl<'de> Deserialize<'de> for FiniteMetricSpace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let input = MetricInput::deserialize(d)?;
        FiniteMetricSpace::from_input(input).map_err(serde::de::Error::custom)
    }
}

impl FiniteMetricSpace {
    /// Validates a square distance matrix. Labels default to `"0"`, `"1"`, ...
    pub fn new(dist: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(Error::InvalidMetric("empty index set".into()));
        }
        let labels = match labels {
            Some(l) if l.len() != n => {
                return Err(Error::InvalidMetric(format!("{} labels for {} points", l.len(), n)));
            }
            Some(l) => l,
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        let mut flat = vec![0.0; n * n];
        let mut scale: f64 = 1.0;
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMetric(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidMetric(format!("entry ({i}, {j}) is not finite")));
                }
                if v < 0.0 {
                    return Err(Error::InvalidMetric(format!("entry ({i}, {j}) = {v} is negative")));
                }
                scale = scale.max(v);
            }
        }
        let tol = REL_TOL * scale;
        for i in 0..n {
            if dist[i][i] != 0.0 {
                return Err(Error::InvalidMetric(format!("nonzero diagonal entry ({i}, {i}) = {}", dist[i][i])));
            }
            for j in (i + 1)..n {
                let (a, b) = (dist[i][j], dist[j][i]);
                if (a - b).abs() > tol {
                    return Err(Error::InvalidMetric(format!("asymmetric pair ({i}, {j}): {a} vs {b}")));
                }
                let v = 0.5 * (a + b);
                flat[i * n + j] = v;
                flat[j * n + i] = v;
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let direct = flat[i * n + k];
                    let detour = flat[i * n + j] + flat[j * n + k];
                    if direct > detour + tol {
                        return Err(Error::Triangle { i, j, k, direct, detour });
                    }
                }
            }
        }
        Ok(Self { labels, dist: flat, n })
    }

    /// Metric space induced by a norm on a point cloud.
    pub fn from_points(points: &[Vec<f64>], norm: PointNorm, labels: Option<Vec<String>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| p.len() != dim) {
            return Err(Error::InvalidMetric(format!("point {i} has dimension {}, expected {dim}", p.len())));
        }
        let dist = points
            .iter()
            .map(|a| points.iter().map(|b| norm.distance(a, b)).collect())
            .collect();
        Self::new(dist, labels)
    }

    pub fn from_input(input: MetricInput) -> Result<Self> {
        match input {
            MetricInput::Matrix { labels, dist } => Self::new(dist, labels),
            MetricInput::Points { labels, points, norm } => Self::from_points(&points, norm, labels),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let input: MetricInput = serde_json::from_str(text)?;
        Self::from_input(input)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Δ_d(T), the largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Diameter of a subset of points.
    pub fn subset_diameter(&self, points: &[usize]) -> f64 {
        let mut d: f64 = 0.0;
        for (a, &i) in points.iter().enumerate() {
            for &j in &points[a + 1..] {
                d = d.max(self.dist(i, j));
            }
        }
        d
    }

    /// Chebyshev center and radius: `min_s max_t d(s, t)`, lowest index on ties.
    pub fn chebyshev(&self) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for s in 0..self.n {
            let r = (0..self.n).map(|t| self.dist(s, t)).fold(0.0, f64::max);
            if r < best.1 {
                best = (s, r);
            }
        }
        best
    }

    /// Nearest element of `set` to `t`; ties go to the lowest point index.
    pub fn nearest_in(&self, t: usize, set: &[usize]) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for &s in set {
            let d = self.dist(t, s);
            if d < best.1 || (d == best.1 && s < best.0) {
                best = (s, d);
            }
        }
        best
    }

    /// d(t, S) = min over s in S.
    pub fn dist_to_set(&self, t: usize, set: &[usize]) -> f64 {
        set.iter().map(|&s| self.dist(t, s)).fold(f64::INFINITY, f64::min)
    }

    /// Sorted distinct pairwise distances, always starting at 0.
    pub fn distinct_distances(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.dist.clone();
        v.push(0.0);
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tri() -> FiniteMetricSpace {
        FiniteMetricSpace::new(vec![vec![0., 1., 1.], vec![1., 0., 2.], vec![1., 2., 0.]], None).unwrap()
    }

    #[test]
    fn singleton_has_zero_diameter() {
        let s = FiniteMetricSpace::new(vec![vec![0.0]], None).unwrap();
        assert_eq!(s.diameter(), 0.0);
        assert_eq!(s.chebyshev(), (0, 0.0));
    }

    #[test]
    fn triangle_equality_case_is_accepted() {
        let s = tri();
        assert_eq!(s.diameter(), 2.0);
        assert_eq!(s.chebyshev(), (0, 1.0));
    }

    #[test]
    fn two_points() {
        let s = FiniteMetricSpace::new(vec![vec![0., 0.25], vec![0.25, 0.]], None).unwrap();
        assert_eq!(s.diameter(), 0.25);
    }

    #[test]
    fn rejects_nonzero_diagonal() {
        let e = FiniteMetricSpace::new(vec![vec![0., 1.], vec![1., 0.5]], None).unwrap_err();
        assert!(e.to_string().contains("diagonal"), "{e}");
    }

    #[test]
    fn rejects_asymmetry_and_negative() {
        assert!(FiniteMetricSpace::new(vec![vec![0., 1.], vec![2., 0.]], None).is_err());
        assert!(FiniteMetricSpace::new(vec![vec![0., -1.], vec![-1., 0.]], None).is_err());
    }

    #[test]
    fn triangle_violation_names_triple() {
        let e = FiniteMetricSpace::new(vec![vec![0., 1., 3.], vec![1., 0., 1.], vec![3., 1., 0.]], None).unwrap_err();
        match e {
            Error::Triangle { i, j, k, .. } => assert_eq!((i, j, k), (0, 1, 2)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn semi_metric_zero_distances_allowed() {
        let s = FiniteMetricSpace::new(vec![vec![0., 0., 1.], vec![0., 0., 1.], vec![1., 1., 0.]], None).unwrap();
        assert_eq!(s.nearest_in(1, &[0, 1]), (0, 0.0));
    }

    #[test]
    fn json_inputs() {
        let s = FiniteMetricSpace::from_json(r#"{"labels":["a","b"],"dist":[[0,2],[2,0]]}"#).unwrap();
        assert_eq!(s.labels(), ["a", "b"]);
        let p = FiniteMetricSpace::from_json(r#"{"points":[[0,0],[3,4]],"norm":"l2"}"#).unwrap();
        assert_eq!(p.dist(0, 1), 5.0);
        let q = FiniteMetricSpace::from_json(r#"{"points":[[0,0],[3,4]],"norm":"linf"}"#).unwrap();
        assert_eq!(q.dist(0, 1), 4.0);
        let back: FiniteMetricSpace = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
