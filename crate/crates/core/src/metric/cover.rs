use serde::{Deserialize, Serialize};

use super::FiniteMetricSpace;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverMode {
    Exact,
    Greedy,
}

/// A cover of T by closed balls `{t : d(c, t) <= radius}` centred in T.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cover {
    pub radius: f64,
    pub count: usize,
    pub centers: Vec<usize>,
    pub mode: CoverMode,
}

/// N(T, d, u) at every breakpoint of the step function u -> N(T, d, u).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringProfile {
    pub radii: Vec<f64>,
    pub counts: Vec<usize>,
    pub centers: Vec<Vec<usize>>,
    /// False when the size cap forced greedy covers.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyIntegral {
    pub alpha: f64,
    pub value: f64,
    pub exact: bool,
}

/// Covering number at radius `u`.
///
/// `Exact` runs a set-cover search over center subsets of increasing size
/// and refuses spaces larger than `cap`; `Greedy` grows a farthest-point
/// cover from the Chebyshev center.
pub fn covering_number(space: &FiniteMetricSpace, u: f64, mode: CoverMode, cap: usize) -> Result<Cover> {
    if !(u >= 0.0) {
        return Err(Error::Domain(format!("covering radius must be nonnegative, got {u}")));
    }
    let centers = match mode {
        CoverMode::Exact => {
            let cap = cap.min(63);
            if space.len() > cap {
                return Err(Error::Capacity { what: "exact covering number", size: space.len(), cap });
            }
            exact_cover(space, u)
        }
        CoverMode::Greedy => greedy_cover(space, u),
    };
    Ok(Cover { radius: u, count: centers.len(), centers, mode })
}

fn exact_cover(space: &FiniteMetricSpace, u: f64) -> Vec<usize> {
    let n = space.len();
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let balls: Vec<u64> = (0..n)
        .map(|c| (0..n).filter(|&t| space.dist(c, t) <= u).fold(0u64, |m, t| m | (1 << t)))
        .collect();
    for k in 1..=n {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            let covered = combo.iter().fold(0u64, |m, &c| m | balls[c]);
            if covered == full {
                return combo;
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
    }
    (0..n).collect()
}

/// Advances `combo` to the next k-subset of `0..n` in lexicographic order.
pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn greedy_cover(space: &FiniteMetricSpace, u: f64) -> Vec<usize> {
    let n = space.len();
    let (first, _) = space.chebyshev();
    let mut centers = vec![first];
    let mut gap: Vec<f64> = (0..n).map(|t| space.dist(first, t)).collect();
    loop {
        let (far, d) = gap
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (t, &d)| if d > best.1 { (t, d) } else { best });
        if d <= u {
            return centers;
        }
        centers.push(far);
        for (t, g) in gap.iter_mut().enumerate() {
            *g = g.min(space.dist(far, t));
        }
    }
}

/// Covering numbers at every distinct pairwise distance. Exact covers are
/// used when `|T| <= cap`, greedy covers otherwise.
pub fn covering_profile(space: &FiniteMetricSpace, mode: CoverMode, cap: usize) -> Result<CoveringProfile> {
    let exact = mode == CoverMode::Exact && space.len() <= cap.min(63);
    let mode = if exact { CoverMode::Exact } else { CoverMode::Greedy };
    let radii = space.distinct_distances();
    let mut counts = Vec::with_capacity(radii.len());
    let mut centers = Vec::with_capacity(radii.len());
    for &r in &radii {
        let c = covering_number(space, r, mode, cap)?;
        counts.push(c.count);
        centers.push(c.centers);
    }
    Ok(CoveringProfile { radii, counts, centers, exact })
}

/// `∫_0^∞ (ln N(T, d, u))^{1/α} du`, integrated exactly over the steps of
/// N(T, d, ·). The integrand vanishes once a single ball covers T.
pub fn entropy_integral(space: &FiniteMetricSpace, alpha: f64, cap: usize) -> Result<EntropyIntegral> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let profile = covering_profile(space, CoverMode::Exact, cap)?;
    let mut value = 0.0;
    for (k, w) in profile.radii.windows(2).enumerate() {
        let count = profile.counts[k];
        if count > 1 {
            value += (count as f64).ln().powf(1.0 / alpha) * (w[1] - w[0]);
        }
    }
    Ok(EntropyIntegral { alpha, value, exact: profile.exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::tests::tri;
    use crate::metric::DEFAULT_COVER_CAP;

    #[test]
    fn tri_covers() {
        let s = tri();
        let c = covering_number(&s, 1.0, CoverMode::Exact, DEFAULT_COVER_CAP).unwrap();
        assert_eq!((c.count, c.centers.clone()), (1, vec![0]));
        let c = covering_number(&s, 0.5, CoverMode::Exact, DEFAULT_COVER_CAP).unwrap();
        assert_eq!(c.count, 3);
        let c = covering_number(&s, s.diameter(), CoverMode::Greedy, DEFAULT_COVER_CAP).unwrap();
        assert_eq!(c.count, 1);
    }

    #[test]
    fn exact_refused_above_cap() {
        let s = tri();
        let e = covering_number(&s, 0.1, CoverMode::Exact, 2).unwrap_err();
        assert!(matches!(e, Error::Capacity { cap: 2, .. }));
    }

    #[test]
    fn negative_radius_rejected() {
        assert!(covering_number(&tri(), -1.0, CoverMode::Greedy, 20).is_err());
    }

    #[test]
    fn singleton_integral_vanishes() {
        let s = FiniteMetricSpace::new(vec![vec![0.0]], None).unwrap();
        assert_eq!(entropy_integral(&s, 2.0, 20).unwrap().value, 0.0);
    }

    #[test]
    fn profile_of_tri() {
        let p = covering_profile(&tri(), CoverMode::Exact, 20).unwrap();
        assert_eq!(p.radii, vec![0.0, 1.0, 2.0]);
        assert_eq!(p.counts, vec![3, 1, 1]);
        assert!(p.exact);
    }

    #[test]
    fn combinations_are_lexicographic() {
        let mut c = vec![0, 1];
        let mut all = vec![c.clone()];
        while next_combination(&mut c, 4) {
            all.push(c.clone());
        }
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }
}
