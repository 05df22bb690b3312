//! Random closed sets and the two sampling constructions built on them:
//! throwing uniform points onto the gaps of a set in `[0, 1]`, and reading
//! the digits of a Poisson process against a set in `(0, ∞)`.

use std::collections::BTreeMap;

use crate::composition::Composition;
use crate::error::{invalid, Error, Result};
use crate::stochastic::RngStream;

/// The scale-invariant Poisson set with intensity `θ dx/x` on `(0, ∞)`,
/// generated lazily outward from 1. Below 1 the atoms are `e^{-Γ_k}`, above
/// 1 they are `e^{Γ'_k}`, with `Γ`, `Γ'` independent rate-`θ` arrival times.
#[derive(Debug, Clone)]
pub struct ScaleInvariantSet {
    theta: f64,
    down: Vec<f64>,
    down_log: f64,
    up: Vec<f64>,
    up_log: f64,
    rng: RngStream,
}

impl ScaleInvariantSet {
    pub fn new(theta: f64, rng: &mut RngStream) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(invalid("theta", format!("must be > 0, got {theta}")));
        }
        Ok(Self {
            theta,
            down: Vec::new(),
            down_log: 0.0,
            up: Vec::new(),
            up_log: 0.0,
            rng: rng.fork(),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Atoms below 1 generated so far, decreasing.
    pub fn atoms_below_one(&self) -> &[f64] {
        &self.down
    }

    /// Atoms above 1 generated so far, increasing.
    pub fn atoms_above_one(&self) -> &[f64] {
        &self.up
    }

    fn push_down(&mut self) {
        self.down_log += self.rng.exponential(self.theta);
        self.down.push((-self.down_log).exp());
    }

    /// Generates atoms until one lies strictly below `x`.
    pub fn extend_below(&mut self, x: f64) {
        while self.down.last().is_none_or(|&a| a >= x) {
            self.push_down();
        }
    }

    /// Generates atoms until one lies strictly above `x`.
    pub fn extend_above(&mut self, x: f64) {
        while self.up.last().is_none_or(|&a| a <= x) {
            self.up_log += self.rng.exponential(self.theta);
            self.up.push(self.up_log.exp());
        }
    }

    /// Largest atom below 1.
    pub fn first_below_one(&mut self) -> f64 {
        if self.down.is_empty() {
            self.push_down();
        }
        self.down[0]
    }
}

/// Membership queries `S ∩ [a, b] ≠ ∅` on a closed subset of `(0, ∞)`.
pub trait ClosedSetQuery {
    fn meets(&mut self, a: f64, b: f64) -> bool;
}

impl ClosedSetQuery for ScaleInvariantSet {
    fn meets(&mut self, a: f64, b: f64) -> bool {
        debug_assert!(0.0 < a && a <= b);
        if a < 1.0 {
            self.extend_below(a);
            let top = b.min(1.0);
            // `down` is decreasing: find the first atom <= top.
            let idx = self.down.partition_point(|&d| d > top);
            if idx < self.down.len() && self.down[idx] >= a {
                return true;
            }
        }
        if b > 1.0 {
            self.extend_above(b);
            let lo = a.max(1.0);
            let idx = self.up.partition_point(|&u| u < lo);
            if idx < self.up.len() && self.up[idx] <= b {
                return true;
            }
        }
        false
    }
}

/// A set meeting every interval.
#[derive(Debug, Clone, Copy, Default)]
pub struct DenseSet;

impl ClosedSetQuery for DenseSet {
    fn meets(&mut self, _a: f64, _b: f64) -> bool {
        true
    }
}

/// Ordered open gaps of a closed set in `[0, 1]`, stored right to left, plus
/// the unresolved mass near 0. Backed samples can resolve that mass on demand.
#[derive(Debug, Clone)]
pub struct IntervalPartitionSample {
    gaps: Vec<(f64, f64)>,
    backing: Option<ScaleInvariantSet>,
}

impl IntervalPartitionSample {
    /// From disjoint intervals listed left to right.
    pub fn from_intervals(left_to_right: Vec<(f64, f64)>) -> Result<Self> {
        let mut prev_hi = 0.0;
        for &(lo, hi) in &left_to_right {
            if !(lo >= prev_hi && lo < hi && hi <= 1.0) {
                return Err(invalid(
                    "intervals",
                    format!("({lo}, {hi}) is not a fresh subinterval of [0,1]"),
                ));
            }
            prev_hi = hi;
        }
        let mut gaps = left_to_right;
        gaps.reverse();
        Ok(Self { gaps, backing: None })
    }

    fn from_set(mut set: ScaleInvariantSet, cutoff: f64) -> Self {
        set.extend_below(cutoff);
        let mut sample = Self {
            gaps: Vec::new(),
            backing: Some(set),
        };
        sample.sync_gaps();
        sample
    }

    fn sync_gaps(&mut self) {
        let Some(set) = &self.backing else { return };
        while self.gaps.len() < set.down.len() {
            let k = self.gaps.len();
            let hi = if k == 0 { 1.0 } else { set.down[k - 1] };
            self.gaps.push((set.down[k], hi));
        }
    }

    /// Gaps from left to right.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.gaps.iter().rev().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    /// Mass not covered by the listed gaps.
    pub fn residual(&self) -> f64 {
        1.0 - self.gaps.iter().map(|(lo, hi)| hi - lo).sum::<f64>()
    }

    /// The rightmost gap if it ends at 1.
    pub fn meander(&self) -> Option<(f64, f64)> {
        self.gaps.first().copied().filter(|&(_, hi)| hi == 1.0)
    }

    /// Length of the gap with right-to-left rank `key`.
    pub fn gap_length(&self, key: usize) -> f64 {
        let (lo, hi) = self.gaps[key];
        hi - lo
    }

    /// Right-to-left rank of the gap containing `u`, extending a backed
    /// sample when `u` falls below the resolved range.
    pub fn locate(&mut self, u: f64) -> Result<usize> {
        loop {
            // Gaps are ordered by decreasing position.
            let idx = self.gaps.partition_point(|&(lo, _)| lo >= u);
            if idx < self.gaps.len() && u < self.gaps[idx].1 {
                return Ok(idx);
            }
            let below_resolved = self.gaps.last().is_none_or(|&(lo, _)| u <= lo);
            match &mut self.backing {
                Some(set) if below_resolved => {
                    set.extend_below(u);
                    self.sync_gaps();
                }
                _ => return Err(Error::ResidualHit(u)),
            }
        }
    }
}

/// Gaps `(e^{-Γ_{k+1}}, e^{-Γ_k})` of the scale-invariant set in `[0,1]`,
/// resolved down to `cutoff` and extended lazily below it.
pub fn sample_scale_invariant_partition(
    theta: f64,
    cutoff: f64,
    rng: &mut RngStream,
) -> Result<IntervalPartitionSample> {
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(invalid("cutoff", "must lie in (0,1)"));
    }
    let set = ScaleInvariantSet::new(theta, rng)?;
    Ok(IntervalPartitionSample::from_set(set, cutoff))
}

fn group_sizes(keys: &[usize]) -> Result<Composition> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &k in keys {
        *counts.entry(k).or_insert(0) += 1;
    }
    // Larger right-to-left rank means further left.
    Composition::new(counts.values().rev().copied().collect())
}

/// Throws `n` uniform points and returns the occupied-gap counts left to right.
pub fn uniform_sampling_composition(
    partition: &mut IntervalPartitionSample,
    n: usize,
    rng: &mut RngStream,
) -> Result<Composition> {
    if n == 0 {
        return Err(invalid("n", "must be >= 1"));
    }
    let keys = (0..n)
        .map(|_| partition.locate(rng.uniform()))
        .collect::<Result<Vec<_>>>()?;
    group_sizes(&keys)
}

/// As [`uniform_sampling_composition`], also reporting for each point
/// whether it was the first to land in its gap.
pub fn discovery_indicators(
    partition: &mut IntervalPartitionSample,
    n: usize,
    rng: &mut RngStream,
) -> Result<(Composition, Vec<bool>)> {
    if n == 0 {
        return Err(invalid("n", "must be >= 1"));
    }
    let keys = (0..n)
        .map(|_| partition.locate(rng.uniform()))
        .collect::<Result<Vec<_>>>()?;
    let mut seen = std::collections::BTreeSet::new();
    let fresh = keys.iter().map(|k| seen.insert(*k)).collect();
    Ok((group_sizes(&keys)?, fresh))
}

/// Digits `ξ_1 = 1`, `ξ_j = 1` iff the set meets `[ε_{j-1}, ε_j]`, where
/// `ε_1 < ε_2 < ...` are the arrivals of a rate-1 Poisson process.
pub fn poisson_sampling_composition(
    set: &mut dyn ClosedSetQuery,
    n: usize,
    rng: &mut RngStream,
) -> Result<Composition> {
    if n == 0 {
        return Err(invalid("n", "must be >= 1"));
    }
    let mut bits = Vec::with_capacity(n);
    bits.push(true);
    let mut prev = rng.exponential(1.0);
    for _ in 1..n {
        let next = prev + rng.exponential(1.0);
        bits.push(set.meets(prev, next));
        prev = next;
    }
    Composition::from_binary(&bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_intervals() {
        let mut whole = IntervalPartitionSample::from_intervals(vec![(0.0, 1.0)]).unwrap();
        let mut rng = RngStream::new(4, 0);
        for _ in 0..20 {
            assert_eq!(
                uniform_sampling_composition(&mut whole, 6, &mut rng).unwrap(),
                Composition::one_block(6)
            );
        }
        let mut halves = IntervalPartitionSample::from_intervals(vec![(0.0, 0.5), (0.5, 1.0)]).unwrap();
        let n = 100_000;
        let ones = (0..n)
            .filter(|_| uniform_sampling_composition(&mut halves, 2, &mut rng).unwrap().len() == 2)
            .count();
        let sigma = (0.25f64 / n as f64).sqrt();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 3.0 * sigma);
        let mut holey = IntervalPartitionSample::from_intervals(vec![(0.5, 1.0)]).unwrap();
        let hit = (0..100).any(|_| matches!(holey.locate(rng.uniform()), Err(Error::ResidualHit(_))));
        assert!(hit);
        assert!(IntervalPartitionSample::from_intervals(vec![(0.5, 1.0), (0.0, 0.5)]).is_err());
    }

    #[test]
    fn scale_invariant_gaps_shrink() {
        let mut rng = RngStream::new(9, 0);
        let mut p = sample_scale_invariant_partition(1.0, 1e-12, &mut rng).unwrap();
        assert!(p.residual() < 1e-12);
        let gaps = p.intervals();
        for w in gaps.windows(2) {
            assert_eq!(w[0].1, w[1].0);
            assert!(w[0].0 < w[1].0);
        }
        assert_eq!(p.meander().unwrap().1, 1.0);
        // A point below the resolved range forces extension, not an error.
        let before = p.len();
        let key = p.locate(1e-200).unwrap();
        assert!(key >= before);
    }

    #[test]
    fn dense_set_gives_singletons() {
        let mut rng = RngStream::new(1, 0);
        assert_eq!(
            poisson_sampling_composition(&mut DenseSet, 7, &mut rng).unwrap(),
            Composition::singletons(7)
        );
        let mut set = ScaleInvariantSet::new(1.0, &mut rng).unwrap();
        assert_eq!(
            poisson_sampling_composition(&mut set, 1, &mut rng).unwrap(),
            Composition::one_block(1)
        );
    }

    #[test]
    fn set_queries_are_consistent() {
        let mut rng = RngStream::new(6, 0);
        let mut set = ScaleInvariantSet::new(2.0, &mut rng).unwrap();
        set.extend_below(1e-3);
        set.extend_above(1e3);
        let atoms: Vec<f64> = set
            .atoms_below_one()
            .iter()
            .chain(set.atoms_above_one())
            .copied()
            .collect();
        for _ in 0..2000 {
            let a = (rng.uniform() * 12.0 - 6.0).exp();
            let b = a * (1.0 + rng.uniform() * 3.0);
            let brute = atoms.iter().any(|&x| a <= x && x <= b);
            if a > 1e-3 && b < 1e3 {
                assert_eq!(set.meets(a, b), brute, "[{a}, {b}]");
            }
        }
    }
}
