//! Arranging the parts of a two-parameter partition into a composition.
//!
//! A size-biased pick goes to the right end. The remaining parts are then
//! placed right to left: from a remainder `μ` with `k` parts, each part of
//! size `r` is chosen with probability
//!
//! ```text
//! (1/|μ|) · ((|μ| - r)τ + r(1 - τ)) / (1 - τ + (k - 1)τ),   τ = α/(2α + θ)
//! ```
//!
//! and placed to the left of those already placed.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::composition::{enumerate_partitions, Composition, Partition};
use crate::error::{invalid, Error, Result};
use crate::laws::partition_law;
use crate::scalar::{is_negative, Scalar};
use crate::stochastic::{size_biased_pick, CompositionSampler, RngStream};

fn tau<S: Scalar>(alpha: &S, theta: &S) -> Result<S> {
    if is_negative(alpha) || *alpha >= S::one() {
        return Err(invalid("alpha", format!("must lie in [0,1), got {alpha}")));
    }
    if *theta <= -alpha.clone() {
        return Err(invalid("theta", format!("must exceed -alpha, got {theta}")));
    }
    if alpha.is_zero() && theta.is_zero() {
        return Err(invalid("theta", "(alpha, theta) = (0, 0) is degenerate"));
    }
    Ok(alpha.clone() / (S::from_int(2) * alpha.clone() + theta.clone()))
}

/// Selection probability of one particular part of size `r` from a
/// remainder of `k` parts and total size `total`.
fn select_weight<S: Scalar>(tau: &S, total: usize, k: usize, r: usize) -> S {
    let (m, r_s) = (S::from_int(total as i64), S::from_int(r as i64));
    let num = (m.clone() - r_s.clone()) * tau.clone() + r_s * (S::one() - tau.clone());
    let den = S::one() - tau.clone() + S::from_int(k as i64 - 1) * tau.clone();
    num / (m * den)
}

/// One random arrangement of `partition`.
pub fn arrange_partition(partition: &Partition, alpha: f64, theta: f64, rng: &mut RngStream) -> Result<Composition> {
    let tau = tau(&alpha, &theta)?;
    let mut rest: Vec<usize> = partition.parts().to_vec();
    let sizes: Vec<f64> = rest.iter().map(|&p| p as f64).collect();
    let last = rest.swap_remove(size_biased_pick(&sizes, rng)?);
    let mut placed = vec![last];
    while !rest.is_empty() {
        let total: usize = rest.iter().sum();
        let k = rest.len();
        let weights: Vec<f64> = rest.iter().map(|&r| select_weight(&tau, total, k, r)).collect();
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Infeasible(format!("selection weights sum to {sum}")));
        }
        placed.push(rest.swap_remove(size_biased_pick(&weights, rng)?));
    }
    placed.reverse();
    Composition::new(placed)
}

/// Probability that arranging the parts of `c.rank()` produces `c`.
pub fn arrangement_prob<S: Scalar>(c: &Composition, alpha: &S, theta: &S) -> Result<S> {
    let tau = tau(alpha, theta)?;
    let parts = c.parts();
    let count = |slice: &[usize], r: usize| S::from_int(slice.iter().filter(|&&x| x == r).count() as i64);
    let last = c.last();
    let mut p = count(parts, last) * S::from_int(last as i64) / S::from_int(c.n() as i64);
    for j in (1..parts.len()).rev() {
        let rest = &parts[..j];
        let total: usize = rest.iter().sum();
        let r = parts[j - 1];
        p = p * count(rest, r) * select_weight(&tau, total, j, r);
    }
    Ok(p)
}

/// Draws partitions of a fixed `n` from the exact two-parameter law.
#[derive(Debug, Clone)]
pub struct PartitionTableSampler {
    n: usize,
    partitions: Vec<Partition>,
    dist: WeightedIndex<f64>,
}

impl PartitionTableSampler {
    pub fn new<S: Scalar>(alpha: &S, theta: &S, n: usize) -> Result<Self> {
        let partitions = enumerate_partitions(n)?;
        let weights = partitions
            .iter()
            .map(|p| partition_law(alpha, theta, p).map(|v| v.to_f64()))
            .collect::<Result<Vec<_>>>()?;
        let dist = WeightedIndex::new(weights).map_err(|e| invalid("partition law", e.to_string()))?;
        Ok(Self { n, partitions, dist })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sample(&self, rng: &mut RngStream) -> &Partition {
        &self.partitions[self.dist.sample(rng)]
    }
}

/// Exact partition draw followed by [`arrange_partition`].
#[derive(Debug, Clone)]
pub struct ArrangedSampler {
    table: PartitionTableSampler,
    alpha: f64,
    theta: f64,
}

impl ArrangedSampler {
    pub fn new<S: Scalar>(alpha: &S, theta: &S, n: usize) -> Result<Self> {
        tau(alpha, theta)?;
        Ok(Self {
            table: PartitionTableSampler::new(alpha, theta, n)?,
            alpha: alpha.to_f64(),
            theta: theta.to_f64(),
        })
    }
}

impl CompositionSampler for ArrangedSampler {
    fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Composition> {
        if n != self.table.n() {
            return Err(Error::SizeMismatch {
                expected: self.table.n(),
                got: n,
            });
        }
        let partition = self.table.sample(rng).clone();
        arrange_partition(&partition, self.alpha, self.theta, rng)
    }
}
