//! Binary-string samplers and the decreasing-chain sampler.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::composition::Composition;
use crate::error::{invalid, Result};
use crate::laws::DecrementMatrixPair;
use crate::scalar::Scalar;
use crate::stochastic::{CompositionSampler, RngStream};

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("n", "must be >= 1"));
    }
    Ok(())
}

/// Independent digits `ξ_1 = 1`, `P(ξ_j = 1) = θ/(j+θ-1)`.
pub fn sample_bernoulli_string(theta: f64, n: usize, rng: &mut RngStream) -> Result<Composition> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(invalid("theta", format!("must be > 0, got {theta}")));
    }
    check_n(n)?;
    let bits: Vec<bool> = (1..=n)
        .map(|j| j == 1 || rng.uniform() < theta / (j as f64 + theta - 1.0))
        .collect();
    Composition::from_binary(&bits)
}

/// Renewal string: a `1` at position 1, and after the last `1` at distance
/// `r` a new `1` with probability `α/r`. The gaps then have law
/// `P(X = r) = α (1-α)_{r-1}/r!`.
pub fn sample_renewal_string(alpha: f64, n: usize, rng: &mut RngStream) -> Result<Composition> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("must lie in (0,1), got {alpha}")));
    }
    check_n(n)?;
    let mut bits = Vec::with_capacity(n);
    bits.push(true);
    let mut since = 0usize;
    for _ in 1..n {
        since += 1;
        let renew = rng.uniform() < alpha / since as f64;
        if renew {
            since = 0;
        }
        bits.push(renew);
    }
    Composition::from_binary(&bits)
}

#[derive(Debug, Clone, Copy)]
pub struct BernoulliStringSampler {
    pub theta: f64,
}

impl CompositionSampler for BernoulliStringSampler {
    fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Composition> {
        sample_bernoulli_string(self.theta, n, rng)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RenewalStringSampler {
    pub alpha: f64,
    pub reversed: bool,
}

impl CompositionSampler for RenewalStringSampler {
    fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Composition> {
        let c = sample_renewal_string(self.alpha, n, rng)?;
        Ok(if self.reversed { c.reverse() } else { c })
    }
}

/// Exact sampler for the product formula, with one categorical table per row.
#[derive(Debug, Clone)]
pub struct MarkovSampler {
    q: Vec<WeightedIndex<f64>>,
    q_star: Vec<WeightedIndex<f64>>,
}

impl MarkovSampler {
    pub fn new<S: Scalar>(pair: &DecrementMatrixPair<S>) -> Result<Self> {
        let tol = if S::EXACT { 0.0 } else { 1e-9 };
        pair.q.validate("q", tol)?;
        pair.q_star.validate("q*", tol)?;
        let tables = |m: &crate::laws::DecrementMatrix<S>| {
            (1..=m.max_n())
                .map(|n| {
                    let w: Vec<f64> = m.row(n).iter().map(Scalar::to_f64).collect();
                    WeightedIndex::new(w).map_err(|e| invalid("decrement row", e.to_string()))
                })
                .collect::<Result<Vec<_>>>()
        };
        Ok(Self {
            q: tables(&pair.q)?,
            q_star: tables(&pair.q_star)?,
        })
    }

    pub fn max_n(&self) -> usize {
        self.q.len().min(self.q_star.len())
    }
}

impl CompositionSampler for MarkovSampler {
    /// Last part from `q*(n:·)`, then parts from `q(m:·)` on the remaining
    /// `m` balls, read back left to right.
    fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Composition> {
        check_n(n)?;
        if n > self.max_n() {
            return Err(crate::error::Error::MatrixTooSmall {
                need: n,
                have: self.max_n(),
            });
        }
        let mut parts = Vec::new();
        let last = self.q_star[n - 1].sample(rng) + 1;
        parts.push(last);
        let mut remaining = n - last;
        while remaining > 0 {
            let part = self.q[remaining - 1].sample(rng) + 1;
            parts.push(part);
            remaining -= part;
        }
        parts.reverse();
        Composition::new(parts)
    }
}

/// One draw from the product formula.
pub fn sample_markov_composition<S: Scalar>(
    pair: &DecrementMatrixPair<S>,
    n: usize,
    rng: &mut RngStream,
) -> Result<Composition> {
    MarkovSampler::new(pair)?.sample(n, rng)
}
