//! Samplers for composition structures.
//!
//! Every sampler takes an explicit [`RngStream`], so a draw is a pure
//! function of the parameters, the seed and the stream id. Replication
//! splits a run into independent streams and merges the results in stream
//! order, which keeps parallel runs byte-reproducible.

pub mod arrange;
pub mod fragment;
pub mod gem;
pub mod sets;
pub mod strings;

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::composition::Composition;
use crate::error::{invalid, Error, Result};

pub use arrange::{arrange_partition, arrangement_prob, ArrangedSampler, PartitionTableSampler};
pub use fragment::{fragment_cpf, fragment_sample, FragmentCpf};
pub use gem::{
    sample_gem, sample_gem_pd2, sample_paintbox_partition, sample_sequential_partition, GemConvention, GemStream,
    PAINTBOX_STICKS,
};
pub use sets::{
    discovery_indicators, poisson_sampling_composition, sample_scale_invariant_partition, uniform_sampling_composition,
    ClosedSetQuery, DenseSet, IntervalPartitionSample, ScaleInvariantSet,
};
pub use strings::{
    sample_bernoulli_string, sample_markov_composition, sample_renewal_string, BernoulliStringSampler, MarkovSampler,
    RenewalStringSampler,
};

/// Seeded ChaCha8 generator on a numbered stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner, seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential with the given rate.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -self.uniform().ln() / rate
    }

    /// An independent generator seeded from this one, for objects such as
    /// random sets that draw their own randomness lazily.
    pub fn fork(&mut self) -> RngStream {
        let seed = self.inner.next_u64();
        RngStream::new(seed, 0)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Anything that draws a composition of a given `n`.
pub trait CompositionSampler: Send + Sync {
    fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Composition>;
}

impl<T: CompositionSampler + ?Sized> CompositionSampler for &T {
    fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Composition> {
        (**self).sample(n, rng)
    }
}

impl<T: CompositionSampler + ?Sized> CompositionSampler for Box<T> {
    fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Composition> {
        (**self).sample(n, rng)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OneBlockSampler;

impl CompositionSampler for OneBlockSampler {
    fn sample(&self, n: usize, _rng: &mut RngStream) -> Result<Composition> {
        Ok(Composition::one_block(n))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SingletonsSampler;

impl CompositionSampler for SingletonsSampler {
    fn sample(&self, n: usize, _rng: &mut RngStream) -> Result<Composition> {
        Ok(Composition::singletons(n))
    }
}

/// Index `j` (zero-based) with probability `w_j / Σ w`.
pub fn size_biased_pick(weights: &[f64], rng: &mut RngStream) -> Result<usize> {
    if weights.is_empty() {
        return Err(Error::EmptyInput("weights"));
    }
    let dist = WeightedIndex::new(weights).map_err(|e| invalid("weights", e.to_string()))?;
    Ok(dist.sample(rng))
}

/// Runs `draws` calls of `f` split over `replicas` streams of `seed`, in
/// parallel, and returns the results in (stream, draw) order.
pub fn replicate<T, F>(draws: usize, replicas: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RngStream) -> Result<T> + Sync,
{
    let replicas = replicas.max(1);
    let base = draws / replicas;
    let extra = draws % replicas;
    let f = &f;
    let chunks: Vec<Result<Vec<T>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..replicas)
            .map(|i| {
                let count = base + usize::from(i < extra);
                scope.spawn(move || {
                    let mut rng = RngStream::new(seed, i as u64);
                    (0..count).map(|_| f(&mut rng)).collect::<Result<Vec<T>>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampler thread panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(draws);
    for chunk in chunks {
        out.extend(chunk?);
    }
    Ok(out)
}

/// Count table of a batch of draws.
pub fn count_draws<K: Ord + Clone>(draws: &[K]) -> BTreeMap<K, u64> {
    let mut counts = BTreeMap::new();
    for d in draws {
        *counts.entry(d.clone()).or_insert(0) += 1;
    }
    counts
}
