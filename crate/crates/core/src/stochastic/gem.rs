//! Stick-breaking (GEM) frequencies and Kingman paintbox partitions.

use rand_distr::{Beta, Distribution};

use crate::composition::Partition;
use crate::error::{invalid, Error, Result};
use crate::stochastic::RngStream;

/// Which Beta law the `i`-th stick uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GemConvention {
    /// `W_i ~ Beta(1-α, θ+iα)`, the usual two-parameter GEM.
    Standard,
    /// `W_i ~ Beta(1-α, α+iθ)`. Agrees with `Standard` at `i = 1` and when `α = θ`.
    Literal,
}

impl GemConvention {
    fn shape_b(self, alpha: f64, theta: f64, i: usize) -> f64 {
        match self {
            GemConvention::Standard => theta + i as f64 * alpha,
            GemConvention::Literal => alpha + i as f64 * theta,
        }
    }
}

fn check(alpha: f64, theta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(invalid("alpha", format!("must lie in [0,1), got {alpha}")));
    }
    if theta <= -alpha || !theta.is_finite() {
        return Err(invalid("theta", format!("must exceed -alpha, got {theta}")));
    }
    Ok(())
}

const MAX_STICKS: usize = 1_000_000;

/// Sticks resolved explicitly by [`sample_paintbox_partition`].
pub const PAINTBOX_STICKS: usize = 4096;

/// Lazily extended stick-breaking sequence.
#[derive(Debug, Clone)]
pub struct GemStream {
    alpha: f64,
    theta: f64,
    convention: GemConvention,
    freqs: Vec<f64>,
    cumulative: Vec<f64>,
    remaining: f64,
    rng: RngStream,
}

impl GemStream {
    pub fn new(alpha: f64, theta: f64, convention: GemConvention, rng: &mut RngStream) -> Result<Self> {
        check(alpha, theta)?;
        Ok(Self {
            alpha,
            theta,
            convention,
            freqs: Vec::new(),
            cumulative: Vec::new(),
            remaining: 1.0,
            rng: rng.fork(),
        })
    }

    fn extend(&mut self) -> Result<()> {
        let i = self.freqs.len() + 1;
        let b = self.convention.shape_b(self.alpha, self.theta, i);
        if b <= 0.0 {
            return Err(invalid("theta", format!("stick {i} has Beta shape {b} <= 0")));
        }
        let w = if self.alpha == 0.0 && b == 1.0 {
            self.rng.uniform()
        } else {
            Beta::new(1.0 - self.alpha, b)
                .map_err(|e| invalid("beta", e.to_string()))?
                .sample(&mut self.rng)
        };
        let v = self.remaining * w;
        self.remaining -= v;
        let last = self.cumulative.last().copied().unwrap_or(0.0);
        self.freqs.push(v);
        self.cumulative.push(last + v);
        Ok(())
    }

    /// `Ṽ_i`, one-based.
    pub fn freq(&mut self, i: usize) -> Result<f64> {
        while self.freqs.len() < i {
            self.extend()?;
        }
        Ok(self.freqs[i - 1])
    }

    /// Zero-based index of the stick covering `u ∈ (0,1)`.
    pub fn locate(&mut self, u: f64) -> Result<usize> {
        self.locate_within(u, MAX_STICKS).ok_or(Error::ResidualHit(u))
    }

    /// As [`GemStream::locate`], drawing at most `max_sticks` sticks; `None`
    /// when `u` falls in the mass left after them.
    pub fn locate_within(&mut self, u: f64, max_sticks: usize) -> Option<usize> {
        loop {
            let idx = self.cumulative.partition_point(|&c| c <= u);
            if idx < self.cumulative.len() {
                return Some(idx);
            }
            if self.freqs.len() >= max_sticks || self.extend().is_err() {
                return None;
            }
        }
    }

    /// Mass not yet allocated to a stick.
    pub fn remaining(&self) -> f64 {
        self.remaining
    }

    /// Largest frequency of the whole sequence: sticks are drawn until the
    /// unallocated mass is below the running maximum.
    pub fn largest(&mut self) -> Result<f64> {
        let mut best = 0.0f64;
        let mut i = 0;
        loop {
            i += 1;
            best = best.max(self.freq(i)?);
            if self.remaining < best {
                return Ok(best);
            }
        }
    }
}

/// `Ṽ_1, ..., Ṽ_k`.
pub fn sample_gem(
    alpha: f64,
    theta: f64,
    k: usize,
    convention: GemConvention,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let mut stream = GemStream::new(alpha, theta, convention, rng)?;
    (1..=k).map(|i| stream.freq(i)).collect()
}

/// First stick `Beta(1-α, α+θ)`, the rest a rescaled `(α, θ+α)` sequence
/// under the same convention.
pub fn sample_gem_pd2(
    alpha: f64,
    theta: f64,
    k: usize,
    convention: GemConvention,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    check(alpha, theta)?;
    if k == 0 {
        return Ok(Vec::new());
    }
    let w = Beta::new(1.0 - alpha, alpha + theta)
        .map_err(|e| invalid("beta", e.to_string()))?
        .sample(rng);
    let mut out = vec![w];
    out.extend(
        sample_gem(alpha, theta + alpha, k - 1, convention, rng)?
            .into_iter()
            .map(|v| (1.0 - w) * v),
    );
    Ok(out)
}

/// Partition of `n` balls thrown uniformly onto GEM sticks.
///
/// Under the standard convention the sticks after the first
/// [`PAINTBOX_STICKS`] form a `GEM(α, θ + Kα)` sequence, so balls landing in
/// that remainder are partitioned by [`sample_sequential_partition`] with the
/// shifted parameters. The literal convention has no such shift and keeps
/// drawing sticks, failing with [`Error::ResidualHit`] past a million.
pub fn sample_paintbox_partition(
    alpha: f64,
    theta: f64,
    n: usize,
    convention: GemConvention,
    rng: &mut RngStream,
) -> Result<Partition> {
    let mut stream = GemStream::new(alpha, theta, convention, rng)?;
    let mut counts: Vec<usize> = Vec::new();
    let mut deep = 0;
    for _ in 0..n {
        let u = rng.uniform();
        let idx = match convention {
            GemConvention::Standard => match stream.locate_within(u, PAINTBOX_STICKS) {
                Some(idx) => idx,
                None => {
                    deep += 1;
                    continue;
                }
            },
            GemConvention::Literal => stream.locate(u)?,
        };
        if idx >= counts.len() {
            counts.resize(idx + 1, 0);
        }
        counts[idx] += 1;
    }
    let mut parts: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
    if deep > 0 {
        let shifted = theta + PAINTBOX_STICKS as f64 * alpha;
        parts.extend_from_slice(sample_sequential_partition(alpha, shifted, deep, convention, rng)?.parts());
    }
    Partition::new(parts)
}

/// Partition of `n` balls built in order of appearance: a ball joins the
/// `i`-th block found so far with probability `Ṽ_i` and opens a new block
/// with the unallocated remainder. Uses at most `n` sticks.
pub fn sample_sequential_partition(
    alpha: f64,
    theta: f64,
    n: usize,
    convention: GemConvention,
    rng: &mut RngStream,
) -> Result<Partition> {
    let mut stream = GemStream::new(alpha, theta, convention, rng)?;
    let mut counts: Vec<usize> = Vec::new();
    for _ in 0..n {
        let u = rng.uniform();
        let k = counts.len();
        let open = if k == 0 { 0.0 } else { stream.cumulative[k - 1] };
        if u < open {
            counts[stream.cumulative.partition_point(|&c| c <= u)] += 1;
        } else {
            stream.freq(k + 1)?;
            counts.push(1);
        }
    }
    Partition::new(counts)
}
