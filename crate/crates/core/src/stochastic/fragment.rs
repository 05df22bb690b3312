//! Fragmentation: every part of an outer composition is broken up by an
//! independent inner composition of its size.

use crate::composition::{enumerate_compositions, Composition, ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::laws::{ensure_supported, Cpf, CpfTable};
use crate::scalar::Scalar;
use crate::stochastic::{CompositionSampler, RngStream};

/// Replaces each part `r` of `outer`, in place, by a draw of `inner` at `r`.
pub fn fragment_sample(
    outer: &Composition,
    inner: &dyn CompositionSampler,
    rng: &mut RngStream,
) -> Result<Composition> {
    let pieces = outer
        .parts()
        .iter()
        .map(|&r| inner.sample(r, rng))
        .collect::<Result<Vec<_>>>()?;
    Composition::concat(&pieces)
}

/// Law of the fragmented composition:
/// `p''(λ) = Σ_segmentations outer(segment sums) Π inner(segment)`.
#[derive(Debug, Clone)]
pub struct FragmentCpf<O, I> {
    outer: O,
    inner: I,
}

impl<O, I> FragmentCpf<O, I> {
    pub fn new(outer: O, inner: I) -> Self {
        Self { outer, inner }
    }
}

impl<S: Scalar, O: Cpf<S>, I: Cpf<S>> Cpf<S> for FragmentCpf<O, I> {
    fn prob(&self, c: &Composition) -> Result<S> {
        ensure_supported(self, c.n())?;
        if c.n() > ENUMERATION_CAP {
            return Err(Error::CapExceeded {
                n: c.n(),
                cap: ENUMERATION_CAP,
            });
        }
        let parts = c.parts();
        let cuts = parts.len() - 1;
        let mut total = S::zero();
        // Bit i of `mask` set means a segment boundary after part i.
        for mask in 0u32..(1u32 << cuts) {
            let mut sums = Vec::new();
            let mut weight = S::one();
            let mut start = 0;
            for end in 1..=parts.len() {
                if end == parts.len() || mask & (1 << (end - 1)) != 0 {
                    let segment = Composition::new(parts[start..end].to_vec())?;
                    sums.push(segment.n());
                    weight = weight * self.inner.prob(&segment)?;
                    start = end;
                }
            }
            if weight.is_zero() {
                continue;
            }
            total = total + weight * self.outer.prob(&Composition::new(sums)?)?;
        }
        Ok(total)
    }
    fn family(&self) -> String {
        format!("fragment[{} by {}]", self.outer.family(), self.inner.family())
    }
    fn max_n(&self) -> Option<usize> {
        match (self.outer.max_n(), self.inner.max_n()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Full table of the fragmented law at `n`.
pub fn fragment_cpf<S: Scalar, O: Cpf<S>, I: Cpf<S>>(outer: O, inner: I, n: usize) -> Result<CpfTable<S>> {
    let law = FragmentCpf::new(outer, inner);
    let rows = enumerate_compositions(n)?
        .into_iter()
        .map(|c| law.prob(&c).map(|p| (c, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CpfTable {
        family: law.family(),
        n,
        rows,
    })
}
