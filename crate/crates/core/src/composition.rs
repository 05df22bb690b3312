//! Compositions of integers and the ball-deletion reductions acting on them.
//!
//! A composition of `n` is stored as its list of parts. The balls-in-boxes
//! picture numbers the balls `1..=n` from the left; the binary code has a `1`
//! at every ball that opens a new box.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest `n` for which exhaustive operations are allowed.
pub const ENUMERATION_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Composition {
    parts: Vec<usize>,
    n: usize,
}

impl Composition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Parse("a composition needs at least one part".into()));
        }
        if parts.contains(&0) {
            return Err(Error::Parse("parts must be positive".into()));
        }
        let n = parts.iter().sum();
        Ok(Self { parts, n })
    }

    pub fn one_block(n: usize) -> Self {
        assert!(n >= 1);
        Self { parts: vec![n], n }
    }

    pub fn singletons(n: usize) -> Self {
        assert!(n >= 1);
        Self { parts: vec![1; n], n }
    }

    pub fn from_binary(bits: &[bool]) -> Result<Self> {
        match bits.first() {
            None => return Err(Error::Parse("empty binary code".into())),
            Some(false) => return Err(Error::Parse("binary code must start with 1".into())),
            Some(true) => {}
        }
        let mut parts = Vec::new();
        let mut current = 0;
        for &b in bits {
            if b && current > 0 {
                parts.push(current);
                current = 0;
            }
            current += 1;
        }
        parts.push(current);
        Ok(Self { parts, n: bits.len() })
    }

    pub fn parse_binary(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("bad binary digit {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_binary(&bits)
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last(&self) -> usize {
        *self.parts.last().expect("nonempty")
    }

    /// Partial sums `Λ_1 < Λ_2 < ... < Λ_ℓ = n`.
    pub fn partial_sums(&self) -> Vec<usize> {
        self.parts
            .iter()
            .scan(0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }

    pub fn to_binary(&self) -> Vec<bool> {
        let mut bits = Vec::with_capacity(self.n);
        for &p in &self.parts {
            bits.push(true);
            bits.extend(std::iter::repeat_n(false, p - 1));
        }
        bits
    }

    pub fn binary_string(&self) -> String {
        self.to_binary()
            .into_iter()
            .map(|b| if b { '1' } else { '0' })
            .collect()
    }

    pub fn reverse(&self) -> Self {
        let mut parts = self.parts.clone();
        parts.reverse();
        Self { parts, n: self.n }
    }

    pub fn rank(&self) -> Partition {
        Partition::from_parts(self.parts.clone())
    }

    /// Removes the ball at 1-based place `pos`. Deleting the only ball of a
    /// composition of 1 yields `None`, the empty composition.
    pub fn delete_ball(&self, pos: BallPosition) -> Result<Option<Self>> {
        let pos = pos.0;
        if pos == 0 || pos > self.n {
            return Err(Error::PositionOutOfRange { pos, n: self.n });
        }
        if self.n == 1 {
            return Ok(None);
        }
        let mut parts = self.parts.clone();
        let mut seen = 0;
        for i in 0..parts.len() {
            seen += parts[i];
            if pos <= seen {
                parts[i] -= 1;
                if parts[i] == 0 {
                    parts.remove(i);
                }
                break;
            }
        }
        Ok(Some(Self { parts, n: self.n - 1 }))
    }

    /// `(λ_1, ..., λ_ℓ + 1)`
    pub fn grow_last(&self) -> Self {
        let mut parts = self.parts.clone();
        *parts.last_mut().expect("nonempty") += 1;
        Self { parts, n: self.n + 1 }
    }

    /// `(λ_1, ..., λ_ℓ, 1)`
    pub fn append_one(&self) -> Self {
        let mut parts = self.parts.clone();
        parts.push(1);
        Self { parts, n: self.n + 1 }
    }

    /// `(λ_1 + 1, λ_2, ...)`
    pub fn grow_first(&self) -> Self {
        let mut parts = self.parts.clone();
        parts[0] += 1;
        Self { parts, n: self.n + 1 }
    }

    /// `(1, λ_1, ...)`
    pub fn prepend_one(&self) -> Self {
        let mut parts = Vec::with_capacity(self.parts.len() + 1);
        parts.push(1);
        parts.extend_from_slice(&self.parts);
        Self { parts, n: self.n + 1 }
    }

    pub fn concat(pieces: &[Composition]) -> Result<Self> {
        Self::new(pieces.iter().flat_map(|c| c.parts.iter().copied()).collect())
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in &self.parts {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Composition {
    type Err = Error;

    /// Comma-separated parts, e.g. `"2,4,1,2"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .trim()
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("{t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }
}

/// A 1-based place among the balls of a composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BallPosition(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::Parse("a partition needs positive parts".into()));
        }
        Ok(Self::from_parts(parts))
    }

    fn from_parts(mut parts: Vec<usize>) -> Self {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// The partition with one copy of part `r` removed, `None` if nothing is left.
    pub fn without_part(&self, r: usize) -> Option<Self> {
        let idx = self.parts.iter().position(|&p| p == r)?;
        let mut parts = self.parts.clone();
        parts.remove(idx);
        if parts.is_empty() {
            None
        } else {
            Some(Self { parts })
        }
    }

    /// Distinct part sizes, largest first.
    pub fn distinct_parts(&self) -> Vec<usize> {
        let mut d = self.parts.clone();
        d.dedup();
        d
    }

    /// All distinct orderings of the parts, in lexicographic order.
    pub fn arrangements(&self) -> Vec<Composition> {
        let mut current = self.parts.clone();
        current.reverse();
        let mut out = vec![Composition::new(current.clone()).expect("positive parts")];
        while next_permutation(&mut current) {
            out.push(Composition::new(current.clone()).expect("positive parts"));
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        f.write_str(&s.join(","))
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let c: Composition = s.parse()?;
        Ok(c.rank())
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn check_cap(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "must be positive".into(),
        });
    }
    if n > ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            n,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

/// All `2^(n-1)` compositions of `n`, ordered lexicographically by binary code.
pub fn enumerate_compositions(n: usize) -> Result<Vec<Composition>> {
    check_cap(n)?;
    let tail = n - 1;
    Ok((0u32..1 << tail)
        .map(|code| {
            let mut bits = Vec::with_capacity(n);
            bits.push(true);
            for k in (0..tail).rev() {
                bits.push(code >> k & 1 == 1);
            }
            Composition::from_binary(&bits).expect("leading one")
        })
        .collect())
}

/// All partitions of `n`, in reverse lexicographic order (`(n)` first).
pub fn enumerate_partitions(n: usize) -> Result<Vec<Partition>> {
    check_cap(n)?;
    fn go(remaining: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition { parts: prefix.clone() });
            return;
        }
        for p in (1..=remaining.min(max)).rev() {
            prefix.push(p);
            go(remaining - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    Ok(out)
}

/// Law of the composition obtained from `mu` by deleting a uniformly chosen ball.
pub fn uniform_deletions(mu: &Composition) -> BTreeMap<Composition, usize> {
    let mut out = BTreeMap::new();
    for pos in 1..=mu.n() {
        if let Some(c) = mu.delete_ball(BallPosition(pos)).expect("in range") {
            *out.entry(c).or_insert(0) += 1;
        }
    }
    out
}

/// The uniform reduction kernel `κ(μ, λ)`: probability that deleting a
/// uniformly chosen ball of `mu` leaves `lambda`.
pub fn uniform_reduction_kernel<S: Scalar>(mu: &Composition, lambda: &Composition) -> Result<S> {
    if mu.n() != lambda.n() + 1 {
        return Err(Error::SizeMismatch {
            expected: lambda.n() + 1,
            got: mu.n(),
        });
    }
    let hits = uniform_deletions(mu).get(lambda).copied().unwrap_or(0);
    Ok(S::from_ratio(hits as i64, mu.n() as i64))
}
