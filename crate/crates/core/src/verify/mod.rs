//! Exact consistency checks on composition laws.
//!
//! Each check enumerates every composition in its range and reports the
//! worst violation. In rational mode a check passes only if every identity
//! holds exactly; float laws get an absolute tolerance of `1e-9` per entry.

pub mod stats;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::composition::{enumerate_compositions, uniform_deletions, Composition};
use crate::error::Result;
use crate::laws::{Cpf, DecrementMatrixPair, Reversed};
use crate::scalar::{format_scalar, Scalar};
use crate::structural::{block_counts, last_part_law, size_biased_part_law, structural_moments};

pub use stats::{chi_square_gof, ks_against, ks_two_sample, within_sigma, ChiSquare, KsResult};

pub const FLOAT_TOL: f64 = 1e-9;

fn tolerance<S: Scalar>() -> f64 {
    if S::EXACT {
        0.0
    } else {
        FLOAT_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// The composition (or matrix entry) where the identity fails.
    pub at: String,
    pub lhs: String,
    pub rhs: String,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub family: String,
    pub n_min: usize,
    pub n_max: usize,
    pub passed: bool,
    pub mode: &'static str,
    pub checked: usize,
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn verdict(&self) -> &'static str {
        if self.passed {
            "pass"
        } else {
            "fail"
        }
    }
}

/// Running worst violation.
struct Tally {
    checked: usize,
    worst: Option<Witness>,
    tol: f64,
}

impl Tally {
    fn new(tol: f64) -> Self {
        Self {
            checked: 0,
            worst: None,
            tol,
        }
    }

    fn record<S: Scalar>(&mut self, at: impl FnOnce() -> String, lhs: &S, rhs: &S) {
        self.checked += 1;
        if lhs.close_to(rhs, self.tol) {
            return;
        }
        let difference = lhs.abs_diff(rhs);
        // Exact differences can be tiny in f64; keep the first witness on ties.
        if self.worst.as_ref().is_none_or(|w| difference > w.difference) {
            self.worst = Some(Witness {
                at: at(),
                lhs: format_scalar(lhs),
                rhs: format_scalar(rhs),
                difference,
            });
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checked += other.checked;
        if let Some(w) = other.worst {
            if self.worst.as_ref().is_none_or(|mine| w.difference > mine.difference) {
                self.worst = Some(w);
            }
        }
        self
    }

    fn report<S: Scalar>(self, name: &str, family: String, n_min: usize, n_max: usize) -> CheckReport {
        CheckReport {
            name: name.into(),
            family,
            n_min,
            n_max,
            passed: self.worst.is_none(),
            mode: S::MODE,
            checked: self.checked,
            witness: self.worst,
            note: None,
        }
    }
}

/// Runs `f` for every `n` in `range` on its own thread and merges the tallies
/// in `n` order, so the reported witness does not depend on scheduling.
fn per_n<F>(range: std::ops::RangeInclusive<usize>, f: F) -> Result<Tally>
where
    F: Fn(usize) -> Result<Tally> + Sync,
{
    let f = &f;
    let parts: Vec<Result<Tally>> = std::thread::scope(|scope| {
        let handles: Vec<_> = range.map(|n| scope.spawn(move || f(n))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("check thread panicked"))
            .collect()
    });
    let mut total: Option<Tally> = None;
    for part in parts {
        let part = part?;
        total = Some(match total {
            None => part,
            Some(t) => t.merge(part),
        });
    }
    Ok(total.unwrap_or_else(|| Tally::new(0.0)))
}

/// `p(λ) = p(λ_1, ..., λ_ℓ + 1) + p(λ_1, ..., λ_ℓ, 1)` for all `|λ| < n_max`.
pub fn check_right_consistency<S: Scalar, C: Cpf<S> + ?Sized>(cpf: &C, n_max: usize) -> Result<CheckReport> {
    let tally = per_n(1..=n_max.saturating_sub(1), |n| {
        let mut t = Tally::new(tolerance::<S>());
        for c in enumerate_compositions(n)? {
            let lhs = cpf.prob(&c)?;
            let rhs = cpf.prob(&c.grow_last())? + cpf.prob(&c.append_one())?;
            t.record(|| c.to_string(), &lhs, &rhs);
        }
        Ok(t)
    })?;
    Ok(tally.report::<S>("right-consistency", cpf.family(), 1, n_max))
}

/// `p(λ) = p(λ_1 + 1, λ_2, ...) + p(1, λ_1, ...)` for all `|λ| < n_max`.
/// The note records that the reversed law's right-consistency verdict agrees.
pub fn check_left_consistency<S: Scalar, C: Cpf<S> + ?Sized>(cpf: &C, n_max: usize) -> Result<CheckReport> {
    let tally = per_n(1..=n_max.saturating_sub(1), |n| {
        let mut t = Tally::new(tolerance::<S>());
        for c in enumerate_compositions(n)? {
            let lhs = cpf.prob(&c)?;
            let rhs = cpf.prob(&c.grow_first())? + cpf.prob(&c.prepend_one())?;
            t.record(|| c.to_string(), &lhs, &rhs);
        }
        Ok(t)
    })?;
    let mut report = tally.report::<S>("left-consistency", cpf.family(), 1, n_max);
    let dual = check_right_consistency(&Reversed(cpf), n_max)?;
    if dual.passed == report.passed {
        report.note = Some(format!("reversed law right-consistency: {}", dual.verdict()));
    } else {
        report.passed = false;
        report.note = Some("duality with the reversed law's right-consistency violated".into());
    }
    Ok(report)
}

/// `p_{n-1}(λ) = Σ_μ p_n(μ) κ(μ, λ)` for `2 <= n <= n_max`, with `κ` the
/// uniform ball-deletion kernel.
pub fn check_uniform_consistency<S: Scalar, C: Cpf<S> + ?Sized>(cpf: &C, n_max: usize) -> Result<CheckReport> {
    let tally = per_n(2..=n_max, |n| {
        let mut pushed: BTreeMap<Composition, S> = BTreeMap::new();
        let n_s = S::from_int(n as i64);
        for mu in enumerate_compositions(n)? {
            let p = cpf.prob(&mu)?;
            for (lambda, count) in uniform_deletions(&mu) {
                let add = p.clone() * S::from_int(count as i64) / n_s.clone();
                let slot = pushed.entry(lambda).or_insert_with(S::zero);
                *slot = slot.clone() + add;
            }
        }
        let mut t = Tally::new(tolerance::<S>());
        for lambda in enumerate_compositions(n - 1)? {
            let lhs = cpf.prob(&lambda)?;
            let rhs = pushed.remove(&lambda).unwrap_or_else(S::zero);
            t.record(|| lambda.to_string(), &lhs, &rhs);
        }
        Ok(t)
    })?;
    Ok(tally.report::<S>("uniform-consistency", cpf.family(), 1, n_max))
}

/// The deletion recursions for `q` and `q*` at every `r <= n <= n_max`;
/// needs both matrices up to `n_max + 1`.
pub fn check_decrement_recursions<S: Scalar>(pair: &DecrementMatrixPair<S>, n_max: usize) -> Result<CheckReport> {
    if pair.max_n() < n_max + 1 {
        return Err(crate::error::Error::MatrixTooSmall {
            need: n_max + 1,
            have: pair.max_n(),
        });
    }
    let mut t = Tally::new(tolerance::<S>());
    let q = &pair.q;
    for n in 1..=n_max {
        let np1 = S::from_int(n as i64 + 1);
        for r in 1..=n {
            let up = S::from_int(r as i64 + 1) / np1.clone();
            let stay = S::from_int((n + 1 - r) as i64) / np1.clone();
            for (name, m) in [("q", q), ("q*", &pair.q_star)] {
                let rhs = up.clone() * m.get(n + 1, r + 1)
                    + stay.clone() * m.get(n + 1, r)
                    + m.get(n + 1, 1) * q.get(n, r) / np1.clone();
                t.record(|| format!("{name}({n}:{r})"), &m.get(n, r), &rhs);
            }
        }
    }
    Ok(t.report::<S>("decrement-recursions", "decrement pair".into(), 1, n_max))
}

/// The last part is a size-biased pick: `P(L_n = r) = r μ_{n,r}/n`.
pub fn check_last_part_size_biased<S: Scalar, C: Cpf<S> + ?Sized>(cpf: &C, n_max: usize) -> Result<CheckReport> {
    let moments = structural_moments(cpf, n_max)?;
    let tally = per_n(1..=n_max, |n| {
        let mut t = Tally::new(tolerance::<S>());
        let last = last_part_law(cpf, n)?;
        let biased = size_biased_part_law(&block_counts(&moments, n)?);
        for (r, (lhs, rhs)) in last.iter().zip(&biased).enumerate() {
            t.record(|| format!("n={n}, r={}", r + 1), lhs, rhs);
        }
        Ok(t)
    })?;
    Ok(tally.report::<S>("last-part-size-biased", cpf.family(), 1, n_max))
}

/// Uniform and right consistency together: a self-similar law.
pub fn certify_self_similar<S: Scalar, C: Cpf<S> + ?Sized>(cpf: &C, n_max: usize) -> Result<[CheckReport; 2]> {
    Ok([
        check_uniform_consistency(cpf, n_max)?,
        check_right_consistency(cpf, n_max)?,
    ])
}
