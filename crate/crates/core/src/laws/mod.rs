//! Probability laws over compositions.
//!
//! A [`Cpf`] (composition probability function) assigns a probability to
//! every composition of every supported `n`. The parametric families live
//! here; decrement matrices and the Lévy calculus that produces them are in
//! [`decrement`] and [`levy`], the two-parameter partition machinery in
//! [`two_param`].

pub mod decrement;
pub mod levy;
pub mod two_param;

use std::collections::HashMap;
use std::sync::Arc;

use crate::composition::{enumerate_compositions, Composition};
use crate::error::{invalid, Error, Result};
use crate::scalar::{factorial, is_positive, pow, rising, Scalar};

pub use decrement::{markov_cpf, polya_q, two_param_q, DecrementMatrix, DecrementMatrixPair, MarkovCpf};
pub use levy::{
    levy_binomial, levy_exponent, meander_moments, potential_from_levy, stationary_pair, stationary_pair_from_spec,
    upchain_row_mass, upchain_transition, LevySpec, LevyTail, MeanderLaw,
};
pub use two_param::{partition_law, sibi_cpf, SibiCpf};

pub trait Cpf<S: Scalar>: Send + Sync {
    fn prob(&self, c: &Composition) -> Result<S>;

    /// Short tag used in record files, e.g. `ewens(theta=1)`.
    fn family(&self) -> String;

    /// Largest supported `n`, if bounded.
    fn max_n(&self) -> Option<usize> {
        None
    }

    fn supports(&self, n: usize) -> bool {
        self.max_n().is_none_or(|m| n <= m)
    }
}

impl<S: Scalar, C: Cpf<S> + ?Sized> Cpf<S> for Box<C> {
    fn prob(&self, c: &Composition) -> Result<S> {
        (**self).prob(c)
    }
    fn family(&self) -> String {
        (**self).family()
    }
    fn max_n(&self) -> Option<usize> {
        (**self).max_n()
    }
}

impl<S: Scalar, C: Cpf<S> + ?Sized> Cpf<S> for Arc<C> {
    fn prob(&self, c: &Composition) -> Result<S> {
        (**self).prob(c)
    }
    fn family(&self) -> String {
        (**self).family()
    }
    fn max_n(&self) -> Option<usize> {
        (**self).max_n()
    }
}

impl<S: Scalar, C: Cpf<S> + ?Sized> Cpf<S> for &C {
    fn prob(&self, c: &Composition) -> Result<S> {
        (**self).prob(c)
    }
    fn family(&self) -> String {
        (**self).family()
    }
    fn max_n(&self) -> Option<usize> {
        (**self).max_n()
    }
}

pub(crate) fn ensure_supported<S: Scalar, C: Cpf<S> + ?Sized>(cpf: &C, n: usize) -> Result<()> {
    match cpf.max_n() {
        Some(m) if n > m => Err(Error::MatrixTooSmall { need: n, have: m }),
        _ => Ok(()),
    }
}

/// The full law of `C_n`, in enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct CpfTable<S> {
    pub family: String,
    pub n: usize,
    pub rows: Vec<(Composition, S)>,
}

impl<S: Scalar> CpfTable<S> {
    pub fn total(&self) -> S {
        self.rows.iter().fold(S::zero(), |acc, (_, p)| acc + p.clone())
    }

    pub fn get(&self, c: &Composition) -> Option<&S> {
        self.rows.iter().find(|(k, _)| k == c).map(|(_, p)| p)
    }
}

pub fn cpf_table<S: Scalar, C: Cpf<S> + ?Sized>(cpf: &C, n: usize) -> Result<CpfTable<S>> {
    ensure_supported(cpf, n)?;
    let rows = enumerate_compositions(n)?
        .into_iter()
        .map(|c| cpf.prob(&c).map(|p| (c, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CpfTable {
        family: cpf.family(),
        n,
        rows,
    })
}

/// A law backed by explicit tables, one per `n`.
#[derive(Debug, Clone)]
pub struct TableCpf<S> {
    family: String,
    entries: HashMap<Composition, S>,
    max_n: usize,
}

impl<S: Scalar> TableCpf<S> {
    pub fn from_tables(family: impl Into<String>, tables: Vec<CpfTable<S>>) -> Self {
        let max_n = tables.iter().map(|t| t.n).max().unwrap_or(0);
        let entries = tables.into_iter().flat_map(|t| t.rows).collect();
        Self {
            family: family.into(),
            entries,
            max_n,
        }
    }
}

impl<S: Scalar> Cpf<S> for TableCpf<S> {
    fn prob(&self, c: &Composition) -> Result<S> {
        ensure_supported(self, c.n())?;
        Ok(self.entries.get(c).cloned().unwrap_or_else(S::zero))
    }
    fn family(&self) -> String {
        self.family.clone()
    }
    fn max_n(&self) -> Option<usize> {
        Some(self.max_n)
    }
}

/// Ewens composition law: independent binary digits with
/// `P(ξ_j = 1) = θ/(j+θ-1)`, giving `p(λ) = θ^ℓ n!/(θ)_n Π_j 1/Λ_j`.
#[derive(Debug, Clone)]
pub struct EwensCpf<S> {
    theta: S,
}

pub fn ewens_cpf<S: Scalar>(theta: S) -> Result<EwensCpf<S>> {
    if !is_positive(&theta) {
        return Err(invalid("theta", format!("must be > 0, got {theta}")));
    }
    Ok(EwensCpf { theta })
}

impl<S: Scalar> EwensCpf<S> {
    pub fn theta(&self) -> &S {
        &self.theta
    }
}

impl<S: Scalar> Cpf<S> for EwensCpf<S> {
    fn prob(&self, c: &Composition) -> Result<S> {
        let n = c.n();
        let mut p = pow(&self.theta, c.len()) * factorial::<S>(n) / rising(&self.theta, n);
        for big_lambda in c.partial_sums() {
            p = p / S::from_int(big_lambda as i64);
        }
        Ok(p)
    }
    fn family(&self) -> String {
        format!("ewens(theta={})", self.theta)
    }
}

/// Renewal law of the stable-subordinator range:
/// `p(λ) = λ_ℓ α^(ℓ-1) Π_j (1-α)_{λ_j - 1}/λ_j!`. With `reversed`, the law of
/// the reversed composition (meander on the left).
#[derive(Debug, Clone)]
pub struct RenewalCpf<S> {
    alpha: S,
    reversed: bool,
}

pub fn renewal_cpf<S: Scalar>(alpha: S, reversed: bool) -> Result<RenewalCpf<S>> {
    if !is_positive(&alpha) || alpha >= S::one() {
        return Err(invalid("alpha", format!("must lie in (0,1), got {alpha}")));
    }
    Ok(RenewalCpf { alpha, reversed })
}

impl<S: Scalar> RenewalCpf<S> {
    pub fn alpha(&self) -> &S {
        &self.alpha
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }
}

impl<S: Scalar> Cpf<S> for RenewalCpf<S> {
    fn prob(&self, c: &Composition) -> Result<S> {
        let owned;
        let c = if self.reversed {
            owned = c.reverse();
            &owned
        } else {
            c
        };
        let one_minus = S::one() - self.alpha.clone();
        let mut p = S::from_int(c.last() as i64) * pow(&self.alpha, c.len() - 1);
        for &part in c.parts() {
            p = p * rising(&one_minus, part - 1) / factorial::<S>(part);
        }
        Ok(p)
    }
    fn family(&self) -> String {
        let tag = if self.reversed { "renewal-reversed" } else { "renewal" };
        format!("{tag}(alpha={})", self.alpha)
    }
}

/// Everything in one box.
#[derive(Debug, Clone, Copy, Default)]
pub struct OneBlockCpf;

impl<S: Scalar> Cpf<S> for OneBlockCpf {
    fn prob(&self, c: &Composition) -> Result<S> {
        Ok(if c.len() == 1 { S::one() } else { S::zero() })
    }
    fn family(&self) -> String {
        "one-block".into()
    }
}

/// Every ball in its own box.
#[derive(Debug, Clone, Copy, Default)]
pub struct SingletonsCpf;

impl<S: Scalar> Cpf<S> for SingletonsCpf {
    fn prob(&self, c: &Composition) -> Result<S> {
        Ok(if c.len() == c.n() { S::one() } else { S::zero() })
    }
    fn family(&self) -> String {
        "singletons".into()
    }
}

/// Law of the reversed composition.
#[derive(Debug, Clone)]
pub struct Reversed<C>(pub C);

impl<S: Scalar, C: Cpf<S>> Cpf<S> for Reversed<C> {
    fn prob(&self, c: &Composition) -> Result<S> {
        self.0.prob(&c.reverse())
    }
    fn family(&self) -> String {
        format!("reversed[{}]", self.0.family())
    }
    fn max_n(&self) -> Option<usize> {
        self.0.max_n()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn c(parts: &[usize]) -> Composition {
        Composition::new(parts.to_vec()).unwrap()
    }

    fn r(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    // Oracle: product of independent digit probabilities θ/(j+θ-1).
    fn ewens_by_digits(theta: &Rational, x: &Composition) -> Rational {
        let bits = x.to_binary();
        let mut p = Rational::from_int(1);
        for (idx, &b) in bits.iter().enumerate().skip(1) {
            let j = idx as i64 + 1;
            let one = theta.clone() / (Rational::from_int(j - 1) + theta.clone());
            p *= if b { one } else { Rational::from_int(1) - one };
        }
        p
    }

    #[test]
    fn ewens_values() {
        let e1 = ewens_cpf(r(1, 1)).unwrap();
        assert_eq!(e1.prob(&c(&[2])).unwrap(), r(1, 2));
        assert_eq!(e1.prob(&c(&[1, 1])).unwrap(), r(1, 2));
        let e2 = ewens_cpf(r(2, 1)).unwrap();
        assert_eq!(e2.prob(&c(&[2])).unwrap(), r(1, 3));
        assert_eq!(e2.prob(&c(&[1, 1])).unwrap(), r(2, 3));
        assert_eq!(ewens_cpf(r(7, 3)).unwrap().prob(&c(&[1])).unwrap(), r(1, 1));
        // n = 3 at θ = 1: (3), (2,1), (1,2), (1,1,1)
        let t = cpf_table(&e1, 3).unwrap();
        let vals: Vec<_> = t.rows.iter().map(|(_, p)| p.clone()).collect();
        assert_eq!(vals, vec![r(1, 3), r(1, 6), r(1, 3), r(1, 6)]);
        assert!(ewens_cpf(r(0, 1)).is_err());
    }

    #[test]
    fn ewens_matches_digit_oracle() {
        for theta in [r(1, 2), r(1, 1), r(2, 1)] {
            let e = ewens_cpf(theta.clone()).unwrap();
            for n in 1..=8 {
                for x in enumerate_compositions(n).unwrap() {
                    assert_eq!(e.prob(&x).unwrap(), ewens_by_digits(&theta, &x), "{x}");
                }
            }
        }
    }

    #[test]
    fn renewal_values() {
        let law = renewal_cpf(r(1, 2), false).unwrap();
        assert_eq!(law.prob(&c(&[2])).unwrap(), r(1, 2));
        assert_eq!(law.prob(&c(&[1, 1])).unwrap(), r(1, 2));
        assert_eq!(law.prob(&c(&[3])).unwrap(), r(3, 8));
        assert_eq!(law.prob(&c(&[2, 1])).unwrap(), r(1, 8));
        assert_eq!(law.prob(&c(&[1, 2])).unwrap(), r(1, 4));
        assert_eq!(law.prob(&c(&[1, 1, 1])).unwrap(), r(1, 4));
        let rev = renewal_cpf(r(1, 2), true).unwrap();
        assert_eq!(rev.prob(&c(&[2, 1])).unwrap(), r(1, 4));
        assert_eq!(rev.prob(&c(&[1, 2])).unwrap(), r(1, 8));
        assert!(renewal_cpf(r(1, 1), false).is_err());
        assert!(renewal_cpf(r(0, 1), false).is_err());
    }

    #[test]
    fn laws_are_normalized() {
        let laws: Vec<Box<dyn Cpf<Rational>>> = vec![
            Box::new(ewens_cpf(r(1, 2)).unwrap()),
            Box::new(renewal_cpf(r(1, 3), false).unwrap()),
            Box::new(renewal_cpf(r(1, 3), true).unwrap()),
            Box::new(OneBlockCpf),
            Box::new(SingletonsCpf),
        ];
        for law in &laws {
            for n in 1..=10 {
                assert_eq!(cpf_table(law, n).unwrap().total(), r(1, 1), "{}", law.family());
            }
        }
    }

    #[test]
    fn float_mode_agrees_with_exact() {
        let exact = ewens_cpf(r(3, 2)).unwrap();
        let float = ewens_cpf(1.5f64).unwrap();
        for x in enumerate_compositions(7).unwrap() {
            let a = exact.prob(&x).unwrap().to_f64();
            let b = float.prob(&x).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }
}
