//! The two-parameter partition law and its size-biased arrangement.

use crate::composition::{Composition, Partition};
use crate::error::{invalid, Result};
use crate::laws::Cpf;
use crate::scalar::{binomial, is_negative, rising, Scalar};

fn check_params<S: Scalar>(alpha: &S, theta: &S) -> Result<()> {
    if is_negative(alpha) || *alpha >= S::one() {
        return Err(invalid("alpha", format!("must lie in [0,1), got {alpha}")));
    }
    if *theta <= -alpha.clone() {
        return Err(invalid("theta", format!("must exceed -alpha, got {theta}")));
    }
    Ok(())
}

/// Pólya–Eggenberger entry `q_{α,θ}(n:r)`.
fn polya_entry<S: Scalar>(alpha: &S, theta: &S, n: usize, r: usize) -> S {
    binomial::<S>(n - 1, r - 1)
        * rising(&(theta.clone() + alpha.clone()), n - r)
        * rising(&(S::one() - alpha.clone()), r - 1)
        / rising(&(theta.clone() + S::one()), n - 1)
}

/// Composition obtained by listing the blocks of a two-parameter partition
/// right to left in size-biased order:
/// `p̂(λ) = Π_k q_{α, θ+(ℓ-k)α}(Λ_k : λ_k)`.
#[derive(Debug, Clone)]
pub struct SibiCpf<S> {
    alpha: S,
    theta: S,
}

pub fn sibi_cpf<S: Scalar>(alpha: S, theta: S) -> Result<SibiCpf<S>> {
    check_params(&alpha, &theta)?;
    Ok(SibiCpf { alpha, theta })
}

impl<S: Scalar> SibiCpf<S> {
    pub fn alpha(&self) -> &S {
        &self.alpha
    }

    pub fn theta(&self) -> &S {
        &self.theta
    }
}

impl<S: Scalar> Cpf<S> for SibiCpf<S> {
    fn prob(&self, c: &Composition) -> Result<S> {
        let len = c.len();
        let sums = c.partial_sums();
        let mut p = S::one();
        for (k, &part) in c.parts().iter().enumerate() {
            let shift = S::from_int((len - 1 - k) as i64) * self.alpha.clone();
            p = p * polya_entry(&self.alpha, &(self.theta.clone() + shift), sums[k], part);
        }
        Ok(p)
    }
    fn family(&self) -> String {
        format!("sibi(alpha={}, theta={})", self.alpha, self.theta)
    }
}

/// `π_{α,θ}(λ↓)`: the symmetrisation of [`SibiCpf`] over distinct arrangements.
pub fn partition_law<S: Scalar>(alpha: &S, theta: &S, partition: &Partition) -> Result<S> {
    let law = sibi_cpf(alpha.clone(), theta.clone())?;
    partition
        .arrangements()
        .iter()
        .try_fold(S::zero(), |acc, c| Ok(acc + law.prob(c)?))
}
