//! Structural moments, block counts and the reconstruction of a
//! self-similar Markov law from its moments.
//!
//! Everything here is driven by the moment sequence `p(n) = E V^{n-1}`,
//! where `V` is the length of the gap covering an independent uniform point.
//! For a composition structure this is simply the probability of the
//! one-part composition `(n)`.

use serde::Serialize;

use crate::composition::{enumerate_compositions, Composition};
use crate::error::{invalid, Error, Result};
use crate::laws::decrement::{markov_cpf, DecrementMatrix, DecrementMatrixPair, MarkovCpf};
use crate::laws::levy::MeanderLaw;
use crate::laws::Cpf;
use crate::quadrature::{integrate_unit, DEFAULT_TOL};
use crate::scalar::{binomial, is_negative, Scalar};

/// `p(1), ..., p(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralMoments<S> {
    p: Vec<S>,
}

impl<S: Scalar> StructuralMoments<S> {
    /// Checks `p(1) = 1` and complete monotonicity on the stored range,
    /// i.e. `(-Δ)^k p(r) >= 0` for all `r + k <= N`.
    pub fn new(p: Vec<S>) -> Result<Self> {
        match p.first() {
            None => return Err(Error::EmptyInput("moment sequence")),
            Some(first) if !first.close_to(&S::one(), 1e-12) => {
                return Err(invalid("p(1)", format!("must equal 1, got {first}")))
            }
            _ => {}
        }
        let slack = if S::EXACT { 0.0 } else { 1e-12 };
        let mut diffs = p.clone();
        for k in 1..p.len() {
            diffs = diffs.windows(2).map(|w| w[0].clone() - w[1].clone()).collect();
            if let Some(i) = diffs.iter().position(|d| d.to_f64() < -slack) {
                return Err(Error::Infeasible(format!(
                    "moments are not completely monotone: order-{k} difference at p({}) is negative",
                    i + 1
                )));
            }
        }
        Ok(Self { p })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// `p(n)`, `1 <= n <= N`.
    pub fn get(&self, n: usize) -> Result<S> {
        if n == 0 || n > self.p.len() {
            return Err(Error::MatrixTooSmall {
                need: n,
                have: self.p.len(),
            });
        }
        Ok(self.p[n - 1].clone())
    }

    pub fn values(&self) -> &[S] {
        &self.p
    }
}

/// `p(n) = P(C_n = (n))` for `n <= N`.
pub fn structural_moments<S: Scalar, C: Cpf<S> + ?Sized>(cpf: &C, max_n: usize) -> Result<StructuralMoments<S>> {
    let p = (1..=max_n)
        .map(|n| cpf.prob(&Composition::one_block(n)))
        .collect::<Result<Vec<_>>>()?;
    StructuralMoments::new(p)
}

/// `μ_{n,r} = C(n,r) E[V^{r-1}(1-V)^{n-r}]`, the expected number of parts of
/// size `r` in `C_n`, for `r = 1..=n`.
pub fn block_counts<S: Scalar>(moments: &StructuralMoments<S>, n: usize) -> Result<Vec<S>> {
    if n == 0 {
        return Err(invalid("n", "must be >= 1"));
    }
    if n > moments.len() {
        return Err(Error::MatrixTooSmall {
            need: n,
            have: moments.len(),
        });
    }
    (1..=n)
        .map(|r| {
            let mut acc = S::zero();
            for j in 0..=n - r {
                let term = binomial::<S>(n - r, j) * moments.get(r + j)?;
                acc = if j % 2 == 0 { acc + term } else { acc - term };
            }
            Ok(binomial::<S>(n, r) * acc)
        })
        .collect()
}

/// `μ_{n,r}` for all `1 <= r <= n <= N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCountTable<S> {
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> BlockCountTable<S> {
    pub fn build(moments: &StructuralMoments<S>, max_n: usize) -> Result<Self> {
        let rows = (1..=max_n).map(|n| block_counts(moments, n)).collect::<Result<_>>()?;
        Ok(Self { rows })
    }

    pub fn max_n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, n: usize) -> &[S] {
        &self.rows[n - 1]
    }

    pub fn get(&self, n: usize, r: usize) -> S {
        if r == 0 || r > n || n > self.rows.len() {
            return S::zero();
        }
        self.rows[n - 1][r - 1].clone()
    }

    /// `μ_n`, the expected number of parts of `C_n`.
    pub fn total(&self, n: usize) -> S {
        self.row(n).iter().fold(S::zero(), |a, b| a + b.clone())
    }

    /// `Σ_r r μ_{n,r}`, which must be `n`.
    pub fn balls(&self, n: usize) -> S {
        self.row(n)
            .iter()
            .enumerate()
            .fold(S::zero(), |a, (i, b)| a + S::from_int(i as i64 + 1) * b.clone())
    }
}

/// `g(j) = E(1-V)^{j-1}`, the probability that the `j`-th ball opens a new box.
pub fn potential_from_cpf<S: Scalar>(moments: &StructuralMoments<S>, j: usize) -> Result<S> {
    if j == 0 {
        return Err(invalid("j", "must be >= 1"));
    }
    let mut acc = S::zero();
    for i in 0..j {
        let term = binomial::<S>(j - 1, i) * moments.get(i + 1)?;
        acc = if i % 2 == 0 { acc + term } else { acc - term };
    }
    Ok(acc)
}

/// Law of the size of the box holding the deleted ball, from consecutive
/// block-count rows: `ω_{n,n} = μ_{n,n}`, `ω_{n,r} = ω_{n,r+1} + μ_{n,r} - μ_{n-1,r}`.
pub fn deletion_law<S: Scalar>(mu_n: &[S], mu_prev: &[S]) -> Result<Vec<S>> {
    let n = mu_n.len();
    if n == 0 {
        return Err(Error::EmptyInput("block-count row"));
    }
    if mu_prev.len() + 1 != n {
        return Err(Error::SizeMismatch {
            expected: n - 1,
            got: mu_prev.len(),
        });
    }
    let mut omega = vec![S::zero(); n];
    omega[n - 1] = mu_n[n - 1].clone();
    for r in (1..n).rev() {
        omega[r - 1] = omega[r].clone() + mu_n[r - 1].clone() - mu_prev[r - 1].clone();
    }
    let slack = if S::EXACT { 0.0 } else { 1e-12 };
    if let Some(r) = omega.iter().position(|w| w.to_f64() < -slack) {
        return Err(Error::Infeasible(format!("ω_{{{n},{}}} is negative", r + 1)));
    }
    Ok(omega)
}

/// `P(L_n = r)` for `r = 1..=n`, by enumeration.
pub fn last_part_law<S: Scalar, C: Cpf<S> + ?Sized>(cpf: &C, n: usize) -> Result<Vec<S>> {
    let mut law = vec![S::zero(); n];
    for c in enumerate_compositions(n)? {
        let p = cpf.prob(&c)?;
        law[c.last() - 1] = law[c.last() - 1].clone() + p;
    }
    Ok(law)
}

/// The size-biased part law `r μ_{n,r} / n`.
pub fn size_biased_part_law<S: Scalar>(counts: &[S]) -> Vec<S> {
    let n = S::from_int(counts.len() as i64);
    counts
        .iter()
        .enumerate()
        .map(|(i, m)| S::from_int(i as i64 + 1) * m.clone() / n.clone())
        .collect()
}

/// Output of [`reconstruct_markov`].
#[derive(Debug, Clone)]
pub struct Reconstruction<S> {
    pub pair: DecrementMatrixPair<S>,
    pub cpf: MarkovCpf<S>,
    /// True when the moments describe the one-block law and the `q` solve was skipped.
    pub one_block: bool,
}

/// Rebuilds the decrement matrices up to `N` from `p(1..N+1)`, assuming the
/// moments come from a self-similar Markov composition structure. The last
/// part is a size-biased pick, so `q*(n:r) = r μ_{n,r}/n`, and `q` is then
/// forced by the deletion recursion for `q*`.
pub fn reconstruct_markov<S: Scalar>(moments: &StructuralMoments<S>) -> Result<Reconstruction<S>> {
    if moments.len() < 2 {
        return Err(Error::MatrixTooSmall {
            need: 2,
            have: moments.len(),
        });
    }
    let max_n = moments.len() - 1;
    let table = BlockCountTable::build(moments, max_n + 1)?;
    let q_star_full = DecrementMatrix::from_fn(max_n + 1, |n, r| {
        S::from_int(r as i64) * table.get(n, r) / S::from_int(n as i64)
    });

    let point_mass = (1..=max_n + 1).all(|n| q_star_full.get(n, n).close_to(&S::one(), 1e-12));
    if point_mass {
        let one = DecrementMatrix::from_fn(max_n, |n, r| if r == n { S::one() } else { S::zero() });
        let pair = DecrementMatrixPair::regenerative(one);
        return Ok(Reconstruction {
            cpf: markov_cpf(pair.clone()).with_family("reconstructed(one-block)"),
            pair,
            one_block: true,
        });
    }

    let mut q_rows = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        let np1 = S::from_int(n as i64 + 1);
        let denom = q_star_full.get(n + 1, 1);
        if denom.is_zero() {
            return Err(Error::Infeasible(format!(
                "q*({}:1) = 0, so q({n}:·) is not determined by the moments",
                n + 1
            )));
        }
        let row = (1..=n)
            .map(|r| {
                let up = S::from_int(r as i64 + 1) / np1.clone() * q_star_full.get(n + 1, r + 1);
                let stay = S::from_int((n + 1 - r) as i64) / np1.clone() * q_star_full.get(n + 1, r);
                (q_star_full.get(n, r) - up - stay) * np1.clone() / denom.clone()
            })
            .collect::<Vec<_>>();
        q_rows.push(row);
    }
    let q = DecrementMatrix::from_rows(q_rows)?;
    let q_star = DecrementMatrix::from_fn(max_n, |n, r| q_star_full.get(n, r));
    let tol = if S::EXACT { 0.0 } else { 1e-9 };
    for (name, m) in [("q", &q), ("q*", &q_star)] {
        m.validate(name, tol)
            .map_err(|e| Error::Infeasible(format!("reconstructed {e}")))?;
    }
    let pair = DecrementMatrixPair::new(q, q_star);
    if let Some((n, r)) = first_q_recursion_violation(&pair, tol) {
        return Err(Error::Infeasible(format!(
            "reconstructed q violates the deletion recursion at q({n}:{r})"
        )));
    }
    Ok(Reconstruction {
        cpf: markov_cpf(pair.clone()).with_family("reconstructed"),
        pair,
        one_block: false,
    })
}

/// First `(n, r)` where
/// `q(n:r) = (r+1)/(n+1) q(n+1:r+1) + (n+1-r)/(n+1) q(n+1:r) + q(n+1:1) q(n:r)/(n+1)`
/// fails, for `n < N`.
pub(crate) fn first_q_recursion_violation<S: Scalar>(
    pair: &DecrementMatrixPair<S>,
    tol: f64,
) -> Option<(usize, usize)> {
    let q = &pair.q;
    for n in 1..q.max_n() {
        let np1 = S::from_int(n as i64 + 1);
        for r in 1..=n {
            let rhs = S::from_int(r as i64 + 1) / np1.clone() * q.get(n + 1, r + 1)
                + S::from_int((n + 1 - r) as i64) / np1.clone() * q.get(n + 1, r)
                + q.get(n + 1, 1) * q.get(n, r) / np1.clone();
            if !q.get(n, r).close_to(&rhs, tol) {
                return Some((n, r));
            }
        }
    }
    None
}

/// Result of [`structural_density_check`].
#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub passed: bool,
    pub atom: f64,
    pub total_mass: f64,
    /// Grid points `x` where `(1-x)φ(x)` increased, with the two values.
    pub violations: Vec<(f64, f64, f64)>,
}

/// Checks that a meander law can be the structural law of a self-similar set:
/// `(1-x)φ(x)` nonincreasing on the grid and atom plus integral equal to one.
pub fn structural_density_check<S: Scalar>(law: &MeanderLaw<S>, grid: usize) -> Result<DensityReport> {
    let atom = law.atom();
    if law.density_at(0.5).is_none() {
        let passed = (atom - 1.0).abs() <= 1e-9;
        return Ok(DensityReport {
            passed,
            atom,
            total_mass: atom,
            violations: Vec::new(),
        });
    }
    let phi = |x: f64| law.density_at(x).unwrap_or(0.0);
    let mass = integrate_unit(|x, _| phi(x), DEFAULT_TOL)?;
    let mut violations = Vec::new();
    let mut prev: Option<f64> = None;
    for i in 1..=grid {
        let x = i as f64 / (grid + 1) as f64;
        let v = (1.0 - x) * phi(x);
        if let Some(p) = prev {
            if v > p * (1.0 + 1e-12) + 1e-300 {
                violations.push((x, p, v));
            }
        }
        prev = Some(v);
    }
    let total_mass = atom + mass;
    Ok(DensityReport {
        passed: violations.is_empty() && (total_mass - 1.0).abs() <= 1e-9 && !is_negative(&atom),
        atom,
        total_mass,
        violations,
    })
}
