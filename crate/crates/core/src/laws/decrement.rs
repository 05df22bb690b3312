//! Decrement matrices and the Markovian product formula.

use crate::composition::Composition;
use crate::error::{invalid, Error, Result};
use crate::laws::{ensure_supported, Cpf};
use crate::scalar::{binomial, is_negative, rising, Scalar};

/// Lower-triangular stochastic matrix `q(n:m)`, `1 <= m <= n <= N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecrementMatrix<S> {
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> DecrementMatrix<S> {
    /// `rows[n-1]` holds `q(n:1), ..., q(n:n)`.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(Error::SizeMismatch {
                    expected: i + 1,
                    got: row.len(),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn from_fn(max_n: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let rows = (1..=max_n).map(|n| (1..=n).map(|m| f(n, m)).collect()).collect();
        Self { rows }
    }

    pub fn max_n(&self) -> usize {
        self.rows.len()
    }

    /// `q(n:m)`; zero outside `1 <= m <= n`.
    pub fn get(&self, n: usize, m: usize) -> S {
        if m == 0 || m > n || n > self.rows.len() {
            return S::zero();
        }
        self.rows[n - 1][m - 1].clone()
    }

    pub fn row(&self, n: usize) -> &[S] {
        &self.rows[n - 1]
    }

    pub fn set(&mut self, n: usize, m: usize, value: S) {
        self.rows[n - 1][m - 1] = value;
    }

    pub fn to_f64(&self) -> DecrementMatrix<f64> {
        DecrementMatrix {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(Scalar::to_f64).collect())
                .collect(),
        }
    }

    /// Checks nonnegativity and unit row sums (exactly, or within `tol` in float mode).
    pub fn validate(&self, name: &'static str, tol: f64) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            let sum = row.iter().fold(S::zero(), |a, b| a + b.clone());
            if row.iter().any(is_negative) || !sum.close_to(&S::one(), tol) {
                return Err(Error::UnnormalizedRow {
                    matrix: name,
                    row: i + 1,
                    sum: sum.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// The pair `(q, q*)` of the product formula
/// `p(λ) = q*(n:λ_ℓ) Π_{k<ℓ} q(Λ_k : λ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecrementMatrixPair<S> {
    pub q: DecrementMatrix<S>,
    pub q_star: DecrementMatrix<S>,
}

impl<S: Scalar> DecrementMatrixPair<S> {
    pub fn new(q: DecrementMatrix<S>, q_star: DecrementMatrix<S>) -> Self {
        Self { q, q_star }
    }

    /// `q* = q`: a regenerative composition structure.
    pub fn regenerative(q: DecrementMatrix<S>) -> Self {
        Self { q_star: q.clone(), q }
    }

    pub fn max_n(&self) -> usize {
        self.q.max_n().min(self.q_star.max_n())
    }

    pub fn to_f64(&self) -> DecrementMatrixPair<f64> {
        DecrementMatrixPair {
            q: self.q.to_f64(),
            q_star: self.q_star.to_f64(),
        }
    }
}

/// CPF given by the product formula.
#[derive(Debug, Clone)]
pub struct MarkovCpf<S> {
    pair: DecrementMatrixPair<S>,
    family: String,
}

impl<S: Scalar> MarkovCpf<S> {
    pub fn pair(&self) -> &DecrementMatrixPair<S> {
        &self.pair
    }

    pub fn with_family(mut self, family: impl Into<String>) -> Self {
        self.family = family.into();
        self
    }
}

pub fn markov_cpf<S: Scalar>(pair: DecrementMatrixPair<S>) -> MarkovCpf<S> {
    MarkovCpf {
        pair,
        family: "markov".into(),
    }
}

impl<S: Scalar> Cpf<S> for MarkovCpf<S> {
    fn prob(&self, c: &Composition) -> Result<S> {
        ensure_supported(self, c.n())?;
        let sums = c.partial_sums();
        let mut p = self.pair.q_star.get(c.n(), c.last());
        for (k, &part) in c.parts()[..c.len() - 1].iter().enumerate() {
            p = p * self.pair.q.get(sums[k], part);
        }
        Ok(p)
    }
    fn family(&self) -> String {
        self.family.clone()
    }
    fn max_n(&self) -> Option<usize> {
        Some(self.pair.max_n())
    }
}

fn check_alpha<S: Scalar>(alpha: &S) -> Result<()> {
    if is_negative(alpha) || *alpha >= S::one() {
        return Err(invalid("alpha", format!("must lie in [0,1), got {alpha}")));
    }
    Ok(())
}

/// Pólya–Eggenberger decrement matrix
/// `q_{α,θ}(n:r) = C(n-1,r-1) (θ+α)_{n-r} (1-α)_{r-1} / (θ+1)_{n-1}`.
pub fn polya_q<S: Scalar>(alpha: &S, theta: &S, max_n: usize) -> Result<DecrementMatrix<S>> {
    check_alpha(alpha)?;
    if *theta <= -alpha.clone() {
        return Err(invalid("theta", format!("must exceed -alpha, got {theta}")));
    }
    let ta = theta.clone() + alpha.clone();
    let one_minus = S::one() - alpha.clone();
    let theta_plus_one = theta.clone() + S::one();
    Ok(DecrementMatrix::from_fn(max_n, |n, r| {
        binomial::<S>(n - 1, r - 1) * rising(&ta, n - r) * rising(&one_minus, r - 1) / rising(&theta_plus_one, n - 1)
    }))
}

/// Decrement matrix of the `(α,θ)` regenerative composition structure:
/// `q(n:r) = C(n,r) (1-α)_{r-1}/(θ+n-r)_r · ((n-r)α + rθ)/n`.
pub fn two_param_q<S: Scalar>(alpha: &S, theta: &S, max_n: usize) -> Result<DecrementMatrix<S>> {
    check_alpha(alpha)?;
    if is_negative(theta) {
        return Err(invalid("theta", format!("must be >= 0, got {theta}")));
    }
    if alpha.is_zero() && theta.is_zero() {
        return Err(invalid("theta", "(alpha, theta) = (0, 0) is degenerate"));
    }
    let one_minus = S::one() - alpha.clone();
    Ok(DecrementMatrix::from_fn(max_n, |n, r| {
        let base = theta.clone() + S::from_int((n - r) as i64);
        let mix = S::from_int((n - r) as i64) * alpha.clone() + S::from_int(r as i64) * theta.clone();
        binomial::<S>(n, r) * rising(&one_minus, r - 1) / rising(&base, r) * mix / S::from_int(n as i64)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::enumerate_compositions;
    use crate::laws::cpf_table;
    use crate::scalar::Rational;

    fn r(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    #[test]
    fn polya_entries() {
        let (a, t) = (r(1, 2), r(1, 1));
        let q = polya_q(&a, &t, 12).unwrap();
        assert_eq!(q.get(1, 1), r(1, 1));
        assert_eq!(q.get(2, 1), (t.clone() + a.clone()) / (t.clone() + r(1, 1)));
        assert_eq!(q.get(2, 2), (r(1, 1) - a.clone()) / (t.clone() + r(1, 1)));
        q.validate("polya", 0.0).unwrap();
        assert!(polya_q(&r(1, 2), &r(-1, 2), 3).is_err());
        assert!(polya_q(&r(1, 1), &r(1, 1), 3).is_err());
    }

    #[test]
    fn two_param_entries() {
        let q = two_param_q(&r(1, 2), &r(1, 1), 10).unwrap();
        assert_eq!(q.get(1, 1), r(1, 1));
        assert_eq!(q.get(2, 1), r(3, 4));
        assert_eq!(q.get(2, 2), r(1, 4));
        q.validate("q", 0.0).unwrap();
        assert!(two_param_q(&r(0, 1), &r(0, 1), 3).is_err());
        assert!(two_param_q(&r(1, 2), &r(-1, 4), 3).is_err());
    }

    #[test]
    fn ewens_case_regenerative_equals_polya() {
        let q = two_param_q(&r(0, 1), &r(1, 1), 10).unwrap();
        let p = polya_q(&r(0, 1), &r(1, 1), 10).unwrap();
        assert_eq!(q, p);
        for n in 1..=10 {
            assert_eq!(q.get(n, 1), r(1, n as i64));
        }
    }

    #[test]
    fn product_formula_degenerate_cases() {
        let one_block = DecrementMatrix::<Rational>::from_fn(6, |n, m| if m == n { r(1, 1) } else { r(0, 1) });
        let law = markov_cpf(DecrementMatrixPair::regenerative(one_block));
        assert_eq!(law.prob(&Composition::one_block(6)).unwrap(), r(1, 1));

        let singles = DecrementMatrix::<Rational>::from_fn(6, |_, m| if m == 1 { r(1, 1) } else { r(0, 1) });
        let law = markov_cpf(DecrementMatrixPair::regenerative(singles));
        assert_eq!(law.prob(&Composition::singletons(6)).unwrap(), r(1, 1));
        assert!(matches!(
            law.prob(&Composition::singletons(7)),
            Err(Error::MatrixTooSmall { need: 7, have: 6 })
        ));
    }

    #[test]
    fn product_formula_normalizes() {
        let q = two_param_q(&r(1, 2), &r(1, 1), 6).unwrap();
        let q_star = polya_q(&r(1, 2), &r(1, 2), 6).unwrap();
        let law = markov_cpf(DecrementMatrixPair::new(q, q_star));
        assert_eq!(cpf_table(&law, 6).unwrap().total(), r(1, 1));
        for n in 1..=6 {
            let total: Rational = enumerate_compositions(n)
                .unwrap()
                .iter()
                .map(|c| law.prob(c).unwrap())
                .sum();
            assert_eq!(total, r(1, 1));
        }
    }
}
