//! Lévy data of (delayed) subordinators and the decrement matrices they induce.
//!
//! A Lévy measure `ν` on `(0, ∞]` is represented by its image `ν̃` on `(0, 1]`
//! under `y ↦ 1 - e^{-y}`, through the tail `x ↦ ν̃[x, 1]`. Then
//!
//! ```text
//! Φ(s)   = d·s + s ∫_0^1 (1-x)^{s-1} ν̃[x,1] dx
//! Φ(n:m) = C(n,m) Σ_j (-1)^{j+1} C(m,j) Φ(n-m+j)
//! q(n:m) = Φ(n:m) / Φ(n)
//! ```
//!
//! The two-parameter tail `ν̃[x,1] ∝ x^{-α}(1-x)^θ` is evaluated in closed
//! form. Its positive factor is fixed so that `Φ(s) = s (1+θ)_{s-1}/(2-α+θ)_{s-1}`,
//! i.e. the tail is `x^{-α}(1-x)^θ / B(1-α, 1+θ)`. Decrement matrices and the
//! potential function do not depend on this choice; exported absolute `Φ`
//! values do, and [`LevySpec::normalization`] names it.

use std::fmt;
use std::sync::Arc;

use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::laws::decrement::{DecrementMatrix, DecrementMatrixPair};
use crate::quadrature::{integrate_unit, DEFAULT_TOL};
use crate::scalar::{binomial, is_negative, is_positive, rising, Scalar};

/// Tail function `(x, 1-x) ↦ ν̃[x, 1]`, evaluated in float mode.
pub type TailFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum LevyTail<S> {
    /// No jumps: pure drift.
    Zero,
    /// `ν̃[x,1] = x^{-α}(1-x)^θ / B(1-α, 1+θ)`.
    TwoParam { alpha: S, theta: S },
    /// Arbitrary nonincreasing tail, integrated numerically.
    Custom(TailFn),
}

impl<S: fmt::Debug> fmt::Debug for LevyTail<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevyTail::Zero => f.write_str("Zero"),
            LevyTail::TwoParam { alpha, theta } => f
                .debug_struct("TwoParam")
                .field("alpha", alpha)
                .field("theta", theta)
                .finish(),
            LevyTail::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LevySpec<S> {
    drift: S,
    tail: LevyTail<S>,
}

impl<S: Scalar> LevySpec<S> {
    pub fn two_param(alpha: S, theta: S) -> Result<Self> {
        if is_negative(&alpha) || alpha >= S::one() {
            return Err(invalid("alpha", format!("must lie in [0,1), got {alpha}")));
        }
        if is_negative(&theta) {
            return Err(invalid("theta", format!("must be >= 0, got {theta}")));
        }
        if alpha.is_zero() && theta.is_zero() {
            return Err(invalid("theta", "(alpha, theta) = (0, 0) is degenerate"));
        }
        Ok(Self {
            drift: S::zero(),
            tail: LevyTail::TwoParam { alpha, theta },
        })
    }

    pub fn drift_only(drift: S) -> Result<Self> {
        if !is_positive(&drift) {
            return Err(invalid("drift", "a pure-drift spec needs d > 0"));
        }
        Ok(Self {
            drift,
            tail: LevyTail::Zero,
        })
    }

    /// A tail given as a function of `(x, 1 - x)`. Only usable in float mode.
    pub fn custom(drift: S, tail: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if is_negative(&drift) {
            return Err(invalid("drift", "must be >= 0"));
        }
        Ok(Self {
            drift,
            tail: LevyTail::Custom(Arc::new(tail)),
        })
    }

    pub fn with_drift(mut self, drift: S) -> Result<Self> {
        if is_negative(&drift) {
            return Err(invalid("drift", "must be >= 0"));
        }
        self.drift = drift;
        Ok(self)
    }

    pub fn drift(&self) -> &S {
        &self.drift
    }

    pub fn tail(&self) -> &LevyTail<S> {
        &self.tail
    }

    pub fn normalization(&self) -> &'static str {
        match self.tail {
            LevyTail::TwoParam { .. } => "tail x^-alpha (1-x)^theta / B(1-alpha, 1+theta)",
            LevyTail::Zero | LevyTail::Custom(_) => "as given",
        }
    }

    /// `ν̃[x, 1]` in float mode.
    pub fn tail_value(&self, x: f64) -> f64 {
        match &self.tail {
            LevyTail::Zero => 0.0,
            LevyTail::TwoParam { alpha, theta } => {
                let (a, t) = (alpha.to_f64(), theta.to_f64());
                let log_beta = ln_gamma(1.0 - a) + ln_gamma(1.0 + t) - ln_gamma(2.0 - a + t);
                (-a * x.ln() + t * (1.0 - x).ln() - log_beta).exp()
            }
            LevyTail::Custom(f) => f(x, 1.0 - x),
        }
    }

    fn custom_tail(&self) -> Option<&TailFn> {
        match &self.tail {
            LevyTail::Custom(f) => Some(f),
            _ => None,
        }
    }

    fn require_float(&self, what: &'static str) -> Result<()> {
        if S::EXACT && self.custom_tail().is_some() {
            return Err(Error::RequiresFloat(what));
        }
        Ok(())
    }

    /// `Φ(s)` for integer `s >= 1`.
    pub fn exponent(&self, s: usize) -> Result<S> {
        if s == 0 {
            return Err(invalid("s", "must be >= 1"));
        }
        self.require_float("Φ of a custom tail")?;
        let drift_part = self.drift.clone() * S::from_int(s as i64);
        let jump_part = match &self.tail {
            LevyTail::Zero => S::zero(),
            LevyTail::TwoParam { alpha, theta } => {
                let up = theta.clone() + S::one();
                let down = S::from_int(2) - alpha.clone() + theta.clone();
                S::from_int(s as i64) * rising(&up, s - 1) / rising(&down, s - 1)
            }
            LevyTail::Custom(tail) => {
                let sf = s as f64;
                let v = integrate_unit(|x, y| sf * y.powi(s as i32 - 1) * tail(x, y), DEFAULT_TOL)?;
                S::from_f64(v)?
            }
        };
        Ok(drift_part + jump_part)
    }

    /// `Φ(n:m)`. Closed-form tails use the alternating binomial sum (exact in
    /// rational mode). Custom tails integrate the summed kernel
    /// `C(n,m) x^m (1-x)^{n-m}` against `ν̃` directly, since the alternating
    /// sum would amplify quadrature error by up to `2^m C(n,m)`.
    pub fn binomial(&self, n: usize, m: usize) -> Result<S> {
        if m == 0 || m > n {
            return Err(invalid("m", format!("need 1 <= m <= n, got m={m}, n={n}")));
        }
        if let Some(tail) = self.custom_tail() {
            self.require_float("Φ(n:m) of a custom tail")?;
            let (mi, ki) = (m as i32, (n - m) as i32);
            // d/dx [x^m (1-x)^(n-m)], integrated against the tail by parts.
            let v = integrate_unit(
                |x, y| {
                    let up = m as f64 * x.powi(mi - 1) * y.powi(ki);
                    let down = if ki > 0 {
                        ki as f64 * x.powi(mi) * y.powi(ki - 1)
                    } else {
                        0.0
                    };
                    (up - down) * tail(x, y)
                },
                DEFAULT_TOL,
            )?;
            let mut out = binomial::<f64>(n, m) * v;
            if m == 1 {
                out += n as f64 * self.drift.to_f64();
            }
            return S::from_f64(out);
        }
        let mut acc = S::zero();
        for j in 0..=m {
            let term = binomial::<S>(m, j)
                * self
                    .exponent(n - m + j)
                    .or_else(|e| if n - m + j == 0 { Ok(S::zero()) } else { Err(e) })?;
            acc = if j % 2 == 1 { acc + term } else { acc - term };
        }
        Ok(binomial::<S>(n, m) * acc)
    }

    /// `m = ∫ |log(1-x)| ν̃(dx) = ∫_0^1 ν̃[x,1]/(1-x) dx`, the mean of the
    /// Lévy measure on the original scale.
    pub fn mean(&self) -> Result<S> {
        self.require_float("the mean of a custom tail")?;
        match &self.tail {
            LevyTail::Zero => Ok(S::zero()),
            LevyTail::TwoParam { alpha, theta } => {
                if theta.is_zero() {
                    return Err(Error::Divergent("m = ∞ for theta = 0".into()));
                }
                Ok((S::one() - alpha.clone() + theta.clone()) / theta.clone())
            }
            LevyTail::Custom(tail) => S::from_f64(integrate_unit(|x, y| tail(x, y) / y, DEFAULT_TOL)?),
        }
    }
}

/// `Φ(s)`.
pub fn levy_exponent<S: Scalar>(spec: &LevySpec<S>, s: usize) -> Result<S> {
    spec.exponent(s)
}

/// `Φ(n:m)`.
pub fn levy_binomial<S: Scalar>(spec: &LevySpec<S>, n: usize, m: usize) -> Result<S> {
    spec.binomial(n, m)
}

/// Law of the meander length `A_1`: an atom at zero plus an absolutely
/// continuous part.
#[derive(Clone)]
pub enum MeanderLaw<S> {
    /// `P(A_1 = 0) = atom`, otherwise `Beta(a, b)`.
    Beta { a: S, b: S, atom: S },
    /// `A_1 ≡ 0`.
    Zero,
    /// Stationary delay of a custom tail: density `ν̃[x,1]/((d+m)(1-x))`.
    FromTail { drift: f64, mean: f64, tail: TailFn },
    /// A bare density (plus atom), float mode only.
    Density {
        density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        atom: f64,
    },
}

impl<S: fmt::Debug> fmt::Debug for MeanderLaw<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanderLaw::Beta { a, b, atom } => f
                .debug_struct("Beta")
                .field("a", a)
                .field("b", b)
                .field("atom", atom)
                .finish(),
            MeanderLaw::Zero => f.write_str("Zero"),
            MeanderLaw::FromTail { drift, mean, .. } => f
                .debug_struct("FromTail")
                .field("drift", drift)
                .field("mean", mean)
                .finish(),
            MeanderLaw::Density { atom, .. } => f.debug_struct("Density").field("atom", atom).finish(),
        }
    }
}

impl<S: Scalar> MeanderLaw<S> {
    pub fn beta(a: S, b: S) -> Result<Self> {
        if !is_positive(&a) || !is_positive(&b) {
            return Err(invalid("beta", "shape parameters must be positive"));
        }
        Ok(MeanderLaw::Beta { a, b, atom: S::zero() })
    }

    pub fn density(density: impl Fn(f64) -> f64 + Send + Sync + 'static, atom: f64) -> Self {
        MeanderLaw::Density {
            density: Arc::new(density),
            atom,
        }
    }

    /// The law of `A_1 = 1 - e^{-X}` for the stationary delay `X`:
    /// atom `d/(d+m)` at zero and density `ν̃[x,1]/((d+m)(1-x))`.
    pub fn stationary(spec: &LevySpec<S>) -> Result<Self> {
        let d = spec.drift().clone();
        match spec.tail() {
            LevyTail::Zero => Ok(MeanderLaw::Zero),
            LevyTail::TwoParam { alpha, theta } => {
                let m = spec.mean()?;
                let total = d.clone() + m;
                Ok(MeanderLaw::Beta {
                    a: S::one() - alpha.clone(),
                    b: theta.clone(),
                    atom: d / total,
                })
            }
            LevyTail::Custom(tail) => {
                if S::EXACT {
                    return Err(Error::RequiresFloat("meander law of a custom tail"));
                }
                Ok(MeanderLaw::FromTail {
                    drift: d.to_f64(),
                    mean: spec.mean()?.to_f64(),
                    tail: tail.clone(),
                })
            }
        }
    }

    pub fn atom(&self) -> f64 {
        match self {
            MeanderLaw::Beta { atom, .. } => atom.to_f64(),
            MeanderLaw::Zero => 1.0,
            MeanderLaw::FromTail { drift, mean, .. } => drift / (drift + mean),
            MeanderLaw::Density { atom, .. } => *atom,
        }
    }

    /// Density of the continuous part on `(0, 1)`, if any.
    pub fn density_at(&self, x: f64) -> Option<f64> {
        match self {
            MeanderLaw::Beta { a, b, atom } => {
                let (a, b) = (a.to_f64(), b.to_f64());
                let log_beta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
                Some((1.0 - atom.to_f64()) * ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - log_beta).exp())
            }
            MeanderLaw::Zero => None,
            MeanderLaw::FromTail { drift, mean, tail } => Some(tail(x, 1.0 - x) / ((drift + mean) * (1.0 - x))),
            MeanderLaw::Density { density, .. } => Some(density(x)),
        }
    }

    /// `E[A_1^a (1 - A_1)^b]`.
    pub fn moment(&self, a: usize, b: usize) -> Result<S> {
        let at_zero = |atom: S| if a == 0 { atom } else { S::zero() };
        match self {
            MeanderLaw::Beta { a: pa, b: pb, atom } => {
                let cont = rising(pa, a) * rising(pb, b) / rising(&(pa.clone() + pb.clone()), a + b);
                Ok(at_zero(atom.clone()) + (S::one() - atom.clone()) * cont)
            }
            MeanderLaw::Zero => Ok(at_zero(S::one())),
            MeanderLaw::FromTail { drift, mean, tail } => {
                if S::EXACT {
                    return Err(Error::RequiresFloat("moments of a custom meander law"));
                }
                let (ai, bi) = (a as i32, b as i32);
                let v = integrate_unit(|x, y| x.powi(ai) * y.powi(bi - 1) * tail(x, y), DEFAULT_TOL)?;
                let atom = drift / (drift + mean);
                S::from_f64(if a == 0 { atom } else { 0.0 } + v / (drift + mean))
            }
            MeanderLaw::Density { density, atom } => {
                if S::EXACT {
                    return Err(Error::RequiresFloat("moments of a density meander law"));
                }
                let (ai, bi) = (a as i32, b as i32);
                let v = integrate_unit(|x, y| x.powi(ai) * y.powi(bi) * density(x), DEFAULT_TOL)?;
                S::from_f64(if a == 0 { *atom } else { 0.0 } + v)
            }
        }
    }
}

/// `Ψ(n:m) = C(n,m) E[A_1^m (1 - A_1)^{n-m}]`.
pub fn meander_moments<S: Scalar>(law: &MeanderLaw<S>, n: usize, m: usize) -> Result<S> {
    if m > n {
        return Err(invalid("m", format!("need 0 <= m <= n, got m={m}, n={n}")));
    }
    Ok(binomial::<S>(n, m) * law.moment(m, n - m)?)
}

/// Decrement matrices of the composition structure sampled from `exp(-W)`,
/// `W` the range of the subordinator with stationary delay:
/// `q(n:m) = Φ(n:m)/Φ(n)` and `q*(n:m) = Ψ(n:0) q(n:m) + Ψ(n:m)`.
pub fn stationary_pair<S: Scalar>(
    spec: &LevySpec<S>,
    law: &MeanderLaw<S>,
    max_n: usize,
) -> Result<DecrementMatrixPair<S>> {
    let expected = MeanderLaw::stationary(spec)?;
    for (a, b) in [(1, 0), (0, 1), (2, 0), (1, 1)] {
        let lhs = law.moment(a, b)?;
        let rhs = expected.moment(a, b)?;
        if !lhs.close_to(&rhs, 1e-9) {
            return Err(invalid(
                "meander law",
                format!("E[A^{a}(1-A)^{b}] = {lhs} but the stationary delay gives {rhs}"),
            ));
        }
    }
    let mut q_rows = Vec::with_capacity(max_n);
    let mut q_star_rows = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        let phi = spec.exponent(n)?;
        if phi.is_zero() {
            return Err(Error::Infeasible(format!("Φ({n}) = 0")));
        }
        let psi0 = meander_moments(law, n, 0)?;
        let mut q_row = Vec::with_capacity(n);
        let mut q_star_row = Vec::with_capacity(n);
        for m in 1..=n {
            let q = spec.binomial(n, m)? / phi.clone();
            q_star_row.push(psi0.clone() * q.clone() + meander_moments(law, n, m)?);
            q_row.push(q);
        }
        q_rows.push(q_row);
        q_star_rows.push(q_star_row);
    }
    Ok(DecrementMatrixPair::new(
        DecrementMatrix::from_rows(q_rows)?,
        DecrementMatrix::from_rows(q_star_rows)?,
    ))
}

/// [`stationary_pair`] with the meander law derived from the spec itself.
pub fn stationary_pair_from_spec<S: Scalar>(spec: &LevySpec<S>, max_n: usize) -> Result<DecrementMatrixPair<S>> {
    let law = MeanderLaw::stationary(spec)?;
    stationary_pair(spec, &law, max_n)
}

/// Potential function `g(j) = Φ(j-1)/((d+m)(j-1))`, `g(1) = 1`.
pub fn potential_from_levy<S: Scalar>(spec: &LevySpec<S>, j: usize) -> Result<S> {
    if j == 0 {
        return Err(invalid("j", "must be >= 1"));
    }
    if j == 1 {
        return Ok(S::one());
    }
    let scale = spec.drift().clone() + spec.mean()?;
    Ok(spec.exponent(j - 1)? / (scale * S::from_int((j - 1) as i64)))
}

/// Transition probability `f(j | i)` of the increasing chain, recovered from
/// `q(j-1 : j-i) = f(j|i) g(i) / g(j)`. `g[k-1]` holds `g(k)`.
pub fn upchain_transition<S: Scalar>(pair: &DecrementMatrixPair<S>, g: &[S], i: usize, j: usize) -> Result<S> {
    if i == 0 || j <= i {
        return Err(invalid("j", format!("need 1 <= i < j, got i={i}, j={j}")));
    }
    if j - 1 > pair.q.max_n() || j > g.len() {
        return Err(Error::MatrixTooSmall {
            need: j,
            have: pair.q.max_n().min(g.len()),
        });
    }
    let gi = &g[i - 1];
    if gi.is_zero() {
        return Err(Error::ZeroPotential(i));
    }
    Ok(pair.q.get(j - 1, j - i) * g[j - 1].clone() / gi.clone())
}

/// Partial row sum `Σ_{j=i+1}^{J} f(j|i)` together with the exact missing
/// mass `q*(J : J-i+1) / g(i)`: the chain sits at `i` and has not moved by
/// level `J` exactly when the last part of `C_J` has size `J-i+1`.
pub fn upchain_row_mass<S: Scalar>(pair: &DecrementMatrixPair<S>, g: &[S], i: usize, big_j: usize) -> Result<(S, S)> {
    if big_j < i {
        return Err(invalid("J", "must be >= i"));
    }
    if big_j > pair.max_n() {
        return Err(Error::MatrixTooSmall {
            need: big_j,
            have: pair.max_n(),
        });
    }
    let mut partial = S::zero();
    for j in i + 1..=big_j {
        partial = partial + upchain_transition(pair, g, i, j)?;
    }
    let gi = g.get(i - 1).ok_or(Error::MatrixTooSmall { need: i, have: g.len() })?;
    if gi.is_zero() {
        return Err(Error::ZeroPotential(i));
    }
    let tail = pair.q_star.get(big_j, big_j - i + 1) / gi.clone();
    Ok((partial, tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::decrement::{polya_q, two_param_q};
    use crate::scalar::{factorial, Rational};

    fn r(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    fn beta_fn(a: f64, b: f64) -> f64 {
        (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
    }

    #[test]
    fn exponent_closed_forms() {
        // α = 0: absolute Φ(n) = n/(n+θ); normalised by B(1, 1+θ) = 1/(1+θ).
        let theta = r(3, 2);
        let spec = LevySpec::two_param(r(0, 1), theta.clone()).unwrap();
        for n in 1..=8usize {
            let absolute = spec.exponent(n).unwrap() / (theta.clone() + r(1, 1));
            let nn = Rational::from_int(n as i64);
            assert_eq!(absolute, nn.clone() / (nn + theta.clone()));
        }
        let drift = LevySpec::drift_only(r(1, 1)).unwrap();
        assert_eq!(drift.exponent(5).unwrap(), r(5, 1));
        let half = LevySpec::two_param(r(1, 2), r(0, 1)).unwrap();
        assert_eq!(half.exponent(2).unwrap() / half.exponent(1).unwrap(), r(4, 3));
        assert_eq!(half.binomial(1, 1).unwrap(), half.exponent(1).unwrap());
    }

    #[test]
    fn exponent_matches_quadrature_oracle() {
        for &(a, t) in &[(0.0, 1.5), (0.5, 0.0), (0.5, 1.0), (1.0 / 3.0, 2.0 / 3.0)] {
            let spec = LevySpec::two_param(a, t).unwrap();
            let norm = beta_fn(1.0 - a, 1.0 + t);
            for s in 1..=10usize {
                let sf = s as f64;
                let oracle =
                    integrate_unit(|x, y| sf * y.powf(sf - 1.0) * x.powf(-a) * y.powf(t) / norm, 1e-13).unwrap();
                let v = spec.exponent(s).unwrap();
                assert!(
                    (v - oracle).abs() < 1e-11 * v.max(1.0),
                    "a={a} t={t} s={s}: {v} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn binomial_rows_and_qnu1() {
        let (a, t) = (r(1, 2), r(1, 1));
        let spec = LevySpec::two_param(a.clone(), t.clone()).unwrap();
        let q = two_param_q(&a, &t, 10).unwrap();
        for n in 1..=10 {
            let phi = spec.exponent(n).unwrap();
            let mut total = r(0, 1);
            for m in 1..=n {
                let b = spec.binomial(n, m).unwrap();
                assert_eq!(b.clone() / phi.clone(), q.get(n, m), "n={n} m={m}");
                total += b;
            }
            assert_eq!(total, phi);
        }
        assert!(spec.binomial(3, 0).is_err());
        assert!(spec.binomial(3, 4).is_err());
    }

    #[test]
    fn meander_moment_values() {
        let spec = LevySpec::two_param(r(1, 2), r(1, 1)).unwrap();
        let law = MeanderLaw::stationary(&spec).unwrap();
        assert_eq!(meander_moments(&law, 1, 1).unwrap(), r(1, 3));
        for n in 1..=10 {
            let total: Rational = (0..=n).map(|m| meander_moments(&law, n, m).unwrap()).sum();
            assert_eq!(total, r(1, 1));
        }
        let zero: MeanderLaw<Rational> = MeanderLaw::Zero;
        for n in 1..=5 {
            assert_eq!(meander_moments(&zero, n, 0).unwrap(), r(1, 1));
            for m in 1..=n {
                assert_eq!(meander_moments(&zero, n, m).unwrap(), r(0, 1));
            }
        }
        assert!(meander_moments(&law, 2, 3).is_err());
    }

    #[test]
    fn stationary_q_star_is_polya() {
        for (a, t) in [(r(1, 2), r(1, 1)), (r(1, 3), r(2, 3))] {
            let spec = LevySpec::two_param(a.clone(), t.clone()).unwrap();
            let pair = stationary_pair_from_spec(&spec, 10).unwrap();
            let expected = polya_q(&a, &(t.clone() - a.clone()), 10).unwrap();
            assert_eq!(pair.q_star, expected);
            assert_eq!(pair.q, two_param_q(&a, &t, 10).unwrap());
            pair.q.validate("q", 0.0).unwrap();
            pair.q_star.validate("q*", 0.0).unwrap();
        }
        // α = 0: the stationary and regenerative structures coincide.
        let spec = LevySpec::two_param(r(0, 1), r(1, 1)).unwrap();
        let pair = stationary_pair_from_spec(&spec, 10).unwrap();
        assert_eq!(pair.q, pair.q_star);
    }

    #[test]
    fn inconsistent_meander_law_rejected() {
        let spec = LevySpec::two_param(r(1, 2), r(1, 1)).unwrap();
        let wrong = MeanderLaw::beta(r(1, 1), r(1, 1)).unwrap();
        assert!(stationary_pair(&spec, &wrong, 4).is_err());
        let no_mean = LevySpec::two_param(r(1, 2), r(0, 1)).unwrap();
        assert!(matches!(
            stationary_pair_from_spec(&no_mean, 4),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn potential_closed_forms() {
        for theta in [r(1, 2), r(1, 1), r(2, 1)] {
            let spec = LevySpec::two_param(r(0, 1), theta.clone()).unwrap();
            for j in 1..=10i64 {
                let g = potential_from_levy(&spec, j as usize).unwrap();
                assert_eq!(g, theta.clone() / (Rational::from_int(j - 1) + theta.clone()));
            }
        }
        for alpha in [r(1, 3), r(1, 2)] {
            let spec = LevySpec::two_param(alpha.clone(), alpha.clone()).unwrap();
            for j in 1..=10usize {
                let g = potential_from_levy(&spec, j).unwrap();
                assert_eq!(g, rising(&alpha, j - 1) / factorial::<Rational>(j - 1));
            }
        }
    }

    #[test]
    fn ewens_upchain() {
        for theta in [r(1, 2), r(1, 1), r(2, 1)] {
            let spec = LevySpec::two_param(r(0, 1), theta.clone()).unwrap();
            let pair = stationary_pair_from_spec(&spec, 12).unwrap();
            let g: Vec<Rational> = (1..=13).map(|j| potential_from_levy(&spec, j).unwrap()).collect();
            for i in 1..=5usize {
                for j in i + 1..=12usize {
                    let f = upchain_transition(&pair, &g, i, j).unwrap();
                    let closed = theta.clone() * factorial::<Rational>(j - 2) * rising(&theta, i)
                        / (factorial::<Rational>(i - 1) * rising(&theta, j));
                    assert_eq!(f, closed, "i={i} j={j}");
                }
            }
        }
        // θ = 1: f(j|1) = 1/(j(j-1)) and the row telescopes to 1 - 1/J.
        let spec = LevySpec::two_param(r(0, 1), r(1, 1)).unwrap();
        let pair = stationary_pair_from_spec(&spec, 12).unwrap();
        let g: Vec<Rational> = (1..=12).map(|j| potential_from_levy(&spec, j).unwrap()).collect();
        for j in 2..=12i64 {
            assert_eq!(upchain_transition(&pair, &g, 1, j as usize).unwrap(), r(1, j * (j - 1)));
        }
        let (partial, tail) = upchain_row_mass(&pair, &g, 1, 12).unwrap();
        assert_eq!(partial, r(11, 12));
        assert_eq!(tail, r(1, 12));
        assert!(upchain_transition(&pair, &g, 3, 3).is_err());
    }

    #[test]
    fn custom_tail_needs_float_mode() {
        let spec = LevySpec::<Rational>::custom(r(0, 1), |x, y| x.powf(-0.5) * y).unwrap();
        assert!(matches!(spec.exponent(2), Err(Error::RequiresFloat(_))));
    }

    #[test]
    fn custom_tail_binomial_kernel_agrees_with_alternating_sum() {
        let spec = LevySpec::custom(0.0, |x: f64, y: f64| x.powf(-0.5) * y).unwrap();
        for n in 1..=6 {
            for m in 1..=n {
                let direct = spec.binomial(n, m).unwrap();
                let mut alt = 0.0;
                for j in 0..=m {
                    let phi = if n - m + j == 0 {
                        0.0
                    } else {
                        spec.exponent(n - m + j).unwrap()
                    };
                    let term = binomial::<f64>(m, j) * phi;
                    alt += if j % 2 == 1 { term } else { -term };
                }
                alt *= binomial::<f64>(n, m);
                assert!((direct - alt).abs() < 1e-10, "n={n} m={m}: {direct} vs {alt}");
            }
        }
    }
}
