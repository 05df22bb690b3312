//! Adaptive Gauss–Legendre quadrature on `(0, 1)`.
//!
//! Integrands are passed as `f(x, 1 - x)` so that the complement is exact
//! near `x = 1`. The interval is split at `1/2` and each half is covered by
//! dyadic pieces shrinking toward its endpoint, which absorbs integrable
//! endpoint singularities such as `x^(-α)` or `(1-x)^(θ-1)`.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 20;
const MAX_DEPTH: u32 = 24;
const MAX_PIECES: usize = 400;

pub const DEFAULT_TOL: f64 = 1e-12;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Integrates over `[lo, hi]` where the first argument is `x` and the
/// second `1 - x`; `near_one` selects which of the two is computed directly.
fn gl_piece(f: &dyn Fn(f64, f64) -> f64, lo: f64, hi: f64, near_one: bool) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    rule()
        .iter()
        .map(|&(t, w)| {
            let u = mid + half * t;
            let v = if near_one { f(1.0 - u, u) } else { f(u, 1.0 - u) };
            w * v
        })
        .sum::<f64>()
        * half
}

fn adaptive(f: &dyn Fn(f64, f64) -> f64, lo: f64, hi: f64, near_one: bool, whole: f64, depth: u32) -> f64 {
    let mid = 0.5 * (lo + hi);
    let left = gl_piece(f, lo, mid, near_one);
    let right = gl_piece(f, mid, hi, near_one);
    let refined = left + right;
    if depth >= MAX_DEPTH || (refined - whole).abs() <= 1e-14 * refined.abs() + 1e-300 {
        return refined;
    }
    adaptive(f, lo, mid, near_one, left, depth + 1) + adaptive(f, mid, hi, near_one, right, depth + 1)
}

/// Sum over dyadic pieces `[2^-(k+1), 2^-k]`, k >= 1, of the variable that
/// vanishes at the endpoint. Once successive piece ratios settle, the
/// remaining pieces are summed as a geometric series, which is exact for a
/// pure power law at the endpoint.
fn graded_half(f: &dyn Fn(f64, f64) -> f64, near_one: bool, tol: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut prev_ratio: Option<f64> = None;
    let mut hi = 0.5;
    for _ in 0..MAX_PIECES {
        let lo = hi * 0.5;
        let whole = gl_piece(f, lo, hi, near_one);
        let piece = adaptive(f, lo, hi, near_one, whole, 0);
        if !piece.is_finite() {
            return Err(Error::Divergent(format!("non-finite integrand near {lo:e}")));
        }
        total += piece;
        if piece == 0.0 && prev == Some(0.0) {
            return Ok(total);
        }
        if let Some(p) = prev.filter(|&p| p != 0.0) {
            let ratio = piece / p;
            let settled = prev_ratio.is_some_and(|r: f64| (ratio - r).abs() <= 1e-9 * ratio.abs());
            if (0.0..1.0).contains(&ratio) {
                let remainder = piece * ratio / (1.0 - ratio);
                if remainder.abs() <= tol * total.abs() || (settled && ratio < 0.999) {
                    return Ok(total + remainder);
                }
            } else if settled && ratio >= 1.0 {
                break;
            }
            prev_ratio = Some(ratio);
        }
        prev = Some(piece);
        hi = lo;
    }
    Err(Error::Divergent(format!(
        "endpoint {} contribution does not decay",
        if near_one { 1 } else { 0 }
    )))
}

/// `∫_0^1 f(x, 1-x) dx` to roughly `tol` relative accuracy.
pub fn integrate_unit(f: impl Fn(f64, f64) -> f64, tol: f64) -> Result<f64> {
    let f: &dyn Fn(f64, f64) -> f64 = &f;
    let lower = graded_half(f, false, tol)?;
    let upper = graded_half(f, true, tol)?;
    Ok(lower + upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate_unit(|x, _| 3.0 * x * x, DEFAULT_TOL).unwrap();
        assert!((v - 1.0).abs() < 1e-14, "{v}");
    }

    #[test]
    fn endpoint_singularities() {
        // ∫ x^{-1/2} = 2
        let v = integrate_unit(|x, _| x.powf(-0.5), DEFAULT_TOL).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "{v}");
        // ∫ (1-x)^{-1/3} = 3/2
        let v = integrate_unit(|_, y| y.powf(-1.0 / 3.0), DEFAULT_TOL).unwrap();
        assert!((v - 1.5).abs() < 1e-12, "{v}");
        // B(1/2, 2/3)
        let v = integrate_unit(|x, y| x.powf(-0.5) * y.powf(-1.0 / 3.0), DEFAULT_TOL).unwrap();
        let exact = (statrs::function::gamma::ln_gamma(0.5) + statrs::function::gamma::ln_gamma(2.0 / 3.0)
            - statrs::function::gamma::ln_gamma(0.5 + 2.0 / 3.0))
        .exp();
        assert!((v - exact).abs() < 1e-11, "{v} vs {exact}");
    }

    #[test]
    fn divergent_is_reported() {
        assert!(matches!(
            integrate_unit(|_, y| 1.0 / y, DEFAULT_TOL),
            Err(Error::Divergent(_))
        ));
    }
}
