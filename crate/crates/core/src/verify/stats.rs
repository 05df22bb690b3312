//! Goodness-of-fit statistics for the Monte Carlo checks.

use std::collections::BTreeMap;
use std::fmt::Debug;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Error, Result};

/// Minimum expected count per cell after pooling.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Cells after pooling.
    pub cells: usize,
    pub total: u64,
}

/// Pearson's test of observed counts against an exact law. Cells whose
/// expected count is below [`MIN_EXPECTED`] are pooled, smallest first,
/// into one extra cell. Observations outside the support give `p = 0`.
pub fn chi_square_gof<K: Ord + Clone + Debug>(counts: &BTreeMap<K, u64>, expected: &[(K, f64)]) -> Result<ChiSquare> {
    if expected.is_empty() {
        return Err(Error::EmptyInput("expected table"));
    }
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(Error::EmptyInput("count table"));
    }
    let mass: f64 = expected.iter().map(|(_, p)| p).sum();
    if expected.iter().any(|(_, p)| *p < 0.0) || (mass - 1.0).abs() > 1e-9 {
        return Err(invalid("expected", format!("not a probability vector (total {mass})")));
    }
    let support: BTreeMap<&K, f64> = expected.iter().map(|(k, p)| (k, *p)).collect();
    let outside: u64 = counts
        .iter()
        .filter(|(k, _)| support.get(k).is_none_or(|&p| p == 0.0))
        .map(|(_, c)| c)
        .sum();
    if outside > 0 {
        return Ok(ChiSquare {
            statistic: f64::INFINITY,
            df: expected.len().saturating_sub(1),
            p_value: 0.0,
            cells: expected.len(),
            total,
        });
    }
    let n = total as f64;
    let mut cells: Vec<(f64, f64)> = expected
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(k, p)| (*counts.get(k).unwrap_or(&0) as f64, p * n))
        .collect();
    cells.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut pooled = (0.0, 0.0);
    let mut kept = Vec::with_capacity(cells.len());
    for (o, e) in cells {
        if e < MIN_EXPECTED || (pooled.1 > 0.0 && pooled.1 < MIN_EXPECTED) {
            pooled.0 += o;
            pooled.1 += e;
        } else {
            kept.push((o, e));
        }
    }
    if pooled.1 > 0.0 {
        if pooled.1 < MIN_EXPECTED {
            if let Some(first) = kept.first_mut() {
                first.0 += pooled.0;
                first.1 += pooled.1;
            } else {
                kept.push(pooled);
            }
        } else {
            kept.push(pooled);
        }
    }
    let statistic: f64 = kept.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = kept.len().saturating_sub(1);
    let p_value = if df == 0 {
        1.0
    } else {
        ChiSquared::new(df as f64)
            .map_err(|e| invalid("df", e.to_string()))?
            .sf(statistic)
    };
    Ok(ChiSquare {
        statistic,
        df,
        p_value,
        cells: kept.len(),
        total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// `Q(λ) = 2 Σ_{k>=1} (-1)^{k-1} e^{-2k²λ²}`, the Kolmogorov tail.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-transformed series, fast for small λ.
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let s: f64 = (1..=20).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0);
    }
    let s: f64 = (1..=100)
        .map(|k| {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp()
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("sample"));
    }
    let (a, b) = (sorted(a), sorted(b));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let en = (n * m / (n + m)).sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_tail((en + 0.12 + 0.11 / en) * d),
    })
}

/// One-sample Kolmogorov–Smirnov test against a continuous cdf.
pub fn ks_against(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::EmptyInput("sample"));
    }
    let xs = sorted(sample);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let en = n.sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_tail((en + 0.12 + 0.11 / en) * d),
    })
}

/// `|estimate - target| <= k · sd`.
pub fn within_sigma(estimate: f64, target: f64, sd: f64, k: f64) -> bool {
    (estimate - target).abs() <= k * sd
}
