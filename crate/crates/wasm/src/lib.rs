//! wasm-bindgen entry points for the static demo page in `www/`.
//!
//! Every export returns a JSON string. The plain `*_json` functions carry the
//! logic and are what the native tests call.

use compstruct::composition::ENUMERATION_CAP;
use compstruct::laws::{
    cpf_table as table, ewens_cpf, markov_cpf, potential_from_levy, renewal_cpf, stationary_pair_from_spec, Cpf,
    LevySpec,
};
use compstruct::scalar::format_scalar;
use compstruct::stochastic::{
    count_draws, BernoulliStringSampler, CompositionSampler, MarkovSampler, RenewalStringSampler, RngStream,
};
use compstruct::verify::chi_square_gof;
use compstruct::{Composition, ParamValue, Rational, Scalar};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest n the page will enumerate or sample.
pub const DEMO_MAX_N: usize = 12;
pub const DEMO_MAX_DRAWS: usize = 200_000;

type Res<T> = Result<T, String>;

fn param(name: &str, raw: &str) -> Res<ParamValue> {
    raw.parse::<ParamValue>().map_err(|e| format!("{name}: {e}"))
}

fn check_n(n: usize) -> Res<()> {
    if n == 0 || n > DEMO_MAX_N.min(ENUMERATION_CAP) {
        return Err(format!("n must lie in 1..={DEMO_MAX_N}"));
    }
    Ok(())
}

fn law<S: Scalar>(family: &str, alpha: &ParamValue, theta: &ParamValue, n: usize) -> Res<Box<dyn Cpf<S>>> {
    let a = || alpha.to_scalar::<S>().map_err(|e| e.to_string());
    let t = || theta.to_scalar::<S>().map_err(|e| e.to_string());
    let law: Box<dyn Cpf<S>> = match family {
        "ewens" => Box::new(ewens_cpf(t()?).map_err(|e| e.to_string())?),
        "renewal" => Box::new(renewal_cpf(a()?, false).map_err(|e| e.to_string())?),
        "two-param" => {
            let spec = LevySpec::two_param(a()?, t()?).map_err(|e| e.to_string())?;
            Box::new(markov_cpf(
                stationary_pair_from_spec(&spec, n).map_err(|e| e.to_string())?,
            ))
        }
        other => return Err(format!("unknown family {other}")),
    };
    Ok(law)
}

#[derive(Serialize)]
struct Row {
    composition: String,
    parts: String,
    probability: String,
    value: f64,
}

#[derive(Serialize)]
struct Table {
    family: String,
    mode: &'static str,
    n: usize,
    rows: Vec<Row>,
    total: String,
}

fn table_in<S: Scalar>(family: &str, alpha: &ParamValue, theta: &ParamValue, n: usize) -> Res<Table> {
    let cpf = law::<S>(family, alpha, theta, n)?;
    let t = table(&*cpf, n).map_err(|e| e.to_string())?;
    Ok(Table {
        family: t.family.clone(),
        mode: S::MODE,
        n,
        total: format_scalar(&t.total()),
        rows: t
            .rows
            .iter()
            .map(|(c, p)| Row {
                composition: c.binary_string(),
                parts: c.to_string(),
                probability: format_scalar(p),
                value: p.to_f64(),
            })
            .collect(),
    })
}

/// Exact table when both parameters are fractions, float otherwise.
pub fn cpf_table_json(family: &str, alpha: &str, theta: &str, n: usize) -> Res<String> {
    check_n(n)?;
    let (a, t) = (param("alpha", alpha)?, param("theta", theta)?);
    let out = if a.is_exact() && t.is_exact() {
        table_in::<Rational>(family, &a, &t, n)?
    } else {
        table_in::<f64>(family, &a, &t, n)?
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Bar {
    composition: String,
    parts: String,
    count: u64,
    expected: f64,
}

#[derive(Serialize)]
struct Histogram {
    n: usize,
    seed: u64,
    draws: usize,
    bars: Vec<Bar>,
    chi_square: f64,
    df: usize,
    p_value: f64,
}

/// Draws from the family's own sampler on a single stream of `seed`.
pub fn sample_histogram_json(family: &str, alpha: &str, theta: &str, n: usize, seed: u64, draws: usize) -> Res<String> {
    check_n(n)?;
    if draws == 0 || draws > DEMO_MAX_DRAWS {
        return Err(format!("draws must lie in 1..={DEMO_MAX_DRAWS}"));
    }
    let (a, t) = (param("alpha", alpha)?, param("theta", theta)?);
    let exact = law::<f64>(family, &a, &t, n)?;
    let sampler: Box<dyn CompositionSampler> = match family {
        "ewens" => Box::new(BernoulliStringSampler { theta: t.to_f64() }),
        "renewal" => Box::new(RenewalStringSampler {
            alpha: a.to_f64(),
            reversed: false,
        }),
        _ => {
            let spec = LevySpec::two_param(a.to_f64(), t.to_f64()).map_err(|e| e.to_string())?;
            let pair = stationary_pair_from_spec(&spec, n).map_err(|e| e.to_string())?;
            Box::new(MarkovSampler::new(&pair).map_err(|e| e.to_string())?)
        }
    };
    let mut rng = RngStream::new(seed, 0);
    let sampled = (0..draws)
        .map(|_| sampler.sample(n, &mut rng))
        .collect::<compstruct::Result<Vec<Composition>>>()
        .map_err(|e| e.to_string())?;
    let counts = count_draws(&sampled);
    let rows = table(&*exact, n).map_err(|e| e.to_string())?.rows;
    let chi = chi_square_gof(&counts, &rows).map_err(|e| e.to_string())?;
    let bars = rows
        .iter()
        .map(|(c, p)| Bar {
            composition: c.binary_string(),
            parts: c.to_string(),
            count: counts.get(c).copied().unwrap_or(0),
            expected: p * draws as f64,
        })
        .collect();
    serde_json::to_string(&Histogram {
        n,
        seed,
        draws,
        bars,
        chi_square: chi.statistic,
        df: chi.df,
        p_value: chi.p_value,
    })
    .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct CurvePoint {
    j: usize,
    potential: f64,
    one_block: f64,
}

/// `g(j)` of the two-parameter Lévy measure and `P(C_j = (j))` of its
/// stationary law, `j = 1..=j_max`.
pub fn potential_curve_json(alpha: f64, theta: f64, j_max: usize) -> Res<String> {
    if j_max == 0 || j_max > 200 {
        return Err("j_max must lie in 1..=200".into());
    }
    let spec = LevySpec::two_param(alpha, theta).map_err(|e| e.to_string())?;
    let pair = stationary_pair_from_spec(&spec, j_max).map_err(|e| e.to_string())?;
    let law = markov_cpf(pair);
    let points = (1..=j_max)
        .map(|j| {
            Ok(CurvePoint {
                j,
                potential: potential_from_levy(&spec, j)?,
                one_block: law.prob(&Composition::one_block(j))?,
            })
        })
        .collect::<compstruct::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = cpfTable)]
pub fn cpf_table(family: &str, alpha: &str, theta: &str, n: usize) -> Result<String, JsError> {
    cpf_table_json(family, alpha, theta, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sampleHistogram)]
pub fn sample_histogram(
    family: &str,
    alpha: &str,
    theta: &str,
    n: usize,
    seed: u64,
    draws: usize,
) -> Result<String, JsError> {
    sample_histogram_json(family, alpha, theta, n, seed, draws).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = potentialCurve)]
pub fn potential_curve(alpha: f64, theta: f64, j_max: usize) -> Result<String, JsError> {
    potential_curve_json(alpha, theta, j_max).map_err(|e| JsError::new(&e))
}
