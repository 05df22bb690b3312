//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are identities that do not hold as stated;
//! they are still executed literally and print FAIL. The process exits
//! nonzero if any other criterion fails, or if a known-red one starts passing.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use compstruct::laws::{
    cpf_table, ewens_cpf, markov_cpf, polya_q, potential_from_levy, renewal_cpf, stationary_pair_from_spec,
    two_param_q, Cpf, DecrementMatrixPair, LevySpec,
};
use compstruct::scalar::rising;
use compstruct::stochastic::{
    arrange_partition, fragment_cpf, poisson_sampling_composition, replicate, sample_scale_invariant_partition,
    uniform_sampling_composition, PartitionTableSampler, RngStream, ScaleInvariantSet,
};
use compstruct::structural::{
    block_counts, deletion_law, potential_from_cpf, reconstruct_markov, structural_moments, BlockCountTable,
};
use compstruct::verify::{
    check_decrement_recursions, check_last_part_size_biased, check_right_consistency, check_uniform_consistency,
    chi_square_gof, ks_two_sample, within_sigma, CheckReport,
};
use compstruct::{enumerate_compositions, Composition, Partition, Rational, Result, Scalar};

const KNOWN_RED: &[u8] = &[8];

const SEED_UNIFORM_SAMPLING: u64 = 20_090_901;
const SEED_POISSON_SAMPLING: u64 = 20_090_902;
const SEED_MEANDER: u64 = 20_090_903;
const SEED_TAGGED: u64 = 20_090_904;
const SEED_ARRANGE: u64 = 20_090_905;
const SEED_ORDERS: u64 = 20_090_906;
const REPLICAS: usize = 8;
const GATE: f64 = 1e-3;

fn r(a: i64, b: i64) -> Rational {
    Rational::from_ratio(a, b)
}

type Law = Arc<dyn Cpf<Rational>>;

fn two_param_law(alpha: Rational, theta: Rational, max_n: usize) -> Result<Law> {
    let name = format!("two-param({alpha},{theta})");
    let spec = LevySpec::two_param(alpha, theta)?;
    Ok(Arc::new(
        markov_cpf(stationary_pair_from_spec(&spec, max_n)?).with_family(name),
    ))
}

/// The laws of criteria 1 and 2.
fn families() -> Result<Vec<Law>> {
    let mut out: Vec<Law> = Vec::new();
    for t in [r(1, 2), r(1, 1), r(2, 1)] {
        out.push(Arc::new(ewens_cpf(t)?));
    }
    for a in [r(1, 3), r(1, 2)] {
        out.push(Arc::new(renewal_cpf(a, false)?));
    }
    out.push(two_param_law(r(1, 2), r(1, 1), 10)?);
    out.push(two_param_law(r(1, 3), r(2, 3), 10)?);
    Ok(out)
}

/// One representative per family: Ewens, renewal, two-parameter.
fn three_families() -> Result<Vec<Law>> {
    Ok(vec![
        Arc::new(ewens_cpf(r(1, 1))?),
        Arc::new(renewal_cpf(r(1, 2), false)?),
        two_param_law(r(1, 2), r(1, 1), 10)?,
    ])
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn failed_report(reports: &[CheckReport]) -> Option<String> {
    reports.iter().find(|rep| !rep.passed).map(|rep| {
        let w = rep.witness.as_ref();
        format!(
            "{} failed for {} at {}: lhs {} rhs {}",
            rep.name,
            rep.family,
            w.map_or("?", |w| w.at.as_str()),
            w.map_or("?", |w| w.lhs.as_str()),
            w.map_or("?", |w| w.rhs.as_str()),
        )
    })
}

fn c1_normalization() -> Result<Outcome> {
    let start = Instant::now();
    for law in families()? {
        for n in 1..=10 {
            let total = cpf_table(&*law, n)?.total();
            if total != r(1, 1) {
                return Ok(Outcome::new(
                    false,
                    format!("{} sums to {total} at n={n}", law.family()),
                ));
            }
        }
    }
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        elapsed < Duration::from_secs(5),
        format!("7 laws, n <= 10, exact; {:.2} s (limit 5 s)", elapsed.as_secs_f64()),
    ))
}

fn c2_self_similarity() -> Result<Outcome> {
    let mut reports = Vec::new();
    for law in families()? {
        reports.push(check_uniform_consistency(&*law, 9)?);
        reports.push(check_right_consistency(&*law, 9)?);
    }
    if let Some(msg) = failed_report(&reports) {
        return Ok(Outcome::new(false, msg));
    }
    let mut witnesses = Vec::new();
    for (a, t) in [(r(1, 2), r(1, 1)), (r(1, 3), r(2, 3))] {
        let control = markov_cpf(DecrementMatrixPair::regenerative(two_param_q(&a, &t, 10)?));
        let uniform = check_uniform_consistency(&control, 9)?;
        let right = check_right_consistency(&control, 9)?;
        match (&right.witness, right.passed) {
            (Some(w), false) if uniform.passed => witnesses.push(format!("({a},{t}) at {}", w.at)),
            _ => {
                return Ok(Outcome::new(
                    false,
                    format!("regenerative control ({a},{t}) did not fail as expected"),
                ))
            }
        }
    }
    let control = markov_cpf(DecrementMatrixPair::regenerative(two_param_q(&r(0, 1), &r(1, 1), 10)?));
    let zero = [
        check_uniform_consistency(&control, 9)?,
        check_right_consistency(&control, 9)?,
    ];
    if let Some(msg) = failed_report(&zero) {
        return Ok(Outcome::new(false, format!("alpha = 0 control: {msg}")));
    }
    Ok(Outcome::new(
        true,
        format!(
            "7 laws certified at n <= 9; controls fail right-consistency: {}; alpha = 0 control passes",
            witnesses.join(", ")
        ),
    ))
}

fn c3_decrement_calculus() -> Result<Outcome> {
    let mut worst_float: f64 = 0.0;
    for (a, t) in [(r(1, 2), r(1, 1)), (r(1, 3), r(2, 3)), (r(0, 1), r(1, 1))] {
        let spec = LevySpec::two_param(a.clone(), t.clone())?;
        let closed = two_param_q(&a, &t, 10)?;
        let (af, tf) = (a.to_f64(), t.to_f64());
        let log_beta = statrs::function::beta::ln_beta(1.0 - af, 1.0 + tf);
        let custom = LevySpec::<f64>::custom(0.0, move |x, y| (-af * x.ln() + tf * y.ln() - log_beta).exp())?;
        for n in 1..=10 {
            let phi = spec.exponent(n)?;
            let phi_f = custom.exponent(n)?;
            for m in 1..=n {
                let q = spec.binomial(n, m)? / phi.clone();
                if q != closed.get(n, m) {
                    return Ok(Outcome::new(
                        false,
                        format!("q({n}:{m}) at ({a},{t}): {q} vs {}", closed.get(n, m)),
                    ));
                }
                let qf = custom.binomial(n, m)? / phi_f;
                worst_float = worst_float.max((qf - q.to_f64()).abs());
            }
        }
        let rec = check_decrement_recursions(&stationary_pair_from_spec(&spec, 10)?, 9)?;
        if !rec.passed {
            return Ok(Outcome::new(false, failed_report(&[rec]).unwrap_or_default()));
        }
    }
    Ok(Outcome::new(
        worst_float <= 1e-9,
        format!("exact match n <= 10; quadrature max |dq| = {worst_float:.2e} (limit 1e-9); recursions exact"),
    ))
}

fn c4_q_star_identity() -> Result<Outcome> {
    for (a, t) in [(r(1, 2), r(1, 1)), (r(1, 3), r(2, 3))] {
        let pair = stationary_pair_from_spec(&LevySpec::two_param(a.clone(), t.clone())?, 10)?;
        let polya = polya_q(&a, &(t.clone() - a.clone()), 10)?;
        for n in 1..=10 {
            for m in 1..=n {
                if pair.q_star.get(n, m) != polya.get(n, m) {
                    return Ok(Outcome::new(
                        false,
                        format!(
                            "q*({n}:{m}) at ({a},{t}): {} vs {}",
                            pair.q_star.get(n, m),
                            polya.get(n, m)
                        ),
                    ));
                }
            }
        }
    }
    Ok(Outcome::new(true, "q* = polya(alpha, theta - alpha) exactly, n <= 10"))
}

fn c5_last_part() -> Result<Outcome> {
    let mut reports = Vec::new();
    for law in three_families()? {
        reports.push(check_last_part_size_biased(&*law, 9)?);
        let moments = structural_moments(&*law, 9)?;
        let table = BlockCountTable::build(&moments, 9)?;
        for n in 1..=9 {
            let omega = if n == 1 {
                vec![r(1, 1)]
            } else {
                deletion_law(table.row(n), table.row(n - 1))?
            };
            let mu = block_counts(&moments, n)?;
            for (i, w) in omega.iter().enumerate() {
                let target = mu[i].clone() * r((i + 1) as i64, n as i64);
                if *w != target {
                    return Ok(Outcome::new(
                        false,
                        format!("{}: omega({n},{}) = {w} vs {target}", law.family(), i + 1),
                    ));
                }
            }
        }
    }
    Ok(match failed_report(&reports) {
        Some(msg) => Outcome::new(false, msg),
        None => Outcome::new(true, "last part = size-biased part, omega = r mu/n, exact, n <= 9"),
    })
}

fn c6_reconstruction() -> Result<Outcome> {
    for law in three_families()? {
        let moments = structural_moments(&*law, 9)?;
        let rebuilt = reconstruct_markov(&moments)?;
        for n in 1..=8 {
            for c in enumerate_compositions(n)? {
                let (a, b) = (rebuilt.cpf.prob(&c)?, law.prob(&c)?);
                if a != b {
                    return Ok(Outcome::new(false, format!("{} at {c}: {a} vs {b}", law.family())));
                }
            }
        }
    }
    Ok(Outcome::new(true, "p(1..9) rebuilds each CPF bit-equal at n <= 8"))
}

fn c7_potential() -> Result<Outcome> {
    type Closed = Box<dyn Fn(usize) -> Rational>;
    let cases: Vec<(Law, LevySpec<f64>, Option<Closed>)> = vec![
        (
            Arc::new(ewens_cpf(r(1, 1))?),
            LevySpec::two_param(0.0, 1.0)?,
            Some(Box::new(|j| r(1, j as i64))),
        ),
        (
            Arc::new(ewens_cpf(r(2, 1))?),
            LevySpec::two_param(0.0, 2.0)?,
            Some(Box::new(|j| r(2, j as i64 + 1))),
        ),
        (
            Arc::new(renewal_cpf(r(1, 2), false)?),
            LevySpec::two_param(0.5, 0.5)?,
            Some(Box::new(|j| {
                rising(&r(1, 2), j - 1) / compstruct::scalar::factorial::<Rational>(j - 1)
            })),
        ),
        (
            two_param_law(r(1, 2), r(1, 1), 11)?,
            LevySpec::two_param(0.5, 1.0)?,
            None,
        ),
    ];
    let mut worst: f64 = 0.0;
    for (law, spec, closed) in &cases {
        let moments = structural_moments(&**law, 10)?;
        let table = BlockCountTable::build(&moments, 10)?;
        for j in 1..=10 {
            let expansion = potential_from_cpf(&moments, j)?;
            let prev = if j == 1 { r(0, 1) } else { table.total(j - 1) };
            let difference = table.total(j) - prev;
            if expansion != difference {
                return Ok(Outcome::new(
                    false,
                    format!("{}: g({j}) {expansion} vs mu diff {difference}", law.family()),
                ));
            }
            if let Some(f) = closed {
                if expansion != f(j) {
                    return Ok(Outcome::new(
                        false,
                        format!("{}: g({j}) = {expansion}, closed form {}", law.family(), f(j)),
                    ));
                }
            }
            worst = worst.max((potential_from_levy(spec, j)? - expansion.to_f64()).abs());
        }
    }
    Ok(Outcome::new(
        worst <= 1e-8,
        format!("rational forms agree exactly, closed forms exact; Levy formula max diff {worst:.2e} (limit 1e-8)"),
    ))
}

fn c8_fragmentation() -> Result<Outcome> {
    let start = Instant::now();
    let outer = ewens_cpf(r(1, 1))?;
    let inner = renewal_cpf(r(1, 2), true)?;
    let target = two_param_law(r(1, 2), r(1, 1), 6)?;
    let mut mismatch = None;
    'outer: for n in 1..=6 {
        let table = fragment_cpf(&outer, &inner, n)?;
        for (c, p) in &table.rows {
            let q = target.prob(c)?;
            if *p != q {
                mismatch = Some(format!("first mismatch at {c}: fragment {p} vs stationary {q}"));
                break 'outer;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok(match mismatch {
        Some(m) => Outcome::new(false, format!("{m}; {elapsed:.2} s")),
        None => Outcome::new(elapsed < 30.0, format!("exact match n <= 6; {elapsed:.2} s")),
    })
}

/// Draw log: one binary code per line.
fn draw_log(draws: &[Composition]) -> String {
    let mut s = String::with_capacity(draws.len() * 8);
    for d in draws {
        s.push_str(&d.binary_string());
        s.push('\n');
    }
    s
}

fn expected_table(law: &dyn Cpf<Rational>, n: usize) -> Result<Vec<(Composition, f64)>> {
    Ok(cpf_table(law, n)?
        .rows
        .into_iter()
        .map(|(c, p)| (c, p.to_f64()))
        .collect())
}

fn gof(draws: &[Composition], law: &dyn Cpf<Rational>, n: usize) -> Result<f64> {
    let counts = compstruct::stochastic::count_draws(draws);
    Ok(chi_square_gof(&counts, &expected_table(law, n)?)?.p_value)
}

fn uniform_sampling_draws() -> Result<Vec<Composition>> {
    replicate(200_000, REPLICAS, SEED_UNIFORM_SAMPLING, |rng| {
        let mut partition = sample_scale_invariant_partition(1.0, 1e-3, rng)?;
        uniform_sampling_composition(&mut partition, 5, rng)
    })
}

fn poisson_sampling_draws() -> Result<Vec<Composition>> {
    replicate(200_000, REPLICAS, SEED_POISSON_SAMPLING, |rng| {
        let mut set = ScaleInvariantSet::new(1.0, rng)?;
        poisson_sampling_composition(&mut set, 5, rng)
    })
}

fn c9_sampling_constructions(logs: &mut BTreeMap<&'static str, String>) -> Result<Outcome> {
    let ewens = ewens_cpf(r(1, 1))?;
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, run) in [
        (
            "uniform sampling",
            uniform_sampling_draws as fn() -> Result<Vec<Composition>>,
        ),
        ("poisson sampling", poisson_sampling_draws),
    ] {
        let start = Instant::now();
        let draws = run()?;
        let secs = start.elapsed().as_secs_f64();
        let p = gof(&draws, &ewens, 5)?;
        pass &= p > GATE && secs < 60.0;
        parts.push(format!("{name} p = {p:.4} ({secs:.1} s)"));
        logs.insert(name, draw_log(&draws));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn meander_draws() -> Result<Vec<f64>> {
    replicate(100_000, REPLICAS, SEED_MEANDER, |rng| {
        let partition = sample_scale_invariant_partition(1.0, 1e-3, rng)?;
        Ok(partition.meander().map_or(0.0, |(lo, hi)| hi - lo))
    })
}

fn tagged_draws() -> Result<Vec<f64>> {
    replicate(100_000, REPLICAS, SEED_TAGGED, |rng| {
        let mut partition = sample_scale_invariant_partition(1.0, 1e-3, rng)?;
        let key = partition.locate(rng.uniform())?;
        Ok(partition.gap_length(key))
    })
}

fn float_log(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{:016x}\n", x.to_bits())).collect()
}

fn c10_meander(logs: &mut BTreeMap<&'static str, String>) -> Result<Outcome> {
    let a = meander_draws()?;
    let v = tagged_draws()?;
    let ks = ks_two_sample(&a, &v)?;
    let n = a.len() as f64;
    let m1 = a.iter().sum::<f64>() / n;
    let m2 = a.iter().map(|x| x * x).sum::<f64>() / n;
    // Beta(1,1): E A = 1/2, Var A = 1/12; E A^2 = 1/3, Var A^2 = 4/45.
    let first = within_sigma(m1, 0.5, (1.0f64 / 12.0 / n).sqrt(), 3.0);
    let second = within_sigma(m2, 1.0 / 3.0, (4.0f64 / 45.0 / n).sqrt(), 3.0);
    logs.insert("meander", float_log(&a));
    logs.insert("tagged gap", float_log(&v));
    Ok(Outcome::new(
        ks.p_value > GATE && first && second,
        format!(
            "KS D = {:.5}, p = {:.4}; E A = {m1:.5}, E A^2 = {m2:.5}",
            ks.statistic, ks.p_value
        ),
    ))
}

fn arranged_draws() -> Result<Vec<Composition>> {
    let table = PartitionTableSampler::new(&r(1, 2), &r(1, 2), 6)?;
    replicate(200_000, REPLICAS, SEED_ARRANGE, |rng| {
        arrange_partition(table.sample(rng), 0.5, 0.5, rng)
    })
}

fn order_draws() -> Result<Vec<Composition>> {
    let partition: Partition = "2,1,1".parse()?;
    replicate(100_000, REPLICAS, SEED_ORDERS, |rng| {
        arrange_partition(&partition, 0.5, 0.0, rng)
    })
}

fn c11_arrangement(logs: &mut BTreeMap<&'static str, String>) -> Result<Outcome> {
    let draws = arranged_draws()?;
    let p = gof(&draws, &*two_param_law(r(1, 2), r(1, 1), 6)?, 6)?;
    let orders = order_draws()?;
    let c1: Composition = "1,2,1".parse()?;
    let c2: Composition = "2,1,1".parse()?;
    let a = orders.iter().filter(|c| **c == c1).count() as f64;
    let b = orders.iter().filter(|c| **c == c2).count() as f64;
    let m = a + b;
    let uniform_orders = within_sigma(a / m, 0.5, (0.25 / m).sqrt(), 3.0);
    logs.insert("arranged", draw_log(&draws));
    logs.insert("orders", draw_log(&orders));
    Ok(Outcome::new(
        p > GATE && uniform_orders,
        format!("chi-square p = {p:.4}; remainder orders {a} vs {b}"),
    ))
}

fn c12_determinism(logs: &BTreeMap<&'static str, String>) -> Result<Outcome> {
    let reruns: Vec<(&str, String)> = vec![
        ("uniform sampling", draw_log(&uniform_sampling_draws()?)),
        ("poisson sampling", draw_log(&poisson_sampling_draws()?)),
        ("meander", float_log(&meander_draws()?)),
        ("tagged gap", float_log(&tagged_draws()?)),
        ("arranged", draw_log(&arranged_draws()?)),
        ("orders", draw_log(&order_draws()?)),
    ];
    let mut differing = Vec::new();
    for (name, log) in &reruns {
        if logs.get(name) != Some(log) {
            differing.push(*name);
        }
    }
    // A fresh stream on a fixed seed is a fixed sequence.
    let first: Vec<u64> = (0..4).map(|_| RngStream::new(7, 3).uniform().to_bits()).collect();
    let stable = first.windows(2).all(|w| w[0] == w[1]);
    Ok(if differing.is_empty() && reruns.len() == logs.len() && stable {
        let bytes: usize = logs.values().map(String::len).sum();
        Outcome::new(
            true,
            format!("{} draw logs ({bytes} bytes) identical on rerun", logs.len()),
        )
    } else {
        Outcome::new(false, format!("logs differ on rerun: {differing:?}"))
    })
}

fn run(id: u8, name: &str, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let outcome = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(o)) => o,
        Ok(Err(e)) => Outcome::new(false, format!("error: {e}")),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        }
    };
    let tag = if outcome.pass { "PASS" } else { "FAIL" };
    let known = if KNOWN_RED.contains(&id) { " [known red]" } else { "" };
    println!(
        "criterion {id:>2}: {tag}{known}  {name}: {} [{:.1} s]",
        outcome.detail,
        start.elapsed().as_secs_f64()
    );
    outcome.pass
}

fn main() {
    let mut logs = BTreeMap::new();
    let results = [
        (1, run(1, "normalization", c1_normalization)),
        (2, run(2, "self-similarity certification", c2_self_similarity)),
        (3, run(3, "decrement calculus", c3_decrement_calculus)),
        (4, run(4, "q* identity", c4_q_star_identity)),
        (5, run(5, "last part is size-biased", c5_last_part)),
        (6, run(6, "reconstruction round-trip", c6_reconstruction)),
        (7, run(7, "potential function", c7_potential)),
        (8, run(8, "fragmentation identity", c8_fragmentation)),
        (
            9,
            run(9, "sampling constructions", || c9_sampling_constructions(&mut logs)),
        ),
        (10, run(10, "meander vs tagged gap", || c10_meander(&mut logs))),
        (11, run(11, "arrangement", || c11_arrangement(&mut logs))),
        (12, run(12, "determinism", || c12_determinism(&logs))),
    ];
    let passed = results.iter().filter(|(_, ok)| *ok).count();
    println!("{passed}/{} criteria pass", results.len());
    let unexpected: Vec<u8> = results
        .iter()
        .filter(|(id, ok)| *ok == KNOWN_RED.contains(id))
        .map(|(id, _)| *id)
        .collect();
    if !unexpected.is_empty() {
        println!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
