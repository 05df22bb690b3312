use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use compstruct::composition::ENUMERATION_CAP;
use compstruct::laws::{
    cpf_table, ewens_cpf, markov_cpf, renewal_cpf, stationary_pair_from_spec, Cpf, CpfTable, DecrementMatrix, LevySpec,
};
use compstruct::records::{cpf_records, format_cpf_table, format_decrement_pair, parse_moments, CpfRecord};
use compstruct::scalar::format_scalar;
use compstruct::stochastic::{arrange_partition, arrangement_prob, count_draws, fragment_cpf, replicate};
use compstruct::structural::{reconstruct_markov, StructuralMoments};
use compstruct::verify::{
    check_last_part_size_biased, check_left_consistency, check_right_consistency, check_uniform_consistency,
    chi_square_gof, CheckReport, ChiSquare,
};
use compstruct::{Composition, Partition, Rational, Scalar};
use serde::Serialize;

use crate::family::{parse_param, Construction, LawArgs};
use crate::{write_file, CliError, Format};

pub struct Output {
    pub text: String,
    pub code: u8,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::invalid(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn check_n(n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::invalid("--n must be >= 1"));
    }
    if n > ENUMERATION_CAP {
        return Err(compstruct::Error::CapExceeded {
            n,
            cap: ENUMERATION_CAP,
        }
        .into());
    }
    Ok(())
}

#[derive(Serialize)]
struct TableJson {
    family: String,
    mode: &'static str,
    n: usize,
    rows: Vec<CpfRecord>,
    total: String,
}

fn table_json<S: Scalar>(table: &CpfTable<S>) -> TableJson {
    TableJson {
        family: table.family.clone(),
        mode: S::MODE,
        n: table.n,
        rows: cpf_records(table),
        total: format_scalar(&table.total()),
    }
}

pub fn cpf(law: &LawArgs, n: usize, fmt: Format) -> Result<Output, CliError> {
    if law.exact()? {
        cpf_in::<Rational>(law, n, fmt)
    } else {
        cpf_in::<f64>(law, n, fmt)
    }
}

fn cpf_in<S: Scalar>(law: &LawArgs, n: usize, fmt: Format) -> Result<Output, CliError> {
    check_n(n)?;
    let cpf = law.law::<S>(n)?;
    let table = cpf_table(&*cpf, n)?;
    Ok(Output::ok(match fmt {
        Format::Tsv => format!(
            "{}# total\t{}\n",
            format_cpf_table(&table),
            format_scalar(&table.total())
        ),
        Format::Json => json(&table_json(&table))?,
    }))
}

#[derive(Serialize)]
struct CountRow {
    composition: String,
    parts: String,
    count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    probability: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
}

#[derive(Serialize)]
struct CountTable {
    family: String,
    n: usize,
    seed: u64,
    draws: usize,
    replicas: usize,
    rows: Vec<CountRow>,
    chi_square: Option<ChiSquare>,
}

/// Count rows over the support of `expected` (exact string, probability), or
/// over the observed compositions when no law is available.
fn count_table(
    draws: &[Composition],
    expected: Option<Vec<(Composition, String, f64)>>,
) -> Result<(Vec<CountRow>, Option<ChiSquare>), CliError> {
    let counts = count_draws(draws);
    let total = draws.len() as f64;
    let row = |c: &Composition, count: u64, p: Option<(&String, f64)>| {
        let e = p.map(|(_, p)| p * total);
        CountRow {
            composition: c.binary_string(),
            parts: c.to_string(),
            count,
            probability: p.map(|(s, _)| s.clone()),
            expected: e,
            residual: e.map(|e| {
                if e > 0.0 {
                    (count as f64 - e) / e.sqrt()
                } else if count > 0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }),
        }
    };
    match expected {
        Some(table) => {
            let mut rows: Vec<CountRow> = table
                .iter()
                .map(|(c, s, p)| row(c, counts.get(c).copied().unwrap_or(0), Some((s, *p))))
                .collect();
            let known: BTreeMap<&Composition, ()> = table.iter().map(|(c, _, _)| (c, ())).collect();
            for (c, k) in &counts {
                if !known.contains_key(c) {
                    rows.push(row(c, *k, None));
                }
            }
            let cells: Vec<(Composition, f64)> = table.into_iter().map(|(c, _, p)| (c, p)).collect();
            let chi = chi_square_gof(&counts, &cells)?;
            Ok((rows, Some(chi)))
        }
        None => Ok((counts.iter().map(|(c, k)| row(c, *k, None)).collect(), None)),
    }
}

fn render_counts(table: &CountTable, fmt: Format) -> Result<String, CliError> {
    if fmt == Format::Json {
        return json(table);
    }
    let mut s = format!(
        "# family\t{}\n# n\t{}\n# seed\t{}\n# draws\t{}\n# replicas\t{}\n# composition\tparts\tcount\tprobability\texpected\tresidual\n",
        table.family, table.n, table.seed, table.draws, table.replicas
    );
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.composition,
            r.parts,
            r.count,
            r.probability.as_deref().unwrap_or("-"),
            opt(r.expected),
            opt(r.residual)
        );
    }
    if let Some(chi) = &table.chi_square {
        let _ = writeln!(
            s,
            "# chi-square\t{:.6}\tdf\t{}\tp\t{:.6}",
            chi.statistic, chi.df, chi.p_value
        );
    }
    Ok(s)
}

fn draw_log(draws: &[Composition]) -> String {
    draws.iter().map(|c| format!("{}\n", c.binary_string())).collect()
}

#[allow(clippy::too_many_arguments)]
pub fn sample(
    law: &LawArgs,
    n: usize,
    seed: u64,
    draws: usize,
    replicas: usize,
    construction: Option<Construction>,
    log: Option<&Path>,
    fmt: Format,
) -> Result<Output, CliError> {
    if n == 0 || draws == 0 {
        return Err(CliError::invalid("--n and --draws must be >= 1"));
    }
    let family = law.family()?;
    let construction = construction.unwrap_or(Construction::default_for(family));
    let sampler = law.sampler(construction, n)?;
    let sampled = replicate(draws, replicas, seed, |rng| sampler.sample(n, rng))?;
    if let Some(path) = log {
        write_file(path, &draw_log(&sampled))?;
    }
    let expected = if n <= ENUMERATION_CAP {
        let exact = law.exact()?;
        let rows = if exact {
            let t = cpf_table(&*law.law::<Rational>(n)?, n)?;
            t.rows
                .into_iter()
                .map(|(c, p)| (c, format_scalar(&p), p.to_f64()))
                .collect()
        } else {
            let t = cpf_table(&*law.law::<f64>(n)?, n)?;
            t.rows.into_iter().map(|(c, p)| (c, format_scalar(&p), p)).collect()
        };
        Some(rows)
    } else {
        None
    };
    let (rows, chi_square) = count_table(&sampled, expected)?;
    let table = CountTable {
        family: format!("{family:?}").to_lowercase(),
        n,
        seed,
        draws,
        replicas,
        rows,
        chi_square,
    };
    Ok(Output::ok(render_counts(&table, fmt)?))
}

pub fn check(law: &LawArgs, n_max: usize, checks: &str, fmt: Format) -> Result<Output, CliError> {
    if law.exact()? {
        check_in::<Rational>(law, n_max, checks, fmt)
    } else {
        check_in::<f64>(law, n_max, checks, fmt)
    }
}

fn check_in<S: Scalar>(law: &LawArgs, n_max: usize, checks: &str, fmt: Format) -> Result<Output, CliError> {
    check_n(n_max)?;
    let cpf = law.law::<S>(n_max + 1)?;
    let mut reports: Vec<CheckReport> = Vec::new();
    for name in checks.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        reports.push(match name {
            "uniform" => check_uniform_consistency(&*cpf, n_max)?,
            "right" => check_right_consistency(&*cpf, n_max)?,
            "left" => check_left_consistency(&*cpf, n_max)?,
            "last-part" => check_last_part_size_biased(&*cpf, n_max)?,
            "decrement" => {
                let pair = law
                    .pair::<S>(n_max + 1)?
                    .ok_or_else(|| CliError::invalid("the decrement check needs two-param or markov-table"))?;
                compstruct::verify::check_decrement_recursions(&pair, n_max)?
            }
            other => return Err(CliError::invalid(format!("unknown check {other}"))),
        });
    }
    let code = if reports.iter().all(|r| r.passed) { 0 } else { 1 };
    let text = match fmt {
        Format::Json => json(&reports)?,
        Format::Tsv => {
            let mut s = String::from("# check\tfamily\tn_max\tverdict\tmode\tchecked\twitness\tlhs\trhs\tdifference\n");
            for r in &reports {
                let (at, lhs, rhs, diff) = match &r.witness {
                    Some(w) => (
                        w.at.as_str(),
                        w.lhs.as_str(),
                        w.rhs.as_str(),
                        format!("{:e}", w.difference),
                    ),
                    None => ("-", "-", "-", "0".to_string()),
                };
                let _ = writeln!(
                    s,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{at}\t{lhs}\t{rhs}\t{diff}",
                    r.name,
                    r.family,
                    r.n_max,
                    r.verdict(),
                    r.mode,
                    r.checked
                );
                if let Some(note) = &r.note {
                    let _ = writeln!(s, "# note\t{}\t{note}", r.name);
                }
            }
            s
        }
    };
    Ok(Output { text, code })
}

#[derive(Serialize)]
struct ReconstructJson {
    n: usize,
    one_block: bool,
    q: Vec<Vec<String>>,
    q_star: Vec<Vec<String>>,
    tables: Vec<TableJson>,
    round_trip: Option<bool>,
}

fn matrix_json(m: &DecrementMatrix<Rational>) -> Vec<Vec<String>> {
    (1..=m.max_n())
        .map(|n| m.row(n).iter().map(format_scalar).collect())
        .collect()
}

pub fn reconstruct(moments: &Path, n: Option<usize>, law: &LawArgs, fmt: Format) -> Result<Output, CliError> {
    let text =
        std::fs::read_to_string(moments).map_err(|e| CliError::invalid(format!("{}: {e}", moments.display())))?;
    let moments = StructuralMoments::new(parse_moments(&text)?)?;
    let rec = reconstruct_markov(&moments)?;
    let big_n = moments.len() - 1;
    let table_n = n.unwrap_or(big_n.min(10));
    if table_n == 0 || table_n > big_n {
        return Err(CliError::invalid(format!("--n must lie in 1..={big_n}")));
    }
    check_n(table_n)?;
    let tables = (1..=table_n)
        .map(|k| cpf_table(&rec.cpf, k))
        .collect::<compstruct::Result<Vec<_>>>()?;
    let round_trip = match law.family {
        None => None,
        Some(_) => {
            if !law.exact()? {
                return Err(CliError::invalid("round-trip comparison needs exact parameters"));
            }
            let reference = law.law::<Rational>(big_n)?;
            let mut same = true;
            for t in &tables {
                for (c, p) in &t.rows {
                    same &= reference.prob(c)? == *p;
                }
            }
            Some(same)
        }
    };
    let code = if round_trip == Some(false) { 1 } else { 0 };
    let text = match fmt {
        Format::Json => json(&ReconstructJson {
            n: big_n,
            one_block: rec.one_block,
            q: matrix_json(&rec.pair.q),
            q_star: matrix_json(&rec.pair.q_star),
            tables: tables.iter().map(table_json).collect(),
            round_trip,
        })?,
        Format::Tsv => {
            let mut s = format!(
                "# decrement matrices up to n = {big_n}\n{}",
                format_decrement_pair(&rec.pair)
            );
            s.push_str("# cpf\n");
            for t in &tables {
                s.push_str(&format_cpf_table(t));
            }
            if let Some(ok) = round_trip {
                let _ = writeln!(s, "# round-trip\t{}", if ok { "pass" } else { "fail" });
            }
            s
        }
    };
    Ok(Output { text, code })
}

#[allow(clippy::too_many_arguments)]
pub fn arrange(
    partition: &str,
    alpha: &str,
    theta: &str,
    seed: u64,
    draws: usize,
    replicas: usize,
    log: Option<&Path>,
    fmt: Format,
) -> Result<Output, CliError> {
    let partition: Partition = partition
        .parse()
        .map_err(|e| CliError::invalid(format!("--partition: {e}")))?;
    let (a, t) = (parse_param("alpha", alpha)?, parse_param("theta", theta)?);
    if draws == 0 {
        return Err(CliError::invalid("--draws must be >= 1"));
    }
    let (af, tf) = (a.to_f64(), t.to_f64());
    let sampled = replicate(draws, replicas, seed, |rng| arrange_partition(&partition, af, tf, rng))?;
    if let Some(path) = log {
        write_file(path, &draw_log(&sampled))?;
    }
    let expected = if partition.n() <= ENUMERATION_CAP {
        let rows = partition
            .arrangements()
            .into_iter()
            .map(|c| {
                if a.is_exact() && t.is_exact() {
                    let p: Rational = arrangement_prob(&c, &a.to_scalar()?, &t.to_scalar()?)?;
                    Ok((c, format_scalar(&p), p.to_f64()))
                } else {
                    let p: f64 = arrangement_prob(&c, &af, &tf)?;
                    Ok((c, format_scalar(&p), p))
                }
            })
            .collect::<compstruct::Result<Vec<_>>>()?;
        Some(rows)
    } else {
        None
    };
    let (rows, chi_square) = count_table(&sampled, expected)?;
    let table = CountTable {
        family: format!("arrange[{partition}]"),
        n: partition.n(),
        seed,
        draws,
        replicas,
        rows,
        chi_square,
    };
    Ok(Output::ok(render_counts(&table, fmt)?))
}

#[derive(Serialize)]
struct FragmentRow {
    composition: String,
    parts: String,
    probability: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    stationary: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    equal: Option<bool>,
}

pub fn fragment(
    theta: &str,
    alpha: &str,
    inner_reversed: bool,
    n: usize,
    against: Option<(&str, &str)>,
    fmt: Format,
) -> Result<Output, CliError> {
    let mut params = vec![parse_param("theta", theta)?, parse_param("alpha", alpha)?];
    if let Some((aa, at)) = against {
        params.push(parse_param("against-alpha", aa)?);
        params.push(parse_param("against-theta", at)?);
    }
    if params.iter().all(|p| p.is_exact()) {
        fragment_in::<Rational>(&params, inner_reversed, n, fmt)
    } else {
        fragment_in::<f64>(&params, inner_reversed, n, fmt)
    }
}

fn fragment_in<S: Scalar>(
    params: &[compstruct::ParamValue],
    inner_reversed: bool,
    n: usize,
    fmt: Format,
) -> Result<Output, CliError> {
    check_n(n)?;
    let outer = ewens_cpf(params[0].to_scalar::<S>()?)?;
    let inner = renewal_cpf(params[1].to_scalar::<S>()?, inner_reversed)?;
    let table = fragment_cpf(&outer, &inner, n)?;
    let target = match params.get(2..4) {
        Some([a, t]) => {
            let spec = LevySpec::two_param(a.to_scalar::<S>()?, t.to_scalar::<S>()?)?;
            Some(markov_cpf(stationary_pair_from_spec(&spec, n)?))
        }
        _ => None,
    };
    let tol = if S::EXACT { 0.0 } else { 1e-9 };
    let mut rows = Vec::with_capacity(table.rows.len());
    let mut all_equal = true;
    for (c, p) in &table.rows {
        let other = target.as_ref().map(|law| law.prob(c)).transpose()?;
        let equal = other.as_ref().map(|q| p.close_to(q, tol));
        all_equal &= equal.unwrap_or(true);
        rows.push(FragmentRow {
            composition: c.binary_string(),
            parts: c.to_string(),
            probability: format_scalar(p),
            stationary: other.as_ref().map(format_scalar),
            equal,
        });
    }
    let code = if all_equal { 0 } else { 1 };
    let text = match fmt {
        Format::Json => json(&rows)?,
        Format::Tsv => {
            let mut s = String::new();
            for r in &rows {
                let _ = write!(s, "{}\t{}", r.composition, r.probability);
                if let (Some(q), Some(eq)) = (&r.stationary, r.equal) {
                    let _ = write!(s, "\t{q}\t{}", if eq { "equal" } else { "differ" });
                }
                s.push('\n');
            }
            let _ = writeln!(s, "# total\t{}", format_scalar(&table.total()));
            if target.is_some() {
                let _ = writeln!(s, "# identity\t{}", if all_equal { "holds" } else { "fails" });
            }
            s
        }
    };
    Ok(Output { text, code })
}
