//! Line-oriented text records for tables.
//!
//! A CPF row is `binary<TAB>probability<TAB>family`, rows in enumeration
//! order. Indexed sequences (moments, potentials) are `index<TAB>value`.
//! Triangular tables (μ, ω) are `n<TAB>r<TAB>value`; decrement matrices use
//! `q<TAB>n<TAB>m<TAB>value` and `q*<TAB>n<TAB>m<TAB>value`. Values print as
//! `p/q` in rational mode and in `{:.17e}` form in float mode. Blank lines
//! and lines starting with `#` are ignored by the parsers.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::composition::Composition;
use crate::error::{Error, Result};
use crate::laws::{CpfTable, DecrementMatrix, DecrementMatrixPair};
use crate::scalar::{format_scalar, ParamValue, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CpfRecord {
    pub composition: String,
    pub parts: String,
    pub probability: String,
    pub family: String,
}

pub fn cpf_records<S: Scalar>(table: &CpfTable<S>) -> Vec<CpfRecord> {
    table
        .rows
        .iter()
        .map(|(c, p)| CpfRecord {
            composition: c.binary_string(),
            parts: c.to_string(),
            probability: format_scalar(p),
            family: table.family.clone(),
        })
        .collect()
}

pub fn format_cpf_table<S: Scalar>(table: &CpfTable<S>) -> String {
    let mut out = String::new();
    for r in cpf_records(table) {
        out.push_str(&format!("{}\t{}\t{}\n", r.composition, r.probability, r.family));
    }
    out
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_exact(s: &str, line: usize) -> Result<Rational> {
    match s.parse::<ParamValue>()? {
        ParamValue::Exact(r) => Ok(r),
        ParamValue::Float(_) => Err(Error::Parse(format!(
            "line {line}: expected an exact fraction, got {s}"
        ))),
    }
}

/// Reads exact CPF records back, one table per `n` in increasing order.
pub fn parse_cpf_records(text: &str) -> Result<Vec<CpfTable<Rational>>> {
    let mut by_n: BTreeMap<usize, CpfTable<Rational>> = BTreeMap::new();
    for (line, l) in data_lines(text) {
        let fields: Vec<&str> = l.split('\t').collect();
        if fields.len() < 2 {
            return Err(Error::Parse(format!("line {line}: expected binary<TAB>probability")));
        }
        let c = Composition::parse_binary(fields[0])?;
        let p = parse_exact(fields[1], line)?;
        let family = fields.get(2).copied().unwrap_or("table").to_string();
        let t = by_n.entry(c.n()).or_insert_with(|| CpfTable {
            family,
            n: c.n(),
            rows: Vec::new(),
        });
        t.rows.push((c, p));
    }
    Ok(by_n.into_values().collect())
}

/// `index<TAB>value` lines, indices starting at `first`.
pub fn format_indexed<S: Scalar>(values: &[S], first: usize) -> String {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{}\t{}\n", i + first, format_scalar(v)))
        .collect()
}

/// `n<TAB>r<TAB>value` lines for rows indexed by `n`, entries by `r >= 1`.
pub fn format_triangle<S: Scalar>(rows: &[(usize, Vec<S>)]) -> String {
    let mut out = String::new();
    for (n, row) in rows {
        for (r, v) in row.iter().enumerate() {
            out.push_str(&format!("{n}\t{}\t{}\n", r + 1, format_scalar(v)));
        }
    }
    out
}

/// Reads a moment sequence `p(1), p(2), ...`. Each line is either a bare
/// fraction or `index<TAB>fraction`; indices must run 1, 2, 3, ... in order.
pub fn parse_moments(text: &str) -> Result<Vec<Rational>> {
    let mut out = Vec::new();
    for (line, l) in data_lines(text) {
        let fields: Vec<&str> = l.split_whitespace().collect();
        let value = match fields.as_slice() {
            [v] => v,
            [i, v] => {
                let idx: usize = i
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {line}: bad index {i}")))?;
                if idx != out.len() + 1 {
                    return Err(Error::Parse(format!(
                        "line {line}: expected index {}, got {idx}",
                        out.len() + 1
                    )));
                }
                v
            }
            _ => return Err(Error::Parse(format!("line {line}: expected [index] value"))),
        };
        out.push(parse_exact(value, line)?);
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("moment file"));
    }
    Ok(out)
}

pub fn format_decrement_pair<S: Scalar>(pair: &DecrementMatrixPair<S>) -> String {
    let mut out = String::new();
    for (name, m) in [("q", &pair.q), ("q*", &pair.q_star)] {
        for n in 1..=m.max_n() {
            for (i, v) in m.row(n).iter().enumerate() {
                out.push_str(&format!("{name}\t{n}\t{}\t{}\n", i + 1, format_scalar(v)));
            }
        }
    }
    out
}

/// Reads exact decrement matrices; every row `1..=N` of both must be complete.
pub fn parse_decrement_pair(text: &str) -> Result<DecrementMatrixPair<Rational>> {
    let mut entries: BTreeMap<(bool, usize, usize), Rational> = BTreeMap::new();
    for (line, l) in data_lines(text) {
        let fields: Vec<&str> = l.split('\t').collect();
        let [name, n, m, v] = fields.as_slice() else {
            return Err(Error::Parse(format!(
                "line {line}: expected matrix<TAB>n<TAB>m<TAB>value"
            )));
        };
        let star = match *name {
            "q" => false,
            "q*" => true,
            other => return Err(Error::Parse(format!("line {line}: unknown matrix {other}"))),
        };
        let index = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("line {line}: bad index {s}")))
        };
        let (n, m) = (index(n)?, index(m)?);
        if m == 0 || m > n {
            return Err(Error::Parse(format!("line {line}: need 1 <= m <= n")));
        }
        entries.insert((star, n, m), parse_exact(v, line)?);
    }
    let build = |star: bool| -> Result<DecrementMatrix<Rational>> {
        let max_n = entries.keys().filter(|k| k.0 == star).map(|k| k.1).max().unwrap_or(0);
        if max_n == 0 {
            return Err(Error::EmptyInput(if star { "q* matrix" } else { "q matrix" }));
        }
        let rows = (1..=max_n)
            .map(|n| {
                (1..=n)
                    .map(|m| {
                        entries
                            .get(&(star, n, m))
                            .cloned()
                            .ok_or_else(|| Error::Parse(format!("missing entry ({n}, {m})")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        DecrementMatrix::from_rows(rows)
    };
    Ok(DecrementMatrixPair::new(build(false)?, build(true)?))
}
