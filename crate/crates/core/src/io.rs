//! Plain-text file formats.
//!
//! Matrix files start with `p <dim>` followed by either
//!
//! ```text
//! dense
//! <p lines of p values>
//! ```
//!
//! or
//!
//! ```text
//! sparse <nnz>
//! <nnz lines "i j value", 0-based, upper triangle>
//! ```
//!
//! Dataset files start with `n <n> p <p>` followed by `n` lines of `p` values.
//! Floats are written with 17 significant digits so they round-trip exactly.
//! Blank lines and lines starting with `#` are ignored by the readers.

use std::fmt::Write as _;

use crate::data::Dataset;
use crate::error::{QuicError, Result};
use crate::matrix::SymMatrix;
use crate::solver::{SolverTrace, TraceRow};

pub const TRACE_HEADER: &str = "iter,f,delta,alpha,free_size,sweeps,backtracks,subgrad,seconds";

/// 17 significant digits, enough for any `f64` to round-trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_matrix_dense(m: &SymMatrix) -> String {
    let p = m.dim();
    let mut out = format!("p {p}\ndense\n");
    for i in 0..p {
        let line: Vec<String> = m.row(i).iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Upper-triangle triplets of the exact nonzeros.
pub fn write_matrix_sparse(m: &SymMatrix) -> String {
    let p = m.dim();
    let entries: Vec<(usize, usize, f64)> = (0..p)
        .flat_map(|i| (i..p).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, m.get(i, j)))
        .filter(|&(_, _, v)| v != 0.0)
        .collect();
    let mut out = format!("p {p}\nsparse {}\n", entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(out, "{i} {j} {}", fmt_f64(v));
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
        }
    }

    /// Next meaningful line with its 1-based number.
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        for (k, line) in self.inner.by_ref() {
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Some((k + 1, t));
            }
        }
        None
    }

    fn expect_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next_line().ok_or_else(|| QuicError::Parse {
            line: 0,
            msg: format!("unexpected end of input, expected {what}"),
        })
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> QuicError {
    QuicError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {tok:?}")))
}

fn parse_keyed(line: usize, text: &str, key: &str) -> Result<usize> {
    let mut toks = text.split_whitespace();
    match (toks.next(), toks.next(), toks.next()) {
        (Some(k), Some(v), None) if k == key => parse_num(line, v),
        _ => Err(parse_err(line, format!("expected \"{key} <integer>\""))),
    }
}

pub fn read_matrix(text: &str) -> Result<SymMatrix> {
    let mut lines = Lines::new(text);
    let (ln, header) = lines.expect_line("header")?;
    let p = parse_keyed(ln, header, "p")?;
    if p == 0 {
        return Err(parse_err(ln, "dimension must be positive"));
    }
    let (ln, kind) = lines.expect_line("storage kind")?;
    let m = if kind == "dense" {
        let mut data = Vec::with_capacity(p * p);
        for r in 0..p {
            let (ln, row) = lines.expect_line(&format!("dense row {r}"))?;
            let vals: Vec<f64> = row
                .split_whitespace()
                .map(|t| parse_num(ln, t))
                .collect::<Result<_>>()?;
            if vals.len() != p {
                return Err(parse_err(
                    ln,
                    format!("expected {p} values, found {}", vals.len()),
                ));
            }
            data.extend(vals);
        }
        SymMatrix::from_dense(p, data).map_err(|e| parse_err(ln, e.to_string()))?
    } else if kind.starts_with("sparse") {
        let nnz = parse_keyed(ln, kind, "sparse")?;
        let mut m = SymMatrix::zeros(p);
        for _ in 0..nnz {
            let (ln, entry) = lines.expect_line("sparse entry")?;
            let toks: Vec<&str> = entry.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(parse_err(ln, "expected \"i j value\""));
            }
            let i: usize = parse_num(ln, toks[0])?;
            let j: usize = parse_num(ln, toks[1])?;
            let v: f64 = parse_num(ln, toks[2])?;
            if i > j || j >= p {
                return Err(parse_err(
                    ln,
                    format!("entry ({i}, {j}) outside the upper triangle"),
                ));
            }
            m.set(i, j, v);
        }
        m
    } else {
        return Err(parse_err(ln, "expected \"dense\" or \"sparse <nnz>\""));
    };
    if let Some((ln, _)) = lines.next_line() {
        return Err(parse_err(ln, "trailing content"));
    }
    Ok(m)
}

pub fn write_dataset(d: &Dataset) -> String {
    let mut out = format!("n {} p {}\n", d.n(), d.p());
    for k in 0..d.n() {
        let line: Vec<String> = d.sample(k).iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_dataset(text: &str) -> Result<Dataset> {
    let mut lines = Lines::new(text);
    let (ln, header) = lines.expect_line("header")?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    let (n, p) = match toks.as_slice() {
        ["n", n, "p", p] => (parse_num::<usize>(ln, n)?, parse_num::<usize>(ln, p)?),
        _ => return Err(parse_err(ln, "expected \"n <n> p <p>\"")),
    };
    let mut y = Vec::with_capacity(n * p);
    for k in 0..n {
        let (ln, row) = lines.expect_line(&format!("sample {k}"))?;
        let before = y.len();
        for t in row.split_whitespace() {
            y.push(parse_num::<f64>(ln, t)?);
        }
        if y.len() - before != p {
            return Err(parse_err(ln, format!("expected {p} values")));
        }
    }
    if let Some((ln, _)) = lines.next_line() {
        return Err(parse_err(ln, "trailing content"));
    }
    Dataset::new(n, p, y)
}

pub fn write_trace_csv(trace: &SolverTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in &trace.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.iter,
            fmt_f64(r.f),
            fmt_f64(r.delta),
            fmt_f64(r.alpha),
            r.free_size,
            r.sweeps,
            r.backtracks,
            fmt_f64(r.subgrad),
            fmt_f64(r.seconds)
        );
    }
    out
}

/// Reads the rows of a trace CSV. The initial objective is not part of the
/// format and comes back as `NaN`.
pub fn read_trace_csv(text: &str) -> Result<SolverTrace> {
    let mut lines = Lines::new(text);
    let (ln, header) = lines.expect_line("header")?;
    if header != TRACE_HEADER {
        return Err(parse_err(ln, "unexpected trace header"));
    }
    let mut rows = Vec::new();
    while let Some((ln, line)) = lines.next_line() {
        let t: Vec<&str> = line.split(',').collect();
        if t.len() != 9 {
            return Err(parse_err(ln, "expected 9 columns"));
        }
        rows.push(TraceRow {
            iter: parse_num(ln, t[0])?,
            f: parse_num(ln, t[1])?,
            delta: parse_num(ln, t[2])?,
            alpha: parse_num(ln, t[3])?,
            free_size: parse_num(ln, t[4])?,
            sweeps: parse_num(ln, t[5])?,
            backtracks: parse_num(ln, t[6])?,
            subgrad: parse_num(ln, t[7])?,
            seconds: parse_num(ln, t[8])?,
        });
    }
    Ok(SolverTrace {
        f_initial: f64::NAN,
        subgrad_initial: f64::NAN,
        rows,
    })
}
