//! Plain-text sparse LP dump for cross-checking against external solvers.
//!
//! One record per line, fields separated by single spaces:
//!
//! ```text
//! lp <num_vars> <num_rows>
//! offset <value>
//! var <tag> <lower> <upper> <objective>
//! row <tag> <le|eq|ge> <rhs> <var_index>:<coef> ...
//! ```
//!
//! `var` lines appear in index order, so the n-th `var` line is variable
//! `n - 1`; `row` lines likewise. Numbers use the shortest round-trip decimal
//! form, with `inf` / `-inf` for infinite bounds. Tags contain no whitespace.
//! Lines starting with `#` and blank lines are ignored. The objective sense is
//! always minimize.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{LinearProgram, LpError, Sense, VarId};

#[derive(Debug, Error)]
pub enum DumpError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Lp { line: usize, source: LpError },
}

fn sense_word(s: Sense) -> &'static str {
    match s {
        Sense::Le => "le",
        Sense::Eq => "eq",
        Sense::Ge => "ge",
    }
}

pub fn write_lp<W: Write>(lp: &LinearProgram, mut out: W) -> io::Result<()> {
    writeln!(out, "lp {} {}", lp.num_variables(), lp.num_constraints())?;
    writeln!(out, "offset {}", lp.objective_offset())?;
    for v in lp.variables() {
        writeln!(out, "var {} {} {} {}", v.tag, v.lower, v.upper, v.objective)?;
    }
    for r in lp.constraints() {
        write!(out, "row {} {} {}", r.tag, sense_word(r.sense), r.rhs)?;
        for &(v, a) in &r.terms {
            write!(out, " {}:{}", v.0, a)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_lp<R: BufRead>(input: R) -> Result<LinearProgram, DumpError> {
    let mut lp = LinearProgram::new();
    for (k, line) in input.lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| DumpError::Parse { line: line_no, message };
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`")));
        let fields: Vec<&str> = line.split(' ').collect();
        match fields[0] {
            "lp" => {}
            "offset" if fields.len() == 2 => lp.set_objective_offset(num(fields[1])?),
            "var" if fields.len() == 5 => {
                lp.add_variable(num(fields[2])?, num(fields[3])?, num(fields[4])?, fields[1])
                    .map_err(|source| DumpError::Lp { line: line_no, source })?;
            }
            "row" if fields.len() >= 4 => {
                let sense = match fields[2] {
                    "le" => Sense::Le,
                    "eq" => Sense::Eq,
                    "ge" => Sense::Ge,
                    other => return Err(err(format!("unknown sense `{other}`"))),
                };
                let mut terms = Vec::with_capacity(fields.len() - 4);
                for t in &fields[4..] {
                    let (idx, coef) =
                        t.split_once(':').ok_or_else(|| err(format!("bad term `{t}`")))?;
                    let idx: usize =
                        idx.parse().map_err(|_| err(format!("bad variable index `{idx}`")))?;
                    terms.push((VarId(idx), num(coef)?));
                }
                lp.add_constraint(terms, sense, num(fields[3])?, fields[1])
                    .map_err(|source| DumpError::Lp { line: line_no, source })?;
            }
            other => return Err(err(format!("unrecognized record `{other}`"))),
        }
    }
    Ok(lp)
}
