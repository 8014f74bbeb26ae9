//! Plain-text code description.
//!
//! ```text
//! stbc <name> <Nt> <T> <K>
//! <K blocks of Nt lines, each with T tokens `re+imi`>
//! ```
//!
//! Floats are written with Rust's shortest round-trip formatting, so an
//! emitted code parses back to bit-identical weight matrices. Blank lines and
//! lines starting with `#` are ignored by the parser.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::ComplexGrid;

use super::LinearStbc;

fn emit_entry(out: &mut String, z: Complex64) {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    let _ = write!(out, "{}{}{}i", z.re, sign, z.im.abs());
}

pub fn emit_code(code: &LinearStbc) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "stbc {} {} {} {}",
        code.name(),
        code.n_tx(),
        code.n_slots(),
        code.k()
    );
    for w in code.weights() {
        let g = w.grid();
        for r in 0..g.rows() {
            for c in 0..g.cols() {
                if c > 0 {
                    out.push(' ');
                }
                emit_entry(&mut out, g[(r, c)]);
            }
            out.push('\n');
        }
    }
    out
}

fn parse_entry(tok: &str) -> Option<Complex64> {
    let body = tok.strip_suffix('i')?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&p| matches!(bytes[p], b'+' | b'-') && !matches!(bytes[p - 1], b'e' | b'E'))?;
    let re: f64 = body[..split].parse().ok()?;
    let im: f64 = body[split..].parse().ok()?;
    Some(Complex64::new(re, im))
}

fn usize_field(s: Option<&str>, what: &str, line: usize) -> Result<usize> {
    let err = |msg: String| Error::Parse { block: None, line, msg };
    let s = s.ok_or_else(|| err(format!("header missing {what}")))?;
    s.parse()
        .map_err(|_| err(format!("header field {what} is not an integer: {s:?}")))
}

/// Parses a code description. Codes with `T != Nt` load as min-delay exempt.
pub fn parse_code(text: &str) -> Result<LinearStbc> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(Error::Parse {
        block: None,
        line: 0,
        msg: "empty code description".into(),
    })?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("stbc") {
        return Err(Error::Parse {
            block: None,
            line: hline,
            msg: "header must start with `stbc`".into(),
        });
    }
    let name = fields.next().ok_or(Error::Parse {
        block: None,
        line: hline,
        msg: "header missing name".into(),
    })?;
    let n_tx = usize_field(fields.next(), "Nt", hline)?;
    let n_slots = usize_field(fields.next(), "T", hline)?;
    let k = usize_field(fields.next(), "K", hline)?;
    if fields.next().is_some() {
        return Err(Error::Parse {
            block: None,
            line: hline,
            msg: "trailing tokens in header".into(),
        });
    }
    if n_tx == 0 || n_slots == 0 || k == 0 {
        return Err(Error::Parse {
            block: None,
            line: hline,
            msg: "Nt, T and K must be positive".into(),
        });
    }

    let mut grids = Vec::with_capacity(k);
    for b in 0..k {
        let mut entries = Vec::with_capacity(n_tx * n_slots);
        for r in 0..n_tx {
            let (lno, line) = lines.next().ok_or(Error::Parse {
                block: Some(b + 1),
                line: hline,
                msg: format!("unexpected end of input, block has {r} of {n_tx} rows"),
            })?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != n_slots {
                return Err(Error::Parse {
                    block: Some(b + 1),
                    line: lno,
                    msg: format!("expected {n_slots} entries, found {}", toks.len()),
                });
            }
            for tok in toks {
                let z = parse_entry(tok).ok_or_else(|| Error::Parse {
                    block: Some(b + 1),
                    line: lno,
                    msg: format!("bad complex token {tok:?}"),
                })?;
                entries.push(z);
            }
        }
        let grid = ComplexGrid::from_rows(n_tx, n_slots, entries).map_err(|e| Error::Parse {
            block: Some(b + 1),
            line: hline,
            msg: e.to_string(),
        })?;
        grids.push(grid);
    }
    if let Some((lno, _)) = lines.next() {
        return Err(Error::Parse {
            block: None,
            line: lno,
            msg: format!("content after the {k} declared blocks"),
        });
    }
    LinearStbc::new_exempt(name, n_tx, n_slots, grids)
}
