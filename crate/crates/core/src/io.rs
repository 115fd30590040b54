//! Text formats for matrices and point sets.
//!
//! Matrix file: header `q m k`, then `m` lines of `k` entries. Point-set file:
//! header `q n`, then one vector of `n` entries per line. `q` is written as
//! `p^s` for proper prime powers. Entries are integers in `[0, q)` under the
//! field's canonical encoding; `#` starts a comment.

use std::fmt::Write as _;

use crate::algebra::FqMatrix;
use crate::error::{Error, Result};
use crate::field::{Elem, FieldCtx, FqVector};
use crate::finder::PointSet;

fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let body = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn parse_q(tok: &str) -> Result<FieldCtx> {
    let bad = || Error::Parse(format!("bad field order {tok:?}"));
    let ctx = match tok.split_once('^') {
        Some((p, s)) => FieldCtx::new(p.parse().map_err(|_| bad())?, s.parse().map_err(|_| bad())?),
        None => FieldCtx::of_order(tok.parse().map_err(|_| bad())?),
    };
    ctx.map_err(|e| Error::Parse(format!("field order {tok:?}: {e}")))
}

fn parse_usize(tok: &str, what: &str) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse(format!("bad {what} {tok:?}")))
}

fn parse_row(ctx: &FieldCtx, line: usize, toks: &[&str], width: usize) -> Result<Vec<Elem>> {
    if toks.len() != width {
        return Err(Error::Parse(format!("line {line}: expected {width} entries, got {}", toks.len())));
    }
    toks.iter()
        .map(|t| {
            let v: u32 = t.parse().map_err(|_| Error::Parse(format!("line {line}: bad entry {t:?}")))?;
            if !ctx.is_valid(v) {
                return Err(Error::Parse(format!("line {line}: entry {v} not in [0, {})", ctx.q())));
            }
            Ok(v as Elem)
        })
        .collect()
}

pub fn parse_matrix(text: &str) -> Result<FqMatrix> {
    let mut it = lines(text);
    let (ln, head) = it.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    if head.len() != 3 {
        return Err(Error::Parse(format!("line {ln}: header must be `q m k`")));
    }
    let ctx = parse_q(head[0])?;
    let m = parse_usize(head[1], "row count")?;
    let k = parse_usize(head[2], "column count")?;
    let rows = it.map(|(ln, toks)| parse_row(&ctx, ln, &toks, k)).collect::<Result<Vec<_>>>()?;
    if rows.len() != m {
        return Err(Error::Parse(format!("expected {m} rows, got {}", rows.len())));
    }
    if m == 0 {
        return Ok(FqMatrix::zeros(&ctx, 0, k));
    }
    FqMatrix::from_rows(&ctx, &rows)
}

pub fn parse_points(text: &str) -> Result<PointSet> {
    let mut it = lines(text);
    let (ln, head) = it.next().ok_or_else(|| Error::Parse("empty point-set file".into()))?;
    if head.len() != 2 {
        return Err(Error::Parse(format!("line {ln}: header must be `q n`")));
    }
    let ctx = parse_q(head[0])?;
    let n = parse_usize(head[1], "dimension")?;
    let pts = it.map(|(ln, toks)| parse_row(&ctx, ln, &toks, n).map(FqVector)).collect::<Result<Vec<_>>>()?;
    PointSet::new(&ctx, n, pts).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_matrix(a: &FqMatrix) -> String {
    let mut out = format!("{} {} {}\n", a.ctx().label(), a.rows(), a.cols());
    for i in 0..a.rows() {
        let row: Vec<String> = a.row(i).iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn write_points(s: &PointSet) -> String {
    let mut out = format!("{} {}\n", s.ctx().label(), s.n());
    for id in 0..s.len() as u32 {
        let row: Vec<String> = s.point(id).iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let a = parse_matrix("# star\n5 2 5\n1 1 0 0 3\n0 0 1 1 3 # last row\n").unwrap();
        assert_eq!(a.get(1, 4), 3);
        assert_eq!(parse_matrix(&write_matrix(&a)).unwrap(), a);
        let b = parse_matrix("3^2 1 2\n8 1\n").unwrap();
        assert_eq!(b.ctx().q(), 9);
        assert!(write_matrix(&b).starts_with("3^2 1 2"));
    }

    #[test]
    fn malformed_matrices() {
        for bad in ["", "5 2", "6 1 1\n1\n", "5 1 2\n1\n", "5 1 2\n1 5\n", "5 2 1\n1\n", "5 1 1\nx\n"] {
            assert!(matches!(parse_matrix(bad), Err(Error::Parse(_))), "{bad:?}");
        }
    }

    #[test]
    fn point_sets() {
        let s = parse_points("3 2\n0 0\n1 2\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(parse_points(&write_points(&s)).unwrap().to_vectors(), s.to_vectors());
        assert!(parse_points("3 2\n0 0\n0 0\n").is_err());
        assert!(parse_points("3 2\n0 3\n").is_err());
    }
}
