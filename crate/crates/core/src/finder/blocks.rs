//! Systems with several irreducible blocks or zero columns.
//!
//! Shapes are assembled block by block on points not used so far. Generic
//! solutions put the first block in a coordinate hyperplane, fix enough
//! coordinates to separate its directions and solve the remaining blocks in
//! a parallel hyperplane.

use std::collections::HashMap;

use serde::Serialize;

use super::generic::{generic_exhaustive, generic_ids};
use super::pointset::PointSet;
use super::search::Constraints;
use super::shape::shape_ids;
use super::{exhaustive_first, find_generic, grow_shape, into_report, with_fallback, Found, Meter, Mode, SearchOptions, SearchReport, ThresholdInfo};
use crate::algebra::linearly_independent;
use crate::constants::{reducible_generic_threshold, reducible_shape_threshold, shape_threshold, thresholds, ThresholdKind, ThresholdParams};
use crate::error::{Error, Result};
use crate::field::{Elem, FqVector};
use crate::system::SystemMatrix;
use crate::witness::classify_tuple;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockMode {
    Shape,
    Generic,
}

/// An irreducible block, or a zero column when `sys` is `None`.
struct Part {
    columns: Vec<usize>,
    sys: Option<SystemMatrix>,
}

fn parts(sys: &SystemMatrix) -> Result<Vec<Part>> {
    let p = sys.profile();
    let mut out = Vec::new();
    for b in &p.blocks {
        out.push(Part { columns: b.columns.clone(), sys: Some(SystemMatrix::new(b.matrix(sys.ctx()))?) });
    }
    for &z in &p.zero_columns {
        out.push(Part { columns: vec![z], sys: None });
    }
    out.sort_by_key(|part| part.columns[0]);
    Ok(out)
}

fn part_threshold(part: &Part, n: usize, mode: BlockMode, opts: &SearchOptions) -> Result<u128> {
    let Some(b) = &part.sys else { return Ok(1) };
    let f = b.profile().core.applicable;
    let q = b.ctx().q() as u64;
    match mode {
        BlockMode::Shape => shape_threshold(q, b.k() as u32, n as u32, !f.a_i, opts.gamma_mode),
        BlockMode::Generic => {
            let params = ThresholdParams { q, k: b.k() as u32, n: n as u32, ell: b.classes().len() as u32, mode: opts.gamma_mode };
            thresholds(&params, ThresholdKind::Temperate(b.classes().within_class_pairs().len() as u64))
        }
    }
}

/// Combines the block thresholds from the last block backwards.
fn combined_threshold(parts: &[Part], n: usize, mode: BlockMode, opts: &SearchOptions, q: u64) -> Result<u128> {
    let mut acc: Option<u128> = None;
    for part in parts.iter().rev() {
        let own = part_threshold(part, n, mode, opts)?;
        acc = Some(match acc {
            None => own,
            Some(rest) => match mode {
                BlockMode::Shape => reducible_shape_threshold(own, part.columns.len() as u32, rest),
                BlockMode::Generic => reducible_generic_threshold(q, n as u32, own, part.columns.len() as u32, rest),
            },
        });
    }
    Ok(acc.unwrap_or(0))
}

fn check_applicable(sys: &SystemMatrix, mode: BlockMode) -> Result<()> {
    let p = sys.profile();
    if mode == BlockMode::Shape && !p.forced_equalities.is_empty() {
        return Err(Error::NotApplicable("the system forces two variables to be equal".into()));
    }
    for (i, b) in p.blocks.iter().enumerate() {
        let ok = match mode {
            BlockMode::Shape => b.applicable.moderate(),
            BlockMode::Generic => b.applicable.temperate(),
        };
        if !ok {
            return Err(Error::NotApplicable(format!("block {i} satisfies no applicable clause")));
        }
    }
    Ok(())
}

fn shape_blocks(sys: &SystemMatrix, parts: &[Part], s: &PointSet, opts: &SearchOptions, meter: &mut Meter, notes: &mut Vec<String>) -> Result<Option<Vec<u32>>> {
    let mut out = vec![0u32; sys.k()];
    let mut used = vec![false; s.len()];
    for (bi, part) in parts.iter().enumerate() {
        let ids = match &part.sys {
            None => match (0..s.len() as u32).find(|&i| !used[i as usize]) {
                Some(i) => vec![i],
                None => return Ok(None),
            },
            Some(b) => {
                let sub = s.filter(|i| !used[i as usize]);
                let mut inner = Vec::new();
                let (f, _) = shape_ids(b, &sub, opts, meter, &mut inner)?;
                notes.extend(inner.into_iter().map(|n| format!("block {bi}: {n}")));
                s.translate_from(&sub, &f.ids)
            }
        };
        for (&c, &i) in part.columns.iter().zip(&ids) {
            out[c] = i;
            used[i as usize] = true;
        }
    }
    Ok(Some(out))
}

fn solve_part(part: &Part, t: &PointSet, opts: &SearchOptions, meter: &mut Meter, notes: &mut Vec<String>) -> Result<Option<Vec<FqVector>>> {
    match &part.sys {
        None => Ok((!t.is_empty()).then(|| vec![t.vector(0)])),
        Some(b) => {
            let mut inner = Vec::new();
            let (f, _) = generic_ids(b, t, opts, meter, &mut inner)?;
            notes.extend(inner.into_iter().map(|n| format!("block at column {}: {n}", part.columns[0])));
            Ok(Some(t.vectors(&f.ids)))
        }
    }
}

/// The coordinate whose two most popular values are both as popular as
/// possible: `(i, first, second)`.
fn split_coordinate(t: &PointSet) -> Option<(usize, Elem, Elem)> {
    let mut best: Option<(usize, usize, Elem, Elem)> = None;
    for c in 0..t.n() {
        let mut counts: HashMap<Elem, usize> = HashMap::new();
        for id in 0..t.len() as u32 {
            *counts.entry(t.point(id)[c]).or_default() += 1;
        }
        let mut ranked: Vec<(Elem, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        if ranked.len() < 2 {
            continue;
        }
        let score = ranked[1].1;
        if best.is_none_or(|b| score > b.1) {
            best = Some((c, score, ranked[0].0, ranked[1].0));
        }
    }
    best.map(|(c, _, a, b)| (c, a, b))
}

fn generic_blocks(parts: &[Part], t: &PointSet, opts: &SearchOptions, meter: &mut Meter, notes: &mut Vec<String>) -> Result<Option<Vec<(usize, FqVector)>>> {
    let Some((first, rest)) = parts.split_first() else { return Ok(Some(Vec::new())) };
    let label = |x: Vec<FqVector>, part: &Part| -> Vec<(usize, FqVector)> { part.columns.iter().copied().zip(x).collect() };
    if rest.is_empty() {
        return Ok(solve_part(first, t, opts, meter, notes)?.map(|x| label(x, first)));
    }
    let Some((i, a1, a2)) = split_coordinate(t) else { return Ok(None) };
    let ctx = t.ctx();
    let t1 = t.filter(|id| t.point(id)[i] == a1);
    let Some(x) = solve_part(first, &t1, opts, meter, notes)? else { return Ok(None) };
    let mut rows = vec![vec![1 as Elem; x.len()]];
    let mut fixed = Vec::new();
    for c in (0..t.n()).filter(|&c| c != i) {
        let row: Vec<Elem> = x.iter().map(|v| v.0[c]).collect();
        rows.push(row);
        if linearly_independent(ctx, &rows) {
            fixed.push(c);
        } else {
            rows.pop();
        }
    }
    let t2 = t.filter(|id| t.point(id)[i] == a2);
    let mut counts: HashMap<Vec<Elem>, usize> = HashMap::new();
    for id in 0..t2.len() as u32 {
        let key: Vec<Elem> = fixed.iter().map(|&c| t2.point(id)[c]).collect();
        *counts.entry(key).or_default() += 1;
    }
    let Some(key) = counts.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))).map(|(k, _)| k) else {
        return Ok(None);
    };
    let t3 = t2.filter(|id| fixed.iter().zip(&key).all(|(&c, &v)| t2.point(id)[c] == v));
    let Some(mut tail) = generic_blocks(rest, &t3, opts, meter, notes)? else { return Ok(None) };
    let mut out = label(x, first);
    out.append(&mut tail);
    Ok(Some(out))
}

/// Solves a reducible system (or one with zero columns) block by block.
pub fn recombine_blocks(sys: &SystemMatrix, s: &PointSet, mode: BlockMode, opts: &SearchOptions) -> Result<SearchReport> {
    let mut meter = opts.meter();
    let mut notes = Vec::new();
    let inner = opts.with_override();
    let res = (|| -> Result<(Found, ThresholdInfo)> {
        check_applicable(sys, mode)?;
        let parts = parts(sys)?;
        let q = sys.ctx().q() as u64;
        let required = combined_threshold(&parts, s.n(), mode, opts, q)?;
        let th = ThresholdInfo::check(required, s.len(), opts.override_threshold)?;
        let seed = opts.budget.seed;
        let found = match mode {
            BlockMode::Shape => with_fallback(
                &mut meter,
                &mut notes,
                |m| {
                    let mut local = Vec::new();
                    let r = shape_blocks(sys, &parts, s, &inner, m, &mut local);
                    Ok(r?.map(|ids| Found { mode: Mode::Blocks, ids }))
                },
                |m| exhaustive_first(sys.matrix(), s, Constraints::distinct(), seed, m, &|_| true),
            )?,
            BlockMode::Generic => with_fallback(
                &mut meter,
                &mut notes,
                |m| {
                    let mut local = Vec::new();
                    let Some(cols) = generic_blocks(&parts, s, &inner, m, &mut local)? else { return Ok(None) };
                    let mut tuple = vec![FqVector::zero(s.n()); sys.k()];
                    for (c, v) in cols {
                        tuple[c] = v;
                    }
                    if !classify_tuple(sys.matrix(), &tuple)?.generic {
                        return Ok(None);
                    }
                    let ids = tuple.iter().map(|v| s.id_of(&v.0).expect("point of S")).collect();
                    Ok(Some(Found { mode: Mode::Blocks, ids }))
                },
                |m| generic_exhaustive(sys.matrix(), s, seed, m),
            )?,
        };
        Ok((found, th))
    })();
    let require: &[&'static str] = match mode {
        BlockMode::Shape => &["shape"],
        BlockMode::Generic => &["generic"],
    };
    into_report(sys.matrix(), s, res, require, meter.used(), notes)
}

fn is_single_block(sys: &SystemMatrix) -> bool {
    let p = sys.profile();
    p.zero_columns.is_empty() && p.core.irreducible
}

/// A shape for any system whose blocks all satisfy a shape clause.
pub fn find_shape_any(sys: &SystemMatrix, s: &PointSet, opts: &SearchOptions) -> Result<SearchReport> {
    if is_single_block(sys) {
        grow_shape(sys, s, opts)
    } else {
        recombine_blocks(sys, s, BlockMode::Shape, opts)
    }
}

/// A generic solution for any system whose blocks all satisfy a generic clause.
pub fn find_generic_any(sys: &SystemMatrix, s: &PointSet, opts: &SearchOptions) -> Result<SearchReport> {
    if is_single_block(sys) {
        find_generic(sys, s, opts)
    } else {
        recombine_blocks(sys, s, BlockMode::Generic, opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;
    use crate::finder::Outcome;

    fn sys(q: u64, rows: &[Vec<i64>]) -> SystemMatrix {
        SystemMatrix::from_i64_rows(&FieldCtx::of_order(q).unwrap(), rows).unwrap()
    }

    fn two_aps() -> SystemMatrix {
        sys(5, &[vec![1, 1, -2, 0, 0, 0], vec![0, 0, 0, 1, 1, -2]])
    }

    #[test]
    fn two_blocks_shape() {
        let a = two_aps();
        assert_eq!(a.profile().blocks.len(), 2);
        let s = PointSet::full_space(a.ctx(), 2).unwrap();
        let r = find_shape_any(&a, &s, &SearchOptions::default().with_override()).unwrap();
        assert_eq!(r.outcome, Outcome::Found);
        assert_eq!(r.mode, Some(Mode::Blocks));
        assert!(r.certificate.unwrap().flags.shape);
    }

    #[test]
    fn two_blocks_generic() {
        let a = two_aps();
        let s = PointSet::full_space(a.ctx(), 3).unwrap();
        let r = find_generic_any(&a, &s, &SearchOptions::default().with_override()).unwrap();
        assert_eq!(r.outcome, Outcome::Found);
        let c = r.certificate.unwrap();
        assert!(c.flags.generic);
        assert_eq!(c.affine_dim, 3);
    }

    #[test]
    fn zero_column_generic() {
        let a = sys(5, &[vec![1, 0, 1, -2]]);
        let s = PointSet::full_space(a.ctx(), 2).unwrap();
        let r = find_generic_any(&a, &s, &SearchOptions::default().with_override()).unwrap();
        assert_eq!(r.outcome, Outcome::Found);
        assert!(r.certificate.unwrap().flags.generic);
    }

    #[test]
    fn zero_column_shape() {
        let a = sys(5, &[vec![1, 0, 1, -2]]);
        let s = PointSet::full_space(a.ctx(), 1).unwrap();
        let r = find_shape_any(&a, &s, &SearchOptions::default().with_override()).unwrap();
        assert_eq!(r.outcome, Outcome::Found);
        assert!(r.certificate.unwrap().flags.shape);
    }

    #[test]
    fn threshold_combines_backwards() {
        let a = two_aps();
        let parts = parts(&a).unwrap();
        let opts = SearchOptions::default();
        let one = part_threshold(&parts[0], 2, BlockMode::Shape, &opts).unwrap();
        let both = combined_threshold(&parts, 2, BlockMode::Shape, &opts, 5).unwrap();
        assert_eq!(both, one + 3);
    }
}
