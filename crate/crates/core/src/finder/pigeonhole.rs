//! Pairs `x, y in S^k` with `sum b_j x_j = sum b_j y_j` exactly when `b` is
//! in the rowspace of `A`.
//!
//! With `A` in reduced form, `f(x) = A x` is determined by the free
//! coordinates once the image is fixed. Tuples are bucketed by image; inside
//! one bucket a partner is found whose free coordinates differ from the
//! anchor's by linearly independent vectors.

use std::collections::HashMap;

use serde::Serialize;

use super::pointset::PointSet;
use super::{Meter, SearchOptions, ThresholdInfo};
use crate::algebra::{rref, span_contains, FqMatrix, RrefResult};
use crate::constants::pigeonhole_threshold;
use crate::error::{Error, Result};
use crate::field::{Elem, FieldCtx, FqVector};
use crate::witness::linear_annihilator;

/// Largest `|S|^k` for which every bucket is counted.
const BUCKET_LIMIT: u64 = 1 << 21;
/// Largest `q^k` for which the pair is checked against every `b`.
const EXHAUSTIVE_CHECK: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PigeonholePair {
    pub x: Vec<FqVector>,
    pub y: Vec<FqVector>,
    /// `direct` (square system), `bucket` (largest image class) or `anchor`.
    pub mode: &'static str,
    pub thresholds: ThresholdInfo,
    /// Whether the iff was checked over all of `F_q^k`.
    pub exhaustive_check: bool,
    pub evaluations: u64,
}

struct Lift<'a> {
    ctx: FieldCtx,
    s: &'a PointSet,
    r: RrefResult,
    free: Vec<usize>,
}

impl<'a> Lift<'a> {
    /// `z = A x` for the reduced rows.
    fn image(&self, x: &[u32]) -> Vec<Elem> {
        let n = self.s.n();
        let mut z = vec![0; self.r.rank * n];
        for i in 0..self.r.rank {
            let row = self.r.rref.row(i);
            for (j, &c) in row.iter().enumerate() {
                if c != 0 {
                    self.ctx.axpy(&mut z[i * n..(i + 1) * n], c, self.s.point(x[j]));
                }
            }
        }
        z
    }

    /// Pivot entry `i` implied by image `z` and the free entries of `x`.
    fn pivot_value(&self, z: &[Elem], x: &[u32], i: usize) -> Vec<Elem> {
        let n = self.s.n();
        let mut v = z[i * n..(i + 1) * n].to_vec();
        let row = self.r.rref.row(i);
        for &f in &self.free {
            if row[f] != 0 && x[f] != u32::MAX {
                let negc = self.ctx.neg(row[f]);
                self.ctx.axpy(&mut v, negc, self.s.point(x[f]));
            }
        }
        v
    }

    /// Completes the free entries of `x` to a member of the bucket of `z`.
    fn complete(&self, z: &[Elem], x: &mut [u32]) -> bool {
        for (i, &p) in self.r.pivots.iter().enumerate() {
            match self.s.id_of(&self.pivot_value(z, x, i)) {
                Some(id) => x[p] = id,
                None => return false,
            }
        }
        true
    }
}

/// Depth-first search for a partner of `anchor` in its bucket.
struct Partner<'l, 'a> {
    lift: &'l Lift<'a>,
    anchor: &'l [u32],
    z: Vec<Elem>,
    x: Vec<u32>,
    basis: Vec<(usize, Vec<Elem>)>,
    /// Pivots whose free dependencies end at each depth.
    det_at: Vec<Vec<usize>>,
}

impl<'l, 'a> Partner<'l, 'a> {
    fn new(lift: &'l Lift<'a>, anchor: &'l [u32]) -> Self {
        let mut det_at = vec![Vec::new(); lift.free.len()];
        for i in 0..lift.r.rank {
            let row = lift.r.rref.row(i);
            if let Some(d) = lift.free.iter().rposition(|&f| row[f] != 0) {
                det_at[d].push(i);
            }
        }
        Partner { lift, anchor, z: lift.image(anchor), x: vec![u32::MAX; anchor.len()], basis: Vec::new(), det_at }
    }

    fn push_independent(&mut self, v: Vec<Elem>) -> bool {
        let ctx = &self.lift.ctx;
        let mut v = v;
        for (p, row) in &self.basis {
            let c = v[*p];
            if c != 0 {
                ctx.axpy(&mut v, ctx.neg(c), row);
            }
        }
        match v.iter().position(|&c| c != 0) {
            Some(p) => {
                let row = ctx.vec_scale(ctx.inv(v[p]), &v);
                self.basis.push((p, row));
                true
            }
            None => false,
        }
    }

    fn rec(&mut self, depth: usize, meter: &mut Meter) -> Result<bool> {
        let lift = self.lift;
        if depth == lift.free.len() {
            for (i, &p) in lift.r.pivots.iter().enumerate() {
                if lift.r.rref.row(i).iter().enumerate().all(|(j, &c)| c == 0 || j == p) {
                    match lift.s.id_of(&lift.pivot_value(&self.z, &self.x, i)) {
                        Some(id) => self.x[p] = id,
                        None => return Ok(false),
                    }
                }
            }
            return Ok(true);
        }
        let f = lift.free[depth];
        for id in 0..lift.s.len() as u32 {
            meter.charge(1)?;
            let d = lift.ctx.vec_sub(lift.s.point(id), lift.s.point(self.anchor[f]));
            let mark = self.basis.len();
            if !self.push_independent(d) {
                continue;
            }
            self.x[f] = id;
            let ok = self.det_at[depth].clone().into_iter().all(|i| {
                match lift.s.id_of(&lift.pivot_value(&self.z, &self.x, i)) {
                    Some(pid) => {
                        self.x[lift.r.pivots[i]] = pid;
                        true
                    }
                    None => false,
                }
            });
            if ok && self.rec(depth + 1, meter)? {
                return Ok(true);
            }
            self.x[f] = u32::MAX;
            self.basis.truncate(mark);
        }
        Ok(false)
    }
}

fn free_diffs_independent(lift: &Lift, x: &[u32], y: &[u32]) -> bool {
    let diffs: Vec<Vec<Elem>> =
        lift.free.iter().map(|&f| lift.ctx.vec_sub(lift.s.point(x[f]), lift.s.point(y[f]))).collect();
    crate::algebra::linearly_independent(&lift.ctx, &diffs)
}

/// Odometer over `S^d`.
fn next_tuple(t: &mut [u32], base: u32) -> bool {
    for c in t.iter_mut().rev() {
        *c += 1;
        if *c < base {
            return true;
        }
        *c = 0;
    }
    false
}

fn bucket_search(lift: &Lift, k: usize, meter: &mut Meter) -> Result<Option<(Vec<u32>, Vec<u32>)>> {
    let sz = lift.s.len() as u32;
    let mut counts: HashMap<Vec<Elem>, u64> = HashMap::new();
    let mut t = vec![0u32; k];
    loop {
        meter.charge(1)?;
        *counts.entry(lift.image(&t)).or_insert(0) += 1;
        if !next_tuple(&mut t, sz) {
            break;
        }
    }
    let best = counts.iter().map(|(z, &c)| (c, z)).max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(a.1)));
    let z = match best {
        Some((_, z)) => z.clone(),
        None => return Ok(None),
    };
    let d = lift.free.len();
    let mut members = Vec::new();
    let mut ft = vec![0u32; d];
    loop {
        meter.charge(1)?;
        let mut x = vec![u32::MAX; k];
        for (i, &f) in lift.free.iter().enumerate() {
            x[f] = ft[i];
        }
        if lift.complete(&z, &mut x) {
            members.push(x);
        }
        if !next_tuple(&mut ft, sz) {
            break;
        }
    }
    let Some(anchor) = members.first().cloned() else { return Ok(None) };
    for x in &members[1..] {
        meter.charge(1)?;
        if free_diffs_independent(lift, x, &anchor) {
            return Ok(Some((anchor, x.clone())));
        }
    }
    Ok(None)
}

fn anchor_search(lift: &Lift, k: usize, meter: &mut Meter) -> Result<Option<(Vec<u32>, Vec<u32>)>> {
    for a in 0..lift.s.len() as u32 {
        let anchor = vec![a; k];
        let mut p = Partner::new(lift, &anchor);
        if p.rec(0, meter)? {
            return Ok(Some((anchor.clone(), p.x)));
        }
    }
    Ok(None)
}

/// Checks the iff algebraically and, when `q^k` is small, over every `b`.
fn verify(a: &FqMatrix, r: &RrefResult, x: &[FqVector], y: &[FqVector]) -> Result<bool> {
    let ctx = a.ctx();
    let n = x[0].dim();
    let d: Vec<FqVector> = x.iter().zip(y).map(|(u, v)| FqVector(ctx.vec_sub(&u.0, &v.0))).collect();
    let rows: Vec<Vec<Elem>> = r.rref.to_rows().into_iter().take(r.rank).collect();
    if !a.annihilates(&d, n) || !span_contains(ctx, &rows, &linear_annihilator(ctx, &d)?, a.cols()) {
        return Err(Error::Internal("pigeonhole pair fails the rowspace test".into()));
    }
    let total = ctx.space_size(a.cols()).filter(|&t| t <= EXHAUSTIVE_CHECK);
    let Some(total) = total else { return Ok(false) };
    for idx in 0..total {
        let b = ctx.vec_from_index(a.cols(), idx)?;
        let same = ctx.combine(&b.0, x, n) == ctx.combine(&b.0, y, n);
        let in_row = r.reduce(&b.0).iter().all(|&c| c == 0);
        if same != in_row {
            return Err(Error::Internal(format!("pigeonhole pair fails for b = {:?}", b.0)));
        }
    }
    Ok(true)
}

pub(crate) fn pigeonhole_with(a: &FqMatrix, s: &PointSet, override_threshold: bool, meter: &mut Meter) -> Result<PigeonholePair> {
    let ctx = a.ctx();
    let k = a.cols();
    if ctx != s.ctx() {
        return Err(Error::InvalidArgument("matrix and set over different fields".into()));
    }
    let thresholds = ThresholdInfo::check(pigeonhole_threshold(ctx.q() as u64, k as u32, s.n() as u32), s.len(), override_threshold)?;
    if s.is_empty() {
        return Err(Error::Exhausted("empty set".into()));
    }
    let start = meter.used();
    let r = rref(a);
    let lift = Lift { ctx: ctx.clone(), s, free: r.free_columns(), r };
    let (mode, pair) = if lift.r.rank == k {
        ("direct", Some((vec![0u32; k], vec![0u32; k])))
    } else if (s.len() as u64).checked_pow(k as u32).is_some_and(|t| t <= BUCKET_LIMIT) {
        ("bucket", bucket_search(&lift, k, meter)?)
    } else {
        ("anchor", anchor_search(&lift, k, meter)?)
    };
    let (xi, yi) = pair.ok_or_else(|| Error::Exhausted("no pair with independent differences".into()))?;
    let x = s.vectors(&xi);
    let y = s.vectors(&yi);
    let exhaustive_check = verify(a, &lift.r, &x, &y)?;
    Ok(PigeonholePair { x, y, mode, thresholds, exhaustive_check, evaluations: meter.used() - start })
}

/// The pair of the matrix pigeonhole lemma, re-verified before returning.
pub fn pigeonhole_pair(a: &FqMatrix, s: &PointSet, opts: &SearchOptions) -> Result<PigeonholePair> {
    pigeonhole_with(a, s, opts.override_threshold, &mut opts.meter())
}
