//! Collisions `alpha x_i + beta y_i = alpha x_{i'} + beta y_{i''}` in lists
//! of disjoint solutions, and the recombinations they produce.
//!
//! Collisions are counted exactly with one hash join per anchor `i`.
//! Indices in this module are 0-based.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::Meter;
use crate::algebra::span_contains;
use crate::error::{Error, Result};
use crate::field::{Elem, FieldCtx, FqVector};
use crate::system::{breaks_pair, SystemMatrix};
use crate::witness::ann_bal;

/// An anchor `i` with its colliding pairs `(i', i'')`, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Collision {
    pub anchor: usize,
    pub pairs: Vec<(usize, usize)>,
}

pub(crate) struct CollisionTable {
    ctx: FieldCtx,
    ax: Vec<Vec<Elem>>,
    by: Vec<Vec<Elem>>,
    index: HashMap<Vec<Elem>, usize>,
}

impl CollisionTable {
    pub(crate) fn new(ctx: &FieldCtx, xs: &[&[Elem]], ys: &[&[Elem]], alpha: Elem, beta: Elem) -> Result<Self> {
        if alpha == 0 || beta == 0 {
            return Err(Error::InvalidArgument("collision scalars must be nonzero".into()));
        }
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
        }
        for (name, v) in [("xs", xs), ("ys", ys)] {
            let mut seen = HashSet::new();
            if !v.iter().all(|x| seen.insert(*x)) {
                return Err(Error::DegenerateList(format!("repeated entry in {name}")));
            }
        }
        let ax: Vec<Vec<Elem>> = xs.iter().map(|x| ctx.vec_scale(alpha, x)).collect();
        let by: Vec<Vec<Elem>> = ys.iter().map(|y| ctx.vec_scale(beta, y)).collect();
        let index = ax.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        Ok(CollisionTable { ctx: ctx.clone(), ax, by, index })
    }

    pub(crate) fn len(&self) -> usize {
        self.ax.len()
    }

    /// All `(i', i'')` with `i not in {i', i''}` colliding with anchor `i`.
    pub(crate) fn pairs(&self, i: usize) -> Vec<(usize, usize)> {
        let z = self.ctx.vec_add(&self.ax[i], &self.by[i]);
        let mut out = Vec::new();
        for (i2, b) in self.by.iter().enumerate() {
            if i2 == i {
                continue;
            }
            if let Some(&i1) = self.index.get(&self.ctx.vec_sub(&z, b)) {
                if i1 != i {
                    out.push((i1, i2));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// The smallest anchor with at least `t` colliding pairs, and all its pairs.
pub fn find_collision(
    ctx: &FieldCtx,
    xs: &[FqVector],
    ys: &[FqVector],
    alpha: Elem,
    beta: Elem,
    t: usize,
) -> Result<Collision> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be at least 1".into()));
    }
    let xr: Vec<&[Elem]> = xs.iter().map(|v| v.coords()).collect();
    let yr: Vec<&[Elem]> = ys.iter().map(|v| v.coords()).collect();
    let table = CollisionTable::new(ctx, &xr, &yr, alpha, beta)?;
    (0..table.len())
        .map(|i| Collision { anchor: i, pairs: table.pairs(i) })
        .find(|c| c.pairs.len() >= t)
        .ok_or(Error::NoneFound)
}

/// A solution obtained from anchor `i` by taking entry `j1` from solution
/// `from_j1` and entry `j2` from solution `from_j2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Recombination {
    pub anchor: usize,
    pub from_j1: usize,
    pub from_j2: usize,
    pub tuple: Vec<FqVector>,
}

/// Checks the shape of `list`: nonempty, width `k`, solutions, pairwise disjoint.
pub(crate) fn check_list(sys: &SystemMatrix, list: &[Vec<FqVector>]) -> Result<()> {
    let first = list.first().ok_or_else(|| Error::DegenerateList("empty list".into()))?;
    let n = first.first().ok_or(Error::EmptyTuple)?.dim();
    let mut owner: HashMap<&FqVector, usize> = HashMap::new();
    for (i, t) in list.iter().enumerate() {
        if t.len() != sys.k() {
            return Err(Error::DimensionMismatch { expected: sys.k(), got: t.len() });
        }
        if t.iter().any(|x| x.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: t.iter().map(|x| x.dim()).find(|&d| d != n).unwrap() });
        }
        if !sys.matrix().annihilates(t, n) {
            return Err(Error::DegenerateList(format!("entry {i} is not a solution")));
        }
        for x in t {
            if let Some(&o) = owner.get(x) {
                if o != i {
                    return Err(Error::DegenerateList(format!("entries {o} and {i} share the point {:?}", x.0)));
                }
            }
            owner.insert(x, i);
        }
    }
    Ok(())
}

fn table_for(sys: &SystemMatrix, list: &[Vec<FqVector>], j1: usize, j2: usize) -> Result<(CollisionTable, Elem, Elem)> {
    let (alpha, beta) = sys.classes().pair_scalars(j1, j2)?;
    let xs: Vec<&[Elem]> = list.iter().map(|t| t[j1].coords()).collect();
    let ys: Vec<&[Elem]> = list.iter().map(|t| t[j2].coords()).collect();
    Ok((CollisionTable::new(sys.ctx(), &xs, &ys, alpha, beta)?, alpha, beta))
}

/// Builds the recombination and checks it is a solution with the same
/// contribution `alpha y_j1 + beta y_j2` as the anchor.
fn build(
    sys: &SystemMatrix,
    list: &[Vec<FqVector>],
    (j1, j2): (usize, usize),
    (alpha, beta): (Elem, Elem),
    anchor: usize,
    (i1, i2): (usize, usize),
) -> Result<Recombination> {
    let ctx = sys.ctx();
    let mut y = list[anchor].clone();
    y[j1] = list[i1][j1].clone();
    y[j2] = list[i2][j2].clone();
    let contrib = |t: &[FqVector]| ctx.vec_add(&ctx.vec_scale(alpha, &t[j1].0), &ctx.vec_scale(beta, &t[j2].0));
    if contrib(&y) != contrib(&list[anchor]) {
        return Err(Error::Internal("recombination changed the class contribution".into()));
    }
    if !sys.matrix().annihilates(&y, y[0].dim()) {
        return Err(Error::Internal("recombination is not a solution".into()));
    }
    Ok(Recombination { anchor, from_j1: i1, from_j2: i2, tuple: y })
}

/// One recombination on the equivalent columns `j1`, `j2`.
pub fn replace_single(sys: &SystemMatrix, list: &[Vec<FqVector>], j1: usize, j2: usize) -> Result<Recombination> {
    Ok(replace_multiple(sys, list, j1, j2, 1)?.remove(0))
}

/// `t` recombinations sharing the smallest anchor that admits `t` collisions.
pub fn replace_multiple(
    sys: &SystemMatrix,
    list: &[Vec<FqVector>],
    j1: usize,
    j2: usize,
    t: usize,
) -> Result<Vec<Recombination>> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be at least 1".into()));
    }
    check_list(sys, list)?;
    let (table, alpha, beta) = table_for(sys, list, j1, j2)?;
    for i in 0..table.len() {
        let pairs = table.pairs(i);
        if pairs.len() >= t {
            return pairs[..t].iter().map(|&p| build(sys, list, (j1, j2), (alpha, beta), i, p)).collect();
        }
    }
    Err(Error::NoneFound)
}

/// Walks every recombination on `(j1, j2)` in anchor then pair order and
/// returns the first one accepted. Each candidate costs one evaluation.
pub(crate) fn first_recombination(
    sys: &SystemMatrix,
    list: &[Vec<FqVector>],
    j1: usize,
    j2: usize,
    meter: &mut Meter,
    accept: &mut dyn FnMut(&Recombination) -> Result<bool>,
) -> Result<Option<Recombination>> {
    let (table, alpha, beta) = table_for(sys, list, j1, j2)?;
    for i in 0..table.len() {
        meter.charge(1)?;
        for p in table.pairs(i) {
            meter.charge(1)?;
            let r = build(sys, list, (j1, j2), (alpha, beta), i, p)?;
            if accept(&r)? {
                return Ok(Some(r));
            }
        }
    }
    Ok(None)
}

/// Whether no balanced annihilator of `y` breaks `(j1, j2)` and
/// `Ann_bal(y)` lies inside `Ann_bal(anchor)`.
pub(crate) fn eliminates(sys: &SystemMatrix, anchor: &[FqVector], y: &[FqVector], j1: usize, j2: usize) -> Result<bool> {
    let ctx = sys.ctx();
    let ann_y = ann_bal(ctx, y)?;
    for b in &ann_y {
        if breaks_pair(sys.classes(), ctx, b, j1, j2)? {
            return Ok(false);
        }
    }
    Ok(span_contains(ctx, &ann_bal(ctx, anchor)?, &ann_y, sys.k()))
}

pub(crate) fn eliminate_with(
    sys: &SystemMatrix,
    list: &[Vec<FqVector>],
    j1: usize,
    j2: usize,
    meter: &mut Meter,
) -> Result<Option<Recombination>> {
    first_recombination(sys, list, j1, j2, meter, &mut |r| eliminates(sys, &list[r.anchor], &r.tuple, j1, j2))
}

/// The first recombination on `(j1, j2)` none of whose balanced annihilators
/// breaks the pair, with `Ann_bal(y) ⊆ Ann_bal(x^(i))`.
pub fn eliminate_breaking_pair(sys: &SystemMatrix, list: &[Vec<FqVector>], j1: usize, j2: usize) -> Result<Recombination> {
    check_list(sys, list)?;
    eliminate_with(sys, list, j1, j2, &mut Meter::new(u64::MAX))?.ok_or(Error::NoneFound)
}
