//! Generic solutions and solutions of high affine dimension for irreducible
//! systems of type (RC).
//!
//! Within-class pairs are handled one at a time in lexicographic order. For
//! pair `t` the search harvests disjoint solutions that already settle pairs
//! `1..t` and recombines two of them on pair `t` so that no balanced
//! annihilator breaks it, while the annihilator only shrinks.

use super::pigeonhole::pigeonhole_with;
use super::pointset::PointSet;
use super::replace::eliminate_with;
use super::search::{Constraints, Independence};
use super::{exhaustive_first, into_report, with_fallback, Found, Meter, Mode, SearchOptions, SearchReport, ThresholdInfo};
use crate::algebra::{affine_dim, kernel_basis, rank, span_contains, FqMatrix};
use crate::constants::{thresholds, ThresholdKind, ThresholdParams};
use crate::error::{Error, Result};
use crate::field::{Elem, FqVector};
use crate::system::{breaks_pair, preserves_classes, SystemMatrix};
use crate::witness::ann_bal;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Base {
    /// Every class sums to zero: pigeonhole pair on the representative columns.
    Pigeonhole,
    /// `l = m + 1`: the constant solution.
    Constant,
}

/// Whether every balanced annihilator of `t` that preserves the classes lies
/// in the rowspace of `A`.
pub(crate) fn class_preserving_in_rowspace(sys: &SystemMatrix, t: &[FqVector]) -> Result<bool> {
    let ctx = sys.ctx();
    let cl = sys.classes();
    let n = t[0].dim();
    let k = sys.k();
    // Column r of `m` is (sum of scalars, sum of scalar * entry) for class r.
    let mut cols = Vec::with_capacity(cl.len());
    for c in &cl.classes {
        let sigma = c.scalars.iter().fold(0, |s, &a| ctx.add(s, a));
        let mut w = vec![0; n];
        for (&j, &a) in c.members.iter().zip(&c.scalars) {
            ctx.axpy(&mut w, a, &t[j].0);
        }
        let mut col = vec![sigma];
        col.extend(w);
        cols.push(FqVector(col));
    }
    let m = FqMatrix::from_columns(ctx, n + 1, &cols)?;
    let rows: Vec<Vec<Elem>> = sys.reduced().to_rows().into_iter().take(sys.rank()).collect();
    let mut lifted = Vec::new();
    for c in kernel_basis(&m) {
        let mut b = vec![0; k];
        for (r, class) in cl.classes.iter().enumerate() {
            for (&j, &a) in class.members.iter().zip(&class.scalars) {
                b[j] = ctx.mul(c.0[r], a);
            }
        }
        lifted.push(b);
    }
    Ok(span_contains(ctx, &rows, &lifted, k))
}

struct Claims<'a> {
    sys: &'a SystemMatrix,
    s: &'a PointSet,
    pairs: Vec<(usize, usize)>,
    base: Option<Base>,
    reps: Vec<usize>,
}

impl<'a> Claims<'a> {
    fn ids(&self, t: &[FqVector]) -> Vec<u32> {
        t.iter().map(|x| self.s.id_of(&x.0).expect("point of S")).collect()
    }

    fn base(&self, alive: &[bool], meter: &mut Meter) -> Result<Option<Vec<u32>>> {
        let k = self.sys.k();
        let y: Vec<FqVector> = match self.base {
            Some(Base::Pigeonhole) => {
                let sub = self.s.filter(|i| alive[i as usize]);
                let b = self.sys.matrix().select_columns(&self.reps);
                let pair = match pigeonhole_with(&b, &sub, true, meter) {
                    Ok(p) => p,
                    Err(Error::Exhausted(_)) => return Ok(None),
                    Err(e) => return Err(e),
                };
                let cl = self.sys.classes();
                (0..k)
                    .map(|j| {
                        let r = cl.class_of(j).expect("nondegenerate");
                        if self.reps[r] == j {
                            pair.x[r].clone()
                        } else {
                            pair.y[r].clone()
                        }
                    })
                    .collect()
            }
            _ => match (0..self.s.len() as u32).find(|&i| alive[i as usize]) {
                Some(a) => vec![self.s.vector(a); k],
                None => return Ok(None),
            },
        };
        if !self.sys.matrix().annihilates(&y, self.s.n()) {
            return Err(Error::Internal("base tuple is not a solution".into()));
        }
        if self.base.is_some() && !class_preserving_in_rowspace(self.sys, &y)? {
            return Err(Error::Internal("base tuple has a class-preserving annihilator outside the rowspace".into()));
        }
        Ok(Some(self.ids(&y)))
    }

    fn settles(&self, t: &[FqVector], (j1, j2): (usize, usize)) -> Result<bool> {
        let ctx = self.sys.ctx();
        for b in ann_bal(ctx, t)? {
            if breaks_pair(self.sys.classes(), ctx, &b, j1, j2)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// A solution settling the first `t` pairs.
    fn claim(&self, t: usize, alive: &[bool], meter: &mut Meter) -> Result<Option<Vec<u32>>> {
        if t == 0 {
            return self.base(alive, meter);
        }
        let pair = self.pairs[t - 1];
        let mut local = alive.to_vec();
        let mut list: Vec<Vec<FqVector>> = Vec::new();
        loop {
            let Some(x) = self.claim(t - 1, &local, meter)? else { return Ok(None) };
            meter.charge(1)?;
            let xv = self.s.vectors(&x);
            if self.settles(&xv, pair)? {
                return Ok(Some(x));
            }
            for &i in &x {
                local[i as usize] = false;
            }
            list.push(xv);
            if list.len() >= 2 {
                if let Some(r) = eliminate_with(self.sys, &list, pair.0, pair.1, meter)? {
                    return Ok(Some(self.ids(&r.tuple)));
                }
            }
        }
    }
}

fn situation(sys: &SystemMatrix) -> Result<()> {
    let p = sys.profile();
    if !p.zero_columns.is_empty() || !p.core.irreducible || !p.core.type_rc {
        return Err(Error::NotApplicable("system is not an irreducible system of type (RC) without zero columns".into()));
    }
    Ok(())
}

fn params(sys: &SystemMatrix, s: &PointSet, opts: &SearchOptions) -> ThresholdParams {
    ThresholdParams {
        q: sys.ctx().q() as u64,
        k: sys.k() as u32,
        n: s.n() as u32,
        ell: sys.classes().len() as u32,
        mode: opts.gamma_mode,
    }
}

/// Accepts tuples whose affine dimension is exactly `k - rank - 1`.
pub(crate) fn generic_by_dimension(a: &FqMatrix, s: &PointSet, t: &[u32]) -> bool {
    let target = (a.cols() - rank(a)).checked_sub(1);
    target.is_some_and(|d| affine_dim(a.ctx(), &s.vectors(t)).map(|x| x == d).unwrap_or(false))
}

/// Exhaustive generic search, with the free entries affinely independent.
pub(crate) fn generic_exhaustive(a: &FqMatrix, s: &PointSet, seed: u64, meter: &mut Meter) -> Result<Option<Vec<u32>>> {
    let k = a.cols();
    let r = rank(a);
    if r == k || k - r - 1 > s.n() {
        return Ok(None);
    }
    let cons = Constraints { independence: Independence::Affine, ..Default::default() };
    exhaustive_first(a, s, cons, seed, meter, &|t| generic_by_dimension(a, s, t))
}

pub(crate) fn generic_ids(sys: &SystemMatrix, s: &PointSet, opts: &SearchOptions, meter: &mut Meter, notes: &mut Vec<String>) -> Result<(Found, ThresholdInfo)> {
    situation(sys)?;
    let f = sys.profile().core.applicable;
    let base = if f.b_ii {
        Base::Pigeonhole
    } else if f.b_i {
        Base::Constant
    } else {
        return Err(Error::NotApplicable("neither generic clause holds for this system".into()));
    };
    let pairs = sys.classes().within_class_pairs();
    let required = thresholds(&params(sys, s, opts), ThresholdKind::Temperate(pairs.len() as u64))?;
    let th = ThresholdInfo::check(required, s.len(), opts.override_threshold)?;
    let need = sys.k() - sys.rank() - 1;
    if need > s.n() {
        return Err(Error::Exhausted(format!("generic solutions span dimension {need} > n = {}", s.n())));
    }
    let claims = Claims { sys, s, pairs, base: Some(base), reps: sys.classes().classes.iter().map(|c| c.members[0]).collect() };
    let alive = vec![true; s.len()];
    let found = with_fallback(
        meter,
        notes,
        |m| {
            let x = claims.claim(claims.pairs.len(), &alive, m)?;
            Ok(x.filter(|t| generic_by_dimension(sys.matrix(), s, t)).map(|ids| Found { mode: Mode::Induction, ids }))
        },
        |m| generic_exhaustive(sys.matrix(), s, opts.budget.seed, m),
    )?;
    Ok((found, th))
}

/// A generic solution in `S` for a system satisfying a generic clause.
pub fn find_generic(sys: &SystemMatrix, s: &PointSet, opts: &SearchOptions) -> Result<SearchReport> {
    let mut meter = opts.meter();
    let mut notes = Vec::new();
    let res = generic_ids(sys, s, opts, &mut meter, &mut notes);
    into_report(sys.matrix(), s, res, &["generic"], meter.used(), notes)
}

/// `min(k - l, k - 2)`.
pub fn high_rank_bound(k: usize, ell: usize) -> usize {
    k.saturating_sub(ell).min(k.saturating_sub(2))
}

fn high_rank_ok(sys: &SystemMatrix, s: &PointSet, t: &[u32]) -> bool {
    let v = s.vectors(t);
    let ctx = sys.ctx();
    let dim_ok = affine_dim(ctx, &v).is_ok_and(|d| d >= high_rank_bound(sys.k(), sys.classes().len()));
    dim_ok && ann_bal(ctx, &v).is_ok_and(|ann| ann.iter().all(|b| preserves_classes(sys.classes(), ctx, b)))
}

/// A solution whose balanced annihilators all preserve the column classes,
/// so that `dim aff >= min(k - l, k - 2)`.
pub fn find_high_rank(sys: &SystemMatrix, s: &PointSet, opts: &SearchOptions) -> Result<SearchReport> {
    let mut meter = opts.meter();
    let mut notes = Vec::new();
    let res = (|| {
        situation(sys)?;
        if sys.profile().core.applicable.b_ii {
            notes.push("every class sums to zero; generic pipeline".into());
            return generic_ids(sys, s, opts, &mut meter, &mut notes);
        }
        let pairs = sys.classes().within_class_pairs();
        let required = thresholds(&params(sys, s, opts), ThresholdKind::Rank(pairs.len() as u64))?;
        let th = ThresholdInfo::check(required, s.len(), opts.override_threshold)?;
        let bound = high_rank_bound(sys.k(), sys.classes().len());
        if bound > s.n() {
            return Err(Error::Exhausted(format!("no tuple in F_q^{} has dimension {bound}", s.n())));
        }
        let claims = Claims { sys, s, pairs, base: None, reps: Vec::new() };
        let alive = vec![true; s.len()];
        let found = with_fallback(
            &mut meter,
            &mut notes,
            |m| {
                let x = claims.claim(claims.pairs.len(), &alive, m)?;
                Ok(x.filter(|t| high_rank_ok(sys, s, t)).map(|ids| Found { mode: Mode::Induction, ids }))
            },
            |m| exhaustive_first(sys.matrix(), s, Constraints::default(), opts.budget.seed, m, &|t| high_rank_ok(sys, s, t)),
        )?;
        Ok((found, th))
    })();
    let mut report = into_report(sys.matrix(), s, res, &[], meter.used(), notes)?;
    if let Some(cert) = &report.certificate {
        let bound = high_rank_bound(sys.k(), sys.classes().len());
        if cert.affine_dim < bound {
            return Err(Error::Internal("high-rank witness below the dimension bound".into()));
        }
        report.notes.push(format!("dim aff {} >= {}", cert.affine_dim, bound));
    }
    Ok(report)
}
