//! Shapes for irreducible systems of type (RC) by induction on the number of
//! distinct entries.
//!
//! Round `lambda` harvests disjoint solutions with `lambda - 1` distinct
//! entries, groups them by equality pattern and recombines two members of
//! one group on a pair of equivalent columns so that one more entry becomes
//! distinct. Clause (ii) systems start from a pigeonhole pair on the
//! representative columns, which keeps both entries of every zero-sum class
//! of size 2 apart.

use std::collections::BTreeSet;

use super::pigeonhole::pigeonhole_with;
use super::pointset::PointSet;
use super::replace::first_recombination;
use super::search::Constraints;
use super::{distinct_ids, exhaustive_first, into_report, with_fallback, Found, Meter, Mode, SearchOptions, SearchReport, ThresholdInfo};
use crate::constants::shape_threshold;
use crate::error::{Error, Result};
use crate::field::FqVector;
use crate::system::SystemMatrix;
use crate::witness::{distinct_count, partition_pattern};

struct Grower<'a> {
    sys: &'a SystemMatrix,
    s: &'a PointSet,
    clause_ii: bool,
    /// Zero-sum classes of size 2.
    zero_pairs: Vec<(usize, usize)>,
    reps: Vec<usize>,
}

impl<'a> Grower<'a> {
    fn new(sys: &'a SystemMatrix, s: &'a PointSet, clause_ii: bool) -> Self {
        let cl = sys.classes();
        let zero_pairs = cl
            .classes
            .iter()
            .filter(|c| c.size() == 2 && c.sums_to_zero)
            .map(|c| (c.members[0], c.members[1]))
            .collect();
        let reps = cl.classes.iter().map(|c| c.members[0]).collect();
        Grower { sys, s, clause_ii, zero_pairs, reps }
    }

    fn keeps_pairs_apart(&self, t: &[FqVector]) -> bool {
        self.zero_pairs.iter().all(|&(a, b)| t[a] != t[b])
    }

    fn ids(&self, t: &[FqVector]) -> Vec<u32> {
        t.iter().map(|x| self.s.id_of(&x.0).expect("point of S")).collect()
    }

    fn base(&self, alive: &[bool], meter: &mut Meter) -> Result<Option<Vec<u32>>> {
        let k = self.sys.k();
        if !self.clause_ii || self.zero_pairs.is_empty() {
            return Ok((0..self.s.len() as u32).find(|&i| alive[i as usize]).map(|a| vec![a; k]));
        }
        let sub = self.s.filter(|i| alive[i as usize]);
        let b = self.sys.matrix().select_columns(&self.reps);
        let pair = match pigeonhole_with(&b, &sub, true, meter) {
            Ok(p) => p,
            Err(Error::Exhausted(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let cl = self.sys.classes();
        let y: Vec<FqVector> = (0..k)
            .map(|j| {
                let r = cl.class_of(j).expect("nondegenerate");
                if self.reps[r] == j {
                    pair.x[r].clone()
                } else {
                    pair.y[r].clone()
                }
            })
            .collect();
        if !self.sys.matrix().annihilates(&y, self.s.n()) || !self.keeps_pairs_apart(&y) {
            return Err(Error::Internal("pigeonhole base is not a valid start solution".into()));
        }
        Ok(Some(self.ids(&y)))
    }

    /// A solution in the alive points with at least `lambda` distinct entries.
    fn grow(&self, lambda: usize, alive: &[bool], meter: &mut Meter) -> Result<Option<Vec<u32>>> {
        if lambda <= 1 {
            return self.base(alive, meter);
        }
        let mut local = alive.to_vec();
        let mut groups: Vec<(Vec<usize>, Vec<Vec<u32>>)> = Vec::new();
        loop {
            let Some(x) = self.grow(lambda - 1, &local, meter)? else { return Ok(None) };
            meter.charge(1)?;
            if distinct_ids(&x) >= lambda {
                return Ok(Some(x));
            }
            for &i in &x {
                local[i as usize] = false;
            }
            let labels = partition_pattern(&self.s.vectors(&x)).labels();
            let g = match groups.iter().position(|(l, _)| *l == labels) {
                Some(g) => g,
                None => {
                    groups.push((labels, Vec::new()));
                    groups.len() - 1
                }
            };
            groups[g].1.push(x);
            if groups[g].1.len() >= 2 {
                if let Some(y) = self.raise(&groups[g].0, &groups[g].1, lambda, meter)? {
                    return Ok(Some(y));
                }
            }
        }
    }

    /// Recombines members of one pattern group to gain a distinct entry.
    fn raise(&self, labels: &[usize], group: &[Vec<u32>], lambda: usize, meter: &mut Meter) -> Result<Option<Vec<u32>>> {
        let k = self.sys.k();
        let cl = self.sys.classes();
        let list: Vec<Vec<FqVector>> = group.iter().map(|t| self.s.vectors(t)).collect();
        let mut tried = BTreeSet::new();
        for j0 in 0..k {
            for j1 in 0..k {
                if j0 == j1 || labels[j0] != labels[j1] {
                    continue;
                }
                let Some(c) = cl.class_of(j1) else { continue };
                let members = &cl.classes[c].members;
                if members.len() < 2 {
                    continue;
                }
                let others: Vec<usize> = members.iter().copied().filter(|&j| j != j0 && j != j1).collect();
                let pairs: Vec<(usize, usize)> = if others.is_empty() {
                    vec![(j0.min(j1), j0.max(j1))]
                } else {
                    others.iter().map(|&j2| (j1.min(j2), j1.max(j2))).collect()
                };
                for (a, b) in pairs {
                    if !tried.insert((a, b)) {
                        continue;
                    }
                    let found = first_recombination(self.sys, &list, a, b, meter, &mut |r| {
                        Ok(distinct_count(&r.tuple) >= lambda && (!self.clause_ii || self.keeps_pairs_apart(&r.tuple)))
                    })?;
                    if let Some(r) = found {
                        return Ok(Some(self.ids(&r.tuple)));
                    }
                }
            }
        }
        Ok(None)
    }
}

/// Checks the hypotheses and returns whether clause (ii) drives the base case.
fn shape_clause(sys: &SystemMatrix) -> Result<bool> {
    let p = sys.profile();
    if !p.zero_columns.is_empty() || !p.core.irreducible {
        return Err(Error::NotApplicable("system has zero columns or is reducible; use the block pipeline".into()));
    }
    let f = p.core.applicable;
    if !(f.a_i || f.a_ii) {
        return Err(Error::NotApplicable("neither shape clause holds for this system".into()));
    }
    Ok(!f.a_i)
}

pub(crate) fn shape_ids(sys: &SystemMatrix, s: &PointSet, opts: &SearchOptions, meter: &mut Meter, notes: &mut Vec<String>) -> Result<(Found, ThresholdInfo)> {
    let clause_ii = shape_clause(sys)?;
    let q = sys.ctx().q() as u64;
    let required = shape_threshold(q, sys.k() as u32, s.n() as u32, clause_ii, opts.gamma_mode)?;
    let th = ThresholdInfo::check(required, s.len(), opts.override_threshold)?;
    let grower = Grower::new(sys, s, clause_ii);
    let alive = vec![true; s.len()];
    let found = with_fallback(
        meter,
        notes,
        |m| {
            Ok(grower
                .grow(sys.k(), &alive, m)?
                .filter(|t| distinct_ids(t) == sys.k())
                .map(|ids| Found { mode: Mode::Induction, ids }))
        },
        |m| exhaustive_first(sys.matrix(), s, Constraints::distinct(), opts.budget.seed, m, &|_| true),
    )?;
    Ok((found, th))
}

/// A shape in `S` for a system satisfying a shape clause.
pub fn grow_shape(sys: &SystemMatrix, s: &PointSet, opts: &SearchOptions) -> Result<SearchReport> {
    let mut meter = opts.meter();
    let mut notes = Vec::new();
    let res = shape_ids(sys, s, opts, &mut meter, &mut notes);
    into_report(sys.matrix(), s, res, &["shape"], meter.used(), notes)
}

/// Whether `S` contains a shape at all, by exhaustive search.
pub fn shape_exists(sys: &SystemMatrix, s: &PointSet, meter: &mut Meter) -> Result<Option<Vec<u32>>> {
    exhaustive_first(sys.matrix(), s, Constraints::distinct(), 0, meter, &|_| true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;
    use crate::finder::Outcome;

    fn sys(q: u64, rows: &[Vec<i64>]) -> SystemMatrix {
        SystemMatrix::from_i64_rows(&FieldCtx::of_order(q).unwrap(), rows).unwrap()
    }

    #[test]
    fn three_term_over_f5() {
        let a = sys(5, &[vec![1, 1, -2]]);
        let s = PointSet::full_space(a.ctx(), 1).unwrap();
        let r = grow_shape(&a, &s, &SearchOptions::default().with_override()).unwrap();
        assert_eq!(r.outcome, Outcome::Found);
        assert_eq!(r.mode, Some(Mode::Induction));
        assert!(r.certificate.unwrap().flags.shape);
    }

    #[test]
    fn refuses_below_threshold_and_forced_equality() {
        let a = sys(5, &[vec![1, 1, -2]]);
        let s = PointSet::full_space(a.ctx(), 1).unwrap();
        let r = grow_shape(&a, &s, &SearchOptions::default()).unwrap();
        assert_eq!(r.outcome, Outcome::BelowThreshold);
        let b = sys(5, &[vec![1, -1]]);
        let r = grow_shape(&b, &s, &SearchOptions::default().with_override()).unwrap();
        assert_eq!(r.outcome, Outcome::NotApplicable);
    }

    #[test]
    fn clause_ii_base_and_growth() {
        // Three zero-sum classes of size 2 over F_7.
        let a = sys(7, &[vec![1, -1, 0, 0, 1, -1], vec![0, 0, 1, -1, 1, -1]]);
        assert!(a.profile().core.applicable.a_ii && !a.profile().core.applicable.a_i);
        let s = PointSet::full_space(a.ctx(), 2).unwrap();
        let r = grow_shape(&a, &s, &SearchOptions::default().with_override()).unwrap();
        assert_eq!(r.outcome, Outcome::Found);
        assert!(r.certificate.unwrap().flags.shape);
    }

    #[test]
    fn agrees_with_exhaustive_on_small_sets() {
        let a = sys(5, &[vec![1, 1, 1, -3]]);
        let full = PointSet::full_space(a.ctx(), 1).unwrap();
        for mask in 0u32..32 {
            let s = full.filter(|i| mask >> i & 1 == 1);
            if s.is_empty() {
                continue;
            }
            let r = grow_shape(&a, &s, &SearchOptions::default().with_override()).unwrap();
            let exists = shape_exists(&a, &s, &mut Meter::new(u64::MAX)).unwrap().is_some();
            assert_eq!(r.outcome == Outcome::Found, exists, "mask {mask}");
        }
    }
}
