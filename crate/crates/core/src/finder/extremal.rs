//! Largest shape-free subsets of small spaces by branch and bound.

use serde::Serialize;

use super::pointset::PointSet;
use super::search::Constraints;
use super::{exhaustive_first, Meter};
use crate::error::{Error, Result};
use crate::field::FqVector;
use crate::system::SystemMatrix;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtremalResult {
    pub size: usize,
    /// A shape-free set of that size.
    pub witness: Vec<FqVector>,
    /// False when the budget ran out; `size` is then only a lower bound.
    pub exact: bool,
    pub evaluations: u64,
}

struct Search<'a> {
    sys: &'a SystemMatrix,
    space: PointSet,
    meter: Meter,
    best: Vec<u32>,
}

impl Search<'_> {
    fn has_shape(&mut self, ids: &[u32]) -> Result<bool> {
        let sub = PointSet::new(self.space.ctx(), self.space.n(), self.space.vectors(ids))?;
        Ok(exhaustive_first(self.sys.matrix(), &sub, Constraints::distinct(), 0, &mut self.meter, &|_| true)?.is_some())
    }

    fn dfs(&mut self, cur: &mut Vec<u32>, cands: &[u32]) -> Result<()> {
        if cur.len() > self.best.len() {
            self.best = cur.clone();
        }
        for (idx, &p) in cands.iter().enumerate() {
            if cur.len() + cands.len() - idx <= self.best.len() {
                return Ok(());
            }
            cur.push(p);
            let mut next = Vec::new();
            for &c in &cands[idx + 1..] {
                cur.push(c);
                let bad = self.has_shape(cur)?;
                cur.pop();
                if !bad {
                    next.push(c);
                }
            }
            self.dfs(cur, &next)?;
            cur.pop();
        }
        Ok(())
    }
}

/// The largest `S` in `F_q^n` without a shape of `A`. Balanced systems are
/// translation invariant, so the search may assume the origin is in `S`.
pub fn max_shape_free(sys: &SystemMatrix, n: usize, budget: u64) -> Result<ExtremalResult> {
    let space = PointSet::full_space(sys.ctx(), n)?;
    let total = space.len() as u32;
    let mut search = Search { sys, space, meter: Meter::new(budget), best: Vec::new() };
    let mut cur = Vec::new();
    let run = if sys.profile().balanced && total > 0 {
        cur.push(0);
        let mut next = Vec::new();
        let mut r = Ok(());
        for c in 1..total {
            cur.push(c);
            match search.has_shape(&cur) {
                Ok(bad) => {
                    if !bad {
                        next.push(c);
                    }
                }
                Err(e) => {
                    r = Err(e);
                    break;
                }
            }
            cur.pop();
        }
        r.and_then(|_| {
            let mut start = vec![0];
            search.dfs(&mut start, &next)
        })
    } else {
        let all: Vec<u32> = (0..total).collect();
        search.dfs(&mut cur, &all)
    };
    let exact = match run {
        Ok(()) => true,
        Err(Error::BudgetExceeded(_)) => false,
        Err(e) => return Err(e),
    };
    let witness = search.space.vectors(&search.best);
    if !witness.is_empty() {
        let sub = PointSet::new(sys.ctx(), n, witness.clone())?;
        let mut check = Meter::new(u64::MAX);
        if exhaustive_first(sys.matrix(), &sub, Constraints::distinct(), 0, &mut check, &|_| true)?.is_some() {
            return Err(Error::Internal("extremal witness contains a shape".into()));
        }
    }
    Ok(ExtremalResult { size: witness.len(), witness, exact, evaluations: search.meter.used() })
}
