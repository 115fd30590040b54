//! Constructive search for solutions inside a point set: enumeration,
//! disjoint harvesting, collisions and replacement, matrix pigeonhole pairs,
//! the shape and generic-solution pipelines, block recombination, the
//! dedicated W construction and small exhaustive extremal searches.
//!
//! Every pipeline result is re-verified with [`crate::witness`] before it is
//! returned. Below a theorem threshold the pipelines only run when the caller
//! overrides the check, and fall back to exhaustive search when the inductive
//! construction fails.

use serde::Serialize;

use crate::algebra::FqMatrix;
use crate::constants::GammaMode;
use crate::error::{Error, Result};
use crate::field::FqVector;
use crate::witness::{SolutionTuple, TupleFlags};

pub mod blocks;
pub mod extremal;
pub mod generic;
pub mod pigeonhole;
pub mod pointset;
pub mod replace;
pub mod search;
pub mod shape;
pub mod wshape;

pub use blocks::{find_generic_any, find_shape_any, recombine_blocks, BlockMode};
pub use extremal::{max_shape_free, ExtremalResult};
pub use generic::{find_generic, find_high_rank};
pub use pigeonhole::{pigeonhole_pair, PigeonholePair};
pub use pointset::PointSet;
pub use replace::{eliminate_breaking_pair, find_collision, replace_multiple, replace_single, Collision, Recombination};
pub use search::{enumerate_solutions, harvest_disjoint, Constraints, Domain, Engine, Enumeration, Harvest, Independence, Requirement};
pub use shape::grow_shape;
pub use wshape::find_shape_w;

pub const DEFAULT_BUDGET: u64 = 200_000_000;

/// Limits and seed for one finder run. Evaluations are counted exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBudget {
    pub max_evaluations: u64,
    /// 0 keeps the canonical candidate order.
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_evaluations: DEFAULT_BUDGET, seed: 0 }
    }
}

/// Evaluation counter shared by the stages of one pipeline.
#[derive(Clone, Debug)]
pub struct Meter {
    limit: u64,
    used: u64,
}

impl Meter {
    pub fn new(limit: u64) -> Self {
        Meter { limit, used: 0 }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.limit - self.used
    }

    /// Adds `n` evaluations, failing once the limit is passed.
    pub fn charge(&mut self, n: u64) -> Result<()> {
        if n > self.remaining() {
            self.used = self.limit;
            return Err(Error::BudgetExceeded(self.limit));
        }
        self.used += n;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchOptions {
    pub budget: SearchBudget,
    /// Run below the theorem threshold instead of refusing.
    pub override_threshold: bool,
    pub gamma_mode: GammaMode,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { budget: SearchBudget::default(), override_threshold: false, gamma_mode: GammaMode::Flat }
    }
}

impl SearchOptions {
    pub fn with_override(mut self) -> Self {
        self.override_threshold = true;
        self
    }

    pub fn meter(&self) -> Meter {
        Meter::new(self.budget.max_evaluations)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Found,
    Exhausted,
    BudgetExceeded,
    BelowThreshold,
    NotApplicable,
}

/// Which route produced the witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Direct,
    Induction,
    Pigeonhole,
    Replacement,
    Blocks,
    Construction,
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `|S|` meets the threshold.
    AboveThreshold,
    /// Below the threshold, run on request.
    Override,
    /// Below the threshold and refused.
    Refused,
    /// The route has no size threshold.
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdInfo {
    pub required: Option<u128>,
    pub actual: usize,
    pub regime: Regime,
}

impl ThresholdInfo {
    pub fn none(actual: usize) -> Self {
        ThresholdInfo { required: None, actual, regime: Regime::Unbounded }
    }

    /// Checks `actual >= required` unless overridden.
    pub fn check(required: u128, actual: usize, override_threshold: bool) -> Result<Self> {
        if (actual as u128) >= required {
            Ok(ThresholdInfo { required: Some(required), actual, regime: Regime::AboveThreshold })
        } else if override_threshold {
            Ok(ThresholdInfo { required: Some(required), actual, regime: Regime::Override })
        } else {
            Err(Error::BelowThreshold { required, actual })
        }
    }
}

/// The predicates re-checked on a witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub checked: Vec<&'static str>,
    pub flags: TupleFlags,
    pub affine_dim: usize,
    pub ann_bal_dim: usize,
}

impl Certificate {
    /// Re-verifies `tuple` against `a` and fails unless every predicate in
    /// `require` holds.
    pub fn verify(a: &FqMatrix, tuple: &[FqVector], require: &[&'static str]) -> Result<Self> {
        let st = SolutionTuple::new(a, tuple.to_vec())?;
        let mut checked = vec!["solution"];
        for &r in require {
            let ok = match r {
                "solution" => continue,
                "nontrivial" => st.flags.nontrivial,
                "shape" => st.flags.shape,
                "generic" => st.flags.generic,
                "linearly_generic" => st.flags.linearly_generic,
                other => return Err(Error::Internal(format!("unknown predicate {other}"))),
            };
            if !ok {
                return Err(Error::Internal(format!("witness fails {r}")));
            }
            checked.push(r);
        }
        if !st.flags.solution {
            return Err(Error::Internal("witness is not a solution".into()));
        }
        Ok(Certificate { checked, flags: st.flags, affine_dim: st.affine_dim, ann_bal_dim: st.ann_bal.len() })
    }
}

/// Outcome of a finder run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub outcome: Outcome,
    pub mode: Option<Mode>,
    pub witness: Option<Vec<FqVector>>,
    pub certificate: Option<Certificate>,
    pub thresholds: ThresholdInfo,
    pub evaluations: u64,
    pub notes: Vec<String>,
}

impl SearchReport {
    pub fn found(mode: Mode, witness: Vec<FqVector>, certificate: Certificate, thresholds: ThresholdInfo, evaluations: u64) -> Self {
        SearchReport {
            outcome: Outcome::Found,
            mode: Some(mode),
            witness: Some(witness),
            certificate: Some(certificate),
            thresholds,
            evaluations,
            notes: Vec::new(),
        }
    }

    /// A report for a run that ended without a witness.
    pub fn failed(err: &Error, actual: usize, evaluations: u64) -> Self {
        let (outcome, thresholds) = match err {
            Error::BelowThreshold { required, actual } => (
                Outcome::BelowThreshold,
                ThresholdInfo { required: Some(*required), actual: *actual, regime: Regime::Refused },
            ),
            Error::BudgetExceeded(_) => (Outcome::BudgetExceeded, ThresholdInfo::none(actual)),
            Error::NotApplicable(_) => (Outcome::NotApplicable, ThresholdInfo::none(actual)),
            _ => (Outcome::Exhausted, ThresholdInfo::none(actual)),
        };
        SearchReport {
            outcome,
            mode: None,
            witness: None,
            certificate: None,
            thresholds,
            evaluations,
            notes: vec![err.to_string()],
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// What a pipeline stage produced: the route taken and the witness ids.
pub(crate) struct Found {
    pub mode: Mode,
    pub ids: Vec<u32>,
}

/// Search failures that end a run with a report instead of an error.
pub(crate) fn is_search_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::Exhausted(_)
            | Error::NoneFound
            | Error::BudgetExceeded(_)
            | Error::BelowThreshold { .. }
            | Error::NotApplicable(_)
    )
}

/// Runs `construct` on half the remaining budget and, if it fails, the
/// exhaustive `fallback` on the rest. Notes record which route answered.
pub(crate) fn with_fallback(
    meter: &mut Meter,
    notes: &mut Vec<String>,
    construct: impl FnOnce(&mut Meter) -> Result<Option<Found>>,
    fallback: impl FnOnce(&mut Meter) -> Result<Option<Vec<u32>>>,
) -> Result<Found> {
    let mut child = Meter::new(meter.remaining() / 2);
    let first = construct(&mut child);
    meter.charge(child.used())?;
    match first {
        Ok(Some(f)) => return Ok(f),
        Ok(None) => notes.push("construction found nothing; exhaustive fallback".into()),
        Err(e) if is_search_failure(&e) => notes.push(format!("construction stopped ({e}); exhaustive fallback")),
        Err(e) => return Err(e),
    }
    match fallback(meter)? {
        Some(ids) => Ok(Found { mode: Mode::Exhaustive, ids }),
        None => Err(Error::Exhausted("no witness exists in S".into())),
    }
}

/// Turns a pipeline result into a verified report; search failures become
/// unsuccessful reports, other errors propagate.
pub(crate) fn into_report(
    a: &FqMatrix,
    s: &PointSet,
    result: Result<(Found, ThresholdInfo)>,
    require: &[&'static str],
    evaluations: u64,
    notes: Vec<String>,
) -> Result<SearchReport> {
    match result {
        Ok((found, thresholds)) => {
            let witness = s.vectors(&found.ids);
            let cert = Certificate::verify(a, &witness, require)?;
            let mut r = SearchReport::found(found.mode, witness, cert, thresholds, evaluations);
            r.notes = notes;
            Ok(r)
        }
        Err(e) if is_search_failure(&e) => {
            let mut r = SearchReport::failed(&e, s.len(), evaluations);
            r.notes.splice(0..0, notes);
            Ok(r)
        }
        Err(e) => Err(e),
    }
}

/// The first solution in `S` accepted by `accept`, or `None` after a full walk.
pub(crate) fn exhaustive_first(
    a: &FqMatrix,
    s: &PointSet,
    cons: Constraints,
    seed: u64,
    meter: &mut Meter,
    accept: &(dyn Fn(&[u32]) -> bool + Sync),
) -> Result<Option<Vec<u32>>> {
    Engine::new(a, s, cons, seed)?.find_first(meter, accept)
}

/// A solution with at least two distinct entries, by exhaustive search.
pub fn find_nontrivial(sys: &crate::system::SystemMatrix, s: &PointSet, opts: &SearchOptions) -> Result<SearchReport> {
    let mut meter = opts.meter();
    let res = exhaustive_first(sys.matrix(), s, Constraints::default(), opts.budget.seed, &mut meter, &|t| distinct_ids(t) >= 2)
        .and_then(|hit| hit.ok_or_else(|| Error::Exhausted("no non-trivial solution in S".into())))
        .map(|ids| (Found { mode: Mode::Exhaustive, ids }, ThresholdInfo::none(s.len())));
    into_report(sys.matrix(), s, res, &["nontrivial"], meter.used(), Vec::new())
}

/// Number of distinct ids in `t`.
pub(crate) fn distinct_ids(t: &[u32]) -> usize {
    let mut v = t.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}
