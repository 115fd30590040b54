//! Shapes for the system `W = [[1,-1,-1,1,0],[1,0,-2,0,1]]`, which is not of
//! type (RC).
//!
//! A non-trivial 3-AP `(x1, x3, x5)` padded as `(x1, x3, x3, x5, x5)` solves
//! `W`. Replacing columns 2 and 4 from two other disjoint 3-APs gives five
//! distinct entries: `y2 != y4` because `y2 - y4 = y1 - y3`.

use super::pointset::PointSet;
use super::replace::first_recombination;
use super::search::{harvest_disjoint, Constraints, Independence, Requirement};
use super::{exhaustive_first, into_report, with_fallback, Found, Mode, SearchOptions, SearchReport, ThresholdInfo};
use crate::algebra::{affine_dim, FqMatrix};
use crate::constants::w_shape_threshold;
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FqVector};
use crate::system::SystemMatrix;
use crate::witness::{classify_tuple, distinct_count};

pub const W_ROWS: [[i64; 5]; 2] = [[1, -1, -1, 1, 0], [1, 0, -2, 0, 1]];

pub fn w_system(ctx: &FieldCtx) -> Result<SystemMatrix> {
    SystemMatrix::from_i64_rows(ctx, &W_ROWS.map(|r| r.to_vec()))
}

/// The five facts that make a recombined W-solution a shape.
fn distinctness_facts(y: &[FqVector]) -> bool {
    y[0] != y[2] && y[2] != y[4] && y[0] != y[4] && y[1] != y[3] && distinct_count(y) == 5
}

/// A W-shape in `S`; with `generic` set, a generic W-solution
/// (affine dimension 2).
pub fn find_shape_w(s: &PointSet, generic: bool, opts: &SearchOptions) -> Result<SearchReport> {
    let ctx = s.ctx().clone();
    let sys = w_system(&ctx)?;
    let mut meter = opts.meter();
    let mut notes = Vec::new();
    let accept = |y: &[FqVector]| -> Result<bool> {
        Ok(distinctness_facts(y) && (!generic || classify_tuple(sys.matrix(), y)?.generic))
    };
    let res = (|| -> Result<(Found, ThresholdInfo)> {
        if ctx.p() == 2 {
            return Err(Error::NotApplicable("W has no shapes in characteristic 2".into()));
        }
        let required = w_shape_threshold(ctx.q() as u64, s.n() as u32, opts.gamma_mode)?;
        let th = ThresholdInfo::check(required, s.len(), opts.override_threshold)?;
        let ap = FqMatrix::from_i64_rows(&ctx, &[vec![1, -2, 1]])?;
        let seed = opts.budget.seed;
        let found = with_fallback(
            &mut meter,
            &mut notes,
            |m| {
                let h = harvest_disjoint(&ap, s, s.len() / 3, Requirement::MinDistinct(3), m, seed)?;
                if h.list.len() < 3 {
                    return Ok(None);
                }
                let list: Vec<Vec<FqVector>> = h
                    .list
                    .iter()
                    .map(|t| {
                        let v = s.vectors(t);
                        vec![v[0].clone(), v[1].clone(), v[1].clone(), v[2].clone(), v[2].clone()]
                    })
                    .collect();
                let r = first_recombination(&sys, &list, 1, 3, m, &mut |r| accept(&r.tuple))?;
                Ok(r.map(|r| Found {
                    mode: Mode::Construction,
                    ids: r.tuple.iter().map(|v| s.id_of(&v.0).expect("point of S")).collect(),
                }))
            },
            |m| {
                let cons = if generic {
                    Constraints { distinct: true, independence: Independence::Affine, ..Default::default() }
                } else {
                    Constraints::distinct()
                };
                let check = |t: &[u32]| {
                    let v = s.vectors(t);
                    !generic || affine_dim(&ctx, &v).is_ok_and(|d| d == 2)
                };
                exhaustive_first(sys.matrix(), s, cons, seed, m, &check)
            },
        )?;
        Ok((found, th))
    })();
    let require: &[&'static str] = if generic { &["shape", "generic"] } else { &["shape"] };
    into_report(sys.matrix(), s, res, require, meter.used(), notes)
}
