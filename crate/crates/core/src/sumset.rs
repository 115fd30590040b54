//! Sumsets over affinely independent summands, generic solutions inside
//! them, arithmetic progressions in difference sets and tricoloured
//! sum-free sequences.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::algebra::{affine_dim, FqMatrix};
use crate::constants::pigeonhole_threshold;
use crate::error::{Error, Result};
use crate::field::{Elem, FieldCtx, FqVector};
use crate::finder::pigeonhole::pigeonhole_with;
use crate::finder::search::{Constraints, Engine, Independence};
use crate::finder::{find_generic_any, Meter, Mode, Outcome, PointSet, SearchOptions, SearchReport, ThresholdInfo};
use crate::system::SystemMatrix;
use crate::witness::classify_tuple;

/// The sums `b_1 x_1 + ... + b_l x_l` over affinely independent
/// `(x_1, ..., x_l)` with `x_r` in `S_r`, each with its first preimage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AirSumset {
    /// Sorted by vector index.
    pub points: Vec<FqVector>,
    pub preimages: Vec<Vec<FqVector>>,
    pub evaluations: u64,
}

impl AirSumset {
    pub fn preimage(&self, v: &FqVector) -> Option<&[FqVector]> {
        self.points.iter().position(|p| p == v).map(|i| self.preimages[i].as_slice())
    }
}

pub fn air_sumset(ctx: &FieldCtx, coeffs: &[Elem], sets: &[&PointSet], budget: u64) -> Result<AirSumset> {
    let l = coeffs.len();
    if l == 0 || sets.len() != l {
        return Err(Error::InvalidArgument("need one nonempty coefficient per source set".into()));
    }
    if coeffs.iter().any(|&b| b == 0) {
        return Err(Error::InvalidArgument("coefficients must be nonzero".into()));
    }
    let n = sets[0].n();
    if sets.iter().any(|s| s.n() != n) {
        return Err(Error::InvalidArgument("source sets of different dimensions".into()));
    }
    let mut meter = Meter::new(budget);
    let mut found: BTreeMap<u64, (FqVector, Vec<FqVector>)> = BTreeMap::new();
    if sets.iter().any(|s| s.is_empty()) {
        return Ok(AirSumset { points: Vec::new(), preimages: Vec::new(), evaluations: 0 });
    }
    let mut idx = vec![0u32; l];
    loop {
        meter.charge(1)?;
        let xs: Vec<FqVector> = (0..l).map(|r| sets[r].vector(idx[r])).collect();
        if affine_dim(ctx, &xs)? + 1 == l {
            let mut sum = vec![0; n];
            for (x, &b) in xs.iter().zip(coeffs) {
                ctx.axpy(&mut sum, b, &x.0);
            }
            found.entry(ctx.vec_index(&sum)?).or_insert((FqVector(sum), xs));
        }
        let mut r = l;
        loop {
            if r == 0 {
                let (points, preimages) = found.into_values().unzip();
                return Ok(AirSumset { points, preimages, evaluations: meter.used() });
            }
            r -= 1;
            idx[r] += 1;
            if (idx[r] as usize) < sets[r].len() {
                break;
            }
            idx[r] = 0;
        }
    }
}

/// A linearly generic solution `y` of `A` with entries in the AIR-sumset of
/// `l` copies of `S`, or zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AirGeneric {
    pub outcome: Outcome,
    pub mode: Option<Mode>,
    pub y: Option<Vec<FqVector>>,
    /// For each `y_j`, affinely independent summands, or `None` when `y_j = 0`
    /// is the appended zero.
    pub preimages: Vec<Option<Vec<FqVector>>>,
    /// The generic solution of the extended system, when that route answered.
    pub extended: Option<SearchReport>,
    pub thresholds: Option<ThresholdInfo>,
    pub evaluations: u64,
    pub notes: Vec<String>,
}

/// `[b_1 A | ... | b_l A]`.
pub fn extended_system(a: &FqMatrix, coeffs: &[Elem]) -> Result<FqMatrix> {
    let ctx = a.ctx();
    let k = a.cols();
    let mut m = FqMatrix::zeros(ctx, a.rows(), k * coeffs.len());
    for (r, &b) in coeffs.iter().enumerate() {
        for i in 0..a.rows() {
            for j in 0..k {
                m.set(i, r * k + j, ctx.mul(b, a.get(i, j)));
            }
        }
    }
    Ok(m)
}

fn fold(ctx: &FieldCtx, x: &[FqVector], coeffs: &[Elem], k: usize) -> (Vec<FqVector>, Vec<Vec<FqVector>>) {
    let n = x[0].dim();
    let mut y = Vec::with_capacity(k);
    let mut parts = Vec::with_capacity(k);
    for j in 0..k {
        let mut sum = vec![0; n];
        let mut p = Vec::new();
        for (r, &b) in coeffs.iter().enumerate() {
            ctx.axpy(&mut sum, b, &x[j + r * k].0);
            p.push(x[j + r * k].clone());
        }
        y.push(FqVector(sum));
        parts.push(p);
    }
    (y, parts)
}

pub fn generic_in_air_sumset(a: &FqMatrix, coeffs: &[Elem], s: &PointSet, opts: &SearchOptions) -> Result<AirGeneric> {
    let ctx = a.ctx();
    let k = a.cols();
    let l = coeffs.len();
    if l < 2 || coeffs.iter().any(|&b| b == 0) {
        return Err(Error::InvalidArgument("need at least two nonzero coefficients".into()));
    }
    if coeffs.iter().fold(0, |acc, &b| ctx.add(acc, b)) != 0 {
        return Err(Error::InvalidArgument("coefficients must sum to zero".into()));
    }
    let ext = SystemMatrix::new(extended_system(a, coeffs)?)?;
    let report = find_generic_any(&ext, s, opts)?;
    let mut notes = Vec::new();
    let mut spent = report.evaluations;
    match report.outcome {
        Outcome::Found => {
            let x = report.witness.clone().expect("found");
            let (y, parts) = fold(ctx, &x, coeffs, k);
            let mut preimages = Vec::with_capacity(k);
            for (yj, p) in y.iter().zip(parts) {
                if affine_dim(ctx, &p)? + 1 == l {
                    preimages.push(Some(p));
                } else if yj.is_zero() {
                    preimages.push(None);
                } else {
                    return Err(Error::Internal("folded entry from dependent summands is nonzero".into()));
                }
            }
            if !classify_tuple(a, &y)?.linearly_generic {
                return Err(Error::Internal("folded tuple is not linearly generic".into()));
            }
            let thresholds = Some(report.thresholds);
            return Ok(AirGeneric {
                outcome: Outcome::Found,
                mode: Some(Mode::Blocks),
                y: Some(y),
                preimages,
                extended: Some(report),
                thresholds,
                evaluations: spent,
                notes,
            });
        }
        Outcome::BelowThreshold | Outcome::NotApplicable => {
            return Ok(AirGeneric {
                outcome: report.outcome,
                mode: None,
                y: None,
                preimages: Vec::new(),
                thresholds: Some(report.thresholds),
                extended: Some(report),
                evaluations: spent,
                notes,
            });
        }
        _ => notes.push(format!("extended system gave {:?}; searching the sumset directly", report.outcome)),
    }
    let thresholds = Some(report.thresholds);
    let mut meter = Meter::new(opts.budget.max_evaluations.saturating_sub(spent));
    let direct = (|| -> Result<Option<(Vec<FqVector>, Vec<Option<Vec<FqVector>>>)>> {
        let sets: Vec<&PointSet> = vec![s; l];
        let air = air_sumset(ctx, coeffs, &sets, meter.remaining())?;
        meter.charge(air.evaluations)?;
        let mut pts = air.points.clone();
        if !pts.iter().any(|p| p.is_zero()) {
            pts.push(FqVector::zero(s.n()));
        }
        let t = PointSet::new(ctx, s.n(), pts)?;
        let cons = Constraints { independence: Independence::Linear, ..Default::default() };
        let eng = Engine::new(a, &t, cons, opts.budget.seed)?;
        let hit = eng.find_first(&mut meter, &|ids| classify_tuple(a, &t.vectors(ids)).is_ok_and(|f| f.linearly_generic))?;
        Ok(hit.map(|ids| {
            let y = t.vectors(&ids);
            let pre = y.iter().map(|v| air.preimage(v).map(|p| p.to_vec())).collect();
            (y, pre)
        }))
    })();
    spent += meter.used();
    let (outcome, y, preimages) = match direct {
        Ok(Some((y, pre))) => (Outcome::Found, Some(y), pre),
        Ok(None) => (Outcome::Exhausted, None, Vec::new()),
        Err(Error::BudgetExceeded(_)) => (Outcome::BudgetExceeded, None, Vec::new()),
        Err(e) => return Err(e),
    };
    Ok(AirGeneric {
        outcome,
        mode: y.as_ref().map(|_| Mode::Exhaustive),
        y,
        preimages,
        extended: Some(report),
        thresholds,
        evaluations: spent,
        notes,
    })
}

/// A non-trivial `k`-AP in `(S - S) \ {0}` from a pigeonhole pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApInDifference {
    pub ap: Vec<FqVector>,
    pub x: Vec<FqVector>,
    pub y: Vec<FqVector>,
    pub pigeonhole_mode: &'static str,
    pub thresholds: ThresholdInfo,
    pub evaluations: u64,
}

/// The `(k - 2) x k` second-difference matrix.
pub fn second_differences(ctx: &FieldCtx, k: usize) -> Result<FqMatrix> {
    let rows: Vec<Vec<i64>> = (0..k - 2)
        .map(|i| {
            let mut r = vec![0; k];
            r[i] = 1;
            r[i + 1] = -2;
            r[i + 2] = 1;
            r
        })
        .collect();
    FqMatrix::from_i64_rows(ctx, &rows)
}

/// Whether `t` is a non-trivial arithmetic progression with nonzero,
/// pairwise distinct terms.
pub fn is_nonzero_ap(ctx: &FieldCtx, t: &[FqVector]) -> bool {
    if t.len() < 2 {
        return false;
    }
    let d = ctx.vec_sub(&t[1].0, &t[0].0);
    let steps = t.windows(2).all(|w| ctx.vec_sub(&w[1].0, &w[0].0) == d);
    let distinct = t.iter().collect::<HashSet<_>>().len() == t.len();
    steps && distinct && t.iter().all(|v| !v.is_zero())
}

pub fn ap_in_difference(s: &PointSet, k: usize, opts: &SearchOptions) -> Result<ApInDifference> {
    let ctx = s.ctx();
    if ctx.s() != 1 {
        return Err(Error::InvalidArgument("progressions in difference sets need a prime field".into()));
    }
    if k < 3 {
        return Err(Error::InvalidArgument("k must be at least 3".into()));
    }
    if k > ctx.p() as usize {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds p = {}", ctx.p())));
    }
    let a = second_differences(ctx, k)?;
    let required = pigeonhole_threshold(ctx.q() as u64, k as u32, s.n() as u32);
    ThresholdInfo::check(required, s.len(), opts.override_threshold)?;
    let mut meter = opts.meter();
    let pair = pigeonhole_with(&a, s, opts.override_threshold, &mut meter)?;
    let ap: Vec<FqVector> = pair.x.iter().zip(&pair.y).map(|(x, y)| FqVector(ctx.vec_sub(&x.0, &y.0))).collect();
    if !a.annihilates(&ap, s.n()) || !is_nonzero_ap(ctx, &ap) {
        return Err(Error::Internal("difference tuple is not a nonzero progression".into()));
    }
    Ok(ApInDifference {
        ap,
        x: pair.x,
        y: pair.y,
        pigeonhole_mode: pair.mode,
        thresholds: pair.thresholds,
        evaluations: pair.evaluations,
    })
}

pub type Triple = (FqVector, FqVector, FqVector);

/// Whether `x_i + y_i' + z_i'' = 0` exactly when `i = i' = i''`.
pub fn verify_tricoloured(ctx: &FieldCtx, seq: &[Triple]) -> bool {
    let mut zs: HashMap<&FqVector, usize> = HashMap::new();
    for (i, (_, _, z)) in seq.iter().enumerate() {
        if zs.insert(z, i).is_some() {
            return false;
        }
    }
    for (i, (x, _, _)) in seq.iter().enumerate() {
        for (i1, (_, y, _)) in seq.iter().enumerate() {
            let need = FqVector(ctx.vec_sub(&vec![0; x.dim()], &ctx.vec_add(&x.0, &y.0)));
            let hit = zs.get(&need).copied();
            let diagonal = i == i1;
            match hit {
                Some(i2) if !(diagonal && i2 == i) => return false,
                None if diagonal => return false,
                _ => {}
            }
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TricolouredResult {
    pub size: usize,
    pub witness: Vec<Triple>,
    /// False when the budget ran out; `size` is then a lower bound.
    pub exact: bool,
    pub evaluations: u64,
}

struct Tri {
    ctx: FieldCtx,
    triples: Vec<Triple>,
    meter: Meter,
    best: Vec<usize>,
}

impl Tri {
    fn fits(&mut self, cur: &[usize], extra: usize) -> Result<bool> {
        self.meter.charge(1)?;
        let mut seq: Vec<Triple> = cur.iter().map(|&i| self.triples[i].clone()).collect();
        seq.push(self.triples[extra].clone());
        Ok(verify_tricoloured(&self.ctx, &seq))
    }

    fn dfs(&mut self, cur: &mut Vec<usize>, cands: &[usize]) -> Result<()> {
        if cur.len() > self.best.len() {
            self.best = cur.clone();
        }
        for (idx, &c) in cands.iter().enumerate() {
            if cur.len() + cands.len() - idx <= self.best.len() {
                return Ok(());
            }
            cur.push(c);
            let mut next = Vec::new();
            for &d in &cands[idx + 1..] {
                if self.fits(cur, d)? {
                    next.push(d);
                }
            }
            self.dfs(cur, &next)?;
            cur.pop();
        }
        Ok(())
    }
}

/// The longest tricoloured sum-free sequence in `F_q^n`. Translating the
/// three colours independently preserves the property, so the first triple
/// is `(0, 0, 0)`.
pub fn max_tricoloured(q: u64, n: usize, budget: u64) -> Result<TricolouredResult> {
    let ctx = FieldCtx::of_order(q)?;
    let size = ctx.space_size(n).filter(|&s| s <= 1 << 12).ok_or_else(|| Error::InvalidArgument("space too large".into()))?;
    let mut triples = Vec::new();
    for xi in 0..size {
        for yi in 0..size {
            let x = ctx.vec_from_index(n, xi)?;
            let y = ctx.vec_from_index(n, yi)?;
            let z = FqVector(ctx.vec_sub(&vec![0; n], &ctx.vec_add(&x.0, &y.0)));
            triples.push((x, y, z));
        }
    }
    let mut t = Tri { ctx, triples, meter: Meter::new(budget), best: Vec::new() };
    let total = t.triples.len();
    let run = (|| -> Result<()> {
        let mut cur = vec![0];
        let mut cands = Vec::new();
        for c in 1..total {
            if t.fits(&cur, c)? {
                cands.push(c);
            }
        }
        t.dfs(&mut cur, &cands)
    })();
    let exact = match run {
        Ok(()) => true,
        Err(Error::BudgetExceeded(_)) => false,
        Err(e) => return Err(e),
    };
    if t.best.is_empty() {
        t.best = vec![0];
    }
    let witness: Vec<Triple> = t.best.iter().map(|&i| t.triples[i].clone()).collect();
    if !verify_tricoloured(&t.ctx, &witness) {
        return Err(Error::Internal("tricoloured witness fails verification".into()));
    }
    Ok(TricolouredResult { size: witness.len(), witness, exact, evaluations: t.meter.used() })
}
