//! Depth-first enumeration of solutions inside a point set.
//!
//! Free columns of `rref(A)` are assigned from `S`; each pivot coordinate is
//! solved as soon as the free columns it depends on are set and tested for
//! membership. One evaluation is one candidate tried for one free column.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::pointset::PointSet;
use super::Meter;
use crate::algebra::{rref, FqMatrix};
use crate::error::{Error, Result};
use crate::field::{Elem, FieldCtx};

const NONE: u32 = u32::MAX;
/// Top-level candidates handed to the thread pool at once.
const CHUNK: usize = 64;

#[derive(Clone, Debug)]
pub enum Domain {
    All,
    /// Indexed by point id.
    Allowed(Arc<Vec<bool>>),
    Fixed(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Independence {
    None,
    /// The free entries must be affinely independent.
    Affine,
    /// The free entries must be linearly independent.
    Linear,
}

#[derive(Clone, Debug)]
pub struct Constraints {
    /// One per column; empty means unrestricted.
    pub domains: Vec<Domain>,
    /// Entries pairwise distinct.
    pub distinct: bool,
    pub independence: Independence,
}

impl Default for Constraints {
    fn default() -> Self {
        Constraints { domains: Vec::new(), distinct: false, independence: Independence::None }
    }
}

impl Constraints {
    pub fn distinct() -> Self {
        Constraints { distinct: true, ..Default::default() }
    }

    /// Every column restricted to the points marked alive.
    pub fn within(alive: &Arc<Vec<bool>>, k: usize) -> Self {
        Constraints { domains: vec![Domain::Allowed(alive.clone()); k], ..Default::default() }
    }
}

/// Pivot coordinates as combinations of free coordinates.
#[derive(Clone, Debug)]
struct Param {
    free: Vec<usize>,
    pivots: Vec<usize>,
    /// Per pivot: `(depth of free column, coefficient)` with `x_p = sum c x_f`.
    coef: Vec<Vec<(usize, Elem)>>,
    /// Pivots solved right after the free column at each depth.
    det_at: Vec<Vec<usize>>,
    /// Pivots forced to zero.
    constant: Vec<usize>,
}

impl Param {
    fn new(a: &FqMatrix) -> Param {
        let ctx = a.ctx();
        let r = rref(a);
        let free = r.free_columns();
        let mut coef = Vec::with_capacity(r.rank);
        let mut det_at = vec![Vec::new(); free.len()];
        let mut constant = Vec::new();
        for (i, _) in r.pivots.iter().enumerate() {
            let row = r.rref.row(i);
            let c: Vec<(usize, Elem)> = free
                .iter()
                .enumerate()
                .filter(|(_, &f)| row[f] != 0)
                .map(|(d, &f)| (d, ctx.neg(row[f])))
                .collect();
            match c.last() {
                Some(&(d, _)) => det_at[d].push(i),
                None => constant.push(i),
            }
            coef.push(c);
        }
        Param { free, pivots: r.pivots, coef, det_at, constant }
    }
}

/// A reusable search over `A x = 0` with `x in S^k`.
pub struct Engine<'a> {
    s: &'a PointSet,
    k: usize,
    param: Param,
    cons: Constraints,
    order: Vec<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Flow {
    Continue,
    Stop,
    OutOfBudget,
}

impl<'a> Engine<'a> {
    pub fn new(a: &FqMatrix, s: &'a PointSet, cons: Constraints, seed: u64) -> Result<Self> {
        if a.ctx() != s.ctx() {
            return Err(Error::InvalidArgument(format!("matrix over {} but set over {}", a.ctx().label(), s.ctx().label())));
        }
        if !cons.domains.is_empty() && cons.domains.len() != a.cols() {
            return Err(Error::DimensionMismatch { expected: a.cols(), got: cons.domains.len() });
        }
        let mut order: Vec<u32> = (0..s.len() as u32).collect();
        if seed != 0 {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        Ok(Engine { s, k: a.cols(), param: Param::new(a), cons, order })
    }

    pub fn set(&self) -> &PointSet {
        self.s
    }

    pub fn free_columns(&self) -> &[usize] {
        &self.param.free
    }

    /// Calls `visit` on every solution in order until it returns `true`.
    /// Returns whether the visitor stopped the walk.
    pub fn for_each(&self, meter: &mut Meter, visit: &mut dyn FnMut(&[u32]) -> bool) -> Result<bool> {
        let mut st = State::new(self, meter.remaining());
        let flow = if st.init() { st.rec(0, visit) } else { Flow::Continue };
        meter.charge(st.evals.min(meter.remaining()))?;
        match flow {
            Flow::OutOfBudget => Err(Error::BudgetExceeded(meter.limit())),
            Flow::Stop => Ok(true),
            Flow::Continue => Ok(false),
        }
    }

    /// The first solution in walk order accepted by `accept`.
    ///
    /// Subtrees of the first free column run in parallel in fixed chunks and
    /// are merged in walk order, so the result and the evaluation count match
    /// a serial walk for any thread count.
    pub fn find_first(&self, meter: &mut Meter, accept: &(dyn Fn(&[u32]) -> bool + Sync)) -> Result<Option<Vec<u32>>> {
        if self.param.free.is_empty() {
            let mut found = None;
            self.for_each(meter, &mut |t| {
                if accept(t) {
                    found = Some(t.to_vec());
                    true
                } else {
                    false
                }
            })?;
            return Ok(found);
        }
        let top: Vec<u32> = self.candidates(0).collect();
        for chunk in top.chunks(CHUNK) {
            let cap = meter.remaining();
            let results: Vec<(Option<Vec<u32>>, u64, bool)> = chunk
                .par_iter()
                .map(|&c| {
                    let mut st = State::new(self, cap);
                    let mut found = None;
                    let mut flow = Flow::Continue;
                    if st.init() {
                        st.evals = 1;
                        if st.place(0, c) {
                            flow = st.rec(1, &mut |t| {
                                if accept(t) {
                                    found = Some(t.to_vec());
                                    true
                                } else {
                                    false
                                }
                            });
                        }
                    }
                    (found, st.evals, flow == Flow::OutOfBudget)
                })
                .collect();
            for (found, evals, out) in results {
                if out || evals > meter.remaining() {
                    meter.charge(meter.remaining())?;
                    return Err(Error::BudgetExceeded(meter.limit()));
                }
                meter.charge(evals)?;
                if found.is_some() {
                    return Ok(found);
                }
            }
        }
        Ok(None)
    }

    fn candidates(&self, depth: usize) -> Box<dyn Iterator<Item = u32> + '_> {
        let var = self.param.free[depth];
        match self.cons.domains.get(var) {
            Some(Domain::Fixed(id)) => Box::new(std::iter::once(*id)),
            Some(Domain::Allowed(mask)) => {
                let mask = mask.clone();
                Box::new(self.order.iter().copied().filter(move |&i| mask[i as usize]))
            }
            _ => Box::new(self.order.iter().copied()),
        }
    }

    fn allowed(&self, var: usize, id: u32) -> bool {
        match self.cons.domains.get(var) {
            Some(Domain::Fixed(f)) => *f == id,
            Some(Domain::Allowed(mask)) => mask[id as usize],
            _ => true,
        }
    }
}

struct Frame {
    placed: usize,
    basis: usize,
    base_set: bool,
}

struct State<'e, 'a> {
    eng: &'e Engine<'a>,
    ctx: FieldCtx,
    assign: Vec<u32>,
    used: Vec<u16>,
    placed: Vec<usize>,
    frames: Vec<Frame>,
    basis: Vec<(usize, Vec<Elem>)>,
    base: Option<Vec<Elem>>,
    evals: u64,
    cap: u64,
    buf: Vec<Elem>,
}

impl<'e, 'a> State<'e, 'a> {
    fn new(eng: &'e Engine<'a>, cap: u64) -> Self {
        let n = eng.s.n();
        State {
            eng,
            ctx: eng.s.ctx().clone(),
            assign: vec![NONE; eng.k],
            used: vec![0; eng.s.len()],
            placed: Vec::new(),
            frames: Vec::new(),
            basis: Vec::new(),
            base: None,
            evals: 0,
            cap,
            buf: vec![0; n],
        }
    }

    /// Places the pivots that do not depend on any free column.
    fn init(&mut self) -> bool {
        let consts = self.eng.param.constant.clone();
        consts.into_iter().all(|i| {
            let p = self.eng.param.pivots[i];
            self.buf.iter_mut().for_each(|c| *c = 0);
            self.place_pivot(p)
        })
    }

    fn try_use(&mut self, var: usize, id: u32) -> bool {
        if !self.eng.allowed(var, id) || (self.eng.cons.distinct && self.used[id as usize] > 0) {
            return false;
        }
        self.assign[var] = id;
        self.used[id as usize] += 1;
        self.placed.push(var);
        true
    }

    /// Looks up `buf` in `S` and assigns it to pivot column `p`.
    fn place_pivot(&mut self, p: usize) -> bool {
        match self.eng.s.id_of(&self.buf) {
            Some(id) => self.try_use(p, id),
            None => false,
        }
    }

    fn independent(&mut self, id: u32) -> bool {
        let pt = self.eng.s.point(id);
        let mut v = match self.eng.cons.independence {
            Independence::None => return true,
            Independence::Linear => pt.to_vec(),
            Independence::Affine => match &self.base {
                None => {
                    self.base = Some(pt.to_vec());
                    return true;
                }
                Some(b) => self.ctx.vec_sub(pt, b),
            },
        };
        for (piv, row) in &self.basis {
            let c = v[*piv];
            if c != 0 {
                let negc = self.ctx.neg(c);
                self.ctx.axpy(&mut v, negc, row);
            }
        }
        match v.iter().position(|&c| c != 0) {
            None => false,
            Some(piv) => {
                let inv = self.ctx.inv(v[piv]);
                let row = self.ctx.vec_scale(inv, &v);
                self.basis.push((piv, row));
                true
            }
        }
    }

    fn place(&mut self, depth: usize, id: u32) -> bool {
        let var = self.eng.param.free[depth];
        self.frames.push(Frame { placed: self.placed.len(), basis: self.basis.len(), base_set: self.base.is_none() });
        let mut ok = self.try_use(var, id) && self.independent(id);
        if ok {
            let eng = self.eng;
            for &i in &eng.param.det_at[depth] {
                self.buf.iter_mut().for_each(|c| *c = 0);
                for &(d, c) in &eng.param.coef[i] {
                    let x = eng.s.point(self.assign[eng.param.free[d]]);
                    self.ctx.axpy(&mut self.buf, c, x);
                }
                if !self.place_pivot(eng.param.pivots[i]) {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            self.unplace();
        }
        ok
    }

    fn unplace(&mut self) {
        let f = self.frames.pop().expect("frame");
        while self.placed.len() > f.placed {
            let v = self.placed.pop().unwrap();
            self.used[self.assign[v] as usize] -= 1;
            self.assign[v] = NONE;
        }
        self.basis.truncate(f.basis);
        if f.base_set && self.eng.cons.independence == Independence::Affine {
            self.base = None;
        }
    }

    fn rec(&mut self, depth: usize, visit: &mut dyn FnMut(&[u32]) -> bool) -> Flow {
        if depth == self.eng.param.free.len() {
            return if visit(&self.assign) { Flow::Stop } else { Flow::Continue };
        }
        let eng = self.eng;
        for id in eng.candidates(depth) {
            self.evals += 1;
            if self.evals > self.cap {
                return Flow::OutOfBudget;
            }
            if !self.place(depth, id) {
                continue;
            }
            let r = self.rec(depth + 1, visit);
            self.unplace();
            if r != Flow::Continue {
                return r;
            }
        }
        Flow::Continue
    }
}

/// All solutions found before the budget ran out.
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub solutions: Vec<Vec<u32>>,
    /// False when the budget stopped the walk early.
    pub complete: bool,
    pub evaluations: u64,
}

/// Every tuple of `S^k` annihilated by `A`, in walk order (canonical for seed 0).
pub fn enumerate_solutions(a: &FqMatrix, s: &PointSet, max_evaluations: u64, seed: u64) -> Result<Enumeration> {
    let eng = Engine::new(a, s, Constraints::default(), seed)?;
    let mut meter = Meter::new(max_evaluations);
    let mut solutions = Vec::new();
    let res = eng.for_each(&mut meter, &mut |t| {
        solutions.push(t.to_vec());
        false
    });
    let complete = match res {
        Ok(_) => true,
        Err(Error::BudgetExceeded(_)) => false,
        Err(e) => return Err(e),
    };
    Ok(Enumeration { solutions, complete, evaluations: meter.used() })
}

/// What each harvested solution must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Requirement {
    Any,
    MinDistinct(usize),
    /// At least two distinct entries.
    Nontrivial,
}

impl Requirement {
    fn holds(self, t: &[u32]) -> bool {
        let need = match self {
            Requirement::Any => return true,
            Requirement::MinDistinct(l) => l,
            Requirement::Nontrivial => 2,
        };
        let mut ids = t.to_vec();
        ids.sort_unstable();
        ids.dedup();
        ids.len() >= need
    }
}

#[derive(Clone, Debug)]
pub struct Harvest {
    pub list: Vec<Vec<u32>>,
    pub complete: bool,
}

/// Greedily finds pairwise disjoint solutions, removing each one's points
/// from `alive` before the next search.
pub fn harvest_within(
    a: &FqMatrix,
    s: &PointSet,
    alive: &mut Vec<bool>,
    count: usize,
    req: Requirement,
    meter: &mut Meter,
    seed: u64,
) -> Result<Harvest> {
    let mut list = Vec::new();
    while list.len() < count {
        let mask = Arc::new(alive.clone());
        let eng = Engine::new(a, s, Constraints::within(&mask, a.cols()), seed)?;
        match eng.find_first(meter, &|t| req.holds(t))? {
            Some(t) => {
                for &i in &t {
                    alive[i as usize] = false;
                }
                list.push(t);
            }
            None => return Ok(Harvest { list, complete: false }),
        }
    }
    Ok(Harvest { list, complete: true })
}

pub fn harvest_disjoint(
    a: &FqMatrix,
    s: &PointSet,
    count: usize,
    req: Requirement,
    meter: &mut Meter,
    seed: u64,
) -> Result<Harvest> {
    let mut alive = vec![true; s.len()];
    harvest_within(a, s, &mut alive, count, req, meter, seed)
}
