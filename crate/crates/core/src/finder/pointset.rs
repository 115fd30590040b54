use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::field::{Elem, FieldCtx, FqVector};

/// Largest `q^n` for which membership uses a dense lookup table.
const DENSE_LIMIT: u64 = 1 << 22;

#[derive(Clone, Debug)]
enum Lookup {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

/// A finite subset of `F_q^n` in insertion order. Points are addressed by
/// their position (`u32` id).
#[derive(Clone, Debug)]
pub struct PointSet {
    ctx: FieldCtx,
    n: usize,
    coords: Vec<Elem>,
    keys: Vec<u64>,
    lookup: Lookup,
}

impl PartialEq for PointSet {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.n == other.n && self.coords == other.coords
    }
}

impl PointSet {
    pub fn new(ctx: &FieldCtx, n: usize, points: Vec<FqVector>) -> Result<Self> {
        let space = ctx.space_size(n);
        let mut lookup = match space {
            Some(sz) if sz <= DENSE_LIMIT => Lookup::Dense(vec![u32::MAX; sz as usize]),
            _ => Lookup::Sparse(HashMap::with_capacity(points.len())),
        };
        let mut coords = Vec::with_capacity(points.len() * n);
        let mut keys = Vec::with_capacity(points.len());
        for (id, p) in points.iter().enumerate() {
            if p.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.dim() });
            }
            let key = ctx.vec_index(&p.0)?;
            let id = id as u32;
            let fresh = match &mut lookup {
                Lookup::Dense(t) => {
                    let slot = &mut t[key as usize];
                    let fresh = *slot == u32::MAX;
                    *slot = id;
                    fresh
                }
                Lookup::Sparse(m) => m.insert(key, id).is_none(),
            };
            if !fresh {
                return Err(Error::InvalidArgument(format!("duplicate point {:?}", p.0)));
            }
            coords.extend_from_slice(&p.0);
            keys.push(key);
        }
        Ok(PointSet { ctx: ctx.clone(), n, coords, keys, lookup })
    }

    /// All of `F_q^n` in index order.
    pub fn full_space(ctx: &FieldCtx, n: usize) -> Result<Self> {
        let total = ctx
            .space_size(n)
            .filter(|&t| t <= DENSE_LIMIT)
            .ok_or_else(|| Error::InvalidArgument(format!("F_{}^{n} is too large to list", ctx.q())))?;
        let pts = (0..total).map(|i| ctx.vec_from_index(n, i)).collect::<Result<Vec<_>>>()?;
        PointSet::new(ctx, n, pts)
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    #[inline]
    pub fn point(&self, id: u32) -> &[Elem] {
        let i = id as usize * self.n;
        &self.coords[i..i + self.n]
    }

    pub fn vector(&self, id: u32) -> FqVector {
        FqVector(self.point(id).to_vec())
    }

    pub fn vectors(&self, ids: &[u32]) -> Vec<FqVector> {
        ids.iter().map(|&i| self.vector(i)).collect()
    }

    pub fn to_vectors(&self) -> Vec<FqVector> {
        (0..self.len() as u32).map(|i| self.vector(i)).collect()
    }

    pub fn key(&self, id: u32) -> u64 {
        self.keys[id as usize]
    }

    /// Id of the point with the given coordinates, if present.
    #[inline]
    pub fn id_of(&self, v: &[Elem]) -> Option<u32> {
        let q = self.ctx.q() as u64;
        let mut key = 0u64;
        for &c in v {
            key = key.wrapping_mul(q).wrapping_add(c as u64);
        }
        match &self.lookup {
            Lookup::Dense(t) => t.get(key as usize).copied().filter(|&x| x != u32::MAX),
            Lookup::Sparse(m) => m.get(&key).copied(),
        }
    }

    pub fn contains(&self, v: &[Elem]) -> bool {
        self.id_of(v).is_some()
    }

    /// The points whose ids satisfy `keep`, in the same relative order.
    pub fn filter(&self, keep: impl Fn(u32) -> bool) -> PointSet {
        let pts = (0..self.len() as u32).filter(|&i| keep(i)).map(|i| self.vector(i)).collect();
        PointSet::new(&self.ctx, self.n, pts).expect("subset of a valid set")
    }

    /// The ids of `self` that correspond to `ids` in a subset `sub` built by [`PointSet::filter`].
    pub fn translate_from(&self, sub: &PointSet, ids: &[u32]) -> Vec<u32> {
        ids.iter().map(|&i| self.id_of(sub.point(i)).expect("subset point")).collect()
    }
}
