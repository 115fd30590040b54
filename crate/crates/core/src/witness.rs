//! Classification of tuples: balanced annihilators, the solution predicates
//! (non-trivial, shape, generic, linearly generic), equality patterns and
//! disjointness.

use serde::Serialize;

use crate::algebra::{affine_dim, augmented, kernel_basis, rank, span_contains, FqMatrix};
use crate::error::{Error, Result};
use crate::field::{Elem, FieldCtx, FqVector};

/// Basis of the balanced relations `b` with `sum b_j x_j = 0` and `sum b_j = 0`.
pub fn ann_bal(ctx: &FieldCtx, tuple: &[FqVector]) -> Result<Vec<Vec<Elem>>> {
    let basis: Vec<Vec<Elem>> =
        kernel_basis(&augmented(ctx, tuple)?).into_iter().map(|v| v.0).collect();
    let n = tuple[0].dim();
    for b in &basis {
        let bal = b.iter().fold(0, |s, &c| ctx.add(s, c));
        if bal != 0 || ctx.combine(b, tuple, n).iter().any(|&c| c != 0) {
            return Err(Error::Internal("balanced annihilator check failed".into()));
        }
    }
    Ok(basis)
}

/// Basis of all linear relations `b` with `sum b_j x_j = 0`.
pub fn linear_annihilator(ctx: &FieldCtx, tuple: &[FqVector]) -> Result<Vec<Vec<Elem>>> {
    let n = tuple.first().ok_or(Error::EmptyTuple)?.dim();
    Ok(kernel_basis(&FqMatrix::from_columns(ctx, n, tuple)?).into_iter().map(|v| v.0).collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TupleFlags {
    pub solution: bool,
    pub nontrivial: bool,
    pub shape: bool,
    pub generic: bool,
    pub linearly_generic: bool,
}

fn rows_of(a: &FqMatrix) -> Vec<Vec<Elem>> {
    a.to_rows()
}

/// Genericity checked by subspace inclusion and, for balanced `A`, by the
/// affine dimension count. The two must agree.
fn generic_checks(a: &FqMatrix, tuple: &[FqVector], ann: &[Vec<Elem>], adim: usize) -> Result<bool> {
    let ctx = a.ctx();
    let by_inclusion = span_contains(ctx, &rows_of(a), ann, a.cols());
    let balanced = (0..a.rows()).all(|i| a.row(i).iter().fold(0, |s, &x| ctx.add(s, x)) == 0);
    if balanced {
        let r = rank(a);
        let by_dim = adim + r + 1 == tuple.len();
        if by_dim != by_inclusion {
            return Err(Error::Internal(format!(
                "generic tests disagree: dim aff {adim}, rank {r}, inclusion {by_inclusion}"
            )));
        }
    }
    Ok(by_inclusion)
}

/// All predicates of a `k`-tuple against the system `A`.
pub fn classify_tuple(a: &FqMatrix, tuple: &[FqVector]) -> Result<TupleFlags> {
    Ok(SolutionTuple::new(a, tuple.to_vec())?.flags)
}

/// A `k`-tuple with its balanced annihilator, affine dimension and predicates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolutionTuple {
    pub tuple: Vec<FqVector>,
    pub ann_bal: Vec<Vec<Elem>>,
    pub affine_dim: usize,
    pub flags: TupleFlags,
}

impl SolutionTuple {
    pub fn new(a: &FqMatrix, tuple: Vec<FqVector>) -> Result<Self> {
        let ctx = a.ctx();
        if tuple.len() != a.cols() {
            return Err(Error::DimensionMismatch { expected: a.cols(), got: tuple.len() });
        }
        let n = tuple.first().ok_or(Error::EmptyTuple)?.dim();
        let ann = ann_bal(ctx, &tuple)?;
        let adim = affine_dim(ctx, &tuple)?;
        if adim + ann.len() + 1 != tuple.len() {
            return Err(Error::Internal("affine rank-nullity identity failed".into()));
        }
        let solution = a.annihilates(&tuple, n);
        let nontrivial = tuple.iter().any(|x| x != &tuple[0]);
        let shape = distinct_count(&tuple) == tuple.len();
        let generic = solution && generic_checks(a, &tuple, &ann, adim)?;
        let linearly_generic = solution
            && span_contains(ctx, &rows_of(a), &linear_annihilator(ctx, &tuple)?, a.cols());
        Ok(SolutionTuple {
            tuple,
            ann_bal: ann,
            affine_dim: adim,
            flags: TupleFlags { solution, nontrivial, shape, generic, linearly_generic },
        })
    }

    pub fn k(&self) -> usize {
        self.tuple.len()
    }

    pub fn n(&self) -> usize {
        self.tuple[0].dim()
    }
}

/// The partition of `[k]` by equality of entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SetPartition {
    /// Parts ordered by smallest member.
    pub parts: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn lambda(&self) -> usize {
        self.parts.len()
    }

    /// `labels[j]` is the index of the part containing `j`.
    pub fn labels(&self) -> Vec<usize> {
        let k = self.parts.iter().map(|p| p.len()).sum();
        let mut out = vec![0; k];
        for (i, p) in self.parts.iter().enumerate() {
            for &j in p {
                out[j] = i;
            }
        }
        out
    }

    pub fn same_part(&self, a: usize, b: usize) -> bool {
        let l = self.labels();
        l[a] == l[b]
    }
}

pub fn partition_pattern(tuple: &[FqVector]) -> SetPartition {
    let mut parts: Vec<Vec<usize>> = Vec::new();
    let mut reps: Vec<&FqVector> = Vec::new();
    for (j, x) in tuple.iter().enumerate() {
        match reps.iter().position(|r| *r == x) {
            Some(i) => parts[i].push(j),
            None => {
                reps.push(x);
                parts.push(vec![j]);
            }
        }
    }
    SetPartition { parts }
}

pub fn distinct_count(tuple: &[FqVector]) -> usize {
    let mut v: Vec<&FqVector> = tuple.iter().collect();
    v.sort();
    v.dedup();
    v.len()
}

/// Whether the two tuples share no point.
pub fn disjoint(t1: &[FqVector], t2: &[FqVector]) -> bool {
    t1.iter().all(|x| !t2.contains(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rowspace_contains;
    use proptest::prelude::*;

    fn f5() -> FieldCtx {
        FieldCtx::of_order(5).unwrap()
    }

    fn pts(v: &[&[u16]]) -> Vec<FqVector> {
        v.iter().map(|x| FqVector(x.to_vec())).collect()
    }

    /// All balanced `b` in `F_q^k` annihilating the tuple, by enumeration.
    fn ann_enum(ctx: &FieldCtx, tuple: &[FqVector]) -> Vec<Vec<Elem>> {
        let k = tuple.len();
        let n = tuple[0].dim();
        (0..ctx.space_size(k).unwrap())
            .map(|i| ctx.vec_from_index(k, i).unwrap().0)
            .filter(|b| {
                b.iter().fold(0, |s, &c| ctx.add(s, c)) == 0
                    && ctx.combine(b, tuple, n).iter().all(|&c| c == 0)
            })
            .collect()
    }

    #[test]
    fn ann_bal_examples() {
        let ctx = f5();
        let v = pts(&[&[1, 2], &[1, 2], &[1, 2]]);
        assert_eq!(ann_bal(&ctx, &v).unwrap().len(), 2);
        let line = pts(&[&[0, 0], &[1, 0], &[2, 0]]);
        let basis = ann_bal(&ctx, &line).unwrap();
        assert_eq!(basis.len(), 1);
        let all = ann_enum(&ctx, &line);
        assert_eq!(all.len(), 5);
        assert!(all.contains(&vec![1, 3, 1]));
        let bm = FqMatrix::from_rows(&ctx, &basis).unwrap();
        for b in &all {
            assert!(rowspace_contains(&bm, b).unwrap());
        }
        let tri = pts(&[&[0, 0], &[1, 0], &[0, 1]]);
        assert!(ann_bal(&ctx, &tri).unwrap().is_empty());
    }

    #[test]
    fn classify_examples() {
        let ctx = f5();
        let a = FqMatrix::from_i64_rows(&ctx, &[vec![1, 1, -2]]).unwrap();
        let triv = classify_tuple(&a, &pts(&[&[3], &[3], &[3]])).unwrap();
        assert!(triv.solution && !triv.nontrivial && !triv.shape && !triv.generic);
        let good = classify_tuple(&a, &pts(&[&[0], &[2], &[1]])).unwrap();
        assert!(good.solution && good.nontrivial && good.shape && good.generic);
        // brute force: Ann_bal of (0,2,1) is exactly the span of (1,1,-2)
        let all = ann_enum(&ctx, &pts(&[&[0], &[2], &[1]]));
        assert_eq!(all.len(), 5);
        for b in all {
            assert!(rowspace_contains(&a, &b).unwrap());
        }
        let ones = classify_tuple(&a, &pts(&[&[1], &[1], &[1]])).unwrap();
        assert!(ones.solution && !ones.generic);
        assert!(classify_tuple(&a, &pts(&[&[1], &[1]])).is_err());
    }

    #[test]
    fn linearly_generic_example() {
        let ctx = f5();
        let a = FqMatrix::from_i64_rows(&ctx, &[vec![1, -2, 1]]).unwrap();
        let ap = pts(&[&[1, 0], &[1, 1], &[1, 2]]);
        let f = classify_tuple(&a, &ap).unwrap();
        assert!(f.solution && f.generic && f.linearly_generic);
        let through0 = pts(&[&[0, 0], &[1, 0], &[2, 0]]);
        let f = classify_tuple(&a, &through0).unwrap();
        assert!(f.generic && !f.linearly_generic);
    }

    #[test]
    fn patterns_and_disjointness() {
        let t = pts(&[&[1], &[2], &[1]]);
        let p = partition_pattern(&t);
        assert_eq!(p.parts, vec![vec![0, 2], vec![1]]);
        assert_eq!(p.lambda(), 2);
        assert_eq!(partition_pattern(&pts(&[&[1], &[2], &[3]])).lambda(), 3);
        assert_eq!(partition_pattern(&pts(&[&[1], &[1], &[1]])).lambda(), 1);
        let t1 = pts(&[&[0], &[2], &[1]]);
        assert!(disjoint(&t1, &pts(&[&[3], &[3], &[3]])));
        assert!(!disjoint(&t1, &pts(&[&[1], &[4], &[4]])));
        assert!(!disjoint(&t1, &t1));
    }

    fn random_solution(ctx: &FieldCtx, a: &FqMatrix, n: usize, raw: &[u16]) -> Vec<FqVector> {
        // free coordinates from raw, pivots solved
        let r = crate::algebra::rref(a);
        let k = a.cols();
        let mut cols = vec![vec![0u16; n]; k];
        let mut it = raw.iter().cycle();
        for f in r.free_columns() {
            for c in cols[f].iter_mut() {
                *c = it.next().unwrap() % ctx.q() as u16;
            }
        }
        for (i, &p) in r.pivots.iter().enumerate() {
            let mut v = vec![0u16; n];
            for f in r.free_columns() {
                ctx.axpy(&mut v, ctx.neg(r.rref.get(i, f)), &cols[f].clone());
            }
            cols[p] = v;
        }
        cols.into_iter().map(FqVector).collect()
    }

    proptest! {
        #[test]
        fn lemma_identity_and_cor_equivalence(
            q in prop::sample::select(vec![2u64, 3, 5, 7]),
            m in 1usize..3, k in 2usize..6, n in 1usize..4,
            coeffs in prop::collection::vec(0i64..7, 15),
            raw in prop::collection::vec(any::<u16>(), 1..30),
        ) {
            let ctx = FieldCtx::of_order(q).unwrap();
            let rows: Vec<Vec<i64>> = (0..m).map(|i| {
                let mut r: Vec<i64> = (0..k - 1).map(|j| coeffs[(i * 5 + j) % 15]).collect();
                r.push(-r.iter().sum::<i64>());
                r
            }).collect();
            let a = FqMatrix::from_i64_rows(&ctx, &rows).unwrap();
            let t = random_solution(&ctx, &a, n, &raw);
            let st = SolutionTuple::new(&a, t).unwrap();
            prop_assert!(st.flags.solution);
            prop_assert_eq!(st.affine_dim + st.ann_bal.len(), k - 1);
            // generic implies shape unless the rowspace forces an equality
            if st.flags.generic {
                let forced = (0..k).any(|i| (i + 1..k).any(|j| {
                    let mut e = vec![0; k];
                    e[i] = 1;
                    e[j] = ctx.neg(1);
                    rowspace_contains(&a, &e).unwrap()
                }));
                prop_assert!(forced || st.flags.shape);
            }
        }
    }
}
