//! Exact linear algebra over `F_q`: reduced row echelon form, rank, kernels,
//! rowspace membership and affine dimension.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Elem, FieldCtx, FqVector};

/// A dense row-major matrix over `F_q`.
#[derive(Clone, PartialEq, Eq)]
pub struct FqMatrix {
    ctx: FieldCtx,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl fmt::Debug for FqMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{:?}", self.ctx, self.to_rows())
    }
}

impl FqMatrix {
    pub fn zeros(ctx: &FieldCtx, rows: usize, cols: usize) -> Self {
        FqMatrix { ctx: ctx.clone(), rows, cols, data: vec![0; rows * cols] }
    }

    pub fn new(ctx: &FieldCtx, rows: usize, cols: usize, data: Vec<Elem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        if let Some(&bad) = data.iter().find(|&&a| !ctx.is_valid(a as u32)) {
            return Err(Error::InvalidArgument(format!("entry {bad} is not an element of {ctx:?}")));
        }
        Ok(FqMatrix { ctx: ctx.clone(), rows, cols, data })
    }

    /// Builds a matrix from rows of canonical encodings. An empty row list
    /// gives a `0 x cols` matrix, where `cols` must be supplied separately via
    /// [`FqMatrix::zeros`].
    pub fn from_rows(ctx: &FieldCtx, rows: &[Vec<Elem>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        FqMatrix::new(ctx, rows.len(), cols, data)
    }

    /// Builds a matrix from signed integers reduced through the prime subfield.
    pub fn from_i64_rows(ctx: &FieldCtx, rows: &[Vec<i64>]) -> Result<Self> {
        let conv: Vec<Vec<Elem>> =
            rows.iter().map(|r| r.iter().map(|&v| ctx.from_i64(v)).collect()).collect();
        FqMatrix::from_rows(ctx, &conv)
    }

    /// The matrix whose columns are the given vectors.
    pub fn from_columns(ctx: &FieldCtx, n: usize, cols: &[FqVector]) -> Result<Self> {
        let mut m = FqMatrix::zeros(ctx, n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: c.dim() });
            }
            for i in 0..n {
                m.set(i, j, c.0[i]);
            }
        }
        Ok(m)
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Elem> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Elem>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&a| a == 0)
    }

    pub fn transpose(&self) -> FqMatrix {
        let mut t = FqMatrix::zeros(&self.ctx, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> FqMatrix {
        let mut m = FqMatrix::zeros(&self.ctx, self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                m.set(i, jj, self.get(i, j));
            }
        }
        m
    }

    pub fn select_rows(&self, rows: &[usize]) -> FqMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        FqMatrix { ctx: self.ctx.clone(), rows: rows.len(), cols: self.cols, data }
    }

    /// Appends a row, returning the enlarged matrix.
    pub fn with_row(&self, row: &[Elem]) -> Result<FqMatrix> {
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: row.len() });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(row);
        Ok(FqMatrix { ctx: self.ctx.clone(), rows: self.rows + 1, cols: self.cols, data })
    }

    /// `M v` for a column vector `v` of length `cols`.
    pub fn mul_vec(&self, v: &[Elem]) -> Vec<Elem> {
        (0..self.rows).map(|i| self.ctx.dot(self.row(i), v)).collect()
    }

    /// `b M` for a row vector `b` of length `rows`.
    pub fn vec_mul(&self, b: &[Elem]) -> Vec<Elem> {
        let mut acc = vec![0; self.cols];
        for (i, &c) in b.iter().enumerate() {
            self.ctx.axpy(&mut acc, c, self.row(i));
        }
        acc
    }

    /// Applies the system to a tuple of points: row `i` gives `sum_j a_ij x_j`.
    pub fn apply(&self, tuple: &[FqVector], n: usize) -> Vec<Vec<Elem>> {
        (0..self.rows).map(|i| self.ctx.combine(self.row(i), tuple, n)).collect()
    }

    /// Whether the tuple is annihilated by every row.
    pub fn annihilates(&self, tuple: &[FqVector], n: usize) -> bool {
        self.apply(tuple, n).iter().all(|r| r.iter().all(|&a| a == 0))
    }
}

/// Unique reduced row echelon form with its pivot columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RrefResult {
    /// The nonzero rows of the RREF, one per pivot.
    pub rref: FqMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

impl RrefResult {
    /// Non-pivot columns in increasing order.
    pub fn free_columns(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.rref.cols()];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..self.rref.cols()).filter(|&j| !is_pivot[j]).collect()
    }

    /// Reduces `b` against the RREF rows; the result is zero iff `b` is in the rowspace.
    pub fn reduce(&self, b: &[Elem]) -> Vec<Elem> {
        let f = self.rref.ctx();
        let mut r = b.to_vec();
        for (i, &p) in self.pivots.iter().enumerate() {
            let c = r[p];
            if c != 0 {
                f.axpy(&mut r, f.neg(c), self.rref.row(i));
            }
        }
        r
    }
}

/// Gauss-Jordan elimination to the unique RREF. Zero rows are dropped.
pub fn rref(m: &FqMatrix) -> RrefResult {
    let f = m.ctx().clone();
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<Vec<Elem>> = m.to_rows();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, piv);
        let inv = f.inv(a[r][c]);
        for x in a[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let prow = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let factor = f.neg(row[c]);
                f.axpy(row, factor, &prow);
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    let mut out = FqMatrix::zeros(&f, r, cols);
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out.set(i, j, v);
        }
    }
    RrefResult { rref: out, rank: pivots.len(), pivots }
}

pub fn rank(m: &FqMatrix) -> usize {
    rref(m).rank
}

/// Basis of `{v : M v = 0}`: one vector per free column, in increasing order,
/// with a 1 at its free column and zeros at the other free columns.
pub fn kernel_basis(m: &FqMatrix) -> Vec<FqVector> {
    let f = m.ctx();
    let r = rref(m);
    let mut basis = Vec::new();
    for free in r.free_columns() {
        let mut v = vec![0; m.cols()];
        v[free] = 1;
        for (i, &p) in r.pivots.iter().enumerate() {
            v[p] = f.neg(r.rref.get(i, free));
        }
        debug_assert!(m.mul_vec(&v).iter().all(|&x| x == 0));
        basis.push(FqVector(v));
    }
    basis
}

/// Whether `b` is a linear combination of the rows of `M`.
pub fn rowspace_contains(m: &FqMatrix, b: &[Elem]) -> Result<bool> {
    if b.len() != m.cols() {
        return Err(Error::DimensionMismatch { expected: m.cols(), got: b.len() });
    }
    Ok(rref(m).reduce(b).iter().all(|&x| x == 0))
}

/// Whether every vector of `sub` lies in the span of `sup` (both lists of rows).
pub fn span_contains(ctx: &FieldCtx, sup: &[Vec<Elem>], sub: &[Vec<Elem>], width: usize) -> bool {
    let big = if sup.is_empty() {
        FqMatrix::zeros(ctx, 0, width)
    } else {
        FqMatrix::from_rows(ctx, sup).expect("rows of equal width")
    };
    let r = rref(&big);
    sub.iter().all(|b| r.reduce(b).iter().all(|&x| x == 0))
}

/// Whether the given vectors are linearly independent.
pub fn linearly_independent(ctx: &FieldCtx, vs: &[Vec<Elem>]) -> bool {
    if vs.is_empty() {
        return true;
    }
    match FqMatrix::from_rows(ctx, vs) {
        Ok(m) => rank(&m) == vs.len(),
        Err(_) => false,
    }
}

/// The `(n+1) x k` matrix with a row of ones above the columns `x_1..x_k`.
pub fn augmented(ctx: &FieldCtx, tuple: &[FqVector]) -> Result<FqMatrix> {
    let first = tuple.first().ok_or(Error::EmptyTuple)?;
    let n = first.dim();
    let k = tuple.len();
    let mut m = FqMatrix::zeros(ctx, n + 1, k);
    for (j, x) in tuple.iter().enumerate() {
        if x.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.dim() });
        }
        m.set(0, j, 1);
        for i in 0..n {
            m.set(i + 1, j, x.0[i]);
        }
    }
    Ok(m)
}

/// Dimension of the affine hull of the tuple's points.
pub fn affine_dim(ctx: &FieldCtx, tuple: &[FqVector]) -> Result<usize> {
    Ok(rank(&augmented(ctx, tuple)?) - 1)
}

/// Dimension of the linear span of the tuple's points.
pub fn linear_dim(ctx: &FieldCtx, tuple: &[FqVector]) -> Result<usize> {
    let n = tuple.first().ok_or(Error::EmptyTuple)?.dim();
    Ok(rank(&FqMatrix::from_columns(ctx, n, tuple)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(q: u64) -> FieldCtx {
        FieldCtx::of_order(q).unwrap()
    }

    /// Every vector in the span of the rows, by enumerating coefficient vectors.
    fn span_enum(m: &FqMatrix) -> Vec<Vec<Elem>> {
        let ctx = m.ctx();
        let q = ctx.q() as u64;
        let total = q.pow(m.rows() as u32);
        let mut out: Vec<Vec<Elem>> = (0..total)
            .map(|idx| {
                let c = ctx.vec_from_index(m.rows(), idx).unwrap();
                m.vec_mul(&c.0)
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn rref_single_row() {
        let ctx = f(5);
        let m = FqMatrix::from_i64_rows(&ctx, &[vec![1, 1, -2]]).unwrap();
        let r = rref(&m);
        assert_eq!(r.rref.to_rows(), vec![vec![1, 1, 3]]);
        assert_eq!(r.rank, 1);
        assert_eq!(r.pivots, vec![0]);
    }

    #[test]
    fn rref_two_rows() {
        let ctx = f(5);
        let m = FqMatrix::from_i64_rows(&ctx, &[vec![1, 4, 1, 4], vec![1, 4, 4, 1]]).unwrap();
        let r = rref(&m);
        assert_eq!(r.rref.to_rows(), vec![vec![1, 4, 0, 0], vec![0, 0, 1, 4]]);
        assert_eq!(r.rank, 2);
        assert_eq!(span_enum(&m), span_enum(&r.rref));
    }

    #[test]
    fn rref_zero() {
        let ctx = f(3);
        let r = rref(&FqMatrix::zeros(&ctx, 2, 3));
        assert_eq!(r.rank, 0);
        assert!(r.pivots.is_empty());
    }

    #[test]
    fn kernel_single_row_matches_enumeration() {
        let ctx = f(5);
        let m = FqMatrix::from_i64_rows(&ctx, &[vec![1, 1, -2]]).unwrap();
        let basis = kernel_basis(&m);
        assert_eq!(basis.len(), 2);
        let bm = FqMatrix::from_rows(&ctx, &basis.iter().map(|v| v.0.clone()).collect::<Vec<_>>())
            .unwrap();
        let mut brute: Vec<Vec<Elem>> = (0..125)
            .map(|i| ctx.vec_from_index(3, i).unwrap().0)
            .filter(|v| m.mul_vec(v)[0] == 0)
            .collect();
        brute.sort();
        assert_eq!(span_enum(&bm), brute);
    }

    #[test]
    fn kernel_edge_cases() {
        let ctx = f(5);
        let id = FqMatrix::from_rows(&ctx, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        assert!(kernel_basis(&id).is_empty());
        let z = FqMatrix::zeros(&ctx, 1, 2);
        assert_eq!(kernel_basis(&z), vec![FqVector(vec![1, 0]), FqVector(vec![0, 1])]);
    }

    #[test]
    fn rowspace_examples() {
        let ctx = f(5);
        let m = FqMatrix::from_i64_rows(&ctx, &[vec![1, 1, -2]]).unwrap();
        let conv = |v: &[i64]| v.iter().map(|&x| ctx.from_i64(x)).collect::<Vec<_>>();
        assert!(rowspace_contains(&m, &conv(&[2, 2, -4])).unwrap());
        assert!(!rowspace_contains(&m, &conv(&[1, 0, -1])).unwrap());
        assert!(rowspace_contains(&m, &[0, 0, 0]).unwrap());
        assert!(rowspace_contains(&m, &[0, 0]).is_err());
        // oracle: the five scalar multiples
        let multiples: Vec<Vec<Elem>> = (0..5).map(|c| ctx.vec_scale(c, m.row(0))).collect();
        assert!(!multiples.contains(&conv(&[1, 0, -1])));
    }

    #[test]
    fn affine_dim_examples() {
        let ctx = f(5);
        let v = |a: u16, b: u16| FqVector(vec![a, b]);
        assert_eq!(affine_dim(&ctx, &[v(1, 2), v(1, 2), v(1, 2)]).unwrap(), 0);
        assert_eq!(affine_dim(&ctx, &[v(0, 0), v(1, 0), v(2, 0)]).unwrap(), 1);
        assert_eq!(affine_dim(&ctx, &[v(0, 0), v(1, 0), v(0, 1)]).unwrap(), 2);
        assert_eq!(affine_dim(&ctx, &[]).unwrap_err(), Error::EmptyTuple);
    }

    fn arb_matrix() -> impl Strategy<Value = FqMatrix> {
        (prop::sample::select(vec![2u64, 3, 4, 5, 7, 9]), 1usize..5, 1usize..6).prop_flat_map(
            |(q, r, c)| {
                prop::collection::vec(0..q as u16, r * c).prop_map(move |data| {
                    FqMatrix::new(&FieldCtx::of_order(q).unwrap(), r, c, data).unwrap()
                })
            },
        )
    }

    proptest! {
        #[test]
        fn rref_idempotent(m in arb_matrix()) {
            let r1 = rref(&m);
            let r2 = rref(&r1.rref);
            prop_assert_eq!(r1, r2);
        }

        #[test]
        fn rank_nullity(m in arb_matrix()) {
            let k = kernel_basis(&m);
            prop_assert_eq!(rank(&m) + k.len(), m.cols());
            for v in &k {
                prop_assert!(m.mul_vec(&v.0).iter().all(|&x| x == 0));
            }
        }

        #[test]
        fn rowspace_matches_enumeration(m in arb_matrix(), seed in any::<u64>()) {
            let span = span_enum(&m);
            let ctx = m.ctx();
            let total = ctx.space_size(m.cols()).unwrap();
            let b = ctx.vec_from_index(m.cols(), seed % total).unwrap();
            prop_assert_eq!(rowspace_contains(&m, &b.0).unwrap(), span.binary_search(&b.0).is_ok());
            for s in span.iter().take(20) {
                prop_assert!(rowspace_contains(&m, s).unwrap());
            }
        }

        #[test]
        fn affine_rank_nullity(q in prop::sample::select(vec![2u64, 3, 5]), n in 1usize..4,
                               k in 1usize..6, raw in prop::collection::vec(any::<u16>(), 30)) {
            let ctx = FieldCtx::of_order(q).unwrap();
            let tuple: Vec<FqVector> = (0..k)
                .map(|j| FqVector((0..n).map(|i| raw[j * n + i] % q as u16).collect()))
                .collect();
            let ann = kernel_basis(&augmented(&ctx, &tuple).unwrap());
            prop_assert_eq!(affine_dim(&ctx, &tuple).unwrap() + ann.len(), k - 1);
        }
    }
}
