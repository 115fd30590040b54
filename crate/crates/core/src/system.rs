//! The balanced system `A x = 0` and its classification: balancedness,
//! non-degeneracy, column equivalence classes, type (RC), the irreducible
//! block decomposition and the theorem clauses that follow from them.
//!
//! Classification runs on the *core* of the system: zero columns are removed
//! (they are free variables) and the rows are replaced by the nonzero rows of
//! the RREF. Column indices reported anywhere in a profile are always indices
//! of the original matrix.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::{rref, FqMatrix};
use crate::error::{Error, Result};
use crate::field::{Elem, FieldCtx};

/// A maximal set of columns that are nonzero multiples of one vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColumnClass {
    pub members: Vec<usize>,
    /// The smallest member's column, scaled so its first nonzero entry is 1.
    pub representative: Vec<Elem>,
    /// `column_j = scalars[i] * representative` for `j = members[i]`.
    pub scalars: Vec<Elem>,
    pub sums_to_zero: bool,
}

impl ColumnClass {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn scalar_of(&self, j: usize) -> Option<Elem> {
        self.members.iter().position(|&x| x == j).map(|i| self.scalars[i])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColumnClasses {
    /// Ordered by smallest member.
    pub classes: Vec<ColumnClass>,
    /// Columns that are entirely zero; they belong to no class.
    pub zero_columns: Vec<usize>,
    #[serde(skip)]
    class_of: BTreeMap<usize, usize>,
}

impl ColumnClasses {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of(&self, j: usize) -> Option<usize> {
        self.class_of.get(&j).copied()
    }

    pub fn singleton_count(&self) -> usize {
        self.classes.iter().filter(|c| c.size() == 1).count()
    }

    /// The scalars `(alpha, beta)` with `col_j1 = alpha v`, `col_j2 = beta v`.
    pub fn pair_scalars(&self, j1: usize, j2: usize) -> Result<(Elem, Elem)> {
        match (self.class_of(j1), self.class_of(j2)) {
            (Some(c1), Some(c2)) if c1 == c2 && j1 != j2 => {
                let c = &self.classes[c1];
                Ok((c.scalar_of(j1).unwrap(), c.scalar_of(j2).unwrap()))
            }
            _ => Err(Error::NotEquivalent(j1, j2)),
        }
    }

    /// Every 2-subset of every class, in lexicographic order.
    pub fn within_class_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for c in &self.classes {
            for (a, &j1) in c.members.iter().enumerate() {
                for &j2 in &c.members[a + 1..] {
                    out.push((j1, j2));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Column classes of `m`, where `columns[j]` is the original index of column `j`.
fn classes_of(m: &FqMatrix, columns: &[usize]) -> ColumnClasses {
    let f = m.ctx();
    let mut groups: Vec<(Vec<Elem>, Vec<usize>, Vec<Elem>)> = Vec::new();
    let mut index: BTreeMap<Vec<Elem>, usize> = BTreeMap::new();
    let mut zero_columns = Vec::new();
    for (jj, &j) in columns.iter().enumerate() {
        let col = m.col(jj);
        let Some(&lead) = col.iter().find(|&&a| a != 0) else {
            zero_columns.push(j);
            continue;
        };
        let norm = f.vec_scale(f.inv(lead), &col);
        let g = *index.entry(norm.clone()).or_insert_with(|| {
            groups.push((norm, Vec::new(), Vec::new()));
            groups.len() - 1
        });
        groups[g].1.push(j);
        groups[g].2.push(lead);
    }
    let mut class_of = BTreeMap::new();
    let classes: Vec<ColumnClass> = groups
        .into_iter()
        .enumerate()
        .map(|(ci, (rep, members, scalars))| {
            for &j in &members {
                class_of.insert(j, ci);
            }
            let total = scalars.iter().fold(0, |acc, &s| f.add(acc, s));
            ColumnClass { members, representative: rep, scalars, sums_to_zero: total == 0 }
        })
        .collect();
    ColumnClasses { classes, zero_columns, class_of }
}

/// One boolean per theorem clause.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TheoremFlags {
    /// No class of size 2 sums to zero.
    pub a_i: bool,
    /// Every class sums to zero and `k >= 3`.
    pub a_ii: bool,
    /// No class sums to zero and `l = m + 1`.
    pub b_i: bool,
    /// Every class sums to zero.
    pub b_ii: bool,
    /// `l = m + 1` (base case for generic solutions).
    pub lemma_i: bool,
    /// Every class sums to zero (base case for generic solutions).
    pub lemma_ii: bool,
}

impl TheoremFlags {
    pub fn moderate(&self) -> bool {
        self.a_i || self.a_ii
    }

    pub fn temperate(&self) -> bool {
        self.b_i || self.b_ii
    }

    fn masked(self, on: bool) -> Self {
        if on {
            self
        } else {
            TheoremFlags::default()
        }
    }

    /// `"(i)"`, `"(ii)"`, `"(i),(ii)"` or `"none"` for the A clauses.
    pub fn label_a(&self) -> &'static str {
        label(self.a_i, self.a_ii)
    }

    pub fn label_b(&self) -> &'static str {
        label(self.b_i, self.b_ii)
    }
}

fn label(i: bool, ii: bool) -> &'static str {
    match (i, ii) {
        (true, true) => "(i),(ii)",
        (true, false) => "(i)",
        (false, true) => "(ii)",
        (false, false) => "none",
    }
}

/// Classification of a system with independent rows and no zero columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubsystemProfile {
    /// Original column indices, increasing.
    pub columns: Vec<usize>,
    /// Independent rows (RREF), restricted to `columns`.
    pub rows: Vec<Vec<Elem>>,
    pub k: usize,
    pub rank: usize,
    pub ell: usize,
    pub classes: ColumnClasses,
    pub singleton_classes: usize,
    pub balanced: bool,
    pub type_rc: bool,
    pub irreducible: bool,
    /// Type (RC) and irreducible: the standing hypotheses of the theorems.
    pub situation: bool,
    /// Raw clause values from the class data.
    pub clauses: TheoremFlags,
    /// Clauses that hold together with the standing hypotheses.
    pub applicable: TheoremFlags,
}

impl SubsystemProfile {
    pub fn matrix(&self, ctx: &FieldCtx) -> FqMatrix {
        if self.rows.is_empty() {
            FqMatrix::zeros(ctx, 0, self.k)
        } else {
            FqMatrix::from_rows(ctx, &self.rows).expect("rows are well formed")
        }
    }

    /// Position of an original column index within `columns`.
    pub fn local(&self, j: usize) -> Option<usize> {
        self.columns.binary_search(&j).ok()
    }
}

/// Outcome of a moderate/temperate determination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Every irreducible block satisfies an applicable theorem clause.
    Proven,
    /// The rowspace forces two variables to be equal, so no shape exists.
    Refuted,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SystemProfile {
    pub m: usize,
    pub k: usize,
    pub rank: usize,
    pub balanced: bool,
    pub independent_rows: bool,
    pub zero_columns: Vec<usize>,
    pub nondegenerate: bool,
    /// The whole system after removing zero columns and dependent rows.
    pub core: SubsystemProfile,
    /// Irreducible blocks of the core, ordered by smallest column.
    pub blocks: Vec<SubsystemProfile>,
    /// Pairs `(i, j)` with `x_i = x_j` implied by the system.
    pub forced_equalities: Vec<(usize, usize)>,
    pub moderate: Verdict,
    pub temperate: Verdict,
}

impl SystemProfile {
    pub fn type_rc(&self) -> bool {
        self.core.type_rc
    }

    pub fn irreducible(&self) -> bool {
        self.core.irreducible
    }

    pub fn classes(&self) -> &ColumnClasses {
        &self.core.classes
    }

    pub fn ell(&self) -> usize {
        self.core.ell
    }
}

/// Connected components of the column support graph of the RREF rows.
fn components(rows: &[Vec<Elem>], k: usize) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for row in rows {
        let support: Vec<usize> = (0..k).filter(|&j| row[j] != 0).collect();
        for w in support.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for j in 0..k {
        let r = find(&mut parent, j);
        groups.entry(r).or_default().push(j);
    }
    groups.into_values().collect()
}

/// Profiles a system whose rows are independent RREF rows and whose columns are nonzero.
/// Class data is read from `class_src`, a matrix with the same rowspace whose
/// columns are `columns`.
fn profile_core(
    ctx: &FieldCtx,
    rows: Vec<Vec<Elem>>,
    columns: Vec<usize>,
    class_src: Option<&FqMatrix>,
) -> SubsystemProfile {
    let k = columns.len();
    let m = if rows.is_empty() {
        FqMatrix::zeros(ctx, 0, k)
    } else {
        FqMatrix::from_rows(ctx, &rows).unwrap()
    };
    let classes = classes_of(class_src.unwrap_or(&m), &columns);
    debug_assert!(classes.zero_columns.is_empty());
    let balanced = (0..m.rows()).all(|i| m.row(i).iter().fold(0, |a, &b| ctx.add(a, b)) == 0);
    let rank = rows.len();
    let ell = classes.len();
    let singletons = classes.singleton_count();
    let type_rc = balanced && singletons <= 1;
    let irreducible = k > 0 && components(&rows, k).len() == 1;
    let all_zero = classes.classes.iter().all(|c| c.sums_to_zero);
    let none_zero = classes.classes.iter().all(|c| !c.sums_to_zero);
    let clauses = TheoremFlags {
        a_i: classes.classes.iter().all(|c| c.size() != 2 || !c.sums_to_zero),
        a_ii: all_zero && k >= 3,
        b_i: none_zero && ell == rank + 1,
        b_ii: all_zero,
        lemma_i: ell == rank + 1,
        lemma_ii: all_zero,
    };
    let situation = type_rc && irreducible;
    SubsystemProfile {
        columns,
        rows,
        k,
        rank,
        ell,
        singleton_classes: singletons,
        classes,
        balanced,
        type_rc,
        irreducible,
        situation,
        applicable: clauses.masked(situation),
        clauses,
    }
}

/// A coefficient matrix with its cached classification.
#[derive(Clone, Debug)]
pub struct SystemMatrix {
    a: FqMatrix,
    profile: SystemProfile,
}

impl SystemMatrix {
    pub fn new(a: FqMatrix) -> Result<Self> {
        if a.rows() == 0 || a.cols() == 0 {
            return Err(Error::InvalidArgument("a system needs m >= 1 and k >= 1".into()));
        }
        let profile = validate(&a);
        Ok(SystemMatrix { a, profile })
    }

    pub fn from_i64_rows(ctx: &FieldCtx, rows: &[Vec<i64>]) -> Result<Self> {
        SystemMatrix::new(FqMatrix::from_i64_rows(ctx, rows)?)
    }

    pub fn matrix(&self) -> &FqMatrix {
        &self.a
    }

    pub fn ctx(&self) -> &FieldCtx {
        self.a.ctx()
    }

    pub fn profile(&self) -> &SystemProfile {
        &self.profile
    }

    pub fn k(&self) -> usize {
        self.a.cols()
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn rank(&self) -> usize {
        self.profile.rank
    }

    pub fn classes(&self) -> &ColumnClasses {
        &self.profile.core.classes
    }

    /// The independent RREF rows of the system (same rowspace as `A`).
    pub fn reduced(&self) -> FqMatrix {
        let r = rref(&self.a);
        r.rref
    }
}

/// Computes the full profile of `A`.
pub fn validate(a: &FqMatrix) -> SystemProfile {
    let ctx = a.ctx();
    let k = a.cols();
    let r = rref(a);
    let balanced = (0..a.rows()).all(|i| a.row(i).iter().fold(0, |s, &x| ctx.add(s, x)) == 0);
    let zero_columns: Vec<usize> = (0..k).filter(|&j| a.col(j).iter().all(|&x| x == 0)).collect();
    let core_cols: Vec<usize> = (0..k).filter(|j| !zero_columns.contains(j)).collect();
    let core_rows: Vec<Vec<Elem>> = r
        .rref
        .to_rows()
        .into_iter()
        .map(|row| core_cols.iter().map(|&j| row[j]).collect())
        .collect();
    let core = profile_core(ctx, core_rows.clone(), core_cols.clone(), Some(&a.select_columns(&core_cols)));
    let blocks: Vec<SubsystemProfile> = components(&core_rows, core_cols.len())
        .into_iter()
        .map(|comp| {
            let rows: Vec<Vec<Elem>> = core_rows
                .iter()
                .filter(|row| comp.iter().any(|&c| row[c] != 0))
                .map(|row| comp.iter().map(|&c| row[c]).collect())
                .collect();
            let cols: Vec<usize> = comp.iter().map(|&c| core_cols[c]).collect();
            let src = a.select_columns(&cols);
            profile_core(ctx, rows, cols, Some(&src))
        })
        .collect();
    let mut forced = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let mut e = vec![0; k];
            e[i] = 1;
            e[j] = ctx.neg(1);
            if r.reduce(&e).iter().all(|&x| x == 0) {
                forced.push((i, j));
            }
        }
    }
    let moderate = if !forced.is_empty() {
        Verdict::Refuted
    } else if balanced && blocks.iter().all(|b| b.applicable.moderate()) {
        Verdict::Proven
    } else {
        Verdict::Unknown
    };
    let temperate = if balanced && blocks.iter().all(|b| b.applicable.temperate()) {
        Verdict::Proven
    } else {
        Verdict::Unknown
    };
    SystemProfile {
        m: a.rows(),
        k,
        rank: r.rank,
        balanced,
        independent_rows: r.rank == a.rows(),
        nondegenerate: r.rank == a.rows() && zero_columns.is_empty(),
        zero_columns,
        core,
        blocks,
        forced_equalities: forced,
        moderate,
        temperate,
    }
}

/// Column classes of the whole matrix (zero columns listed separately).
pub fn column_classes(a: &FqMatrix) -> ColumnClasses {
    let cols: Vec<usize> = (0..a.cols()).collect();
    classes_of(a, &cols)
}

pub fn is_type_rc(a: &FqMatrix) -> bool {
    validate(a).core.type_rc
}

/// Finest partition of the nonzero columns over which the rowspace splits.
pub fn decompose_irreducible(a: &FqMatrix) -> Result<Vec<SubsystemProfile>> {
    let p = validate(a);
    if !p.nondegenerate {
        return Err(Error::Degenerate(format!(
            "rank {} with {} rows and zero columns {:?}",
            p.rank, p.m, p.zero_columns
        )));
    }
    Ok(p.blocks)
}

/// Raw clause flags for the whole core together with the per-block applicability.
pub fn classify_theorems(a: &FqMatrix) -> (TheoremFlags, Vec<TheoremFlags>) {
    let p = validate(a);
    (p.core.applicable, p.blocks.iter().map(|b| b.applicable).collect())
}

/// Whether appending `b` to `A` destroys the proportionality of columns `j1`, `j2`.
pub fn breaks_pair(classes: &ColumnClasses, ctx: &FieldCtx, b: &[Elem], j1: usize, j2: usize) -> Result<bool> {
    let (alpha, beta) = classes.pair_scalars(j1, j2)?;
    let lhs = ctx.mul(beta, b[j1]);
    let rhs = ctx.mul(alpha, b[j2]);
    Ok(lhs != rhs)
}

/// Whether appending `b` keeps every column class intact.
pub fn preserves_classes(classes: &ColumnClasses, ctx: &FieldCtx, b: &[Elem]) -> bool {
    classes
        .within_class_pairs()
        .into_iter()
        .all(|(j1, j2)| !breaks_pair(classes, ctx, b, j1, j2).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rank, rowspace_contains};
    use proptest::prelude::*;

    fn sys(q: u64, rows: &[Vec<i64>]) -> SystemMatrix {
        SystemMatrix::from_i64_rows(&FieldCtx::of_order(q).unwrap(), rows).unwrap()
    }

    fn members(c: &ColumnClasses) -> Vec<Vec<usize>> {
        c.classes.iter().map(|c| c.members.clone()).collect()
    }

    #[test]
    fn validate_examples() {
        let p = sys(5, &[vec![1, 1, -2]]).profile().clone();
        assert!(p.balanced && p.nondegenerate);
        assert!(!sys(5, &[vec![1, 1, -1]]).profile().balanced);
        let d = sys(5, &[vec![1, -1, 0], vec![2, -2, 0]]).profile().clone();
        assert!(!d.nondegenerate && !d.independent_rows);
        assert_eq!(d.zero_columns, vec![2]);
    }

    #[test]
    fn classes_of_w() {
        let w = sys(7, &[vec![1, -1, -1, 1, 0], vec![1, 0, -2, 0, 1]]);
        assert_eq!(members(w.classes()), vec![vec![0], vec![1, 3], vec![2], vec![4]]);
        assert_eq!(w.classes().singleton_count(), 3);
        assert!(!w.profile().type_rc());
    }

    #[test]
    fn classes_of_star2() {
        let s = sys(5, &[vec![1, 1, 0, 0, -2], vec![0, 0, 1, 1, -2]]);
        assert_eq!(members(s.classes()), vec![vec![0, 1], vec![2, 3], vec![4]]);
        assert_eq!(s.profile().ell(), 3);
        assert!(s.profile().type_rc());
        assert!(s.profile().irreducible());
        let t = s.profile().core.applicable;
        assert!(t.a_i && t.b_i && !t.a_ii && !t.b_ii);
        assert_eq!(s.profile().moderate, Verdict::Proven);
        assert_eq!(s.profile().temperate, Verdict::Proven);
    }

    #[test]
    fn single_class_sum() {
        let s = sys(3, &[vec![1, 1]]);
        assert_eq!(members(s.classes()), vec![vec![0, 1]]);
        assert!(!s.classes().classes[0].sums_to_zero);
    }

    #[test]
    fn three_ap_is_rc() {
        let s = sys(5, &[vec![1, -2, 1]]);
        assert_eq!(members(s.classes()), vec![vec![0, 1, 2]]);
        assert!(s.profile().type_rc());
    }

    #[test]
    fn representative_and_scalars() {
        let s = sys(5, &[vec![2, 4, -1], vec![4, 3, -2]]);
        let c = &s.classes().classes[0];
        assert_eq!(c.representative, vec![1, 2]);
        assert_eq!(c.scalars, vec![2, 4, 4]);
    }

    #[test]
    fn decompose_examples() {
        let ctx = FieldCtx::of_order(5).unwrap();
        let a = FqMatrix::from_i64_rows(&ctx, &[vec![1, -1, 0, 0], vec![0, 0, 1, -1]]).unwrap();
        let b: Vec<_> = decompose_irreducible(&a).unwrap().into_iter().map(|b| b.columns).collect();
        assert_eq!(b, vec![vec![0, 1], vec![2, 3]]);
        let a = FqMatrix::from_i64_rows(&ctx, &[vec![1, -1, 1, -1], vec![1, -1, -1, 1]]).unwrap();
        let b: Vec<_> = decompose_irreducible(&a).unwrap().into_iter().map(|b| b.columns).collect();
        assert_eq!(b, vec![vec![0, 1], vec![2, 3]]);
        let a = FqMatrix::from_i64_rows(&ctx, &[vec![1, 1, 0, 0, -2], vec![0, 0, 1, 1, -2]]).unwrap();
        assert_eq!(decompose_irreducible(&a).unwrap().len(), 1);
        let a = FqMatrix::from_i64_rows(&ctx, &[vec![1, -1, 0]]).unwrap();
        assert!(decompose_irreducible(&a).is_err());
    }

    #[test]
    fn breaks_pair_examples() {
        let s = sys(5, &[vec![1, 1, -2]]);
        let f = s.ctx();
        let c = s.classes();
        assert!(!breaks_pair(c, f, &[1, 1, 3], 0, 1).unwrap());
        assert!(breaks_pair(c, f, &[1, 0, 4], 0, 1).unwrap());
        assert!(!breaks_pair(c, f, &[0, 0, 0], 0, 1).unwrap());
        let w = sys(7, &[vec![1, -1, -1, 1, 0], vec![1, 0, -2, 0, 1]]);
        assert_eq!(breaks_pair(w.classes(), w.ctx(), &[0; 5], 0, 2), Err(Error::NotEquivalent(0, 2)));
    }

    #[test]
    fn preserves_examples() {
        let s = sys(7, &[vec![1, 1, 0, 0, -2], vec![0, 0, 1, 1, -2]]);
        let f = s.ctx();
        for i in 0..2 {
            assert!(preserves_classes(s.classes(), f, s.matrix().row(i)));
        }
        let b: Vec<Elem> = [1, 1, 2, 2, -6].iter().map(|&x| f.from_i64(x)).collect();
        assert!(preserves_classes(s.classes(), f, &b));
        assert!(!preserves_classes(s.classes(), f, &[1, 0, 0, 0, 0]));
    }

    #[test]
    fn x1_eq_x2_is_refuted_but_temperate() {
        let s = sys(5, &[vec![1, -1]]);
        assert_eq!(s.profile().forced_equalities, vec![(0, 1)]);
        assert_eq!(s.profile().moderate, Verdict::Refuted);
        assert_eq!(s.profile().temperate, Verdict::Proven);
    }

    /// Whether the rowspace splits over `parts`: the sum of the dimensions of
    /// the rowspace intersected with each part's coordinates equals the rank.
    fn splits(a: &FqMatrix, parts: &[Vec<usize>]) -> bool {
        let ctx = a.ctx();
        let k = a.cols();
        let r = rank(a);
        let q = ctx.q() as u64;
        let span: Vec<Vec<Elem>> =
            (0..q.pow(a.rows() as u32)).map(|i| a.vec_mul(&ctx.vec_from_index(a.rows(), i).unwrap().0)).collect();
        let mut total = 0;
        for part in parts {
            let inside: Vec<Vec<Elem>> = span
                .iter()
                .filter(|v| (0..k).all(|j| part.contains(&j) || v[j] == 0))
                .cloned()
                .collect();
            let m = FqMatrix::from_rows(ctx, &inside).unwrap();
            total += rank(&m);
        }
        total == r
    }

    fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
        if items.is_empty() {
            return vec![vec![]];
        }
        let (first, rest) = (items[0], &items[1..]);
        let mut out = Vec::new();
        for p in set_partitions(rest) {
            for i in 0..p.len() {
                let mut np = p.clone();
                np[i].insert(0, first);
                out.push(np);
            }
            let mut np = p.clone();
            np.insert(0, vec![first]);
            out.push(np);
        }
        out
    }

    fn arb_system() -> impl Strategy<Value = FqMatrix> {
        (prop::sample::select(vec![2u64, 3, 5]), 1usize..4, 2usize..7).prop_flat_map(|(q, m, k)| {
            prop::collection::vec(0..q as i64, m * (k - 1)).prop_map(move |raw| {
                let ctx = FieldCtx::of_order(q).unwrap();
                let rows: Vec<Vec<i64>> = (0..m)
                    .map(|i| {
                        let mut r: Vec<i64> = raw[i * (k - 1)..(i + 1) * (k - 1)].to_vec();
                        r.push(-r.iter().sum::<i64>());
                        r
                    })
                    .collect();
                FqMatrix::from_i64_rows(&ctx, &rows).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(120))]

        #[test]
        fn decomposition_is_finest(a in arb_system()) {
            let p = validate(&a);
            prop_assume!(p.nondegenerate);
            let blocks: Vec<Vec<usize>> = p.blocks.iter().map(|b| b.columns.clone()).collect();
            prop_assert!(splits(&a, &blocks));
            let cols: Vec<usize> = (0..a.cols()).collect();
            let best = set_partitions(&cols).into_iter().filter(|pt| splits(&a, pt)).map(|pt| pt.len()).max();
            prop_assert_eq!(best, Some(blocks.len()));
        }

        #[test]
        fn two_classes_property(a in arb_system()) {
            let p = validate(&a);
            prop_assume!(p.nondegenerate && p.irreducible() && p.rank >= 2);
            prop_assert!(p.ell() >= p.rank + 1);
            let ctx = a.ctx();
            let q = ctx.q() as u64;
            for idx in 1..q.pow(a.rows() as u32) {
                let v = a.vec_mul(&ctx.vec_from_index(a.rows(), idx).unwrap().0);
                if v.iter().all(|&x| x == 0) { continue; }
                let used: std::collections::BTreeSet<usize> =
                    (0..a.cols()).filter(|&j| v[j] != 0).map(|j| p.classes().class_of(j).unwrap()).collect();
                prop_assert!(used.len() >= 2);
            }
        }

        #[test]
        fn breaks_matches_append(a in arb_system(), raw in prop::collection::vec(0i64..5, 6)) {
            let p = validate(&a);
            let ctx = a.ctx();
            let b: Vec<Elem> = (0..a.cols()).map(|j| ctx.from_i64(raw[j])).collect();
            let bigger = column_classes(&a.with_row(&b).unwrap());
            for (j1, j2) in p.classes().within_class_pairs() {
                let still = bigger.class_of(j1).is_some() && bigger.class_of(j1) == bigger.class_of(j2);
                prop_assert_eq!(breaks_pair(p.classes(), ctx, &b, j1, j2).unwrap(), !still);
            }
        }

        #[test]
        fn flags_invariant_under_row_ops(a in arb_system(), c in 1i64..5, perm_seed in any::<u64>()) {
            let ctx = a.ctx().clone();
            let p = validate(&a);
            // add c * row 0 to every other row, scale row 0
            let mut rows = a.to_rows();
            let cc = ctx.from_i64(c);
            prop_assume!(cc != 0);
            let r0 = rows[0].clone();
            for r in rows.iter_mut().skip(1) {
                ctx.axpy(r, cc, &r0);
            }
            rows[0] = ctx.vec_scale(cc, &r0);
            let b = FqMatrix::from_rows(&ctx, &rows).unwrap();
            let pb = validate(&b);
            prop_assert_eq!(p.core.clauses, pb.core.clauses);
            prop_assert_eq!(p.core.applicable, pb.core.applicable);
            // permute columns
            let k = a.cols();
            let mut perm: Vec<usize> = (0..k).collect();
            let mut s = perm_seed;
            for i in (1..k).rev() {
                let j = (s % (i as u64 + 1)) as usize;
                s /= i as u64 + 1;
                perm.swap(i, j);
            }
            let pc = validate(&a.select_columns(&perm));
            prop_assert_eq!(p.core.clauses, pc.core.clauses);
            prop_assert_eq!(p.core.applicable, pc.core.applicable);
            prop_assert_eq!(p.blocks.len(), pc.blocks.len());
        }

        #[test]
        fn forced_equalities_are_in_rowspace(a in arb_system()) {
            let p = validate(&a);
            let ctx = a.ctx();
            for &(i, j) in &p.forced_equalities {
                let mut e = vec![0; a.cols()];
                e[i] = 1;
                e[j] = ctx.neg(1);
                prop_assert!(rowspace_contains(&a, &e).unwrap());
            }
        }
    }
}
