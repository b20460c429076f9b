//! GF(2) linear algebra over monomial coordinates.
//!
//! A list of polynomials becomes a matrix whose columns are monomials sorted
//! descending under a [`MonomialOrder`], so reduced row echelon form exposes
//! leading monomials directly. The two splitting procedures are thin layers
//! on top of that: reduce under a block order, then sort rows by which block
//! their pivot falls in.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::boolring::{BoolPoly, CubicIndex, Monomial, MonomialOrder, Var};
use crate::error::{Error, Result};

/// Dense bit-packed matrix over GF(2), row-major, 64 columns per word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    ncols: usize,
    rows: Vec<Vec<u64>>,
}

// Row-operation work (rows x words) above which reduction fans out.
const PARALLEL_WORK: usize = 1 << 16;

impl BitMatrix {
    pub fn new(ncols: usize) -> BitMatrix {
        BitMatrix {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> BitMatrix {
        let words = ncols.div_ceil(64);
        BitMatrix {
            ncols,
            rows: vec![vec![0; words]; nrows],
        }
    }

    pub fn identity(n: usize) -> BitMatrix {
        let mut m = BitMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    fn words(&self) -> usize {
        self.ncols.div_ceil(64)
    }

    pub fn push_zero_row(&mut self) -> usize {
        self.rows.push(vec![0; self.words()]);
        self.rows.len() - 1
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r][c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let bit = 1u64 << (c % 64);
        if value {
            self.rows[r][c / 64] |= bit;
        } else {
            self.rows[r][c / 64] &= !bit;
        }
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        self.rows[r][c / 64] ^= 1u64 << (c % 64);
    }

    /// Add row `src` to row `dst`, skipping the first `from_word` words
    /// (which must be zero in `src`).
    pub fn add_row(&mut self, src: usize, dst: usize, from_word: usize) {
        assert_ne!(src, dst);
        let (s, d) = if src < dst {
            let (a, b) = self.rows.split_at_mut(dst);
            (&a[src], &mut b[0])
        } else {
            let (a, b) = self.rows.split_at_mut(src);
            (&b[0], &mut a[dst])
        };
        debug_assert!(s[..from_word].iter().all(|&w| w == 0));
        for (x, y) in d[from_word..].iter_mut().zip(&s[from_word..]) {
            *x ^= y;
        }
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.rows[r]
    }

    /// Column indices of the set bits in row `r`, increasing.
    pub fn row_ones(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[r].iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(w * 64 + b)
                }
            })
        })
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.rows[r].iter().all(|&w| w == 0)
    }

    /// First set column of row `r`.
    pub fn leading_column(&self, r: usize) -> Option<usize> {
        self.rows[r]
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i * 64 + w.trailing_zeros() as usize)
    }

    /// Bring the matrix to reduced row echelon form in place, dropping zero
    /// rows. Returns the pivot column of each remaining row, increasing.
    ///
    /// Columns are scanned left to right; the pivot for a column is the
    /// first not-yet-used row with a 1 there, and it is cleared from every
    /// other row.
    pub fn rref(&mut self) -> Vec<usize> {
        let nrows = self.rows.len();
        let words = self.words();
        let mut pivots = Vec::new();
        let mut next = 0;
        let mut col = 0;
        while col < self.ncols && next < nrows {
            let w = col / 64;
            let bit = 1u64 << (col % 64);
            let Some(found) = (next..nrows).find(|&r| self.rows[r][w] & bit != 0) else {
                // Jump to the next column that is nonzero in some free row.
                let remaining = self.rows[next..]
                    .iter()
                    .fold(0u64, |acc, row| acc | row[w]);
                let higher = if col % 64 == 63 {
                    0
                } else {
                    remaining & (!0u64 << (col % 64 + 1))
                };
                col = if higher == 0 {
                    (w + 1) * 64
                } else {
                    w * 64 + higher.trailing_zeros() as usize
                };
                continue;
            };
            self.rows.swap(next, found);
            let (before, rest) = self.rows.split_at_mut(next);
            let (pivot, after) = rest.split_first_mut().expect("pivot row exists");
            let pivot = &pivot[w..];
            let clear = |row: &mut Vec<u64>| {
                if row[w] & bit != 0 {
                    for (a, b) in row[w..].iter_mut().zip(pivot) {
                        *a ^= b;
                    }
                }
            };
            if nrows * (words - w) >= PARALLEL_WORK {
                before.par_iter_mut().for_each(clear);
                after.par_iter_mut().for_each(clear);
            } else {
                before.iter_mut().for_each(clear);
                after.iter_mut().for_each(clear);
            }
            pivots.push(col);
            next += 1;
            col += 1;
        }
        self.rows.truncate(next);
        pivots
    }

    /// Rank over GF(2) (does not modify `self`).
    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Matrix-vector product where the vector's bit `j` is column `j`.
    /// Only valid for at most 128 columns.
    pub fn mul_vec(&self, x: u128) -> u128 {
        assert!(self.ncols <= 128);
        let mut out = 0u128;
        for (i, row) in self.rows.iter().enumerate() {
            let lo = row.first().copied().unwrap_or(0) as u128;
            let hi = row.get(1).copied().unwrap_or(0) as u128;
            let bits = lo | hi << 64;
            if (bits & x).count_ones() % 2 == 1 {
                out |= 1 << i;
            }
        }
        out
    }

    /// Inverse of a square matrix, or `None` when singular.
    pub fn inverse(&self) -> Option<BitMatrix> {
        let n = self.nrows();
        if n != self.ncols {
            return None;
        }
        let mut aug = BitMatrix::zeros(n, 2 * n);
        for r in 0..n {
            for c in self.row_ones(r) {
                aug.set(r, c, true);
            }
            aug.set(r, n + r, true);
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = BitMatrix::zeros(n, n);
        for r in 0..n {
            for c in aug.row_ones(r).filter(|&c| c >= n) {
                inv.set(r, c - n, true);
            }
        }
        Some(inv)
    }

    /// Basis of the right null space `{x : A x = 0}`, one vector per row.
    pub fn null_space(&self) -> BitMatrix {
        let mut reduced = self.clone();
        let pivots = reduced.rref();
        let mut is_pivot = vec![false; self.ncols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = BitMatrix::new(self.ncols);
        for free in (0..self.ncols).filter(|&c| !is_pivot[c]) {
            let r = basis.push_zero_row();
            basis.set(r, free, true);
            for (i, &p) in pivots.iter().enumerate() {
                if reduced.get(i, free) {
                    basis.set(r, p, true);
                }
            }
        }
        basis
    }
}

/// Columns of a polynomial matrix: distinct monomials sorted descending
/// under a monomial order, with a reverse index.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    order: MonomialOrder,
    columns: Vec<Monomial>,
    index: ColumnIndex,
}

#[derive(Clone, Debug)]
enum ColumnIndex {
    // Column of each monomial of degree ≤ 3, u32::MAX when absent.
    Dense(CubicIndex, Vec<u32>),
    Sparse(HashMap<Monomial, usize>),
}

impl MonomialBasis {
    pub fn new<I: IntoIterator<Item = Monomial>>(monomials: I, order: MonomialOrder) -> Self {
        let mut columns: Vec<Monomial> = monomials.into_iter().collect();
        order.sort_desc(&mut columns);
        columns.dedup();
        let index = ColumnIndex::Sparse(columns.iter().enumerate().map(|(i, &m)| (m, i)).collect());
        MonomialBasis {
            order,
            columns,
            index,
        }
    }

    /// Every monomial occurring in `polys`.
    fn of_polys(polys: &[BoolPoly], order: MonomialOrder) -> Self {
        let all = || polys.iter().flat_map(|p| p.terms());
        let Some(ix) = CubicIndex::covering(all()) else {
            return MonomialBasis::new(all().copied(), order);
        };
        let mut slot = vec![u32::MAX; ix.len()];
        let mut columns = Vec::new();
        for &m in all() {
            let s = &mut slot[ix.index(m)];
            if *s == u32::MAX {
                *s = 0;
                columns.push(m);
            }
        }
        order.sort_desc(&mut columns);
        for (c, &m) in columns.iter().enumerate() {
            slot[ix.index(m)] = c as u32;
        }
        MonomialBasis {
            order,
            columns,
            index: ColumnIndex::Dense(ix, slot),
        }
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn monomial(&self, column: usize) -> Monomial {
        self.columns[column]
    }

    pub fn column(&self, m: Monomial) -> Option<usize> {
        match &self.index {
            ColumnIndex::Dense(ix, slot) => {
                if m.degree() > 3 || m.mask().checked_shr(ix.vars() as u32).unwrap_or(0) != 0 {
                    return None;
                }
                let c = slot[ix.index(m)];
                (c != u32::MAX).then_some(c as usize)
            }
            ColumnIndex::Sparse(map) => map.get(&m).copied(),
        }
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.columns
    }
}

/// A list of polynomials as rows over a [`MonomialBasis`].
#[derive(Clone, Debug)]
pub struct GF2Matrix {
    basis: MonomialBasis,
    rows: BitMatrix,
}

impl GF2Matrix {
    /// Encode `polys` as rows; the basis is every monomial that occurs.
    pub fn from_polys(polys: &[BoolPoly], order: MonomialOrder) -> GF2Matrix {
        let basis = MonomialBasis::of_polys(polys, order);
        let mut rows = BitMatrix::zeros(polys.len(), basis.len());
        for (r, p) in polys.iter().enumerate() {
            for &m in p.terms() {
                let c = basis.column(m).expect("basis covers every term");
                rows.set(r, c, true);
            }
        }
        GF2Matrix { basis, rows }
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn bits(&self) -> &BitMatrix {
        &self.rows
    }

    pub(crate) fn bits_mut(&mut self) -> &mut BitMatrix {
        &mut self.rows
    }

    pub fn nrows(&self) -> usize {
        self.rows.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.basis.len()
    }

    pub fn row_poly(&self, r: usize) -> BoolPoly {
        let terms = self.rows.row_ones(r).map(|c| self.basis.monomial(c));
        match self.basis.order {
            // Column order is the canonical term order.
            MonomialOrder::DegreeFirst => BoolPoly::from_sorted_unchecked(terms.collect()),
            // Two canonically ordered runs: terms with v, then without.
            MonomialOrder::VariableFirst(v) => {
                let (with_v, without_v): (Vec<Monomial>, Vec<Monomial>) =
                    terms.partition(|m| m.contains(v));
                let mut merged = Vec::with_capacity(with_v.len() + without_v.len());
                let (mut i, mut j) = (0, 0);
                while i < with_v.len() && j < without_v.len() {
                    if with_v[i] > without_v[j] {
                        merged.push(with_v[i]);
                        i += 1;
                    } else {
                        merged.push(without_v[j]);
                        j += 1;
                    }
                }
                merged.extend_from_slice(&with_v[i..]);
                merged.extend_from_slice(&without_v[j..]);
                BoolPoly::from_sorted_unchecked(merged)
            }
        }
    }

    pub fn to_polys(&self) -> Vec<BoolPoly> {
        (0..self.nrows()).map(|r| self.row_poly(r)).collect()
    }

    /// Reduced row echelon form with zero rows removed. Each row's leading
    /// monomial under the basis order is its pivot.
    pub fn row_reduce(mut self) -> GF2Matrix {
        self.rows.rref();
        self
    }

    /// Leading monomial of each row (rows must be nonzero).
    pub fn leading_monomials(&self) -> Vec<Monomial> {
        (0..self.nrows())
            .map(|r| {
                let c = self.rows.leading_column(r).expect("nonzero row");
                self.basis.monomial(c)
            })
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.rows.rank()
    }
}

/// Encode `polys` under `order`.
pub fn to_matrix(polys: &[BoolPoly], order: MonomialOrder) -> GF2Matrix {
    GF2Matrix::from_polys(polys, order)
}

/// Reduced basis of the span of `polys` under `order`: one polynomial per
/// pivot, each with a distinct leading monomial, zero polynomials dropped.
pub fn reduce(polys: &[BoolPoly], order: MonomialOrder) -> Vec<BoolPoly> {
    to_matrix(polys, order).row_reduce().to_polys()
}

/// Reduced basis of the span, paired with each row's leading monomial.
pub fn reduce_with_leads(polys: &[BoolPoly], order: MonomialOrder) -> Vec<(Monomial, BoolPoly)> {
    let m = to_matrix(polys, order).row_reduce();
    m.leading_monomials().into_iter().zip(m.to_polys()).collect()
}

/// Dimension of the span of `polys`.
pub fn rank(polys: &[BoolPoly]) -> usize {
    to_matrix(polys, MonomialOrder::DegreeFirst).rank()
}

/// Split the span of `f` into polynomials whose leading monomial contains
/// `v` (first list) and polynomials free of `v` (second list).
///
/// Together the two lists span the same space as `f`; the first list has
/// pairwise distinct leading monomials under `VariableFirst(v)`.
pub fn split_variable(f: &[BoolPoly], v: Var) -> (Vec<BoolPoly>, Vec<BoolPoly>) {
    let mut with_v = Vec::new();
    let mut without_v = Vec::new();
    for (lead, p) in reduce_with_leads(f, MonomialOrder::VariableFirst(v)) {
        if lead.contains(v) {
            with_v.push(p);
        } else {
            without_v.push(p);
        }
    }
    (with_v, without_v)
}

/// Split the span of `f` (degree at most 3) into a degree ≤ 2 part and a
/// part whose members all have a cubic leading monomial.
///
/// The first list spans every polynomial of degree ≤ 2 in the span of `f`.
pub fn split_deg23(f: &[BoolPoly]) -> Result<(Vec<BoolPoly>, Vec<BoolPoly>)> {
    if let Some(d) = f.iter().filter_map(|p| p.degree()).max() {
        if d > 3 {
            return Err(Error::DegreeOverflow { degree: d, cap: 3 });
        }
    }
    let mut quadratic = Vec::new();
    let mut cubic = Vec::new();
    for (lead, p) in reduce_with_leads(f, MonomialOrder::DegreeFirst) {
        if lead.degree() == 3 {
            cubic.push(p);
        } else {
            quadratic.push(p);
        }
    }
    Ok((quadratic, cubic))
}

/// True when `f` and `g` span the same GF(2) vector space.
pub fn span_equal(f: &[BoolPoly], g: &[BoolPoly]) -> bool {
    let rf = rank(f);
    if rf != rank(g) {
        return false;
    }
    let union: Vec<BoolPoly> = f.iter().chain(g).cloned().collect();
    rank(&union) == rf
}

/// True when every member of `g` lies in the span of `f`.
pub fn span_contains(f: &[BoolPoly], g: &[BoolPoly]) -> bool {
    let union: Vec<BoolPoly> = f.iter().chain(g).cloned().collect();
    rank(&union) == rank(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> BoolPoly {
        s.parse().unwrap()
    }

    fn ps(v: &[&str]) -> Vec<BoolPoly> {
        v.iter().map(|s| p(s)).collect()
    }

    fn matrix_rows(m: &GF2Matrix) -> Vec<Vec<u8>> {
        (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| m.bits().get(r, c) as u8).collect())
            .collect()
    }

    #[test]
    fn encoding() {
        let m = to_matrix(&ps(&["x1 + x2"]), MonomialOrder::DegreeFirst);
        assert_eq!(m.basis().monomials(), &[Monomial::var(1), Monomial::var(2)]);
        assert_eq!(matrix_rows(&m), vec![vec![1, 1]]);

        let empty = to_matrix(&[], MonomialOrder::DegreeFirst);
        assert_eq!((empty.nrows(), empty.ncols()), (0, 0));

        let m = to_matrix(&ps(&["x1*x2 + x3", "x3"]), MonomialOrder::VariableFirst(1));
        assert_eq!(
            m.basis().monomials(),
            &[Monomial::from_vars([1, 2]).unwrap(), Monomial::var(3)]
        );
        assert_eq!(matrix_rows(&m), vec![vec![1, 1], vec![0, 1]]);
    }

    fn bits(rows: &[&[u8]]) -> BitMatrix {
        let mut m = BitMatrix::zeros(rows.len(), rows[0].len());
        for (r, row) in rows.iter().enumerate() {
            for (c, &b) in row.iter().enumerate() {
                m.set(r, c, b == 1);
            }
        }
        m
    }

    #[test]
    fn rref_examples() {
        let mut m = bits(&[&[1, 1], &[1, 1]]);
        m.rref();
        assert_eq!(m, bits(&[&[1, 1]]));

        let mut m = bits(&[&[1, 1, 0], &[1, 0, 1]]);
        assert_eq!(m.rref(), vec![0, 1]);
        assert_eq!(m, bits(&[&[1, 0, 1], &[0, 1, 1]]));

        let mut m = BitMatrix::identity(70);
        m.rref();
        assert_eq!(m, BitMatrix::identity(70));
    }

    #[test]
    fn rref_skips_empty_words() {
        let mut m = BitMatrix::zeros(3, 200);
        m.set(0, 150, true);
        m.set(1, 150, true);
        m.set(1, 199, true);
        m.set(2, 10, true);
        assert_eq!(m.rref(), vec![10, 150, 199]);
    }

    #[test]
    fn inverse_and_null_space() {
        let a = bits(&[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]);
        let inv = a.inverse().unwrap();
        for x in 0..8u128 {
            assert_eq!(inv.mul_vec(a.mul_vec(x)), x);
        }
        assert!(bits(&[&[1, 1], &[1, 1]]).inverse().is_none());
        let ns = bits(&[&[1, 1, 0]]).null_space();
        assert_eq!(ns.nrows(), 2);
        for r in 0..2 {
            let v = ns.row_words(r)[0] as u128;
            assert_eq!(bits(&[&[1, 1, 0]]).mul_vec(v), 0);
        }
    }

    #[test]
    fn split_variable_examples() {
        let (fv, fnv) = split_variable(&ps(&["x1*x2 + x3", "x1*x2 + x2"]), 1);
        assert_eq!(fv.len(), 1);
        assert!(fv[0].contains_var(1));
        assert_eq!(fnv, ps(&["x2 + x3"]));

        assert_eq!(
            split_variable(&ps(&["x2 + x3"]), 1),
            (vec![], ps(&["x2 + x3"]))
        );
        assert_eq!(split_variable(&ps(&["x1"]), 1), (ps(&["x1"]), vec![]));
    }

    #[test]
    fn split_deg23_examples() {
        let (f2, f3) = split_deg23(&ps(&["x1*x2*x3 + x1*x2", "x1*x2*x3 + x3"])).unwrap();
        assert_eq!(f2, ps(&["x1*x2 + x3"]));
        assert_eq!(f3.len(), 1);
        assert!(span_equal(
            &[f2.clone(), f3.clone()].concat(),
            &ps(&["x1*x2*x3 + x1*x2", "x1*x2 + x3"])
        ));
        assert_eq!(split_deg23(&ps(&["x1 + 1"])).unwrap(), (ps(&["x1 + 1"]), vec![]));
        assert_eq!(
            split_deg23(&ps(&["x1*x2*x3"])).unwrap(),
            (vec![], ps(&["x1*x2*x3"]))
        );
        assert!(split_deg23(&ps(&["x1*x2*x3*x4"])).is_err());
    }

    #[test]
    fn span_equality() {
        assert!(span_equal(&ps(&["x1", "x2"]), &ps(&["x1 + x2", "x2"])));
        assert!(!span_equal(&ps(&["x1"]), &ps(&["x2"])));
        assert!(span_equal(&[], &[BoolPoly::zero()]));
    }
}
