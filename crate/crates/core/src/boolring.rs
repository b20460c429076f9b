//! Exact arithmetic in the Boolean quotient ring `F2[x0, x1, ...] / (xi^2 + xi)`.
//!
//! A [`Monomial`] is a squarefree product of variables, stored as a bit mask
//! (bit `i` set means `xi` divides the monomial), so at most [`MAX_VARS`]
//! variables are addressable. A [`BoolPoly`] is a set of distinct monomials;
//! addition is symmetric difference and multiplication uses `xi * xi = xi`.
//!
//! Polynomials keep their monomials sorted descending under the graded
//! lexicographic order (see [`MonomialOrder::DegreeFirst`]), so two
//! polynomials are equal exactly when their term lists are equal.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Variable index. `Var` `i` prints as `xi`.
pub type Var = usize;

/// Number of addressable variables.
pub const MAX_VARS: usize = 128;

/// A squarefree monomial; the empty product is the constant 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial(u128);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn var(v: Var) -> Monomial {
        assert!(v < MAX_VARS, "variable index {v} out of range");
        Monomial(1u128 << v)
    }

    pub fn try_var(v: Var) -> Result<Monomial> {
        if v < MAX_VARS {
            Ok(Monomial(1u128 << v))
        } else {
            Err(Error::VariableOutOfRange(v))
        }
    }

    /// Product of the given variables (repeats collapse, `x*x = x`).
    pub fn from_vars<I: IntoIterator<Item = Var>>(vars: I) -> Result<Monomial> {
        let mut mask = 0u128;
        for v in vars {
            mask |= Monomial::try_var(v)?.0;
        }
        Ok(Monomial(mask))
    }

    pub const fn from_mask(mask: u128) -> Monomial {
        Monomial(mask)
    }

    pub const fn mask(self) -> u128 {
        self.0
    }

    pub const fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_one(self) -> bool {
        self.0 == 0
    }

    pub const fn contains(self, v: Var) -> bool {
        v < MAX_VARS && (self.0 >> v) & 1 == 1
    }

    /// True when `self` divides `other`.
    pub const fn divides(self, other: Monomial) -> bool {
        self.0 & !other.0 == 0
    }

    /// `other / self`, assuming `self` divides `other`.
    pub const fn quotient_of(self, other: Monomial) -> Monomial {
        Monomial(other.0 & !self.0)
    }

    pub const fn without(self, v: Var) -> Monomial {
        Monomial(self.0 & !(1u128 << v))
    }

    /// Variables in increasing index order.
    pub fn vars(self) -> impl Iterator<Item = Var> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let v = rest.trailing_zeros() as Var;
                rest &= rest - 1;
                Some(v)
            }
        })
    }

    /// Value of the monomial at a point given as a mask of the variables set to 1.
    pub const fn eval_mask(self, point: u128) -> bool {
        self.0 & !point == 0
    }
}

impl Mul for Monomial {
    type Output = Monomial;
    // x·x = x, so the product is the union of the variable sets.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Monomial) -> Monomial {
        Monomial(self.0 | rhs.0)
    }
}

/// Graded lexicographic order with `x0 > x1 > x2 > ...`.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.reverse_bits().cmp(&other.0.reverse_bits()))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        for (i, v) in self.vars().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "x{v}")?;
        }
        Ok(())
    }
}

/// A total order on monomials used to pick leading terms and matrix columns.
///
/// Both orders are graded lexicographic inside each block, with lower
/// variable indices ranking higher.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MonomialOrder {
    /// Monomials containing the variable form the top block.
    VariableFirst(Var),
    /// Higher degree first.
    DegreeFirst,
}

impl MonomialOrder {
    /// A key whose natural ordering agrees with this monomial order.
    pub fn key(self, m: Monomial) -> (bool, u32, u128) {
        let block = match self {
            MonomialOrder::VariableFirst(v) => m.contains(v),
            MonomialOrder::DegreeFirst => false,
        };
        (block, m.0.count_ones(), m.0.reverse_bits())
    }

    pub fn cmp(self, a: Monomial, b: Monomial) -> Ordering {
        self.key(a).cmp(&self.key(b))
    }

    /// Sort descending (largest first).
    pub fn sort_desc(self, monomials: &mut [Monomial]) {
        monomials.sort_unstable_by_key(|&m| std::cmp::Reverse(self.key(m)));
    }
}

/// A Boolean polynomial in algebraic normal form.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BoolPoly {
    // Distinct, sorted descending by `Monomial::cmp`.
    terms: Vec<Monomial>,
}

impl BoolPoly {
    pub fn zero() -> BoolPoly {
        BoolPoly { terms: Vec::new() }
    }

    pub fn one() -> BoolPoly {
        BoolPoly {
            terms: vec![Monomial::ONE],
        }
    }

    pub fn var(v: Var) -> BoolPoly {
        BoolPoly {
            terms: vec![Monomial::var(v)],
        }
    }

    pub fn monomial(m: Monomial) -> BoolPoly {
        BoolPoly { terms: vec![m] }
    }

    /// Sum of the given monomials; repeated monomials cancel in pairs.
    pub fn from_monomials<I: IntoIterator<Item = Monomial>>(monomials: I) -> BoolPoly {
        let mut terms: Vec<Monomial> = monomials.into_iter().collect();
        canonicalize(&mut terms);
        BoolPoly { terms }
    }

    /// Wrap terms already distinct and sorted descending.
    pub(crate) fn from_sorted_unchecked(terms: Vec<Monomial>) -> BoolPoly {
        debug_assert!(terms.windows(2).all(|w| w[0] > w[1]));
        BoolPoly { terms }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<Monomial> {
        self.terms
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].is_one()
    }

    /// Degree, or `None` for the zero polynomial (degree minus infinity).
    pub fn degree(&self) -> Option<usize> {
        // Sorted by degree first, so the head has maximal degree.
        self.terms.first().map(|m| m.degree())
    }

    /// Mask of all variables occurring in the polynomial.
    pub fn support(&self) -> u128 {
        self.terms.iter().fold(0, |acc, m| acc | m.mask())
    }

    pub fn contains_var(&self, v: Var) -> bool {
        v < MAX_VARS && self.support() >> v & 1 == 1
    }

    pub fn contains_monomial(&self, m: Monomial) -> bool {
        self.terms
            .binary_search_by(|probe| m.cmp(probe))
            .is_ok()
    }

    /// Unbounded product in the Boolean ring.
    pub fn mul_unbounded(&self, other: &BoolPoly) -> BoolPoly {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &a in &self.terms {
            for &b in &other.terms {
                terms.push(a * b);
            }
        }
        canonicalize(&mut terms);
        BoolPoly { terms }
    }

    /// Product with an optional degree cap; a product monomial above the
    /// cap is an error rather than being dropped.
    pub fn mul_capped(&self, other: &BoolPoly, cap: Option<usize>) -> Result<BoolPoly> {
        let product = self.mul_unbounded(other);
        if let (Some(cap), Some(d)) = (cap, product.degree()) {
            if d > cap {
                return Err(Error::DegreeOverflow { degree: d, cap });
            }
        }
        Ok(product)
    }

    /// `m * self`.
    pub fn mul_monomial(&self, m: Monomial) -> BoolPoly {
        BoolPoly::from_monomials(self.terms.iter().map(|&t| t * m))
    }

    /// Evaluate at a point given as one bit per variable (`point.len() == n`).
    pub fn evaluate(&self, point: &[bool], n: usize) -> Result<bool> {
        if point.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: point.len(),
            });
        }
        let support = self.support();
        if n < MAX_VARS && support >> n != 0 {
            return Err(Error::DimensionMismatch {
                expected: 128 - support.leading_zeros() as usize,
                got: n,
            });
        }
        let mask = point
            .iter()
            .enumerate()
            .fold(0u128, |acc, (i, &b)| if b { acc | 1 << i } else { acc });
        Ok(self.eval_mask(mask))
    }

    /// Evaluate at the point whose 1-coordinates are the bits of `point`.
    pub fn eval_mask(&self, point: u128) -> bool {
        self.terms
            .iter()
            .fold(false, |acc, m| acc ^ m.eval_mask(point))
    }

    /// Largest monomial under `order`.
    pub fn leading_monomial(&self, order: MonomialOrder) -> Result<Monomial> {
        self.terms
            .iter()
            .copied()
            .max_by_key(|&m| order.key(m))
            .ok_or(Error::ZeroPolynomial)
    }

    /// Write `self = a * xv + b` with `a`, `b` free of `xv`.
    pub fn decompose(&self, v: Var) -> (BoolPoly, BoolPoly) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for &m in &self.terms {
            if m.contains(v) {
                a.push(m.without(v));
            } else {
                b.push(m);
            }
        }
        // Dropping v from distinct monomials that all contain it keeps them
        // distinct, but it can change the sort position.
        a.sort_unstable_by(|x, y| y.cmp(x));
        (BoolPoly { terms: a }, BoolPoly { terms: b })
    }

    /// Substitute constants for the variables in `vars`: those set in
    /// `values` become 1, the rest 0.
    pub fn fix_vars(&self, vars: u128, values: u128) -> BoolPoly {
        let zeros = vars & !values;
        BoolPoly::from_monomials(
            self.terms
                .iter()
                .filter(|m| m.mask() & zeros == 0)
                .map(|m| Monomial(m.mask() & !vars)),
        )
    }

    /// Replace every variable `v` by `map(v)`; variables mapped to `None`
    /// are left alone. Products are checked against `cap`.
    pub fn substitute<F>(&self, mut map: F, cap: Option<usize>) -> Result<BoolPoly>
    where
        F: FnMut(Var) -> Option<BoolPoly>,
    {
        let mut out = Vec::new();
        for &m in &self.terms {
            let mut kept = Monomial::ONE;
            let mut product = BoolPoly::one();
            for v in m.vars() {
                match map(v) {
                    Some(p) => product = product.mul_unbounded(&p),
                    None => kept = kept * Monomial::var(v),
                }
            }
            out.extend(product.terms.iter().map(|&t| t * kept));
        }
        let result = BoolPoly::from_monomials(out);
        if let (Some(cap), Some(d)) = (cap, result.degree()) {
            if d > cap {
                return Err(Error::DegreeOverflow { degree: d, cap });
            }
        }
        Ok(result)
    }
}

/// Dense numbering of the monomials of degree at most 3 in `x0..x(n-1)`:
/// degree blocks in increasing order, each numbered by the combinatorial
/// number system.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CubicIndex {
    n: usize,
    offsets: [usize; 4],
}

impl CubicIndex {
    pub(crate) fn new(n: usize) -> CubicIndex {
        let c2 = n * n.saturating_sub(1) / 2;
        CubicIndex {
            n,
            offsets: [0, 1, 1 + n, 1 + n + c2],
        }
    }

    /// Index covering every monomial of degree ≤ 3 in `terms`, or `None`
    /// when some monomial has degree 4 or more.
    pub(crate) fn covering<'a>(terms: impl IntoIterator<Item = &'a Monomial>) -> Option<CubicIndex> {
        let mut support = 0u128;
        for m in terms {
            if m.degree() > 3 {
                return None;
            }
            support |= m.0;
        }
        Some(CubicIndex::new(128 - support.leading_zeros() as usize))
    }

    /// Number of variables covered.
    pub(crate) fn vars(&self) -> usize {
        self.n
    }

    pub(crate) fn len(&self) -> usize {
        let n = self.n;
        self.offsets[3] + n * n.saturating_sub(1) * n.saturating_sub(2) / 6
    }

    /// Position of `m`, which must have degree ≤ 3 and variables below `n`.
    pub(crate) fn index(&self, m: Monomial) -> usize {
        let mut bits = m.0;
        let mut k = 0;
        let mut idx = 0;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            k += 1;
            idx += match k {
                1 => v,
                2 => v * (v - 1) / 2,
                _ => v * (v - 1) * (v - 2) / 6,
            };
        }
        debug_assert!(k <= 3 && (m.0 >> self.n) == 0);
        self.offsets[k] + idx
    }
}

/// Sort descending and cancel repeated monomials in pairs.
fn canonicalize(terms: &mut Vec<Monomial>) {
    terms.sort_unstable_by(|a, b| b.cmp(a));
    let mut write = 0;
    let mut read = 0;
    while read < terms.len() {
        let m = terms[read];
        let mut run = 1;
        while read + run < terms.len() && terms[read + run] == m {
            run += 1;
        }
        if run % 2 == 1 {
            terms[write] = m;
            write += 1;
        }
        read += run;
    }
    terms.truncate(write);
}

/// Merge two descending term lists, cancelling common monomials.
fn merge_xor(a: &[Monomial], b: &[Monomial]) -> Vec<Monomial> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Greater => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Less => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl Add for &BoolPoly {
    type Output = BoolPoly;
    fn add(self, rhs: &BoolPoly) -> BoolPoly {
        BoolPoly {
            terms: merge_xor(&self.terms, &rhs.terms),
        }
    }
}

impl Add for BoolPoly {
    type Output = BoolPoly;
    fn add(self, rhs: BoolPoly) -> BoolPoly {
        &self + &rhs
    }
}

impl AddAssign<&BoolPoly> for BoolPoly {
    fn add_assign(&mut self, rhs: &BoolPoly) {
        self.terms = merge_xor(&self.terms, &rhs.terms);
    }
}

impl Mul for &BoolPoly {
    type Output = BoolPoly;
    fn mul(self, rhs: &BoolPoly) -> BoolPoly {
        self.mul_unbounded(rhs)
    }
}

impl Mul for BoolPoly {
    type Output = BoolPoly;
    fn mul(self, rhs: BoolPoly) -> BoolPoly {
        self.mul_unbounded(&rhs)
    }
}

impl From<Monomial> for BoolPoly {
    fn from(m: Monomial) -> Self {
        BoolPoly::monomial(m)
    }
}

impl fmt::Debug for BoolPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Canonical ANF text: monomials descending under graded lex, joined by ` + `.
impl fmt::Display for BoolPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, m) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// Parses `polynomial = term ('+' term)*`, `term = '1' | var ('*' var)*`,
/// `var = 'x' decimal`. A lone `0` is accepted for the zero polynomial.
impl FromStr for BoolPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<BoolPoly> {
        parse_poly(s, 1)
    }
}

pub(crate) fn parse_poly(s: &str, line: usize) -> Result<BoolPoly> {
    let err = |msg: String| Error::Parse { line, msg };
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(err("empty polynomial".into()));
    }
    if compact == "0" {
        return Ok(BoolPoly::zero());
    }
    let mut monomials = Vec::new();
    for term in compact.split('+') {
        if term.is_empty() {
            return Err(err("empty term".into()));
        }
        if term == "1" {
            monomials.push(Monomial::ONE);
            continue;
        }
        let mut mask = 0u128;
        for factor in term.split('*') {
            let digits = factor
                .strip_prefix('x')
                .ok_or_else(|| err(format!("expected a variable, found `{factor}`")))?;
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err(format!("bad variable `{factor}`")));
            }
            let v: Var = digits
                .parse()
                .map_err(|_| err(format!("bad variable `{factor}`")))?;
            mask |= Monomial::try_var(v).map_err(|e| err(e.to_string()))?.mask();
        }
        monomials.push(Monomial(mask));
    }
    Ok(BoolPoly::from_monomials(monomials))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> BoolPoly {
        s.parse().unwrap()
    }

    #[test]
    fn addition_cancels() {
        assert!((p("x1 + x2") + p("x1 + x2")).is_zero());
        assert_eq!(p("x1*x2 + x3") + p("x1*x2 + x2"), p("x2 + x3"));
        assert_eq!(p("x1*x3 + 1") + BoolPoly::zero(), p("x1*x3 + 1"));
    }

    #[test]
    fn multiplication_is_idempotent() {
        assert_eq!(p("x1 + 1") * p("x1 + 1"), p("x1 + 1"));
        assert_eq!(p("x1") * p("x2 + x3"), p("x1*x2 + x1*x3"));
        assert_eq!(p("x1 + x2") * p("x1 + x2"), p("x1 + x2"));
    }

    #[test]
    fn degree_cap_is_enforced() {
        let err = p("x1*x2").mul_capped(&p("x3*x4"), Some(3)).unwrap_err();
        assert_eq!(err, Error::DegreeOverflow { degree: 4, cap: 3 });
        // x1*x2 * x2*x3 = x1*x2*x3 stays within the cap.
        assert_eq!(
            p("x1*x2").mul_capped(&p("x2*x3"), Some(3)).unwrap(),
            p("x1*x2*x3")
        );
    }

    #[test]
    fn leading_monomials() {
        let f = p("x1 + x2*x3");
        assert_eq!(
            f.leading_monomial(MonomialOrder::VariableFirst(1)).unwrap(),
            Monomial::var(1)
        );
        assert_eq!(
            f.leading_monomial(MonomialOrder::DegreeFirst).unwrap(),
            Monomial::from_vars([2, 3]).unwrap()
        );
        assert_eq!(
            BoolPoly::one()
                .leading_monomial(MonomialOrder::DegreeFirst)
                .unwrap(),
            Monomial::ONE
        );
        assert_eq!(
            BoolPoly::zero().leading_monomial(MonomialOrder::DegreeFirst),
            Err(Error::ZeroPolynomial)
        );
    }

    #[test]
    fn evaluation() {
        let f = p("x0*x1 + x0 + x1");
        assert!(!f.evaluate(&[false, false], 2).unwrap());
        assert!(f.evaluate(&[true, false], 2).unwrap());
        assert!(BoolPoly::one().evaluate(&[true, false, true], 3).unwrap());
        assert!(matches!(
            f.evaluate(&[true], 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn decomposition() {
        assert_eq!(p("x1*x2 + x3").decompose(1), (p("x2"), p("x3")));
        assert_eq!(p("x2 + x3").decompose(1), (BoolPoly::zero(), p("x2 + x3")));
        assert_eq!(p("x1 + x2*x3").decompose(1), (BoolPoly::one(), p("x2*x3")));
    }

    #[test]
    fn zero_degree_is_sentinel() {
        assert_eq!(BoolPoly::zero().degree(), None);
        assert_eq!(BoolPoly::one().degree(), Some(0));
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(p("1 + x2 + x3*x1*x2").to_string(), "x1*x2*x3 + x2 + 1");
        assert_eq!(p("x2*x3 + x1*x4 + x1*x2").to_string(), "x1*x2 + x1*x4 + x2*x3");
        assert_eq!(BoolPoly::zero().to_string(), "0");
    }

    #[test]
    fn parse_errors() {
        assert!("".parse::<BoolPoly>().is_err());
        assert!("x1 + + x2".parse::<BoolPoly>().is_err());
        assert!("y1".parse::<BoolPoly>().is_err());
        assert!("x128".parse::<BoolPoly>().is_err());
        assert_eq!(p(" x1 *x2+ x2 "), p("x1*x2 + x2"));
    }

    #[test]
    fn substitution() {
        // x1*x2 with x1 -> x3 + 1
        let f = p("x1*x2 + x4");
        let g = f
            .substitute(|v| (v == 1).then(|| p("x3 + 1")), Some(2))
            .unwrap();
        assert_eq!(g, p("x2*x3 + x2 + x4"));
        assert_eq!(p("x1*x2 + x2").fix_vars(0b10, 0b10), p("x2 + x2"));
        assert_eq!(p("x1*x2 + x2").fix_vars(0b10, 0b10), BoolPoly::zero());
        assert_eq!(p("x1*x2 + x3").fix_vars(0b10, 0), p("x3"));
    }

    #[test]
    fn cubic_index_is_a_bijection() {
        let ix = CubicIndex::new(7);
        let mut seen = vec![false; ix.len()];
        for mask in 0u128..128 {
            if mask.count_ones() <= 3 {
                let i = ix.index(Monomial::from_mask(mask));
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert!(CubicIndex::covering(&[Monomial::from_mask(0b1111)]).is_none());
    }
}
