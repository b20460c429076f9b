//! Exhaustive reference computations for small systems.
//!
//! Nothing here bounds degrees: zero sets are enumerated point by point and
//! elimination ideals are generated by unbounded resultants and coefficient
//! constraints. These functions are the ground truth the bounded algorithms
//! in [`crate::elim`] are tested against, so they never call into it.

use std::collections::BTreeSet;

use crate::boolring::{BoolPoly, Monomial, MonomialOrder, Var};
use crate::error::{Error, Result};
use crate::gf2linalg::reduce;

/// Largest number of coordinates enumerated by default.
pub const DEFAULT_CAP: usize = 20;

/// A set of points of `F2^coords`, each stored as the mask of its
/// 1-coordinates (bit `i` is variable `xi`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointSet {
    coords: u128,
    points: BTreeSet<u128>,
}

/// All points over the coordinates in `mask`, as submasks.
fn submasks(mask: u128) -> impl Iterator<Item = u128> {
    let mut next = Some(0u128);
    std::iter::from_fn(move || {
        let cur = next?;
        let succ = cur.wrapping_sub(mask) & mask;
        next = (succ != 0).then_some(succ);
        Some(cur)
    })
}

impl PointSet {
    pub fn new(coords: u128, points: impl IntoIterator<Item = u128>) -> PointSet {
        let points = points
            .into_iter()
            .inspect(|p| assert_eq!(p & !coords, 0, "point outside coordinates"))
            .collect();
        PointSet { coords, points }
    }

    /// Every point over `coords`.
    pub fn full(coords: u128, cap: usize) -> Result<PointSet> {
        check_cap(coords, cap)?;
        Ok(PointSet {
            coords,
            points: submasks(coords).collect(),
        })
    }

    pub fn coords(&self) -> u128 {
        self.coords
    }

    pub fn dimension(&self) -> usize {
        self.coords.count_ones() as usize
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, point: u128) -> bool {
        self.points.contains(&point)
    }

    pub fn points(&self) -> impl Iterator<Item = u128> + '_ {
        self.points.iter().copied()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.coords == other.coords && self.points.is_subset(&other.points)
    }

    /// Drop coordinate `v`.
    pub fn project_out(&self, v: Var) -> PointSet {
        let keep = !(1u128 << v);
        PointSet {
            coords: self.coords & keep,
            points: self.points.iter().map(|p| p & keep).collect(),
        }
    }

    /// Drop the `k` lowest-indexed coordinates.
    pub fn project(&self, k: usize) -> Result<PointSet> {
        let dim = self.dimension();
        if k >= dim {
            return Err(Error::InvalidParams(format!(
                "cannot drop {k} of {dim} coordinates"
            )));
        }
        Ok(Monomial::from_mask(self.coords)
            .vars()
            .take(k)
            .fold(self.clone(), |s, v| s.project_out(v)))
    }
}

fn check_cap(coords: u128, cap: usize) -> Result<()> {
    let n = coords.count_ones() as usize;
    if n > cap {
        Err(Error::DimensionTooLarge { n, cap })
    } else {
        Ok(())
    }
}

fn mask_of(n: usize) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// Common zeros of `f` over the coordinates in `coords`, which must cover
/// every variable of `f`.
pub fn zero_set_over(f: &[BoolPoly], coords: u128, cap: usize) -> Result<PointSet> {
    check_cap(coords, cap)?;
    if let Some(p) = f.iter().find(|p| p.support() & !coords != 0) {
        let v = (p.support() & !coords).trailing_zeros() as usize;
        return Err(Error::VariableOutOfRange(v));
    }
    Ok(PointSet {
        coords,
        points: submasks(coords)
            .filter(|&pt| f.iter().all(|p| !p.eval_mask(pt)))
            .collect(),
    })
}

/// Common zeros of `f` in `F2^n` (variables `x0..x(n-1)`), with the default cap.
pub fn zero_set(f: &[BoolPoly], n: usize) -> Result<PointSet> {
    zero_set_over(f, mask_of(n), DEFAULT_CAP)
}

/// Drop the first `k` coordinates of `s`.
pub fn project(s: &PointSet, k: usize) -> Result<PointSet> {
    s.project(k)
}

fn support(f: &[BoolPoly]) -> u128 {
    f.iter().fold(0, |acc, p| acc | p.support())
}

/// A single polynomial with the same zero set as `f`:
/// `1 + (f_1 + 1)(f_2 + 1)...(f_m + 1)`.
pub fn principal_generator(f: &[BoolPoly]) -> Result<BoolPoly> {
    check_cap(support(f), DEFAULT_CAP)?;
    let one = BoolPoly::one();
    let product = f
        .iter()
        .fold(BoolPoly::one(), |acc, p| acc.mul_unbounded(&(p + &one)));
    Ok(&product + &one)
}

/// `a_i b_j + a_j b_i` for all `i < j`, where `f_i = a_i x_v + b_i`;
/// zeros dropped.
pub fn resultants(f: &[BoolPoly], v: Var) -> Vec<BoolPoly> {
    let parts: Vec<_> = f.iter().map(|p| p.decompose(v)).collect();
    let mut out = Vec::new();
    for (i, (ai, bi)) in parts.iter().enumerate() {
        for (aj, bj) in &parts[i + 1..] {
            let r = ai.mul_unbounded(bj) + aj.mul_unbounded(bi);
            if !r.is_zero() {
                out.push(r);
            }
        }
    }
    out
}

/// `b_i (a_i + 1)` for every `f_i = a_i x_v + b_i`; zeros dropped.
pub fn coefficient_constraints(f: &[BoolPoly], v: Var) -> Vec<BoolPoly> {
    f.iter()
        .map(|p| {
            let (a, b) = p.decompose(v);
            b.mul_unbounded(&(&a + &BoolPoly::one()))
        })
        .filter(|p| !p.is_zero())
        .collect()
}

/// Generators of the elimination ideal of `f` with respect to `v`:
/// all resultants followed by all coefficient constraints, without any
/// degree bound.
pub fn true_elimination_generators(f: &[BoolPoly], v: Var) -> Result<Vec<BoolPoly>> {
    check_cap(support(f), DEFAULT_CAP)?;
    let mut out = resultants(f, v);
    out.extend(coefficient_constraints(f, v));
    Ok(out)
}

/// Fold [`true_elimination_generators`] over `order`, replacing the
/// generators by a reduced basis of their span after every step.
///
/// Fails with [`Error::GeneratorExplosion`] when a step would produce more
/// than `generator_cap` generators.
pub fn iterated_elimination(
    f: &[BoolPoly],
    order: &[Var],
    generator_cap: usize,
) -> Result<Vec<BoolPoly>> {
    let mut current = reduce(f, MonomialOrder::DegreeFirst);
    for &v in order {
        let m = current.len();
        let count = m * m.saturating_sub(1) / 2 + m;
        if count > generator_cap {
            return Err(Error::GeneratorExplosion {
                count,
                cap: generator_cap,
            });
        }
        let next = true_elimination_generators(&current, v)?;
        current = reduce(&next, MonomialOrder::DegreeFirst);
    }
    Ok(current)
}

/// True when the ideal of `f` contains the ideal of `g`, decided by
/// `Z(f) ⊆ Z(g)` over `F2^n`.
pub fn ideal_contains(f: &[BoolPoly], g: &[BoolPoly], n: usize) -> Result<bool> {
    let zf = zero_set(f, n)?;
    let contained = zf.points().all(|pt| g.iter().all(|p| !p.eval_mask(pt)));
    Ok(contained)
}
