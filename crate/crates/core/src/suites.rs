//! Randomized checks of the elimination algorithms against the exhaustive
//! oracles.
//!
//! Each suite draws small random systems from a seeded generator and tests
//! one exact statement about zero sets or spans. A trial passes or fails;
//! there is no tolerance.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::boolring::{BoolPoly, Monomial, Var};
use crate::elim::{eliminate_step, linear_multiples, Algo, ElimConfig, PolySystem};
use crate::error::{Error, Result};
use crate::gf2linalg::span_equal;
use crate::oracle::{
    coefficient_constraints, iterated_elimination, principal_generator, true_elimination_generators,
    zero_set, zero_set_over, PointSet, DEFAULT_CAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    /// `Z({f, g}) = Z(fg + f + g)`.
    ProductGenerator,
    /// `Z(1 + Π(f_i + 1)) = Z(F)`.
    PrincipalGenerator,
    /// The coefficient constraints of a quadratic system vanish on the
    /// projection of its zero set.
    ConstraintProjection,
    /// Resultants plus coefficient constraints cut out exactly the
    /// projection of the zero set.
    EliminationIdeal,
    /// The same, folded over several variables.
    IteratedElimination,
    /// The resultant algorithm and the linearized one produce the same
    /// span once quadratics are multiplied by `{1} ∪ variables`.
    LinearizationEquivalence,
    /// On a quadratic-only system one resultant step is exact.
    MqCompleteness,
}

/// Default size limits and trial counts for one suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteDefaults {
    pub max_vars: usize,
    pub trials: usize,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::ProductGenerator,
        Suite::PrincipalGenerator,
        Suite::ConstraintProjection,
        Suite::EliminationIdeal,
        Suite::IteratedElimination,
        Suite::LinearizationEquivalence,
        Suite::MqCompleteness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ProductGenerator => "product-generator",
            Suite::PrincipalGenerator => "principal-generator",
            Suite::ConstraintProjection => "constraint-projection",
            Suite::EliminationIdeal => "elimination-ideal",
            Suite::IteratedElimination => "iterated-elimination",
            Suite::LinearizationEquivalence => "linearization-equivalence",
            Suite::MqCompleteness => "mq-completeness",
        }
    }

    pub fn defaults(self) -> SuiteDefaults {
        let (max_vars, trials) = match self {
            Suite::ProductGenerator => (6, 1000),
            Suite::PrincipalGenerator => (6, 1000),
            Suite::ConstraintProjection => (6, 1000),
            Suite::EliminationIdeal => (6, 1000),
            Suite::IteratedElimination => (5, 1000),
            Suite::LinearizationEquivalence => (8, 500),
            Suite::MqCompleteness => (8, 500),
        };
        SuiteDefaults { max_vars, trials }
    }

    /// Smallest number of variables the suite can draw systems over.
    fn min_vars(self) -> usize {
        match self {
            Suite::IteratedElimination => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub passed: usize,
    /// Description of the first failing system, if any.
    pub first_failure: Option<String>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}/{} ({:.1}%) in {:.2?}",
            self.suite,
            self.passed,
            self.trials,
            100.0 * self.passed as f64 / self.trials.max(1) as f64,
            self.elapsed
        )
    }
}

/// A random polynomial in `x0..x(n-1)` with up to `max_terms` terms of
/// degree at most `max_deg`. May be zero.
pub fn random_poly<R: Rng>(rng: &mut R, n: usize, max_deg: usize, max_terms: usize) -> BoolPoly {
    let terms = rng.random_range(1..=max_terms);
    BoolPoly::from_monomials((0..terms).map(|_| {
        let deg = rng.random_range(0..=max_deg.min(n));
        let mut mask = 0u128;
        while (mask.count_ones() as usize) < deg {
            mask |= 1 << rng.random_range(0..n);
        }
        Monomial::from_mask(mask)
    }))
}

/// `count` random polynomials. Three times out of four they share a
/// planted common zero, so that zero sets are rarely empty.
fn random_polys<R: Rng>(rng: &mut R, n: usize, max_deg: usize, count: usize) -> Vec<BoolPoly> {
    let planted = rng.random_bool(0.75).then(|| rng.random::<u128>() & mask_of(n));
    (0..count)
        .map(|_| {
            let p = random_poly(rng, n, max_deg, 5);
            match planted {
                Some(point) if p.eval_mask(point) => &p + &BoolPoly::one(),
                _ => p,
            }
        })
        .collect()
}

fn mask_of(n: usize) -> u128 {
    (1u128 << n) - 1
}

/// Zero set of `f` over variables `0..n`, dropping the first `k`.
fn projected(f: &[BoolPoly], n: usize, k: usize) -> Result<PointSet> {
    zero_set(f, n)?.project(k)
}

fn system(f: Vec<BoolPoly>, n: usize) -> Result<PolySystem> {
    PolySystem::from_polys(f, n)
}

/// One trial: `Ok(None)` passes, `Ok(Some(description))` fails.
fn trial(suite: Suite, rng: &mut ChaCha20Rng, n: usize) -> Result<Option<String>> {
    let describe = |f: &[BoolPoly]| format!("n={n} F={f:?}");
    match suite {
        Suite::ProductGenerator => {
            let f = random_poly(rng, n, 3, 5);
            let g = random_poly(rng, n, 3, 5);
            let combined = &(&f * &g) + &(&f + &g);
            let pair = [f, g];
            let ok = zero_set(&pair, n)? == zero_set(&[combined], n)?;
            Ok((!ok).then(|| describe(&pair)))
        }
        Suite::PrincipalGenerator => {
            let count = rng.random_range(0..=5);
            let f = random_polys(rng, n, 3, count);
            let ok = zero_set(&f, n)? == zero_set(&[principal_generator(&f)?], n)?;
            Ok((!ok).then(|| describe(&f)))
        }
        Suite::ConstraintProjection => {
            let count = rng.random_range(1..=8);
            let f = random_polys(rng, n, 2, count);
            let co = coefficient_constraints(&f, 0);
            let ok = projected(&f, n, 1)?.is_subset(&zero_set_over(&co, mask_of(n) & !1, DEFAULT_CAP)?);
            Ok((!ok).then(|| describe(&f)))
        }
        Suite::EliminationIdeal => {
            let count = rng.random_range(1..=8);
            let f = random_polys(rng, n, 3, count);
            let g = true_elimination_generators(&f, 0)?;
            let ok = projected(&f, n, 1)? == zero_set_over(&g, mask_of(n) & !1, DEFAULT_CAP)?;
            Ok((!ok).then(|| describe(&f)))
        }
        Suite::IteratedElimination => {
            let count = rng.random_range(1..=6);
            let f = random_polys(rng, n, 2, count);
            let k = rng.random_range(1..=3.min(n - 1));
            let order: Vec<Var> = (0..k).collect();
            let g = iterated_elimination(&f, &order, 1 << 16)?;
            let ok = projected(&f, n, k)? == zero_set_over(&g, mask_of(n) & !mask_of(k), DEFAULT_CAP)?;
            Ok((!ok).then(|| format!("{} k={k}", describe(&f))))
        }
        Suite::LinearizationEquivalence => {
            let n2 = rng.random_range(0..=10);
            let n3 = rng.random_range(0..=10);
            let mut f = random_polys(rng, n, 2, n2);
            f.extend(random_polys(rng, n, 3, n3));
            let sys = system(f, n)?;
            let config = ElimConfig {
                fail_on_inconsistent: false,
                ..ElimConfig::default()
            };
            let (a, _) = eliminate_step(&sys, 0, Algo::ElimA, &config)?;
            let (l, _) = eliminate_step(&sys, 0, Algo::LElimA, &config)?;
            let mut lhs = a.f3().to_vec();
            lhs.extend(linear_multiples(a.f2(), a.live()));
            let rhs: Vec<BoolPoly> = l.polys().cloned().collect();
            let ok = span_equal(&lhs, &rhs);
            Ok((!ok).then(|| format!("n={n} F2={:?} F3={:?}", sys.f2(), sys.f3())))
        }
        Suite::MqCompleteness => {
            let count = rng.random_range(1..=10);
            let f = random_polys(rng, n, 2, count);
            let sys = system(f.clone(), n)?;
            let config = ElimConfig {
                fail_on_inconsistent: false,
                ..ElimConfig::default()
            };
            let (out, _) = eliminate_step(&sys, 0, Algo::ElimA, &config)?;
            let out: Vec<BoolPoly> = out.polys().cloned().collect();
            let ok = projected(&f, n, 1)? == zero_set_over(&out, mask_of(n) & !1, DEFAULT_CAP)?;
            Ok((!ok).then(|| describe(&f)))
        }
    }
}

/// Run `trials` random trials of `suite` over at most `max_vars` variables.
pub fn run_suite(suite: Suite, trials: usize, max_vars: usize, seed: u64) -> Result<SuiteReport> {
    let lo = suite.min_vars();
    if max_vars < lo || max_vars > DEFAULT_CAP {
        return Err(Error::InvalidParams(format!(
            "suite {suite} needs between {lo} and {DEFAULT_CAP} variables, got {max_vars}"
        )));
    }
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut passed = 0;
    let mut first_failure = None;
    for _ in 0..trials {
        let n = rng.random_range(lo..=max_vars);
        match trial(suite, &mut rng, n)? {
            None => passed += 1,
            Some(desc) => {
                first_failure.get_or_insert(desc);
            }
        }
    }
    Ok(SuiteReport {
        suite,
        trials,
        passed,
        first_failure,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_runs_pass_and_repeat() {
        for s in Suite::ALL {
            let d = s.defaults();
            let a = run_suite(s, 20, d.max_vars.min(6), 3).unwrap();
            assert!(a.all_passed(), "{a} {:?}", a.first_failure);
            let b = run_suite(s, 20, d.max_vars.min(6), 3).unwrap();
            assert_eq!((a.passed, a.first_failure), (b.passed, b.first_failure));
        }
        assert!(run_suite(Suite::MqCompleteness, 1, 1, 0).is_err());
    }
}
