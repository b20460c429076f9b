//! How much a system still says about the key.
//!
//! [`key_fits`] decides whether a key guess is consistent with a system by
//! substituting it and then alternating Gaussian reduction with linear
//! substitution. [`info_measure`] sweeps every key and reports
//! `i(F) = k - log2(#keys that fit)`, as an interval when some guesses are
//! undecided. [`info_loss_curve`] tracks that measure along an elimination
//! run.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::boolring::{BoolPoly, Monomial, MonomialOrder, Var};
use crate::ciphers::AttackSystem;
use crate::elim::{eliminate_sequence_with, eliminate_step, Algo, ElimConfig, ElimTrace, PolySystem};
use crate::error::{Error, Result};
use crate::gf2linalg::{rank, reduce};

/// Largest key space swept exhaustively by default.
pub const DEFAULT_KEY_CAP: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KeyFitVerdict {
    /// Every variable was eliminated without deriving 1.
    Fits,
    /// The constant 1 was derived.
    NoFit,
    /// Reduction stopped producing linear polynomials first.
    Undecided,
}

/// Replace `v` by the affine polynomial `value` (free of `v`).
fn substitute_var(p: &BoolPoly, v: Var, value: &BoolPoly) -> BoolPoly {
    if !p.contains_var(v) {
        return p.clone();
    }
    let (a, b) = p.decompose(v);
    &a.mul_unbounded(value) + &b
}

/// Eliminate `v` using the linear polynomial `l`, which must contain it.
fn apply_linear(polys: &mut Vec<BoolPoly>, l: &BoolPoly, v: Var) {
    let value = l + &BoolPoly::var(v);
    for p in polys.iter_mut() {
        if p.contains_var(v) {
            *p = substitute_var(p, v, &value);
        }
    }
    polys.retain(|p| !p.is_zero());
}

/// The smallest-index variable of a nonconstant polynomial.
fn pivot_var(l: &BoolPoly) -> Var {
    l.support().trailing_zeros() as Var
}

/// Alternate reduction and linear substitution until no new linear
/// polynomial appears. `Err` means 1 was derived. Substitutions made are
/// appended to `subs` in order.
fn closure(mut polys: Vec<BoolPoly>, subs: &mut Vec<(Var, BoolPoly)>) -> Result<Vec<BoolPoly>, ()> {
    loop {
        polys.retain(|p| !p.is_zero());
        if polys.is_empty() {
            return Ok(polys);
        }
        let reduced = reduce(&polys, MonomialOrder::DegreeFirst);
        let (mut linear, rest): (Vec<_>, Vec<_>) =
            reduced.into_iter().partition(|p| p.degree() <= Some(1));
        if linear.is_empty() {
            return Ok(rest);
        }
        polys = rest;
        // Reduced rows have distinct leading terms, so each substitution
        // leaves the remaining linear rows nonzero and nonconstant unless
        // they were dependent on it.
        while let Some(l) = linear.pop() {
            if l.is_zero() {
                continue;
            }
            if l.is_one() {
                return Err(());
            }
            let v = pivot_var(&l);
            apply_linear(&mut polys, &l, v);
            apply_linear(&mut linear, &l, v);
            subs.push((v, l));
        }
    }
}

/// Run the fit procedure on a system that already has the key substituted.
///
/// The closure is computed on the quadratic part first: it is cheap, and
/// the fixpoint reached does not depend on the order in which linear
/// polynomials are found and used.
fn decide(polys: Vec<BoolPoly>) -> KeyFitVerdict {
    let (low, mut cubic): (Vec<_>, Vec<_>) = polys.into_iter().partition(|p| p.degree() <= Some(2));
    let mut subs = Vec::new();
    let Ok(mut rest) = closure(low, &mut subs) else {
        return KeyFitVerdict::NoFit;
    };
    if cubic.is_empty() {
        return if rest.is_empty() {
            KeyFitVerdict::Fits
        } else {
            KeyFitVerdict::Undecided
        };
    }
    for (v, l) in &subs {
        apply_linear(&mut cubic, l, *v);
    }
    rest.extend(cubic);
    match closure(rest, &mut subs) {
        Err(()) => KeyFitVerdict::NoFit,
        Ok(rest) if rest.is_empty() => KeyFitVerdict::Fits,
        Ok(_) => KeyFitVerdict::Undecided,
    }
}

fn key_assignment(key_vars: &[Var], key: u128) -> (u128, u128) {
    key_vars
        .iter()
        .enumerate()
        .fold((0, 0), |(vars, values), (i, &v)| {
            (vars | 1 << v, values | (key >> i & 1) << v)
        })
}

/// Decide whether `key` (bit `i` is the value of `key_vars[i]`) is
/// consistent with `sys`.
///
/// The key is substituted, then the procedure alternates: reduce the
/// system; a constant 1 means no fit; an empty system means fit; otherwise
/// substitute every linear polynomial away, each at its lowest-indexed
/// variable. With no linear polynomial left the verdict is undecided.
pub fn key_fits(sys: &PolySystem, key_vars: &[Var], key: u128) -> KeyFitVerdict {
    let (vars, values) = key_assignment(key_vars, key);
    decide(sys.polys().map(|p| p.fix_vars(vars, values)).collect())
}

/// [`key_fits`] with the system preprocessed once for many keys.
pub struct KeyFitter {
    key_vars: Vec<Var>,
    polys: Vec<KeyedPoly>,
}

/// A polynomial as a sum over its key-free monomials, each with the key
/// monomials multiplying it. Key monomials are bit sets over positions in
/// `key_vars`.
struct KeyedPoly {
    // Sorted descending, distinct.
    rest: Vec<Monomial>,
    // `parts[ends[i - 1]..ends[i]]` multiplies `rest[i]`.
    ends: Vec<u32>,
    parts: Vec<u32>,
}

impl KeyFitter {
    pub fn new(sys: &PolySystem, key_vars: &[Var]) -> KeyFitter {
        assert!(key_vars.len() <= 32, "key too large for a fitter");
        let key_mask = key_vars.iter().fold(0u128, |acc, &v| acc | 1 << v);
        let compact = |mask: u128| {
            key_vars
                .iter()
                .enumerate()
                .filter(|&(_, &v)| mask >> v & 1 == 1)
                .fold(0u32, |acc, (i, _)| acc | 1 << i)
        };
        let polys = sys
            .polys()
            .map(|p| {
                let mut split: Vec<(Monomial, u32)> = p
                    .terms()
                    .iter()
                    .map(|m| (Monomial::from_mask(m.mask() & !key_mask), compact(m.mask() & key_mask)))
                    .collect();
                split.sort_by_key(|e| std::cmp::Reverse(e.0));
                let mut keyed = KeyedPoly {
                    rest: Vec::new(),
                    ends: Vec::new(),
                    parts: Vec::with_capacity(split.len()),
                };
                for (m, part) in split {
                    if keyed.rest.last() != Some(&m) {
                        if !keyed.rest.is_empty() {
                            keyed.ends.push(keyed.parts.len() as u32);
                        }
                        keyed.rest.push(m);
                    }
                    keyed.parts.push(part);
                }
                if !keyed.rest.is_empty() {
                    keyed.ends.push(keyed.parts.len() as u32);
                }
                keyed
            })
            .collect();
        KeyFitter {
            key_vars: key_vars.to_vec(),
            polys,
        }
    }

    /// The system with `key` substituted.
    pub fn substitute(&self, key: u128) -> Vec<BoolPoly> {
        let key = key as u32;
        self.polys
            .iter()
            .map(|p| {
                let mut start = 0;
                let mut terms = Vec::new();
                for (m, &end) in p.rest.iter().zip(&p.ends) {
                    let group = &p.parts[start..end as usize];
                    start = end as usize;
                    let ones = group.iter().filter(|&&part| part & !key == 0).count();
                    if ones % 2 == 1 {
                        terms.push(*m);
                    }
                }
                BoolPoly::from_sorted_unchecked(terms)
            })
            .filter(|p| !p.is_zero())
            .collect()
    }

    pub fn fits(&self, key: u128) -> KeyFitVerdict {
        debug_assert!(self.key_vars.len() >= 128 || key >> self.key_vars.len() == 0);
        decide(self.substitute(key))
    }
}

/// Which keys a sweep decides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KeySet {
    /// All `2^k` keys, the exact measure.
    All,
    /// Only these keys. Counts are over the sample and the information
    /// interval is an estimate scaled to the full key space.
    Sample(Vec<u128>),
}

impl KeySet {
    fn keys(&self, key_bits: usize) -> Vec<u128> {
        match self {
            KeySet::All => (0..1u128 << key_bits).collect(),
            KeySet::Sample(keys) => keys.clone(),
        }
    }
}

/// Key counts and the information interval for one system.
#[derive(Clone, Debug, PartialEq)]
pub struct InfoMeasure {
    pub key_bits: usize,
    /// Number of keys decided: `2^key_bits` for an exhaustive sweep.
    pub tested: u64,
    pub fits: u64,
    pub undecided: u64,
    pub no_fit: u64,
    /// `k - log2(fits + undecided)`, with counts scaled up from a sample.
    pub i_lower: f64,
    /// `k - log2(fits)`; infinite when no key fits.
    pub i_upper: f64,
}

impl InfoMeasure {
    fn from_counts(key_bits: usize, fits: u64, undecided: u64, no_fit: u64) -> InfoMeasure {
        let tested = fits + undecided + no_fit;
        let info = |count: u64| {
            if count == 0 {
                f64::INFINITY
            } else {
                (tested as f64).log2() - (count as f64).log2()
            }
        };
        InfoMeasure {
            key_bits,
            tested,
            fits,
            undecided,
            no_fit,
            i_lower: info(fits + undecided),
            i_upper: info(fits),
        }
    }
}

/// Verdicts for the keys of `keys`, in order (by key value for
/// [`KeySet::All`]).
pub fn sweep_keys(
    sys: &PolySystem,
    key_vars: &[Var],
    keys: &KeySet,
    cap: usize,
) -> Result<Vec<KeyFitVerdict>> {
    let k = key_vars.len();
    if k > cap {
        return Err(Error::KeySpaceTooLarge { bits: k, cap });
    }
    let keys = keys.keys(k);
    if let Some(&bad) = keys.iter().find(|&&key| k < 128 && key >> k != 0) {
        return Err(Error::InvalidParams(format!("key {bad:#x} wider than {k} bits")));
    }
    let fitter = KeyFitter::new(sys, key_vars);
    Ok(keys.into_par_iter().map(|key| fitter.fits(key)).collect())
}

fn measure_of(key_bits: usize, verdicts: &[KeyFitVerdict]) -> InfoMeasure {
    let count = |v: KeyFitVerdict| verdicts.iter().filter(|&&x| x == v).count() as u64;
    InfoMeasure::from_counts(
        key_bits,
        count(KeyFitVerdict::Fits),
        count(KeyFitVerdict::Undecided),
        count(KeyFitVerdict::NoFit),
    )
}

/// Sweep all `2^|key_vars|` keys and count verdicts.
pub fn info_measure(sys: &PolySystem, key_vars: &[Var]) -> Result<InfoMeasure> {
    let verdicts = sweep_keys(sys, key_vars, &KeySet::All, DEFAULT_KEY_CAP)?;
    Ok(measure_of(key_vars.len(), &verdicts))
}

/// One row of an information-loss curve.
#[derive(Clone, Debug, PartialEq)]
pub struct InfoLossRow {
    pub step: usize,
    /// The variable eliminated at this step (`None` for the input system).
    pub var: Option<Var>,
    pub measure: InfoMeasure,
    pub n_f2: usize,
    pub n_f3: usize,
    /// Time spent deciding keys at this step.
    pub sweep_time: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfoLossReport {
    pub key_bits: usize,
    pub rows: Vec<InfoLossRow>,
    /// True when the verdicts cover a sample rather than every key.
    pub sampled: bool,
    /// Steps at which a key that fit before no longer fit or was undecided.
    pub monotonicity_violations: Vec<usize>,
}

fn fmt_info(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else {
        format!("{x:.6}")
    }
}

impl InfoLossReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,var,fits,undecided,i_lower,i_upper,nF2,nF3");
        out.push_str(if self.sampled { ",tested\n" } else { "\n" });
        for r in &self.rows {
            let var = r.var.map(|v| format!("x{v}")).unwrap_or_else(|| "-".into());
            write!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.step,
                var,
                r.measure.fits,
                r.measure.undecided,
                fmt_info(r.measure.i_lower),
                fmt_info(r.measure.i_upper),
                r.n_f2,
                r.n_f3
            )
            .unwrap();
            if self.sampled {
                write!(out, ",{}", r.measure.tested).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn is_monotone(&self) -> bool {
        self.monotonicity_violations.is_empty()
    }
}

/// Eliminate along `order`, measuring the key information before the first
/// step and after each one. `observer` sees every system with its verdicts,
/// which are in the order of [`sweep_keys`].
#[allow(clippy::too_many_arguments)]
pub fn info_loss_curve_with<F>(
    sys: &PolySystem,
    order: &[Var],
    algo: Algo,
    key_vars: &[Var],
    keys: &KeySet,
    config: &ElimConfig,
    mut observer: F,
) -> Result<InfoLossReport>
where
    F: FnMut(usize, &PolySystem, &[KeyFitVerdict]) -> Result<()>,
{
    let k = key_vars.len();
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let mut current = sys.clone();
    let mut previous: Option<Vec<KeyFitVerdict>> = None;
    for step in 0..=order.len() {
        let var = step.checked_sub(1).map(|i| order[i]);
        if let Some(v) = var {
            current = eliminate_step(&current, v, algo, config)?.0;
        }
        let start = Instant::now();
        let verdicts = sweep_keys(&current, key_vars, keys, DEFAULT_KEY_CAP)?;
        let sweep_time = start.elapsed();
        if let Some(prev) = &previous {
            let broken = prev
                .iter()
                .zip(&verdicts)
                .any(|(&a, &b)| a == KeyFitVerdict::Fits && b == KeyFitVerdict::NoFit);
            if broken {
                violations.push(step);
            }
        }
        observer(step, &current, &verdicts)?;
        rows.push(InfoLossRow {
            step,
            var,
            measure: measure_of(k, &verdicts),
            n_f2: current.f2().len(),
            n_f3: current.f3().len(),
            sweep_time,
        });
        previous = Some(verdicts);
    }
    Ok(InfoLossReport {
        key_bits: k,
        rows,
        sampled: matches!(keys, KeySet::Sample(_)),
        monotonicity_violations: violations,
    })
}

/// [`info_loss_curve_with`] without an observer.
pub fn info_loss_curve(
    sys: &PolySystem,
    order: &[Var],
    algo: Algo,
    key_vars: &[Var],
    config: &ElimConfig,
) -> Result<InfoLossReport> {
    info_loss_curve_with(sys, order, algo, key_vars, &KeySet::All, config, |_, _, _| Ok(()))
}

/// Statistics of the polynomials that mention only key variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyPolySummary {
    pub total: usize,
    /// Count by degree, index 0 to 3.
    pub by_degree: [usize; 4],
    /// Dimension of their span.
    pub rank: usize,
    /// Dimension of the span of the linear ones.
    pub linear_rank: usize,
}

/// Summarize the members of `polys` whose variables all lie in `key_mask`.
pub fn key_poly_summary<'a, I>(polys: I, key_mask: u128) -> KeyPolySummary
where
    I: IntoIterator<Item = &'a BoolPoly>,
{
    let key_only: Vec<BoolPoly> = polys
        .into_iter()
        .filter(|p| !p.is_zero() && p.support() & !key_mask == 0)
        .cloned()
        .collect();
    let mut by_degree = [0; 4];
    for p in &key_only {
        by_degree[p.degree().unwrap_or(0).min(3)] += 1;
    }
    let linear: Vec<BoolPoly> = key_only
        .iter()
        .filter(|p| p.degree() <= Some(1))
        .cloned()
        .collect();
    KeyPolySummary {
        total: key_only.len(),
        by_degree,
        rank: rank(&key_only),
        linear_rank: rank(&linear),
    }
}

/// Outcome of eliminating along an order in one attack system.
#[derive(Clone, Debug)]
pub struct PairRun {
    pub plaintext: u128,
    pub ciphertext: u128,
    pub system: PolySystem,
    pub trace: ElimTrace,
    /// Steps (1-based) after which some polynomial did not vanish at the
    /// true assignment. Empty for a sound run.
    pub unsound_steps: Vec<usize>,
    pub key_polys: KeyPolySummary,
}

impl PairRun {
    pub fn is_sound(&self) -> bool {
        self.unsound_steps.is_empty()
    }

    /// Largest cubic-side size reached in any step.
    pub fn f3_high_water(&self) -> usize {
        self.trace.steps.iter().map(|s| s.f3_high_water).max().unwrap_or(0)
    }
}

/// Eliminate `order` from `attack`, checking every intermediate system
/// against the true assignment.
pub fn run_pair(attack: &AttackSystem, order: &[Var], algo: Algo, config: &ElimConfig) -> Result<PairRun> {
    let point = attack.witness().assignment;
    let mut unsound_steps = Vec::new();
    let mut step = 0;
    let (system, trace) = eliminate_sequence_with(&attack.system, order, algo, config, |sys, _| {
        step += 1;
        if !sys.vanishes_at(point) {
            unsound_steps.push(step);
        }
        Ok(())
    })?;
    let key_polys = key_poly_summary(system.polys(), attack.key_mask());
    Ok(PairRun {
        plaintext: attack.plaintext,
        ciphertext: attack.ciphertext,
        system,
        trace,
        unsound_steps,
        key_polys,
    })
}

/// Pooled statistics over several runs, as for one batch of pairs.
pub fn pooled_key_polys(runs: &[PairRun], key_mask: u128) -> KeyPolySummary {
    key_poly_summary(runs.iter().flat_map(|r| r.system.polys()), key_mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(f: &[&str], n: usize) -> PolySystem {
        PolySystem::from_polys(f.iter().map(|s| s.parse().unwrap()).collect(), n).unwrap()
    }

    #[test]
    fn direct_substitution() {
        let s = sys(&["x0 + 1"], 1);
        assert_eq!(key_fits(&s, &[0], 1), KeyFitVerdict::Fits);
        assert_eq!(key_fits(&s, &[0], 0), KeyFitVerdict::NoFit);
        let empty = sys(&[], 2);
        assert_eq!(key_fits(&empty, &[0, 1], 2), KeyFitVerdict::Fits);
    }

    #[test]
    fn propagation_and_stall() {
        // With x0 = 1 only x1*x2 + x3 remains, which has no linear consequence.
        let s = sys(&["x0*x1*x2 + x3"], 4);
        assert_eq!(key_fits(&s, &[0], 1), KeyFitVerdict::Undecided);
        assert_eq!(key_fits(&s, &[0], 0), KeyFitVerdict::Fits);
        let s = sys(&["x0*x1 + 1", "x1*x2 + x3", "x2*x3 + 1"], 4);
        assert_eq!(key_fits(&s, &[0], 1), KeyFitVerdict::Fits);
        assert_eq!(key_fits(&s, &[0], 0), KeyFitVerdict::NoFit);
        let s = sys(&["x0*x1 + 1", "x1 + x2", "x2*x3 + x3"], 4);
        assert_eq!(key_fits(&s, &[0], 1), KeyFitVerdict::Fits);
        assert_eq!(KeyFitter::new(&s, &[0]).fits(1), KeyFitVerdict::Fits);
    }

    #[test]
    fn measures() {
        let m = InfoMeasure::from_counts(16, 3, 0, 65533);
        assert!((m.i_upper - 14.415037).abs() < 1e-6);
        assert_eq!(m.i_lower, m.i_upper);
        let all = info_measure(&sys(&[], 3), &[0, 1, 2]).unwrap();
        assert_eq!((all.fits, all.i_upper), (8, 0.0));
        let one = info_measure(&sys(&["x0 + 1", "x1", "x2 + 1"], 3), &[0, 1, 2]).unwrap();
        assert_eq!((one.fits, one.i_upper), (1, 3.0));
        assert_eq!(
            info_measure(&sys(&[], 2), &(0..25).collect::<Vec<_>>()),
            Err(Error::KeySpaceTooLarge { bits: 25, cap: 24 })
        );
    }

    #[test]
    fn empty_order_gives_one_row() {
        let s = sys(&["x0 + x2", "x1 + x2*x3"], 4);
        let report = info_loss_curve(&s, &[], Algo::ElimB, &[0, 1], &ElimConfig::default()).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.to_csv().lines().count(), 2);
    }
}
