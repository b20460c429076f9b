//! Degree-bounded elimination of one variable at a time.
//!
//! Four single-variable algorithms are provided, all keeping every
//! intermediate polynomial at degree 3 or below:
//!
//! - [`l_elim_a`]: linearize. Multiply the quadratics by `{1} ∪ variables`,
//!   add the cubics, and keep the part of the span free of the variable.
//! - [`l_elim_b`]: like [`l_elim_a`], but first harvest new quadratics from
//!   that span until they stop appearing.
//! - [`eliminate_a`]: resultants, coefficient constraints ([`rand_c`]) and
//!   normal forms ([`normalize`]), avoiding the big product matrix.
//! - [`eliminate_b`]: [`eliminate_a`] wrapped in the quadratic-harvesting loop.
//!
//! [`eliminate_sequence`] folds any of them over an elimination order.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::boolring::{BoolPoly, Monomial, MonomialOrder, Var, MAX_VARS};
use crate::error::{Error, Result};
use crate::gf2linalg::{reduce, span_equal, split_deg23, split_variable, GF2Matrix};

const DEG_CAP: Option<usize> = Some(3);

fn mask_of(n: usize) -> u128 {
    if n >= MAX_VARS {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

fn vars_of(mask: u128) -> impl Iterator<Item = Var> {
    Monomial::from_mask(mask).vars()
}

/// A system of Boolean equations `f = 0`, split into polynomials of degree
/// at most 2 (`F2`) and polynomials with cubic terms (`F3`), over a window
/// of still-live variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolySystem {
    f2: Vec<BoolPoly>,
    f3: Vec<BoolPoly>,
    live: u128,
    eliminated: Vec<Var>,
}

impl PolySystem {
    /// Build a system from its two parts. `F2` members must have degree at
    /// most 2 and `F3` members at most 3, and every variable must be live.
    /// Zero polynomials are dropped.
    pub fn new(f2: Vec<BoolPoly>, f3: Vec<BoolPoly>, live: u128) -> Result<PolySystem> {
        for (p, cap) in f2.iter().map(|p| (p, 2)).chain(f3.iter().map(|p| (p, 3))) {
            if let Some(d) = p.degree() {
                if d > cap {
                    return Err(Error::DegreeOverflow { degree: d, cap });
                }
            }
            let outside = p.support() & !live;
            if outside != 0 {
                return Err(Error::VariableNotLive(outside.trailing_zeros() as Var));
            }
        }
        Ok(PolySystem {
            f2: f2.into_iter().filter(|p| !p.is_zero()).collect(),
            f3: f3.into_iter().filter(|p| !p.is_zero()).collect(),
            live,
            eliminated: Vec::new(),
        })
    }

    /// Build a system over variables `0..n` from polynomials of degree at
    /// most 3, separating them with [`split_deg23`].
    pub fn from_polys(polys: Vec<BoolPoly>, n: usize) -> Result<PolySystem> {
        if n > MAX_VARS {
            return Err(Error::VariableOutOfRange(n));
        }
        if let Some(p) = polys.iter().find(|p| p.support() & !mask_of(n) != 0) {
            return Err(Error::VariableOutOfRange(
                127 - p.support().leading_zeros() as usize,
            ));
        }
        let (f2, f3) = split_deg23(&polys)?;
        PolySystem::new(f2, f3, mask_of(n))
    }

    /// Record which variables were already eliminated before this system.
    pub fn with_eliminated(mut self, eliminated: Vec<Var>) -> PolySystem {
        self.eliminated = eliminated;
        self
    }

    pub fn f2(&self) -> &[BoolPoly] {
        &self.f2
    }

    pub fn f3(&self) -> &[BoolPoly] {
        &self.f3
    }

    /// All polynomials, `F2` first.
    pub fn polys(&self) -> impl Iterator<Item = &BoolPoly> {
        self.f2.iter().chain(&self.f3)
    }

    pub fn len(&self) -> usize {
        self.f2.len() + self.f3.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f2.is_empty() && self.f3.is_empty()
    }

    /// Mask of live variables.
    pub fn live(&self) -> u128 {
        self.live
    }

    pub fn live_vars(&self) -> Vec<Var> {
        vars_of(self.live).collect()
    }

    pub fn is_live(&self, v: Var) -> bool {
        v < MAX_VARS && self.live >> v & 1 == 1
    }

    pub fn eliminated(&self) -> &[Var] {
        &self.eliminated
    }

    /// Mask of variables that actually occur.
    pub fn support(&self) -> u128 {
        self.polys().fold(0, |acc, p| acc | p.support())
    }

    /// True when every polynomial vanishes at `point` (bit `i` is `xi`).
    pub fn vanishes_at(&self, point: u128) -> bool {
        self.polys().all(|p| !p.eval_mask(point))
    }

    /// True when the constant 1 is one of the polynomials.
    pub fn has_contradiction(&self) -> bool {
        self.polys().any(BoolPoly::is_one)
    }

    fn successor(&self, v: Var, f2: Vec<BoolPoly>, f3: Vec<BoolPoly>) -> PolySystem {
        let mut eliminated = self.eliminated.clone();
        eliminated.push(v);
        let live = self.live & !(1u128 << v);
        debug_assert!(f2.iter().chain(&f3).all(|p| p.support() & !live == 0));
        PolySystem {
            f2,
            f3,
            live,
            eliminated,
        }
    }
}

/// Which single-variable algorithm to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algo {
    LElimA,
    LElimB,
    ElimA,
    ElimB,
}

impl Algo {
    pub const ALL: [Algo; 4] = [Algo::LElimA, Algo::LElimB, Algo::ElimA, Algo::ElimB];

    pub fn name(self) -> &'static str {
        match self {
            Algo::LElimA => "l-elim-a",
            Algo::LElimB => "l-elim-b",
            Algo::ElimA => "elim-a",
            Algo::ElimB => "elim-b",
        }
    }
}

impl std::str::FromStr for Algo {
    type Err = Error;
    fn from_str(s: &str) -> Result<Algo> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown algorithm `{s}`")))
    }
}

/// Knobs shared by all algorithms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElimConfig {
    /// Iteration cap for the quadratic-harvesting loop. `None` uses the
    /// dimension of the quadratic space plus one.
    pub loop_budget: Option<usize>,
    /// Raise [`Error::Inconsistent`] when the constant 1 is derived.
    pub fail_on_inconsistent: bool,
}

impl Default for ElimConfig {
    fn default() -> Self {
        ElimConfig {
            loop_budget: None,
            fail_on_inconsistent: true,
        }
    }
}

impl ElimConfig {
    fn budget(&self, live: usize) -> usize {
        self.loop_budget
            .unwrap_or(1 + live + live * live.saturating_sub(1) / 2 + 1)
    }
}

/// Measurements of one elimination step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepTrace {
    pub var: Var,
    pub f2_before: usize,
    pub f3_before: usize,
    pub f2_after: usize,
    pub f3_after: usize,
    /// Nonzero resultants `a_i b_j + a_j b_i` produced.
    pub resultants: usize,
    /// Nonzero coefficient constraints `b_i (a_i + 1)` produced.
    pub constraints: usize,
    /// Polynomials passed through [`normalize`].
    pub normalized: usize,
    /// Passes of the quadratic-harvesting loop (1 for the A variants).
    pub b_iterations: usize,
    /// Largest number of polynomials held on the cubic side at once.
    pub f3_high_water: usize,
    pub elapsed: Duration,
}

/// Per-step record of an elimination run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ElimTrace {
    pub steps: Vec<StepTrace>,
}

fn products(live: u128, f2: &[BoolPoly]) -> Vec<BoolPoly> {
    let mut out = Vec::with_capacity(f2.len() * (live.count_ones() as usize + 1));
    out.extend(f2.iter().cloned());
    for w in vars_of(live) {
        let x = Monomial::var(w);
        out.extend(f2.iter().map(|f| f.mul_monomial(x)));
    }
    debug_assert!(out.iter().all(|p| p.degree().unwrap_or(0) <= 3));
    out
}

fn check_degree(polys: &[BoolPoly]) {
    assert!(
        polys.iter().all(|p| p.degree().unwrap_or(0) <= 3),
        "degree bound violated inside elimination"
    );
}

/// Resultants and coefficient constraints of the polynomials in `f2_v`
/// with respect to `v`.
///
/// Writing `f_i = a_i x_v + b_i`, returns the nonzero members of
/// `{a_i b_j + a_j b_i : i < j}` followed by those of `{b_i (a_i + 1)}`,
/// and the number of each.
pub fn rand_c_counted(f2_v: &[BoolPoly], v: Var) -> (Vec<BoolPoly>, usize, usize) {
    let parts: Vec<(BoolPoly, BoolPoly)> = f2_v.iter().map(|f| f.decompose(v)).collect();
    let mut out = Vec::new();
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            let (ai, bi) = &parts[i];
            let (aj, bj) = &parts[j];
            let r = ai
                .mul_capped(bj, DEG_CAP)
                .and_then(|x| Ok(x + aj.mul_capped(bi, DEG_CAP)?))
                .expect("resultant of quadratics has degree at most 3");
            if !r.is_zero() {
                out.push(r);
            }
        }
    }
    let resultants = out.len();
    for (a, b) in &parts {
        let c = b
            .mul_capped(&(a + &BoolPoly::one()), DEG_CAP)
            .expect("constraint of a quadratic has degree at most 3");
        if !c.is_zero() {
            out.push(c);
        }
    }
    let constraints = out.len() - resultants;
    (out, resultants, constraints)
}

/// Resultants and coefficient constraints of `f2_v` with respect to `v`;
/// see [`rand_c_counted`].
pub fn rand_c(f2_v: &[BoolPoly], v: Var) -> Vec<BoolPoly> {
    rand_c_counted(f2_v, v).0
}

/// Reduce each polynomial of `f3_v` by monomial multiples of `f2_v`
/// without ever creating a monomial of degree 4.
///
/// `f2_v` must have pairwise distinct leading monomials under
/// `VariableFirst(v)`, all containing `v` (as produced by
/// [`split_variable`]). A monomial is cleared when it is divisible by a
/// quadratic leading monomial; a leading monomial equal to `x_v` only
/// clears monomials of degree at most 2. Monomials are cleared largest
/// first, using the largest applicable leading monomial.
///
/// Returns `(free_of_v, containing_v)`. The polynomials containing `v` are
/// row reduced under `VariableFirst(v)` afterwards, so no nonzero
/// combination of them is free of `v`; the free rows this uncovers join the
/// first set. Zero results are dropped.
pub fn normalize(
    f3_v: &[BoolPoly],
    f2_v: &[BoolPoly],
    v: Var,
) -> (Vec<BoolPoly>, Vec<BoolPoly>) {
    let order = MonomialOrder::VariableFirst(v);
    let mut by_lead: HashMap<Monomial, &BoolPoly> = HashMap::new();
    for f in f2_v {
        let lead = f.leading_monomial(order).expect("nonzero basis polynomial");
        assert!(lead.contains(v), "basis leading monomial must contain x{v}");
        let previous = by_lead.insert(lead, f);
        assert!(previous.is_none(), "basis leading monomials must be distinct");
    }
    let xv = Monomial::var(v);

    // Largest usable leading monomial dividing `m`, if any.
    let reducer = |m: Monomial| -> Option<(Monomial, &BoolPoly)> {
        let mut best: Option<Monomial> = None;
        for w in m.without(v).vars() {
            let lead = xv * Monomial::var(w);
            if by_lead.contains_key(&lead)
                && best.is_none_or(|b| order.cmp(lead, b).is_gt())
            {
                best = Some(lead);
            }
        }
        if best.is_none() && m.degree() <= 2 && by_lead.contains_key(&xv) {
            best = Some(xv);
        }
        best.map(|lead| (lead.quotient_of(m), by_lead[&lead]))
    };

    // Every reducible monomial containing v, largest first. With lead
    // q * lead(f) = m, every other term of q * f is smaller than m, so one
    // pass in this order reaches a 3-normal form.
    let support = f3_v.iter().chain(f2_v).fold(0u128, |acc, p| acc | p.support());
    let others: Vec<Var> = Monomial::from_mask(support & !xv.mask()).vars().collect();
    let mut candidates: Vec<Monomial> = vec![xv];
    for (i, &a) in others.iter().enumerate() {
        candidates.push(xv * Monomial::var(a));
        for &b in &others[i + 1..] {
            candidates.push(xv * Monomial::var(a) * Monomial::var(b));
        }
    }
    order.sort_desc(&mut candidates);
    let steps: Vec<(Monomial, Monomial, &BoolPoly)> = candidates
        .into_iter()
        .filter_map(|m| reducer(m).map(|(q, f)| (m, q, f)))
        .collect();

    // Rows: the reducing multiples q * f (each led by its m), then f3_v.
    let mut rows: Vec<BoolPoly> = steps.iter().map(|&(_, q, f)| f.mul_monomial(q)).collect();
    rows.extend(f3_v.iter().cloned());
    let mut mat = GF2Matrix::from_polys(&rows, order);
    let pivots: Vec<usize> = steps
        .iter()
        .map(|&(m, ..)| mat.basis().column(m).expect("lead is a column"))
        .collect();
    let k = steps.len();
    let bits = mat.bits_mut();
    for r in k..bits.nrows() {
        for (s, &c) in pivots.iter().enumerate() {
            if bits.get(r, c) {
                bits.add_row(s, r, c / 64);
            }
        }
    }

    let mut free = Vec::new();
    let mut with_v = Vec::new();
    for r in k..mat.nrows() {
        let g = mat.row_poly(r);
        if g.is_zero() {
            continue;
        }
        if g.contains_var(v) {
            with_v.push(g);
        } else {
            free.push(g);
        }
    }
    // Linear combinations of normal forms are still normal.
    let (with_v, uncovered) = split_variable(&with_v, v);
    free.extend(uncovered);
    (free, with_v)
}

fn check_live(sys: &PolySystem, v: Var) -> Result<()> {
    if sys.is_live(v) {
        Ok(())
    } else {
        Err(Error::VariableNotLive(v))
    }
}

fn finish(
    sys: &PolySystem,
    v: Var,
    f2: Vec<BoolPoly>,
    f3: Vec<BoolPoly>,
    mut trace: StepTrace,
    config: &ElimConfig,
    start: Instant,
) -> Result<(PolySystem, StepTrace)> {
    check_degree(&f3);
    debug_assert!(f2.iter().all(|p| p.degree().unwrap_or(0) <= 2));
    let out = sys.successor(v, f2, f3);
    if config.fail_on_inconsistent && out.has_contradiction() {
        return Err(Error::Inconsistent);
    }
    trace.f2_after = out.f2.len();
    trace.f3_after = out.f3.len();
    trace.elapsed = start.elapsed();
    Ok((out, trace))
}

fn new_trace(sys: &PolySystem, v: Var) -> StepTrace {
    StepTrace {
        var: v,
        f2_before: sys.f2.len(),
        f3_before: sys.f3.len(),
        ..StepTrace::default()
    }
}

/// The part of the span of `f_star` free of `v`, split by degree.
fn v_free_part(f_star: &[BoolPoly], v: Var) -> (Vec<BoolPoly>, Vec<BoolPoly>) {
    let (_, free) = split_variable(f_star, v);
    split_deg23(&free).expect("inputs have degree at most 3")
}

fn l_elim_a_step(
    sys: &PolySystem,
    v: Var,
    config: &ElimConfig,
) -> Result<(PolySystem, StepTrace)> {
    check_live(sys, v)?;
    let start = Instant::now();
    let mut trace = new_trace(sys, v);
    let mut f_star = sys.f3.clone();
    f_star.extend(products(sys.live, &sys.f2));
    trace.f3_high_water = f_star.len();
    trace.b_iterations = 1;
    let (f2, f3) = v_free_part(&f_star, v);
    finish(sys, v, f2, f3, trace, config, start)
}

fn l_elim_b_step(
    sys: &PolySystem,
    v: Var,
    config: &ElimConfig,
) -> Result<(PolySystem, StepTrace)> {
    check_live(sys, v)?;
    let start = Instant::now();
    let mut trace = new_trace(sys, v);
    let budget = config.budget(sys.live.count_ones() as usize);
    let mut f2 = sys.f2.clone();
    let mut f3 = sys.f3.clone();
    let f_star = loop {
        trace.b_iterations += 1;
        if trace.b_iterations > budget {
            return Err(Error::LoopBudgetExceeded { budget });
        }
        let mut f_star = f3.clone();
        f_star.extend(products(sys.live, &f2));
        trace.f3_high_water = trace.f3_high_water.max(f_star.len());
        let (f2_new, f3_new) = split_deg23(&f_star).expect("degree at most 3");
        if span_equal(&f2_new, &f2) {
            break f_star;
        }
        f2 = f2_new;
        f3 = f3_new;
    };
    let (f2, f3) = v_free_part(&f_star, v);
    finish(sys, v, f2, f3, trace, config, start)
}

/// The polynomials `(x_v + 1) f` for `f` in `f2_v` and `x_v f` for `f` in
/// `f2_not_v`.
fn v_products(f2_v: &[BoolPoly], f2_not_v: &[BoolPoly], v: Var) -> Vec<BoolPoly> {
    let xv = Monomial::var(v);
    f2_v.iter()
        .map(|f| f + &f.mul_monomial(xv))
        .chain(f2_not_v.iter().map(|f| f.mul_monomial(xv)))
        .collect()
}

fn eliminate_a_step(
    sys: &PolySystem,
    v: Var,
    config: &ElimConfig,
) -> Result<(PolySystem, StepTrace)> {
    check_live(sys, v)?;
    let start = Instant::now();
    let mut trace = new_trace(sys, v);
    trace.b_iterations = 1;

    let (f2_v, f2_not_v) = split_variable(&sys.f2, v);
    let mut f3 = sys.f3.clone();
    f3.extend(v_products(&f2_v, &f2_not_v, v));
    trace.f3_high_water = f3.len();
    let (f3_v, mut f3_not_v) = split_variable(&f3, v);
    let (norm_free, _norm_v) = normalize(&f3_v, &f2_v, v);
    trace.normalized = f3_v.len();
    let (r, resultants, constraints) = rand_c_counted(&f2_v, v);
    trace.resultants = resultants;
    trace.constraints = constraints;

    f3_not_v.extend(norm_free);
    f3_not_v.extend(r);
    trace.f3_high_water = trace.f3_high_water.max(f3_not_v.len());
    let f3_out = reduce(&f3_not_v, MonomialOrder::DegreeFirst);
    finish(sys, v, f2_not_v, f3_out, trace, config, start)
}

fn eliminate_b_step(
    sys: &PolySystem,
    v: Var,
    config: &ElimConfig,
) -> Result<(PolySystem, StepTrace)> {
    check_live(sys, v)?;
    let start = Instant::now();
    let mut trace = new_trace(sys, v);
    let budget = config.budget(sys.live.count_ones() as usize);

    let (mut f2_v, mut f2_not_v) = split_variable(&sys.f2, v);
    let mut f3 = sys.f3.clone();
    loop {
        trace.b_iterations += 1;
        if trace.b_iterations > budget {
            return Err(Error::LoopBudgetExceeded { budget });
        }
        let mut all = f3.clone();
        all.extend(v_products(&f2_v, &f2_not_v, v));
        trace.f3_high_water = trace.f3_high_water.max(all.len());
        let (f3_v, f3_not_v) = split_variable(&all, v);
        let (norm_free, norm_v) = normalize(&f3_v, &f2_v, v);
        trace.normalized += f3_v.len();
        let (r, resultants, constraints) = rand_c_counted(&f2_v, v);
        trace.resultants += resultants;
        trace.constraints += constraints;

        // Everything derived so far; keeping the unreduced cubics and the
        // current quadratics makes successive spans nested.
        let mut pool = norm_free;
        pool.extend(norm_v);
        pool.extend(f3_not_v);
        pool.extend(r);
        pool.extend(f3_v);
        pool.extend(f2_v.iter().cloned());
        pool.extend(f2_not_v.iter().cloned());
        trace.f3_high_water = trace.f3_high_water.max(pool.len());
        let (f2_new, f3_new) = split_deg23(&pool).expect("degree at most 3");
        f3 = f3_new;
        let (new_v, new_not_v) = split_variable(&f2_new, v);
        let stable = span_equal(&new_v, &f2_v) && span_equal(&new_not_v, &f2_not_v);
        f2_v = new_v;
        f2_not_v = new_not_v;
        if stable {
            break;
        }
    }

    // Cubic rows may need a quadratic containing v to cancel v, so the
    // v-free part is taken over everything retained.
    let mut all = f3;
    all.extend(f2_v);
    all.extend(f2_not_v);
    let (f2_out, f3_out) = v_free_part(&all, v);
    finish(sys, v, f2_out, f3_out, trace, config, start)
}

/// Run one elimination step with the chosen algorithm.
pub fn eliminate_step(
    sys: &PolySystem,
    v: Var,
    algo: Algo,
    config: &ElimConfig,
) -> Result<(PolySystem, StepTrace)> {
    match algo {
        Algo::LElimA => l_elim_a_step(sys, v, config),
        Algo::LElimB => l_elim_b_step(sys, v, config),
        Algo::ElimA => eliminate_a_step(sys, v, config),
        Algo::ElimB => eliminate_b_step(sys, v, config),
    }
}

/// Eliminate `v` by linearization: the output spans the polynomials of
/// degree ≤ 3 free of `v` in the span of `F3 ∪ {1, x_0, ...}·F2`.
pub fn l_elim_a(sys: &PolySystem, v: Var) -> Result<PolySystem> {
    Ok(l_elim_a_step(sys, v, &ElimConfig::default())?.0)
}

/// [`l_elim_a`] after harvesting every quadratic obtainable from the
/// linearized span.
pub fn l_elim_b(sys: &PolySystem, v: Var) -> Result<PolySystem> {
    Ok(l_elim_b_step(sys, v, &ElimConfig::default())?.0)
}

/// Eliminate `v` with resultants, coefficient constraints and normal forms.
///
/// The `F3` side of the result may hold polynomials of degree below 3 that
/// came out of normalization.
pub fn eliminate_a(sys: &PolySystem, v: Var) -> Result<PolySystem> {
    Ok(eliminate_a_step(sys, v, &ElimConfig::default())?.0)
}

/// [`eliminate_a`] repeated until no new quadratics appear.
pub fn eliminate_b(sys: &PolySystem, v: Var) -> Result<PolySystem> {
    Ok(eliminate_b_step(sys, v, &ElimConfig::default())?.0)
}

fn check_order(sys: &PolySystem, order: &[Var]) -> Result<()> {
    let mut seen = 0u128;
    for &v in order {
        if !sys.is_live(v) {
            return Err(Error::VariableNotLive(v));
        }
        if seen >> v & 1 == 1 {
            return Err(Error::RepeatedVariable(v));
        }
        seen |= 1 << v;
    }
    Ok(())
}

/// Eliminate the variables of `order` one after another, calling
/// `observer` with the system and trace after every step. An observer
/// error stops the run.
pub fn eliminate_sequence_with<F>(
    sys: &PolySystem,
    order: &[Var],
    algo: Algo,
    config: &ElimConfig,
    mut observer: F,
) -> Result<(PolySystem, ElimTrace)>
where
    F: FnMut(&PolySystem, &StepTrace) -> Result<()>,
{
    check_order(sys, order)?;
    let mut current = sys.clone();
    let mut trace = ElimTrace::default();
    for &v in order {
        let (next, step) = eliminate_step(&current, v, algo, config)?;
        observer(&next, &step)?;
        trace.steps.push(step);
        current = next;
    }
    Ok((current, trace))
}

/// Eliminate the variables of `order` one after another.
pub fn eliminate_sequence(
    sys: &PolySystem,
    order: &[Var],
    algo: Algo,
    config: &ElimConfig,
) -> Result<(PolySystem, ElimTrace)> {
    eliminate_sequence_with(sys, order, algo, config, |_, _| Ok(()))
}

/// The live variables of `sys` other than `key_vars`, highest index first.
pub fn descending_order(sys: &PolySystem, key_vars: u128) -> Vec<Var> {
    let mut order: Vec<Var> = vars_of(sys.live & !key_vars).collect();
    order.reverse();
    order
}

/// `{1} ∪ {x_w : w live in sys, w ≠ v}` times `polys`, for comparing
/// outputs as spans.
pub fn linear_multiples(polys: &[BoolPoly], live: u128) -> Vec<BoolPoly> {
    products(live, polys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2linalg::span_contains;

    fn p(s: &str) -> BoolPoly {
        s.parse().unwrap()
    }

    fn ps(v: &[&str]) -> Vec<BoolPoly> {
        v.iter().map(|s| p(s)).collect()
    }

    fn system(f2: &[&str], f3: &[&str], n: usize) -> PolySystem {
        PolySystem::new(ps(f2), ps(f3), mask_of(n)).unwrap()
    }

    #[test]
    fn rand_c_examples() {
        let r = rand_c(&ps(&["x1*x2 + x3", "x1*x3 + x2"]), 1);
        assert_eq!(r, ps(&["x2 + x3", "x2*x3 + x3", "x2*x3 + x2"]));
        let f = p("x1*x2 + x3");
        assert_eq!(rand_c(&[f.clone(), f], 1), ps(&["x2*x3 + x3", "x2*x3 + x3"]));
        assert!(rand_c(&ps(&["x1 + x2"]), 1).is_empty());
    }

    #[test]
    fn normalize_examples() {
        let (free, with_v) = normalize(&ps(&["x1*x2*x4 + x5"]), &ps(&["x1*x2 + x3"]), 1);
        assert_eq!((free, with_v), (ps(&["x3*x4 + x5"]), vec![]));

        let (free, with_v) = normalize(&ps(&["x1*x3 + x4"]), &ps(&["x1 + x2"]), 1);
        assert_eq!((free, with_v), (ps(&["x2*x3 + x4"]), vec![]));

        let (free, with_v) = normalize(&ps(&["x1*x3*x4"]), &ps(&["x1 + x2"]), 1);
        assert_eq!((free, with_v), (vec![], ps(&["x1*x3*x4"])));
    }

    #[test]
    fn l_elim_a_examples() {
        // The output is x2 + x3 together with its linear multiples.
        let out = l_elim_a(&system(&["x1 + x2", "x1 + x3"], &[], 4), 1).unwrap();
        let expected = linear_multiples(&ps(&["x2 + x3"]), out.live());
        assert!(span_equal(out.f2(), &expected));

        let sys = system(&[], &["x2*x3*x4"], 5);
        let out = l_elim_a(&sys, 1).unwrap();
        assert_eq!(out.f3(), sys.f3());
        assert!(out.f2().is_empty());

        assert!(l_elim_a(&system(&["x1"], &[], 3), 1).unwrap().is_empty());
    }

    #[test]
    fn eliminate_a_examples() {
        let out = eliminate_a(&system(&["x1 + x2", "x1 + x3"], &[], 4), 1).unwrap();
        assert_eq!(out.f2(), &ps(&["x2 + x3"]));
        assert!(span_contains(&linear_multiples(out.f2(), out.live()), out.f3()));

        let out = eliminate_a(&system(&["x2 + x3"], &[], 4), 1).unwrap();
        assert_eq!(out.f2(), &ps(&["x2 + x3"]));
        assert!(out.f3().is_empty());

        assert!(eliminate_a(&system(&[], &[], 3), 1).unwrap().is_empty());
        assert!(eliminate_b(&system(&[], &[], 3), 1).unwrap().is_empty());
        assert!(l_elim_b(&system(&[], &[], 3), 1).unwrap().is_empty());
    }

    #[test]
    fn errors() {
        let sys = system(&["x1 + x2"], &[], 3);
        assert_eq!(eliminate_a(&sys, 5), Err(Error::VariableNotLive(5)));
        assert_eq!(
            eliminate_sequence(&sys, &[1, 1], Algo::ElimA, &ElimConfig::default()).unwrap_err(),
            Error::RepeatedVariable(1)
        );
        let bad = system(&["x1 + x2", "x1 + x2 + 1"], &[], 3);
        assert_eq!(eliminate_a(&bad, 1), Err(Error::Inconsistent));
        let cfg = ElimConfig {
            fail_on_inconsistent: false,
            ..ElimConfig::default()
        };
        let (out, _) = eliminate_step(&bad, 1, Algo::ElimA, &cfg).unwrap();
        assert!(out.has_contradiction());
    }

    #[test]
    fn empty_order_is_identity() {
        let sys = system(&["x1 + x2"], &["x1*x2*x3"], 4);
        for algo in Algo::ALL {
            let (out, trace) = eliminate_sequence(&sys, &[], algo, &ElimConfig::default()).unwrap();
            assert_eq!(out, sys);
            assert!(trace.steps.is_empty());
        }
    }

    #[test]
    fn algo_names_round_trip() {
        for algo in Algo::ALL {
            assert_eq!(algo.name().parse::<Algo>().unwrap(), algo);
        }
        assert!("elim-c".parse::<Algo>().is_err());
    }
}
