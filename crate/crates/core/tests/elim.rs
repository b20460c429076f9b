use boolelim::elim::{
    eliminate_a, eliminate_b, eliminate_sequence, eliminate_step, l_elim_a, l_elim_b, rand_c, Algo,
    ElimConfig, PolySystem,
};
use boolelim::gf2linalg::{span_contains, span_equal};
use boolelim::oracle::zero_set;
use boolelim::{BoolPoly, Error, Monomial, Var};
use proptest::prelude::*;

fn p(s: &str) -> BoolPoly {
    s.parse().unwrap()
}

fn ps(v: &[&str]) -> Vec<BoolPoly> {
    v.iter().map(|s| p(s)).collect()
}

fn lenient() -> ElimConfig {
    ElimConfig {
        fail_on_inconsistent: false,
        ..ElimConfig::default()
    }
}

fn poly(n: usize, max_deg: u32) -> impl Strategy<Value = BoolPoly> {
    let mono = (0u128..1 << n)
        .prop_filter("degree", move |m| m.count_ones() <= max_deg)
        .prop_map(Monomial::from_mask);
    prop::collection::vec(mono, 1..6).prop_map(BoolPoly::from_monomials)
}

/// A system over `n` variables with a planted zero, plus that zero.
fn planted(max_n: usize) -> impl Strategy<Value = (usize, Vec<BoolPoly>, u128)> {
    (3..=max_n).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(poly(n, 2), 0..6),
            prop::collection::vec(poly(n, 3), 0..5),
            0u128..1 << n,
        )
            .prop_map(|(n, mut f, g, point)| {
                f.extend(g);
                for q in &mut f {
                    if q.eval_mask(point) {
                        *q = &*q + &BoolPoly::one();
                    }
                }
                (n, f, point)
            })
    })
}

fn algo() -> impl Strategy<Value = Algo> {
    prop::sample::select(Algo::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Every zero of the input restricts to a zero of the output.
    #[test]
    fn every_algorithm_is_sound((n, f, _) in planted(8), algo in algo(), steps in 1usize..4) {
        let sys = PolySystem::from_polys(f.clone(), n).unwrap();
        let order: Vec<Var> = (0..steps.min(n - 1)).collect();
        let (out, trace) = eliminate_sequence(&sys, &order, algo, &lenient()).unwrap();
        prop_assert_eq!(trace.steps.len(), order.len());
        for point in zero_set(&f, n).unwrap().points() {
            prop_assert!(out.vanishes_at(point));
        }
    }

    #[test]
    fn outputs_keep_degrees_and_drop_the_variable((n, f, _) in planted(7), algo in algo(), v in 0usize..7) {
        let v = v % n;
        let sys = PolySystem::from_polys(f, n).unwrap();
        let (out, step) = eliminate_step(&sys, v, algo, &lenient()).unwrap();
        prop_assert!(out.f2().iter().all(|g| g.degree() <= Some(2)));
        prop_assert!(out.f3().iter().all(|g| g.degree() <= Some(3)));
        prop_assert!(!out.is_live(v));
        prop_assert_eq!(out.live(), sys.live() & !(1 << v));
        prop_assert_eq!(out.support() & (1 << v), 0);
        prop_assert_eq!(out.eliminated(), &[v][..]);
        prop_assert_eq!((step.f2_after, step.f3_after), (out.f2().len(), out.f3().len()));
    }

    /// Iterating until no new quadratic appears only adds to the span.
    #[test]
    fn iterated_variants_contain_the_single_pass((n, f, _) in planted(7), v in 0usize..7) {
        let v = v % n;
        let sys = PolySystem::from_polys(f, n).unwrap();
        let spans = |algo| -> Vec<BoolPoly> {
            eliminate_step(&sys, v, algo, &lenient()).unwrap().0.polys().cloned().collect()
        };
        prop_assert!(span_contains(&spans(Algo::ElimB), &spans(Algo::ElimA)));
        prop_assert!(span_contains(&spans(Algo::LElimB), &spans(Algo::LElimA)));
    }

    /// On quadratic systems the output cuts out exactly the projection.
    #[test]
    fn quadratic_step_is_exact((n, f, _) in planted(6)) {
        let f: Vec<BoolPoly> = f.into_iter().filter(|g| g.degree() <= Some(2)).collect();
        let sys = PolySystem::from_polys(f.clone(), n).unwrap();
        let (out, _) = eliminate_step(&sys, 0, Algo::ElimA, &lenient()).unwrap();
        let out: Vec<BoolPoly> = out.polys().cloned().collect();
        let projected = zero_set(&f, n).unwrap().project_out(0);
        let cut = zero_set(&out, n).unwrap().project_out(0);
        prop_assert_eq!(projected, cut);
    }
}

#[test]
fn resultant_and_constraint_examples() {
    let r = rand_c(&ps(&["x1*x2 + x3", "x1*x3 + x2"]), 1);
    assert_eq!(r, ps(&["x2 + x3", "x2*x3 + x3", "x2*x3 + x2"]));
}

#[test]
fn single_step_examples() {
    // x1 = x2 and x1 = x3 leave x2 = x3.
    let sys = PolySystem::from_polys(ps(&["x1 + x2", "x1 + x3"]), 4).unwrap();
    for out in [
        l_elim_a(&sys, 1).unwrap(),
        l_elim_b(&sys, 1).unwrap(),
        eliminate_a(&sys, 1).unwrap(),
        eliminate_b(&sys, 1).unwrap(),
    ] {
        let polys: Vec<BoolPoly> = out.polys().cloned().collect();
        assert!(span_contains(&polys, &ps(&["x2 + x3"])));
    }

    // x1*x2 + x3 = 0 only forces x3 = 0 when x2 = 0.
    let sys = PolySystem::from_polys(ps(&["x1*x2 + x3"]), 4).unwrap();
    let out = eliminate_a(&sys, 1).unwrap();
    let polys: Vec<BoolPoly> = out.polys().cloned().collect();
    assert!(span_equal(&polys, &ps(&["x2*x3 + x3"])));
}

#[test]
fn contradictions_are_reported() {
    let sys = PolySystem::from_polys(ps(&["x0 + x1", "x0 + x1 + 1"]), 2).unwrap();
    for algo in Algo::ALL {
        assert_eq!(
            eliminate_step(&sys, 0, algo, &ElimConfig::default()).unwrap_err(),
            Error::Inconsistent
        );
        let (out, _) = eliminate_step(&sys, 0, algo, &lenient()).unwrap();
        assert!(out.has_contradiction());
    }
}

#[test]
fn order_errors() {
    let sys = PolySystem::from_polys(ps(&["x0*x1 + x2"]), 3).unwrap();
    let config = ElimConfig::default();
    assert_eq!(
        eliminate_sequence(&sys, &[0, 0], Algo::ElimA, &config).unwrap_err(),
        Error::RepeatedVariable(0)
    );
    assert_eq!(
        eliminate_sequence(&sys, &[5], Algo::ElimA, &config).unwrap_err(),
        Error::VariableNotLive(5)
    );
    let (out, trace) = eliminate_sequence(&sys, &[], Algo::ElimB, &config).unwrap();
    assert_eq!(out, sys);
    assert!(trace.steps.is_empty());
}

#[test]
fn tight_loop_budget_is_an_error() {
    let sys = PolySystem::from_polys(ps(&["x0*x1 + x2", "x0*x2 + x1", "x0 + x3*x4"]), 5).unwrap();
    let config = ElimConfig {
        loop_budget: Some(0),
        ..lenient()
    };
    assert!(matches!(
        eliminate_step(&sys, 0, Algo::ElimB, &config),
        Err(Error::LoopBudgetExceeded { budget: 0 })
    ));
}
