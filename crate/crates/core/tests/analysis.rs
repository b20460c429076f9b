use boolelim::analysis::{
    info_loss_curve, info_loss_curve_with, info_measure, key_fits, key_poly_summary, run_pair, sweep_keys,
    KeyFitVerdict, KeyFitter, KeySet, DEFAULT_KEY_CAP,
};
use boolelim::ciphers::{build_attack_system, build_instance, CipherKind, CipherParams};
use boolelim::elim::{Algo, ElimConfig, PolySystem};
use boolelim::oracle::zero_set;
use boolelim::{BoolPoly, Error, Monomial};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const KEY_BITS: usize = 3;

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
    prop::collection::vec(mono, 1..5).prop_map(BoolPoly::from_monomials)
}

fn planted() -> impl Strategy<Value = (usize, Vec<BoolPoly>)> {
    (4usize..=8).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(poly(n, 2), 1..8),
            prop::collection::vec(poly(n, 3), 0..3),
            0u128..1 << n,
        )
            .prop_map(|(n, mut f, g, point)| {
                f.extend(g);
                for q in &mut f {
                    if q.eval_mask(point) {
                        *q = &*q + &BoolPoly::one();
                    }
                }
                (n, f)
            })
    })
}

/// Keys (values of `x0..x(KEY_BITS-1)`) that extend to a zero of `f`.
fn extendable_keys(f: &[BoolPoly], n: usize) -> Vec<bool> {
    let mut ok = vec![false; 1 << KEY_BITS];
    for point in zero_set(f, n).unwrap().points() {
        ok[(point & ((1 << KEY_BITS) - 1)) as usize] = true;
    }
    ok
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    /// `Fits` only for keys with an extension, `NoFit` only for keys without.
    #[test]
    fn verdicts_agree_with_exhaustive_search((n, f) in planted()) {
        let sys = PolySystem::from_polys(f.clone(), n).unwrap();
        let key_vars: Vec<usize> = (0..KEY_BITS).collect();
        let truth = extendable_keys(&f, n);
        let fitter = KeyFitter::new(&sys, &key_vars);
        for key in 0..1u128 << KEY_BITS {
            let verdict = key_fits(&sys, &key_vars, key);
            prop_assert_eq!(fitter.fits(key), verdict);
            match verdict {
                KeyFitVerdict::Fits => prop_assert!(truth[key as usize]),
                KeyFitVerdict::NoFit => prop_assert!(!truth[key as usize]),
                KeyFitVerdict::Undecided => {}
            }
        }
    }

    #[test]
    fn fitted_keys_survive_elimination((n, f) in planted(), algo in prop::sample::select(Algo::ALL.to_vec())) {
        let sys = PolySystem::from_polys(f, n).unwrap();
        let key_vars: Vec<usize> = (0..KEY_BITS).collect();
        let order: Vec<usize> = (KEY_BITS..n).rev().collect();
        let report = info_loss_curve(&sys, &order, algo, &key_vars, &lenient()).unwrap();
        prop_assert!(report.is_monotone());
        prop_assert_eq!(report.rows.len(), order.len() + 1);
        for r in &report.rows {
            let m = &r.measure;
            prop_assert_eq!(m.tested, 1 << KEY_BITS);
            prop_assert_eq!(m.fits + m.undecided + m.no_fit, m.tested);
            prop_assert!(m.i_lower <= m.i_upper);
        }
    }

    #[test]
    fn measure_from_counts((n, f) in planted()) {
        let sys = PolySystem::from_polys(f, n).unwrap();
        let key_vars: Vec<usize> = (0..KEY_BITS).collect();
        let m = info_measure(&sys, &key_vars).unwrap();
        let expect = |c: u64| if c == 0 { f64::INFINITY } else { KEY_BITS as f64 - (c as f64).log2() };
        prop_assert!((m.i_upper - expect(m.fits)).abs() < 1e-12 || m.i_upper == expect(m.fits));
        prop_assert!((m.i_lower - expect(m.fits + m.undecided)).abs() < 1e-12 || m.i_lower == expect(m.fits + m.undecided));
    }
}

#[test]
fn fit_examples() {
    let sys = |f: &[&str], n| {
        PolySystem::from_polys(f.iter().map(|s| s.parse().unwrap()).collect(), n).unwrap()
    };
    // x0 + x1 = 1 and x1*x2 = x2 + 1 force x1 = 0, so x0 = 1 and x2 = 1.
    let s = sys(&["x0 + x1 + 1", "x1*x2 + x2 + 1"], 3);
    assert_eq!(key_fits(&s, &[0], 1), KeyFitVerdict::Fits);
    assert_eq!(key_fits(&s, &[0], 0), KeyFitVerdict::NoFit);
    // No linear polynomial appears after substitution.
    let s = sys(&["x1*x2 + x3*x4"], 5);
    assert_eq!(key_fits(&s, &[0], 0), KeyFitVerdict::Undecided);
    // An empty system fits every key.
    let s = sys(&[], 2);
    let m = info_measure(&s, &[0, 1]).unwrap();
    assert_eq!((m.fits, m.i_upper), (4, 0.0));
}

#[test]
fn key_space_limits() {
    let s = PolySystem::from_polys(vec![], 30).unwrap();
    let key_vars: Vec<usize> = (0..DEFAULT_KEY_CAP + 1).collect();
    assert!(matches!(info_measure(&s, &key_vars), Err(Error::KeySpaceTooLarge { .. })));
    assert!(sweep_keys(&s, &[0, 1], &KeySet::Sample(vec![4]), DEFAULT_KEY_CAP).is_err());
}

#[test]
fn toy_input_system_fits_the_true_key() {
    let inst = build_instance(CipherKind::Toy, CipherParams::toy(4), 1).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let (pt, key) = inst.random_pair(&mut rng);
    let attack = build_attack_system(&inst, pt, key).unwrap();
    let key_vars = attack.key_vars();
    assert_eq!(key_fits(&attack.system, &key_vars, key), KeyFitVerdict::Fits);

    let wrong: Vec<u128> = (1..6).map(|d| key ^ d).collect();
    let mut sample = vec![key];
    sample.extend(&wrong);
    let report = info_loss_curve_with(
        &attack.system,
        &[],
        Algo::ElimB,
        &key_vars,
        &KeySet::Sample(sample),
        &ElimConfig::default(),
        |_, _, verdicts| {
            assert_eq!(verdicts[0], KeyFitVerdict::Fits);
            Ok(())
        },
    )
    .unwrap();
    assert!(report.sampled);
    let csv = report.to_csv();
    assert!(csv.starts_with("step,var,fits,undecided,i_lower,i_upper,nF2,nF3,tested\n"));
    assert!(csv.lines().nth(1).unwrap().ends_with(",6"));
}

#[test]
fn short_lowmc_run_is_sound() {
    let inst = build_instance(CipherKind::ReducedLowMc, CipherParams::lowmc(10), 0).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    let (pt, key) = inst.random_pair(&mut rng);
    let attack = build_attack_system(&inst, pt, key).unwrap();
    let order = &attack.descending_order()[..3];
    let run = run_pair(&attack, order, Algo::ElimA, &ElimConfig::default()).unwrap();
    assert!(run.is_sound());
    assert_eq!(run.trace.steps.len(), 3);
    let summary = key_poly_summary(run.system.polys(), attack.key_mask());
    assert_eq!(summary, run.key_polys);
    assert!(summary.linear_rank <= summary.rank && summary.rank <= summary.total);
}
