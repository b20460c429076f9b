use boolelim::ciphers::{
    build_attack_system, build_instance, sbox_quadratic_relations, CipherInstance, CipherKind,
    CipherParams, SBox,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Deserialize;

const GOLDEN: &str = include_str!("fixtures/golden.json");

#[derive(Deserialize)]
struct Golden {
    cipher: String,
    rounds: usize,
    seed: u64,
    plaintext: String,
    key: String,
    ciphertext: String,
}

fn hex(s: &str) -> u128 {
    u128::from_str_radix(s, 16).unwrap()
}

fn instance(kind: CipherKind, rounds: usize, seed: u64) -> CipherInstance {
    let params = match kind {
        CipherKind::ReducedLowMc => CipherParams::lowmc(rounds),
        CipherKind::Toy => CipherParams::toy(rounds),
    };
    build_instance(kind, params, seed).unwrap()
}

fn parity(x: u128) -> u128 {
    (x.count_ones() & 1) as u128
}

/// Encryption written directly from the instance fields, bit by bit.
fn reference_encrypt(inst: &CipherInstance, plaintext: u128, key: u128) -> u128 {
    let block = inst.block_bits;
    let apply = |m: &[u128], x: u128| -> u128 { (0..m.len()).map(|i| parity(m[i] & x) << i).sum() };
    let round_key = |i: usize| -> u128 {
        if inst.key_matrices.is_empty() {
            key
        } else {
            apply(&inst.key_matrices[i], key)
        }
    };
    let width = inst.sbox.len().trailing_zeros() as usize;
    let mut s = plaintext ^ round_key(0);
    for r in 0..inst.rounds {
        let mut t = s;
        for b in 0..inst.sboxes_per_round {
            let lo = b * width;
            let x = (s >> lo) as usize & ((1 << width) - 1);
            t &= !(((1u128 << width) - 1) << lo);
            t |= (inst.sbox[x] as u128) << lo;
        }
        s = apply(&inst.linear_layers[r], t) ^ inst.round_constants[r] ^ round_key(r + 1);
        assert_eq!(s >> block, 0);
    }
    s
}

#[test]
fn golden_ciphertexts() {
    let cases: Vec<Golden> = serde_json::from_str(GOLDEN).unwrap();
    assert!(!cases.is_empty());
    for case in cases {
        let inst = instance(case.cipher.parse().unwrap(), case.rounds, case.seed);
        let (pt, key) = (hex(&case.plaintext), hex(&case.key));
        let ct = inst.encrypt(pt, key).unwrap();
        assert_eq!(ct, hex(&case.ciphertext), "{} r={} seed={}", case.cipher, case.rounds, case.seed);
        assert_eq!(inst.decrypt(ct, key).unwrap(), pt);
    }
}

#[test]
fn encryption_matches_reference_and_inverts() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    for (kind, rounds) in [(CipherKind::ReducedLowMc, 12), (CipherKind::Toy, 4)] {
        let inst = instance(kind, rounds, 3);
        for _ in 0..1000 {
            let (pt, key) = inst.random_pair(&mut rng);
            let ct = inst.encrypt(pt, key).unwrap();
            assert_eq!(ct, reference_encrypt(&inst, pt, key));
            assert_eq!(inst.decrypt(ct, key).unwrap(), pt);
        }
    }
}

#[test]
fn instances_depend_only_on_the_seed() {
    for kind in [CipherKind::ReducedLowMc, CipherKind::Toy] {
        assert_eq!(instance(kind, 4, 9), instance(kind, 4, 9));
        assert_ne!(instance(kind, 4, 9), instance(kind, 4, 10));
    }
}

#[test]
fn json_round_trip() {
    for kind in [CipherKind::ReducedLowMc, CipherKind::Toy] {
        let inst = instance(kind, 5, 2);
        assert_eq!(CipherInstance::from_json(&inst.to_json()).unwrap(), inst);
    }
    let mut broken: serde_json::Value = serde_json::from_str(&instance(CipherKind::Toy, 2, 0).to_json()).unwrap();
    broken["linear_layers"][0][0] = "0".into();
    broken["linear_layers"][0][1] = "0".into();
    assert!(CipherInstance::from_json(&broken.to_string()).is_err());
}

#[test]
fn lowmc_sbox_formula() {
    let s = SBox::lowmc3();
    for x in 0u16..8 {
        let (a, b, c) = (x >> 2 & 1, x >> 1 & 1, x & 1);
        let y = ((a ^ b & c) << 2) | ((a ^ b ^ a & c) << 1) | (a ^ b ^ c ^ a & b);
        assert_eq!(s.apply(x), y);
    }
}

#[test]
fn sbox_relations_vanish_on_the_graph() {
    for (s, count) in [(SBox::lowmc3(), 14), (SBox::prince4(), 21)] {
        let rel = sbox_quadratic_relations(&s);
        assert_eq!(rel.len(), count);
        let m = s.width();
        for x in 0..1u128 << m {
            let point = x | (s.apply(x as u16) as u128) << m;
            assert!(rel.iter().all(|r| r.degree() <= Some(2) && !r.eval_mask(point)));
        }
        assert_eq!(s.inverse().inverse(), s);
    }
    assert!(SBox::new(vec![0, 0, 1, 2]).is_err());
    assert!(SBox::new(vec![0, 1, 2]).is_err());
}

#[test]
fn parameter_errors() {
    assert!(build_instance(CipherKind::Toy, CipherParams::toy(0), 0).is_err());
    let wide = CipherParams {
        sboxes_per_round: 9,
        ..CipherParams::lowmc(2)
    };
    assert!(build_instance(CipherKind::ReducedLowMc, wide, 0).is_err());
    let inst = instance(CipherKind::Toy, 2, 0);
    assert!(inst.encrypt(1 << 16, 0).is_err());
    assert!(inst.encrypt(0, 1 << 16).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// The true key and intermediate values satisfy every equation.
    #[test]
    fn attack_systems_vanish_at_the_witness(seed in 0u64..1000, toy in any::<bool>(), rounds in 1usize..6) {
        let (kind, rounds) = if toy { (CipherKind::Toy, rounds + 1) } else { (CipherKind::ReducedLowMc, rounds) };
        let inst = instance(kind, rounds, seed);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (pt, key) = inst.random_pair(&mut rng);
        let attack = build_attack_system(&inst, pt, key).unwrap();
        prop_assert_eq!(attack.ciphertext, inst.encrypt(pt, key).unwrap());
        prop_assert_eq!(attack.witness().key, key);
        prop_assert_eq!(attack.witness().assignment & attack.key_mask(), key);
        prop_assert!(attack.system.vanishes_at(attack.witness().assignment));
        prop_assert!(attack.system.polys().all(|p| p.degree() <= Some(2)));
        if toy {
            prop_assert_eq!(attack.num_vars, 16 + (rounds - 1) * 16);
        } else {
            // The ciphertext equations remove up to one S-box variable each.
            prop_assert!(attack.num_vars <= 32 + 3 * rounds);
            prop_assert!(attack.num_vars >= 32 + (3 * rounds).saturating_sub(24));
        }
        let mut order = attack.interleaved_order();
        order.sort();
        order.dedup();
        let non_key: Vec<usize> = attack.descending_order().into_iter().rev().collect();
        if toy && rounds == 4 {
            prop_assert_eq!(order.len(), 31);
            prop_assert!(order.iter().all(|v| non_key.contains(v)));
        } else {
            prop_assert_eq!(order, non_key);
        }
    }
}
