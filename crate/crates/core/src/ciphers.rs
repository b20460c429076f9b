//! Two reduced block ciphers and their attack equation systems.
//!
//! Both ciphers are substitution-permutation networks over a block of at
//! most 128 bits. A round applies S-boxes to the lowest bits of the state,
//! then a random invertible linear layer, a round constant, and a round key.
//!
//! - Reduced LowMC: 24-bit block, 32-bit key, one 3-bit S-box per round.
//!   Round keys are random linear images of the master key; round key 0 is
//!   added before the first round.
//! - Toy cipher: 16-bit block and key, four 4-bit PRINCE S-boxes per round,
//!   the master key added before the first round and after every round.
//!
//! Linear layers, constants and key matrices are drawn from ChaCha20 seeded
//! with a `u64`, so an instance is a pure function of its parameters and seed.
//!
//! [`build_attack_system`] turns a known plaintext/ciphertext pair into
//! quadratic equations in the key bits and S-box output bits.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::boolring::{BoolPoly, Monomial, Var};
use crate::elim::PolySystem;
use crate::error::{Error, Result};
use crate::gf2linalg::{reduce, BitMatrix};

/// Identifier of the generator stored in instance files.
pub const RNG_ID: &str = "chacha20/seed_from_u64";

/// An invertible S-box on `width`-bit values. Input bit `j` of a table
/// index is state bit `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SBox {
    width: usize,
    table: Vec<u16>,
}

impl SBox {
    pub fn new(table: Vec<u16>) -> Result<SBox> {
        let len = table.len();
        if len < 2 || !len.is_power_of_two() || len > 256 {
            return Err(Error::InvalidParams(format!(
                "S-box table length {len} is not a power of two between 2 and 256"
            )));
        }
        let mut seen = vec![false; len];
        for &y in &table {
            let y = y as usize;
            if y >= len || seen[y] {
                return Err(Error::InvalidParams("S-box table is not a bijection".into()));
            }
            seen[y] = true;
        }
        Ok(SBox {
            width: len.trailing_zeros() as usize,
            table,
        })
    }

    /// The 3-bit LowMC S-box: with `a` the top bit and `c` the bottom bit,
    /// outputs `(a + bc, a + b + ac, a + b + c + ab)`.
    pub fn lowmc3() -> SBox {
        SBox::new(vec![0, 1, 3, 6, 7, 4, 5, 2]).expect("valid table")
    }

    /// The 4-bit PRINCE S-box.
    pub fn prince4() -> SBox {
        SBox::new(vec![
            0xB, 0xF, 0x3, 0x2, 0xA, 0xC, 0x9, 0x1, 0x6, 0x7, 0x8, 0x0, 0xE, 0x5, 0xD, 0x4,
        ])
        .expect("valid table")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn table(&self) -> &[u16] {
        &self.table
    }

    pub fn apply(&self, x: u16) -> u16 {
        self.table[x as usize]
    }

    pub fn inverse(&self) -> SBox {
        let mut inv = vec![0; self.table.len()];
        for (x, &y) in self.table.iter().enumerate() {
            inv[y as usize] = x as u16;
        }
        SBox {
            width: self.width,
            table: inv,
        }
    }
}

/// Every polynomial of degree at most 2 in the inputs `x0..x(m-1)` and the
/// outputs `xm..x(2m-1)` vanishing on all input/output pairs, as a reduced
/// basis.
pub fn sbox_quadratic_relations(s: &SBox) -> Vec<BoolPoly> {
    let m = s.width;
    let mut monomials = vec![Monomial::ONE];
    for i in 0..2 * m {
        monomials.push(Monomial::var(i));
        for j in i + 1..2 * m {
            monomials.push(Monomial::var(i) * Monomial::var(j));
        }
    }
    // One row per input/output pair, one column per monomial.
    let mut eval = BitMatrix::zeros(1 << m, monomials.len());
    for x in 0..(1u128 << m) {
        let point = x | (s.apply(x as u16) as u128) << m;
        for (c, mono) in monomials.iter().enumerate() {
            if mono.eval_mask(point) {
                eval.set(x as usize, c, true);
            }
        }
    }
    let null = eval.null_space();
    let relations: Vec<BoolPoly> = (0..null.nrows())
        .map(|r| BoolPoly::from_monomials(null.row_ones(r).map(|c| monomials[c])))
        .collect();
    reduce(&relations, crate::boolring::MonomialOrder::DegreeFirst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CipherKind {
    #[serde(rename = "lowmc")]
    ReducedLowMc,
    #[serde(rename = "toy")]
    Toy,
}

impl CipherKind {
    pub fn name(self) -> &'static str {
        match self {
            CipherKind::ReducedLowMc => "lowmc",
            CipherKind::Toy => "toy",
        }
    }
}

impl fmt::Display for CipherKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CipherKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<CipherKind> {
        match s {
            "lowmc" => Ok(CipherKind::ReducedLowMc),
            "toy" => Ok(CipherKind::Toy),
            _ => Err(Error::InvalidParams(format!("unknown cipher `{s}`"))),
        }
    }
}

/// Size parameters of a cipher.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CipherParams {
    pub block_bits: usize,
    pub key_bits: usize,
    pub rounds: usize,
    pub sboxes_per_round: usize,
}

impl CipherParams {
    /// 24-bit block, 32-bit key, one S-box per round.
    pub fn lowmc(rounds: usize) -> CipherParams {
        CipherParams {
            block_bits: 24,
            key_bits: 32,
            rounds,
            sboxes_per_round: 1,
        }
    }

    /// 16-bit block and key, four S-boxes per round.
    pub fn toy(rounds: usize) -> CipherParams {
        CipherParams {
            block_bits: 16,
            key_bits: 16,
            rounds,
            sboxes_per_round: 4,
        }
    }

    pub fn default_for(kind: CipherKind) -> CipherParams {
        match kind {
            CipherKind::ReducedLowMc => CipherParams::lowmc(12),
            CipherKind::Toy => CipherParams::toy(4),
        }
    }
}

mod hex {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn to_hex(x: u128) -> String {
        format!("{x:x}")
    }

    pub fn from_hex(s: &str) -> Result<u128, String> {
        u128::from_str_radix(s, 16).map_err(|e| format!("bad hex `{s}`: {e}"))
    }

    pub mod rows {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[u128], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|&x| to_hex(x)))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u128>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|s| from_hex(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }

    pub mod matrices {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Vec<u128>], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(
                v.iter()
                    .map(|m| m.iter().map(|&x| to_hex(x)).collect::<Vec<_>>()),
            )
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<u128>>, D::Error> {
            Vec::<Vec<String>>::deserialize(d)?
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|s| from_hex(s).map_err(serde::de::Error::custom))
                        .collect()
                })
                .collect()
        }
    }
}

/// A fully materialized cipher. Matrices are lists of row masks: output bit
/// `i` of `M x` is the parity of `M[i] & x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CipherInstance {
    pub kind: CipherKind,
    pub block_bits: usize,
    pub key_bits: usize,
    pub rounds: usize,
    pub sboxes_per_round: usize,
    pub sbox: Vec<u16>,
    pub seed: u64,
    pub rng: String,
    /// One invertible `block x block` matrix per round.
    #[serde(with = "hex::matrices")]
    pub linear_layers: Vec<Vec<u128>>,
    /// One constant per round.
    #[serde(with = "hex::rows")]
    pub round_constants: Vec<u128>,
    /// `rounds + 1` matrices of shape `block x key` mapping the master key
    /// to round keys. Empty means every round key is the master key.
    #[serde(with = "hex::matrices")]
    pub key_matrices: Vec<Vec<u128>>,
}

fn mask_of(n: usize) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

fn mat_vec(rows: &[u128], x: u128) -> u128 {
    rows.iter()
        .enumerate()
        .fold(0, |acc, (i, &r)| acc | (((r & x).count_ones() & 1) as u128) << i)
}

fn to_bitmatrix(rows: &[u128], ncols: usize) -> BitMatrix {
    let mut m = BitMatrix::zeros(rows.len(), ncols);
    for (i, &r) in rows.iter().enumerate() {
        for c in Monomial::from_mask(r).vars() {
            m.set(i, c, true);
        }
    }
    m
}

fn from_bitmatrix(m: &BitMatrix) -> Vec<u128> {
    (0..m.nrows())
        .map(|r| m.row_ones(r).fold(0u128, |acc, c| acc | 1 << c))
        .collect()
}

fn invert(rows: &[u128]) -> Option<Vec<u128>> {
    to_bitmatrix(rows, rows.len())
        .inverse()
        .map(|m| from_bitmatrix(&m))
}

fn random_matrix(rng: &mut ChaCha20Rng, nrows: usize, ncols: usize) -> Vec<u128> {
    (0..nrows).map(|_| rng.random::<u128>() & mask_of(ncols)).collect()
}

fn random_invertible(rng: &mut ChaCha20Rng, n: usize) -> Vec<u128> {
    loop {
        let m = random_matrix(rng, n, n);
        if to_bitmatrix(&m, n).rank() == n {
            return m;
        }
    }
}

/// Build a cipher from its kind, parameters and seed.
pub fn build_instance(kind: CipherKind, params: CipherParams, seed: u64) -> Result<CipherInstance> {
    let sbox = match kind {
        CipherKind::ReducedLowMc => SBox::lowmc3(),
        CipherKind::Toy => SBox::prince4(),
    };
    let CipherParams {
        block_bits,
        key_bits,
        rounds,
        sboxes_per_round,
    } = params;
    if rounds == 0 {
        return Err(Error::InvalidParams("rounds must be at least 1".into()));
    }
    if block_bits == 0 || block_bits > 128 || key_bits == 0 || key_bits > 128 {
        return Err(Error::InvalidParams(
            "block and key sizes must be between 1 and 128 bits".into(),
        ));
    }
    if sboxes_per_round == 0 || sboxes_per_round * sbox.width() > block_bits {
        return Err(Error::InvalidParams(format!(
            "{sboxes_per_round} S-boxes of width {} do not fit a {block_bits}-bit block",
            sbox.width()
        )));
    }
    if kind == CipherKind::Toy && key_bits != block_bits {
        return Err(Error::InvalidParams(
            "the toy cipher needs key and block of equal size".into(),
        ));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let linear_layers = (0..rounds)
        .map(|_| random_invertible(&mut rng, block_bits))
        .collect();
    let round_constants = (0..rounds)
        .map(|_| rng.random::<u128>() & mask_of(block_bits))
        .collect();
    let key_matrices = match kind {
        CipherKind::ReducedLowMc => (0..=rounds)
            .map(|_| random_matrix(&mut rng, block_bits, key_bits))
            .collect(),
        CipherKind::Toy => Vec::new(),
    };
    Ok(CipherInstance {
        kind,
        block_bits,
        key_bits,
        rounds,
        sboxes_per_round,
        sbox: sbox.table().to_vec(),
        seed,
        rng: RNG_ID.to_string(),
        linear_layers,
        round_constants,
        key_matrices,
    })
}

impl CipherInstance {
    pub fn params(&self) -> CipherParams {
        CipherParams {
            block_bits: self.block_bits,
            key_bits: self.key_bits,
            rounds: self.rounds,
            sboxes_per_round: self.sboxes_per_round,
        }
    }

    pub fn sbox(&self) -> SBox {
        SBox::new(self.sbox.clone()).expect("instance holds a valid S-box")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<CipherInstance> {
        let inst: CipherInstance =
            serde_json::from_str(text).map_err(|e| Error::InvalidParams(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        let sbox = SBox::new(self.sbox.clone())?;
        if self.rounds == 0 || self.block_bits == 0 || self.block_bits > 128 {
            return bad("bad sizes");
        }
        if self.sboxes_per_round * sbox.width() > self.block_bits {
            return bad("S-box layer wider than the block");
        }
        if self.linear_layers.len() != self.rounds || self.round_constants.len() != self.rounds {
            return bad("one linear layer and one constant per round expected");
        }
        for l in &self.linear_layers {
            if l.len() != self.block_bits || invert(l).is_none() {
                return bad("linear layers must be invertible block x block matrices");
            }
        }
        if self.key_matrices.is_empty() {
            if self.key_bits != self.block_bits {
                return bad("identity key schedule needs key and block of equal size");
            }
        } else if self.key_matrices.len() != self.rounds + 1
            || self.key_matrices.iter().any(|m| m.len() != self.block_bits)
        {
            return bad("rounds + 1 key matrices of block rows expected");
        }
        Ok(())
    }

    fn check_sizes(&self, block: u128, key: u128) -> Result<()> {
        if block & !mask_of(self.block_bits) != 0 {
            return Err(Error::DimensionMismatch {
                expected: self.block_bits,
                got: 128 - block.leading_zeros() as usize,
            });
        }
        if key & !mask_of(self.key_bits) != 0 {
            return Err(Error::DimensionMismatch {
                expected: self.key_bits,
                got: 128 - key.leading_zeros() as usize,
            });
        }
        Ok(())
    }

    /// Round key `i` (0 is added before the first round).
    pub fn round_key(&self, i: usize, key: u128) -> u128 {
        if self.key_matrices.is_empty() {
            key
        } else {
            mat_vec(&self.key_matrices[i], key)
        }
    }

    fn sbox_layer(&self, sbox: &SBox, state: u128) -> u128 {
        let m = sbox.width();
        let mut out = state;
        for t in 0..self.sboxes_per_round {
            let shift = t * m;
            let x = (state >> shift) as u16 & ((1 << m) - 1);
            out &= !(mask_of(m) << shift);
            out |= (sbox.apply(x) as u128) << shift;
        }
        out
    }

    pub fn encrypt(&self, plaintext: u128, key: u128) -> Result<u128> {
        self.check_sizes(plaintext, key)?;
        let sbox = self.sbox();
        let mut s = plaintext ^ self.round_key(0, key);
        for i in 0..self.rounds {
            s = self.sbox_layer(&sbox, s);
            s = mat_vec(&self.linear_layers[i], s) ^ self.round_constants[i] ^ self.round_key(i + 1, key);
        }
        Ok(s)
    }

    pub fn decrypt(&self, ciphertext: u128, key: u128) -> Result<u128> {
        self.check_sizes(ciphertext, key)?;
        let inv_sbox = self.sbox().inverse();
        let mut s = ciphertext;
        for i in (0..self.rounds).rev() {
            let inv = invert(&self.linear_layers[i]).expect("linear layers are invertible");
            s = mat_vec(&inv, s ^ self.round_constants[i] ^ self.round_key(i + 1, key));
            s = self.sbox_layer(&inv_sbox, s);
        }
        Ok(s ^ self.round_key(0, key))
    }

    /// A random plaintext and key drawn from `rng`.
    pub fn random_pair<R: Rng>(&self, rng: &mut R) -> (u128, u128) {
        let p = self.random_plaintext(rng);
        (p, self.random_key(rng))
    }

    pub fn random_plaintext<R: Rng>(&self, rng: &mut R) -> u128 {
        rng.random::<u128>() & mask_of(self.block_bits)
    }

    pub fn random_key<R: Rng>(&self, rng: &mut R) -> u128 {
        rng.random::<u128>() & mask_of(self.key_bits)
    }
}

/// An affine function of the variables: parity of `mask` plus `constant`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Affine {
    mask: u128,
    constant: bool,
}

impl Affine {
    fn constant(c: bool) -> Affine {
        Affine {
            mask: 0,
            constant: c,
        }
    }

    fn var(v: Var) -> Affine {
        Affine {
            mask: 1 << v,
            constant: false,
        }
    }

    fn add(self, other: Affine) -> Affine {
        Affine {
            mask: self.mask ^ other.mask,
            constant: self.constant ^ other.constant,
        }
    }

    fn poly(self) -> BoolPoly {
        let mut terms: Vec<Monomial> = Monomial::from_mask(self.mask)
            .vars()
            .map(Monomial::var)
            .collect();
        if self.constant {
            terms.push(Monomial::ONE);
        }
        BoolPoly::from_monomials(terms)
    }
}

/// `M s` over affine forms.
fn affine_mat_vec(rows: &[u128], state: &[Affine]) -> Vec<Affine> {
    rows.iter()
        .map(|&r| {
            Monomial::from_mask(r)
                .vars()
                .fold(Affine::constant(false), |acc, j| acc.add(state[j]))
        })
        .collect()
}

/// The true key and the values of every variable, kept for checking
/// soundness. Attack code must not read it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub key: u128,
    /// Bit `i` is the value of `xi` under the true key.
    pub assignment: u128,
}

/// Quadratic equations describing one encryption, with variables
/// `x0..x(key_bits-1)` for the key followed by S-box output bits.
#[derive(Clone, Debug)]
pub struct AttackSystem {
    pub kind: CipherKind,
    pub rounds: usize,
    pub seed: u64,
    pub system: PolySystem,
    pub num_vars: usize,
    pub key_bits: usize,
    /// S-box output variables grouped by S-box, in round order.
    pub sbox_groups: Vec<Vec<Var>>,
    pub plaintext: u128,
    pub ciphertext: u128,
    witness: Witness,
}

impl AttackSystem {
    pub fn key_vars(&self) -> Vec<Var> {
        (0..self.key_bits).collect()
    }

    pub fn key_mask(&self) -> u128 {
        mask_of(self.key_bits)
    }

    pub fn block_hex(&self, x: u128, bits: usize) -> String {
        format!("{:0width$x}", x, width = bits.div_ceil(4))
    }

    /// The true key and variable values. Test and verification use only.
    pub fn witness(&self) -> &Witness {
        &self.witness
    }

    /// Non-key variables, highest index first.
    pub fn descending_order(&self) -> Vec<Var> {
        (self.key_bits..self.num_vars).rev().collect()
    }

    /// The 31-variable order used for the 4-round toy cipher, or a round
    /// robin over S-box output groups for other systems.
    pub fn interleaved_order(&self) -> Vec<Var> {
        if self.kind == CipherKind::Toy && self.rounds == 4 && self.num_vars == 64 {
            return TOY_INTERLEAVED_ORDER.to_vec();
        }
        let mut order = Vec::new();
        let longest = self.sbox_groups.iter().map(Vec::len).max().unwrap_or(0);
        for j in 0..longest {
            for g in &self.sbox_groups {
                if let Some(&v) = g.get(j) {
                    order.push(v);
                }
            }
        }
        order
    }
}

/// Elimination order for the 4-round toy cipher system.
pub const TOY_INTERLEAVED_ORDER: [Var; 31] = [
    36, 24, 52, 44, 20, 56, 40, 28, 60, 32, 16, 48, 18, 50, 34, 26, 58, 46, 54, 22, 62, 30, 38,
    42, 47, 21, 49, 35, 29, 59, 41,
];

/// Substitute `forms` for the relation variables (inputs then outputs).
fn instantiate(relations: &[BoolPoly], forms: &[Affine]) -> Vec<BoolPoly> {
    let polys: Vec<BoolPoly> = forms.iter().map(|f| f.poly()).collect();
    relations
        .iter()
        .map(|r| {
            r.substitute(|v| Some(polys[v].clone()), Some(2))
                .expect("affine substitution keeps degree 2")
        })
        .filter(|p| !p.is_zero())
        .collect()
}

/// Equations for one known plaintext/ciphertext pair under `key`.
pub fn build_attack_system(inst: &CipherInstance, plaintext: u128, key: u128) -> Result<AttackSystem> {
    let ciphertext = inst.encrypt(plaintext, key)?;
    let sbox = inst.sbox();
    let m = sbox.width();
    let relations = sbox_quadratic_relations(&sbox);
    let k = inst.key_bits;
    let block = inst.block_bits;
    let fresh_rounds = match inst.kind {
        CipherKind::ReducedLowMc => inst.rounds,
        CipherKind::Toy => inst.rounds - 1,
    };
    if k + fresh_rounds * inst.sboxes_per_round * m > 128 {
        return Err(Error::InvalidParams("too many variables for one system".into()));
    }

    let key_form = |rk: usize| -> Vec<Affine> {
        if inst.key_matrices.is_empty() {
            (0..block).map(Affine::var).collect()
        } else {
            inst.key_matrices[rk]
                .iter()
                .map(|&row| Affine {
                    mask: row,
                    constant: false,
                })
                .collect()
        }
    };
    let add_vec = |a: &[Affine], b: &[Affine]| -> Vec<Affine> {
        a.iter().zip(b).map(|(x, y)| x.add(*y)).collect()
    };
    let const_vec = |c: u128| -> Vec<Affine> {
        (0..block).map(|i| Affine::constant(c >> i & 1 == 1)).collect()
    };

    let mut assignment = key;
    let mut value = plaintext ^ inst.round_key(0, key);
    let mut state = add_vec(&const_vec(plaintext), &key_form(0));
    let mut next_var = k;
    let mut equations = Vec::new();
    let mut groups = Vec::new();

    for i in 0..inst.rounds {
        let after_sbox_value = inst.sbox_layer(&sbox, value);
        let layer = &inst.linear_layers[i];
        let last_toy = inst.kind == CipherKind::Toy && i + 1 == inst.rounds;
        // S-box outputs of the last toy round are known affine functions
        // of the key: L^-1 (c + constant + key).
        let last_outputs = last_toy.then(|| {
            let inv = invert(layer).expect("invertible");
            let rhs = add_vec(
                &const_vec(ciphertext ^ inst.round_constants[i]),
                &key_form(i + 1),
            );
            affine_mat_vec(&inv, &rhs)
        });
        let mut after = state.clone();
        for t in 0..inst.sboxes_per_round {
            let bits = t * m..(t + 1) * m;
            let outputs: Vec<Affine> = match &last_outputs {
                Some(outs) => outs[bits.clone()].to_vec(),
                None => {
                    let vars: Vec<Var> = (next_var..next_var + m).collect();
                    next_var += m;
                    for (j, &v) in vars.iter().enumerate() {
                        if after_sbox_value >> (t * m + j) & 1 == 1 {
                            assignment |= 1 << v;
                        }
                    }
                    groups.push(vars.clone());
                    vars.into_iter().map(Affine::var).collect()
                }
            };
            let mut forms: Vec<Affine> = state[bits.clone()].to_vec();
            forms.extend(&outputs);
            equations.extend(instantiate(&relations, &forms));
            after[bits].copy_from_slice(&outputs);
        }
        value = mat_vec(layer, after_sbox_value) ^ inst.round_constants[i] ^ inst.round_key(i + 1, key);
        state = add_vec(
            &add_vec(&affine_mat_vec(layer, &after), &const_vec(inst.round_constants[i])),
            &key_form(i + 1),
        );
    }
    debug_assert_eq!(value, ciphertext);

    let mut num_vars = next_var;
    if inst.kind == CipherKind::ReducedLowMc {
        // state = ciphertext gives `block` affine equations; use them to
        // substitute away S-box output variables, highest index first.
        let eqs: Vec<Affine> = state
            .iter()
            .enumerate()
            .map(|(b, f)| f.add(Affine::constant(ciphertext >> b & 1 == 1)))
            .collect();
        let (subst, leftover) = solve_affine(&eqs, mask_of(k));
        equations = equations
            .into_iter()
            .map(|p| {
                p.substitute(|v| subst.iter().find(|(pv, _)| *pv == v).map(|(_, a)| a.poly()), Some(2))
                    .expect("affine substitution keeps degree 2")
            })
            .filter(|p| !p.is_zero())
            .collect();
        equations.extend(leftover.into_iter().map(Affine::poly));

        // Renumber the surviving variables contiguously.
        let gone: u128 = subst.iter().fold(0, |acc, (v, _)| acc | 1 << v);
        let survivors: Vec<Var> = (0..next_var).filter(|v| gone >> v & 1 == 0).collect();
        let mut new_index = vec![usize::MAX; next_var];
        for (new, &old) in survivors.iter().enumerate() {
            new_index[old] = new;
        }
        let renamed = |v: Var| Some(BoolPoly::var(new_index[v]));
        equations = equations
            .iter()
            .map(|p| p.substitute(renamed, Some(2)).expect("renaming keeps degree"))
            .collect();
        assignment = survivors
            .iter()
            .enumerate()
            .fold(0, |acc, (new, &old)| acc | (assignment >> old & 1) << new);
        groups = groups
            .into_iter()
            .map(|g| {
                g.into_iter()
                    .filter(|&v| gone >> v & 1 == 0)
                    .map(|v| new_index[v])
                    .collect::<Vec<_>>()
            })
            .filter(|g| !g.is_empty())
            .collect();
        num_vars = survivors.len();
    }

    let system = PolySystem::new(equations, Vec::new(), mask_of(num_vars))?;
    debug_assert!(system.vanishes_at(assignment));
    Ok(AttackSystem {
        kind: inst.kind,
        rounds: inst.rounds,
        seed: inst.seed,
        system,
        num_vars,
        key_bits: k,
        sbox_groups: groups,
        plaintext,
        ciphertext,
        witness: Witness { key, assignment },
    })
}

/// Gaussian elimination on affine equations `f = 0`. Pivots are taken at
/// the highest-indexed variable outside `protected`; returns each pivot
/// with the affine form it equals, plus the equations that only involve
/// protected variables.
fn solve_affine(eqs: &[Affine], protected: u128) -> (Vec<(Var, Affine)>, Vec<Affine>) {
    let mut pivots: Vec<(Var, Affine)> = Vec::new();
    let mut leftover = Vec::new();
    for &eq in eqs {
        let mut e = eq;
        for &(v, p) in &pivots {
            if e.mask >> v & 1 == 1 {
                e = e.add(p);
            }
        }
        let free = e.mask & !protected;
        if free == 0 {
            if e.mask != 0 || e.constant {
                leftover.push(e);
            }
            continue;
        }
        let v = 127 - free.leading_zeros() as Var;
        for (_, p) in pivots.iter_mut() {
            if p.mask >> v & 1 == 1 {
                *p = p.add(e);
            }
        }
        pivots.push((v, e));
    }
    // Each pivot equation e = 0 with x_v in e means x_v = e + x_v.
    let subst = pivots
        .into_iter()
        .map(|(v, e)| (v, e.add(Affine::var(v))))
        .collect();
    (subst, leftover)
}
