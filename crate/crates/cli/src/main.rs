//! `boolelim`: generate cipher equation systems, eliminate variables,
//! measure key information and run the oracle suites.
//!
//! Exit codes: 0 success, 2 invalid input, 3 inconsistency detected,
//! 4 suite or monotonicity failure.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use boolelim::analysis::{
    info_loss_curve_with, key_poly_summary, pooled_key_polys, run_pair, KeyFitVerdict,
    KeyPolySummary, KeySet,
};
use boolelim::ciphers::{
    build_attack_system, build_instance, sbox_quadratic_relations, AttackSystem, CipherKind,
    CipherParams, SBox,
};
use boolelim::elim::{eliminate_sequence, Algo, ElimConfig, ElimTrace};
use boolelim::format::SystemFile;
use boolelim::suites::{run_suite, Suite};
use boolelim::{Error, Var};

#[derive(Parser, Debug)]
#[command(name = "boolelim", version, about = "Degree-bounded elimination for Boolean equation systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the equation system of one known plaintext/ciphertext pair.
    Gen(GenArgs),
    /// Eliminate variables from a system file or a freshly generated pair.
    Eliminate(ElimArgs),
    /// Track key information along an elimination order, as CSV.
    Infoloss(InfoArgs),
    /// Run the randomized oracle suites.
    Verify(VerifyArgs),
    /// List the quadratic relations of an S-box.
    Sbox(SboxArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CipherArg {
    Lowmc,
    Toy,
}

impl From<CipherArg> for CipherKind {
    fn from(c: CipherArg) -> CipherKind {
        match c {
            CipherArg::Lowmc => CipherKind::ReducedLowMc,
            CipherArg::Toy => CipherKind::Toy,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    LElimA,
    LElimB,
    ElimA,
    ElimB,
}

impl From<AlgoArg> for Algo {
    fn from(a: AlgoArg) -> Algo {
        match a {
            AlgoArg::LElimA => Algo::LElimA,
            AlgoArg::LElimB => Algo::LElimB,
            AlgoArg::ElimA => Algo::ElimA,
            AlgoArg::ElimB => Algo::ElimB,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct CipherSource {
    /// Cipher to generate.
    #[arg(long, value_enum)]
    cipher: Option<CipherArg>,
    /// Number of rounds (12 for LowMC, 4 for the toy cipher by default).
    #[arg(long)]
    rounds: Option<usize>,
    /// Seed for the cipher instance and the plaintext/key draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    source: CipherSource,
    /// Output file; the system is printed to stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Record the true key in the file header and print it.
    #[arg(long)]
    reveal_key: bool,
}

#[derive(Args, Debug)]
struct OrderArgs {
    /// `desc`, `interleaved`, or a comma separated list such as `x40,x39`.
    #[arg(long, default_value = "desc")]
    order: String,
    /// Use only the first N variables of the order.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, value_enum, default_value = "elim-b")]
    algo: AlgoArg,
    /// Iteration cap for the quadratic-harvesting loop of the B variants.
    #[arg(long)]
    loop_budget: Option<usize>,
}

#[derive(Args, Debug)]
struct ElimArgs {
    /// System file written by `gen` (or any system file).
    #[arg(long, short, conflicts_with = "cipher")]
    input: Option<PathBuf>,
    #[command(flatten)]
    source: CipherSource,
    #[command(flatten)]
    order: OrderArgs,
    /// Run N pairs under one random key and pool the key-only polynomials.
    #[arg(long, requires = "cipher", conflicts_with = "output")]
    batch: Option<usize>,
    /// Write the eliminated system here.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Write per-step sizes as CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InfoArgs {
    #[arg(long, short, conflicts_with = "cipher")]
    input: Option<PathBuf>,
    #[command(flatten)]
    source: CipherSource,
    #[command(flatten)]
    order: OrderArgs,
    /// Decide only N random keys (plus the true key when known) instead of
    /// all of them.
    #[arg(long)]
    sample: Option<usize>,
    /// Write the CSV here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite to run (repeatable); all suites when omitted.
    #[arg(long)]
    suite: Vec<String>,
    /// Trials per suite (suite default when omitted).
    #[arg(long)]
    trials: Option<usize>,
    /// Largest number of variables (suite default when omitted).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SboxPreset {
    Lowmc3,
    Prince4,
}

#[derive(Args, Debug)]
struct SboxArgs {
    #[arg(long, value_enum, conflicts_with = "table", required_unless_present = "table")]
    preset: Option<SboxPreset>,
    /// Comma separated lookup table, decimal or `0x` hex.
    #[arg(long)]
    table: Option<String>,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
enum Failure {
    Invalid(String),
    Inconsistent(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Inconsistent(_) => 3,
            Failure::Check(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Inconsistent(m) | Failure::Check(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Inconsistent => Failure::Inconsistent(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

fn write_file(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}

/// Print a machine artifact to stdout, tolerating a closed pipe.
/// Like `println!`, but a closed stdout (for example `| head`) is not an error.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn var_list(vars: &[Var]) -> String {
    vars.iter().map(|v| format!("x{v}")).collect::<Vec<_>>().join(",")
}

fn parse_var_list(s: &str) -> Result<Vec<Var>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.strip_prefix('x')
                .unwrap_or(t)
                .parse()
                .map_err(|_| invalid(format!("bad variable `{t}` in order")))
        })
        .collect()
}

impl CipherSource {
    fn attack(&self) -> Result<(AttackSystem, ChaCha20Rng), Failure> {
        let kind: CipherKind = self.cipher.ok_or_else(|| invalid("--cipher is required"))?.into();
        let mut params = CipherParams::default_for(kind);
        if let Some(r) = self.rounds {
            params.rounds = r;
        }
        let inst = build_instance(kind, params, self.seed)?;
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        let (pt, key) = inst.random_pair(&mut rng);
        Ok((build_attack_system(&inst, pt, key)?, rng))
    }

    fn describe(&self) -> String {
        match self.cipher {
            Some(c) => format!(
                "cipher={} rounds={} seed={}",
                CipherKind::from(c),
                self.rounds
                    .unwrap_or(CipherParams::default_for(c.into()).rounds),
                self.seed
            ),
            None => "cipher=none".into(),
        }
    }
}

fn system_file(attack: &AttackSystem, reveal_key: bool) -> SystemFile {
    let hex = |x: u128, bits: usize| attack.block_hex(x, bits);
    let block_bits = match attack.kind {
        CipherKind::ReducedLowMc => 24,
        CipherKind::Toy => 16,
    };
    let mut file = SystemFile::new(attack.system.clone(), attack.num_vars)
        .with_meta("cipher", attack.kind)
        .with_meta("rounds", attack.rounds)
        .with_meta("seed", attack.seed)
        .with_meta("key_bits", attack.key_bits)
        .with_meta("plaintext", hex(attack.plaintext, block_bits))
        .with_meta("ciphertext", hex(attack.ciphertext, block_bits))
        .with_meta("interleaved", var_list(&attack.interleaved_order()));
    if reveal_key {
        file = file.with_meta("key", hex(attack.witness().key, attack.key_bits));
    }
    file
}

/// A system to work on, with what is known about its key.
struct Loaded {
    file: SystemFile,
    key_bits: usize,
    key: Option<u128>,
    /// Full true assignment, available for generated pairs only.
    assignment: Option<u128>,
}

fn load(input: &Option<PathBuf>, source: &CipherSource) -> Result<Loaded, Failure> {
    match input {
        Some(path) => {
            let file = SystemFile::parse(&read_file(path)?)?;
            let key_bits = match file.meta("key_bits") {
                Some(k) => k.parse().map_err(|_| invalid("bad key_bits header"))?,
                None => 0,
            };
            let key = match file.meta("key") {
                Some(k) => Some(u128::from_str_radix(k, 16).map_err(|_| invalid("bad key header"))?),
                None => None,
            };
            Ok(Loaded {
                file,
                key_bits,
                key,
                assignment: None,
            })
        }
        None => {
            let (attack, _) = source.attack()?;
            Ok(Loaded {
                file: system_file(&attack, false),
                key_bits: attack.key_bits,
                key: Some(attack.witness().key),
                assignment: Some(attack.witness().assignment),
            })
        }
    }
}

fn resolve_order(opts: &OrderArgs, loaded: &Loaded) -> Result<Vec<Var>, Failure> {
    let sys = &loaded.file.system;
    let mut order = match opts.order.as_str() {
        "desc" => {
            let key_mask = if loaded.key_bits >= 128 {
                u128::MAX
            } else {
                (1u128 << loaded.key_bits) - 1
            };
            boolelim::elim::descending_order(sys, key_mask)
        }
        "interleaved" => parse_var_list(
            loaded
                .file
                .meta("interleaved")
                .ok_or_else(|| invalid("the input has no interleaved order"))?,
        )?
        .into_iter()
        .filter(|&v| sys.is_live(v))
        .collect(),
        list => parse_var_list(list)?,
    };
    if let Some(c) = opts.count {
        if c > order.len() {
            return Err(invalid(format!("--count {c} exceeds the {} variables of the order", order.len())));
        }
        order.truncate(c);
    }
    Ok(order)
}

fn elim_config(opts: &OrderArgs, fail_on_inconsistent: bool) -> ElimConfig {
    ElimConfig {
        loop_budget: opts.loop_budget,
        fail_on_inconsistent,
    }
}

fn trace_csv(trace: &ElimTrace) -> String {
    let mut out = String::from(
        "step,var,f2_before,f3_before,f2_after,f3_after,resultants,constraints,normalized,b_iterations,f3_high_water\n",
    );
    for (i, s) in trace.steps.iter().enumerate() {
        writeln!(
            out,
            "{},x{},{},{},{},{},{},{},{},{},{}",
            i + 1,
            s.var,
            s.f2_before,
            s.f3_before,
            s.f2_after,
            s.f3_after,
            s.resultants,
            s.constraints,
            s.normalized,
            s.b_iterations,
            s.f3_high_water
        )
        .unwrap();
    }
    out
}

fn summary_line(s: &KeyPolySummary) -> String {
    format!(
        "{} key-only polynomials (cubic {}, quadratic {}, linear {}), rank {}, linear rank {}",
        s.total, s.by_degree[3], s.by_degree[2], s.by_degree[1], s.rank, s.linear_rank
    )
}

fn cmd_gen(args: &GenArgs) -> CmdResult {
    say!(
        "config: gen {} output={} reveal_key={}",
        args.source.describe(),
        args.output.as_deref().map_or("-".into(), |p| p.display().to_string()),
        args.reveal_key
    );
    let (attack, _) = args.source.attack()?;
    let text = system_file(&attack, args.reveal_key).to_text();
    say!(
        "{} r={}: {} equations, {} variables ({} key bits)",
        attack.kind,
        attack.rounds,
        attack.system.len(),
        attack.num_vars,
        attack.key_bits
    );
    if args.reveal_key {
        say!("key: {}", attack.block_hex(attack.witness().key, attack.key_bits));
    }
    match &args.output {
        Some(path) => write_file(path, &text),
        None => {
            emit(&text);
            Ok(())
        }
    }
}

fn cmd_eliminate(args: &ElimArgs) -> CmdResult {
    say!(
        "config: eliminate input={} {} algo={} order={} count={} batch={} loop_budget={} output={} trace={}",
        args.input.as_deref().map_or("-".into(), |p| p.display().to_string()),
        args.source.describe(),
        Algo::from(args.order.algo).name(),
        args.order.order,
        args.order.count.map_or("all".into(), |c| c.to_string()),
        args.batch.map_or("none".into(), |b| b.to_string()),
        args.order.loop_budget.map_or("default".into(), |b| b.to_string()),
        args.output.as_deref().map_or("-".into(), |p| p.display().to_string()),
        args.trace.as_deref().map_or("-".into(), |p| p.display().to_string()),
    );
    if let Some(n) = args.batch {
        return eliminate_batch(args, n);
    }
    if args.input.is_none() && args.source.cipher.is_none() {
        return Err(invalid("give --input or --cipher"));
    }
    let loaded = load(&args.input, &args.source)?;
    let order = resolve_order(&args.order, &loaded)?;
    let algo: Algo = args.order.algo.into();
    let start = Instant::now();
    let (out, trace) = eliminate_sequence(&loaded.file.system, &order, algo, &elim_config(&args.order, true))?;
    let high_water = trace.steps.iter().map(|s| s.f3_high_water).max().unwrap_or(0);
    say!(
        "eliminated {} variables with {} in {:.2?}: F2 {} -> {}, F3 {} -> {}, largest cubic side {}",
        order.len(),
        algo.name(),
        start.elapsed(),
        loaded.file.system.f2().len(),
        out.f2().len(),
        loaded.file.system.f3().len(),
        out.f3().len(),
        high_water
    );
    if let Some(point) = loaded.assignment {
        say!("true assignment satisfies the output: {}", out.vanishes_at(point));
    }
    if loaded.key_bits > 0 {
        let mask = (1u128 << loaded.key_bits) - 1;
        say!("{}", summary_line(&key_poly_summary(out.polys(), mask)));
    }
    if let Some(path) = &args.trace {
        write_file(path, &trace_csv(&trace))?;
    }
    if let Some(path) = &args.output {
        let mut file = SystemFile::new(out, loaded.file.vars);
        file.meta = loaded.file.meta.clone();
        write_file(path, &file.to_text())?;
    }
    Ok(())
}

fn eliminate_batch(args: &ElimArgs, n: usize) -> CmdResult {
    if n == 0 {
        return Err(invalid("--batch needs at least one pair"));
    }
    let (first, mut rng) = args.source.attack()?;
    let kind = first.kind;
    let mut params = CipherParams::default_for(kind);
    params.rounds = first.rounds;
    let inst = build_instance(kind, params, args.source.seed)?;
    let key = first.witness().key;
    let mut attacks = vec![first];
    for _ in 1..n {
        let pt = inst.random_plaintext(&mut rng);
        attacks.push(build_attack_system(&inst, pt, key)?);
    }
    let loaded = Loaded {
        file: system_file(&attacks[0], false),
        key_bits: attacks[0].key_bits,
        key: Some(key),
        assignment: Some(attacks[0].witness().assignment),
    };
    let order = resolve_order(&args.order, &loaded)?;
    let algo: Algo = args.order.algo.into();
    let config = elim_config(&args.order, true);
    let start = Instant::now();
    let runs = attacks
        .par_iter()
        .map(|a| run_pair(a, &order, algo, &config))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, r) in runs.iter().enumerate() {
        say!(
            "pair {i}: plaintext {} sound {} largest cubic side {}: {}",
            attacks[i].block_hex(r.plaintext, inst.block_bits),
            r.is_sound(),
            r.f3_high_water(),
            summary_line(&r.key_polys)
        );
    }
    let pooled = pooled_key_polys(&runs, attacks[0].key_mask());
    say!("batch of {n} in {:.2?}: {}", start.elapsed(), summary_line(&pooled));
    if let Some(path) = &args.trace {
        write_file(path, &trace_csv(&runs[0].trace))?;
    }
    if runs.iter().all(|r| r.is_sound()) {
        Ok(())
    } else {
        Err(Failure::Check("an intermediate system does not vanish at the true assignment".into()))
    }
}

fn cmd_infoloss(args: &InfoArgs) -> CmdResult {
    say!(
        "config: infoloss input={} {} algo={} order={} count={} sample={} loop_budget={} output={}",
        args.input.as_deref().map_or("-".into(), |p| p.display().to_string()),
        args.source.describe(),
        Algo::from(args.order.algo).name(),
        args.order.order,
        args.order.count.map_or("all".into(), |c| c.to_string()),
        args.sample.map_or("all".into(), |s| s.to_string()),
        args.order.loop_budget.map_or("default".into(), |b| b.to_string()),
        args.output.as_deref().map_or("-".into(), |p| p.display().to_string()),
    );
    if args.input.is_none() && args.source.cipher.is_none() {
        return Err(invalid("give --input or --cipher"));
    }
    let loaded = load(&args.input, &args.source)?;
    if loaded.key_bits == 0 {
        return Err(invalid("the input does not say how many key bits it has"));
    }
    let order = resolve_order(&args.order, &loaded)?;
    let key_vars: Vec<Var> = (0..loaded.key_bits).collect();
    let keys = match args.sample {
        None => KeySet::All,
        Some(count) => {
            let mut rng = ChaCha20Rng::seed_from_u64(args.source.seed.wrapping_add(1));
            let mask = (1u128 << loaded.key_bits) - 1;
            let mut keys: Vec<u128> = loaded.key.into_iter().collect();
            keys.extend((0..count).map(|_| rand::Rng::random::<u128>(&mut rng) & mask));
            KeySet::Sample(keys)
        }
    };
    // Index of the true key in the verdict list.
    let true_index = match (&keys, loaded.key) {
        (KeySet::All, Some(k)) => Some(k as usize),
        (KeySet::Sample(_), Some(_)) => Some(0),
        _ => None,
    };
    let mut true_key_lost = Vec::new();
    let report = info_loss_curve_with(
        &loaded.file.system,
        &order,
        args.order.algo.into(),
        &key_vars,
        &keys,
        &elim_config(&args.order, false),
        |step, _, verdicts| {
            if let Some(i) = true_index {
                if verdicts[i] == KeyFitVerdict::NoFit {
                    true_key_lost.push(step);
                }
            }
            Ok(())
        },
    )?;
    let csv = report.to_csv();
    match &args.output {
        Some(path) => {
            write_file(path, &csv)?;
            let last = report.rows.last().expect("at least one row");
            say!(
                "{} rows; final i in [{:.3}, {:.3}]",
                report.rows.len(),
                last.measure.i_lower,
                last.measure.i_upper
            );
        }
        None => emit(&csv),
    }
    if !report.is_monotone() {
        return Err(Failure::Check(format!(
            "a fitting key stopped fitting at steps {:?}",
            report.monotonicity_violations
        )));
    }
    if !true_key_lost.is_empty() {
        return Err(Failure::Check(format!("the true key stopped fitting at steps {true_key_lost:?}")));
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let suites: Vec<Suite> = if args.suite.is_empty() || args.suite.iter().any(|s| s == "all") {
        Suite::ALL.to_vec()
    } else {
        args.suite
            .iter()
            .map(|s| s.parse::<Suite>())
            .collect::<Result<_, _>>()?
    };
    say!(
        "config: verify suites={} trials={} n={} seed={}",
        suites.iter().map(|s| s.name()).collect::<Vec<_>>().join(","),
        args.trials.map_or("default".into(), |t| t.to_string()),
        args.n.map_or("default".into(), |n| n.to_string()),
        args.seed
    );
    let mut failed = Vec::new();
    for suite in suites {
        let d = suite.defaults();
        let report = run_suite(suite, args.trials.unwrap_or(d.trials), args.n.unwrap_or(d.max_vars), args.seed)?;
        say!("{report}");
        if let Some(f) = &report.first_failure {
            say!("  first failure: {f}");
        }
        if !report.all_passed() {
            failed.push(suite.name());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failing suites: {}", failed.join(", "))))
    }
}

fn parse_table(s: &str) -> Result<Vec<u16>, Failure> {
    s.split(',')
        .map(str::trim)
        .map(|t| {
            let parsed = match t.strip_prefix("0x") {
                Some(h) => u16::from_str_radix(h, 16),
                None => t.parse(),
            };
            parsed.map_err(|_| invalid(format!("bad table entry `{t}`")))
        })
        .collect()
}

fn cmd_sbox(args: &SboxArgs) -> CmdResult {
    let sbox = match (args.preset, &args.table) {
        (Some(SboxPreset::Lowmc3), _) => SBox::lowmc3(),
        (Some(SboxPreset::Prince4), _) => SBox::prince4(),
        (None, Some(t)) => SBox::new(parse_table(t)?)?,
        (None, None) => return Err(invalid("give --preset or --table")),
    };
    let m = sbox.width();
    say!(
        "config: sbox table={}",
        sbox.table().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    );
    let relations = sbox_quadratic_relations(&sbox);
    say!(
        "{} relations; inputs x0..x{}, outputs x{}..x{}",
        relations.len(),
        m - 1,
        m,
        2 * m - 1
    );
    emit(&relations.iter().map(|r| format!("{r}\n")).collect::<String>());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Eliminate(a) => cmd_eliminate(a),
        Command::Infoloss(a) => cmd_infoloss(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Sbox(a) => cmd_sbox(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
