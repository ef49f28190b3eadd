//! Command-line front end for the grammar-compression laboratory.
//!
//! Data outputs (words, grammars, CSV, reports) go to stdout or `--out`;
//! metadata and timing go to stderr. Exit codes are a stable contract:
//! 0 success, 1 verification failure, 2 usage error, 3 capacity exceeded.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use slpforge_core::analysis::{
    expected_v_factors, extract_v_factors, grammar_lower_bound, ratio_csv, ratio_table,
    run_family_rounds, AnalysisError,
};
use slpforge_core::oracle::{smallest_slp, OracleError, MAX_ORACLE_LEN};
use slpforge_core::repair::RepairError;
use slpforge_core::slp::{expand, expand_rle, size};
use slpforge_core::text::serialize;
use slpforge_core::witness::{build_family, build_small_slp, WitnessError};
use slpforge_core::word::RleParseError;
use slpforge_core::{
    compress_bytes, validate, ByteBudget, CapacityError, Compressor, NtId, RleWord, Slp, Symbol,
    Variant,
};

#[derive(Parser)]
#[command(
    name = "slpforge",
    version,
    about = "Grammar-based compression laboratory: generate benchmark words, \
             compress them into straight-line programs, and check the results"
)]
struct Cli {
    /// Byte budget for materializing words (default 2^31; falls back to the
    /// SLPFORGE_BUDGET environment variable when the flag is absent).
    #[arg(long, global = true, value_name = "BYTES")]
    budget: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    /// Replace a maximal string each round.
    Mg,
    /// Replace the most frequent digram each round.
    Digram,
}

impl From<VariantArg> for Variant {
    fn from(arg: VariantArg) -> Self {
        match arg {
            VariantArg::Mg => Variant::MaximalString,
            VariantArg::Digram => Variant::Digram,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the k-th benchmark word (k in 2..=16).
    Gen {
        #[arg(long)]
        k: u32,
        /// Write run-length text (`a*20 b a*41 ...`) instead of raw bytes.
        #[arg(long)]
        rle: bool,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Compress a word into a straight-line program.
    #[command(group(ArgGroup::new("source").required(true).args(["input", "unary"])))]
    Compress {
        /// Input file; a `.rle` suffix selects run-length text, anything
        /// else is read as raw bytes.
        #[arg(short = 'i', long, value_name = "PATH")]
        input: Option<PathBuf>,
        /// Compress a^m instead of reading a file.
        #[arg(long, value_name = "M")]
        unary: Option<u64>,
        #[arg(long, value_enum, default_value_t = VariantArg::Mg)]
        variant: VariantArg,
        /// Stop after this many replacement rounds.
        #[arg(long, value_name = "N")]
        rounds: Option<u64>,
        /// Write one `round=... chosen=...` line per round to this file.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Report length, run count, factor lower bound, and compressed sizes.
    #[command(group(ArgGroup::new("source").required(true).args(["input", "unary"])))]
    Analyze {
        #[arg(short = 'i', long, value_name = "PATH")]
        input: Option<PathBuf>,
        #[arg(long, value_name = "M")]
        unary: Option<u64>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Check the small-grammar and round-structure properties for one k
    /// (k in 4..=16); exits 1 on the first failed check.
    Verify {
        #[arg(long)]
        k: u32,
    },
    /// Emit the compression-ratio table for a range of k as CSV.
    Bench {
        #[arg(long)]
        kmin: u32,
        #[arg(long)]
        kmax: u32,
        #[arg(long, value_enum, default_value_t = VariantArg::Mg)]
        variant: VariantArg,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Exact smallest-grammar search for short words (at most 12 symbols).
    #[command(group(ArgGroup::new("source").required(true).args(["word", "all_binary_upto"])))]
    Oracle {
        #[arg(long, value_name = "WORD")]
        word: Option<String>,
        /// Audit every word over {a, b} of length 1..=L against the factor
        /// lower bound and both compressor variants.
        #[arg(long, value_name = "L")]
        all_binary_upto: Option<u32>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Usage(String),
    Verification(String),
    Capacity(String),
}

impl CliError {
    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Verification(m) | CliError::Capacity(m) => m,
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Capacity(_) => 3,
        }
    }
}

impl From<CapacityError> for CliError {
    fn from(err: CapacityError) -> Self {
        CliError::Capacity(err.to_string())
    }
}

impl From<WitnessError> for CliError {
    fn from(err: WitnessError) -> Self {
        CliError::Usage(err.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(err: OracleError) -> Self {
        CliError::Usage(err.to_string())
    }
}

impl From<RepairError> for CliError {
    fn from(err: RepairError) -> Self {
        match err {
            RepairError::Capacity(inner) => CliError::Capacity(inner.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(err: AnalysisError) -> Self {
        match err {
            AnalysisError::Repair(inner) => inner.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<RleParseError> for CliError {
    fn from(err: RleParseError) -> Self {
        CliError::Usage(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Usage(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let budget = resolve_budget(cli.budget)?;
    match cli.command {
        Command::Gen { k, rle, out } => cmd_gen(k, rle, out, budget),
        Command::Compress {
            input,
            unary,
            variant,
            rounds,
            trace,
            out,
        } => cmd_compress(input, unary, variant.into(), rounds, trace, out, budget),
        Command::Analyze { input, unary, out } => cmd_analyze(input, unary, out, budget),
        Command::Verify { k } => cmd_verify(k, budget),
        Command::Bench {
            kmin,
            kmax,
            variant,
            out,
        } => cmd_bench(kmin, kmax, variant.into(), out),
        Command::Oracle {
            word,
            all_binary_upto,
            out,
        } => cmd_oracle(word, all_binary_upto, out),
    }
}

fn resolve_budget(flag: Option<u64>) -> Result<ByteBudget, CliError> {
    if let Some(bytes) = flag {
        return Ok(ByteBudget(bytes));
    }
    match std::env::var("SLPFORGE_BUDGET") {
        Ok(text) => text.trim().parse().map(ByteBudget).map_err(|_| {
            CliError::Usage(format!(
                "SLPFORGE_BUDGET must be an integer byte count, got {text:?}"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(ByteBudget::DEFAULT),
        Err(std::env::VarError::NotUnicode(_)) => Err(CliError::Usage(
            "SLPFORGE_BUDGET is not valid unicode".into(),
        )),
    }
}

/// Writes a data output to `--out` when given, otherwise to stdout.
fn emit(out: Option<&Path>, data: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, data)?,
        None => std::io::stdout().write_all(data)?,
    }
    Ok(())
}

fn bit_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| char::from(b'0' + b)).collect()
}

fn cmd_gen(k: u32, rle: bool, out: Option<PathBuf>, budget: ByteBudget) -> Result<(), CliError> {
    let family = build_family(k)?;
    let blocks: Vec<String> = family.block_lengths().iter().map(u64::to_string).collect();
    eprintln!(
        "k={} order={} w={} blocks={} n={}",
        family.k(),
        family.order(),
        bit_string(family.w()),
        blocks.join(","),
        family.total_len()
    );
    if rle {
        emit(out.as_deref(), family.s_rle().to_text().as_bytes())
    } else {
        emit(out.as_deref(), &family.s_bytes(budget)?)
    }
}

/// Reads a word from a file, with the format chosen by the `.rle` suffix.
fn read_word(path: &Path) -> Result<RleWord, CliError> {
    let bytes = fs::read(path)?;
    if path.extension().is_some_and(|ext| ext == "rle") {
        let text = String::from_utf8(bytes).map_err(|_| {
            CliError::Usage(format!("{}: run-length text must be UTF-8", path.display()))
        })?;
        Ok(RleWord::parse_text(&text)?)
    } else {
        Ok(RleWord::from_bytes(&bytes))
    }
}

fn word_from(input: Option<PathBuf>, unary: Option<u64>) -> Result<RleWord, CliError> {
    match (input, unary) {
        (Some(path), None) => read_word(&path),
        (None, Some(m)) => {
            if m == 0 {
                return Err(CliError::Usage("--unary needs m >= 1".into()));
            }
            Ok(RleWord::from_runs([(b'a', m)]))
        }
        _ => Err(CliError::Usage(
            "exactly one of --input and --unary is required".into(),
        )),
    }
}

fn cmd_compress(
    input: Option<PathBuf>,
    unary: Option<u64>,
    variant: Variant,
    rounds: Option<u64>,
    trace: Option<PathBuf>,
    out: Option<PathBuf>,
    budget: ByteBudget,
) -> Result<(), CliError> {
    let word = word_from(input, unary)?;
    let mut compressor = Compressor::new(variant).budget(budget);
    if let Some(cap) = rounds {
        compressor = compressor.round_cap(cap);
    }
    let started = Instant::now();
    let (slp, traces) = compressor.compress_with_trace(&word)?;
    let elapsed = started.elapsed();
    if let Some(path) = trace {
        let mut lines = String::new();
        for t in &traces {
            lines.push_str(&t.to_string());
            lines.push('\n');
        }
        fs::write(path, lines)?;
    }
    emit(out.as_deref(), serialize(&slp).as_bytes())?;
    eprintln!(
        "n={} size={} rounds={}",
        word.len(),
        size(&slp).0,
        traces.len()
    );
    eprintln!("time_ms={}", elapsed.as_millis());
    Ok(())
}

fn cmd_analyze(
    input: Option<PathBuf>,
    unary: Option<u64>,
    out: Option<PathBuf>,
    budget: ByteBudget,
) -> Result<(), CliError> {
    let word = word_from(input, unary)?;
    let bytes = word.to_bytes(budget)?;
    let mut report = String::new();
    report.push_str(&format!("n={}\n", word.len()));
    report.push_str(&format!("runs={}\n", word.runs().len()));
    report.push_str(&format!("lower_bound={}\n", grammar_lower_bound(&bytes)));
    for (label, variant) in [("mg", Variant::MaximalString), ("digram", Variant::Digram)] {
        let slp = Compressor::new(variant).budget(budget).compress(&word)?;
        report.push_str(&format!("size_{label}={}\n", size(&slp).0));
    }
    emit(out.as_deref(), report.as_bytes())
}

fn nt_named(slp: &Slp, name: &str) -> Option<NtId> {
    slp.names()
        .iter()
        .position(|n| n == name)
        .map(|i| NtId(i as u32))
}

fn cmd_verify(k: u32, budget: ByteBudget) -> Result<(), CliError> {
    if k < 4 {
        return Err(CliError::Usage(format!(
            "verify needs k >= 4 (the checked structure only exists from k = 4), got {k}"
        )));
    }
    let started = Instant::now();
    let family = build_family(k)?;
    let fail = |msg: String| Err(CliError::Verification(msg));

    // Small-grammar closure: validates, expands back, fits 8k.
    let small = build_small_slp(k)?;
    let report = validate(&small);
    if !report.is_ok() {
        return fail(format!("small grammar for k={k} is invalid: {report}"));
    }
    let expanded = expand_rle(&small, small.start(), 16 * k as usize)
        .map_err(|e| CliError::Verification(format!("small grammar expansion: {e}")))?;
    if expanded != family.s_rle() {
        return fail(format!(
            "small grammar for k={k} does not expand to the family word"
        ));
    }
    let small_size = size(&small).0;
    if small_size > 8 * u64::from(k) {
        return fail(format!(
            "small grammar size {small_size} exceeds 8k = {}",
            8 * k
        ));
    }
    println!(
        "small grammar: size {small_size} <= {}, expands back: ok",
        8 * k
    );

    // Round structure after k - 1 rounds: digram-only selections, doubling
    // rules, segment prefixes, and remainder formula.
    let (slp, traces) = run_family_rounds(k)?;
    let _ = budget;
    if traces.len() != k as usize - 1 {
        return fail(format!(
            "expected {} rounds, compressor ran {}",
            k - 1,
            traces.len()
        ));
    }
    for t in &traces {
        if t.chosen.split_whitespace().count() != 2 {
            return fail(format!(
                "round {} chose {:?}, which is not a length-2 string",
                t.round, t.chosen
            ));
        }
    }
    if slp.rules().len() != k as usize {
        return fail(format!(
            "expected {} rules after {} rounds, found {}",
            k,
            k - 1,
            slp.rules().len()
        ));
    }
    for i in 1..k {
        let name = format!("X{i}");
        let Some(id) = nt_named(&slp, &name) else {
            return fail(format!("no rule named {name} after {} rounds", k - 1));
        };
        let body = &slp.production(id).expect("validated grammar").body;
        let want = if i == 1 {
            vec![Symbol::t(b'a'), Symbol::t(b'a')]
        } else {
            let prev = nt_named(&slp, &format!("X{}", i - 1)).expect("checked in order");
            vec![Symbol::nt(prev), Symbol::nt(prev)]
        };
        if body != &want {
            return fail(format!("rule {name} is not a doubling rule"));
        }
    }
    let got_v = extract_v_factors(&slp, k)
        .map_err(|e| CliError::Verification(format!("segment structure: {e}")))?;
    let want_v = expected_v_factors(&slp, k)?;
    if got_v != want_v {
        return fail("block remainders do not match the formula".into());
    }
    let rendered: Vec<String> = got_v.iter().map(|v| slp.render_symbols(v)).collect();
    println!(
        "round structure: {} digram rounds, doubling rules X1..X{}: ok",
        k - 1,
        k - 1
    );
    println!("block remainders: {}: ok", rendered.join("; "));
    println!("verify k={k}: PASS");
    eprintln!("time_ms={}", started.elapsed().as_millis());
    Ok(())
}

fn cmd_bench(kmin: u32, kmax: u32, variant: Variant, out: Option<PathBuf>) -> Result<(), CliError> {
    if kmin > kmax {
        return Err(CliError::Usage(format!(
            "--kmin {kmin} exceeds --kmax {kmax}"
        )));
    }
    let rows = ratio_table(kmin, kmax, variant)?;
    for row in &rows {
        eprintln!("k={} time_ms={}", row.k, row.wall.as_millis());
    }
    let judged: Vec<_> = rows.iter().filter(|r| r.k >= 6).collect();
    if judged.len() < 2 {
        eprintln!("ratio monotonicity: not judged (needs at least two rows with k >= 6)");
    } else {
        let first_violation = judged
            .windows(2)
            .find(|pair| pair[1].ratio <= pair[0].ratio)
            .map(|pair| pair[1].k);
        match first_violation {
            None => eprintln!(
                "ratio monotonicity for k in [{}, {}]: strictly increasing",
                judged[0].k,
                judged[judged.len() - 1].k
            ),
            Some(k) => eprintln!("ratio monotonicity: VIOLATED at k={k}"),
        }
    }
    emit(out.as_deref(), ratio_csv(&rows).as_bytes())
}

fn cmd_oracle(
    word: Option<String>,
    all_binary_upto: Option<u32>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    match (word, all_binary_upto) {
        (Some(text), None) => {
            let result = smallest_slp(text.as_bytes())?;
            eprintln!("g={}", result.size);
            emit(out.as_deref(), serialize(&result.witness).as_bytes())
        }
        (None, Some(max_len)) => {
            if !(1..=MAX_ORACLE_LEN as u32).contains(&max_len) {
                return Err(CliError::Usage(format!(
                    "--all-binary-upto must be in 1..={MAX_ORACLE_LEN}, got {max_len}"
                )));
            }
            let mut checked = 0u64;
            let mut violations = Vec::new();
            for len in 1..=max_len {
                for code in 0..(1u64 << len) {
                    let word: Vec<u8> = (0..len)
                        .map(|i| if (code >> i) & 1 == 0 { b'a' } else { b'b' })
                        .collect();
                    checked += 1;
                    let shown = String::from_utf8_lossy(&word).into_owned();
                    let exact = smallest_slp(&word)?;
                    let lower = grammar_lower_bound(&word);
                    if lower > exact.size {
                        violations.push(format!("{shown}: lower bound {lower} > g {}", exact.size));
                    }
                    for variant in [Variant::MaximalString, Variant::Digram] {
                        let slp = compress_bytes(&word, variant)?;
                        if exact.size > size(&slp).0 {
                            violations.push(format!(
                                "{shown}: g {} > {variant:?} size {}",
                                exact.size,
                                size(&slp).0
                            ));
                        }
                        if expand(&slp, slp.start()).ok().as_deref() != Some(&word[..]) {
                            violations.push(format!("{shown}: {variant:?} round-trip failed"));
                        }
                    }
                }
            }
            let report = format!("checked={checked} violations={}\n", violations.len());
            emit(out.as_deref(), report.as_bytes())?;
            if let Some(first) = violations.first() {
                return Err(CliError::Verification(format!(
                    "{} violation(s); first: {first}",
                    violations.len()
                )));
            }
            Ok(())
        }
        _ => Err(CliError::Usage(
            "exactly one of --word and --all-binary-upto is required".into(),
        )),
    }
}
