//! Measurements connecting words, their grammars, and compressor behavior:
//! distinct-factor statistics, a factor-based lower bound on grammar size,
//! closed-form compressor output on unary words, structural inspection of the
//! compressor's early rounds on the benchmark family, and the benchmark ratio
//! table.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::repair::{Compressor, RepairError, RoundTrace, Variant};
use crate::slp::{size, NtId, Slp, SlpBuilder, Symbol};
use crate::witness::{build_family, build_small_slp, WitnessError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Repair(#[from] RepairError),
    #[error("unexpected grammar shape: {reason}")]
    Shape { reason: String },
}

fn shape(reason: impl Into<String>) -> AnalysisError {
    AnalysisError::Shape {
        reason: reason.into(),
    }
}

/// Distinct-factor counts of one word, for every factor length.
pub struct FactorStats {
    counts: Vec<u64>,
}

impl FactorStats {
    pub fn new(word: &[u8]) -> Self {
        FactorStats {
            counts: crate::suffix::distinct_factor_counts(word),
        }
    }

    /// Number of distinct factors of length `len` (0 beyond the word length).
    pub fn distinct(&self, len: usize) -> u64 {
        self.counts.get(len).copied().unwrap_or(0)
    }

    /// `counts()[l]` is the number of distinct factors of length `l`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn word_len(&self) -> usize {
        self.counts.len() - 1
    }
}

/// Number of distinct factors of `word` of length `len`.
pub fn distinct_factors(word: &[u8], len: usize) -> u64 {
    FactorStats::new(word).distinct(len)
}

/// Factor lengths examined by [`grammar_lower_bound`].
pub const LOWER_BOUND_LENGTH_CAP: usize = 64;

/// Lower bound on the size of any straight-line program deriving `word`.
///
/// A grammar of size g has at most g * l distinct factors of length l, since
/// every factor occurrence spans a boundary position in the expansion of some
/// rule body, of which there are fewer than g per unit of length. Hence
/// `ceil(d_l / l)` bounds the grammar size from below for every l; the
/// maximum over `l <= max_len` is still a valid bound.
pub fn grammar_lower_bound_capped(word: &[u8], max_len: usize) -> u64 {
    let stats = FactorStats::new(word);
    let mut best = 0u64;
    for len in 1..=stats.word_len().min(max_len) {
        best = best.max(stats.distinct(len).div_ceil(len as u64));
    }
    best
}

/// [`grammar_lower_bound_capped`] with the default length cap.
pub fn grammar_lower_bound(word: &[u8]) -> u64 {
    grammar_lower_bound_capped(word, LOWER_BOUND_LENGTH_CAP)
}

/// The grammar both compression variants produce on the unary word `a^m`,
/// in closed form.
///
/// For m <= 3 the word is its own best effort. Otherwise, with L = floor(log2
/// m), rounds build doubling rules X1 -> aa and Xi -> X(i-1) X(i-1) up to
/// X(L-1), and the start rule spells m in binary: two copies of X(L-1) for the
/// leading bit, then one X(j) (or one `a` for j = 0) per set bit j.
pub fn predicted_unary_slp(m: u64) -> Slp {
    assert!(m >= 1, "unary words have at least one symbol");
    let a = Symbol::t(b'a');
    let mut builder = SlpBuilder::new();
    let s = builder.nonterminal("S");
    if m <= 3 {
        builder.rule(s, std::iter::repeat_n(a, m as usize));
        return builder.finish(s);
    }
    let top = m.ilog2() as u64; // m has top+1 bits; doubling rules reach X(top-1).
    let mut chain = Vec::new();
    let x1 = builder.nonterminal("X1");
    builder.rule(x1, [a, a]);
    chain.push(x1);
    for i in 2..top {
        let x = builder.nonterminal(format!("X{i}"));
        let prev = *chain.last().expect("chain starts with X1");
        builder.rule(x, [Symbol::nt(prev), Symbol::nt(prev)]);
        chain.push(x);
    }
    let lead = *chain.last().expect("m >= 4 builds X1");
    let mut body = vec![Symbol::nt(lead), Symbol::nt(lead)];
    for j in (0..top).rev() {
        if (m >> j) & 1 == 1 {
            body.push(if j == 0 {
                a
            } else {
                Symbol::nt(chain[j as usize - 1])
            });
        }
    }
    builder.rule(s, body);
    builder.finish(s)
}

/// Runs the first k - 1 rounds of maximal-string compression on the k-th
/// family word, returning the intermediate grammar and the round traces.
pub fn run_family_rounds(k: u32) -> Result<(Slp, Vec<RoundTrace>), AnalysisError> {
    let family = build_family(k)?;
    let result = Compressor::new(Variant::MaximalString)
        .round_cap(u64::from(k) - 1)
        .compress_with_trace(&family.s_rle())?;
    Ok(result)
}

/// True when every non-start rule doubles a single symbol (body `u u`).
pub fn doubling_rules_hold(slp: &Slp) -> bool {
    slp.rules()
        .iter()
        .skip(1)
        .all(|rule| rule.body.len() == 2 && rule.body[0] == rule.body[1])
}

fn nt_by_name(slp: &Slp, name: &str) -> Option<NtId> {
    slp.names()
        .iter()
        .position(|n| n == name)
        .map(|i| NtId(i as u32))
}

/// Splits the start rule of the grammar from [`run_family_rounds`] into its k
/// per-block segments and strips each segment's leading run of X(k-1),
/// returning the k remainder strings.
///
/// Errors when the start rule does not have the expected shape: k segments
/// separated by `b`, each starting with at least two copies of X(k-1), with
/// no further X(k-1) in the remainder.
pub fn extract_v_factors(slp: &Slp, k: u32) -> Result<Vec<Vec<Symbol>>, AnalysisError> {
    let top_name = format!("X{}", k - 1);
    let top = nt_by_name(slp, &top_name)
        .ok_or_else(|| shape(format!("no nonterminal named {top_name}")))?;
    let top = Symbol::nt(top);
    let start_body = &slp
        .production(slp.start())
        .ok_or_else(|| shape("missing start production"))?
        .body;
    let separator = Symbol::t(b'b');
    let segments: Vec<&[Symbol]> = start_body.split(|&sym| sym == separator).collect();
    if segments.len() != k as usize {
        return Err(shape(format!(
            "expected {k} segments between separators, found {}",
            segments.len()
        )));
    }
    let mut factors = Vec::with_capacity(segments.len());
    for (i, segment) in segments.iter().enumerate() {
        let lead = segment.iter().take_while(|&&sym| sym == top).count();
        if lead < 2 {
            return Err(shape(format!(
                "segment {} starts with {lead} copies of {top_name}, expected at least 2",
                i + 1
            )));
        }
        let rest = &segment[lead..];
        if rest.contains(&top) {
            return Err(shape(format!(
                "segment {} mentions {top_name} after its leading run",
                i + 1
            )));
        }
        factors.push(rest.to_vec());
    }
    Ok(factors)
}

/// The remainder strings [`extract_v_factors`] should find, computed from the
/// family's defining bit string instead of from compressor output.
///
/// The i-th block has length m_i, and after k - 1 doubling rounds its segment
/// is X(k-1) repeated `m_i >> (k-1)` times followed by the low k - 1 bits of
/// m_i spelled as one X(j) (or one `a` for j = 0) per set bit j.
pub fn expected_v_factors(slp: &Slp, k: u32) -> Result<Vec<Vec<Symbol>>, AnalysisError> {
    let family = build_family(k)?;
    let mut factors = Vec::with_capacity(k as usize);
    for &m in family.block_lengths() {
        let mut v = Vec::new();
        for j in (0..u64::from(k) - 1).rev() {
            if (m >> j) & 1 == 1 {
                v.push(if j == 0 {
                    Symbol::t(b'a')
                } else {
                    let name = format!("X{j}");
                    Symbol::nt(
                        nt_by_name(slp, &name)
                            .ok_or_else(|| shape(format!("no nonterminal named {name}")))?,
                    )
                });
            }
        }
        factors.push(v);
    }
    Ok(factors)
}

/// One row of the benchmark table for the k-th family word.
#[derive(Clone, Debug)]
pub struct RatioReport {
    pub k: u32,
    /// Word length.
    pub n: u128,
    /// Size of the compressor's output grammar.
    pub repair_size: u64,
    /// Size of the explicit small grammar.
    pub small_slp_size: u64,
    /// repair_size / small_slp_size.
    pub ratio: f64,
    /// Rounds the compressor ran.
    pub rounds: u64,
    /// Compression wall time (set to zero in CSV output).
    pub wall: Duration,
}

/// Compresses the k-th family word and compares against its small grammar.
pub fn family_ratio(k: u32, variant: Variant) -> Result<RatioReport, AnalysisError> {
    let family = build_family(k)?;
    let word = family.s_rle();
    let mut rounds = 0u64;
    let started = Instant::now();
    let slp = Compressor::new(variant).compress_traced(&word, &mut |_| rounds += 1)?;
    let wall = started.elapsed();
    let repair_size = size(&slp).0;
    let small_slp_size = size(&build_small_slp(k)?).0;
    Ok(RatioReport {
        k,
        n: family.total_len(),
        repair_size,
        small_slp_size,
        ratio: repair_size as f64 / small_slp_size as f64,
        rounds,
        wall,
    })
}

/// [`family_ratio`] for every k in `k_min..=k_max`.
pub fn ratio_table(
    k_min: u32,
    k_max: u32,
    variant: Variant,
) -> Result<Vec<RatioReport>, AnalysisError> {
    (k_min..=k_max).map(|k| family_ratio(k, variant)).collect()
}

/// Renders ratio rows as CSV. The `ms` column is always 0 so that output is
/// identical across runs; actual timings stay in [`RatioReport::wall`].
pub fn ratio_csv(rows: &[RatioReport]) -> String {
    let mut out = String::from("k,n,repair_size,small_slp_size,ratio,rounds,ms\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.6},{},0\n",
            row.k, row.n, row.repair_size, row.small_slp_size, row.ratio, row.rounds
        ));
    }
    out
}
