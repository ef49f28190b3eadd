//! Greedy grammar compression by repeated substring substitution.
//!
//! Each round selects the most frequent repeated string across all rule
//! bodies (the whole maximal string, or just a digram, depending on
//! [`Variant`]), replaces its greedy left-to-right non-overlapping
//! occurrences with a fresh nonterminal, and appends a rule deriving the
//! replaced string. Rounds stop when no string occurs twice without overlap.
//!
//! Occurrence counts are greedy left-to-right counts; for strings of one
//! fixed length greedy packing is maximal, so counts never increase when a
//! string is extended. The engine stores rule bodies as doubly linked lists
//! of runs (symbol, repeat count), which keeps rounds cheap even for words
//! like `a^(2^40)` whose plain form would never fit in memory.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::budget::{ByteBudget, CapacityError};
use crate::slp::{GrammarSize, NtId, Slp, SlpBuilder, Symbol};
use crate::text::quote_terminal;
use crate::word::RleWord;

/// Selection rule used each round.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Variant {
    /// Choose the longest string whose non-overlapping count equals the
    /// maximum over all strings; ties break to the leftmost first occurrence.
    MaximalString,
    /// Choose the length-two string with the highest count; ties break to the
    /// leftmost first occurrence.
    Digram,
}

/// A selected repeated string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    /// The repeated string, symbol by symbol.
    pub string: Vec<Symbol>,
    /// Greedy non-overlapping occurrence count across all rule bodies.
    pub count: u64,
    /// Position of the first occurrence: (rule index, symbol offset).
    pub first: (u32, u64),
}

/// One round of compression, as reported by [`Compressor::compress_traced`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundTrace {
    pub round: u64,
    /// The chosen string, rendered with grammar display names.
    pub chosen: String,
    /// Occurrences replaced this round.
    pub count: u64,
    /// Name of the nonterminal introduced for the chosen string.
    pub fresh: String,
    pub size_before: GrammarSize,
    pub size_after: GrammarSize,
}

impl fmt::Display for RoundTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "round={} chosen=\"{}\" count={} fresh={} size_before={} size_after={}",
            self.round, self.chosen, self.count, self.fresh, self.size_before, self.size_after
        )
    }
}

#[derive(Debug, Error)]
pub enum RepairError {
    #[error("cannot compress an empty word")]
    EmptyInput,
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error("invalid candidate: {reason}")]
    InvalidCandidate { reason: String },
    #[error("fresh nonterminal name {name} is already used by the grammar")]
    NameTaken { name: String },
}

/// Compression driver with a selection variant, an optional cap on the number
/// of rounds, and a byte budget bounding the materialized output grammar.
#[derive(Clone, Debug)]
pub struct Compressor {
    variant: Variant,
    round_cap: u64,
    budget: ByteBudget,
}

impl Compressor {
    pub fn new(variant: Variant) -> Self {
        Compressor {
            variant,
            round_cap: u64::MAX,
            budget: ByteBudget::default(),
        }
    }

    /// Stops after at most `cap` rounds, returning the partially compressed
    /// grammar.
    pub fn round_cap(mut self, cap: u64) -> Self {
        self.round_cap = cap;
        self
    }

    pub fn budget(mut self, budget: ByteBudget) -> Self {
        self.budget = budget;
        self
    }

    pub fn compress(&self, word: &RleWord) -> Result<Slp, RepairError> {
        self.compress_traced(word, &mut |_| {})
    }

    /// Compresses `word`, reporting every round to `sink`.
    pub fn compress_traced(
        &self,
        word: &RleWord,
        sink: &mut dyn FnMut(&RoundTrace),
    ) -> Result<Slp, RepairError> {
        if word.is_empty() {
            return Err(RepairError::EmptyInput);
        }
        let mut state = ChainState::from_rle(word);
        let mut round = 0;
        while round < self.round_cap {
            let Some(chosen) = state.select(self.variant) else {
                break;
            };
            round += 1;
            let size_before = state.total_size();
            let fresh = state.fresh_nonterminal();
            let replaced = state.replace_all(&chosen.pattern, Symbol::nt(fresh));
            assert_eq!(
                replaced, chosen.count,
                "replacement must consume exactly the counted occurrences"
            );
            state.push_rule(fresh, &chosen.pattern);
            let trace = RoundTrace {
                round,
                chosen: state.render_pattern(&chosen.pattern),
                count: replaced,
                fresh: state.names[fresh.index()].clone(),
                size_before: GrammarSize(size_before),
                size_after: GrammarSize(state.total_size()),
            };
            sink(&trace);
        }
        self.budget.check(state.total_size() as u128)?;
        Ok(state.to_slp())
    }

    pub fn compress_with_trace(
        &self,
        word: &RleWord,
    ) -> Result<(Slp, Vec<RoundTrace>), RepairError> {
        let mut traces = Vec::new();
        let slp = self.compress_traced(word, &mut |t| traces.push(t.clone()))?;
        Ok((slp, traces))
    }
}

/// Compresses a run-length encoded word with default settings.
pub fn compress(word: &RleWord, variant: Variant) -> Result<Slp, RepairError> {
    Compressor::new(variant).compress(word)
}

/// Compresses a byte string with default settings.
pub fn compress_bytes(bytes: &[u8], variant: Variant) -> Result<Slp, RepairError> {
    compress(&RleWord::from_bytes(bytes), variant)
}

/// Greedy left-to-right count of non-overlapping occurrences of `pattern` in
/// `text`. For a fixed pattern this equals the maximum number of disjoint
/// occurrences.
pub fn count_nonoverlapping(pattern: &[Symbol], text: &[Symbol]) -> u64 {
    if pattern.is_empty() || pattern.len() > text.len() {
        return 0;
    }
    let mut count = 0;
    let mut i = 0;
    while i + pattern.len() <= text.len() {
        if &text[i..i + pattern.len()] == pattern {
            count += 1;
            i += pattern.len();
        } else {
            i += 1;
        }
    }
    count
}

/// [`count_nonoverlapping`] over plain byte strings.
pub fn count_nonoverlapping_bytes(pattern: &[u8], text: &[u8]) -> u64 {
    let pattern: Vec<Symbol> = pattern.iter().map(|&b| Symbol::t(b)).collect();
    let text: Vec<Symbol> = text.iter().map(|&b| Symbol::t(b)).collect();
    count_nonoverlapping(&pattern, &text)
}

/// Highest-count digram across all rule bodies of `slp`, or `None` when no
/// digram occurs twice.
pub fn best_digram(slp: &Slp) -> Option<Candidate> {
    let state = ChainState::from_slp(slp);
    state.select(Variant::Digram).map(|c| c.into_candidate())
}

/// Longest string attaining the maximum non-overlapping count across all rule
/// bodies of `slp`, or `None` when no string occurs twice.
pub fn select_maximal_string(slp: &Slp) -> Option<Candidate> {
    let state = ChainState::from_slp(slp);
    state
        .select(Variant::MaximalString)
        .map(|c| c.into_candidate())
}

/// Replaces the greedy left-to-right non-overlapping occurrences of
/// `candidate.string` in every rule body with a fresh nonterminal named
/// `fresh_name`, appending the rule `fresh_name -> candidate.string`.
pub fn replace_candidate(
    slp: &Slp,
    candidate: &Candidate,
    fresh_name: &str,
) -> Result<Slp, RepairError> {
    if candidate.string.len() < 2 {
        return Err(RepairError::InvalidCandidate {
            reason: "replaced strings must have at least two symbols".into(),
        });
    }
    if slp.names().iter().any(|n| n == fresh_name) {
        return Err(RepairError::NameTaken {
            name: fresh_name.into(),
        });
    }
    let mut state = ChainState::from_slp(slp);
    let fresh = NtId(state.names.len() as u32);
    state.names.push(fresh_name.to_string());
    let pattern = symbols_to_pattern(&candidate.string);
    state.replace_all(&pattern, Symbol::nt(fresh));
    state.push_rule(fresh, &pattern);
    Ok(state.to_slp())
}

/// A string as runs of equal symbols; adjacent runs carry distinct symbols.
type Pattern = Vec<(Symbol, u64)>;

/// A digram with its greedy count and first occurrence, as scored during
/// selection.
type ScoredDigram = (u64, (u32, u64), (Symbol, Symbol));

fn symbols_to_pattern(symbols: &[Symbol]) -> Pattern {
    let mut pattern = Pattern::new();
    for &sym in symbols {
        match pattern.last_mut() {
            Some((s, len)) if *s == sym => *len += 1,
            _ => pattern.push((sym, 1)),
        }
    }
    pattern
}

fn pattern_symbol_len(pattern: &[(Symbol, u64)]) -> u64 {
    pattern.iter().map(|&(_, len)| len).sum()
}

/// Internal selection result.
struct Chosen {
    pattern: Pattern,
    count: u64,
    first: (u32, u64),
}

impl Chosen {
    fn into_candidate(self) -> Candidate {
        let mut string = Vec::new();
        for &(sym, len) in &self.pattern {
            for _ in 0..len {
                string.push(sym);
            }
        }
        Candidate {
            string,
            count: self.count,
            first: self.first,
        }
    }
}

const NIL: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct RunNode {
    sym: Symbol,
    len: u64,
    prev: u32,
    next: u32,
}

struct BodyChain {
    head_nt: NtId,
    head: u32,
}

/// Rule bodies as doubly linked run lists over a shared arena.
struct ChainState {
    arena: Vec<RunNode>,
    bodies: Vec<BodyChain>,
    names: Vec<String>,
    start: NtId,
}

struct PatternScan {
    count: u64,
    first: Option<(u32, u64)>,
    /// Symbols immediately following at least one (not necessarily greedy)
    /// occurrence. Extending by any other symbol yields count zero.
    followers: BTreeSet<Symbol>,
}

impl ChainState {
    fn from_rle(word: &RleWord) -> Self {
        let mut state = ChainState {
            arena: Vec::new(),
            bodies: Vec::new(),
            names: vec!["S".to_string()],
            start: NtId(0),
        };
        let pattern: Pattern = word
            .runs()
            .iter()
            .map(|&(b, len)| (Symbol::t(b), len))
            .collect();
        state.push_rule(NtId(0), &pattern);
        state
    }

    fn from_slp(slp: &Slp) -> Self {
        let mut state = ChainState {
            arena: Vec::new(),
            bodies: Vec::new(),
            names: slp.names().to_vec(),
            start: slp.start(),
        };
        for rule in slp.rules() {
            let pattern = symbols_to_pattern(&rule.body);
            state.push_rule(rule.head, &pattern);
        }
        state
    }

    /// Appends a rule whose body is `pattern`.
    fn push_rule(&mut self, head_nt: NtId, pattern: &[(Symbol, u64)]) {
        let body_idx = self.bodies.len();
        self.bodies.push(BodyChain { head_nt, head: NIL });
        let mut tail = NIL;
        for &(sym, len) in pattern {
            tail = self.insert_after(body_idx, tail, sym, len);
        }
    }

    /// Smallest unused name of the form `X{n}`.
    fn fresh_nonterminal(&mut self) -> NtId {
        let mut n = 1;
        loop {
            let name = format!("X{n}");
            if !self.names.contains(&name) {
                self.names.push(name);
                return NtId(self.names.len() as u32 - 1);
            }
            n += 1;
        }
    }

    fn total_size(&self) -> u64 {
        let mut total = 0u64;
        for body in &self.bodies {
            let mut cur = body.head;
            while cur != NIL {
                total += self.arena[cur as usize].len;
                cur = self.arena[cur as usize].next;
            }
        }
        total
    }

    fn render_symbol(&self, sym: Symbol) -> String {
        match sym {
            Symbol::Terminal(b) => quote_terminal(b),
            Symbol::Nonterminal(id) => self.names[id.index()].clone(),
        }
    }

    fn render_pattern(&self, pattern: &[(Symbol, u64)]) -> String {
        let mut parts = Vec::new();
        for &(sym, len) in pattern {
            let rendered = self.render_symbol(sym);
            for _ in 0..len {
                parts.push(rendered.clone());
            }
        }
        parts.join(" ")
    }

    fn insert_after(&mut self, body_idx: usize, after: u32, sym: Symbol, len: u64) -> u32 {
        let (prev, next) = if after == NIL {
            (NIL, self.bodies[body_idx].head)
        } else {
            (after, self.arena[after as usize].next)
        };
        let id = self.arena.len() as u32;
        self.arena.push(RunNode {
            sym,
            len,
            prev,
            next,
        });
        if prev != NIL {
            self.arena[prev as usize].next = id;
        } else {
            self.bodies[body_idx].head = id;
        }
        if next != NIL {
            self.arena[next as usize].prev = id;
        }
        id
    }

    fn unlink(&mut self, body_idx: usize, node: u32) {
        let RunNode { prev, next, .. } = self.arena[node as usize];
        if prev != NIL {
            self.arena[prev as usize].next = next;
        } else {
            self.bodies[body_idx].head = next;
        }
        if next != NIL {
            self.arena[next as usize].prev = prev;
        }
    }

    /// Greedy non-overlapping counts of every digram, with the position of its
    /// first occurrence. Counts within a run of a repeated symbol contribute
    /// `len / 2` for the digram (c, c).
    fn digram_stats(&self) -> HashMap<(Symbol, Symbol), (u64, (u32, u64))> {
        let mut map: HashMap<(Symbol, Symbol), (u64, (u32, u64))> = HashMap::new();
        for (bi, body) in self.bodies.iter().enumerate() {
            let mut offset = 0u64;
            let mut prev_sym: Option<Symbol> = None;
            let mut cur = body.head;
            while cur != NIL {
                let node = self.arena[cur as usize];
                if let Some(p) = prev_sym {
                    let entry = map
                        .entry((p, node.sym))
                        .or_insert((0, (bi as u32, offset - 1)));
                    entry.0 += 1;
                }
                if node.len >= 2 {
                    let entry = map
                        .entry((node.sym, node.sym))
                        .or_insert((0, (bi as u32, offset)));
                    entry.0 += node.len / 2;
                }
                prev_sym = Some(node.sym);
                offset += node.len;
                cur = node.next;
            }
        }
        map
    }

    /// Matches `pattern` as a window of runs starting at run `cur`: the first
    /// run needs at least the required length (the occurrence is anchored at
    /// its tail), middle runs must match exactly, and the last run needs at
    /// least the required length (anchored at its head). Returns the window's
    /// run ids.
    fn match_window(&self, cur: u32, pattern: &[(Symbol, u64)]) -> Option<Vec<u32>> {
        debug_assert!(pattern.len() >= 2);
        let node = self.arena[cur as usize];
        let (c0, e0) = pattern[0];
        if node.sym != c0 || node.len < e0 {
            return None;
        }
        let mut window = Vec::with_capacity(pattern.len());
        window.push(cur);
        let mut run = node.next;
        for (i, &(sym, len)) in pattern.iter().enumerate().skip(1) {
            if run == NIL {
                return None;
            }
            let node = self.arena[run as usize];
            if node.sym != sym {
                return None;
            }
            let last = i == pattern.len() - 1;
            if (last && node.len < len) || (!last && node.len != len) {
                return None;
            }
            window.push(run);
            run = node.next;
        }
        Some(window)
    }

    /// Greedy count, first occurrence, and follower symbols for `pattern`.
    fn scan_pattern(&self, pattern: &[(Symbol, u64)]) -> PatternScan {
        let mut scan = PatternScan {
            count: 0,
            first: None,
            followers: BTreeSet::new(),
        };
        if pattern.len() == 1 {
            let (c, e) = pattern[0];
            for (bi, body) in self.bodies.iter().enumerate() {
                let mut offset = 0u64;
                let mut cur = body.head;
                while cur != NIL {
                    let node = self.arena[cur as usize];
                    if node.sym == c && node.len >= e {
                        scan.count += node.len / e;
                        if scan.first.is_none() {
                            scan.first = Some((bi as u32, offset));
                        }
                        if node.len > e {
                            scan.followers.insert(c);
                        }
                        if node.next != NIL {
                            scan.followers.insert(self.arena[node.next as usize].sym);
                        }
                    }
                    offset += node.len;
                    cur = node.next;
                }
            }
            return scan;
        }
        let e0 = pattern[0].1;
        let e_last = pattern[pattern.len() - 1].1;
        let plen = pattern_symbol_len(pattern);
        for (bi, body) in self.bodies.iter().enumerate() {
            let mut offset = 0u64;
            let mut next_free = 0u64;
            let mut cur = body.head;
            while cur != NIL {
                let node = self.arena[cur as usize];
                if let Some(window) = self.match_window(cur, pattern) {
                    let last = self.arena[*window.last().unwrap() as usize];
                    if last.len > e_last {
                        scan.followers.insert(last.sym);
                    } else if last.next != NIL {
                        scan.followers.insert(self.arena[last.next as usize].sym);
                    }
                    let start = offset + node.len - e0;
                    if start >= next_free {
                        scan.count += 1;
                        if scan.first.is_none() {
                            scan.first = Some((bi as u32, start));
                        }
                        next_free = start + plen;
                    }
                }
                offset += node.len;
                cur = node.next;
            }
        }
        scan
    }

    /// Replaces every greedy left-to-right non-overlapping occurrence of
    /// `pattern` with the single symbol `x`, returning how many occurrences
    /// were replaced. `x` must not already occur in any body.
    fn replace_all(&mut self, pattern: &[(Symbol, u64)], x: Symbol) -> u64 {
        let mut replaced = 0u64;
        if pattern.len() == 1 {
            let (c, e) = pattern[0];
            for bi in 0..self.bodies.len() {
                let mut cur = self.bodies[bi].head;
                while cur != NIL {
                    let next = self.arena[cur as usize].next;
                    let node = self.arena[cur as usize];
                    if node.sym == c && node.len >= e {
                        let occurrences = node.len / e;
                        let remainder = node.len % e;
                        self.arena[cur as usize].sym = x;
                        self.arena[cur as usize].len = occurrences;
                        if remainder > 0 {
                            self.insert_after(bi, cur, c, remainder);
                        }
                        replaced += occurrences;
                    }
                    cur = next;
                }
            }
            return replaced;
        }
        let e0 = pattern[0].1;
        let e_last = pattern[pattern.len() - 1].1;
        for bi in 0..self.bodies.len() {
            let mut cur = self.bodies[bi].head;
            while cur != NIL {
                let Some(window) = self.match_window(cur, pattern) else {
                    cur = self.arena[cur as usize].next;
                    continue;
                };
                let first = window[0];
                let last = *window.last().unwrap();
                let after_last = self.arena[last as usize].next;
                // Trim or drop the first run; the kept surplus precedes x.
                let surplus_first = self.arena[first as usize].len - e0;
                let left_anchor = if surplus_first > 0 {
                    self.arena[first as usize].len = surplus_first;
                    first
                } else {
                    let prev = self.arena[first as usize].prev;
                    self.unlink(bi, first);
                    prev
                };
                for &mid in &window[1..window.len() - 1] {
                    self.unlink(bi, mid);
                }
                // Trim or drop the last run; the kept surplus follows x.
                let surplus_last = self.arena[last as usize].len - e_last;
                if surplus_last > 0 {
                    self.arena[last as usize].len = surplus_last;
                } else {
                    self.unlink(bi, last);
                }
                // Insert x, merging into an adjacent x-run created by the
                // previous occurrence. No run to the right can hold x yet.
                if left_anchor != NIL && self.arena[left_anchor as usize].sym == x {
                    self.arena[left_anchor as usize].len += 1;
                } else {
                    self.insert_after(bi, left_anchor, x, 1);
                }
                replaced += 1;
                // Resume at the trimmed last run: anything it still holds lies
                // entirely after the replaced occurrence, so greedy
                // non-overlap needs no position bookkeeping.
                cur = if surplus_last > 0 { last } else { after_last };
            }
        }
        replaced
    }

    fn select(&self, variant: Variant) -> Option<Chosen> {
        let stats = self.digram_stats();
        let t = stats.values().map(|&(count, _)| count).max()?;
        if t < 2 {
            return None;
        }
        match variant {
            Variant::Digram => {
                let mut best: Option<ScoredDigram> = None;
                for (&digram, &(count, first)) in &stats {
                    let better = match best {
                        None => true,
                        Some((bc, bf, _)) => count > bc || (count == bc && first < bf),
                    };
                    if better {
                        best = Some((count, first, digram));
                    }
                }
                let (count, first, (a, b)) = best?;
                let pattern = if a == b {
                    vec![(a, 2)]
                } else {
                    vec![(a, 1), (b, 1)]
                };
                Some(Chosen {
                    pattern,
                    count,
                    first,
                })
            }
            Variant::MaximalString => {
                // Counts never increase under extension, so every string that
                // attains the maximum count t extends a digram with count t,
                // one symbol at a time, through strings of count t. Grow all
                // such digrams in lockstep and keep the last nonempty
                // generation.
                struct Grow {
                    pattern: Pattern,
                    first: (u32, u64),
                    followers: BTreeSet<Symbol>,
                }
                let mut frontier: Vec<Grow> = Vec::new();
                for (&(a, b), &(count, _)) in &stats {
                    if count != t {
                        continue;
                    }
                    let pattern = if a == b {
                        vec![(a, 2)]
                    } else {
                        vec![(a, 1), (b, 1)]
                    };
                    let scan = self.scan_pattern(&pattern);
                    frontier.push(Grow {
                        pattern,
                        first: scan.first.expect("digram with count >= 2 occurs"),
                        followers: scan.followers,
                    });
                }
                loop {
                    let mut next = Vec::new();
                    for grow in &frontier {
                        for &x in &grow.followers {
                            let mut ext = grow.pattern.clone();
                            match ext.last_mut() {
                                Some((sym, len)) if *sym == x => *len += 1,
                                _ => ext.push((x, 1)),
                            }
                            let scan = self.scan_pattern(&ext);
                            if scan.count == t {
                                next.push(Grow {
                                    pattern: ext,
                                    first: scan.first.expect("count t >= 2 occurrences"),
                                    followers: scan.followers,
                                });
                            }
                        }
                    }
                    if next.is_empty() {
                        break;
                    }
                    frontier = next;
                }
                let best = frontier
                    .into_iter()
                    .min_by_key(|g| g.first)
                    .expect("some digram attains t");
                Some(Chosen {
                    pattern: best.pattern,
                    count: t,
                    first: best.first,
                })
            }
        }
    }

    fn to_slp(&self) -> Slp {
        let mut builder = SlpBuilder::new();
        for body in &self.bodies {
            builder.nonterminal(self.names[body.head_nt.index()].clone());
        }
        for body in &self.bodies {
            let head = builder.nonterminal(self.names[body.head_nt.index()].clone());
            let mut symbols = Vec::new();
            let mut cur = body.head;
            while cur != NIL {
                let node = self.arena[cur as usize];
                let sym = match node.sym {
                    Symbol::Terminal(b) => Symbol::t(b),
                    Symbol::Nonterminal(id) => {
                        Symbol::nt(builder.nonterminal(self.names[id.index()].clone()))
                    }
                };
                for _ in 0..node.len {
                    symbols.push(sym);
                }
                cur = node.next;
            }
            builder.rule(head, symbols);
        }
        let start = builder.nonterminal(self.names[self.start.index()].clone());
        builder.finish(start)
    }
}
