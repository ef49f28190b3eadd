//! Straight-line programs: context-free grammars with exactly one production
//! per nonterminal and acyclic references, deriving exactly one word.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::budget::{ByteBudget, CapacityError};
use crate::word::RleWord;

/// Identifier of a nonterminal within one grammar. Dense small integers,
/// assigned in creation order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NtId(pub u32);

impl NtId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One grammar symbol: a terminal byte or a reference to a nonterminal.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Symbol {
    Terminal(u8),
    Nonterminal(NtId),
}

impl Symbol {
    pub fn t(byte: u8) -> Self {
        Symbol::Terminal(byte)
    }

    pub fn nt(id: NtId) -> Self {
        Symbol::Nonterminal(id)
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, Symbol::Terminal(_))
    }
}

/// A production `head -> body`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Production {
    pub head: NtId,
    pub body: Vec<Symbol>,
}

/// Grammar size: the sum of all production body lengths.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct GrammarSize(pub u64);

impl fmt::Display for GrammarSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A straight-line program.
///
/// Productions are stored with the start rule first and the remaining rules in
/// creation order; that order is what serialization emits and golden tests
/// compare. Equality is structural over display names, so two grammars are
/// equal exactly when their text forms are.
#[derive(Clone, Debug)]
pub struct Slp {
    rules: Vec<Production>,
    names: Vec<String>,
    start: NtId,
    rule_of: Vec<Option<u32>>,
}

impl Slp {
    pub fn rules(&self) -> &[Production] {
        &self.rules
    }

    pub fn start(&self) -> NtId {
        self.start
    }

    pub fn name(&self, id: NtId) -> &str {
        &self.names[id.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Number of nonterminal identifiers in use (defined or merely referenced).
    pub fn num_nonterminals(&self) -> usize {
        self.names.len()
    }

    pub fn production(&self, id: NtId) -> Option<&Production> {
        let idx = (*self.rule_of.get(id.index())?)?;
        Some(&self.rules[idx as usize])
    }

    /// Set of terminal bytes occurring in any body.
    pub fn alphabet(&self) -> BTreeSet<u8> {
        let mut set = BTreeSet::new();
        for rule in &self.rules {
            for sym in &rule.body {
                if let Symbol::Terminal(b) = sym {
                    set.insert(*b);
                }
            }
        }
        set
    }

    /// Renders one symbol using this grammar's display names.
    pub fn render_symbol(&self, sym: Symbol) -> String {
        match sym {
            Symbol::Terminal(b) => crate::text::quote_terminal(b),
            Symbol::Nonterminal(id) => self.name(id).to_string(),
        }
    }

    pub fn render_symbols(&self, syms: &[Symbol]) -> String {
        syms.iter()
            .map(|&s| self.render_symbol(s))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl PartialEq for Slp {
    fn eq(&self, other: &Self) -> bool {
        if self.rules.len() != other.rules.len() || self.name(self.start) != other.name(other.start)
        {
            return false;
        }
        self.rules.iter().zip(&other.rules).all(|(a, b)| {
            self.name(a.head) == other.name(b.head)
                && a.body.len() == b.body.len()
                && a.body.iter().zip(&b.body).all(|(x, y)| match (x, y) {
                    (Symbol::Terminal(p), Symbol::Terminal(q)) => p == q,
                    (Symbol::Nonterminal(p), Symbol::Nonterminal(q)) => {
                        self.name(*p) == other.name(*q)
                    }
                    _ => false,
                })
        })
    }
}

impl Eq for Slp {}

impl fmt::Display for Slp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::text::serialize(self))
    }
}

/// Incremental grammar constructor.
///
/// `nonterminal` returns the existing id when the name was already created, so
/// parsers can intern names freely. `finish` moves the start rule to the front
/// but performs no validation; run [`validate`] to obtain a report.
#[derive(Default)]
pub struct SlpBuilder {
    names: Vec<String>,
    rules: Vec<Production>,
}

impl SlpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn nonterminal(&mut self, name: impl Into<String>) -> NtId {
        let name = name.into();
        if let Some(i) = self.names.iter().position(|n| *n == name) {
            return NtId(i as u32);
        }
        self.names.push(name);
        NtId(self.names.len() as u32 - 1)
    }

    pub fn rule(&mut self, head: NtId, body: impl IntoIterator<Item = Symbol>) {
        self.rules.push(Production {
            head,
            body: body.into_iter().collect(),
        });
    }

    pub fn finish(mut self, start: NtId) -> Slp {
        if let Some(i) = self.rules.iter().position(|r| r.head == start) {
            let start_rule = self.rules.remove(i);
            self.rules.insert(0, start_rule);
        }
        let mut rule_of = vec![None; self.names.len()];
        for (i, rule) in self.rules.iter().enumerate() {
            let slot = &mut rule_of[rule.head.index()];
            if slot.is_none() {
                *slot = Some(i as u32);
            }
        }
        Slp {
            rules: self.rules,
            names: self.names,
            start,
            rule_of,
        }
    }
}

/// Computes the grammar size.
pub fn size(slp: &Slp) -> GrammarSize {
    GrammarSize(slp.rules().iter().map(|r| r.body.len() as u64).sum())
}

/// One structural defect found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateProduction { nt: String },
    MissingProduction { nt: String, referenced_in: String },
    MissingStartProduction { nt: String },
    EmptyBody { nt: String },
    CyclicReference { path: Vec<String> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateProduction { nt } => {
                write!(f, "nonterminal {nt} has more than one production")
            }
            Violation::MissingProduction { nt, referenced_in } => {
                write!(
                    f,
                    "nonterminal {nt} (referenced in rule {referenced_in}) has no production"
                )
            }
            Violation::MissingStartProduction { nt } => {
                write!(f, "start nonterminal {nt} has no production")
            }
            Violation::EmptyBody { nt } => write!(f, "rule {nt} has an empty body"),
            Violation::CyclicReference { path } => {
                write!(f, "cyclic reference: {}", path.join(" -> "))
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            v.fmt(f)?;
        }
        Ok(())
    }
}

/// Checks the SLP well-formedness conditions: one production per nonterminal,
/// every referenced nonterminal defined, nonempty bodies, acyclic references.
pub fn validate(slp: &Slp) -> ValidationReport {
    let mut violations = Vec::new();

    let mut seen = vec![false; slp.num_nonterminals()];
    for rule in slp.rules() {
        if seen[rule.head.index()] {
            violations.push(Violation::DuplicateProduction {
                nt: slp.name(rule.head).into(),
            });
        }
        seen[rule.head.index()] = true;
        if rule.body.is_empty() {
            violations.push(Violation::EmptyBody {
                nt: slp.name(rule.head).into(),
            });
        }
        for sym in &rule.body {
            if let Symbol::Nonterminal(id) = sym {
                if slp.production(*id).is_none() {
                    violations.push(Violation::MissingProduction {
                        nt: slp.name(*id).into(),
                        referenced_in: slp.name(rule.head).into(),
                    });
                }
            }
        }
    }
    if slp.production(slp.start()).is_none() {
        violations.push(Violation::MissingStartProduction {
            nt: slp.name(slp.start()).into(),
        });
    }

    if let Some(cycle) = find_cycle(slp) {
        violations.push(Violation::CyclicReference {
            path: cycle
                .into_iter()
                .map(|id| slp.name(id).to_string())
                .collect(),
        });
    }

    ValidationReport { violations }
}

/// Returns one reference cycle as a path `A -> ... -> A`, if any exists.
fn find_cycle(slp: &Slp) -> Option<Vec<NtId>> {
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    let n = slp.num_nonterminals();
    let mut color = vec![WHITE; n];
    for root in 0..n {
        let root = NtId(root as u32);
        if color[root.index()] != WHITE || slp.production(root).is_none() {
            continue;
        }
        // Iterative DFS; a stack entry is (nonterminal, next body position).
        let mut stack: Vec<(NtId, usize)> = vec![(root, 0)];
        color[root.index()] = GRAY;
        while let Some(&(id, pos)) = stack.last() {
            let body = &slp
                .production(id)
                .expect("only defined nonterminals are pushed")
                .body;
            if pos >= body.len() {
                color[id.index()] = BLACK;
                stack.pop();
                continue;
            }
            stack.last_mut().expect("nonempty").1 += 1;
            if let Symbol::Nonterminal(next) = body[pos] {
                if slp.production(next).is_none() {
                    continue;
                }
                match color[next.index()] {
                    WHITE => {
                        color[next.index()] = GRAY;
                        stack.push((next, 0));
                    }
                    GRAY => {
                        let mut path: Vec<NtId> = stack
                            .iter()
                            .map(|&(nt, _)| nt)
                            .skip_while(|&nt| nt != next)
                            .collect();
                        path.push(next);
                        return Some(path);
                    }
                    _ => {}
                }
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("nonterminal {name} has no production")]
    Undefined { name: String },
    #[error("grammar contains a reference cycle through {name}")]
    Cyclic { name: String },
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error("run-length expansion exceeds {max_runs} runs")]
    TooManyRuns { max_runs: usize },
}

/// Expansion length of every defined nonterminal, computed bottom-up.
///
/// Lengths saturate at `u128::MAX`; budget checks compare against the exact
/// value whenever it fits.
pub fn expansion_lengths(slp: &Slp) -> Result<Vec<u128>, ExpandError> {
    let n = slp.num_nonterminals();
    let mut lengths: Vec<Option<u128>> = vec![None; n];
    let mut on_stack = vec![false; n];
    for root in 0..n {
        let root = NtId(root as u32);
        if slp.production(root).is_none() || lengths[root.index()].is_some() {
            continue;
        }
        compute_length(slp, root, &mut lengths, &mut on_stack)?;
    }
    Ok(lengths.into_iter().map(|l| l.unwrap_or(0)).collect())
}

fn compute_length(
    slp: &Slp,
    root: NtId,
    lengths: &mut [Option<u128>],
    on_stack: &mut [bool],
) -> Result<(), ExpandError> {
    let mut stack: Vec<(NtId, usize)> = vec![(root, 0)];
    on_stack[root.index()] = true;
    while let Some(&(id, pos)) = stack.last() {
        let body = &slp
            .production(id)
            .ok_or_else(|| ExpandError::Undefined {
                name: slp.name(id).into(),
            })?
            .body;
        if pos >= body.len() {
            let mut total: u128 = 0;
            for sym in body {
                total = total.saturating_add(match sym {
                    Symbol::Terminal(_) => 1,
                    Symbol::Nonterminal(next) => {
                        lengths[next.index()].expect("children computed first")
                    }
                });
            }
            lengths[id.index()] = Some(total);
            on_stack[id.index()] = false;
            stack.pop();
            continue;
        }
        stack.last_mut().expect("nonempty").1 += 1;
        if let Symbol::Nonterminal(next) = body[pos] {
            if lengths[next.index()].is_some() {
                continue;
            }
            if on_stack[next.index()] {
                return Err(ExpandError::Cyclic {
                    name: slp.name(next).into(),
                });
            }
            if slp.production(next).is_none() {
                return Err(ExpandError::Undefined {
                    name: slp.name(next).into(),
                });
            }
            on_stack[next.index()] = true;
            stack.push((next, 0));
        }
    }
    Ok(())
}

/// Expands `id` to its derived word under the default byte budget.
pub fn expand(slp: &Slp, id: NtId) -> Result<Vec<u8>, ExpandError> {
    expand_with_budget(slp, id, ByteBudget::default())
}

/// Expands `id` to its derived word, refusing outputs beyond `budget`.
///
/// Iterative: the traversal stack depth is bounded by the number of rules,
/// never by the output length.
pub fn expand_with_budget(slp: &Slp, id: NtId, budget: ByteBudget) -> Result<Vec<u8>, ExpandError> {
    let lengths = expansion_lengths(slp)?;
    if slp.production(id).is_none() {
        return Err(ExpandError::Undefined {
            name: slp.name(id).into(),
        });
    }
    budget.check(lengths[id.index()])?;
    let mut out = Vec::with_capacity(lengths[id.index()] as usize);
    let mut stack: Vec<(NtId, usize)> = vec![(id, 0)];
    while let Some(&(nt, pos)) = stack.last() {
        let body = &slp
            .production(nt)
            .expect("checked by expansion_lengths")
            .body;
        if pos >= body.len() {
            stack.pop();
            continue;
        }
        stack.last_mut().expect("nonempty").1 += 1;
        match body[pos] {
            Symbol::Terminal(b) => out.push(b),
            Symbol::Nonterminal(next) => stack.push((next, 0)),
        }
    }
    Ok(out)
}

/// Expands `id` to a run-length encoded word without materializing it,
/// refusing results with more than `max_runs` runs.
pub fn expand_rle(slp: &Slp, id: NtId, max_runs: usize) -> Result<RleWord, ExpandError> {
    // The length pass performs cycle and definedness checking.
    expansion_lengths(slp)?;
    if slp.production(id).is_none() {
        return Err(ExpandError::Undefined {
            name: slp.name(id).into(),
        });
    }
    let n = slp.num_nonterminals();
    // Topological order below the root.
    let mut order: Vec<NtId> = Vec::new();
    let mut pending = vec![false; n];
    let mut stack: Vec<(NtId, usize)> = vec![(id, 0)];
    pending[id.index()] = true;
    while let Some(&(nt, pos)) = stack.last() {
        let body = &slp.production(nt).expect("validated above").body;
        if pos >= body.len() {
            order.push(nt);
            stack.pop();
            continue;
        }
        stack.last_mut().expect("nonempty").1 += 1;
        if let Symbol::Nonterminal(next) = body[pos] {
            if !pending[next.index()] {
                pending[next.index()] = true;
                stack.push((next, 0));
            }
        }
    }
    let mut memo: Vec<Option<RleWord>> = vec![None; n];
    for nt in order {
        let mut rle = RleWord::new();
        let body = &slp.production(nt).expect("validated above").body;
        for sym in body {
            match sym {
                Symbol::Terminal(b) => rle.push_run(*b, 1),
                Symbol::Nonterminal(next) => {
                    let sub = memo[next.index()].as_ref().expect("bottom-up order");
                    for &(b, c) in sub.runs() {
                        rle.push_run(b, c);
                    }
                }
            }
            if rle.runs().len() > max_runs {
                return Err(ExpandError::TooManyRuns { max_runs });
            }
        }
        memo[nt.index()] = Some(rle);
    }
    Ok(memo[id.index()].take().expect("root computed"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_rule(body: &[Symbol]) -> Slp {
        let mut b = SlpBuilder::new();
        let s = b.nonterminal("S");
        b.rule(s, body.iter().copied());
        b.finish(s)
    }

    /// `{S -> AA, A -> abc}`.
    fn abcabc() -> Slp {
        let mut b = SlpBuilder::new();
        let s = b.nonterminal("S");
        let a = b.nonterminal("A");
        b.rule(a, [Symbol::t(b'a'), Symbol::t(b'b'), Symbol::t(b'c')]);
        b.rule(s, [Symbol::nt(a), Symbol::nt(a)]);
        b.finish(s)
    }

    #[test]
    fn validate_accepts_single_terminal_rule() {
        let slp = single_rule(&[Symbol::t(b'a')]);
        assert!(validate(&slp).is_ok());
    }

    #[test]
    fn validate_reports_cycles() {
        let mut b = SlpBuilder::new();
        let s = b.nonterminal("S");
        let a = b.nonterminal("A");
        b.rule(s, [Symbol::nt(a)]);
        b.rule(a, [Symbol::nt(s)]);
        let slp = b.finish(s);
        let report = validate(&slp);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::CyclicReference { .. })));
    }

    #[test]
    fn validate_accepts_shared_nonterminal() {
        assert!(validate(&abcabc()).is_ok());
    }

    #[test]
    fn validate_reports_duplicates_missing_and_empty() {
        let mut b = SlpBuilder::new();
        let s = b.nonterminal("S");
        let a = b.nonterminal("A");
        let ghost = b.nonterminal("G");
        b.rule(s, [Symbol::nt(a), Symbol::nt(ghost)]);
        b.rule(a, [Symbol::t(b'a')]);
        b.rule(a, []);
        let slp = b.finish(s);
        let report = validate(&slp);
        assert!(report
            .violations
            .contains(&Violation::DuplicateProduction { nt: "A".into() }));
        assert!(report.violations.contains(&Violation::MissingProduction {
            nt: "G".into(),
            referenced_in: "S".into()
        }));
        assert!(report
            .violations
            .contains(&Violation::EmptyBody { nt: "A".into() }));
    }

    #[test]
    fn expand_concatenates_shared_rules() {
        let slp = abcabc();
        assert_eq!(expand(&slp, slp.start()).unwrap(), b"abcabc");
    }

    #[test]
    fn expand_handles_doubling_grammars() {
        // S -> X3 X3 X3 X1 a with doubling rules derives a^27.
        let mut b = SlpBuilder::new();
        let s = b.nonterminal("S");
        let x1 = b.nonterminal("X1");
        let x2 = b.nonterminal("X2");
        let x3 = b.nonterminal("X3");
        b.rule(x1, [Symbol::t(b'a'), Symbol::t(b'a')]);
        b.rule(x2, [Symbol::nt(x1), Symbol::nt(x1)]);
        b.rule(x3, [Symbol::nt(x2), Symbol::nt(x2)]);
        b.rule(
            s,
            [
                Symbol::nt(x3),
                Symbol::nt(x3),
                Symbol::nt(x3),
                Symbol::nt(x1),
                Symbol::t(b'a'),
            ],
        );
        let slp = b.finish(s);
        assert_eq!(expand(&slp, s).unwrap(), vec![b'a'; 27]);
        assert_eq!(size(&slp), GrammarSize(11));
    }

    #[test]
    fn expand_length_matches_bottom_up_lengths() {
        let slp = abcabc();
        let lengths = expansion_lengths(&slp).unwrap();
        let word = expand(&slp, slp.start()).unwrap();
        assert_eq!(lengths[slp.start().index()], word.len() as u128);
    }

    #[test]
    fn expand_rejects_outputs_beyond_budget() {
        // 40 doubling rules derive a word of 2^40 symbols.
        let mut b = SlpBuilder::new();
        let mut prev = {
            let x = b.nonterminal("X1");
            b.rule(x, [Symbol::t(b'a'), Symbol::t(b'a')]);
            x
        };
        for i in 2..=40 {
            let x = b.nonterminal(format!("X{i}"));
            b.rule(x, [Symbol::nt(prev), Symbol::nt(prev)]);
            prev = x;
        }
        let s = b.nonterminal("S");
        b.rule(s, [Symbol::nt(prev)]);
        let slp = b.finish(s);
        match expand(&slp, s) {
            Err(ExpandError::Capacity(err)) => {
                assert_eq!(err.required, 1u128 << 40);
                assert_eq!(err.budget, 1 << 31);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
        // The run-length view stays cheap.
        let rle = expand_rle(&slp, s, 16).unwrap();
        assert_eq!(rle.runs(), &[(b'a', 1u64 << 40)]);
    }

    #[test]
    fn expand_reports_cycles_and_undefined() {
        let mut b = SlpBuilder::new();
        let s = b.nonterminal("S");
        let a = b.nonterminal("A");
        b.rule(s, [Symbol::nt(a)]);
        b.rule(a, [Symbol::nt(s)]);
        let slp = b.finish(s);
        assert!(matches!(expand(&slp, s), Err(ExpandError::Cyclic { .. })));

        let mut b = SlpBuilder::new();
        let s = b.nonterminal("S");
        let ghost = b.nonterminal("G");
        b.rule(s, [Symbol::nt(ghost)]);
        let slp = b.finish(s);
        assert!(matches!(
            expand(&slp, s),
            Err(ExpandError::Undefined { .. })
        ));
    }

    #[test]
    fn size_counts_body_lengths() {
        assert_eq!(size(&abcabc()), GrammarSize(5));
        assert_eq!(size(&single_rule(&[Symbol::t(b'a')])), GrammarSize(1));
    }

    #[test]
    fn finish_moves_start_rule_first() {
        let slp = abcabc();
        assert_eq!(slp.name(slp.rules()[0].head), "S");
    }

    #[test]
    fn equality_is_structural_over_names() {
        let a = abcabc();
        let b = abcabc();
        assert_eq!(a, b);
        let c = single_rule(&[Symbol::t(b'a')]);
        assert_ne!(a, c);
    }

    #[test]
    fn alphabet_collects_terminals() {
        let slp = abcabc();
        assert_eq!(
            slp.alphabet().into_iter().collect::<Vec<_>>(),
            vec![b'a', b'b', b'c']
        );
    }
}
