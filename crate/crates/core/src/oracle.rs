//! Exact smallest-grammar search for short words.
//!
//! In a smallest grammar, every non-start nonterminal can be assumed to
//! expand to a distinct factor of the word, be referenced at least twice (so
//! its expansion has two disjoint occurrences), and have a body that is a
//! shortest parse of its expansion using terminals and strictly shorter
//! chosen factors. The search therefore enumerates subsets of the candidate
//! factors (those of length at least two with two disjoint occurrences),
//! scoring each subset by shortest-parse dynamic programming, with a simple
//! bound pruning subsets that cannot beat the best total found so far.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::repair::count_nonoverlapping_bytes;
use crate::slp::{size, Slp, SlpBuilder, Symbol};

/// Longest word the exact search accepts.
pub const MAX_ORACLE_LEN: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("exact search needs a nonempty word")]
    Empty,
    #[error("exact search supports words up to {max} symbols, got {len}")]
    TooLong { len: usize, max: usize },
}

/// Result of the exact search: the minimum grammar size and one grammar
/// attaining it.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub word: Vec<u8>,
    pub size: u64,
    pub witness: Slp,
}

/// Minimum size over parses of `target` from single terminals and the given
/// factor expansions.
fn parse_cost(target: &[u8], parts: &[&[u8]]) -> u64 {
    let n = target.len();
    const INF: u64 = u64::MAX;
    let mut dist = vec![INF; n + 1];
    dist[0] = 0;
    for pos in 0..n {
        if dist[pos] == INF {
            continue;
        }
        let step = dist[pos] + 1;
        if step < dist[pos + 1] {
            dist[pos + 1] = step;
        }
        for part in parts {
            let end = pos + part.len();
            if end <= n && &target[pos..end] == *part && step < dist[end] {
                dist[end] = step;
            }
        }
    }
    dist[n]
}

/// Shortest parse of `target` from single terminals and the given
/// (expansion, symbol) parts, as a body.
fn shortest_parse(target: &[u8], parts: &[(&[u8], Symbol)]) -> Vec<Symbol> {
    let n = target.len();
    const INF: u64 = u64::MAX;
    let mut dist = vec![INF; n + 1];
    let mut parent: Vec<Option<(usize, Symbol)>> = vec![None; n + 1];
    dist[0] = 0;
    for pos in 0..n {
        if dist[pos] == INF {
            continue;
        }
        let step = dist[pos] + 1;
        if step < dist[pos + 1] {
            dist[pos + 1] = step;
            parent[pos + 1] = Some((pos, Symbol::t(target[pos])));
        }
        for &(exp, sym) in parts {
            let end = pos + exp.len();
            if end <= n && &target[pos..end] == exp && step < dist[end] {
                dist[end] = step;
                parent[end] = Some((pos, sym));
            }
        }
    }
    let mut body = Vec::new();
    let mut pos = n;
    while pos > 0 {
        let (prev, sym) = parent[pos].expect("terminal steps reach every position");
        body.push(sym);
        pos = prev;
    }
    body.reverse();
    body
}

struct Search<'a> {
    word: &'a [u8],
    /// Candidate factors, sorted by (length, lexicographic).
    candidates: Vec<Vec<u8>>,
    best_total: u64,
    best_set: Vec<usize>,
}

impl Search<'_> {
    fn dfs(&mut self, from: usize, chosen: &mut Vec<usize>, rule_costs: u64) {
        let parts: Vec<&[u8]> = chosen
            .iter()
            .map(|&i| self.candidates[i].as_slice())
            .collect();
        let total = rule_costs + parse_cost(self.word, &parts);
        if total < self.best_total {
            self.best_total = total;
            self.best_set = chosen.clone();
        }
        // Each further rule adds a body of at least 2, and the start body
        // keeps at least 2 symbols, so deeper subsets cannot beat the best
        // total unless this holds.
        if rule_costs + 4 >= self.best_total {
            return;
        }
        for j in from..self.candidates.len() {
            let cand_len = self.candidates[j].len();
            let shorter: Vec<&[u8]> = chosen
                .iter()
                .map(|&i| self.candidates[i].as_slice())
                .filter(|f| f.len() < cand_len)
                .collect();
            let body_cost = parse_cost(&self.candidates[j], &shorter);
            chosen.push(j);
            self.dfs(j + 1, chosen, rule_costs + body_cost);
            chosen.pop();
        }
    }
}

/// Finds the smallest grammar size for `word` and a grammar attaining it.
pub fn smallest_slp(word: &[u8]) -> Result<OracleResult, OracleError> {
    if word.is_empty() {
        return Err(OracleError::Empty);
    }
    if word.len() > MAX_ORACLE_LEN {
        return Err(OracleError::TooLong {
            len: word.len(),
            max: MAX_ORACLE_LEN,
        });
    }
    let n = word.len();
    // A factor referenced twice needs two disjoint occurrences.
    let mut set: BTreeSet<Vec<u8>> = BTreeSet::new();
    for len in 2..=n / 2 {
        for start in 0..=n - len {
            let factor = &word[start..start + len];
            if count_nonoverlapping_bytes(factor, word) >= 2 {
                set.insert(factor.to_vec());
            }
        }
    }
    let mut candidates: Vec<Vec<u8>> = set.into_iter().collect();
    candidates.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));

    let mut search = Search {
        word,
        candidates,
        best_total: u64::MAX,
        best_set: Vec::new(),
    };
    search.dfs(0, &mut Vec::new(), 0);

    // Rebuild the winning grammar with parse backpointers.
    let mut builder = SlpBuilder::new();
    let s = builder.nonterminal("S");
    let ids: Vec<_> = (1..=search.best_set.len())
        .map(|i| builder.nonterminal(format!("A{i}")))
        .collect();
    for (i, &ci) in search.best_set.iter().enumerate() {
        let cand_len = search.candidates[ci].len();
        let parts: Vec<(&[u8], Symbol)> = search
            .best_set
            .iter()
            .enumerate()
            .filter(|&(_, &cj)| search.candidates[cj].len() < cand_len)
            .map(|(j, &cj)| (search.candidates[cj].as_slice(), Symbol::nt(ids[j])))
            .collect();
        let body = shortest_parse(&search.candidates[ci], &parts);
        builder.rule(ids[i], body);
    }
    let parts: Vec<(&[u8], Symbol)> = search
        .best_set
        .iter()
        .enumerate()
        .map(|(j, &cj)| (search.candidates[cj].as_slice(), Symbol::nt(ids[j])))
        .collect();
    builder.rule(s, shortest_parse(word, &parts));
    let witness = builder.finish(s);
    assert_eq!(
        size(&witness).0,
        search.best_total,
        "witness size must match the search total"
    );

    Ok(OracleResult {
        word: word.to_vec(),
        size: search.best_total,
        witness,
    })
}
