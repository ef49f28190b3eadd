//! Adversarial benchmark family.
//!
//! The k-th family word is `s_k = a^{m_1} b a^{m_2} b ... b a^{m_k}` where the
//! block lengths m_1 < m_2 < ... < m_k share binary representations that grow
//! one bit at a time: m_i is the (k+i)-bit prefix of a fixed bit string `w`,
//! read as a binary number. `w` itself encodes a De Bruijn sequence through
//! the pair morphism 0 -> 01, 1 -> 10, which keeps long factors of `w` from
//! repeating. Every `s_k` has a grammar of size at most `8k - 4`
//! ([`build_small_slp`]), while its block structure punishes greedy
//! digram-style compressors.

use thiserror::Error;

use crate::budget::{ByteBudget, CapacityError};
use crate::slp::{Slp, SlpBuilder, Symbol};
use crate::word::RleWord;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("de Bruijn order {n} is outside the supported range 1..=20")]
    OrderOutOfRange { n: u32 },
    #[error("family index {k} is outside the supported range 2..=16")]
    IndexOutOfRange { k: u32 },
}

/// Lexicographically greatest binary De Bruijn sequence of order `n`, as 0/1
/// values. Every length-`n` window of the cyclic sequence is distinct, and the
/// sequence starts with `n` ones.
pub fn de_bruijn(n: u32) -> Result<Vec<u8>, WitnessError> {
    if !(1..=20).contains(&n) {
        return Err(WitnessError::OrderOutOfRange { n });
    }
    // Lyndon-word concatenation builds the lexicographically least sequence;
    // complementing bits turns least into greatest.
    let mut least = fkm(n as usize);
    for bit in &mut least {
        *bit = 1 - *bit;
    }
    Ok(least)
}

/// Lexicographically least binary De Bruijn sequence of order `n`: the
/// concatenation, in lexicographic order, of the Lyndon words whose lengths
/// divide `n`.
fn fkm(n: usize) -> Vec<u8> {
    fn db(t: usize, p: usize, n: usize, a: &mut [u8], seq: &mut Vec<u8>) {
        if t > n {
            if n.is_multiple_of(p) {
                seq.extend_from_slice(&a[1..=p]);
            }
            return;
        }
        a[t] = a[t - p];
        db(t + 1, p, n, a, seq);
        for bit in (a[t - p] + 1)..=1 {
            a[t] = bit;
            db(t + 1, t, n, a, seq);
        }
    }
    let mut a = vec![0u8; n + 1];
    let mut seq = Vec::with_capacity(1 << n);
    db(1, 1, n, &mut a, &mut seq);
    seq
}

/// Applies the pair morphism 0 -> 01, 1 -> 10 to a bit string.
pub fn apply_h(bits: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(bits.len() * 2);
    for &bit in bits {
        match bit {
            0 => out.extend_from_slice(&[0, 1]),
            _ => out.extend_from_slice(&[1, 0]),
        }
    }
    out
}

/// One member of the benchmark family, with the data that defines it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessFamily {
    k: u32,
    order: u32,
    de_bruijn: Vec<u8>,
    w: Vec<u8>,
    block_lengths: Vec<u64>,
}

/// Builds the k-th family member, for 2 <= k <= 16.
pub fn build_family(k: u32) -> Result<WitnessFamily, WitnessError> {
    if !(2..=16).contains(&k) {
        return Err(WitnessError::IndexOutOfRange { k });
    }
    let order = (k - 1).ilog2() + 1;
    let seq = de_bruijn(order)?;
    let w = apply_h(&seq[..k as usize]);
    let k = k as usize;
    let mut block_lengths = Vec::with_capacity(k);
    let mut m: u64 = 0;
    for &bit in &w[..k + 1] {
        m = m * 2 + u64::from(bit);
    }
    block_lengths.push(m);
    for i in 2..=k {
        m = m * 2 + u64::from(w[k + i - 1]);
        block_lengths.push(m);
    }
    Ok(WitnessFamily {
        k: k as u32,
        order,
        de_bruijn: seq,
        w,
        block_lengths,
    })
}

impl WitnessFamily {
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Order of the underlying De Bruijn sequence.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn de_bruijn(&self) -> &[u8] {
        &self.de_bruijn
    }

    /// The bit string whose prefixes spell the block lengths.
    pub fn w(&self) -> &[u8] {
        &self.w
    }

    pub fn block_lengths(&self) -> &[u64] {
        &self.block_lengths
    }

    /// Word length: the sum of the block lengths plus the k - 1 separators.
    pub fn total_len(&self) -> u128 {
        let blocks: u128 = self.block_lengths.iter().map(|&m| u128::from(m)).sum();
        blocks + u128::from(self.k) - 1
    }

    /// The word as runs: `a^{m_1} b a^{m_2} b ... b a^{m_k}`.
    pub fn s_rle(&self) -> RleWord {
        let mut word = RleWord::new();
        for (i, &m) in self.block_lengths.iter().enumerate() {
            if i > 0 {
                word.push_run(b'b', 1);
            }
            word.push_run(b'a', m);
        }
        word
    }

    /// The word as plain bytes, refused when it exceeds `budget`.
    pub fn s_bytes(&self, budget: ByteBudget) -> Result<Vec<u8>, CapacityError> {
        self.s_rle().to_bytes(budget)
    }
}

/// Explicit grammar of size at most `8k - 4` deriving the k-th family word.
///
/// A chain P1..Pk builds `a^{m_1}` by the binary method (doubling, appending
/// one `a` per 1-bit). Each later block doubles the previous one and appends
/// one bit, so a chain B2..Bk of one rule per block finishes the job, and the
/// start rule lists the blocks separated by `b`.
pub fn build_small_slp(k: u32) -> Result<Slp, WitnessError> {
    let family = build_family(k)?;
    let w = family.w();
    let k = k as usize;
    let a = Symbol::t(b'a');
    let b_term = Symbol::t(b'b');
    let mut builder = SlpBuilder::new();
    let s = builder.nonterminal("S");

    let mut p_prev = builder.nonterminal("P1");
    let mut body = vec![a, a];
    if w[1] == 1 {
        body.push(a);
    }
    builder.rule(p_prev, body);
    for (j, &bit) in w.iter().enumerate().take(k + 1).skip(2) {
        let p = builder.nonterminal(format!("P{j}"));
        let mut body = vec![Symbol::nt(p_prev), Symbol::nt(p_prev)];
        if bit == 1 {
            body.push(a);
        }
        builder.rule(p, body);
        p_prev = p;
    }

    let mut blocks = vec![p_prev];
    let mut prev = p_prev;
    for i in 2..=k {
        let b_nt = builder.nonterminal(format!("B{i}"));
        let mut body = vec![Symbol::nt(prev), Symbol::nt(prev)];
        if w[k + i - 1] == 1 {
            body.push(a);
        }
        builder.rule(b_nt, body);
        blocks.push(b_nt);
        prev = b_nt;
    }

    let mut start_body = Vec::with_capacity(2 * k - 1);
    for (i, &block) in blocks.iter().enumerate() {
        if i > 0 {
            start_body.push(b_term);
        }
        start_body.push(Symbol::nt(block));
    }
    builder.rule(s, start_body);
    Ok(builder.finish(s))
}
