//! Words over byte alphabets, explicit or run-length encoded.

use std::fmt;

use thiserror::Error;

use crate::budget::{ByteBudget, CapacityError};

/// Run-length encoded word: maximal runs of equal bytes.
///
/// The invariant is canonical form: every run has length >= 1 and adjacent
/// runs carry distinct bytes. All constructors normalize.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RleWord {
    runs: Vec<(u8, u64)>,
}

impl RleWord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        let mut w = Self::new();
        for &b in bytes {
            w.push_run(b, 1);
        }
        w
    }

    pub fn from_runs<I: IntoIterator<Item = (u8, u64)>>(runs: I) -> Self {
        let mut w = Self::new();
        for (b, n) in runs {
            w.push_run(b, n);
        }
        w
    }

    /// Appends `count` copies of `byte`, merging with the last run if equal.
    pub fn push_run(&mut self, byte: u8, count: u64) {
        if count == 0 {
            return;
        }
        match self.runs.last_mut() {
            Some((b, n)) if *b == byte => *n += count,
            _ => self.runs.push((byte, count)),
        }
    }

    pub fn runs(&self) -> &[(u8, u64)] {
        &self.runs
    }

    /// Total word length in symbols.
    pub fn len(&self) -> u128 {
        self.runs.iter().map(|&(_, n)| n as u128).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Materializes the word, guarded by `budget`.
    pub fn to_bytes(&self, budget: ByteBudget) -> Result<Vec<u8>, CapacityError> {
        let len = self.len();
        budget.check(len)?;
        let mut out = Vec::with_capacity(len as usize);
        for &(b, n) in &self.runs {
            out.resize(out.len() + n as usize, b);
        }
        Ok(out)
    }

    /// Text form: whitespace-separated tokens, `c` for a single byte and
    /// `c*count` for a longer run, e.g. `a*20 b a*41`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, &(b, n)) in self.runs.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            push_rle_byte(&mut out, b);
            if n > 1 {
                out.push('*');
                out.push_str(&n.to_string());
            }
        }
        out.push('\n');
        out
    }

    /// Parses the text form produced by [`RleWord::to_text`]. `#` starts a
    /// comment running to the end of the line.
    pub fn parse_text(text: &str) -> Result<Self, RleParseError> {
        let mut w = Self::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(i) => &line[..i],
                None => line,
            };
            for token in line.split_whitespace() {
                let (byte, rest) =
                    parse_rle_byte(token).ok_or_else(|| RleParseError::bad(lineno + 1, token))?;
                let count = if rest.is_empty() {
                    1
                } else {
                    let digits = rest
                        .strip_prefix('*')
                        .ok_or_else(|| RleParseError::bad(lineno + 1, token))?;
                    digits
                        .parse::<u64>()
                        .ok()
                        .filter(|&n| n >= 1)
                        .ok_or_else(|| RleParseError::bad(lineno + 1, token))?
                };
                w.push_run(byte, count);
            }
        }
        Ok(w)
    }
}

impl fmt::Display for RleWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_text().trim_end())
    }
}

fn push_rle_byte(out: &mut String, b: u8) {
    // Printable ASCII except the token metacharacters goes through verbatim.
    if (0x21..=0x7e).contains(&b) && b != b'*' && b != b'#' && b != b'\\' {
        out.push(b as char);
    } else {
        out.push_str(&format!("\\x{b:02x}"));
    }
}

fn parse_rle_byte(token: &str) -> Option<(u8, &str)> {
    if let Some(rest) = token.strip_prefix("\\x") {
        let hex = rest.get(..2)?;
        let byte = u8::from_str_radix(hex, 16).ok()?;
        return Some((byte, &rest[2..]));
    }
    let c = token.chars().next()?;
    if !c.is_ascii() || c == '*' {
        return None;
    }
    Some((c as u8, &token[c.len_utf8()..]))
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: malformed run token `{token}`")]
pub struct RleParseError {
    pub line: usize,
    pub token: String,
}

impl RleParseError {
    fn bad(line: usize, token: &str) -> Self {
        Self {
            line,
            token: token.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_bytes_groups_maximal_runs() {
        let w = RleWord::from_bytes(b"aaabba");
        assert_eq!(w.runs(), &[(b'a', 3), (b'b', 2), (b'a', 1)]);
        assert_eq!(w.len(), 6);
    }

    #[test]
    fn push_run_merges_adjacent_equal_bytes() {
        let mut w = RleWord::new();
        w.push_run(b'a', 2);
        w.push_run(b'a', 3);
        w.push_run(b'b', 0);
        w.push_run(b'b', 1);
        assert_eq!(w.runs(), &[(b'a', 5), (b'b', 1)]);
    }

    #[test]
    fn text_round_trip() {
        let w = RleWord::from_runs([(b'a', 20), (b'b', 1), (b'a', 41)]);
        assert_eq!(w.to_text(), "a*20 b a*41\n");
        assert_eq!(RleWord::parse_text(&w.to_text()).unwrap(), w);
    }

    #[test]
    fn parse_accepts_comments_and_blank_lines() {
        let w = RleWord::parse_text("# header\n\na*2 b # trailing\n").unwrap();
        assert_eq!(w.runs(), &[(b'a', 2), (b'b', 1)]);
    }

    #[test]
    fn parse_rejects_malformed_tokens() {
        assert!(RleWord::parse_text("a*0").is_err());
        assert!(RleWord::parse_text("a*x").is_err());
        assert!(RleWord::parse_text("*3").is_err());
    }

    #[test]
    fn non_printable_bytes_use_hex_escapes() {
        let w = RleWord::from_runs([(0u8, 3), (b'*', 2)]);
        assert_eq!(w.to_text(), "\\x00*3 \\x2a*2\n");
        assert_eq!(RleWord::parse_text(&w.to_text()).unwrap(), w);
    }

    #[test]
    fn to_bytes_respects_budget() {
        let w = RleWord::from_runs([(b'a', 100)]);
        assert_eq!(w.to_bytes(ByteBudget(100)).unwrap().len(), 100);
        let err = w.to_bytes(ByteBudget(99)).unwrap_err();
        assert_eq!(err.required, 100);
    }
}
