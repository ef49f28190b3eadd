//! Line-oriented text format for grammars.
//!
//! One production per line, `HEAD -> item item ...`, where an item is a
//! nonterminal identifier (letters and digits, starting with a letter) or a
//! single-byte terminal literal in single quotes. `#` starts a comment outside
//! quotes; blank lines are ignored. The first production is the start rule.
//! Escapes inside terminal literals: `\'`, `\\`, `\n`, `\t`, `\r`, `\xHH`.

use std::fmt;

use thiserror::Error;

use crate::slp::{validate, Slp, SlpBuilder, Symbol, ValidationReport};

/// Renders one terminal byte as a quoted literal.
pub fn quote_terminal(b: u8) -> String {
    match b {
        b'\'' => "'\\''".to_string(),
        b'\\' => "'\\\\'".to_string(),
        b'\n' => "'\\n'".to_string(),
        b'\t' => "'\\t'".to_string(),
        b'\r' => "'\\r'".to_string(),
        0x20..=0x7e => format!("'{}'", b as char),
        _ => format!("'\\x{b:02x}'"),
    }
}

/// Serializes a grammar in its stored rule order, one production per line,
/// ending with a newline.
pub fn serialize(slp: &Slp) -> String {
    let mut out = String::new();
    for rule in slp.rules() {
        out.push_str(slp.name(rule.head));
        out.push_str(" ->");
        for &sym in &rule.body {
            out.push(' ');
            out.push_str(&slp.render_symbol(sym));
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("parsed grammar is not a valid straight-line program: {report}")]
    Invalid { report: ValidationReport },
}

fn syntax(line: usize, col: usize, msg: impl fmt::Display) -> ParseError {
    ParseError::Syntax {
        line,
        col,
        msg: msg.to_string(),
    }
}

enum Token {
    Ident(String),
    Arrow,
    Terminal(u8),
}

fn tokenize_line(line: &str, line_no: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let col = i + 1;
        if c == '-' {
            if chars.get(i + 1) == Some(&'>') {
                tokens.push(Token::Arrow);
                i += 2;
                continue;
            }
            return Err(syntax(line_no, col, "expected '->'"));
        }
        if c == '\'' {
            i += 1;
            let (byte, consumed) = match chars.get(i) {
                None => return Err(syntax(line_no, col, "unterminated terminal literal")),
                Some('\'') => return Err(syntax(line_no, col, "empty terminal literal")),
                Some('\\') => match chars.get(i + 1) {
                    Some('\'') => (b'\'', 2),
                    Some('\\') => (b'\\', 2),
                    Some('n') => (b'\n', 2),
                    Some('t') => (b'\t', 2),
                    Some('r') => (b'\r', 2),
                    Some('x') => {
                        let hi = chars.get(i + 2).and_then(|c| c.to_digit(16));
                        let lo = chars.get(i + 3).and_then(|c| c.to_digit(16));
                        match (hi, lo) {
                            (Some(hi), Some(lo)) => ((hi * 16 + lo) as u8, 4),
                            _ => {
                                return Err(syntax(
                                    line_no,
                                    col,
                                    "expected two hex digits after \\x",
                                ))
                            }
                        }
                    }
                    _ => return Err(syntax(line_no, col, "invalid escape in terminal literal")),
                },
                Some(&ch) => {
                    if !ch.is_ascii() {
                        return Err(syntax(
                            line_no,
                            col,
                            "terminal literals hold single bytes; use \\xHH",
                        ));
                    }
                    (ch as u8, 1)
                }
            };
            i += consumed;
            if chars.get(i) != Some(&'\'') {
                return Err(syntax(
                    line_no,
                    col,
                    "terminal literal must contain exactly one byte",
                ));
            }
            i += 1;
            tokens.push(Token::Terminal(byte));
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            tokens.push(Token::Ident(chars[start..i].iter().collect()));
            continue;
        }
        return Err(syntax(line_no, col, format!("unexpected character {c:?}")));
    }
    Ok(tokens)
}

/// Parses the text format back into a grammar.
///
/// The head of the first production becomes the start nonterminal. The result
/// is checked with [`validate`]; any violation is reported as
/// [`ParseError::Invalid`].
pub fn parse(input: &str) -> Result<Slp, ParseError> {
    let mut builder = SlpBuilder::new();
    let mut start = None;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = tokenize_line(line, line_no)?;
        if tokens.is_empty() {
            continue;
        }
        let mut it = tokens.into_iter();
        let head = match it.next() {
            Some(Token::Ident(name)) => builder.nonterminal(name),
            _ => {
                return Err(syntax(
                    line_no,
                    1,
                    "expected nonterminal name at start of rule",
                ))
            }
        };
        match it.next() {
            Some(Token::Arrow) => {}
            _ => return Err(syntax(line_no, 1, "expected '->' after nonterminal name")),
        }
        let mut body = Vec::new();
        for token in it {
            body.push(match token {
                Token::Ident(name) => Symbol::nt(builder.nonterminal(name)),
                Token::Terminal(b) => Symbol::t(b),
                Token::Arrow => return Err(syntax(line_no, 1, "unexpected '->' in rule body")),
            });
        }
        if start.is_none() {
            start = Some(head);
        }
        builder.rule(head, body);
    }
    let start = start.ok_or_else(|| syntax(1, 1, "no productions found"))?;
    let slp = builder.finish(start);
    let report = validate(&slp);
    if !report.is_ok() {
        return Err(ParseError::Invalid { report });
    }
    Ok(slp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slp::{expand, size, GrammarSize};

    fn abcabc() -> Slp {
        let mut b = SlpBuilder::new();
        let s = b.nonterminal("S");
        let a = b.nonterminal("A");
        b.rule(s, [Symbol::nt(a), Symbol::nt(a)]);
        b.rule(a, [Symbol::t(b'a'), Symbol::t(b'b'), Symbol::t(b'c')]);
        b.finish(s)
    }

    #[test]
    fn serialize_produces_expected_lines() {
        assert_eq!(serialize(&abcabc()), "S -> A A\nA -> 'a' 'b' 'c'\n");
    }

    #[test]
    fn quote_terminal_escapes_specials() {
        assert_eq!(quote_terminal(b'a'), "'a'");
        assert_eq!(quote_terminal(b' '), "' '");
        assert_eq!(quote_terminal(b'\''), "'\\''");
        assert_eq!(quote_terminal(b'\\'), "'\\\\'");
        assert_eq!(quote_terminal(b'\n'), "'\\n'");
        assert_eq!(quote_terminal(0x00), "'\\x00'");
        assert_eq!(quote_terminal(0xff), "'\\xff'");
    }

    #[test]
    fn parse_round_trips_serialize() {
        let slp = abcabc();
        let parsed = parse(&serialize(&slp)).unwrap();
        assert_eq!(parsed, slp);
        assert_eq!(size(&parsed), GrammarSize(5));
        assert_eq!(expand(&parsed, parsed.start()).unwrap(), b"abcabc");
    }

    #[test]
    fn parse_skips_comments_and_blank_lines() {
        let text = "# a grammar\n\nS -> A A # twice\nA -> 'a' 'b' 'c'\n";
        let parsed = parse(text).unwrap();
        assert_eq!(parsed, abcabc());
    }

    #[test]
    fn parse_keeps_hash_terminals() {
        let parsed = parse("S -> '#' 'a' # trailing comment\n").unwrap();
        assert_eq!(expand(&parsed, parsed.start()).unwrap(), b"#a");
    }

    #[test]
    fn parse_handles_escaped_terminals() {
        let parsed = parse("S -> '\\'' '\\\\' '\\n' '\\x00' '\\xAb'\n").unwrap();
        assert_eq!(expand(&parsed, parsed.start()).unwrap(), b"'\\\n\x00\xab");
        let again = parse(&serialize(&parsed)).unwrap();
        assert_eq!(again, parsed);
    }

    #[test]
    fn parse_first_rule_is_start_regardless_of_name() {
        let parsed = parse("Root -> Leaf Leaf\nLeaf -> 'x'\n").unwrap();
        assert_eq!(parsed.name(parsed.start()), "Root");
        assert_eq!(expand(&parsed, parsed.start()).unwrap(), b"xx");
    }

    #[test]
    fn parse_reports_syntax_positions() {
        match parse("S -> ?\n") {
            Err(ParseError::Syntax { line, col, .. }) => {
                assert_eq!((line, col), (1, 6));
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(matches!(
            parse("S -> 'ab'\n"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse("S -> '\\q'\n"),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(parse(""), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn parse_rejects_invalid_grammars() {
        // Reference cycle.
        assert!(matches!(
            parse("S -> A\nA -> S\n"),
            Err(ParseError::Invalid { .. })
        ));
        // Undefined nonterminal.
        assert!(matches!(parse("S -> A\n"), Err(ParseError::Invalid { .. })));
        // Duplicate production.
        assert!(matches!(
            parse("S -> 'a'\nS -> 'b'\n"),
            Err(ParseError::Invalid { .. })
        ));
        // Empty body.
        assert!(matches!(parse("S ->\n"), Err(ParseError::Invalid { .. })));
    }
}
