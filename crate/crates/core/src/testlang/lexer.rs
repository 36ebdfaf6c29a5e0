//! Tokenizer for the test subset language.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenKind {
    Ident,
    Number,
    Str,
    Char,
    Punct,
    LineComment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Byte offset of the first character.
    pub start: usize,
    /// Byte offset one past the last character.
    pub end: usize,
    /// 1-based line number.
    pub line: usize,
}

impl Token {
    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punct && self.text == p
    }

    pub fn is_ident(&self, s: &str) -> bool {
        self.kind == TokenKind::Ident && self.text == s
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexError {
    #[error("unterminated string literal at line {line}")]
    UnterminatedString { line: usize },
}

/// Replaces `/* ... */` comments outside literals with spaces, keeping
/// newlines so byte offsets and line numbers stay valid. Returns the
/// rewritten text and the number of block comments removed.
pub fn strip_block_comments(src: &str) -> (String, usize) {
    #[derive(PartialEq)]
    enum State {
        Code,
        Str,
        Chr,
        Line,
        Block,
    }
    let mut out = String::with_capacity(src.len());
    let mut state = State::Code;
    let mut removed = 0;
    let mut chars = src.chars().peekable();
    while let Some(c) = chars.next() {
        match state {
            State::Code => match c {
                '"' => {
                    state = State::Str;
                    out.push(c);
                }
                '\'' => {
                    state = State::Chr;
                    out.push(c);
                }
                '/' if chars.peek() == Some(&'/') => {
                    state = State::Line;
                    out.push(c);
                }
                '/' if chars.peek() == Some(&'*') => {
                    chars.next();
                    state = State::Block;
                    removed += 1;
                    out.push_str("  ");
                }
                _ => out.push(c),
            },
            State::Str | State::Chr => {
                out.push(c);
                let close = if state == State::Str { '"' } else { '\'' };
                if c == '\\' {
                    if let Some(n) = chars.next() {
                        out.push(n);
                        if n == '\n' {
                            state = State::Code;
                        }
                    }
                } else if c == close || c == '\n' {
                    state = State::Code;
                }
            }
            State::Line => {
                out.push(c);
                if c == '\n' {
                    state = State::Code;
                }
            }
            State::Block => {
                if c == '*' && chars.peek() == Some(&'/') {
                    chars.next();
                    out.push_str("  ");
                    state = State::Code;
                } else if c == '\n' {
                    out.push('\n');
                } else {
                    // keep byte length stable for multi-byte chars
                    for _ in 0..c.len_utf8() {
                        out.push(' ');
                    }
                }
            }
        }
    }
    (out, removed)
}

const COMPOUND: &[&str] = &[
    "++", "--", "==", "!=", "<=", ">=", "&&", "||", "->", "::", "+=", "-=", "*=", "/=",
];

/// Tokenizes `src`. Block comments must already be removed; any `/*` left
/// over lexes as punctuation. Unknown characters become single-character
/// punctuation tokens so callers can fall back to opaque handling.
pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut i = 0usize;
    while i < src.len() {
        let c = src[i..].chars().next().unwrap();
        let clen = c.len_utf8();
        if c == '\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += clen;
            continue;
        }
        let start = i;
        if c == '/' && bytes.get(i + 1) == Some(&b'/') {
            let end = src[i..].find('\n').map(|p| i + p).unwrap_or(src.len());
            let end = if end > i && bytes[end - 1] == b'\r' { end - 1 } else { end };
            tokens.push(Token {
                kind: TokenKind::LineComment,
                text: src[i..end].to_string(),
                start,
                end,
                line,
            });
            i = end;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < src.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                j += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Ident,
                text: src[i..j].to_string(),
                start,
                end: j,
                line,
            });
            i = j;
            continue;
        }
        if c.is_ascii_digit()
            || (c == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit()))
        {
            let j = scan_number(bytes, i);
            tokens.push(Token {
                kind: TokenKind::Number,
                text: src[i..j].to_string(),
                start,
                end: j,
                line,
            });
            i = j;
            continue;
        }
        if c == '"' || c == '\'' {
            let quote = bytes[i];
            let mut j = i + 1;
            loop {
                match bytes.get(j) {
                    None | Some(b'\n') => return Err(LexError::UnterminatedString { line }),
                    Some(b'\\') => j += 2,
                    Some(&b) if b == quote => {
                        j += 1;
                        break;
                    }
                    Some(_) => j += 1,
                }
            }
            if j > src.len() {
                return Err(LexError::UnterminatedString { line });
            }
            tokens.push(Token {
                kind: if quote == b'"' { TokenKind::Str } else { TokenKind::Char },
                text: src[i..j].to_string(),
                start,
                end: j,
                line,
            });
            i = j;
            continue;
        }
        let rest = &src[i..];
        let text = COMPOUND
            .iter()
            .find(|op| rest.starts_with(**op))
            .map(|op| op.to_string())
            .unwrap_or_else(|| c.to_string());
        let end = i + text.len();
        tokens.push(Token {
            kind: TokenKind::Punct,
            text,
            start,
            end,
            line,
        });
        i = end;
    }
    Ok(tokens)
}

fn scan_number(bytes: &[u8], start: usize) -> usize {
    let mut j = start;
    let hex = bytes.get(j) == Some(&b'0') && matches!(bytes.get(j + 1), Some(b'x' | b'X'));
    if hex {
        j += 2;
        while j < bytes.len() && (bytes[j].is_ascii_hexdigit() || bytes[j] == b'_') {
            j += 1;
        }
    } else {
        while j < bytes.len() {
            let b = bytes[j];
            let fraction_dot = b == b'.' && bytes.get(j + 1).is_none_or(|n| n.is_ascii_digit() || !n.is_ascii_alphabetic());
            if b.is_ascii_digit() || b == b'_' || fraction_dot {
                j += 1;
            } else if matches!(b, b'e' | b'E') {
                j += 1;
                if matches!(bytes.get(j), Some(b'+' | b'-')) {
                    j += 1;
                }
            } else {
                break;
            }
        }
    }
    if matches!(bytes.get(j), Some(b'L' | b'l' | b'F' | b'f' | b'D' | b'd')) {
        j += 1;
    }
    j
}

/// Lexemes of `src`, comments excluded. Falls back to whitespace splitting
/// when the text does not lex.
pub fn lexemes(src: &str) -> Vec<String> {
    match tokenize(src) {
        Ok(toks) => toks
            .into_iter()
            .filter(|t| t.kind != TokenKind::LineComment)
            .map(|t| t.text)
            .collect(),
        Err(_) => src.split_whitespace().map(str::to_string).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(src: &str) -> Vec<String> {
        tokenize(src).unwrap().into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn splits_declaration() {
        assert_eq!(
            texts("Foo foo0 = new Foo(1, \"a;b\", 'c', 2.5F, 10L);"),
            vec![
                "Foo", "foo0", "=", "new", "Foo", "(", "1", ",", "\"a;b\"", ",", "'c'", ",", "2.5F",
                ",", "10L", ")", ";"
            ]
        );
    }

    #[test]
    fn line_comment_is_one_token() {
        let toks = tokenize("a(); // Given x\nb();").unwrap();
        assert_eq!(toks[4].kind, TokenKind::LineComment);
        assert_eq!(toks[4].text, "// Given x");
        assert_eq!(toks[5].line, 2);
    }

    #[test]
    fn unterminated_string_errors() {
        assert_eq!(
            tokenize("String s = \"abc;"),
            Err(LexError::UnterminatedString { line: 1 })
        );
    }

    #[test]
    fn escaped_quote_stays_inside_string() {
        assert_eq!(texts(r#"f("a\"b");"#), vec!["f", "(", "\"a\\\"b\"", ")", ";"]);
    }

    #[test]
    fn block_comments_are_blanked() {
        let (out, n) = strip_block_comments("a /* x\ny */ b \"/* keep */\"");
        assert_eq!(n, 1);
        assert_eq!(out.lines().count(), 2);
        assert!(out.contains("\"/* keep */\""));
        assert_eq!(out.len(), "a /* x\ny */ b \"/* keep */\"".len());
    }

    #[test]
    fn numbers_keep_suffixes_and_exponents() {
        assert_eq!(texts("1e-5 0x1F 3.0d 7"), vec!["1e-5", "0x1F", "3.0d", "7"]);
    }
}
