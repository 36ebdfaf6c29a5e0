//! Text-level cleanup of raw LLM responses.

use super::{RepairAction, RepairError, RepairLog};
use crate::testlang::lexer;

/// Code inside the first non-empty fenced block, or, when the response has
/// no fence, the longest run of code-looking lines.
pub fn extract_code_block(response: &str) -> Result<String, RepairError> {
    extract_code_block_logged(response).map(|(code, _)| code)
}

/// [`extract_code_block`] plus an [`RepairAction::ExtractedFence`] entry when
/// a fence was used.
pub fn extract_code_block_logged(response: &str) -> Result<(String, RepairLog), RepairError> {
    let lines: Vec<&str> = response.lines().collect();
    let mut i = 0;
    while i < lines.len() {
        if let Some(rest) = lines[i].trim_start().strip_prefix("```") {
            // single-line fence: ```code```
            if let Some(inline) = rest.strip_suffix("```") {
                if inline.contains(';') {
                    let mut log = RepairLog::default();
                    log.push(RepairAction::ExtractedFence);
                    return Ok((inline.trim().to_string(), log));
                }
            }
            let start = i + 1;
            let mut end = start;
            while end < lines.len() && !lines[end].trim_start().starts_with("```") {
                end += 1;
            }
            let body = trim_blank_lines(&lines[start..end]);
            if !body.is_empty() {
                let mut log = RepairLog::default();
                log.push(RepairAction::ExtractedFence);
                return Ok((body.join("\n"), log));
            }
            i = end + 1;
            continue;
        }
        i += 1;
    }
    longest_code_run(&lines)
        .map(|run| (run, RepairLog::default()))
        .ok_or(RepairError::NoCodeFound)
}

fn trim_blank_lines<'a>(lines: &'a [&'a str]) -> &'a [&'a str] {
    let start = lines.iter().position(|l| !l.trim().is_empty()).unwrap_or(lines.len());
    let end = lines.iter().rposition(|l| !l.trim().is_empty()).map_or(start, |p| p + 1);
    &lines[start..end]
}

pub(crate) fn looks_like_code(line: &str) -> bool {
    let t = line.trim();
    if t.is_empty() {
        return false;
    }
    let shaped = t.starts_with("//")
        || t.starts_with('@')
        || t.starts_with('}')
        || t.ends_with(';')
        || t.ends_with('{')
        || t.ends_with('}');
    shaped && lexer::tokenize(t).is_ok()
}

fn longest_code_run(lines: &[&str]) -> Option<String> {
    let mut best: Option<(usize, usize, usize)> = None; // (code lines, start, end)
    let mut i = 0;
    while i < lines.len() {
        if !looks_like_code(lines[i]) {
            i += 1;
            continue;
        }
        let start = i;
        let mut end = i + 1;
        let mut code = 1;
        let mut j = i + 1;
        while j < lines.len() {
            if looks_like_code(lines[j]) {
                code += 1;
                end = j + 1;
                j += 1;
            } else if lines[j].trim().is_empty() {
                j += 1;
            } else {
                break;
            }
        }
        if best.is_none_or(|(n, _, _)| code > n) {
            best = Some((code, start, end));
        }
        i = j.max(end);
    }
    best.map(|(_, s, e)| lines[s..e].join("\n"))
}

/// Net `(`/`[` depth change of a line, ignoring literals and `//` tails.
/// Tolerates unterminated literals.
fn paren_delta(line: &str) -> i32 {
    let mut depth = 0;
    let mut quote: Option<char> = None;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match quote {
            Some(q) => {
                if c == '\\' {
                    chars.next();
                } else if c == q {
                    quote = None;
                }
            }
            None => match c {
                '"' | '\'' => quote = Some(c),
                '/' if chars.peek() == Some(&'/') => break,
                '(' | '[' => depth += 1,
                ')' | ']' => depth -= 1,
                _ => {}
            },
        }
    }
    depth
}

fn is_structural(t: &str) -> bool {
    t.starts_with('@')
        || t.starts_with('}')
        || t.starts_with('{')
        || t.ends_with('{')
        || t.ends_with('}')
        || t.ends_with('(')
        || t.ends_with(',')
        || t.ends_with('=')
        || t.ends_with('+')
        || (t.contains("void ") && t.contains('('))
}

/// Rewrites prose lines as `//` comments. A line is prose when it sits
/// outside any open bracket, has no `;`, and is not a structural line
/// such as a header, annotation, brace or continuation.
pub fn demote_prose_lines(code: &str) -> (String, RepairLog) {
    let mut log = RepairLog::default();
    let mut depth = 0i32;
    let mut out = Vec::new();
    for (n, line) in code.lines().enumerate() {
        let t = line.trim();
        let prose = depth <= 0
            && !t.is_empty()
            && !t.starts_with("//")
            && !t.contains(';')
            && !is_structural(t);
        if prose {
            let indent = &line[..line.len() - line.trim_start().len()];
            out.push(format!("{indent}// {t}"));
            log.push(RepairAction::DemotedProse { line: n + 1 });
        } else {
            if !t.starts_with("//") {
                depth = (depth + paren_delta(t)).max(0);
            }
            out.push(line.to_string());
        }
    }
    let mut text = out.join("\n");
    if code.ends_with('\n') {
        text.push('\n');
    }
    (text, log)
}

/// Adds missing `)` `]` `}` closers. Parens still open at a line-final `;`
/// are closed just before it; everything else still open is appended at the
/// end. Characters are never removed.
pub fn balance_brackets(code: &str) -> Result<(String, RepairLog), RepairError> {
    #[derive(PartialEq, Clone, Copy)]
    enum State {
        Code,
        Str(char),
        Line,
        Block,
    }
    let closer = |o: char| match o {
        '(' => ')',
        '[' => ']',
        _ => '}',
    };
    let chars: Vec<char> = code.chars().collect();
    let mut out = String::with_capacity(code.len() + 4);
    let mut stack: Vec<char> = Vec::new();
    let mut state = State::Code;
    let mut added = 0usize;
    let mut line = 1usize;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match state {
            State::Str(q) => {
                out.push(c);
                if c == '\\' && i + 1 < chars.len() && chars[i + 1] != '\n' {
                    out.push(chars[i + 1]);
                    i += 1;
                } else if c == q || c == '\n' {
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
                out.push(c);
                if c == '*' && chars.get(i + 1) == Some(&'/') {
                    out.push('/');
                    i += 1;
                    state = State::Code;
                }
            }
            State::Code => match c {
                '"' | '\'' => {
                    state = State::Str(c);
                    out.push(c);
                }
                '/' if chars.get(i + 1) == Some(&'/') => {
                    state = State::Line;
                    out.push(c);
                }
                '/' if chars.get(i + 1) == Some(&'*') => {
                    state = State::Block;
                    out.push_str("/*");
                    i += 1;
                }
                '(' | '[' | '{' => {
                    stack.push(c);
                    out.push(c);
                }
                ')' | ']' | '}' => {
                    let opener = match c {
                        ')' => '(',
                        ']' => '[',
                        _ => '{',
                    };
                    let Some(pos) = stack.iter().rposition(|&o| o == opener) else {
                        return Err(RepairError::UnbalancedBeyondRepair {
                            line,
                            detail: format!("`{c}` has no matching opener"),
                        });
                    };
                    while stack.len() > pos + 1 {
                        out.push(closer(stack.pop().unwrap()));
                        added += 1;
                    }
                    stack.pop();
                    out.push(c);
                }
                ';' if ends_line(&chars, i + 1) => {
                    while stack.last().is_some_and(|&o| o != '{') {
                        out.push(closer(stack.pop().unwrap()));
                        added += 1;
                    }
                    out.push(c);
                }
                _ => out.push(c),
            },
        }
        if c == '\n' {
            line += 1;
        }
        i += 1;
    }
    while let Some(o) = stack.pop() {
        let cl = closer(o);
        if cl == '}' && !out.ends_with('\n') {
            out.push('\n');
        }
        out.push(cl);
        added += 1;
    }
    let mut log = RepairLog::default();
    if added > 0 {
        log.push(RepairAction::BalancedBrackets { added });
    }
    Ok((out, log))
}

/// True when only whitespace or a `//` comment follows position `from` on
/// its line.
fn ends_line(chars: &[char], from: usize) -> bool {
    let mut i = from;
    while i < chars.len() && chars[i] != '\n' {
        if chars[i] == '/' && chars.get(i + 1) == Some(&'/') {
            return true;
        }
        if !chars[i].is_whitespace() {
            return false;
        }
        i += 1;
    }
    true
}
