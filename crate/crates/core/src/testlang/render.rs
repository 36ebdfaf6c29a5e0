use super::ast::*;
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RenderStyle {
    #[default]
    WithComments,
    Stripped,
}

const INDENT: &str = "    ";

/// Deterministic source text for `test`, terminated by a newline.
pub fn render(test: &TestCase, style: RenderStyle) -> String {
    let keep = style == RenderStyle::WithComments;
    let mut out = String::new();
    if keep {
        for c in &test.leading_comments {
            push_comment(&mut out, "", c);
        }
    }
    for a in &test.annotations {
        out.push_str(a);
        out.push('\n');
    }
    write!(out, "public void {}()", test.name).unwrap();
    if !test.throws.is_empty() {
        write!(out, " throws {}", test.throws.join(", ")).unwrap();
    }
    out.push_str(" {\n");
    for s in &test.statements {
        if keep {
            for c in &s.attached_comments {
                push_comment(&mut out, INDENT, c);
            }
        }
        match &s.kind {
            StatementKind::Comment(c) => {
                if keep {
                    push_comment(&mut out, INDENT, c);
                }
            }
            StatementKind::Opaque(raw) => {
                let mut depth = 0usize;
                for line in raw.lines() {
                    let (opens, closes, leading_close) = brace_counts(line);
                    let level = if leading_close { depth.saturating_sub(1) } else { depth };
                    for _ in 0..=level {
                        out.push_str(INDENT);
                    }
                    out.push_str(line);
                    out.push('\n');
                    depth = (depth + opens).saturating_sub(closes);
                }
            }
            kind => {
                out.push_str(INDENT);
                out.push_str(&render_statement_kind(kind));
                out.push('\n');
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Braces opened and closed on a line outside literals and comments, and
/// whether the line starts with a closer.
fn brace_counts(line: &str) -> (usize, usize, bool) {
    let (mut opens, mut closes) = (0, 0);
    let mut quote: Option<char> = None;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match (quote, c) {
            (Some(_), '\\') => {
                chars.next();
            }
            (Some(q), c) if c == q => quote = None,
            (Some(_), _) => {}
            (None, '"' | '\'') => quote = Some(c),
            (None, '/') if chars.peek() == Some(&'/') => break,
            (None, '{') => opens += 1,
            (None, '}') => closes += 1,
            _ => {}
        }
    }
    (opens, closes, line.trim_start().starts_with('}'))
}

/// Renders a whole file: tests separated by a blank line.
pub fn render_file(tests: &[TestCase], style: RenderStyle) -> String {
    tests
        .iter()
        .map(|t| render(t, style))
        .collect::<Vec<_>>()
        .join("\n")
}

fn push_comment(out: &mut String, indent: &str, text: &str) {
    out.push_str(indent);
    if text.is_empty() {
        out.push_str("//\n");
    } else {
        out.push_str("// ");
        out.push_str(text);
        out.push('\n');
    }
}

/// One statement on a single line, no indentation or comments.
pub fn render_statement_kind(kind: &StatementKind) -> String {
    match kind {
        StatementKind::VarDecl {
            type_name,
            var_name,
            initializer,
        } => format!("{type_name} {var_name} = {};", render_expr(initializer)),
        StatementKind::CallStmt { receiver, method, args } => {
            format!("{receiver}.{method}({});", render_args(args))
        }
        StatementKind::AssertStmt { kind, message, args } => {
            let mut parts: Vec<String> = message.iter().cloned().collect();
            parts.extend(args.iter().map(render_expr));
            format!("{kind}({});", parts.join(", "))
        }
        StatementKind::Comment(c) => format!("// {c}"),
        StatementKind::Opaque(raw) => raw.clone(),
    }
}

pub fn render_expr(e: &Expr) -> String {
    match e {
        Expr::ConstructorCall { type_name, args } => format!("new {type_name}({})", render_args(args)),
        Expr::MethodCall { receiver, method, args } => {
            format!("{receiver}.{method}({})", render_args(args))
        }
        Expr::Literal { lexeme, .. } => lexeme.clone(),
        Expr::VarRef(v) => v.clone(),
        Expr::Cast { to, inner } => format!("({to}){}", render_expr(inner)),
    }
}

fn render_args(args: &[Expr]) -> String {
    args.iter().map(render_expr).collect::<Vec<_>>().join(", ")
}
