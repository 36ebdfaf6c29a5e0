use super::ast::*;
use super::lexer::{self, LexError, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("no test method signature found (line {line})")]
    MalformedHeader { line: usize },
    #[error("test method `{name}` has no statements")]
    EmptyBody { name: String },
    #[error("unterminated string literal at line {line}")]
    UnterminatedString { line: usize },
    #[error("test method `{name}` is missing its closing brace")]
    UnclosedBody { name: String },
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        match e {
            LexError::UnterminatedString { line } => ParseError::UnterminatedString { line },
        }
    }
}

pub(crate) const RESERVED: &[&str] = &[
    "new", "true", "false", "null", "this", "super", "return", "class", "public", "private",
    "protected", "static", "final", "void", "throws", "throw", "try", "catch", "finally", "if",
    "else", "for", "while", "do", "switch", "case", "default", "break", "continue",
    "synchronized", "instanceof", "import", "package",
];

const MODIFIERS: &[&str] = &["public", "protected", "private", "static", "final"];

/// Parses a single test method. Further methods in the source are ignored.
pub fn parse_test_case(source: &str) -> Result<TestCase, ParseError> {
    let mut tests = parse_test_file(source)?;
    if tests.len() > 1 {
        log::warn!(
            "source holds {} test methods, keeping `{}`",
            tests.len(),
            tests[0].name
        );
    }
    Ok(tests.swap_remove(0))
}

/// Parses every test method in a file.
pub fn parse_test_file(source: &str) -> Result<Vec<TestCase>, ParseError> {
    let (src, removed) = lexer::strip_block_comments(source);
    if removed > 0 {
        log::warn!("discarded {removed} block comment(s)");
    }
    let tokens = lexer::tokenize(&src)?;
    let mut tests = Vec::new();
    let mut leading = Vec::new();
    let mut annotations = Vec::new();
    let mut first_line = None;
    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        match t.kind {
            TokenKind::LineComment => {
                first_line.get_or_insert(t.line);
                leading.push(comment_text(&t.text));
                i += 1;
            }
            TokenKind::Punct if t.text == "@" => {
                first_line.get_or_insert(t.line);
                let start = i;
                let mut depth = 0i32;
                i += 1;
                while i < tokens.len() {
                    let n = &tokens[i];
                    if n.kind == TokenKind::LineComment {
                        break;
                    }
                    if depth <= 0 && n.line != tokens[i - 1].line {
                        break;
                    }
                    depth += bracket_delta(n);
                    i += 1;
                }
                annotations.push(raw_lines(&src, &tokens[start..i]).join(" "));
            }
            TokenKind::Ident => {
                let header_line = t.line;
                let (name, throws, body_start) = parse_header(&tokens, i)?;
                let body_end = find_close(&tokens, body_start)
                    .ok_or_else(|| ParseError::UnclosedBody { name: name.clone() })?;
                let statements = parse_body_tokens(&src, &tokens[body_start..body_end]);
                if statements.iter().all(Statement::is_comment) {
                    return Err(ParseError::EmptyBody { name });
                }
                tests.push(TestCase {
                    name,
                    statements,
                    leading_comments: std::mem::take(&mut leading),
                    annotations: std::mem::take(&mut annotations),
                    throws,
                    source_span: (
                        first_line.take().unwrap_or(header_line),
                        tokens[body_end].line,
                    ),
                });
                i = body_end + 1;
            }
            _ => return Err(ParseError::MalformedHeader { line: t.line }),
        }
    }
    if tests.is_empty() {
        return Err(ParseError::MalformedHeader { line: 1 });
    }
    Ok(tests)
}

/// Parses loose statement text (no method header) into statements.
pub fn parse_statements(source: &str) -> Result<Vec<Statement>, ParseError> {
    let (src, _) = lexer::strip_block_comments(source);
    let tokens = lexer::tokenize(&src)?;
    Ok(parse_body_tokens(&src, &tokens))
}

/// True when `source` contains something that looks like a method header.
pub fn has_method_header(source: &str) -> bool {
    let (src, _) = lexer::strip_block_comments(source);
    let Ok(tokens) = lexer::tokenize(&src) else {
        return false;
    };
    tokens.iter().enumerate().any(|(i, t)| {
        t.is_ident("void")
            && tokens.get(i + 1).is_some_and(|n| n.kind == TokenKind::Ident)
            && tokens.get(i + 2).is_some_and(|n| n.is_punct("("))
    })
}

pub(crate) fn comment_text(raw: &str) -> String {
    raw.trim_start_matches('/').trim().to_string()
}

fn bracket_delta(t: &Token) -> i32 {
    if t.kind != TokenKind::Punct {
        return 0;
    }
    match t.text.as_str() {
        "(" | "[" | "{" => 1,
        ")" | "]" | "}" => -1,
        _ => 0,
    }
}

fn raw_lines(src: &str, toks: &[Token]) -> Vec<String> {
    let (Some(first), Some(last)) = (toks.first(), toks.last()) else {
        return Vec::new();
    };
    src[first.start..last.end]
        .lines()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect()
}

fn parse_header(tokens: &[Token], start: usize) -> Result<(String, Vec<String>, usize), ParseError> {
    let line = tokens[start].line;
    let err = || ParseError::MalformedHeader { line };
    let mut i = start;
    while tokens.get(i).is_some_and(|t| MODIFIERS.contains(&t.text.as_str()) && t.kind == TokenKind::Ident) {
        i += 1;
    }
    if !tokens.get(i).is_some_and(|t| t.is_ident("void")) {
        return Err(err());
    }
    i += 1;
    let name = match tokens.get(i) {
        Some(t) if t.kind == TokenKind::Ident && !RESERVED.contains(&t.text.as_str()) => t.text.clone(),
        _ => return Err(err()),
    };
    i += 1;
    if !(tokens.get(i).is_some_and(|t| t.is_punct("(")) && tokens.get(i + 1).is_some_and(|t| t.is_punct(")"))) {
        return Err(err());
    }
    i += 2;
    let mut throws = Vec::new();
    if tokens.get(i).is_some_and(|t| t.is_ident("throws")) {
        i += 1;
        loop {
            let (path, next) = parse_path(tokens, i).ok_or_else(err)?;
            throws.push(path.join("."));
            i = next;
            if tokens.get(i).is_some_and(|t| t.is_punct(",")) {
                i += 1;
            } else {
                break;
            }
        }
    }
    if !tokens.get(i).is_some_and(|t| t.is_punct("{")) {
        return Err(err());
    }
    Ok((name, throws, i + 1))
}

/// Index of the `}` matching an already-consumed `{`, starting the scan at `from`.
fn find_close(tokens: &[Token], from: usize) -> Option<usize> {
    let mut depth = 1;
    for (i, t) in tokens.iter().enumerate().skip(from) {
        if t.is_punct("{") {
            depth += 1;
        } else if t.is_punct("}") {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

fn is_continuation_end(t: &Token) -> bool {
    t.kind == TokenKind::Punct
        && matches!(
            t.text.as_str(),
            "=" | "," | "+" | "-" | "." | "&&" | "||" | "?" | ":" | "*" | "/"
        )
}

fn is_continuation_start(t: &Token) -> bool {
    t.kind == TokenKind::Punct
        && matches!(t.text.as_str(), "." | "+" | "&&" | "||" | "?" | ":")
}

pub(crate) fn parse_body_tokens(src: &str, tokens: &[Token]) -> Vec<Statement> {
    let mut stmts: Vec<Statement> = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut declared: Vec<String> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i].kind == TokenKind::LineComment {
            pending.push(comment_text(&tokens[i].text));
            i += 1;
            continue;
        }
        let start = i;
        let mut depth = 0i32;
        loop {
            let tok = &tokens[i];
            depth = (depth + bracket_delta(tok)).max(0);
            i += 1;
            if i >= tokens.len() {
                break;
            }
            if depth == 0 {
                if tok.is_punct(";") {
                    break;
                }
                let next = &tokens[i];
                if next.line != tok.line
                    && !is_continuation_end(tok)
                    && !is_continuation_start(next)
                {
                    break;
                }
                if next.kind == TokenKind::LineComment && tok.is_punct("}") {
                    break;
                }
            }
        }
        let chunk = &tokens[start..i];
        let has_comment = chunk.iter().any(|t| t.kind == TokenKind::LineComment);
        let parsed = if has_comment {
            None
        } else {
            StmtParser { toks: chunk, pos: 0 }.statement()
        };
        let kind = match parsed {
            Some(StatementKind::VarDecl { ref var_name, .. }) if declared.contains(var_name) => None,
            other => other,
        };
        let kind = match kind {
            Some(k) => {
                if let StatementKind::VarDecl { var_name, .. } = &k {
                    declared.push(var_name.clone());
                }
                k
            }
            None => StatementKind::Opaque(raw_lines(src, chunk).join("\n")),
        };
        stmts.push(Statement {
            kind,
            attached_comments: std::mem::take(&mut pending),
        });
    }
    stmts.extend(pending.into_iter().map(Statement::comment));
    stmts
}

fn parse_path(tokens: &[Token], mut i: usize) -> Option<(Vec<String>, usize)> {
    let mut path = Vec::new();
    match tokens.get(i) {
        Some(t) if t.kind == TokenKind::Ident => path.push(t.text.clone()),
        _ => return None,
    }
    i += 1;
    while tokens.get(i).is_some_and(|t| t.is_punct("."))
        && tokens.get(i + 1).is_some_and(|t| t.kind == TokenKind::Ident)
    {
        path.push(tokens[i + 1].text.clone());
        i += 2;
    }
    Some((path, i))
}

struct StmtParser<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl StmtParser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&Token> {
        self.toks.get(self.pos + k)
    }

    fn eat_punct(&mut self, p: &str) -> Option<()> {
        if self.peek()?.is_punct(p) {
            self.pos += 1;
            Some(())
        } else {
            None
        }
    }

    fn ident(&mut self) -> Option<String> {
        let t = self.peek()?;
        if t.kind == TokenKind::Ident {
            let text = t.text.clone();
            self.pos += 1;
            Some(text)
        } else {
            None
        }
    }

    fn path(&mut self) -> Option<Vec<String>> {
        let (p, next) = parse_path(self.toks, self.pos)?;
        self.pos = next;
        Some(p)
    }

    fn finish(&mut self) -> Option<()> {
        self.eat_punct(";")?;
        (self.pos == self.toks.len()).then_some(())
    }

    fn statement(&mut self) -> Option<StatementKind> {
        let first = self.peek()?.clone();
        if first.kind != TokenKind::Ident {
            return None;
        }
        if let Some(kind) = AssertKind::from_name(&first.text) {
            if self.peek_at(1).is_some_and(|t| t.is_punct("(")) {
                self.pos += 1;
                let mut args = self.args()?;
                self.finish()?;
                let message = match args.first() {
                    Some(Expr::Literal { kind: LiteralKind::String, lexeme })
                        if args.len() > kind.base_arity() =>
                    {
                        let m = lexeme.clone();
                        args.remove(0);
                        Some(m)
                    }
                    _ => None,
                };
                return Some(StatementKind::AssertStmt { kind, message, args });
            }
        }
        let save = self.pos;
        if let Some(decl) = self.var_decl() {
            return Some(decl);
        }
        self.pos = save;
        let path = self.path()?;
        if path.len() < 2 {
            return None;
        }
        let args = self.args()?;
        self.finish()?;
        let (receiver, method) = split_call_path(path);
        Some(StatementKind::CallStmt { receiver, method, args })
    }

    fn var_decl(&mut self) -> Option<StatementKind> {
        let mut type_name = self.path()?.join(".");
        while self.peek()?.is_punct("[") && self.peek_at(1)?.is_punct("]") {
            self.pos += 2;
            type_name.push_str("[]");
        }
        let var_name = self.ident()?;
        if RESERVED.contains(&var_name.as_str()) || RESERVED.contains(&type_name.as_str()) {
            return None;
        }
        self.eat_punct("=")?;
        let initializer = self.expr()?;
        self.finish()?;
        Some(StatementKind::VarDecl {
            type_name,
            var_name,
            initializer,
        })
    }

    fn args(&mut self) -> Option<Vec<Expr>> {
        self.eat_punct("(")?;
        let mut args = Vec::new();
        if self.eat_punct(")").is_some() {
            return Some(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat_punct(",").is_some() {
                continue;
            }
            self.eat_punct(")")?;
            return Some(args);
        }
    }

    fn expr(&mut self) -> Option<Expr> {
        let t = self.peek()?.clone();
        match t.kind {
            TokenKind::Number => {
                self.pos += 1;
                Some(Expr::literal(classify_number(&t.text), t.text))
            }
            TokenKind::Str => {
                self.pos += 1;
                Some(Expr::literal(LiteralKind::String, t.text))
            }
            TokenKind::Char => {
                self.pos += 1;
                Some(Expr::literal(LiteralKind::Char, t.text))
            }
            TokenKind::Punct if t.text == "-" => {
                let n = self.peek_at(1)?.clone();
                if n.kind != TokenKind::Number {
                    return None;
                }
                self.pos += 2;
                Some(Expr::literal(classify_number(&n.text), format!("-{}", n.text)))
            }
            TokenKind::Punct if t.text == "(" => {
                let ty = self.peek_at(1)?;
                if ty.kind != TokenKind::Ident
                    || !PRIMITIVE_TYPES.contains(&ty.text.as_str())
                    || !self.peek_at(2)?.is_punct(")")
                {
                    return None;
                }
                let to = ty.text.clone();
                self.pos += 3;
                let inner = self.expr()?;
                Some(Expr::Cast {
                    to,
                    inner: Box::new(inner),
                })
            }
            TokenKind::Ident => match t.text.as_str() {
                "true" | "false" => {
                    self.pos += 1;
                    Some(Expr::literal(LiteralKind::Boolean, t.text))
                }
                "null" => {
                    self.pos += 1;
                    Some(Expr::literal(LiteralKind::Null, t.text))
                }
                "new" => {
                    self.pos += 1;
                    let type_name = self.path()?.join(".");
                    let args = self.args()?;
                    Some(Expr::ConstructorCall { type_name, args })
                }
                _ => {
                    let path = self.path()?;
                    let is_call = self.peek().is_some_and(|n| n.is_punct("("));
                    if is_call && path.len() >= 2 {
                        let args = self.args()?;
                        let (receiver, method) = split_call_path(path);
                        Some(Expr::MethodCall { receiver, method, args })
                    } else if !is_call
                        && path.len() == 1
                        && !RESERVED.contains(&path[0].as_str())
                    {
                        Some(Expr::VarRef(path.into_iter().next().unwrap()))
                    } else {
                        None
                    }
                }
            },
            _ => None,
        }
    }
}

fn split_call_path(mut path: Vec<String>) -> (String, String) {
    let method = path.pop().expect("call path has at least two segments");
    (path.join("."), method)
}

fn classify_number(lexeme: &str) -> LiteralKind {
    let lower = lexeme.to_ascii_lowercase();
    if lower.ends_with('l') {
        LiteralKind::Long
    } else if lower.starts_with("0x") {
        LiteralKind::Int
    } else if lower.ends_with('f') {
        LiteralKind::Float
    } else if lower.ends_with('d') || lower.contains('.') || lower.contains('e') {
        LiteralKind::Double
    } else {
        LiteralKind::Int
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_six_argument_constructor() {
        let t = parse_test_case(
            "public void test0() { WeaponGameData weaponGameData0 = new WeaponGameData(0,0,0,\"N&zMn$@6gffi<\",\"\",0); }",
        )
        .unwrap();
        assert_eq!(t.name, "test0");
        assert_eq!(t.statements.len(), 1);
        match &t.statements[0].kind {
            StatementKind::VarDecl {
                type_name,
                var_name,
                initializer: Expr::ConstructorCall { args, .. },
            } => {
                assert_eq!(type_name, "WeaponGameData");
                assert_eq!(var_name, "weaponGameData0");
                assert_eq!(args.len(), 6);
                assert_eq!(args[3], Expr::literal(LiteralKind::String, "\"N&zMn$@6gffi<\""));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_body_is_an_error() {
        assert_eq!(
            parse_test_case("public void t() { }"),
            Err(ParseError::EmptyBody { name: "t".into() })
        );
        assert_eq!(
            parse_test_case("public void t() {\n // only a comment\n}"),
            Err(ParseError::EmptyBody { name: "t".into() })
        );
    }

    #[test]
    fn unsupported_block_is_opaque() {
        let t = parse_test_case("public void t() {\n  int x = 0;\n  synchronized(this) { x++; }\n}").unwrap();
        assert_eq!(
            t.statements[1].kind,
            StatementKind::Opaque("synchronized(this) { x++; }".into())
        );
    }

    #[test]
    fn missing_header_and_unterminated_string() {
        assert!(matches!(
            parse_test_case("int x = 5;"),
            Err(ParseError::MalformedHeader { .. })
        ));
        assert!(matches!(
            parse_test_case("public void t() { String s = \"abc; }"),
            Err(ParseError::UnterminatedString { line: 1 })
        ));
        assert!(matches!(
            parse_test_case("public void t() { int x = 5;"),
            Err(ParseError::UnclosedBody { .. })
        ));
    }

    #[test]
    fn assertion_messages_and_casts() {
        let t = parse_test_case(
            "@Test(timeout = 4000)\npublic void t() throws Throwable {\n  Budget b = new Budget((byte)0, -1L);\n  assertEquals(\"must match\", 0, b.getAmount());\n  assertEquals(1.0, 1.0, 0.01);\n  fail(\"boom\");\n}",
        )
        .unwrap();
        assert_eq!(t.annotations, vec!["@Test(timeout = 4000)"]);
        assert_eq!(t.throws, vec!["Throwable"]);
        match &t.statements[1].kind {
            StatementKind::AssertStmt { message, args, .. } => {
                assert_eq!(message.as_deref(), Some("\"must match\""));
                assert_eq!(args.len(), 2);
            }
            other => panic!("{other:?}"),
        }
        match &t.statements[2].kind {
            StatementKind::AssertStmt { message, args, .. } => {
                assert!(message.is_none());
                assert_eq!(args.len(), 3);
            }
            other => panic!("{other:?}"),
        }
        match &t.statements[3].kind {
            StatementKind::AssertStmt { kind, message, args } => {
                assert_eq!(*kind, AssertKind::Fail);
                assert_eq!(message.as_deref(), Some("\"boom\""));
                assert!(args.is_empty());
            }
            other => panic!("{other:?}"),
        }
        match &t.statements[0].kind {
            StatementKind::VarDecl {
                initializer: Expr::ConstructorCall { args, .. },
                ..
            } => {
                assert_eq!(
                    args[0],
                    Expr::Cast {
                        to: "byte".into(),
                        inner: Box::new(Expr::literal(LiteralKind::Int, "0"))
                    }
                );
                assert_eq!(args[1], Expr::literal(LiteralKind::Long, "-1L"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn comments_attach_to_following_statement() {
        let t = parse_test_case(
            "// leading\n@Test\npublic void t() {\n  // Given a budget\n  Budget b = new Budget();\n  b.spend(3); // trailing\n  assertTrue(b.isEmpty());\n  // done\n}",
        )
        .unwrap();
        assert_eq!(t.leading_comments, vec!["leading"]);
        assert_eq!(t.statements[0].attached_comments, vec!["Given a budget"]);
        assert_eq!(t.statements[2].attached_comments, vec!["trailing"]);
        assert_eq!(t.statements[3], Statement::comment("done"));
    }

    #[test]
    fn multi_line_statement_is_joined() {
        let t = parse_test_case("public void t() {\n  Foo f = new Foo(1,\n      2);\n  f.bar();\n}").unwrap();
        assert_eq!(t.statements.len(), 2);
        assert!(!t.statements[0].is_opaque());
    }

    #[test]
    fn try_block_becomes_single_opaque_chunk() {
        let src = "public void t() {\n  Foo f = new Foo();\n  try {\n    f.bar(null);\n    fail(\"Expecting exception\");\n  } catch(NullPointerException e) {\n  }\n  f.baz();\n}";
        let t = parse_test_case(src).unwrap();
        assert_eq!(t.statements.len(), 3);
        assert_eq!(
            t.statements[1].kind,
            StatementKind::Opaque(
                "try {\nf.bar(null);\nfail(\"Expecting exception\");\n} catch(NullPointerException e) {\n}".into()
            )
        );
    }

    #[test]
    fn duplicate_declaration_is_opaque() {
        let t = parse_test_case("public void t() { int a = 1; int a = 2; }").unwrap();
        assert!(t.statements[1].is_opaque());
    }

    #[test]
    fn multiple_methods_per_file() {
        let tests = parse_test_file(
            "@Test\npublic void a() { int x = 1; }\n\n@Test\npublic void b() { int y = 2; }\n",
        )
        .unwrap();
        assert_eq!(tests.len(), 2);
        assert_eq!(tests[1].name, "b");
        assert_eq!(tests[1].source_span, (4, 5));
    }
}
