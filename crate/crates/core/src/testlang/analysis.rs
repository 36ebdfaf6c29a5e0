use super::ast::*;
use super::lexer::{self, TokenKind};
use std::collections::{BTreeSet, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NormalizeOptions {
    pub alpha_rename: bool,
    pub strip_comments: bool,
    pub strip_assert_messages: bool,
}

impl NormalizeOptions {
    pub const ALL: NormalizeOptions = NormalizeOptions {
        alpha_rename: true,
        strip_comments: true,
        strip_assert_messages: true,
    };
}

/// Canonicalizes a test so that edits touching only names, comments or
/// assertion messages disappear.
pub fn normalize(test: &TestCase, opts: NormalizeOptions) -> TestCase {
    let mut out = if opts.alpha_rename {
        let map: HashMap<String, String> = test
            .declared_vars()
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v.to_string(), format!("v{i}")))
            .collect();
        rename_variables(test, &map)
    } else {
        test.clone()
    };
    if opts.strip_comments {
        out.leading_comments.clear();
        out.statements.retain(|s| !s.is_comment());
        for s in &mut out.statements {
            s.attached_comments.clear();
        }
    }
    if opts.strip_assert_messages {
        for s in &mut out.statements {
            if let StatementKind::AssertStmt { message, .. } = &mut s.kind {
                *message = None;
            }
        }
    }
    out
}

/// Applies `map` to declarations, references, receivers and identifiers
/// inside opaque statements. Comments are left alone.
pub fn rename_variables(test: &TestCase, map: &HashMap<String, String>) -> TestCase {
    let mut out = test.clone();
    for s in &mut out.statements {
        rename_statement(&mut s.kind, map);
    }
    out
}

fn rename_statement(kind: &mut StatementKind, map: &HashMap<String, String>) {
    match kind {
        StatementKind::VarDecl {
            var_name,
            initializer,
            ..
        } => {
            if let Some(n) = map.get(var_name.as_str()) {
                *var_name = n.clone();
            }
            rename_expr(initializer, map);
        }
        StatementKind::CallStmt { receiver, args, .. } => {
            if let Some(n) = map.get(receiver.as_str()) {
                *receiver = n.clone();
            }
            args.iter_mut().for_each(|a| rename_expr(a, map));
        }
        StatementKind::AssertStmt { args, .. } => args.iter_mut().for_each(|a| rename_expr(a, map)),
        StatementKind::Opaque(raw) => *raw = rename_in_text(raw, map),
        StatementKind::Comment(_) => {}
    }
}

fn rename_expr(e: &mut Expr, map: &HashMap<String, String>) {
    match e {
        Expr::VarRef(v) => {
            if let Some(n) = map.get(v.as_str()) {
                *v = n.clone();
            }
        }
        Expr::MethodCall { receiver, args, .. } => {
            if let Some(n) = map.get(receiver.as_str()) {
                *receiver = n.clone();
            }
            args.iter_mut().for_each(|a| rename_expr(a, map));
        }
        Expr::ConstructorCall { args, .. } => args.iter_mut().for_each(|a| rename_expr(a, map)),
        Expr::Cast { inner, .. } => rename_expr(inner, map),
        Expr::Literal { .. } => {}
    }
}

/// Renames identifier tokens in raw text, skipping member names after `.`.
pub(crate) fn rename_in_text(raw: &str, map: &HashMap<String, String>) -> String {
    let Ok(tokens) = lexer::tokenize(raw) else {
        return raw.to_string();
    };
    let mut out = String::with_capacity(raw.len());
    let mut last = 0;
    for (i, t) in tokens.iter().enumerate() {
        if t.kind != TokenKind::Ident {
            continue;
        }
        let after_dot = i > 0 && tokens[i - 1].is_punct(".");
        if let (false, Some(n)) = (after_dot, map.get(t.text.as_str())) {
            out.push_str(&raw[last..t.start]);
            out.push_str(n);
            last = t.end;
        }
    }
    out.push_str(&raw[last..]);
    out
}

/// Every call shape in the test, constructors included. Opaque statements
/// contribute nothing.
pub fn signature_set(test: &TestCase) -> BTreeSet<CallSignature> {
    let declared: BTreeSet<&str> = test.declared_vars().into_iter().collect();
    let mut out = BTreeSet::new();
    for s in &test.statements {
        statement_signatures(&s.kind, &declared, &mut out);
    }
    out
}

/// Call shapes of a single statement, given the variables declared in its test.
pub fn statement_signatures(
    kind: &StatementKind,
    declared: &BTreeSet<&str>,
    out: &mut BTreeSet<CallSignature>,
) {
    match kind {
        StatementKind::VarDecl { initializer, .. } => expr_signatures(initializer, declared, out),
        StatementKind::CallStmt { receiver, method, args } => {
            out.insert(call_signature(receiver, method, args.len(), declared));
            args.iter().for_each(|a| expr_signatures(a, declared, out));
        }
        StatementKind::AssertStmt { args, .. } => {
            args.iter().for_each(|a| expr_signatures(a, declared, out))
        }
        StatementKind::Comment(_) | StatementKind::Opaque(_) => {}
    }
}

fn expr_signatures(e: &Expr, declared: &BTreeSet<&str>, out: &mut BTreeSet<CallSignature>) {
    match e {
        Expr::ConstructorCall { type_name, args } => {
            out.insert(CallSignature::Constructor {
                type_name: type_name.clone(),
                arity: args.len(),
            });
            args.iter().for_each(|a| expr_signatures(a, declared, out));
        }
        Expr::MethodCall { receiver, method, args } => {
            out.insert(call_signature(receiver, method, args.len(), declared));
            args.iter().for_each(|a| expr_signatures(a, declared, out));
        }
        Expr::Cast { inner, .. } => expr_signatures(inner, declared, out),
        Expr::Literal { .. } | Expr::VarRef(_) => {}
    }
}

fn call_signature(receiver: &str, method: &str, arity: usize, declared: &BTreeSet<&str>) -> CallSignature {
    let looks_like_var = !receiver.contains('.')
        && receiver.chars().next().is_some_and(|c| c.is_ascii_lowercase() || c == '_');
    if declared.contains(receiver) || looks_like_var {
        CallSignature::Instance {
            receiver: receiver.to_string(),
            method: method.to_string(),
            arity,
        }
    } else {
        CallSignature::Static {
            type_name: receiver.to_string(),
            method: method.to_string(),
            arity,
        }
    }
}

/// Number of non-comment statements.
pub fn total_length(test: &TestCase) -> usize {
    test.code_statements().count()
}

/// Variable names read by a statement, receivers included, in source order.
pub fn statement_uses(kind: &StatementKind) -> Vec<&str> {
    let mut out = Vec::new();
    match kind {
        StatementKind::VarDecl { initializer, .. } => expr_uses(initializer, &mut out),
        StatementKind::CallStmt { receiver, args, .. } => {
            out.push(receiver.as_str());
            args.iter().for_each(|a| expr_uses(a, &mut out));
        }
        StatementKind::AssertStmt { args, .. } => args.iter().for_each(|a| expr_uses(a, &mut out)),
        StatementKind::Comment(_) | StatementKind::Opaque(_) => {}
    }
    out
}

fn expr_uses<'a>(e: &'a Expr, out: &mut Vec<&'a str>) {
    match e {
        Expr::VarRef(v) => out.push(v),
        Expr::MethodCall { receiver, args, .. } => {
            out.push(receiver);
            args.iter().for_each(|a| expr_uses(a, out));
        }
        Expr::ConstructorCall { args, .. } => args.iter().for_each(|a| expr_uses(a, out)),
        Expr::Cast { inner, .. } => expr_uses(inner, out),
        Expr::Literal { .. } => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testlang::{parse_test_case, render, RenderStyle};

    const ORIGINAL: &str = "public void test0() {\n  WeaponGameData weaponGameData0 = new WeaponGameData();\n  WeaponGameData weaponGameData1 = new WeaponGameData(1, 2);\n  boolean boolean0 = weaponGameData0.equals(weaponGameData1);\n  assertFalse(boolean0);\n}";

    #[test]
    fn alpha_rename_canonicalizes_in_declaration_order() {
        let t = parse_test_case(
            "public void t() {\n  Weapon defaultWeapon = new Weapon();\n  Weapon customWeapon = new Weapon(3);\n  defaultWeapon.equals(customWeapon);\n}",
        )
        .unwrap();
        let n = normalize(&t, NormalizeOptions { alpha_rename: true, ..Default::default() });
        assert_eq!(
            render(&n, RenderStyle::Stripped),
            "public void t() {\n    Weapon v0 = new Weapon();\n    Weapon v1 = new Weapon(3);\n    v0.equals(v1);\n}\n"
        );
    }

    #[test]
    fn already_canonical_is_unchanged() {
        let t = parse_test_case("public void t() {\n  Weapon v0 = new Weapon();\n  Weapon v1 = new Weapon(v0);\n}").unwrap();
        let opts = NormalizeOptions { alpha_rename: true, ..Default::default() };
        assert_eq!(normalize(&t, opts), t);
    }

    #[test]
    fn rename_and_comment_edit_normalizes_to_original() {
        let original = parse_test_case(ORIGINAL).unwrap();
        // scripted edit: rename both variables, add comments and a message
        let edited_src = ORIGINAL
            .replace("weaponGameData0", "defaultWeapon")
            .replace("weaponGameData1", "customWeapon")
            .replace("boolean0", "areEqual")
            .replace("  WeaponGameData defaultWeapon", "  // Given two weapons\n  WeaponGameData defaultWeapon")
            .replace("assertFalse(areEqual)", "// Then they differ\n  assertFalse(\"weapons differ\", areEqual)");
        let edited = parse_test_case(&edited_src).unwrap();
        assert_ne!(edited, original);
        assert_eq!(
            normalize(&edited, NormalizeOptions::ALL),
            normalize(&original, NormalizeOptions::ALL)
        );
    }

    #[test]
    fn opaque_text_is_renamed_for_declared_vars_only() {
        let map: HashMap<String, String> = [("w".to_string(), "v0".to_string())].into_iter().collect();
        assert_eq!(
            rename_in_text("try { w.fire(x.w); } catch(E e) {}", &map),
            "try { v0.fire(x.w); } catch(E e) {}"
        );
    }

    #[test]
    fn signatures_cover_instance_constructor_and_static() {
        let t = parse_test_case(
            "public void t() {\n  Weapon w = new Weapon(1, 2);\n  Weapon w2 = new Weapon(1, 2);\n  int d = w.getDmgBonus();\n  Util.reset(w2);\n}",
        )
        .unwrap();
        let sigs = signature_set(&t);
        assert_eq!(sigs.len(), 3);
        assert!(sigs.contains(&CallSignature::Instance {
            receiver: "w".into(),
            method: "getDmgBonus".into(),
            arity: 0
        }));
        assert!(sigs.contains(&CallSignature::Constructor { type_name: "Weapon".into(), arity: 2 }));
        assert!(sigs.contains(&CallSignature::Static {
            type_name: "Util".into(),
            method: "reset".into(),
            arity: 1
        }));
    }

    #[test]
    fn comment_only_statement_contributes_nothing() {
        let mut t = parse_test_case("public void t() { int a = 1; }").unwrap();
        t.statements = vec![Statement::comment("nothing here")];
        assert!(signature_set(&t).is_empty());
    }

    #[test]
    fn length_counts_code_statements() {
        let t = parse_test_case(
            "public void t() {\n  // Given\n  int a = 1;\n  int b = 2;\n  int c = 3;\n  // Then\n  assertEquals(a, b);\n}",
        )
        .unwrap();
        let mut with_comments = t.clone();
        with_comments.statements.push(Statement::comment("x"));
        with_comments.statements.push(Statement::comment("y"));
        assert_eq!(total_length(&with_comments), 4);
        assert_eq!(
            render(&t, RenderStyle::Stripped).lines().count() - 2,
            total_length(&t)
        );
    }
}
