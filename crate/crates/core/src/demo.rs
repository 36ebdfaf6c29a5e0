//! A deterministic stand-in for the model, used to record the bundled
//! cassette and to drive the examples offline.
//!
//! Answers are derived from the prompt alone: literals are replaced with
//! domain values, variables are renamed after their types and calls,
//! Given/When/Then comments are inserted and names are built from the
//! exercised method. With `flaws` enabled a fixed share of answers carry
//! the defects the repair layer exists for: chatter, stray prose, missing
//! braces, invented calls, changed arities and broken conventions.

use crate::llmclient::{LlmBackend, LlmError, LlmRequest};
use crate::prompts::Stage;
use crate::testlang::{
    parse_test_case, rename_variables, render, AssertKind, Expr, LiteralKind, RenderStyle, Statement,
    StatementKind, TestCase,
};
use sha2::{Digest, Sha256};
use std::collections::{BTreeSet, HashMap};

#[derive(Debug, Clone, Copy)]
pub struct HeuristicResponder {
    pub flaws: bool,
}

impl Default for HeuristicResponder {
    fn default() -> Self {
        HeuristicResponder { flaws: true }
    }
}

const UNRELATED: &str = "Here is an example of a unit test:\n```java\nList<String> names = new ArrayList<String>();\nnames.add(\"x\");\nassertEquals(1, names.size());\n```\n";

const WEAPONS: &[&str] = &["Ninja Sword", "Iron Shield", "Elven Bow", "War Hammer", "Silver Dagger", "Fire Staff"];
const GENERIC: &[&str] = &["Alice Smith", "Order 1042", "Main Street", "Blue Widget", "Spring Sale", "Project Apollo"];

fn hash_byte(s: &str) -> u8 {
    Sha256::digest(s.as_bytes())[0]
}

/// The test source of a rendered prompt.
fn test_block(prompt: &str) -> Option<&str> {
    let start = prompt.find("Unit test:\n```java\n")? + "Unit test:\n```java\n".len();
    let len = prompt[start..].find("\n```")?;
    Some(&prompt[start..start + len])
}

fn class_block(prompt: &str) -> Option<&str> {
    let start = prompt.find("Class under test:\n```java\n")? + "Class under test:\n```java\n".len();
    let len = prompt[start..].find("\n```")?;
    Some(&prompt[start..start + len])
}

fn note(prompt: &str) -> Option<&str> {
    prompt.lines().find_map(|l| l.strip_prefix("Note: "))
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

fn decapitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_lowercase().chain(c).collect()).unwrap_or_default()
}

fn fenced(code: &str) -> String {
    format!("```java\n{}\n```", code.trim_end())
}

impl HeuristicResponder {
    pub fn respond(&self, request: &LlmRequest) -> String {
        let prompt = &request.prompt;
        let Some(source) = test_block(prompt) else {
            return "I need the unit test to work with.".into();
        };
        let Ok(test) = parse_test_case(source) else {
            return "The test could not be read, sorry.".into();
        };
        let h = hash_byte(source);
        match request.stage_tag.as_str() {
            t if t == Stage::DataRefinement.tag() => self.refine(&test, h, prompt),
            t if t == Stage::PostProcess.tag() => self.post_process(&test, h, prompt, true),
            t if t == Stage::PostProcessRelaxed.tag() => self.post_process(&test, h, prompt, false),
            t if t == Stage::NameSuggestion.tag() => self.name(&test, h, prompt),
            _ => UNRELATED.to_string(),
        }
    }

    fn refine(&self, test: &TestCase, h: u8, prompt: &str) -> String {
        if self.flaws && h % 7 == 6 && note(prompt).is_none() {
            return "This class looks interesting. Which values would you like me to use?".into();
        }
        let pool = match class_block(prompt) {
            Some(c) if c.contains("Weapon") => WEAPONS,
            _ => GENERIC,
        };
        let mut refined = test.clone();
        let mut k = h as usize;
        for s in &mut refined.statements {
            for e in exprs_mut(&mut s.kind) {
                replace_random_strings(e, &mut |_| {
                    k += 1;
                    format!("\"{}\"", pool[k % pool.len()])
                });
            }
        }
        let mut code = render(&refined, RenderStyle::WithComments);
        if self.flaws {
            match h % 4 {
                0 => code = insert_invented_call(&refined).unwrap_or(code),
                1 => code = widen_first_call(&code),
                _ => {}
            }
        }
        format!("Sure. Here is the test with more meaningful data:\n\n{}\n\nThe random strings now describe realistic objects.", fenced(&code))
    }

    fn post_process(&self, test: &TestCase, h: u8, prompt: &str, strict: bool) -> String {
        if self.flaws
            && test.statements.iter().any(|s| matches!(&s.kind, StatementKind::Opaque(r) if r.starts_with("try")))
        {
            return fenced(&assert_throws_rewrite(test));
        }
        let retry = note(prompt).is_some();
        let flaw = if self.flaws { h % 6 } else { 6 };
        if flaw == 2 && !retry {
            return UNRELATED.to_string();
        }
        let mut enhanced = describe(test);
        if flaw == 3 && strict {
            for s in &mut enhanced.statements {
                s.attached_comments.retain(|c| !c.starts_with("Given"));
            }
        }
        let code = render(&enhanced, RenderStyle::WithComments);
        match flaw {
            0 => {
                let mut lines: Vec<&str> = code.lines().collect();
                let at = lines.len().saturating_sub(1);
                lines.insert(at, "    This test checks the behaviour described above.");
                format!("Here is the improved test:\n{}\nI hope this helps.", fenced(&lines.join("\n")))
            }
            1 => {
                let trimmed = code.trim_end().strip_suffix('}').unwrap_or(&code).to_string();
                fenced(&trimmed)
            }
            _ => fenced(&code),
        }
    }

    fn name(&self, test: &TestCase, h: u8, prompt: &str) -> String {
        let mut name = derived_name(test);
        if let Some(n) = note(prompt) {
            if let Some(prev) = n.strip_prefix("The name ").and_then(|r| r.split_whitespace().next()) {
                let class = first_type(test).unwrap_or_else(|| "Object".into());
                let suffix = format!("On{class}");
                name = if prev.ends_with(&suffix) { prev.to_string() } else { format!("{prev}{suffix}") };
            }
        }
        match h % 3 {
            0 => name,
            1 => format!("I suggest the name `{name}` because it states what the test checks."),
            _ => format!("```java\npublic void {name}()\n```"),
        }
    }
}

impl LlmBackend for HeuristicResponder {
    fn complete(&self, request: &LlmRequest) -> Result<String, LlmError> {
        request.validate()?;
        Ok(self.respond(request))
    }
}

fn exprs_mut(kind: &mut StatementKind) -> Vec<&mut Expr> {
    match kind {
        StatementKind::VarDecl { initializer, .. } => vec![initializer],
        StatementKind::CallStmt { args, .. } | StatementKind::AssertStmt { args, .. } => args.iter_mut().collect(),
        _ => Vec::new(),
    }
}

fn looks_random(lexeme: &str) -> bool {
    let inner = lexeme.trim_matches('"');
    if inner.is_empty() {
        return false;
    }
    let odd = inner.chars().any(|c| !(c.is_ascii_alphanumeric() || c == ' '));
    let no_vowel = inner.len() >= 3 && !inner.chars().any(|c| "aeiouAEIOU".contains(c));
    odd || no_vowel
}

fn replace_random_strings(e: &mut Expr, pick: &mut dyn FnMut(&str) -> String) {
    match e {
        Expr::Literal {
            kind: LiteralKind::String,
            lexeme,
        } if looks_random(lexeme) => *lexeme = pick(lexeme),
        Expr::ConstructorCall { args, .. } | Expr::MethodCall { args, .. } => {
            args.iter_mut().for_each(|a| replace_random_strings(a, pick))
        }
        Expr::Cast { inner, .. } => replace_random_strings(inner, pick),
        _ => {}
    }
}

/// Adds a call the class does not have right after the first declaration.
fn insert_invented_call(test: &TestCase) -> Option<String> {
    let (i, var) = test.statements.iter().enumerate().find_map(|(i, s)| match &s.kind {
        StatementKind::VarDecl {
            var_name,
            initializer: Expr::ConstructorCall { .. },
            ..
        } => Some((i, var_name.clone())),
        _ => None,
    })?;
    let mut t = test.clone();
    t.statements.insert(
        i + 1,
        Statement::new(StatementKind::CallStmt {
            receiver: var,
            method: "increaseLevel".into(),
            args: vec![Expr::literal(LiteralKind::Int, "10")],
        }),
    );
    Some(render(&t, RenderStyle::WithComments))
}

/// Passes an extra argument to the first zero-argument call.
fn widen_first_call(code: &str) -> String {
    match code.find("();") {
        Some(at) => format!("{}(10);{}", &code[..at], &code[at + 3..]),
        None => code.to_string(),
    }
}

fn assert_throws_rewrite(test: &TestCase) -> String {
    let mut out = String::from("@Test\npublic void ");
    out.push_str(&test.name);
    out.push_str("() {\n    // Given the setup above\n");
    for s in test.code_statements() {
        match &s.kind {
            StatementKind::Opaque(raw) if raw.starts_with("try") => {
                let call = raw.lines().nth(1).unwrap_or("").trim().trim_end_matches(';');
                out.push_str("    // When the call is made, Then it throws\n");
                out.push_str(&format!("    assertThrows(Exception.class, () -> {call});\n"));
            }
            kind => out.push_str(&format!("    {}\n", crate::testlang::render_statement_kind(kind))),
        }
    }
    out.push_str("}\n");
    out
}

fn base_type(t: &str) -> &str {
    t.split(['<', '[']).next().unwrap_or(t)
}

fn first_type(test: &TestCase) -> Option<String> {
    test.statements.iter().find_map(|s| match &s.kind {
        StatementKind::VarDecl {
            initializer: Expr::ConstructorCall { type_name, .. },
            ..
        } => Some(base_type(type_name).to_string()),
        _ => None,
    })
}

fn name_for(type_name: &str, init: &Expr) -> String {
    let base = match init {
        Expr::ConstructorCall { type_name, .. } => decapitalize(base_type(type_name)),
        Expr::MethodCall { method, .. } => match method.as_str() {
            "toString" => "text".into(),
            "equals" => "areEqual".into(),
            "hashCode" => "hash".into(),
            m if m.starts_with("get") && m.len() > 3 => decapitalize(&m[3..]),
            m if m.starts_with("is") || m.starts_with("has") => m.to_string(),
            m => format!("{m}Result"),
        },
        _ => match type_name {
            "String" => "text".into(),
            "int" | "long" | "short" | "byte" => "amount".into(),
            "double" | "float" => "ratio".into(),
            "boolean" => "flag".into(),
            "char" => "letter".into(),
            t => decapitalize(base_type(t)),
        },
    };
    if crate::testlang::is_keyword(&base) || base.is_empty() {
        "value".into()
    } else {
        base
    }
}

/// Renamed variables plus Given/When/Then comments.
fn describe(test: &TestCase) -> TestCase {
    let mut used: BTreeSet<String> = BTreeSet::new();
    let mut map: HashMap<String, String> = HashMap::new();
    for s in &test.statements {
        if let StatementKind::VarDecl {
            type_name,
            var_name,
            initializer,
        } = &s.kind
        {
            let base = name_for(type_name, initializer);
            let mut name = base.clone();
            if used.contains(&name) {
                name = format!("other{}", capitalize(&base));
            }
            let mut k = 3;
            while used.contains(&name) {
                name = format!("{base}{k}");
                k += 1;
            }
            used.insert(name.clone());
            map.insert(var_name.clone(), name);
        }
    }
    let mut t = rename_variables(test, &map);
    t.leading_comments.clear();
    t.statements.retain(|s| !s.is_comment());
    for s in &mut t.statements {
        s.attached_comments.clear();
    }
    if t.statements.is_empty() {
        return t;
    }
    let then_at = t
        .statements
        .iter()
        .position(|s| matches!(s.kind, StatementKind::AssertStmt { .. }))
        .unwrap_or(t.statements.len() - 1);
    let when_at = (0..then_at)
        .rev()
        .find(|&i| is_action(&t.statements[i].kind))
        .unwrap_or(then_at.saturating_sub(1));
    let class = first_type(test).unwrap_or_else(|| "object".into());
    let action = action_method(&t.statements[when_at].kind).unwrap_or_else(|| "the action".into());
    let then = then_text(&t.statements[then_at].kind);
    t.statements[0].attached_comments.push(format!("Given a {class}"));
    t.statements[when_at].attached_comments.push(format!("When {action} is called"));
    t.statements[then_at].attached_comments.push(then);
    t
}

fn is_action(kind: &StatementKind) -> bool {
    matches!(
        kind,
        StatementKind::CallStmt { .. }
            | StatementKind::VarDecl {
                initializer: Expr::MethodCall { .. },
                ..
            }
    )
}

fn action_method(kind: &StatementKind) -> Option<String> {
    match kind {
        StatementKind::CallStmt { method, .. } => Some(method.clone()),
        StatementKind::VarDecl {
            initializer: Expr::MethodCall { method, .. },
            ..
        } => Some(method.clone()),
        _ => None,
    }
}

fn then_text(kind: &StatementKind) -> String {
    match kind {
        StatementKind::AssertStmt { kind, args, .. } => match kind {
            AssertKind::AssertTrue => "Then the result is true".into(),
            AssertKind::AssertFalse => "Then the result is false".into(),
            AssertKind::AssertNull => "Then nothing is returned".into(),
            AssertKind::AssertNotNull => "Then a value is returned".into(),
            AssertKind::AssertEquals => match args.first() {
                Some(Expr::Literal { lexeme, .. }) => format!("Then the result is {lexeme}"),
                _ => "Then both values match".into(),
            },
            _ => "Then the outcome is as expected".into(),
        },
        _ => "Then the outcome is as expected".into(),
    }
}

fn derived_name(test: &TestCase) -> String {
    let code: Vec<&Statement> = test.code_statements().collect();
    let first_assert = code
        .iter()
        .position(|s| matches!(s.kind, StatementKind::AssertStmt { .. }))
        .unwrap_or(code.len());
    let action = code[..first_assert].iter().rev().find_map(|s| action_method(&s.kind));
    let verb = match &action {
        Some(m) => capitalize(m),
        None => format!("Create{}", first_type(test).unwrap_or_else(|| "Object".into())),
    };
    let outcome = match code.get(first_assert).map(|s| &s.kind) {
        Some(StatementKind::AssertStmt { kind, args, .. }) => match kind {
            AssertKind::AssertTrue => "ReturnsTrue".to_string(),
            AssertKind::AssertFalse => "ReturnsFalse".into(),
            AssertKind::AssertNull => "ReturnsNull".into(),
            AssertKind::AssertNotNull => "ReturnsValue".into(),
            AssertKind::AssertEquals => match args.first() {
                Some(Expr::Literal {
                    kind: LiteralKind::Int | LiteralKind::Long,
                    lexeme,
                }) if lexeme.trim_end_matches(['L', 'l']) == "0" => "ReturnsZero".into(),
                Some(Expr::Literal {
                    kind: LiteralKind::Int,
                    lexeme,
                }) if lexeme.chars().all(|c| c.is_ascii_digit()) => format!("Returns{lexeme}"),
                Some(Expr::Literal {
                    kind: LiteralKind::String, ..
                }) => "ReturnsExpectedText".into(),
                _ => "ReturnsExpectedValue".into(),
            },
            _ => String::new(),
        },
        _ if code.iter().any(|s| s.is_opaque()) => "ThrowsException".into(),
        _ => String::new(),
    };
    format!("test{verb}{outcome}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompts::{PromptContext, TemplateSet};
    use crate::repair::check_comment_convention;

    const T: &str = "@Test\npublic void test0() throws Throwable {\n  WeaponGameData weaponGameData0 = new WeaponGameData(0, 0, 0, \"N&zMn$@6gffi<\", \"\", 0);\n  int int0 = weaponGameData0.getDmgBonus();\n  assertEquals(0, int0);\n}\n";

    fn ask(stage: Stage, ctx: &PromptContext) -> String {
        let prompt = TemplateSet::builtin().render(stage, ctx).unwrap();
        HeuristicResponder { flaws: false }.respond(&LlmRequest::new("m", prompt, stage.tag()))
    }

    #[test]
    fn prompt_blocks_are_found() {
        let mut ctx = PromptContext::for_test(T);
        ctx.class_under_test_source = Some("public class WeaponGameData {}".into());
        let p = TemplateSet::builtin().render(Stage::DataRefinement, &ctx).unwrap();
        assert_eq!(test_block(&p), Some(T.trim_end()));
        assert_eq!(class_block(&p), Some("public class WeaponGameData {}"));
    }

    #[test]
    fn refinement_replaces_random_strings_only() {
        let mut ctx = PromptContext::for_test(T);
        ctx.class_under_test_source = Some("public class WeaponGameData {}".into());
        let out = ask(Stage::DataRefinement, &ctx);
        assert!(!out.contains("N&zMn"));
        assert!(WEAPONS.iter().any(|w| out.contains(w)));
        assert!(out.contains(", \"\", 0)"));
    }

    #[test]
    fn post_process_follows_convention() {
        let out = ask(Stage::PostProcess, &PromptContext::for_test(T));
        let code = crate::repair::extract_code_block(&out).unwrap();
        let t = parse_test_case(&code).unwrap();
        assert!(check_comment_convention(&t));
        assert!(code.contains("WeaponGameData weaponGameData = new WeaponGameData"));
        assert!(code.contains("int dmgBonus = weaponGameData.getDmgBonus();"));
    }

    #[test]
    fn derived_names() {
        let t = parse_test_case(T).unwrap();
        assert_eq!(derived_name(&t), "testGetDmgBonusReturnsZero");
        let b = parse_test_case("@Test\npublic void test3() {\n  Budget budget0 = new Budget(5);\n  budget0.reset();\n  boolean boolean0 = budget0.isEmpty();\n  assertTrue(boolean0);\n}").unwrap();
        assert_eq!(derived_name(&b), "testIsEmptyReturnsTrue");
    }

    #[test]
    fn taken_name_gets_class_suffix() {
        let mut ctx = PromptContext::for_test(T);
        ctx.extra_notes = Some("The name testGetDmgBonusReturnsZero is already used. Suggest a different name.".into());
        let out = ask(Stage::NameSuggestion, &ctx);
        assert!(out.contains("testGetDmgBonusReturnsZeroOnWeaponGameData"), "{out}");
    }
}
