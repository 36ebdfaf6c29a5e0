//! Parses a generated test file, shows what each statement became and
//! renders it back with and without comments.
//!
//! cargo run --example parse_and_render

use testclarify::testlang::{parse_test_file, render, signature_set, RenderStyle, StatementKind};

const SOURCE: &str = r#"@Test(timeout = 4000)
public void test0() throws Throwable {
    // constructs the budget
    Budget budget0 = new Budget(5);
    budget0.spend(2);
    int int0 = budget0.remaining();
    assertEquals(3, int0);
    try {
        budget0.spend(10);
        fail("Expecting exception: IllegalArgumentException");
    } catch(IllegalArgumentException e) {
    }
}
"#;

fn main() {
    let tests = parse_test_file(SOURCE).expect("source parses");
    let test = &tests[0];
    println!("{} with {} statements", test.name, test.statements.len());
    for s in &test.statements {
        let kind = match &s.kind {
            StatementKind::VarDecl { .. } => "declaration",
            StatementKind::CallStmt { .. } => "call",
            StatementKind::AssertStmt { .. } => "assertion",
            StatementKind::Opaque(_) => "opaque (carried verbatim)",
            _ => "other",
        };
        println!("  {kind}: comments {:?}", s.attached_comments);
    }
    println!("calls: {:?}", signature_set(test));
    println!("\n{}", render(test, RenderStyle::WithComments));
    println!("{}", render(test, RenderStyle::Stripped));
}
