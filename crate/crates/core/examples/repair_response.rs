//! Walks a messy model answer through the repair chain: code extraction,
//! prose demotion, bracket balancing and alignment with the original test.
//!
//! cargo run --example repair_response

use testclarify::repair::{align_refinement, balance_brackets, demote_prose_lines, extract_code_block_logged};
use testclarify::testlang::{parse_test_case, render, RenderStyle};

const ORIGINAL: &str = "@Test\npublic void test01() {\n    WeaponGameData weaponGameData0 = new WeaponGameData(0, 0, 0, \"N&zMn$@6gffi<\", \"\", 0);\n    int int0 = weaponGameData0.getDmgBonus();\n    assertEquals(0, int0);\n}";

const RESPONSE: &str = "Sure! Here is the test with realistic data:\n```java\n@Test\npublic void test01() {\n    WeaponGameData weaponGameData0 = new WeaponGameData(0, 0, 0, \"Ninja Sword\", \"\", 0);\n    The sword starts without a bonus\n    weaponGameData0.increaseDmg(10);\n    int int0 = weaponGameData0.getDmgBonus(10;\n    assertEquals(0, int0);\n```\nLet me know if you need anything else.";

fn main() {
    let original = parse_test_case(ORIGINAL).expect("original parses");
    let (code, mut log) = extract_code_block_logged(RESPONSE).expect("response holds code");
    let (code, demoted) = demote_prose_lines(&code);
    log.extend(demoted);
    let (code, balanced) = balance_brackets(&code).expect("brackets can be closed");
    log.extend(balanced);
    println!("after text repair:\n{code}\n");
    let (aligned, aligned_log) = align_refinement(&original, &code).expect("something survives");
    log.extend(aligned_log);
    for action in &log.actions {
        println!("  {action:?}");
    }
    println!("\naligned:\n{}", render(&aligned, RenderStyle::WithComments));
}
