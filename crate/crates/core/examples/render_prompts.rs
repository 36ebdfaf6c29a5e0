//! Prints the prompt each stage sends for one test.
//!
//! cargo run --example render_prompts

use testclarify::prompts::{PromptContext, Stage, TemplateSet};

const TEST: &str = "@Test\npublic void test0() {\n    Budget budget0 = new Budget(5);\n    budget0.spend(2);\n    assertEquals(3, budget0.remaining());\n}";
const CLASS: &str = "public class Budget {\n    public Budget(int limit) { }\n    public void spend(int amount) { }\n    public int remaining() { return 0; }\n}";

fn main() {
    let templates = TemplateSet::builtin();
    let ctx = PromptContext {
        test_source: TEST.into(),
        class_under_test_source: Some(CLASS.into()),
        taken_names: vec!["testSpendReducesRemaining".into()],
        extra_notes: None,
    };
    for stage in Stage::ALL {
        println!("===== {} =====", stage.tag());
        print!("{}", templates.render(stage, &ctx).expect("prompt renders"));
    }
}
