//! Runs the whole pipeline on two tests with a scripted model and an
//! external verifier, then prints the report.
//!
//! cargo run --example enhance_suite

use testclarify::llmclient::ScriptedBackend;
use testclarify::pipeline::{Pipeline, PipelineConfig, SuiteInput, VerifierCommand};
use testclarify::prompts::Stage;
use testclarify::testlang::{parse_test_case, render, RenderStyle};

const SPEND: &str = "@Test\npublic void test0() {\n    Budget budget0 = new Budget(5);\n    budget0.spend(2);\n    assertEquals(3, budget0.remaining());\n}";
const RESET: &str = "@Test\npublic void test1() {\n    Budget budget0 = new Budget(3);\n    budget0.reset();\n    assertEquals(0, budget0.remaining());\n}";

const SPEND_REWRITE: &str = "```java\n@Test\npublic void test0() {\n    // Given a budget of five\n    Budget budget = new Budget(5);\n    // When two are spent\n    budget.spend(2);\n    // Then three remain\n    assertEquals(3, budget.remaining());\n}\n```";
const OFF_TOPIC: &str = "Here is a different test:\n```java\nList<String> names = new ArrayList<String>();\nassertTrue(names.isEmpty());\n```";

fn main() {
    let inputs: Vec<SuiteInput> = [SPEND, RESET]
        .iter()
        .map(|s| SuiteInput {
            test: parse_test_case(s).expect("input parses"),
            class_source: None,
            origin: "example".into(),
        })
        .collect();
    // with one worker the first pass answers test0 then test1
    let backend = ScriptedBackend::new([SPEND_REWRITE, OFF_TOPIC, OFF_TOPIC, OFF_TOPIC, OFF_TOPIC, OFF_TOPIC, OFF_TOPIC])
        .with_stage(Stage::NameSuggestion.tag(), ["I would call it `testSpendReducesRemaining`."]);
    let config = PipelineConfig {
        workers: 1,
        verifier: VerifierCommand::external(r#"sh -c 'grep -q assertEquals "$1"' _ {file}"#),
        ..PipelineConfig::default()
    };
    let run = Pipeline::new(&backend, &config).enhance_suite(&inputs).expect("pipeline runs");
    for t in &run.tests {
        if let Some(out) = &t.output {
            println!("{:?}:\n{}", t.outcome.kind, render(out, RenderStyle::WithComments));
        }
    }
    let mut report = run.report;
    report.duration_ms = None;
    print!("{}", report.to_json());
}
