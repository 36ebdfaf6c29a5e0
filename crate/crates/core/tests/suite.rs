mod common;

use common::*;
use testclarify::demo::HeuristicResponder;
use testclarify::llmclient::{Cassette, FnBackend, LlmError, LlmRequest, RecordingBackend, ReplayBackend};
use testclarify::pipeline::{OutcomeKind, Pipeline, PipelineConfig, SuiteInput, Verdict, VerifierCommand};
use testclarify::prompts::Stage;
use testclarify::testlang::{parse_test_case, render, RenderStyle};

fn input(source: &str) -> SuiteInput {
    SuiteInput {
        test: parse_test_case(source).unwrap(),
        class_source: None,
        origin: "fixture".into(),
    }
}

const VALID_TEST: &str = "@Test\npublic void test1() {\n    Budget budget0 = new Budget(7);\n    boolean boolean0 = budget0.isValid();\n    assertTrue(boolean0);\n}";
const VALID_REWRITE: &str = "```java\n@Test\npublic void test1() {\n    // Given a budget of seven\n    Budget budget = new Budget(7);\n    // When its validity is checked\n    boolean valid = budget.isValid();\n    // Then it is valid\n    assertTrue(valid);\n}\n```";
const IGNORED_TEST: &str = "@Test\npublic void test2() {\n    Budget budget0 = new Budget(3);\n    budget0.reset();\n    assertEquals(0, budget0.remaining());\n}";
const EMPTY_TEST: &str = "@Test\npublic void test3() {\n    Budget budget0 = new Budget(0);\n    assertTrue(budget0.isEmpty());\n}";
const EMPTY_REWRITE: &str = "```java\n@Test\npublic void test3() {\n    // Given an empty budget FLAKY\n    Budget budget = new Budget(0);\n    // When nothing happens\n    // Then it is empty\n    assertTrue(budget.isEmpty());\n}\n```";

fn mixed_backend(r: &LlmRequest) -> Result<String, LlmError> {
    let p = &r.prompt;
    let is = |name: &str| p.contains(&format!("void {name}("));
    let naming = r.stage_tag == Stage::NameSuggestion.tag();
    Ok(match () {
        _ if naming && is("test0") => "testSpendLeavesRemainder".into(),
        _ if naming && is("test1") => "testNewBudgetIsValid".into(),
        _ if naming => "testZeroBudgetIsEmpty".into(),
        _ if is("test0") => SPEND_REWRITE.into(),
        _ if is("test1") => VALID_REWRITE.into(),
        _ if is("test3") => EMPTY_REWRITE.into(),
        _ => UNRELATED_RESPONSE.into(),
    })
}

#[test]
fn mixed_suite_reports_exact_shares() {
    let config = PipelineConfig {
        verifier: VerifierCommand::external(r#"sh -c 'grep -q FLAKY "$1" && exit 1; exit 0' _ {file}"#),
        ..PipelineConfig::default()
    };
    let inputs = [SPEND_TEST, VALID_TEST, IGNORED_TEST, EMPTY_TEST].map(input);
    let backend = FnBackend(mixed_backend);
    let run = Pipeline::new(&backend, &config).enhance_suite(&inputs).unwrap();
    let kinds: Vec<OutcomeKind> = run.tests.iter().map(|t| t.outcome.kind).collect();
    assert_eq!(
        kinds,
        [OutcomeKind::Improved, OutcomeKind::Improved, OutcomeKind::Stagnated, OutcomeKind::Reverted]
    );
    let json = run.report.to_json();
    assert!(json.contains("\"improved_pct\": 50.00"), "{json}");
    assert!(json.contains("\"stagnated_pct\": 25.00"));
    assert!(json.contains("\"reverted_pct\": 25.00"));

    let names: Vec<&str> = run.tests.iter().map(|t| t.outcome.name.as_str()).collect();
    assert_eq!(names, ["testSpendLeavesRemainder", "testNewBudgetIsValid", "test2", "test3"]);
    let reverted = &run.tests[3];
    assert_eq!(reverted.output.as_ref(), Some(&reverted.baseline));
    assert_eq!(reverted.outcome.completions.post_process, 1 + config.postprocess_budget);
    assert!(run.tests[0].outcome.final_score.unwrap().combined >= config.codebleu_threshold);
}

#[test]
fn unstable_baseline_is_dropped() {
    let config = PipelineConfig {
        verifier: VerifierCommand::external(
            r#"sh -c 'for a; do [ "$a" = --run ] && { echo java.lang.IllegalStateException; exit 1; }; done; exit 0' _ {file}"#,
        ),
        ..PipelineConfig::default()
    };
    let backend = FnBackend(|_: &LlmRequest| Ok(UNRELATED_RESPONSE.to_string()));
    let run = Pipeline::new(&backend, &config).enhance_suite(&[input(SPEND_TEST)]).unwrap();
    let t = &run.tests[0];
    assert_eq!(t.outcome.kind, OutcomeKind::Stagnated);
    assert!(t.outcome.dropped);
    assert_eq!(t.output, None);
    assert_eq!(t.outcome.verdict, Some(Verdict::CompiledUnstable("Exception".into())));
    assert_eq!(run.report.verify.dropped, 1);
}

#[test]
fn recorded_cassette_replays_to_the_same_suite() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.jsonl");
    let config = PipelineConfig::default();
    let inputs = corpus();
    let recorder = RecordingBackend::open(HeuristicResponder::default(), &path).unwrap();
    let live = Pipeline::new(&recorder, &config).enhance_suite(&inputs).unwrap();
    let replay = ReplayBackend::strict(Cassette::load(&path).unwrap());
    let again = Pipeline::new(&replay, &config).enhance_suite(&inputs).unwrap();
    assert_eq!(replay.misses(), 0);
    let outputs = |r: &testclarify::pipeline::SuiteRun| -> Vec<Option<String>> {
        r.tests.iter().map(|t| t.output.as_ref().map(|o| render(o, RenderStyle::WithComments))).collect()
    };
    assert_eq!(outputs(&live), outputs(&again));
    assert_eq!(live.report.outcomes, again.report.outcomes);
}

#[test]
fn worker_count_does_not_change_results() {
    let inputs = corpus();
    let run = |workers| {
        let config = PipelineConfig { workers, ..PipelineConfig::default() };
        let mut r = Pipeline::new(&HeuristicResponder::default(), &config).enhance_suite(&inputs).unwrap().report;
        r.duration_ms = None;
        r.to_json()
    };
    assert_eq!(run(1), run(8));
}
