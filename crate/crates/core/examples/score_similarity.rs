//! Scores a readable rewrite and an unrelated test against a generated one
//! and shows how each fares against the default gate.
//!
//! cargo run --example score_similarity

use testclarify::codebleu::{codebleu, MetricParams};
use testclarify::pipeline::PipelineConfig;

const GENERATED: &str = "@Test\npublic void test0() {\n    Budget budget0 = new Budget(5);\n    budget0.spend(2);\n    int int0 = budget0.remaining();\n    assertEquals(3, int0);\n}";
const REWRITE: &str = "@Test\npublic void test0() {\n    // Given a budget of five\n    Budget budget = new Budget(5);\n    // When two are spent\n    budget.spend(2);\n    int remaining = budget.remaining();\n    // Then three remain\n    assertEquals(3, remaining);\n}";
const UNRELATED: &str = "@Test\npublic void test0() {\n    List<String> names = new ArrayList<String>();\n    names.add(\"x\");\n    assertEquals(1, names.size());\n}";

fn main() {
    let params = MetricParams::default();
    let gate = PipelineConfig::default().codebleu_threshold;
    for (label, candidate) in [("rewrite", REWRITE), ("unrelated", UNRELATED)] {
        let s = codebleu(candidate, GENERATED, &params).expect("both sides parse");
        println!(
            "{label:9} ngram {:.3}  weighted {:.3}  ast {:.3}  dataflow {:.3}  combined {:.3}  {}",
            s.ngram,
            s.weighted_ngram,
            s.ast_match,
            s.dataflow_match,
            s.combined,
            if s.combined >= gate { "passes" } else { "fails" }
        );
    }
}
