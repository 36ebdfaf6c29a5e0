//! Replays the bundled cassette over the bundled corpus and prints what
//! happened to each test.
//!
//! cargo run --example replay_cassette

use std::path::Path;
use testclarify::harness::load_corpus;
use testclarify::llmclient::{Cassette, ReplayBackend};
use testclarify::pipeline::{Pipeline, PipelineConfig};

fn main() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let cassette = Cassette::load(&fixtures.join("corpus.cassette.jsonl")).expect("cassette loads");
    println!("{} recorded responses", cassette.len());
    let (inputs, _) = load_corpus(&fixtures.join("corpus"), Some(&fixtures.join("classes")));
    let backend = ReplayBackend::strict(cassette);
    let config = PipelineConfig::default();
    let run = Pipeline::new(&backend, &config).enhance_suite(&inputs).expect("pipeline runs");
    for o in &run.report.outcomes {
        let score = o.final_score.map(|s| format!("{:.3}", s.combined)).unwrap_or_else(|| "-".into());
        println!("{:40} {:32} {:?} score {score}", o.origin, o.name, o.kind);
    }
    let p = run.report.percentages;
    println!(
        "improved {:.2}%, stagnated {:.2}%, reverted {:.2}%, {} cache misses",
        p.improved_pct,
        p.stagnated_pct,
        p.reverted_pct,
        backend.misses()
    );
}
