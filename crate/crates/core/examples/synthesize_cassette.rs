//! Records `fixtures/corpus.cassette.jsonl` by running the whole corpus
//! through the heuristic responder.
//!
//! cargo run --example synthesize_cassette [-- <cassette path>]

use std::path::{Path, PathBuf};
use testclarify::demo::HeuristicResponder;
use testclarify::harness::load_corpus;
use testclarify::llmclient::{Cassette, RecordingBackend};
use testclarify::pipeline::{Pipeline, PipelineConfig};

fn main() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| fixtures.join("corpus.cassette.jsonl"));
    let _ = std::fs::remove_file(&path);

    let (inputs, skipped) = load_corpus(&fixtures.join("corpus"), Some(&fixtures.join("classes")));
    assert!(skipped.is_empty(), "corpus files must all parse: {skipped:?}");
    let backend = RecordingBackend::open(HeuristicResponder::default(), &path).expect("cassette opens");
    let config = PipelineConfig::default();
    let run = Pipeline::new(&backend, &config).enhance_suite(&inputs).expect("pipeline runs");

    // rewrite in a stable order so regenerating only changes timestamps
    let cassette = Cassette::load(&path).expect("cassette reloads");
    let mut entries = cassette.entries().to_vec();
    entries.sort_by(|a, b| (&a.request_summary.stage_tag, &a.digest).cmp(&(&b.request_summary.stage_tag, &b.digest)));
    let text: String = entries.iter().map(|e| e.to_line() + "\n").collect();
    std::fs::write(&path, text).expect("cassette rewrites");

    let t = run.report.totals;
    println!(
        "recorded {} responses to {}\n{} tests: {} improved, {} stagnated, {} reverted",
        backend.recorded(),
        path.display(),
        t.tests,
        t.improved,
        t.stagnated,
        t.reverted
    );
}
