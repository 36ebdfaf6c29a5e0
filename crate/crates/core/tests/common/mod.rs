//! Fixtures and independent oracles shared by the integration targets.

#![allow(dead_code)]

use std::path::PathBuf;
use testclarify::harness::load_corpus;
use testclarify::pipeline::SuiteInput;
use testclarify::testlang::{parse_test_case, TestCase};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn corpus() -> Vec<SuiteInput> {
    let (inputs, skipped) = load_corpus(&fixture("corpus"), Some(&fixture("classes")));
    assert!(skipped.is_empty(), "bundled corpus has unparseable files: {skipped:?}");
    inputs
}

pub fn body(name: &str, statements: &str) -> TestCase {
    parse_test_case(&format!("@Test\npublic void {name}() {{\n{statements}\n}}")).unwrap()
}

/// BLEU with add-one smoothing on every order and the usual brevity
/// penalty, computed by counting every n-gram with linear scans.
pub fn oracle_bleu(cand: &[&str], refr: &[&str], max_n: usize, weight: impl Fn(&str) -> f64) -> f64 {
    let grams = |t: &[&str], n: usize| -> Vec<Vec<String>> {
        if t.len() < n {
            return Vec::new();
        }
        (0..=t.len() - n).map(|i| t[i..i + n].iter().map(|s| s.to_string()).collect()).collect()
    };
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let c = grams(cand, n);
        let r = grams(refr, n);
        let mut seen: Vec<&Vec<String>> = Vec::new();
        let (mut matched, mut total) = (0.0, 0.0);
        for g in &c {
            if seen.contains(&g) {
                continue;
            }
            seen.push(g);
            let in_c = c.iter().filter(|x| *x == g).count() as f64;
            let in_r = r.iter().filter(|x| *x == g).count() as f64;
            let w = weight(&g[0]);
            matched += w * in_c.min(in_r);
            total += w * in_c;
        }
        log_sum += ((matched + 1.0) / (total + 1.0)).ln();
    }
    let bp = if cand.len() >= refr.len() {
        1.0
    } else {
        (1.0 - refr.len() as f64 / cand.len() as f64).exp()
    };
    bp * (log_sum / max_n as f64).exp()
}

/// Twenty distinct tokens and the same list with position 10 replaced.
pub fn one_token_pair() -> (Vec<String>, Vec<String>) {
    let reference: Vec<String> = (0..20).map(|i| format!("t{i}")).collect();
    let mut candidate = reference.clone();
    candidate[10] = "other".into();
    (candidate, reference)
}

/// Hand-derived value for [`one_token_pair`]: 19 of 20 unigrams, 17 of 19
/// bigrams, 15 of 18 trigrams and 13 of 17 four-grams survive.
pub fn one_token_expected() -> f64 {
    (20.0 / 21.0 * 18.0 / 20.0 * 16.0 / 19.0 * 14.0 / 18.0_f64).powf(0.25)
}

/// Reference with eight subtrees; the candidate adds an argument to the
/// void call, changing that call and its statement.
pub fn ast_pair() -> (TestCase, TestCase) {
    let reference = body("t", "Budget b = new Budget(5);\nb.reset();\nassertTrue(b.isEmpty());");
    let candidate = body("t", "Budget b = new Budget(5);\nb.reset(1);\nassertTrue(b.isEmpty());");
    (candidate, reference)
}

/// Reference with four def-use edges; the candidate drops the use of `r`.
pub fn dataflow_pair() -> (TestCase, TestCase) {
    let reference = body(
        "t",
        "Budget b = new Budget(5);\nb.spend(2);\nint r = b.remaining();\nassertEquals(3, r);\nassertTrue(b.isValid());",
    );
    let candidate = body(
        "t",
        "Budget b = new Budget(5);\nb.spend(2);\nint r = b.remaining();\nassertEquals(3, 3);\nassertTrue(b.isValid());",
    );
    (candidate, reference)
}

pub const UNRELATED_BODY: &str = "List<String> names = new ArrayList<String>();\nnames.add(\"x\");\nassertEquals(1, names.size());";

pub const UNRELATED_RESPONSE: &str = "Here is an example of a unit test:\n```java\nList<String> names = new ArrayList<String>();\nnames.add(\"x\");\nassertEquals(1, names.size());\n```\n";

/// Frozen combined score of the unrelated body against [`dataflow_pair`]'s
/// reference.
pub const UNRELATED_COMBINED: f64 = 0.18836193548813518;

/// The generated test and the rewrite a reader would want: renamed
/// variables and Given/When/Then comments, same logic.
pub const SPEND_TEST: &str = "@Test(timeout = 4000)\npublic void test0() throws Throwable {\n    Budget budget0 = new Budget(5);\n    budget0.spend(2);\n    int int0 = budget0.remaining();\n    assertEquals(3, int0);\n}";

pub const SPEND_REWRITE: &str = "```java\n@Test(timeout = 4000)\npublic void test0() throws Throwable {\n    // Given a budget of five\n    Budget budget = new Budget(5);\n    // When two are spent\n    budget.spend(2);\n    int remaining = budget.remaining();\n    // Then three remain\n    assertEquals(3, remaining);\n}\n```";
