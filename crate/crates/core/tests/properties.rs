mod common;

use common::*;
use proptest::prelude::*;
use testclarify::codebleu::{codebleu_tests, ngram_match, weighted_ngram_match, MetricParams, Weights};
use testclarify::pipeline::{merge_and_dedup, Percentages, Totals};
use testclarify::repair::{balance_brackets, demote_prose_lines};
use testclarify::testlang::{
    normalize, parse_test_case, render, NormalizeOptions, RenderStyle, TestCase,
};

/// Builds a well-formed test from a list of (kind, operand, operand) picks.
fn build_test(name: &str, picks: &[(u8, u32, u32)]) -> TestCase {
    let mut lines = vec!["Budget budget0 = new Budget(1);".to_string()];
    let mut budgets = 1;
    let mut ints = 0;
    for &(kind, a, b) in picks {
        let target = format!("budget{}", a % budgets);
        lines.push(match kind % 7 {
            0 => {
                budgets += 1;
                format!("Budget budget{} = new Budget({b});", budgets - 1)
            }
            1 => format!("{target}.spend({b});"),
            2 => {
                ints += 1;
                format!("int int{} = {target}.remaining();", ints - 1)
            }
            3 => format!("assertEquals({b}, {target}.remaining());"),
            4 => format!("assertTrue({target}.isValid());"),
            5 => format!("// note {b}"),
            _ => format!("String string{b} = \"s{a}\";"),
        });
    }
    body(name, &lines.join("\n"))
}

fn picks() -> impl Strategy<Value = Vec<(u8, u32, u32)>> {
    prop::collection::vec((any::<u8>(), any::<u32>(), 0u32..1000), 0..14)
}

fn tokens() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["new", "a", "b", "(", ")", ";", "int", "x", "assertTrue"]), 1..30)
        .prop_map(|v| v.into_iter().map(str::to_string).collect())
}

fn weights() -> impl Strategy<Value = Weights> {
    (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64).prop_filter_map("zero weights", |(a, b, c, d)| {
        let s = a + b + c + d;
        (s > 1e-3).then(|| Weights {
            ngram: a / s,
            weighted_ngram: b / s,
            ast: c / s,
            dataflow: 1.0 - (a + b + c) / s,
        })
    })
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(p in picks()) {
        let t = build_test("test0", &p);
        for style in [RenderStyle::WithComments, RenderStyle::Stripped] {
            let text = render(&t, style);
            let back = parse_test_case(&text).unwrap();
            prop_assert_eq!(render(&back, style), text);
        }
        prop_assert_eq!(parse_test_case(&render(&t, RenderStyle::WithComments)).unwrap(), t);
    }

    #[test]
    fn ngram_agrees_with_brute_force(c in tokens(), r in tokens()) {
        let cs: Vec<&str> = c.iter().map(String::as_str).collect();
        let rs: Vec<&str> = r.iter().map(String::as_str).collect();
        let plain = ngram_match(&c, &r, 4).unwrap();
        prop_assert!((plain - oracle_bleu(&cs, &rs, 4, |_| 1.0)).abs() < 1e-9);
        let kw = |t: &str| if testclarify::testlang::is_keyword(t) { 5.0 } else { 1.0 };
        let weighted = weighted_ngram_match(&c, &r, 4, 5.0).unwrap();
        prop_assert!((weighted - oracle_bleu(&cs, &rs, 4, kw)).abs() < 1e-9);
    }

    #[test]
    fn metric_is_bounded_and_linear(a in picks(), b in picks(), w in weights()) {
        let (x, y) = (build_test("t", &a), build_test("t", &b));
        let s = codebleu_tests(&x, &y, &MetricParams::default()).unwrap();
        for v in [s.ngram, s.weighted_ngram, s.ast_match, s.dataflow_match, s.combined] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        let r = s.reweighted(w).unwrap();
        let expected = w.ngram * s.ngram + w.weighted_ngram * s.weighted_ngram + w.ast * s.ast_match + w.dataflow * s.dataflow_match;
        prop_assert!((r.combined - expected).abs() < 1e-9);
    }

    #[test]
    fn alpha_rename_keeps_structure(p in picks()) {
        let t = build_test("t", &p);
        let renamed = normalize(&t, NormalizeOptions { alpha_rename: true, ..Default::default() });
        let s = codebleu_tests(&renamed, &t, &MetricParams::default()).unwrap();
        prop_assert!((s.ast_match - 1.0).abs() < 1e-9);
        prop_assert!((s.dataflow_match - 1.0).abs() < 1e-9);
    }

    #[test]
    fn demotion_is_idempotent(lines in prop::collection::vec("[ a-zA-Z0-9;(){}./\"]{0,24}", 0..10)) {
        let text = lines.join("\n");
        let (once, _) = demote_prose_lines(&text);
        let (twice, log) = demote_prose_lines(&once);
        prop_assert_eq!(&twice, &once);
        prop_assert!(log.is_empty());
    }

    #[test]
    fn balancing_only_inserts_closers_and_line_breaks(lines in prop::collection::vec("[ a-z0-9;({\\[]{0,16}", 0..8)) {
        let text = lines.join("\n");
        let (out, _) = balance_brackets(&text).unwrap();
        let mut rest = out.chars();
        for c in text.chars() {
            loop {
                let o = rest.next();
                prop_assert!(o.is_some(), "input character {:?} missing from {:?}", c, out);
                let o = o.unwrap();
                if o == c {
                    break;
                }
                prop_assert!(matches!(o, ')' | ']' | '}' | '\n'), "inserted {:?}", o);
            }
        }
        let tail: String = rest.collect();
        prop_assert!(tail.chars().all(|c| matches!(c, ')' | ']' | '}' | '\n')), "tail {:?}", tail);
        let (again, log) = balance_brackets(&out).unwrap();
        prop_assert_eq!(again, out);
        prop_assert!(log.is_empty());
    }

    #[test]
    fn percentages_sum_to_one_hundred(i in 0usize..500, s in 0usize..500, r in 0usize..500) {
        let t = Totals { tests: i + s + r, improved: i, stagnated: s, reverted: r };
        let p = Percentages::from_totals(&t);
        if t.tests > 0 {
            let units = ((p.improved_pct + p.stagnated_pct + p.reverted_pct) * 100.0).round() as usize;
            prop_assert_eq!(units, 10_000);
        }
        for (pct, n) in [(p.improved_pct, i), (p.stagnated_pct, s), (p.reverted_pct, r)] {
            if t.tests > 0 {
                prop_assert!((pct - 100.0 * n as f64 / t.tests as f64).abs() <= 0.01 + 1e-9);
            }
        }
    }

    #[test]
    fn dedup_keeps_one_of_each_normalized_test(a in picks(), b in picks()) {
        let x = build_test("test0", &a);
        let y = build_test("test1", &b);
        let key = |t: &TestCase| {
            let mut n = normalize(t, NormalizeOptions::ALL);
            n.name = String::new();
            render(&n, RenderStyle::Stripped)
        };
        let renamed_x = normalize(&x, NormalizeOptions { alpha_rename: true, ..Default::default() });
        let merged = merge_and_dedup(&[x.clone(), y.clone()], &[renamed_x, y.clone()]);
        prop_assert_eq!(merged.len(), if key(&x) == key(&y) { 1 } else { 2 });
    }
}
