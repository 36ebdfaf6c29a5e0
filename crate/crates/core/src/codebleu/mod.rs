//! Code similarity used to gate post-processing: token n-gram match,
//! keyword-weighted n-gram match, AST subtree match and dataflow match,
//! blended by fixed weights.
//!
//! Scores are computed on comment-stripped renders, so adding comments never
//! moves the metric. AST and dataflow components erase identifier names, so
//! a pure rename keeps both at 1.0.

mod ngram;
mod structure;

pub use ngram::{ngram_match, weighted_ngram_match};
pub use structure::{ast_match, dataflow_edges, dataflow_match, DataflowEdge, DataflowScore};

use crate::testlang::{self, lexer, RenderStyle, TestCase};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("token list is empty")]
    EmptyInput,
    #[error("max_n must be at least 1")]
    InvalidMaxN,
    #[error("keyword weight must be finite and non-negative, got {0}")]
    InvalidKeywordWeight(f64),
    #[error("weights must be non-negative and sum to 1, got {0:?}")]
    WeightSumInvalid([f64; 4]),
    #[error("{side} does not parse: {source}")]
    ParseFailure {
        side: Side,
        #[source]
        source: testlang::ParseError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Candidate,
    Reference,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Candidate => "candidate",
            Side::Reference => "reference",
        })
    }
}

/// Blend weights for (ngram, weighted ngram, ast, dataflow).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub ast: f64,
    pub dataflow: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            ngram: 0.25,
            weighted_ngram: 0.25,
            ast: 0.25,
            dataflow: 0.25,
        }
    }
}

impl Weights {
    pub fn as_array(&self) -> [f64; 4] {
        [self.ngram, self.weighted_ngram, self.ast, self.dataflow]
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        let w = self.as_array();
        let ok = w.iter().all(|x| x.is_finite() && *x >= 0.0) && (w.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
        if ok {
            Ok(())
        } else {
            Err(MetricError::WeightSumInvalid(w))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    pub weights: Weights,
    pub max_n: usize,
    pub keyword_weight: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams {
            weights: Weights::default(),
            max_n: 4,
            keyword_weight: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuScore {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub ast_match: f64,
    pub dataflow_match: f64,
    pub dataflow_degenerate: bool,
    pub weights: Weights,
    pub combined: f64,
}

impl CodeBleuScore {
    fn from_components(
        ngram: f64,
        weighted_ngram: f64,
        ast_match: f64,
        dataflow: DataflowScore,
        weights: Weights,
    ) -> Self {
        let mut s = CodeBleuScore {
            ngram,
            weighted_ngram,
            ast_match,
            dataflow_match: dataflow.score,
            dataflow_degenerate: dataflow.degenerate,
            weights,
            combined: 0.0,
        };
        s.combined = s.combine(&weights);
        s
    }

    /// Weighted blend of the stored components.
    pub fn combine(&self, w: &Weights) -> f64 {
        (w.ngram * self.ngram
            + w.weighted_ngram * self.weighted_ngram
            + w.ast * self.ast_match
            + w.dataflow * self.dataflow_match)
            .clamp(0.0, 1.0)
    }

    /// Same components under different weights.
    pub fn reweighted(&self, w: Weights) -> Result<Self, MetricError> {
        w.validate()?;
        let mut s = *self;
        s.weights = w;
        s.combined = s.combine(&w);
        Ok(s)
    }
}

/// Lexemes of the comment-stripped render, the token stream both n-gram
/// components see.
pub fn metric_tokens(test: &TestCase) -> Vec<String> {
    lexer::lexemes(&testlang::render(test, RenderStyle::Stripped))
}

/// Scores two parsed tests.
pub fn codebleu_tests(
    candidate: &TestCase,
    reference: &TestCase,
    params: &MetricParams,
) -> Result<CodeBleuScore, MetricError> {
    params.weights.validate()?;
    let c = metric_tokens(candidate);
    let r = metric_tokens(reference);
    let ngram = ngram_match(&c, &r, params.max_n)?;
    let weighted = weighted_ngram_match(&c, &r, params.max_n, params.keyword_weight)?;
    Ok(CodeBleuScore::from_components(
        ngram,
        weighted,
        ast_match(candidate, reference),
        dataflow_match(candidate, reference),
        params.weights,
    ))
}

/// Parses both texts as test methods and scores them.
pub fn codebleu(candidate: &str, reference: &str, params: &MetricParams) -> Result<CodeBleuScore, MetricError> {
    params.weights.validate()?;
    let cand = testlang::parse_test_case(candidate).map_err(|source| MetricError::ParseFailure {
        side: Side::Candidate,
        source,
    })?;
    let refr = testlang::parse_test_case(reference).map_err(|source| MetricError::ParseFailure {
        side: Side::Reference,
        source,
    })?;
    codebleu_tests(&cand, &refr, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    const REF: &str = "@Test\npublic void test0() {\n  WeaponGameData weaponGameData0 = new WeaponGameData(0, 0, 0, \"x\", \"\", 0);\n  WeaponGameData weaponGameData1 = new WeaponGameData(0, 1, 0, \"x\", \"\", 0);\n  boolean boolean0 = weaponGameData0.equals(weaponGameData1);\n  assertFalse(boolean0);\n}";

    #[test]
    fn self_similarity() {
        let s = codebleu(REF, REF, &MetricParams::default()).unwrap();
        assert!((s.combined - 1.0).abs() < 1e-12);
    }

    #[test]
    fn comments_do_not_move_the_score() {
        let commented = REF.replace("  boolean boolean0", "  // When compared\n  boolean boolean0");
        let s = codebleu(&commented, REF, &MetricParams::default()).unwrap();
        assert!((s.combined - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rename_passes_the_gate() {
        let renamed = REF
            .replace("weaponGameData0", "defaultWeapon")
            .replace("weaponGameData1", "customWeapon")
            .replace("boolean0", "same");
        let s = codebleu(&renamed, REF, &MetricParams::default()).unwrap();
        assert_eq!(s.ast_match, 1.0);
        assert_eq!(s.dataflow_match, 1.0);
        assert!(s.combined >= 0.5);
        assert!(s.ngram < 1.0);
    }

    #[test]
    fn bad_weights_and_parse_failures() {
        let mut p = MetricParams::default();
        p.weights.ast = 0.5;
        assert!(matches!(codebleu(REF, REF, &p), Err(MetricError::WeightSumInvalid(_))));
        assert!(matches!(
            codebleu("nope", REF, &MetricParams::default()),
            Err(MetricError::ParseFailure { side: Side::Candidate, .. })
        ));
        assert!(matches!(
            codebleu(REF, "public void t() { }", &MetricParams::default()),
            Err(MetricError::ParseFailure { side: Side::Reference, .. })
        ));
    }

    #[test]
    fn combined_is_the_weighted_sum() {
        let other = REF.replace("0, 1, 0", "7, 7, 7");
        let s = codebleu(&other, REF, &MetricParams::default()).unwrap();
        let manual = 0.25 * (s.ngram + s.weighted_ngram + s.ast_match + s.dataflow_match);
        assert!((s.combined - manual).abs() < 1e-12);
    }
}
