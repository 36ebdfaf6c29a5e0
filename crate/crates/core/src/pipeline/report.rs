use super::Verdict;
use crate::codebleu::CodeBleuScore;
use crate::repair::RepairLog;
use serde::{Deserialize, Serialize, Serializer};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Improved,
    Stagnated,
    Reverted,
}

/// Completions issued for one test, by stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionCounts {
    pub refine: usize,
    pub post_process: usize,
    pub naming: usize,
}

impl CompletionCounts {
    pub fn total(&self) -> usize {
        self.refine + self.post_process + self.naming
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnhancementOutcome {
    /// Name of the emitted test.
    pub name: String,
    pub baseline_name: String,
    /// Input file the test came from.
    pub origin: String,
    /// True when the baseline is a Stage-1 refinement rather than an input test.
    pub refined: bool,
    pub kind: OutcomeKind,
    /// Stage-2 completions.
    pub attempts_used: usize,
    pub completions: CompletionCounts,
    pub repair_log: RepairLog,
    pub final_score: Option<CodeBleuScore>,
    pub verdict: Option<Verdict>,
    /// The final test was an unstable baseline and is not emitted.
    pub dropped: bool,
    pub error: Option<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub tests: usize,
    pub improved: usize,
    pub stagnated: usize,
    pub reverted: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Percentages {
    #[serde(serialize_with = "two_decimals")]
    pub improved_pct: f64,
    #[serde(serialize_with = "two_decimals")]
    pub stagnated_pct: f64,
    #[serde(serialize_with = "two_decimals")]
    pub reverted_pct: f64,
}

fn two_decimals<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    let raw = serde_json::value::RawValue::from_string(format!("{v:.2}")).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

impl Percentages {
    /// Largest-remainder rounding to hundredths of a percent, so the three
    /// values sum to exactly 100.00 whenever `tests > 0`.
    pub fn from_totals(t: &Totals) -> Self {
        if t.tests == 0 {
            return Percentages::default();
        }
        let counts = [t.improved, t.stagnated, t.reverted];
        let scaled: Vec<(usize, usize)> = counts
            .iter()
            .map(|&c| ((c * 10_000) / t.tests, (c * 10_000) % t.tests))
            .collect();
        let mut units: Vec<usize> = scaled.iter().map(|&(q, _)| q).collect();
        let mut left = 10_000 - units.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| scaled[b].1.cmp(&scaled[a].1).then(a.cmp(&b)));
        for i in order {
            if left == 0 {
                break;
            }
            if scaled[i].1 > 0 {
                units[i] += 1;
                left -= 1;
            }
        }
        Percentages {
            improved_pct: units[0] as f64 / 100.0,
            stagnated_pct: units[1] as f64 / 100.0,
            reverted_pct: units[2] as f64 / 100.0,
        }
    }
}

/// Verifier verdicts over every invocation, plus dropped baselines.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyTotals {
    pub passed: usize,
    pub failed: usize,
    pub unstable: usize,
    pub dropped: usize,
}

impl VerifyTotals {
    pub fn record(&mut self, v: &Verdict) {
        match v {
            Verdict::CompiledStable => self.passed += 1,
            Verdict::CompiledUnstable(_) => self.unstable += 1,
            Verdict::CompileError(_) => self.failed += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteShape {
    pub input_tests: usize,
    pub refined_tests: usize,
    pub duplicates_removed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedInput {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub totals: Totals,
    pub percentages: Percentages,
    pub verify: VerifyTotals,
    pub suite: SuiteShape,
    pub skipped_inputs: Vec<SkippedInput>,
    pub outcomes: Vec<EnhancementOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<u64>,
}

impl SuiteReport {
    pub fn new(outcomes: Vec<EnhancementOutcome>, verify: VerifyTotals, suite: SuiteShape) -> Self {
        let mut totals = Totals {
            tests: outcomes.len(),
            ..Default::default()
        };
        for o in &outcomes {
            match o.kind {
                OutcomeKind::Improved => totals.improved += 1,
                OutcomeKind::Stagnated => totals.stagnated += 1,
                OutcomeKind::Reverted => totals.reverted += 1,
            }
        }
        SuiteReport {
            schema_version: SCHEMA_VERSION,
            totals,
            percentages: Percentages::from_totals(&totals),
            verify,
            suite,
            skipped_inputs: Vec::new(),
            outcomes,
            duration_ms: None,
        }
    }

    pub fn empty() -> Self {
        SuiteReport::new(Vec::new(), VerifyTotals::default(), SuiteShape::default())
    }

    pub fn errors(&self) -> usize {
        self.outcomes.iter().filter(|o| o.error.is_some()).count()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
