use super::report::{CompletionCounts, EnhancementOutcome, OutcomeKind, SuiteReport, SuiteShape, VerifyTotals};
use super::stages::{dedup_survivors, PostProcessResult, RefineResult};
use super::{compile_and_verify, Pipeline, PipelineError, Verdict};
use crate::repair::RepairLog;
use crate::testlang::TestCase;
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::time::Instant;

/// One input test with its optional class-under-test source.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteInput {
    pub test: TestCase,
    pub class_source: Option<String>,
    pub origin: String,
}

/// One emitted test. `output` is `None` when the final test was an
/// unstable baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct EnhancedTest {
    pub baseline: TestCase,
    pub output: Option<TestCase>,
    pub outcome: EnhancementOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRun {
    pub tests: Vec<EnhancedTest>,
    pub report: SuiteReport,
}

struct Baseline {
    test: TestCase,
    origin: String,
    refined: bool,
    refine_completions: usize,
    refine_log: RepairLog,
    error: Option<String>,
}

impl Pipeline<'_> {
    /// Stages 1 to 4 over a whole suite.
    ///
    /// Stage 1 and the first Stage-2 pass run on the worker pool; naming,
    /// verification and the retry cycles run in input order so that name
    /// assignment does not depend on scheduling.
    pub fn enhance_suite(&self, inputs: &[SuiteInput]) -> Result<SuiteRun, PipelineError> {
        self.config.validate()?;
        let started = Instant::now();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers)
            .build()
            .map_err(|e| PipelineError::Config(e.to_string()))?;

        let refined: Vec<Result<RefineResult, PipelineError>> = pool.install(|| {
            inputs
                .par_iter()
                .map(|inp| self.refine_test_data(&inp.test, inp.class_source.as_deref()))
                .collect()
        });
        let (baselines, shape) = self.merge_baselines(inputs, refined);

        let first_pass: Vec<Option<Result<PostProcessResult, PipelineError>>> = pool.install(|| {
            baselines
                .par_iter()
                .map(|b| b.error.is_none().then(|| self.post_process(&b.test, None)))
                .collect()
        });

        let all_names: Vec<String> = baselines.iter().map(|b| b.test.name.clone()).collect();
        let mut committed: Vec<String> = Vec::new();
        let mut verify = VerifyTotals::default();
        let mut tests = Vec::with_capacity(baselines.len());
        for (b, first) in baselines.into_iter().zip(first_pass) {
            let taken: Vec<String> = all_names
                .iter()
                .filter(|n| **n != b.test.name)
                .chain(committed.iter())
                .cloned()
                .collect();
            let t = self.finish_test(b, first, &taken, &mut verify);
            if let Some(out) = &t.output {
                committed.push(out.name.clone());
            }
            tests.push(t);
        }

        verify.dropped = tests.iter().filter(|t| t.outcome.dropped).count();
        let mut report = SuiteReport::new(tests.iter().map(|t| t.outcome.clone()).collect(), verify, shape);
        report.duration_ms = Some(started.elapsed().as_millis() as u64);
        Ok(SuiteRun { tests, report })
    }

    /// Merges originals and Stage-1 results, then makes baseline names
    /// pairwise distinct, ignoring case, by suffixing later duplicates.
    fn merge_baselines(
        &self,
        inputs: &[SuiteInput],
        refined: Vec<Result<RefineResult, PipelineError>>,
    ) -> (Vec<Baseline>, SuiteShape) {
        let mut entries: Vec<Baseline> = Vec::new();
        for (inp, r) in inputs.iter().zip(refined) {
            let mut original = Baseline {
                test: inp.test.clone(),
                origin: inp.origin.clone(),
                refined: false,
                refine_completions: 0,
                refine_log: RepairLog::default(),
                error: None,
            };
            match r {
                Ok(r) if r.changed => {
                    entries.push(original);
                    entries.push(Baseline {
                        test: r.test,
                        origin: inp.origin.clone(),
                        refined: true,
                        refine_completions: r.completions,
                        refine_log: r.repair_log,
                        error: None,
                    });
                }
                Ok(r) => {
                    original.refine_completions = r.completions;
                    entries.push(original);
                }
                Err(e) => {
                    log::error!("refinement of {} failed: {e}", inp.test.name);
                    original.error = Some(e.to_string());
                    entries.push(original);
                }
            }
        }
        let shape = SuiteShape {
            input_tests: inputs.len(),
            refined_tests: entries.iter().filter(|b| b.refined).count(),
            duplicates_removed: 0,
        };
        let tests: Vec<TestCase> = entries.iter().map(|b| b.test.clone()).collect();
        let keep: BTreeSet<usize> = dedup_survivors(&tests).into_iter().collect();
        let mut out: Vec<Baseline> = Vec::with_capacity(keep.len());
        for (i, mut b) in entries.into_iter().enumerate() {
            if keep.contains(&i) {
                out.push(b);
            } else if let Some(last) = out.last_mut().filter(|l| b.refined && l.origin == b.origin && !l.refined) {
                // a refinement that duplicated its original still cost completions
                last.refine_completions += std::mem::take(&mut b.refine_completions);
            }
        }
        let mut used: BTreeSet<String> = BTreeSet::new();
        for b in &mut out {
            if used.contains(&b.test.name.to_lowercase()) {
                let base = b.test.name.clone();
                b.test.name = (2..)
                    .map(|k| format!("{base}_{k}"))
                    .find(|n| !used.contains(&n.to_lowercase()))
                    .expect("suffixes are unbounded");
            }
            used.insert(b.test.name.to_lowercase());
        }
        let shape = SuiteShape {
            duplicates_removed: shape.input_tests + shape.refined_tests - out.len(),
            ..shape
        };
        (out, shape)
    }

    /// Naming, verification and the retry cycle for one baseline.
    fn finish_test(
        &self,
        b: Baseline,
        first: Option<Result<PostProcessResult, PipelineError>>,
        taken: &[String],
        verify: &mut VerifyTotals,
    ) -> EnhancedTest {
        let mut outcome = EnhancementOutcome {
            name: b.test.name.clone(),
            baseline_name: b.test.name.clone(),
            origin: b.origin.clone(),
            refined: b.refined,
            kind: OutcomeKind::Reverted,
            attempts_used: 0,
            completions: CompletionCounts {
                refine: b.refine_completions,
                ..Default::default()
            },
            repair_log: b.refine_log.clone(),
            final_score: None,
            verdict: None,
            dropped: false,
            error: b.error.clone(),
            notes: Vec::new(),
        };

        let result = match first {
            None => Err(None),
            Some(Err(e)) => Err(Some(e)),
            Some(Ok(pp)) => self.ladder(&b.test, pp, taken, &mut outcome, verify).map_err(Some),
        };
        match result {
            Ok(Some(enhanced)) => {
                outcome.kind = OutcomeKind::Improved;
                outcome.name = enhanced.name.clone();
                return EnhancedTest {
                    baseline: b.test,
                    output: Some(enhanced),
                    outcome,
                };
            }
            Ok(None) => {}
            Err(Some(e)) => {
                log::error!("{} failed: {e}", b.test.name);
                outcome.kind = OutcomeKind::Reverted;
                outcome.error = Some(e.to_string());
            }
            Err(None) => {}
        }
        outcome.final_score = None;
        let output = match compile_and_verify(&b.test, &self.config.verifier) {
            Ok(v) => {
                verify.record(&v);
                let unstable = matches!(v, Verdict::CompiledUnstable(_));
                if let Verdict::CompileError(d) = &v {
                    outcome.notes.push(format!("baseline does not compile: {d}"));
                }
                outcome.verdict = Some(v);
                if unstable {
                    outcome.dropped = true;
                    outcome.notes.push("baseline is unstable and was dropped".into());
                    None
                } else {
                    Some(b.test.clone())
                }
            }
            Err(e) => {
                outcome.error.get_or_insert(e.to_string());
                Some(b.test.clone())
            }
        };
        EnhancedTest {
            baseline: b.test,
            output,
            outcome,
        }
    }

    /// Returns the enhanced test, or `None` when the baseline is kept
    /// (`outcome.kind` then says why).
    fn ladder(
        &self,
        baseline: &TestCase,
        mut pp: PostProcessResult,
        taken: &[String],
        outcome: &mut EnhancementOutcome,
        verify: &mut VerifyTotals,
    ) -> Result<Option<TestCase>, PipelineError> {
        let mut cycle = 0;
        loop {
            outcome.attempts_used += pp.completions;
            outcome.completions.post_process += pp.completions;
            if !pp.accepted {
                outcome.notes.extend(pp.rejections.last().cloned());
                outcome.kind = if cycle == 0 {
                    OutcomeKind::Stagnated
                } else {
                    OutcomeKind::Reverted
                };
                return Ok(None);
            }
            let mut candidate = pp.test.clone();
            let named = self.suggest_name(&candidate, taken)?;
            outcome.completions.naming += named.completions;
            candidate.name = named.name;
            let verdict = compile_and_verify(&candidate, &self.config.verifier)?;
            verify.record(&verdict);
            match verdict {
                Verdict::CompiledStable => {
                    let mut log = std::mem::take(&mut outcome.repair_log);
                    log.extend(pp.repair_log);
                    outcome.repair_log = log;
                    outcome.final_score = pp.score;
                    outcome.verdict = Some(Verdict::CompiledStable);
                    return Ok(Some(candidate));
                }
                Verdict::CompiledUnstable(m) => {
                    outcome.notes.push(format!("enhanced test is unstable ({m})"));
                    outcome.kind = OutcomeKind::Reverted;
                    return Ok(None);
                }
                Verdict::CompileError(detail) => {
                    outcome.notes.push(format!("enhanced test failed verification: {detail}"));
                    if cycle == self.config.postprocess_budget {
                        outcome.kind = OutcomeKind::Reverted;
                        return Ok(None);
                    }
                    cycle += 1;
                    let note = format!("An earlier rewrite of this test failed to compile ({detail}).");
                    pp = self.post_process(baseline, Some(&note))?;
                }
            }
        }
    }
}
