//! Reconciles an LLM-refined test against its original, statement by
//! statement, so that hallucinated calls never reach the output.

use super::{RepairAction, RepairError, RepairLog};
use crate::testlang::{
    self, render_statement_kind, signature_set, statement_signatures, statement_uses, CallSignature,
    Statement, StatementKind, TestCase,
};
use std::collections::BTreeSet;

/// Parses refined code as leniently as possible: a full method when a header
/// is present, loose statements otherwise, and line by line as a last resort.
pub(crate) fn lenient_statements(source: &str) -> Vec<Statement> {
    if testlang::has_method_header(source) {
        match testlang::parse_test_file(source) {
            Ok(mut tests) => {
                if tests.len() > 1 {
                    log::warn!("refined response holds {} methods, keeping the first", tests.len());
                }
                return tests.swap_remove(0).statements;
            }
            Err(e) => log::debug!("refined method does not parse ({e}); falling back to lines"),
        }
    } else if let Ok(stmts) = testlang::parse_statements(source) {
        return stmts;
    }
    let mut out = Vec::new();
    for line in source.lines() {
        let t = line.trim();
        if t.is_empty() || t == "}" || t == "{" || t.starts_with('@') || (t.contains("void ") && t.ends_with('{')) {
            continue;
        }
        match testlang::parse_statements(t) {
            Ok(stmts) => out.extend(stmts),
            Err(_) => out.push(Statement::new(StatementKind::Opaque(t.to_string()))),
        }
    }
    out
}

/// Builds the refined test from `refined_source`, keeping the original's
/// header, name and call vocabulary.
pub fn align_refinement(original: &TestCase, refined_source: &str) -> Result<(TestCase, RepairLog), RepairError> {
    let refined: Vec<Statement> = lenient_statements(refined_source)
        .into_iter()
        .filter(|s| !s.is_comment())
        .collect();
    let orig_code: Vec<&Statement> = original.code_statements().collect();
    let orig_sigs = signature_set(original);
    let mut known_vars: BTreeSet<&str> = original.declared_vars().into_iter().collect();
    for s in &refined {
        if let StatementKind::VarDecl { var_name, .. } = &s.kind {
            known_vars.insert(var_name);
        }
    }

    let mut log = RepairLog::default();
    let mut out: Vec<Statement> = Vec::new();
    let mut declared: BTreeSet<String> = BTreeSet::new();
    let mut used_original: BTreeSet<usize> = BTreeSet::new();

    for (i, st) in refined.iter().enumerate() {
        let (candidate, from_original) = match &st.kind {
            StatementKind::Opaque(raw) => match orig_code.get(i) {
                Some(o) if matches!(&o.kind, StatementKind::Opaque(r) if r == raw) => ((*o).clone(), Some(i)),
                Some(o) => {
                    log.push(RepairAction::SubstitutedOriginal { index: i });
                    ((*o).clone(), Some(i))
                }
                None => {
                    log.push(RepairAction::SkippedStatement { text: raw.clone() });
                    continue;
                }
            },
            kind => {
                let mut sigs = BTreeSet::new();
                statement_signatures(kind, &known_vars, &mut sigs);
                if sigs.iter().any(|s| !orig_sigs.iter().any(|o| o.same_target(s))) {
                    log.push(RepairAction::SkippedStatement {
                        text: render_statement_kind(kind),
                    });
                    continue;
                }
                match sigs.iter().find(|s| !orig_sigs.contains(*s)) {
                    Some(bad) => match fallback_for(bad, i, &orig_code, &used_original, &known_vars) {
                        Some(j) => {
                            log.push(RepairAction::ArityFallback {
                                signature: bad.to_string(),
                            });
                            (orig_code[j].clone(), Some(j))
                        }
                        None => {
                            log.push(RepairAction::SkippedStatement {
                                text: render_statement_kind(kind),
                            });
                            continue;
                        }
                    },
                    None => (st.clone(), None),
                }
            }
        };
        if !fits(&candidate.kind, &declared, &known_vars) {
            log.push(RepairAction::SkippedStatement {
                text: render_statement_kind(&candidate.kind),
            });
            continue;
        }
        if let StatementKind::VarDecl { var_name, .. } = &candidate.kind {
            declared.insert(var_name.clone());
        }
        if let Some(j) = from_original {
            used_original.insert(j);
        }
        out.push(Statement::new(candidate.kind));
    }

    if out.is_empty() {
        return Err(RepairError::NothingSalvageable);
    }
    let mut test = original.clone();
    test.statements = out;
    Ok((test, log))
}

/// Original statement to use in place of a call whose arity changed:
/// the one at the same position if it makes that call, else the first
/// unused one that does.
fn fallback_for(
    bad: &CallSignature,
    pos: usize,
    orig_code: &[&Statement],
    used: &BTreeSet<usize>,
    known_vars: &BTreeSet<&str>,
) -> Option<usize> {
    let makes_call = |s: &Statement| {
        let mut sigs = BTreeSet::new();
        statement_signatures(&s.kind, known_vars, &mut sigs);
        sigs.iter().any(|o| o.same_target(bad))
    };
    if orig_code.get(pos).is_some_and(|s| makes_call(s)) {
        return Some(pos);
    }
    (0..orig_code.len()).find(|j| !used.contains(j) && makes_call(orig_code[*j]))
}

/// A statement fits when it does not redeclare a variable and only reads
/// variables that are already declared.
fn fits(kind: &StatementKind, declared: &BTreeSet<String>, known_vars: &BTreeSet<&str>) -> bool {
    if let StatementKind::VarDecl { var_name, .. } = kind {
        if declared.contains(var_name) {
            return false;
        }
    }
    statement_uses(kind)
        .into_iter()
        .all(|u| !known_vars.contains(u) || declared.contains(u))
}
