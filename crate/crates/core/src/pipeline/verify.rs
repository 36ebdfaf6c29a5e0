use super::{PipelineError, VerifierCommand, VerifierMode};
use crate::testlang::{parse_test_case, render, RenderStyle, TestCase};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::process::Command;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "snake_case")]
pub enum Verdict {
    CompiledStable,
    CompiledUnstable(String),
    CompileError(String),
}

impl Verdict {
    pub fn is_stable(&self) -> bool {
        matches!(self, Verdict::CompiledStable)
    }
}

fn shell_quote(p: &Path) -> String {
    format!("'{}'", p.display().to_string().replace('\'', r"'\''"))
}

fn run_shell(cmd: &str) -> Result<(bool, String), PipelineError> {
    let out = Command::new("sh")
        .arg("-c")
        .arg(cmd)
        .output()
        .map_err(|e| PipelineError::VerifierSpawn(format!("{cmd}: {e}")))?;
    let mut text = String::from_utf8_lossy(&out.stdout).into_owned();
    text.push_str(&String::from_utf8_lossy(&out.stderr));
    Ok((out.status.success(), text))
}

fn first_line(s: &str) -> String {
    s.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("").to_string()
}

/// Compiles and runs one test.
pub fn compile_and_verify(test: &TestCase, verifier: &VerifierCommand) -> Result<Verdict, PipelineError> {
    let source = render(test, RenderStyle::WithComments);
    match verifier.mode {
        VerifierMode::BuiltinSyntax => Ok(match parse_test_case(&source) {
            Ok(_) => Verdict::CompiledStable,
            Err(e) => Verdict::CompileError(e.to_string()),
        }),
        VerifierMode::External => {
            verifier.validate()?;
            let dir = tempfile::tempdir().map_err(|e| PipelineError::VerifierSpawn(e.to_string()))?;
            let path = dir.path().join(format!("{}.java", test.name));
            std::fs::write(&path, &source).map_err(|e| PipelineError::VerifierSpawn(e.to_string()))?;
            let template = &verifier.command_template;
            let cmd = if template.contains("{file}") {
                template.replace("{file}", &shell_quote(&path))
            } else {
                format!("{template} {}", shell_quote(&path))
            };
            let (ok, out) = run_shell(&cmd)?;
            if !ok {
                return Ok(Verdict::CompileError(first_line(&out)));
            }
            let (ok, out) = run_shell(&format!("{cmd} --run"))?;
            if ok {
                return Ok(Verdict::CompiledStable);
            }
            let assertion = verifier.assertion_markers.iter().any(|m| out.contains(m.as_str()));
            let unstable = verifier.unstable_markers.iter().find(|m| out.contains(m.as_str()));
            Ok(match unstable {
                Some(m) if !assertion => Verdict::CompiledUnstable(m.clone()),
                _ => Verdict::CompileError(format!("run failed: {}", first_line(&out))),
            })
        }
    }
}
