//! Command-line entry point: configuration, corpus walking, backend
//! selection, output and report emission. This is the only module that
//! walks the filesystem.

use crate::codebleu::{codebleu, MetricParams};
use crate::llmclient::{Cassette, HttpBackend, LlmBackend, RecordingBackend, ReplayBackend, ScriptedBackend};
use crate::llmclient::DEFAULT_ENDPOINT;
use crate::pipeline::{Pipeline, PipelineConfig, PipelineError, SkippedInput, SuiteInput, SuiteReport, VerifierCommand};
use crate::testlang::{parse_test_file, render, RenderStyle};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_TEST_ERROR: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Http,
    Replay,
    Scripted,
}

#[derive(Debug, Parser)]
#[command(name = "testclarify", version, about = "Rewrites generated unit tests into readable ones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enhance every test found under the input directory.
    Enhance(Box<EnhanceArgs>),
    /// Print the similarity of a candidate test to a reference test as JSON.
    Score {
        candidate: PathBuf,
        reference: PathBuf,
    },
}

#[derive(Debug, Args, Default)]
struct EnhanceArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Directory holding `Foo.txt` for each `Foo_test.txt`.
    #[arg(long)]
    class_sources: Option<PathBuf>,
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
    #[arg(long)]
    cassette: Option<PathBuf>,
    /// Append live responses to the cassette (http backend only).
    #[arg(long)]
    record: bool,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    strict_logic: bool,
    /// Leave the wall-clock duration out of the report.
    #[arg(long)]
    no_duration: bool,
    #[arg(long)]
    report: Option<PathBuf>,
    /// External verifier command; `{file}` is replaced by the test path.
    #[arg(long)]
    verifier_cmd: Option<String>,
    /// JSON responses for the scripted backend: a list, or an object of
    /// lists keyed by stage tag.
    #[arg(long)]
    script: Option<PathBuf>,
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// The configuration file, every field optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfigFile {
    pub input_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub class_sources_dir: Option<PathBuf>,
    pub backend: Option<BackendKind>,
    pub cassette_path: Option<PathBuf>,
    pub record: Option<bool>,
    pub endpoint: Option<String>,
    pub script_path: Option<PathBuf>,
    pub pipeline: Option<PipelineConfig>,
    pub report_path: Option<PathBuf>,
    pub workers: Option<usize>,
    pub no_duration: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub class_sources_dir: Option<PathBuf>,
    pub backend: BackendKind,
    pub cassette_path: Option<PathBuf>,
    pub record: bool,
    pub endpoint: String,
    pub script_path: Option<PathBuf>,
    pub pipeline: PipelineConfig,
    pub report_path: PathBuf,
    pub workers: usize,
    pub no_duration: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

impl RunConfig {
    fn resolve(args: EnhanceArgs, env: &BTreeMap<String, String>) -> Result<Self, HarnessError> {
        let file = match &args.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| HarnessError::Config(format!("--config {}: {e}", p.display())))?;
                serde_json::from_str::<RunConfigFile>(&text)
                    .map_err(|e| HarnessError::Config(format!("--config {}: {e}", p.display())))?
            }
            None => RunConfigFile::default(),
        };
        let input_dir = args
            .input
            .or(file.input_dir)
            .ok_or_else(|| HarnessError::Config("missing --input".into()))?;
        let output_dir = args
            .output
            .or(file.output_dir)
            .ok_or_else(|| HarnessError::Config("missing --output".into()))?;
        let mut pipeline = file.pipeline.unwrap_or_default();
        if let Some(m) = args.model.or_else(|| env.get("LLM_MODEL").cloned()) {
            pipeline.llm.model = m;
        }
        if let Some(t) = args.threshold {
            pipeline.codebleu_threshold = t;
        }
        if args.strict_logic {
            pipeline.strict_logic_check = true;
        }
        if let Some(cmd) = args.verifier_cmd {
            pipeline.verifier = VerifierCommand::external(cmd);
        }
        let workers = args.workers.or(file.workers).unwrap_or(pipeline.workers);
        pipeline.workers = workers;
        let cfg = RunConfig {
            report_path: args
                .report
                .or(file.report_path)
                .unwrap_or_else(|| output_dir.join("report.json")),
            input_dir,
            output_dir,
            class_sources_dir: args.class_sources.or(file.class_sources_dir),
            backend: args.backend.or(file.backend).unwrap_or_default(),
            cassette_path: args.cassette.or(file.cassette_path),
            record: args.record || file.record.unwrap_or(false),
            endpoint: args
                .endpoint
                .or_else(|| env.get("LLM_ENDPOINT").cloned())
                .or(file.endpoint)
                .unwrap_or_else(|| DEFAULT_ENDPOINT.to_string()),
            script_path: args.script.or(file.script_path),
            pipeline,
            workers,
            no_duration: args.no_duration || file.no_duration.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        match self.backend {
            BackendKind::Replay if self.cassette_path.is_none() => {
                return Err(HarnessError::Config("the replay backend needs --cassette".into()))
            }
            BackendKind::Scripted if self.script_path.is_none() => {
                return Err(HarnessError::Config("the scripted backend needs --script".into()))
            }
            _ => {}
        }
        if self.record {
            if self.backend != BackendKind::Http {
                return Err(HarnessError::Config("--record needs the http backend".into()));
            }
            if self.cassette_path.is_none() {
                return Err(HarnessError::Config("--record needs --cassette".into()));
            }
        }
        if !self.input_dir.is_dir() {
            return Err(HarnessError::Config(format!(
                "--input {} is not a directory",
                self.input_dir.display()
            )));
        }
        self.pipeline
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn backend(&self) -> Result<Box<dyn LlmBackend>, HarnessError> {
        let cassette = || self.cassette_path.clone().expect("validated");
        Ok(match self.backend {
            BackendKind::Http => {
                let http = HttpBackend::new(&self.endpoint).map_err(|e| HarnessError::Config(e.to_string()))?;
                if self.record {
                    Box::new(RecordingBackend::open(http, cassette()).map_err(|e| HarnessError::Config(e.to_string()))?)
                } else {
                    Box::new(http)
                }
            }
            BackendKind::Replay => Box::new(ReplayBackend::strict(
                Cassette::load(&cassette()).map_err(|e| HarnessError::Config(e.to_string()))?,
            )),
            BackendKind::Scripted => Box::new(load_script(self.script_path.as_deref().expect("validated"))?),
        })
    }
}

fn load_script(path: &Path) -> Result<ScriptedBackend, HarnessError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Script {
        Sequence(Vec<String>),
        ByStage(BTreeMap<String, Vec<String>>),
    }
    let bad = |e: String| HarnessError::Config(format!("--script {}: {e}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    Ok(match serde_json::from_str::<Script>(&text).map_err(|e| bad(e.to_string()))? {
        Script::Sequence(r) => ScriptedBackend::new(r),
        Script::ByStage(m) => m
            .into_iter()
            .fold(ScriptedBackend::default(), |b, (stage, r)| b.with_stage(&stage, r)),
    })
}

/// Test files under `input_dir` in path order, with the files that could
/// not be read or parsed.
pub fn load_corpus(input_dir: &Path, class_sources_dir: Option<&Path>) -> (Vec<SuiteInput>, Vec<SkippedInput>) {
    let mut inputs = Vec::new();
    let mut skipped = Vec::new();
    let walker = walkdir::WalkDir::new(input_dir).sort_by_file_name();
    for entry in walker.into_iter().filter_map(Result::ok) {
        let path = entry.path();
        let ext = path.extension().and_then(|e| e.to_str());
        if !entry.file_type().is_file() || !matches!(ext, Some("txt" | "java")) {
            continue;
        }
        let origin = path
            .strip_prefix(input_dir)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/");
        let tests = std::fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|text| parse_test_file(&text).map_err(|e| e.to_string()));
        let tests = match tests {
            Ok(t) => t,
            Err(reason) => {
                log::warn!("skipping {origin}: {reason}");
                skipped.push(SkippedInput { path: origin, reason });
                continue;
            }
        };
        let class_source = class_sources_dir.and_then(|dir| class_source_for(path, dir));
        if class_sources_dir.is_some() && class_source.is_none() {
            log::info!("no class source for {origin}; data refinement is skipped");
        }
        inputs.extend(tests.into_iter().map(|test| SuiteInput {
            test,
            class_source: class_source.clone(),
            origin: origin.clone(),
        }));
    }
    (inputs, skipped)
}

/// `Foo_test.txt` pairs with `Foo.txt` (or `Foo.java`).
fn class_source_for(test_file: &Path, dir: &Path) -> Option<String> {
    let stem = test_file.file_stem()?.to_str()?;
    let class = stem.strip_suffix("_test").unwrap_or(stem);
    ["txt", "java"]
        .iter()
        .find_map(|ext| std::fs::read_to_string(dir.join(format!("{class}.{ext}"))).ok())
}

pub fn emit_report(report: &SuiteReport, path: &Path) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| HarnessError::Io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, report.to_json()).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

/// Runs `enhance` with a resolved configuration and returns the exit code.
pub fn run_enhance(cfg: &RunConfig) -> Result<(SuiteReport, i32), HarnessError> {
    run_enhance_with(cfg, cfg.backend()?.as_ref())
}

/// [`run_enhance`] with a caller-supplied backend in place of the
/// configured one.
pub fn run_enhance_with(cfg: &RunConfig, backend: &dyn LlmBackend) -> Result<(SuiteReport, i32), HarnessError> {
    let (inputs, skipped) = load_corpus(&cfg.input_dir, cfg.class_sources_dir.as_deref());
    log::info!("{} tests from {}, {} files skipped", inputs.len(), cfg.input_dir.display(), skipped.len());
    let run = Pipeline::new(backend, &cfg.pipeline)
        .enhance_suite(&inputs)
        .map_err(|e| match e {
            PipelineError::Config(m) => HarnessError::Config(m),
            other => HarnessError::Io(other.to_string()),
        })?;

    let baseline_dir = cfg.output_dir.join("baseline");
    std::fs::create_dir_all(&baseline_dir).map_err(|e| HarnessError::Io(format!("{}: {e}", baseline_dir.display())))?;
    for t in &run.tests {
        write_file(
            &baseline_dir.join(format!("{}.txt", t.outcome.name)),
            &render(&t.baseline, RenderStyle::WithComments),
        )?;
        if let Some(out) = &t.output {
            write_file(
                &cfg.output_dir.join(format!("{}.txt", out.name)),
                &render(out, RenderStyle::WithComments),
            )?;
        }
    }

    let mut report = run.report;
    report.skipped_inputs = skipped;
    if cfg.no_duration {
        report.duration_ms = None;
    }
    emit_report(&report, &cfg.report_path)?;
    let code = if report.errors() > 0 { EXIT_TEST_ERROR } else { EXIT_OK };
    Ok((report, code))
}

fn run_score(candidate: &Path, reference: &Path) -> Result<String, HarnessError> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| HarnessError::Io(format!("{}: {e}", p.display())));
    let score = codebleu(&read(candidate)?, &read(reference)?, &MetricParams::default())
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(serde_json::to_string_pretty(&score).expect("score serializes"))
}

/// Parses `args` (program name first) and runs the chosen subcommand.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env: BTreeMap<String, String> = ["LLM_ENDPOINT", "LLM_MODEL"]
        .iter()
        .filter_map(|k| std::env::var(k).ok().map(|v| (k.to_string(), v)))
        .collect();
    run_cli_with_env(args, &env)
}

/// [`run_cli`] with an explicit environment.
pub fn run_cli_with_env<I, T>(args: I, env: &BTreeMap<String, String>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Enhance(args) => RunConfig::resolve(*args, env).and_then(|cfg| run_enhance(&cfg)).map(|(report, code)| {
            let t = report.totals;
            let p = report.percentages;
            println!(
                "{} tests: {} improved ({:.2}%), {} stagnated ({:.2}%), {} reverted ({:.2}%), {} files skipped",
                t.tests,
                t.improved,
                p.improved_pct,
                t.stagnated,
                p.stagnated_pct,
                t.reverted,
                p.reverted_pct,
                report.skipped_inputs.len()
            );
            code
        }),
        Command::Score { candidate, reference } => run_score(&candidate, &reference).map(|json| {
            println!("{json}");
            EXIT_OK
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                HarnessError::Config(_) => EXIT_CONFIG,
                HarnessError::Io(_) => EXIT_TEST_ERROR,
            }
        }
    }
}
