//! Sends one post-processing prompt to a running Ollama-compatible server
//! and prints the repaired answer.
//!
//! cargo run --example live_model [-- <endpoint> [<model>]]
//!
//! Defaults come from LLM_ENDPOINT and LLM_MODEL, then the built-in values.

use testclarify::llmclient::{HttpBackend, LlmBackend, LlmRequest, DEFAULT_ENDPOINT, DEFAULT_MODEL};
use testclarify::prompts::{PromptContext, Stage, TemplateSet};
use testclarify::repair::{balance_brackets, demote_prose_lines, extract_code_block};

const TEST: &str = "@Test\npublic void test0() {\n    Budget budget0 = new Budget(5);\n    budget0.spend(2);\n    assertEquals(3, budget0.remaining());\n}";

fn main() {
    let mut args = std::env::args().skip(1);
    let endpoint = args
        .next()
        .or_else(|| std::env::var("LLM_ENDPOINT").ok())
        .unwrap_or_else(|| DEFAULT_ENDPOINT.into());
    let model = args
        .next()
        .or_else(|| std::env::var("LLM_MODEL").ok())
        .unwrap_or_else(|| DEFAULT_MODEL.into());
    let prompt = TemplateSet::builtin()
        .render(Stage::PostProcess, &PromptContext::for_test(TEST))
        .expect("prompt renders");
    let request = LlmRequest::new(model, prompt, Stage::PostProcess.tag());
    match HttpBackend::new(&endpoint).and_then(|b| b.complete(&request)) {
        Ok(answer) => {
            println!("raw answer:\n{answer}\n");
            match extract_code_block(&answer).and_then(|c| balance_brackets(&demote_prose_lines(&c).0)) {
                Ok((code, _)) => println!("repaired:\n{code}"),
                Err(e) => println!("unusable answer: {e}"),
            }
        }
        Err(e) => {
            eprintln!("{endpoint}: {e}");
            std::process::exit(1);
        }
    }
}
