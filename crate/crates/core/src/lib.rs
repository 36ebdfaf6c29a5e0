//! Rewrites machine-generated unit tests into readable ones by asking a
//! language model for better data, names and comments, and accepting an
//! answer only when it keeps the test's logic.
//!
//! - [`testlang`] parses and renders the linear test language.
//! - [`codebleu`] scores a rewrite against its original.
//! - [`repair`] salvages malformed model answers.
//! - [`prompts`] holds the stage templates.
//! - [`llmclient`] talks to a model server, or replays and scripts answers.
//! - [`pipeline`] runs the four stages over a suite and reports outcomes.
//! - [`harness`] is the command-line front end.
//! - [`demo`] is a deterministic offline stand-in for the model.

pub mod codebleu;
pub mod demo;
pub mod harness;
pub mod llmclient;
pub mod pipeline;
pub mod prompts;
pub mod repair;
pub mod testlang;
