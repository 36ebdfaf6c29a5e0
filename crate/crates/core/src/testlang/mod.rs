//! The linear test language: a Java-like statement subset in which
//! search-generated unit tests are written.
//!
//! Parsing never fails on a single odd line. Body lines outside the grammar
//! become [`StatementKind::Opaque`] and are carried through untouched, so
//! real-world files survive the whole pipeline.

mod analysis;
mod ast;
pub mod lexer;
mod parser;
mod render;

pub use analysis::{
    normalize, rename_variables, signature_set, statement_signatures, statement_uses, total_length, NormalizeOptions,
};
pub use ast::{
    is_identifier, AssertKind, CallSignature, Expr, LiteralKind, Statement, StatementKind,
    TestCase, PRIMITIVE_TYPES,
};
pub use parser::{has_method_header, parse_statements, parse_test_case, parse_test_file, ParseError};
pub(crate) use parser::RESERVED;
pub use render::{render, render_expr, render_file, render_statement_kind, RenderStyle};

/// Reserved words of the subset language plus the assertion kinds.
pub fn keywords() -> impl Iterator<Item = &'static str> {
    RESERVED
        .iter()
        .copied()
        .chain(PRIMITIVE_TYPES.iter().copied())
        .chain(AssertKind::ALL.iter().map(|k| k.as_str()))
}

pub fn is_keyword(word: &str) -> bool {
    keywords().any(|k| k == word)
}
