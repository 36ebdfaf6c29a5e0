use serde::{Deserialize, Serialize};
use std::fmt;

/// One linear unit-test method.
///
/// Equality is structural and ignores [`TestCase::source_span`], so a test
/// parsed from two different layouts of the same code compares equal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestCase {
    pub name: String,
    pub statements: Vec<Statement>,
    /// `//` comments that appear above the annotations.
    pub leading_comments: Vec<String>,
    /// Annotation lines (e.g. `@Test(timeout = 4000)`), verbatim.
    pub annotations: Vec<String>,
    /// Exception types in the `throws` clause.
    pub throws: Vec<String>,
    /// 1-based (start line, end line) in the parsed source.
    pub source_span: (usize, usize),
}

impl PartialEq for TestCase {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.statements == other.statements
            && self.leading_comments == other.leading_comments
            && self.annotations == other.annotations
            && self.throws == other.throws
    }
}

impl Eq for TestCase {}

impl TestCase {
    pub fn new(name: impl Into<String>, statements: Vec<Statement>) -> Self {
        TestCase {
            name: name.into(),
            statements,
            leading_comments: Vec::new(),
            annotations: vec!["@Test".to_string()],
            throws: Vec::new(),
            source_span: (0, 0),
        }
    }

    /// Non-comment statements.
    pub fn code_statements(&self) -> impl Iterator<Item = &Statement> {
        self.statements.iter().filter(|s| !s.is_comment())
    }

    /// Every comment in render order, without the `//` marker.
    pub fn comments(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.leading_comments.iter().map(String::as_str).collect();
        for s in &self.statements {
            out.extend(s.attached_comments.iter().map(String::as_str));
            if let StatementKind::Comment(c) = &s.kind {
                out.push(c);
            }
        }
        out
    }

    /// Names declared by `VarDecl` statements, in declaration order.
    pub fn declared_vars(&self) -> Vec<&str> {
        self.statements
            .iter()
            .filter_map(|s| match &s.kind {
                StatementKind::VarDecl { var_name, .. } => Some(var_name.as_str()),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub kind: StatementKind,
    /// Comments immediately preceding this statement.
    pub attached_comments: Vec<String>,
}

impl Statement {
    pub fn new(kind: StatementKind) -> Self {
        Statement {
            kind,
            attached_comments: Vec::new(),
        }
    }

    pub fn comment(text: impl Into<String>) -> Self {
        Statement::new(StatementKind::Comment(text.into()))
    }

    pub fn is_comment(&self) -> bool {
        matches!(self.kind, StatementKind::Comment(_))
    }

    pub fn is_opaque(&self) -> bool {
        matches!(self.kind, StatementKind::Opaque(_))
    }

    /// Top-level expressions of the statement, in source order.
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StatementKind::VarDecl { initializer, .. } => vec![initializer],
            StatementKind::CallStmt { args, .. } | StatementKind::AssertStmt { args, .. } => {
                args.iter().collect()
            }
            StatementKind::Comment(_) | StatementKind::Opaque(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatementKind {
    VarDecl {
        type_name: String,
        var_name: String,
        initializer: Expr,
    },
    CallStmt {
        receiver: String,
        method: String,
        args: Vec<Expr>,
    },
    AssertStmt {
        kind: AssertKind,
        /// Message literal lexeme, quotes included.
        message: Option<String>,
        args: Vec<Expr>,
    },
    Comment(String),
    /// A line (or bracket-balanced group of lines) outside the grammar, kept
    /// verbatim with per-line indentation trimmed.
    Opaque(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AssertKind {
    AssertEquals,
    AssertTrue,
    AssertFalse,
    AssertNull,
    AssertNotNull,
    AssertSame,
    AssertNotSame,
    Fail,
}

impl AssertKind {
    pub const ALL: [AssertKind; 8] = [
        AssertKind::AssertEquals,
        AssertKind::AssertTrue,
        AssertKind::AssertFalse,
        AssertKind::AssertNull,
        AssertKind::AssertNotNull,
        AssertKind::AssertSame,
        AssertKind::AssertNotSame,
        AssertKind::Fail,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AssertKind::AssertEquals => "assertEquals",
            AssertKind::AssertTrue => "assertTrue",
            AssertKind::AssertFalse => "assertFalse",
            AssertKind::AssertNull => "assertNull",
            AssertKind::AssertNotNull => "assertNotNull",
            AssertKind::AssertSame => "assertSame",
            AssertKind::AssertNotSame => "assertNotSame",
            AssertKind::Fail => "fail",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        AssertKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Argument count without the optional leading message.
    pub(crate) fn base_arity(self) -> usize {
        match self {
            AssertKind::AssertEquals | AssertKind::AssertSame | AssertKind::AssertNotSame => 2,
            AssertKind::Fail => 0,
            _ => 1,
        }
    }
}

impl fmt::Display for AssertKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    ConstructorCall {
        type_name: String,
        args: Vec<Expr>,
    },
    MethodCall {
        receiver: String,
        method: String,
        args: Vec<Expr>,
    },
    Literal {
        kind: LiteralKind,
        lexeme: String,
    },
    VarRef(String),
    Cast {
        to: String,
        inner: Box<Expr>,
    },
}

impl Expr {
    pub fn literal(kind: LiteralKind, lexeme: impl Into<String>) -> Self {
        Expr::Literal {
            kind,
            lexeme: lexeme.into(),
        }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::VarRef(name.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LiteralKind {
    Int,
    Long,
    Float,
    Double,
    String,
    Char,
    Boolean,
    Null,
}

impl LiteralKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LiteralKind::Int => "int",
            LiteralKind::Long => "long",
            LiteralKind::Float => "float",
            LiteralKind::Double => "double",
            LiteralKind::String => "string",
            LiteralKind::Char => "char",
            LiteralKind::Boolean => "boolean",
            LiteralKind::Null => "null",
        }
    }
}

pub const PRIMITIVE_TYPES: &[&str] = &[
    "byte", "short", "int", "long", "float", "double", "char", "boolean",
];

/// Shape of one call site, ignoring argument values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CallSignature {
    Constructor {
        type_name: String,
        arity: usize,
    },
    Instance {
        receiver: String,
        method: String,
        arity: usize,
    },
    Static {
        type_name: String,
        method: String,
        arity: usize,
    },
}

impl CallSignature {
    pub fn arity(&self) -> usize {
        match self {
            CallSignature::Constructor { arity, .. }
            | CallSignature::Instance { arity, .. }
            | CallSignature::Static { arity, .. } => *arity,
        }
    }

    /// Same call target with the arity erased.
    pub fn same_target(&self, other: &CallSignature) -> bool {
        match (self, other) {
            (
                CallSignature::Constructor { type_name: a, .. },
                CallSignature::Constructor { type_name: b, .. },
            ) => a == b,
            (
                CallSignature::Instance { receiver: a, method: m, .. },
                CallSignature::Instance { receiver: b, method: n, .. },
            )
            | (
                CallSignature::Static { type_name: a, method: m, .. },
                CallSignature::Static { type_name: b, method: n, .. },
            ) => a == b && m == n,
            _ => false,
        }
    }
}

impl fmt::Display for CallSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CallSignature::Constructor { type_name, arity } => write!(f, "new {type_name}/{arity}"),
            CallSignature::Instance { receiver, method, arity } => {
                write!(f, "{receiver}.{method}/{arity}")
            }
            CallSignature::Static { type_name, method, arity } => {
                write!(f, "{type_name}::{method}/{arity}")
            }
        }
    }
}

/// True for letters, digits and underscore, not starting with a digit.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
