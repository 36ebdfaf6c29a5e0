//! Structural components: AST subtree match and def-use dataflow match.

use crate::testlang::{normalize, statement_uses, Expr, NormalizeOptions, StatementKind, TestCase};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};

/// Syntax tree with identifier names and literal values already erased.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Node {
    label: &'static str,
    children: Vec<Node>,
}

impl Node {
    fn leaf(label: &'static str) -> Self {
        Node {
            label,
            children: Vec::new(),
        }
    }

    fn branch(label: &'static str, children: Vec<Node>) -> Self {
        Node { label, children }
    }

    fn serialize(&self, out: &mut String) {
        if self.children.is_empty() {
            out.push_str(self.label);
            return;
        }
        out.push('(');
        out.push_str(self.label);
        for c in &self.children {
            out.push(' ');
            c.serialize(out);
        }
        out.push(')');
    }

    fn collect_subtrees(&self, bag: &mut BTreeMap<String, usize>) {
        if self.children.is_empty() {
            return;
        }
        let mut s = String::new();
        self.serialize(&mut s);
        *bag.entry(s).or_insert(0) += 1;
        for c in &self.children {
            c.collect_subtrees(bag);
        }
    }
}

fn args_node(args: &[Expr]) -> Node {
    Node::branch("args", args.iter().map(expr_node).collect())
}

fn expr_node(e: &Expr) -> Node {
    match e {
        Expr::ConstructorCall { args, .. } => Node::branch("new", vec![Node::leaf("type"), args_node(args)]),
        Expr::MethodCall { args, .. } => Node::branch(
            "method_call",
            vec![Node::leaf("ident"), Node::leaf("ident"), args_node(args)],
        ),
        Expr::Literal { kind, .. } => Node::leaf(literal_label(*kind)),
        Expr::VarRef(_) => Node::leaf("ident"),
        Expr::Cast { inner, .. } => Node::branch("cast", vec![Node::leaf("primitive_type"), expr_node(inner)]),
    }
}

fn literal_label(kind: crate::testlang::LiteralKind) -> &'static str {
    use crate::testlang::LiteralKind::*;
    match kind {
        Int => "int_literal",
        Long => "long_literal",
        Float => "float_literal",
        Double => "double_literal",
        String => "string_literal",
        Char => "char_literal",
        Boolean => "boolean_literal",
        Null => "null_literal",
    }
}

pub(crate) fn syntax_tree(test: &TestCase) -> Node {
    let stmts = test
        .code_statements()
        .map(|s| match &s.kind {
            StatementKind::VarDecl { initializer, .. } => Node::branch(
                "var_decl",
                vec![Node::leaf("type"), Node::leaf("ident"), expr_node(initializer)],
            ),
            StatementKind::CallStmt { args, .. } => Node::branch(
                "call",
                vec![Node::leaf("ident"), Node::leaf("ident"), args_node(args)],
            ),
            StatementKind::AssertStmt { message, args, .. } => {
                let mut children = vec![Node::leaf("assert_kind")];
                if message.is_some() {
                    children.push(Node::leaf("string_literal"));
                }
                children.push(args_node(args));
                Node::branch("assert", children)
            }
            StatementKind::Opaque(_) => Node::leaf("opaque"),
            StatementKind::Comment(_) => unreachable!("filtered by code_statements"),
        })
        .collect();
    Node::branch("test", stmts)
}

/// Multiset of serialized subtrees with at least one child.
pub(crate) fn subtree_bag(test: &TestCase) -> BTreeMap<String, usize> {
    let mut bag = BTreeMap::new();
    syntax_tree(test).collect_subtrees(&mut bag);
    bag
}

/// Fraction of the reference's subtrees found in the candidate's multiset.
pub fn ast_match(candidate: &TestCase, reference: &TestCase) -> f64 {
    let refs = subtree_bag(reference);
    let total: usize = refs.values().sum();
    if total == 0 {
        return 1.0;
    }
    let cands = subtree_bag(candidate);
    let matched: usize = refs
        .iter()
        .map(|(k, &n)| n.min(cands.get(k).copied().unwrap_or(0)))
        .sum();
    matched as f64 / total as f64
}

/// A read of a variable defined earlier in the test.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DataflowEdge {
    pub def_var: String,
    /// (code statement index, use ordinal within that statement)
    pub use_site: (usize, usize),
}

/// Def-use edges over the code statements of `test`, names as given.
pub fn dataflow_edges(test: &TestCase) -> BTreeSet<DataflowEdge> {
    let mut defined: HashSet<&str> = HashSet::new();
    let mut edges = BTreeSet::new();
    for (idx, s) in test.code_statements().enumerate() {
        for (ord, name) in statement_uses(&s.kind).into_iter().enumerate() {
            if defined.contains(name) {
                edges.insert(DataflowEdge {
                    def_var: name.to_string(),
                    use_site: (idx, ord),
                });
            }
        }
        if let StatementKind::VarDecl { var_name, .. } = &s.kind {
            defined.insert(var_name);
        }
    }
    edges
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataflowScore {
    pub score: f64,
    /// The reference has no edges, so the score is fixed at 1.0.
    pub degenerate: bool,
}

pub fn dataflow_match(candidate: &TestCase, reference: &TestCase) -> DataflowScore {
    let rename = NormalizeOptions {
        alpha_rename: true,
        ..Default::default()
    };
    let refs = dataflow_edges(&normalize(reference, rename));
    if refs.is_empty() {
        return DataflowScore {
            score: 1.0,
            degenerate: true,
        };
    }
    let cands = dataflow_edges(&normalize(candidate, rename));
    let common = refs.intersection(&cands).count();
    DataflowScore {
        score: common as f64 / refs.len() as f64,
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testlang::parse_test_case;

    fn tc(body: &str) -> TestCase {
        parse_test_case(&format!("public void t() {{\n{body}\n}}")).unwrap()
    }

    #[test]
    fn self_match_is_one() {
        let t = tc("Budget b = new Budget(5);\nb.spend(2);\nassertTrue(b.isEmpty());");
        assert_eq!(ast_match(&t, &t), 1.0);
        assert_eq!(dataflow_match(&t, &t).score, 1.0);
    }

    #[test]
    fn renames_do_not_move_structure() {
        let a = tc("Budget b = new Budget(5);\nb.spend(2);\nassertTrue(b.isEmpty());");
        let b = tc("Budget wallet = new Budget(5);\nwallet.spend(2);\nassertTrue(wallet.isEmpty());");
        assert_eq!(ast_match(&b, &a), 1.0);
        assert_eq!(dataflow_match(&b, &a).score, 1.0);
    }

    #[test]
    fn no_uses_is_degenerate() {
        let t = tc("int a = 1;\nassertEquals(1, 1);");
        let d = dataflow_match(&t, &t);
        assert_eq!(d.score, 1.0);
        assert!(d.degenerate);
    }

    #[test]
    fn serialization_erases_names_and_values() {
        let t = tc("Foo f = new Foo((byte)1, x.y(\"s\"));");
        let mut s = String::new();
        syntax_tree(&t).serialize(&mut s);
        assert_eq!(
            s,
            "(test (var_decl type ident (new type (args (cast primitive_type int_literal) (method_call ident ident (args string_literal))))))"
        );
    }

    #[test]
    fn edges_only_point_backwards() {
        let t = tc("a.b();\nFoo a = new Foo();\na.c(a);");
        let e = dataflow_edges(&t);
        assert_eq!(
            e.into_iter().map(|e| e.use_site).collect::<Vec<_>>(),
            vec![(2, 0), (2, 1)]
        );
    }
}
