//! Hallucination-tolerant handling of LLM responses: code extraction,
//! prose demotion, bracket balancing, alignment against the original test,
//! and the post-processing safeguards.

mod align;
mod text;

pub use align::align_refinement;
pub use text::{balance_brackets, demote_prose_lines, extract_code_block, extract_code_block_logged};

use crate::testlang::{normalize, NormalizeOptions, TestCase};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RepairError {
    #[error("response contains no code")]
    NoCodeFound,
    #[error("brackets cannot be balanced at line {line}: {detail}")]
    UnbalancedBeyondRepair { line: usize, detail: String },
    #[error("no statement of the refined test could be salvaged")]
    NothingSalvageable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum RepairAction {
    ExtractedFence,
    DemotedProse { line: usize },
    BalancedBrackets { added: usize },
    SkippedStatement { text: String },
    ArityFallback { signature: String },
    SubstitutedOriginal { index: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RepairLog {
    pub actions: Vec<RepairAction>,
}

impl RepairLog {
    pub fn push(&mut self, a: RepairAction) {
        self.actions.push(a);
    }

    pub fn extend(&mut self, other: RepairLog) {
        self.actions.extend(other.actions);
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }
}

/// In strict mode, true iff both tests normalize to the same statements:
/// identifiers, comments and assertion messages may differ, nothing else.
/// Non-strict mode always passes and leaves the decision to the similarity
/// gate.
pub fn validate_logic_preserved(original: &TestCase, enhanced: &TestCase, strict: bool) -> bool {
    if !strict {
        return true;
    }
    normalize(original, NormalizeOptions::ALL).statements == normalize(enhanced, NormalizeOptions::ALL).statements
}

fn starts_with_word(comment: &str, word: &str) -> bool {
    let c = comment.trim_start_matches('/').trim_start();
    c.len() >= word.len()
        && c[..word.len()].eq_ignore_ascii_case(word)
        && c[word.len()..].chars().next().is_none_or(|ch| !ch.is_ascii_alphanumeric())
}

/// True iff Given, When and Then comments all occur, in that order.
pub fn check_comment_convention(test: &TestCase) -> bool {
    let comments = test.comments();
    let mut it = comments.iter();
    ["given", "when", "then"]
        .iter()
        .all(|w| it.any(|c| starts_with_word(c, w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testlang::parse_test_case;

    const ORIGINAL: &str = "public void test0() {\n  WeaponGameData weaponGameData0 = new WeaponGameData(0, 0);\n  WeaponGameData weaponGameData1 = new WeaponGameData(0, 1);\n  boolean boolean0 = weaponGameData0.equals(weaponGameData1);\n  assertFalse(boolean0);\n}";

    #[test]
    fn rename_comments_and_message_preserve_logic() {
        let original = parse_test_case(ORIGINAL).unwrap();
        let enhanced = parse_test_case(
            "public void test0() {\n  // Given a default weapon\n  WeaponGameData defaultWeapon = new WeaponGameData(0, 0);\n  WeaponGameData customWeapon = new WeaponGameData(0, 1);\n  // When compared\n  boolean same = defaultWeapon.equals(customWeapon);\n  // Then not equal\n  assertFalse(\"weapons should differ\", same);\n}",
        )
        .unwrap();
        assert!(validate_logic_preserved(&original, &enhanced, true));
        assert!(check_comment_convention(&enhanced));
    }

    #[test]
    fn literal_change_breaks_logic() {
        let original = parse_test_case(ORIGINAL).unwrap();
        let changed = parse_test_case(&ORIGINAL.replace("(0, 1)", "(1, 1)")).unwrap();
        assert!(!validate_logic_preserved(&original, &changed, true));
        assert!(validate_logic_preserved(&original, &changed, false));
    }

    #[test]
    fn convention_requires_all_three_in_order() {
        let mut t = parse_test_case(ORIGINAL).unwrap();
        assert!(!check_comment_convention(&t));
        t.statements[0].attached_comments = vec!["Then not equal".into()];
        t.statements[1].attached_comments = vec!["Given a default weapon".into()];
        t.statements[2].attached_comments = vec!["When compared".into()];
        assert!(!check_comment_convention(&t));
        t.statements[3].attached_comments = vec!["THEN: they differ".into()];
        assert!(check_comment_convention(&t));
    }

    #[test]
    fn word_boundary_is_respected() {
        assert!(starts_with_word("// Given", "given"));
        assert!(starts_with_word("when: x", "when"));
        assert!(!starts_with_word("Whenever", "when"));
        assert!(!starts_with_word("The", "then"));
    }
}
