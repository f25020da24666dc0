use std::fmt;

/// Rule identifiers reported by the object, layout and plausibility checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    /// Exactly one base.
    R1,
    /// Every handle/knob hangs off a door or drawer.
    R2,
    /// At most two handles/knobs per door or drawer.
    R3,
    /// Trays only in microwaves.
    R4,
    /// Parent links form a tree rooted at the base, ids are 0..n-1.
    R5,
    /// Per-field invariants of boxes and joints.
    Invariant,
    /// Panels attached to the base do not overlap on the grid.
    L1,
    /// Attachment cells lie inside the parent's cells.
    L2,
    /// Sibling movable parts do not interpenetrate at rest.
    P1,
    /// Every movable part visibly moves when opened.
    P2,
    /// Doors swing outward.
    P3,
    /// Attachments stay on their parent in both states.
    P4,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub message: String,
}

impl Violation {
    pub fn new(rule: Rule, message: impl Into<String>) -> Self {
        Violation {
            rule,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.message)
    }
}

/// Joins violations into one line for error messages.
pub fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
