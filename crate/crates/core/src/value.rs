//! Structured values and patterns.
//!
//! Everything that lives in a dataspace is a [`Pattern`]: a finite tree of
//! atoms and labelled records, optionally containing [`Pattern::Wildcard`]
//! leaves. A pattern without wildcards is *ground* and doubles as a plain
//! value; messages must be ground, assertions need not be (interest such as
//! `observe(account(_))` is itself an assertion).

use std::fmt;

/// Record label reserved for capture nodes in the canonical encoding.
pub const CAPTURE_LABEL: &str = "?!";

/// Label of the record expressing interest in another pattern.
pub const OBSERVE_LABEL: &str = "observe";

/// Label used to represent heterogeneous lists, e.g. `list('incrs-seen-so-far, 3)`.
pub const LIST_LABEL: &str = "list";

/// A leaf value. The derived ordering puts booleans before integers before
/// strings before symbols, and compares payloads within a kind.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Boolean(bool),
    Integer(i64),
    String(String),
    Symbol(String),
}

/// A value tree with optional wildcard leaves.
///
/// The derived ordering (atoms, then records, then the wildcard) is the
/// canonical ordering used whenever sets are rendered into traces.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pattern {
    Atom(Atom),
    Record { label: String, fields: Vec<Pattern> },
    Wildcard,
}

pub(crate) fn check_label(label: &str) {
    assert!(
        !label.is_empty() && label != CAPTURE_LABEL,
        "invalid record label {label:?}"
    );
}

impl Pattern {
    pub fn symbol(name: impl Into<String>) -> Self {
        Pattern::Atom(Atom::Symbol(name.into()))
    }

    pub fn string(text: impl Into<String>) -> Self {
        Pattern::Atom(Atom::String(text.into()))
    }

    pub fn int(n: i64) -> Self {
        Pattern::Atom(Atom::Integer(n))
    }

    pub fn boolean(b: bool) -> Self {
        Pattern::Atom(Atom::Boolean(b))
    }

    /// Builds a record. Panics if `label` is empty or the reserved capture label.
    pub fn record(label: impl Into<String>, fields: impl IntoIterator<Item = Pattern>) -> Self {
        let label = label.into();
        check_label(&label);
        Pattern::Record {
            label,
            fields: fields.into_iter().collect(),
        }
    }

    /// `observe(p)`: interest in assertions and messages matching `p`.
    pub fn observe(p: Pattern) -> Self {
        Pattern::record(OBSERVE_LABEL, [p])
    }

    pub fn list(items: impl IntoIterator<Item = Pattern>) -> Self {
        Pattern::record(LIST_LABEL, items)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Pattern::Atom(_) => true,
            Pattern::Record { fields, .. } => fields.iter().all(Pattern::is_ground),
            Pattern::Wildcard => false,
        }
    }

    /// If this is `observe(p)`, returns `p`.
    pub fn observed(&self) -> Option<&Pattern> {
        match self {
            Pattern::Record { label, fields } if label == OBSERVE_LABEL && fields.len() == 1 => {
                Some(&fields[0])
            }
            _ => None,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            Pattern::Record { label, .. } => Some(label),
            _ => None,
        }
    }

    pub fn fields(&self) -> &[Pattern] {
        match self {
            Pattern::Record { fields, .. } => fields,
            _ => &[],
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Pattern::Atom(Atom::Integer(n)) => Some(*n),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Pattern::Atom(Atom::String(s)) => Some(s),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Pattern::Atom(Atom::Symbol(s)) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Pattern::Atom(Atom::Boolean(b)) => Some(*b),
            _ => None,
        }
    }

    /// True if some record anywhere in the tree carries `label`.
    pub fn mentions_label(&self, needle: &str) -> bool {
        match self {
            Pattern::Record { label, fields } => {
                label == needle || fields.iter().any(|f| f.mentions_label(needle))
            }
            _ => false,
        }
    }
}

impl From<i64> for Pattern {
    fn from(n: i64) -> Self {
        Pattern::int(n)
    }
}

impl From<bool> for Pattern {
    fn from(b: bool) -> Self {
        Pattern::boolean(b)
    }
}

impl From<&str> for Pattern {
    fn from(s: &str) -> Self {
        Pattern::string(s)
    }
}

impl From<String> for Pattern {
    fn from(s: String) -> Self {
        Pattern::string(s)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Boolean(b) => write!(f, "{b}"),
            Atom::Integer(n) => write!(f, "{n}"),
            Atom::String(s) => write!(f, "{s:?}"),
            Atom::Symbol(s) => write!(f, "'{s}"),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Atom(a) => a.fmt(f),
            Pattern::Wildcard => f.write_str("_"),
            Pattern::Record { label, fields } => {
                write!(f, "{label}(")?;
                for (i, field) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    field.fmt(f)?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Most specific pattern matching exactly the ground values matched by both
/// `p` and `q`, or `None` when no ground value matches both.
pub fn intersect(p: &Pattern, q: &Pattern) -> Option<Pattern> {
    match (p, q) {
        (Pattern::Wildcard, x) | (x, Pattern::Wildcard) => Some(x.clone()),
        (Pattern::Atom(a), Pattern::Atom(b)) => (a == b).then(|| p.clone()),
        (
            Pattern::Record {
                label: l1,
                fields: f1,
            },
            Pattern::Record {
                label: l2,
                fields: f2,
            },
        ) if l1 == l2 && f1.len() == f2.len() => {
            let fields = f1
                .iter()
                .zip(f2)
                .map(|(a, b)| intersect(a, b))
                .collect::<Option<Vec<_>>>()?;
            Some(Pattern::Record {
                label: l1.clone(),
                fields,
            })
        }
        _ => None,
    }
}

/// Whether `p` and `q` have some ground value in common.
pub fn overlaps(p: &Pattern, q: &Pattern) -> bool {
    match (p, q) {
        (Pattern::Wildcard, _) | (_, Pattern::Wildcard) => true,
        (Pattern::Atom(a), Pattern::Atom(b)) => a == b,
        (
            Pattern::Record {
                label: l1,
                fields: f1,
            },
            Pattern::Record {
                label: l2,
                fields: f2,
            },
        ) => l1 == l2 && f1.len() == f2.len() && f1.iter().zip(f2).all(|(a, b)| overlaps(a, b)),
        _ => false,
    }
}

/// Whether every ground value matched by `specific` is also matched by
/// `general`; equivalently `intersect(general, specific) == Some(specific)`.
pub fn subsumes(general: &Pattern, specific: &Pattern) -> bool {
    match (general, specific) {
        (Pattern::Wildcard, _) => true,
        (_, Pattern::Wildcard) => false,
        (Pattern::Atom(a), Pattern::Atom(b)) => a == b,
        (
            Pattern::Record {
                label: l1,
                fields: f1,
            },
            Pattern::Record {
                label: l2,
                fields: f2,
            },
        ) => l1 == l2 && f1.len() == f2.len() && f1.iter().zip(f2).all(|(a, b)| subsumes(a, b)),
        _ => false,
    }
}

/// Ground matching. `v` is expected to be ground; a wildcard inside `v` only
/// matches a wildcard in `p`.
pub fn matches(p: &Pattern, v: &Pattern) -> bool {
    subsumes(p, v)
}
