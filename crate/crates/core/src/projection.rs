//! Projections with capture holes, and the `$name` / `_` surface patterns
//! used by reactive event specifications.

use std::collections::BTreeSet;

use crate::error::PatternError;
use crate::value::{check_label, intersect, Atom, Pattern};

/// A pattern in which some positions are marked for extraction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Projection {
    Atom(Atom),
    Record {
        label: String,
        fields: Vec<Projection>,
    },
    Wildcard,
    Capture(Box<Pattern>),
}

/// One extracted value per capture position, left to right.
pub type CaptureTuple = Vec<Pattern>;

impl Projection {
    pub fn record(label: impl Into<String>, fields: impl IntoIterator<Item = Projection>) -> Self {
        let label = label.into();
        check_label(&label);
        Projection::Record {
            label,
            fields: fields.into_iter().collect(),
        }
    }

    /// `Capture(_)`, the common case.
    pub fn capture() -> Self {
        Projection::Capture(Box::new(Pattern::Wildcard))
    }

    /// The pattern matched by this projection, with captures replaced by
    /// their sub-patterns.
    pub fn erase(&self) -> Pattern {
        match self {
            Projection::Atom(a) => Pattern::Atom(a.clone()),
            Projection::Record { label, fields } => Pattern::Record {
                label: label.clone(),
                fields: fields.iter().map(Projection::erase).collect(),
            },
            Projection::Wildcard => Pattern::Wildcard,
            Projection::Capture(sub) => (**sub).clone(),
        }
    }

    pub fn capture_count(&self) -> usize {
        match self {
            Projection::Capture(_) => 1,
            Projection::Record { fields, .. } => fields.iter().map(Projection::capture_count).sum(),
            _ => 0,
        }
    }

    /// Extracts the captures of a single assertion. `Ok(None)` if it does not
    /// match.
    pub fn project(&self, assertion: &Pattern) -> Result<Option<CaptureTuple>, PatternError> {
        let Some(unified) = intersect(&self.erase(), assertion) else {
            return Ok(None);
        };
        let mut out = Vec::with_capacity(self.capture_count());
        if extract(self, &unified, &mut out) {
            Ok(Some(out))
        } else {
            Err(PatternError::CaptureUnbounded {
                assertion: assertion.clone(),
            })
        }
    }
}

impl From<Pattern> for Projection {
    fn from(p: Pattern) -> Self {
        match p {
            Pattern::Atom(a) => Projection::Atom(a),
            Pattern::Record { label, fields } => Projection::Record {
                label,
                fields: fields.into_iter().map(Projection::from).collect(),
            },
            Pattern::Wildcard => Projection::Wildcard,
        }
    }
}

// `unified` has the shape of `proj.erase()` refined by the assertion, so
// records line up field for field. Returns false on a non-ground capture.
fn extract(proj: &Projection, unified: &Pattern, out: &mut Vec<Pattern>) -> bool {
    match (proj, unified) {
        (Projection::Capture(_), v) => {
            if !v.is_ground() {
                return false;
            }
            out.push(v.clone());
            true
        }
        (Projection::Record { fields, .. }, Pattern::Record { fields: vs, .. }) => {
            fields.iter().zip(vs).all(|(p, v)| extract(p, v, out))
        }
        _ => true,
    }
}

/// Projects every matching element of `assertions`, returning the set of
/// capture tuples. Fails with `CaptureUnbounded` if some matching assertion
/// leaves a wildcard inside a capture position.
pub fn project_assertions<'a>(
    assertions: impl IntoIterator<Item = &'a Pattern>,
    proj: &Projection,
) -> Result<BTreeSet<CaptureTuple>, PatternError> {
    let mut out = BTreeSet::new();
    for a in assertions {
        if let Some(tuple) = proj.project(a)? {
            out.insert(tuple);
        }
    }
    Ok(out)
}

/// Event-specification pattern: `$name` binders and `_` discards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SurfacePattern {
    Atom(Atom),
    Record {
        label: String,
        fields: Vec<SurfacePattern>,
    },
    Discard,
    Bind(String),
}

impl SurfacePattern {
    pub fn record(
        label: impl Into<String>,
        fields: impl IntoIterator<Item = SurfacePattern>,
    ) -> Self {
        let label = label.into();
        check_label(&label);
        SurfacePattern::Record {
            label,
            fields: fields.into_iter().collect(),
        }
    }

    pub fn bind(name: impl Into<String>) -> Self {
        SurfacePattern::Bind(name.into())
    }

    pub fn observe(inner: SurfacePattern) -> Self {
        SurfacePattern::record(crate::value::OBSERVE_LABEL, [inner])
    }

    pub fn mentions_label(&self, needle: &str) -> bool {
        match self {
            SurfacePattern::Record { label, fields } => {
                label == needle || fields.iter().any(|f| f.mentions_label(needle))
            }
            _ => false,
        }
    }
}

impl From<Pattern> for SurfacePattern {
    fn from(p: Pattern) -> Self {
        match p {
            Pattern::Atom(a) => SurfacePattern::Atom(a),
            Pattern::Record { label, fields } => SurfacePattern::Record {
                label,
                fields: fields.into_iter().map(SurfacePattern::from).collect(),
            },
            Pattern::Wildcard => SurfacePattern::Discard,
        }
    }
}

/// Result of [`compile_surface`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledPattern {
    /// What to subscribe to: binders become wildcards.
    pub subscription: Pattern,
    /// How to extract binder values: binders become `Capture(_)`.
    pub extraction: Projection,
    /// Binder names in left-to-right order.
    pub names: Vec<String>,
}

pub fn compile_surface(sp: &SurfacePattern) -> Result<CompiledPattern, PatternError> {
    fn walk(
        sp: &SurfacePattern,
        names: &mut Vec<String>,
    ) -> Result<(Pattern, Projection), PatternError> {
        Ok(match sp {
            SurfacePattern::Atom(a) => (Pattern::Atom(a.clone()), Projection::Atom(a.clone())),
            SurfacePattern::Discard => (Pattern::Wildcard, Projection::Wildcard),
            SurfacePattern::Bind(name) => {
                if names.contains(name) {
                    return Err(PatternError::DuplicateBinder(name.clone()));
                }
                names.push(name.clone());
                (Pattern::Wildcard, Projection::capture())
            }
            SurfacePattern::Record { label, fields } => {
                let mut pats = Vec::with_capacity(fields.len());
                let mut projs = Vec::with_capacity(fields.len());
                for f in fields {
                    let (p, q) = walk(f, names)?;
                    pats.push(p);
                    projs.push(q);
                }
                (
                    Pattern::Record {
                        label: label.clone(),
                        fields: pats,
                    },
                    Projection::Record {
                        label: label.clone(),
                        fields: projs,
                    },
                )
            }
        })
    }

    let mut names = Vec::new();
    let (subscription, extraction) = walk(sp, &mut names)?;
    Ok(CompiledPattern {
        subscription,
        extraction,
        names,
    })
}
