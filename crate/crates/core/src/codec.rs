//! Canonical JSON text form of patterns, shared with the trace format.
//!
//! - integers and booleans are JSON scalars;
//! - symbols are JSON strings prefixed with `'`;
//! - strings are unprefixed JSON strings, except that a string equal to `_`
//!   or starting with `'` or `\` gets a leading `\`;
//! - records are arrays `[label, field...]`;
//! - the wildcard is the string `"_"`;
//! - a capture is `["?!", sub]`.

use serde_json::Value as Json;

use crate::error::PatternError;
use crate::projection::Projection;
use crate::value::{Atom, Pattern, CAPTURE_LABEL};

const WILDCARD: &str = "_";

fn encode_atom(a: &Atom) -> Json {
    match a {
        Atom::Boolean(b) => Json::Bool(*b),
        Atom::Integer(n) => Json::from(*n),
        Atom::Symbol(s) => Json::String(format!("'{s}")),
        Atom::String(s) => {
            if s == WILDCARD || s.starts_with('\'') || s.starts_with('\\') {
                Json::String(format!("\\{s}"))
            } else {
                Json::String(s.clone())
            }
        }
    }
}

pub fn pattern_to_json(p: &Pattern) -> Json {
    match p {
        Pattern::Atom(a) => encode_atom(a),
        Pattern::Wildcard => Json::String(WILDCARD.into()),
        Pattern::Record { label, fields } => {
            let mut items = Vec::with_capacity(fields.len() + 1);
            items.push(Json::String(label.clone()));
            items.extend(fields.iter().map(pattern_to_json));
            Json::Array(items)
        }
    }
}

pub fn projection_to_json(p: &Projection) -> Json {
    match p {
        Projection::Atom(a) => encode_atom(a),
        Projection::Wildcard => Json::String(WILDCARD.into()),
        Projection::Capture(sub) => Json::Array(vec![
            Json::String(CAPTURE_LABEL.into()),
            pattern_to_json(sub),
        ]),
        Projection::Record { label, fields } => {
            let mut items = Vec::with_capacity(fields.len() + 1);
            items.push(Json::String(label.clone()));
            items.extend(fields.iter().map(projection_to_json));
            Json::Array(items)
        }
    }
}

pub fn canonical_encode(p: &Pattern) -> String {
    pattern_to_json(p).to_string()
}

fn malformed(what: impl Into<String>) -> PatternError {
    PatternError::MalformedText(what.into())
}

enum Leaf {
    Atom(Atom),
    Wildcard,
}

fn decode_scalar(j: &Json) -> Result<Leaf, PatternError> {
    match j {
        Json::Bool(b) => Ok(Leaf::Atom(Atom::Boolean(*b))),
        Json::Number(n) => n
            .as_i64()
            .map(|n| Leaf::Atom(Atom::Integer(n)))
            .ok_or_else(|| malformed(format!("not a 64-bit integer: {n}"))),
        Json::String(s) => Ok(if s == WILDCARD {
            Leaf::Wildcard
        } else if let Some(sym) = s.strip_prefix('\'') {
            Leaf::Atom(Atom::Symbol(sym.into()))
        } else if let Some(text) = s.strip_prefix('\\') {
            Leaf::Atom(Atom::String(text.into()))
        } else {
            Leaf::Atom(Atom::String(s.clone()))
        }),
        other => Err(malformed(format!("unexpected JSON value {other}"))),
    }
}

fn split_record(items: &[Json]) -> Result<(&str, &[Json]), PatternError> {
    match items.split_first() {
        Some((Json::String(label), rest)) if !label.is_empty() => Ok((label, rest)),
        Some(_) => Err(malformed("record label must be a non-empty string")),
        None => Err(malformed("empty array")),
    }
}

pub fn pattern_from_json(j: &Json) -> Result<Pattern, PatternError> {
    match j {
        Json::Array(items) => {
            let (label, rest) = split_record(items)?;
            if label == CAPTURE_LABEL {
                return Err(malformed("capture is not allowed in a pattern"));
            }
            Ok(Pattern::Record {
                label: label.into(),
                fields: rest
                    .iter()
                    .map(pattern_from_json)
                    .collect::<Result<_, _>>()?,
            })
        }
        scalar => Ok(match decode_scalar(scalar)? {
            Leaf::Atom(a) => Pattern::Atom(a),
            Leaf::Wildcard => Pattern::Wildcard,
        }),
    }
}

pub fn projection_from_json(j: &Json) -> Result<Projection, PatternError> {
    match j {
        Json::Array(items) => {
            let (label, rest) = split_record(items)?;
            if label == CAPTURE_LABEL {
                return match rest {
                    [sub] => Ok(Projection::Capture(Box::new(pattern_from_json(sub)?))),
                    _ => Err(malformed("capture takes exactly one sub-pattern")),
                };
            }
            Ok(Projection::Record {
                label: label.into(),
                fields: rest
                    .iter()
                    .map(projection_from_json)
                    .collect::<Result<_, _>>()?,
            })
        }
        scalar => Ok(match decode_scalar(scalar)? {
            Leaf::Atom(a) => Projection::Atom(a),
            Leaf::Wildcard => Projection::Wildcard,
        }),
    }
}

pub fn canonical_decode(text: &str) -> Result<Pattern, PatternError> {
    let j: Json = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    pattern_from_json(&j)
}
