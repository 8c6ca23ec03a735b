//! Pattern operations checked against enumeration over a finite universe of
//! ground values.

use dataspace_core::codec::{canonical_decode, canonical_encode};
use dataspace_core::value::overlaps;
use dataspace_core::{
    compile_surface, intersect, matches, subsumes, Pattern, Projection, SurfacePattern,
};
use proptest::prelude::*;
use std::sync::OnceLock;

fn atoms() -> Vec<Pattern> {
    vec![Pattern::int(1), Pattern::int(2), Pattern::symbol("a")]
}

/// Every ground value with records nested at most two deep, over labels
/// `f/1` and `g/2`.
fn universe() -> &'static [Pattern] {
    static U: OnceLock<Vec<Pattern>> = OnceLock::new();
    U.get_or_init(|| {
        let mut level = atoms();
        for _ in 0..2 {
            let mut next = atoms();
            for x in &level {
                next.push(Pattern::record("f", [x.clone()]));
            }
            for x in &level {
                for y in &level {
                    next.push(Pattern::record("g", [x.clone(), y.clone()]));
                }
            }
            level = next;
        }
        level
    })
}

/// Independent matcher: does ground `v` instantiate `p`?
fn naive(p: &Pattern, v: &Pattern) -> bool {
    match (p, v) {
        (Pattern::Wildcard, _) => true,
        (Pattern::Atom(a), Pattern::Atom(b)) => a == b,
        (
            Pattern::Record {
                label: l,
                fields: fs,
            },
            Pattern::Record {
                label: m,
                fields: gs,
            },
        ) => l == m && fs.len() == gs.len() && fs.iter().zip(gs).all(|(f, g)| naive(f, g)),
        _ => false,
    }
}

fn instances(p: &Pattern) -> Vec<&'static Pattern> {
    universe().iter().filter(|v| naive(p, v)).collect()
}

fn pattern() -> impl Strategy<Value = Pattern> {
    let leaf = prop_oneof![
        3 => prop::sample::select(atoms()),
        2 => Just(Pattern::Wildcard),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|x| Pattern::record("f", [x])),
            (inner.clone(), inner).prop_map(|(x, y)| Pattern::record("g", [x, y])),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn intersection_denotes_the_common_instances(p in pattern(), q in pattern()) {
        let r = intersect(&p, &q);
        for v in universe() {
            let both = naive(&p, v) && naive(&q, v);
            let via = r.as_ref().is_some_and(|r| naive(r, v));
            prop_assert_eq!(both, via, "{} ∩ {} at {}", p, q, v);
        }
        // Empty only when no instance is shared.
        if r.is_some() {
            prop_assert!(!instances(r.as_ref().unwrap()).is_empty());
        }
    }

    #[test]
    fn intersection_is_commutative_and_idempotent(p in pattern(), q in pattern()) {
        prop_assert_eq!(intersect(&p, &q), intersect(&q, &p));
        prop_assert_eq!(intersect(&p, &p), Some(p.clone()));
        prop_assert_eq!(intersect(&p, &Pattern::Wildcard), Some(p.clone()));
    }

    #[test]
    fn intersection_is_associative(p in pattern(), q in pattern(), r in pattern()) {
        let left = intersect(&p, &q).and_then(|x| intersect(&x, &r));
        let right = intersect(&q, &r).and_then(|x| intersect(&p, &x));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn overlap_means_a_shared_instance(p in pattern(), q in pattern()) {
        let shared = universe().iter().any(|v| naive(&p, v) && naive(&q, v));
        prop_assert_eq!(overlaps(&p, &q), shared);
    }

    #[test]
    fn subsumption_is_instance_inclusion(p in pattern(), q in pattern()) {
        let included = instances(&q).iter().all(|v| naive(&p, v));
        prop_assert_eq!(subsumes(&p, &q), included, "{} ⊒ {}", p, q);
    }

    #[test]
    fn matching_agrees_with_the_naive_matcher(p in pattern()) {
        for v in universe() {
            prop_assert_eq!(matches(&p, v), naive(&p, v));
        }
    }

    #[test]
    fn canonical_text_round_trips(p in pattern()) {
        let text = canonical_encode(&p);
        prop_assert_eq!(canonical_decode(&text).unwrap(), p);
    }
}

fn projection() -> impl Strategy<Value = Projection> {
    let leaf = prop_oneof![
        3 => prop::sample::select(atoms()).prop_map(Projection::from),
        2 => Just(Projection::Wildcard),
        2 => Just(Projection::capture()),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|x| Projection::record("f", [x])),
            (inner.clone(), inner).prop_map(|(x, y)| Projection::record("g", [x, y])),
        ]
    })
}

/// Replaces captures, left to right, by `values`.
fn fill(p: &Projection, values: &mut impl Iterator<Item = Pattern>) -> Pattern {
    match p {
        Projection::Atom(a) => Pattern::Atom(a.clone()),
        Projection::Wildcard => Pattern::Wildcard,
        Projection::Capture(_) => values.next().expect("enough captures"),
        Projection::Record { label, fields } => Pattern::record(
            label.clone(),
            fields.iter().map(|f| fill(f, values)).collect::<Vec<_>>(),
        ),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn projection_extracts_exactly_the_captured_subterms(p in projection(), i in 0usize..10_000) {
        let v = &universe()[i % universe().len()];
        match p.project(v).unwrap() {
            None => prop_assert!(!naive(&p.erase(), v)),
            Some(tuple) => {
                prop_assert!(naive(&p.erase(), v));
                prop_assert_eq!(tuple.len(), p.capture_count());
                prop_assert!(tuple.iter().all(Pattern::is_ground));
                // Putting the captured values back yields a pattern v still matches.
                let filled = fill(&p, &mut tuple.iter().cloned());
                prop_assert!(naive(&filled, v));
            }
        }
    }

    /// Non-ground assertions are matched by overlap; a wildcard reaching a
    /// capture position is an error.
    #[test]
    fn capturing_a_wildcard_is_an_error(p in projection(), q in pattern()) {
        let overlap = overlaps(&p.erase(), &q);
        match p.project(&q) {
            Err(_) => prop_assert!(overlap && !q.is_ground()),
            Ok(Some(t)) => {
                prop_assert!(overlap);
                prop_assert!(t.iter().all(Pattern::is_ground));
            }
            Ok(None) => prop_assert!(!overlap),
        }
    }
}

fn surface() -> impl Strategy<Value = SurfacePattern> {
    let leaf = prop_oneof![
        3 => prop::sample::select(atoms()).prop_map(SurfacePattern::from),
        2 => Just(SurfacePattern::Discard),
        2 => Just(SurfacePattern::bind("x")),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|x| SurfacePattern::record("f", [x])),
            (inner.clone(), inner).prop_map(|(x, y)| SurfacePattern::record("g", [x, y])),
        ]
    })
}

/// Renames binders so that each occurs once: x0, x1, ...
fn number_binders(sp: SurfacePattern, n: &mut usize) -> SurfacePattern {
    match sp {
        SurfacePattern::Bind(_) => {
            *n += 1;
            SurfacePattern::bind(format!("x{}", *n - 1))
        }
        SurfacePattern::Record { label, fields } => SurfacePattern::Record {
            label,
            fields: fields.into_iter().map(|f| number_binders(f, n)).collect(),
        },
        other => other,
    }
}

proptest! {
    #[test]
    fn compiled_surface_patterns_agree(sp in surface()) {
        let mut n = 0;
        let sp = number_binders(sp, &mut n);
        let c = compile_surface(&sp).unwrap();
        prop_assert_eq!(c.names.len(), n);
        prop_assert_eq!(c.extraction.capture_count(), n);
        prop_assert_eq!(c.extraction.erase(), c.subscription.clone());
        for (i, name) in c.names.iter().enumerate() {
            prop_assert_eq!(name, &format!("x{i}"));
        }
        if n > 0 {
            let dup = SurfacePattern::record("g", [sp.clone(), SurfacePattern::bind("x0")]);
            prop_assert!(compile_surface(&dup).is_err());
        }
    }
}
