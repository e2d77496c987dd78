use planegen_core::lang::{parse_problem, serialize_problem, ParseError, RelationKind};
use planegen_core::synth::{sample_problem, AngleGrid, SamplerConfig};
use proptest::prelude::*;

fn sampled(seed: u64, n: usize, grid: AngleGrid) -> planegen_core::Problem {
    sample_problem(&SamplerConfig {
        angle_grid: grid,
        ..SamplerConfig::full(n, seed)
    })
}

proptest! {
    #[test]
    fn round_trip_is_identity(seed in any::<u64>(), n in 0usize..=8, bench in any::<bool>()) {
        let grid = if bench { AngleGrid::Benchmark } else { AngleGrid::Free };
        let p = sampled(seed, n, grid);
        let text = serialize_problem(&p);
        let back = parse_problem(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(serialize_problem(&back), text);
    }

    #[test]
    fn arbitrary_text_never_panics(text in "[a-z0-9 =;,.#\\n]{0,60}") {
        match parse_problem(&text) {
            Ok(p) => prop_assert!(p.validate().is_ok()),
            Err(e) => prop_assert!(!e.to_string().is_empty()),
        }
    }

    #[test]
    fn mutated_names_are_typed_errors(seed in any::<u64>(), cut in 0usize..200) {
        let text = serialize_problem(&sampled(seed, 3, AngleGrid::Free));
        let cut = cut.min(text.len());
        // Truncation either still parses (at a clause boundary) or fails
        // with one error value; it never yields a problem that fails its
        // own validation.
        if let Ok(p) = parse_problem(&text[..cut]) {
            prop_assert!(p.validate().is_ok());
        }
    }
}

#[test]
fn spec_strings() {
    let p = parse_problem("a b c = triangle a b c; m = midpoint m a b").unwrap();
    assert_eq!((p.clauses.len(), p.num_points()), (2, 4));
    assert!(matches!(
        parse_problem("a b = segment a b; a = free a"),
        Err(ParseError::DuplicatePoint { .. })
    ));
    let p = parse_problem("a b = segment a b; c = angle a b c = 22.5").unwrap();
    assert!(serialize_problem(&p).ends_with("= 22.5"));
    assert!(matches!(
        parse_problem("a b = segment a b; c = frob a c"),
        Err(ParseError::UnknownRelation { .. })
    ));
    assert!(matches!(
        parse_problem("a b = segment a b; c = perp a b c"),
        Err(ParseError::ArityMismatch { .. })
    ));
    assert!(matches!(
        parse_problem("a b = segment a b; c = perp a b c z"),
        Err(ParseError::ForwardReference { .. })
    ));
    assert_eq!(
        RelationKind::from_name("cyclic"),
        Some(RelationKind::Concyclic)
    );
}

#[test]
fn comments_and_trailing_separator() {
    let p =
        parse_problem("# header\na b c = triangle a b c; # tail\nd = midpoint d a b;\n").unwrap();
    assert_eq!(p.clauses.len(), 2);
}
