use planegen_core::lang::{parse_problem, RelationKind};
use planegen_core::premises::{
    caption_from_premises, derive_premises, filter_premises, passes_caption_filter, CaptionError,
    Premise, PREMISE_KINDS,
};
use planegen_core::synth::{sample_problem, solve_diagram, Diagram, SamplerConfig};
use planegen_core::Problem;
use planegen_testkit::premise_holds;

fn corpus() -> Vec<(Problem, Diagram)> {
    (0..300u64)
        .filter_map(|s| {
            let p = sample_problem(&SamplerConfig::full(1 + (s % 6) as usize, s));
            let d = solve_diagram(&p, s).ok()?;
            Some((p, d))
        })
        .collect()
}

#[test]
fn every_derived_premise_holds() {
    let c = corpus();
    assert!(c.len() > 200, "only {} solved", c.len());
    for (p, d) in &c {
        for prem in derive_premises(d, p) {
            assert!(premise_holds(&prem, d), "{prem} fails on {p}");
        }
    }
}

#[test]
fn asserted_relations_are_restated() {
    for (p, d) in corpus() {
        let got = derive_premises(&d, &p);
        for c in p.constraints().filter(|c| PREMISE_KINDS.contains(&c.kind)) {
            let want = Premise::new(c.kind, c.args.clone(), None);
            assert!(
                got.iter()
                    .any(|g| g.kind == want.kind && g.args == want.args),
                "{want} missing for {p}"
            );
        }
    }
}

#[test]
fn filter_is_idempotent_and_captions_never_fail() {
    for (p, d) in corpus() {
        let all = derive_premises(&d, &p);
        let kept = filter_premises(&all);
        assert_eq!(filter_premises(&kept), kept);
        assert!(kept.iter().all(passes_caption_filter));
        let cap = caption_from_premises(&kept).unwrap();
        assert_eq!(cap.sentences.len(), kept.len());
        assert_eq!(caption_from_premises(&kept).unwrap(), cap);
        if let Some(bad) = all.iter().find(|x| !passes_caption_filter(x)) {
            assert!(matches!(
                caption_from_premises(std::slice::from_ref(bad)),
                Err(CaptionError::UnfilteredPremise(_))
            ));
        }
    }
}

#[test]
fn premises_survive_rotation() {
    for (p, d) in corpus().into_iter().take(120) {
        let base = derive_premises(&d, &p);
        for deg in [37.0, 90.0, 211.0] {
            assert_eq!(derive_premises(&d.rotated(deg), &p), base, "{p} at {deg}");
        }
    }
}

#[test]
fn emergent_right_angle_in_rectangle() {
    let p = parse_problem("a b c d = rectangle a b c d").unwrap();
    let d = solve_diagram(&p, 5).unwrap();
    let ps = derive_premises(&d, &p);
    let perps = ps
        .iter()
        .filter(|x| x.kind == RelationKind::Perpendicular)
        .count();
    assert!(perps >= 4, "{ps:?}");
    assert!(ps.iter().any(|x| x.kind == RelationKind::Concyclic));
}
