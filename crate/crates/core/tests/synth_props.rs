use planegen_core::lang::{parse_problem, pid, serialize_problem};
use planegen_core::synth::{
    check_nondegenerate, sample_problem, solve_diagram, SamplerConfig, SolveError,
    MIN_POINT_DISTANCE, RESIDUAL_TOL,
};
use planegen_testkit::max_problem_residual;
use proptest::prelude::*;
use rayon::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn accepted_diagrams_satisfy_everything(seed in any::<u64>(), n in 0usize..=8) {
        let p = sample_problem(&SamplerConfig::full(n, seed));
        if let Ok(d) = solve_diagram(&p, seed) {
            prop_assert!(max_problem_residual(&p, &d) <= RESIDUAL_TOL, "{}", serialize_problem(&p));
            prop_assert!(check_nondegenerate(&d));
            for (i, (_, a)) in d.points.iter().enumerate() {
                prop_assert!(a.x.abs() <= 1.0 && a.y.abs() <= 1.0);
                for (_, b) in &d.points[i + 1..] {
                    prop_assert!(a.dist(*b) >= MIN_POINT_DISTANCE);
                }
            }
            prop_assert_eq!(solve_diagram(&p, seed).unwrap(), d);
        }
    }
}

#[test]
fn golden_sample() {
    let golden = include_str!("golden/sample_n3_seed7.geo").trim();
    let p = sample_problem(&SamplerConfig::full(3, 7));
    assert_eq!(serialize_problem(&p), golden);
    assert_eq!(p.clauses.len(), 4);
    let d = solve_diagram(&p, 7).unwrap();
    assert!(max_problem_residual(&p, &d) <= RESIDUAL_TOL);
}

#[test]
fn midpoint_is_exact() {
    let p = parse_problem("a b = segment a b; m = midpoint m a b").unwrap();
    let d = solve_diagram(&p, 3).unwrap();
    let (a, b, m) = (d.pos(&pid("a")), d.pos(&pid("b")), d.pos(&pid("m")));
    assert!(m.dist((a + b) * 0.5) < 1e-15);
}

#[test]
fn circumcenter_is_equidistant() {
    let p = parse_problem("a b c = triangle a b c; o = circumcenter o a b c").unwrap();
    let d = solve_diagram(&p, 11).unwrap();
    let o = d.pos(&pid("o"));
    let r: Vec<f64> = ["a", "b", "c"]
        .iter()
        .map(|n| o.dist(d.pos(&pid(n))))
        .collect();
    assert!((r[0] - r[1]).abs() <= 1e-9 && (r[0] - r[2]).abs() <= 1e-9);
}

#[test]
fn angle_sixty_by_atan2() {
    for seed in 0..50 {
        let p = parse_problem("a b = segment a b; c = angle a b c = 60").unwrap();
        let d = solve_diagram(&p, seed).unwrap();
        let (a, b, c) = (d.pos(&pid("a")), d.pos(&pid("b")), d.pos(&pid("c")));
        let (u, v) = (a - b, c - b);
        let deg = (u.x * v.y - u.y * v.x)
            .abs()
            .atan2(u.x * v.x + u.y * v.y)
            .to_degrees();
        assert!((59.999999..=60.000001).contains(&deg), "{deg}");
    }
}

#[test]
fn impossible_problem_exhausts_budget() {
    let p = parse_problem("a b = segment a b; c = midpoint c a b, perp a c c b").unwrap();
    assert!(matches!(
        solve_diagram(&p, 1),
        Err(SolveError::UnsatisfiableWithinBudget { .. })
    ));
}

#[test]
fn parallel_equals_serial() {
    let seeds: Vec<u64> = (0..64).collect();
    let run = |s: &u64| {
        let p = sample_problem(&SamplerConfig::full(4, *s));
        solve_diagram(&p, *s)
            .ok()
            .map(|d| format!("{:?}", d.points))
    };
    let serial: Vec<_> = seeds.iter().map(run).collect();
    let parallel: Vec<_> = seeds.par_iter().map(run).collect();
    assert_eq!(serial, parallel);
}
