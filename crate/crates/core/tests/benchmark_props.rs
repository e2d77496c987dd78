use std::fs;
use std::path::PathBuf;

use planegen_core::benchmark::{
    example_seed, generate_example, generate_split, manifest_path, verify_label, write_manifest,
    Split, SplitOptions, TaskKind,
};
use planegen_core::lang::parse_problem;
use planegen_core::synth::solve_diagram;
use planegen_core::Problem;
use planegen_testkit::{angle_at, label_oracle};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("planegen-bench-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn files(root: &PathBuf) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.clone()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(root).unwrap().display().to_string(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn otherwise_angles_stay_in_band() {
    for i in 0..500u64 {
        let g = generate_example(
            TaskKind::TwoLines,
            2,
            example_seed(11, Split::Train, i as usize),
        )
        .unwrap();
        let p = &g.problem;
        let pt = |c: usize, k: usize| {
            let v = g.diagram.pos(&p.clauses[c].new_points[k]);
            (v.x, v.y)
        };
        let deg = angle_at(pt(0, 0), pt(0, 1), pt(1, 0)).to_degrees();
        let acute = deg.min(180.0 - deg);
        assert!(
            (10.0 - 1e-6..=80.0 + 1e-6).contains(&acute),
            "{acute} in {}",
            g.example.problem_text
        );
    }
}

#[test]
fn labels_agree_with_oracle() {
    for task in TaskKind::ALL {
        for class in 0..task.num_classes() {
            for k in 0..8u64 {
                let seed = example_seed(5, Split::Val, (class * 100) + k as usize);
                let g = generate_example(task, class, seed).unwrap();
                assert_eq!(g.example.label, class);
                assert_eq!(verify_label(&g.example), Ok(true));
                let p = parse_problem(&g.example.problem_text).unwrap();
                let d = solve_diagram(&p, g.example.seed).unwrap();
                assert_eq!(
                    label_oracle(task, &p, &d),
                    Some(class),
                    "{task:?} {}",
                    g.example.problem_text
                );
                // Distractors must not change the answer.
                let bare = Problem {
                    clauses: p.clauses[..g.example.foundation_clauses].to_vec(),
                };
                let bd = solve_diagram(&bare, g.example.seed).unwrap();
                assert_eq!(label_oracle(task, &bare, &bd), Some(class));
                assert!(p.clauses.len() > g.example.foundation_clauses);
                assert!(p.clauses.len() <= g.example.foundation_clauses + 3);
            }
        }
    }
}

#[test]
fn splits_are_byte_identical_and_balanced() {
    for task in [TaskKind::Concyclic, TaskKind::AngleDetection] {
        let (a, b) = (
            scratch(&format!("{}-a", task.name())),
            scratch(&format!("{}-b", task.name())),
        );
        let opts = |out: &PathBuf, chunk| SplitOptions {
            out_dir: Some(out.clone()),
            write_svg: true,
            chunk,
            ..SplitOptions::default()
        };
        let ma = generate_split(task, Split::Test, 40, 99, &opts(&a, 1024)).unwrap();
        let mb = generate_split(task, Split::Test, 40, 99, &opts(&b, 7)).unwrap();
        write_manifest(&a, &ma).unwrap();
        write_manifest(&b, &mb).unwrap();
        let (fa, fb) = (files(&a), files(&b));
        assert_eq!(fa.len(), 40 * 2 + 1);
        assert_eq!(fa, fb);
        let counts = ma.class_counts();
        assert!(
            counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1,
            "{counts:?}"
        );
        let text = fs::read_to_string(manifest_path(&a, Split::Test, task)).unwrap();
        assert_eq!(text.lines().count(), 40);
        assert!(text.starts_with("{\"task\":\""));
        let _ = fs::remove_dir_all(&a);
        let _ = fs::remove_dir_all(&b);
    }
}

#[test]
fn manifest_only_matches_rendered_manifest() {
    let dir = scratch("mo");
    let with = generate_split(
        TaskKind::SquareShape,
        Split::Train,
        12,
        3,
        &SplitOptions {
            out_dir: Some(dir.clone()),
            ..SplitOptions::default()
        },
    )
    .unwrap();
    let without = generate_split(
        TaskKind::SquareShape,
        Split::Train,
        12,
        3,
        &SplitOptions::default(),
    )
    .unwrap();
    assert_eq!(with.to_jsonl(), without.to_jsonl());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn splits_differ() {
    let a = generate_split(
        TaskKind::ObjectShape,
        Split::Train,
        8,
        1,
        &SplitOptions::default(),
    )
    .unwrap();
    let b = generate_split(
        TaskKind::ObjectShape,
        Split::Val,
        8,
        1,
        &SplitOptions::default(),
    )
    .unwrap();
    let seeds = |m: &planegen_core::benchmark::DatasetManifest| {
        m.examples.iter().map(|e| e.seed).collect::<Vec<_>>()
    };
    assert_ne!(seeds(&a), seeds(&b));
}
