//! End-to-end runs of the `planegen` binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn planegen(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_planegen"))
        .args(args)
        .current_dir(cwd)
        .env_remove("PLANEGEN_SEED")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> Output {
    let o = planegen(args, cwd);
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

/// Every file under `dir` except run.json, keyed by relative path.
fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else if p.file_name().unwrap() != "run.json" {
                out.insert(
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

fn lines(path: &Path) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

/// Keys of a flat JSON object line in written order.
fn key_order(line: &str, keys: &[&str]) -> bool {
    let pos: Vec<usize> = keys
        .iter()
        .map(|k| line.find(&format!("\"{k}\":")).unwrap())
        .collect();
    pos.windows(2).all(|w| w[0] < w[1])
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

fn run_json(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("run.json")).unwrap()).unwrap()
}

#[test]
fn gen_pairs_count_rerun_and_replay() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(
        &["gen-pairs", "--count", "10", "--seed", "1", "--out", "a"],
        d,
    );
    let pairs = lines(&d.join("a/pairs.jsonl"));
    assert_eq!(pairs.len(), 10);
    assert_eq!(fs::read_dir(d.join("a/images")).unwrap().count(), 10);
    let keys: Vec<&str> = pairs[0]
        .as_object()
        .unwrap()
        .keys()
        .map(|k| k.as_str())
        .collect();
    assert!(keys.contains(&"caption") && keys.contains(&"premise_hash") && keys.contains(&"image"));

    ok(
        &[
            "gen-pairs",
            "--count",
            "10",
            "--seed",
            "1",
            "--out",
            "b",
            "--chunk",
            "3",
        ],
        d,
    );
    assert_eq!(snapshot(&d.join("a")), snapshot(&d.join("b")));

    ok(&["--from-run", "a/run.json", "--out", "c"], d);
    assert_eq!(snapshot(&d.join("a")), snapshot(&d.join("c")));
    let (ra, rc) = (run_json(&d.join("a")), run_json(&d.join("c")));
    assert_eq!(
        ra["command"]["gen-pairs"]["seed"],
        rc["command"]["gen-pairs"]["seed"]
    );
    assert_eq!(rc["command"]["gen-pairs"]["out"], "c");
    assert!(ra["generator_version"].is_string());
}

#[test]
fn seed_falls_back_to_environment() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(
        &["gen-pairs", "--count", "3", "--seed", "4", "--out", "flag"],
        d,
    );
    let o = Command::new(env!("CARGO_BIN_EXE_planegen"))
        .args(["gen-pairs", "--count", "3", "--out", "env"])
        .current_dir(d)
        .env("PLANEGEN_SEED", "4")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(snapshot(&d.join("flag")), snapshot(&d.join("env")));
    assert_eq!(run_json(&d.join("env"))["command"]["gen-pairs"]["seed"], 4);

    let o = Command::new(env!("CARGO_BIN_EXE_planegen"))
        .args(["gen-pairs", "--count", "3", "--out", "bad"])
        .current_dir(d)
        .env("PLANEGEN_SEED", "minus one")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_supplies_defaults() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    fs::write(
        d.join("gen.cfg"),
        "# small run\ncount = 4\nseed = 2\nformat = png\n",
    )
    .unwrap();
    ok(&["--config", "gen.cfg", "gen-pairs", "--out", "a"], d);
    assert_eq!(lines(&d.join("a/pairs.jsonl")).len(), 4);
    assert!(d.join("a/images/0.png").exists());
    // Flags on the command line win over the file.
    ok(
        &[
            "--config",
            "gen.cfg",
            "gen-pairs",
            "--count",
            "2",
            "--out",
            "b",
        ],
        d,
    );
    assert_eq!(lines(&d.join("b/pairs.jsonl")).len(), 2);
    assert_eq!(run_json(&d.join("b"))["command"]["gen-pairs"]["seed"], 2);
}

#[test]
fn benchmark_counts_and_tasks() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(
        &[
            "gen-benchmark",
            "--task",
            "angle",
            "--counts",
            "26,13,13",
            "--seed",
            "1",
            "--out",
            "b",
        ],
        d,
    );
    for (split, n) in [("train", 26), ("val", 13), ("test", 13)] {
        let m = lines(&d.join(format!("b/{split}/angle.jsonl")));
        assert_eq!(m.len(), n);
        let mut hist = [0usize; 13];
        for l in &m {
            hist[l["label"].as_u64().unwrap() as usize] += 1;
            assert!(d.join("b").join(l["image"].as_str().unwrap()).exists());
        }
        assert!(hist.iter().all(|&h| h == n / 13), "{hist:?}");
        let keys = [
            "task", "split", "index", "label", "choices", "image", "problem", "seed",
        ];
        assert_eq!(m[0].as_object().unwrap().len(), keys.len());
        assert!(key_order(
            &first_line(&d.join(format!("b/{split}/angle.jsonl"))),
            &keys
        ));
    }

    ok(
        &[
            "gen-benchmark",
            "--task",
            "all",
            "--counts",
            "5,5,5",
            "--manifest-only",
            "--out",
            "all",
        ],
        d,
    );
    let mut tasks: Vec<String> = fs::read_dir(d.join("all/train"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    tasks.sort();
    assert_eq!(
        tasks,
        [
            "angle.jsonl",
            "concyclic.jsonl",
            "objectshape.jsonl",
            "squareshape.jsonl",
            "twolines.jsonl"
        ]
    );

    assert_eq!(
        planegen(&["gen-benchmark", "--task", "hexagon", "--out", "x"], d)
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn training_is_reproducible_and_lr_zero_is_inert() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(
        &[
            "gen-pairs",
            "--count",
            "40",
            "--seed",
            "3",
            "--out",
            "pairs",
        ],
        d,
    );
    ok(
        &[
            "train", "clip", "--pairs", "pairs", "--epochs", "2", "--seed", "5", "--out", "t1",
        ],
        d,
    );
    ok(
        &[
            "train", "clip", "--pairs", "pairs", "--epochs", "2", "--seed", "5", "--out", "t2",
        ],
        d,
    );
    assert_eq!(snapshot(&d.join("t1")), snapshot(&d.join("t2")));
    let loss = lines(&d.join("t1/loss.jsonl"));
    assert_eq!(loss[0].as_object().unwrap().len(), 2);
    assert!(key_order(
        &first_line(&d.join("t1/loss.jsonl")),
        &["step", "loss"]
    ));

    ok(&["init-model", "--seed", "8", "--out", "init"], d);
    ok(
        &[
            "train", "clip", "--pairs", "pairs", "--init", "init", "--lr", "0", "--epochs", "2",
            "--out", "z",
        ],
        d,
    );
    assert_eq!(
        fs::read(d.join("init/model.ckpt")).unwrap(),
        fs::read(d.join("z/model.ckpt")).unwrap()
    );
    let report: Value =
        serde_json::from_str(&fs::read_to_string(d.join("z/report.json")).unwrap()).unwrap();
    assert_eq!(report["initial_loss"], report["final_loss"]);

    // A large step size blows the loss up.
    let o = planegen(
        &[
            "train", "clip", "--pairs", "pairs", "--lr", "10", "--epochs", "3", "--out", "bad",
        ],
        d,
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn da_consumes_exactly_the_shots() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(
        &[
            "gen-pairs",
            "--count",
            "64",
            "--seed",
            "3",
            "--out",
            "pairs",
        ],
        d,
    );
    ok(
        &[
            "gen-style-pairs",
            "--count",
            "120",
            "--seed",
            "4",
            "--out",
            "sty",
        ],
        d,
    );
    let sty = lines(&d.join("sty/style_pairs.jsonl"));
    assert_eq!(sty.iter().filter(|l| l["domain"] == "target_a").count(), 60);
    ok(
        &[
            "train",
            "clip-da",
            "--pairs",
            "pairs",
            "--style-pairs",
            "sty",
            "--da-shots",
            "50",
            "--epochs",
            "3",
            "--out",
            "da",
        ],
        d,
    );
    let report: Value =
        serde_json::from_str(&fs::read_to_string(d.join("da/report.json")).unwrap()).unwrap();
    assert_eq!(report["target_pairs_used"], serde_json::json!([50, 50]));

    let o = planegen(
        &[
            "train",
            "clip-da",
            "--pairs",
            "pairs",
            "--style-pairs",
            "sty",
            "--da-shots",
            "61",
            "--out",
            "x",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(1));
    let o = planegen(&["train", "clip-da", "--pairs", "pairs", "--out", "x"], d);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn eval_metrics_and_checkpoint_version() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(
        &[
            "gen-pairs",
            "--count",
            "30",
            "--seed",
            "1",
            "--out",
            "pairs",
        ],
        d,
    );
    ok(
        &[
            "gen-benchmark",
            "--task",
            "objectshape",
            "--counts",
            "40,20,20",
            "--out",
            "bench",
        ],
        d,
    );
    ok(&["init-model", "--seed", "1", "--out", "m"], d);

    let o = ok(
        &[
            "eval",
            "probe",
            "--checkpoint",
            "m",
            "--bench",
            "bench",
            "--task",
            "objectshape",
            "--out",
            "p",
        ],
        d,
    );
    let m = lines(&d.join("p/metrics.jsonl"));
    assert_eq!(m.len(), 1);
    assert_eq!(m[0]["metric"], "probe_acc");
    assert_eq!(m[0]["task"], "objectshape");
    let acc = m[0]["value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
    assert_eq!(
        String::from_utf8_lossy(&o.stdout).trim(),
        fs::read_to_string(d.join("p/metrics.jsonl"))
            .unwrap()
            .trim()
    );

    ok(
        &[
            "eval",
            "retrieval",
            "--checkpoint",
            "m/model.ckpt",
            "--pairs",
            "pairs",
            "--out",
            "r",
        ],
        d,
    );
    let m = lines(&d.join("r/metrics.jsonl"));
    assert_eq!(m[0]["metric"], "MR");
    assert_eq!(m[1]["metric"], "mAP");
    assert!(m[0]["value"].as_f64().unwrap() >= 1.0);
    let map = m[1]["value"].as_f64().unwrap();
    assert!(map > 0.0 && map <= 1.0);

    let mut bytes = fs::read(d.join("m/model.ckpt")).unwrap();
    bytes[4..8].copy_from_slice(&2u32.to_le_bytes());
    fs::write(d.join("v2.ckpt"), bytes).unwrap();
    let o = planegen(
        &[
            "eval",
            "retrieval",
            "--checkpoint",
            "v2.ckpt",
            "--pairs",
            "pairs",
            "--out",
            "x",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(4));
    let o = planegen(
        &[
            "eval",
            "retrieval",
            "--checkpoint",
            "missing.ckpt",
            "--pairs",
            "pairs",
            "--out",
            "x",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn random_weights_probe_is_near_chance_on_concyclic() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(
        &[
            "gen-benchmark",
            "--task",
            "concyclic",
            "--counts",
            "1000,250,250",
            "--seed",
            "6",
            "--out",
            "bench",
        ],
        d,
    );
    ok(&["init-model", "--seed", "2", "--out", "m"], d);
    ok(
        &[
            "eval",
            "probe",
            "--checkpoint",
            "m",
            "--bench",
            "bench",
            "--task",
            "concyclic",
            "--out",
            "p",
        ],
        d,
    );
    let acc = lines(&d.join("p/metrics.jsonl"))[0]["value"]
        .as_f64()
        .unwrap();
    assert!((0.15..=0.25).contains(&acc), "{acc}");
}

#[test]
fn usage_errors_exit_one() {
    let t = tempfile::tempdir().unwrap();
    assert_eq!(planegen(&["frobnicate"], t.path()).status.code(), Some(1));
    assert_eq!(planegen(&[], t.path()).status.code(), Some(1));
    assert_eq!(planegen(&["--help"], t.path()).status.code(), Some(0));
    let o = planegen(
        &[
            "gen-pairs",
            "--count",
            "2",
            "--out",
            "/proc/definitely/not/writable",
        ],
        t.path(),
    );
    assert_eq!(o.status.code(), Some(1));
}
