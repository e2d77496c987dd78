use ndarray::Array2;
use planegen_contrastive::input::INPUT_LEN;
use planegen_contrastive::loss::{clip_da_loss, clip_loss, DomainEmbeds};
use planegen_contrastive::nn::Mat;
use planegen_contrastive::probe::{linear_probe, ProbeConfig, Split};
use planegen_contrastive::retrieval::retrieval_metrics;
use planegen_contrastive::train::Model;
use planegen_core::seed::rng;
use proptest::prelude::*;
use rand::Rng;

fn same_rows(n: usize) -> Mat {
    Array2::from_shape_fn((n, 8), |(_, j)| if j == 3 { 1.0 } else { 0.0 })
}

fn unit_rows(v: Vec<f64>, d: usize) -> Mat {
    let n = v.len() / d;
    let mut m = Array2::from_shape_vec((n, d), v).unwrap();
    for mut r in m.rows_mut() {
        let s = r.dot(&r).sqrt().max(1e-9);
        r /= s;
    }
    m
}

#[test]
fn uniform_batches() {
    for n in [2usize, 8, 64] {
        let e = same_rows(n);
        let l = clip_loss(&e, &e, 0.07, false).unwrap().loss;
        assert!((l - (n as f64).ln()).abs() <= 1e-12);
        let l = clip_loss(&e, &e, 0.07, true).unwrap().loss;
        assert!((l - (n as f64).ln()).abs() <= 1e-12);
        let d = DomainEmbeds {
            diagram: &e,
            caption: &e,
            transferred: &e,
        };
        let da = clip_da_loss(&e, &e, &[d], 0.07, false).unwrap();
        assert!((da.loss - 3.0 * (n as f64).ln()).abs() <= 1e-9);
    }
}

#[test]
fn random_retrieval_is_mid_gallery() {
    let mut r = rng(17);
    let q = unit_rows((0..200 * 16).map(|_| r.gen_range(-1.0..1.0)).collect(), 16);
    let g = unit_rows((0..101 * 16).map(|_| r.gen_range(-1.0..1.0)).collect(), 16);
    let matches: Vec<usize> = (0..200).map(|i| i % 101).collect();
    let m = retrieval_metrics(&q, &g, &matches);
    assert!((41.0..=61.0).contains(&m.mean_rank), "{}", m.mean_rank);
}

#[test]
fn probe_on_shuffled_labels_is_chance() {
    let mut r = rng(23);
    let mk = |n: usize, r: &mut rand_chacha::ChaCha8Rng| {
        let x = unit_rows((0..n * 64).map(|_| r.gen_range(-1.0..1.0)).collect(), 64);
        let y: Vec<usize> = (0..n).map(|_| r.gen_range(0..5)).collect();
        (x, y)
    };
    let (xa, ya) = mk(1000, &mut r);
    let (xb, yb) = mk(500, &mut r);
    let (xc, yc) = mk(2000, &mut r);
    let res = linear_probe(
        Split { x: &xa, y: &ya },
        Split { x: &xb, y: &yb },
        Split { x: &xc, y: &yc },
        5,
        &ProbeConfig::default(),
    );
    assert!(
        (0.15..=0.25).contains(&res.test_accuracy),
        "{}",
        res.test_accuracy
    );
}

#[test]
fn one_pixel_moves_the_embedding() {
    let m = Model::init(4);
    let mut r = rng(8);
    for _ in 0..20 {
        let a = Array2::from_shape_fn((1, INPUT_LEN), |_| if r.gen_bool(0.1) { 1.0 } else { 0.0 });
        let mut b = a.clone();
        let k = r.gen_range(0..INPUT_LEN);
        b[[0, k]] = 1.0 - b[[0, k]];
        let (ea, eb) = (m.vision.encode(&a), m.vision.encode(&b));
        assert!(ea.row(0).dot(&eb.row(0)) < 1.0);
    }
}

proptest! {
    #[test]
    fn loss_is_non_negative(v in prop::collection::vec(-1.0f64..1.0, 24..=24), w in prop::collection::vec(-1.0f64..1.0, 24..=24), tau in 0.01f64..2.0) {
        let (q, k) = (unit_rows(v, 6), unit_rows(w, 6));
        prop_assert!(clip_loss(&q, &k, tau, false).unwrap().loss >= 0.0);
        prop_assert!(clip_loss(&q, &k, tau, true).unwrap().loss >= 0.0);
    }

    #[test]
    fn retrieval_ignores_positive_scaling(v in prop::collection::vec(-1.0f64..1.0, 40..=40), w in prop::collection::vec(-1.0f64..1.0, 40..=40), c in 0.01f64..100.0) {
        let (q, g) = (unit_rows(v, 4), unit_rows(w, 4));
        let matches: Vec<usize> = (0..10).rev().collect();
        let a = retrieval_metrics(&q, &g, &matches);
        let b = retrieval_metrics(&q, &(g * c), &matches);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn encoder_outputs_are_unit(seed in any::<u64>(), density in 0.0f64..1.0) {
        let m = Model::init(seed % 16);
        let mut r = rng(seed);
        let x = Array2::from_shape_fn((3, INPUT_LEN), |_| if r.gen_bool(density) { r.gen_range(0.0..1.0) } else { 0.0 });
        let e = m.vision.encode(&x);
        for row in e.rows() {
            prop_assert!((row.dot(&row).sqrt() - 1.0).abs() <= 1e-9);
        }
        let t = m.text.encode_captions(&["Angle ABC measures 30 degrees.".to_string(), String::new()]);
        for row in t.rows() {
            prop_assert!((row.dot(&row).sqrt() - 1.0).abs() <= 1e-9);
        }
    }
}
