//! The five diagram-classification tasks: class-conditioned generation with
//! distractor clauses, a geometric label oracle, balanced splits and JSONL
//! manifests.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::{abs_cos, abs_sin, line_angle_deg, EXACT_TOL};
use crate::geom::{angle_at, Vec2};
use crate::lang::{
    parse_problem, serialize_problem, Clause, Constraint, PointId, Problem, RelationKind,
};
use crate::premises::{derive_premises, Premise};
use crate::render::{encode_pgm, encode_png, render_svg, sample_style, DiagramImage, DomainTag};
use crate::seed::{mix, mix3, rng};
use crate::synth::{solve_diagram, AngleGrid, Diagram, ProblemBuilder};

pub const GENERATOR_VERSION: &str = "planegen-bench/1";
pub const MAX_RESAMPLES: u64 = 50;
/// Radial clearance of off-circle points, canonical frame units.
pub const OFF_CIRCLE_MARGIN: f64 = 0.08;
/// Angular margin separating the "otherwise" and shape classes.
pub const CLASS_MARGIN_DEG: f64 = 10.0;
/// Slack on the margin itself: sampled angles may sit exactly on it and
/// solved coordinates reproduce them only to solver precision.
pub const MARGIN_SLACK_DEG: f64 = 1e-6;
/// Tolerance for "collinear" / "perpendicular" in the two-lines oracle.
pub const LINE_SLACK_DEG: f64 = 1.0;
pub const DESK_COUNTS: [usize; 3] = [2_000, 500, 500];
pub const PAPER_COUNTS: [usize; 3] = [50_000, 10_000, 10_000];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskKind {
    Concyclic,
    TwoLines,
    ObjectShape,
    SquareShape,
    AngleDetection,
}

impl TaskKind {
    pub const ALL: [TaskKind; 5] = [
        TaskKind::Concyclic,
        TaskKind::TwoLines,
        TaskKind::ObjectShape,
        TaskKind::SquareShape,
        TaskKind::AngleDetection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Concyclic => "concyclic",
            TaskKind::TwoLines => "twolines",
            TaskKind::ObjectShape => "objectshape",
            TaskKind::SquareShape => "squareshape",
            TaskKind::AngleDetection => "angle",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }

    pub fn choices(self) -> Vec<String> {
        match self {
            TaskKind::Concyclic => (0..=4).map(|k| k.to_string()).collect(),
            TaskKind::TwoLines => vec![
                "perpendicular".into(),
                "collinear".into(),
                "otherwise".into(),
            ],
            TaskKind::ObjectShape => vec![
                "segment".into(),
                "triangle".into(),
                "square".into(),
                "pentagon".into(),
            ],
            TaskKind::SquareShape => vec![
                "trapezoid".into(),
                "parallelogram".into(),
                "rectangle".into(),
            ],
            TaskKind::AngleDetection => (0..13).map(|k| format!("{}°", 15 + 5 * k)).collect(),
        }
    }

    pub fn num_classes(self) -> usize {
        match self {
            TaskKind::Concyclic => 5,
            TaskKind::TwoLines => 3,
            TaskKind::ObjectShape => 4,
            TaskKind::SquareShape => 3,
            TaskKind::AngleDetection => 13,
        }
    }

    /// Fixed question shown with every example of the task.
    pub fn prompt(self) -> &'static str {
        match self {
            TaskKind::Concyclic => "How many of the points lie on the circle?",
            TaskKind::TwoLines => "What is the relation between lines AB and BC?",
            TaskKind::ObjectShape => "Which object is drawn?",
            TaskKind::SquareShape => "What kind of quadrilateral is ABCD?",
            TaskKind::AngleDetection => "What is the measure of angle ABC?",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn id(self) -> u64 {
        self as u64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkExample {
    pub task: TaskKind,
    pub image_path: String,
    pub label: usize,
    pub choices: Vec<String>,
    pub problem_text: String,
    pub seed: u64,
    /// Number of leading clauses forming the foundational structure.
    #[serde(default)]
    pub foundation_clauses: usize,
}

/// One manifest line, in the fixed key order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestLine {
    pub task: String,
    pub split: String,
    pub index: usize,
    pub label: usize,
    pub choices: Vec<String>,
    pub image: String,
    pub problem: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetManifest {
    pub task: TaskKind,
    pub split: Split,
    pub examples: Vec<BenchmarkExample>,
    pub generator_version: String,
    pub dataset_seed: u64,
}

impl DatasetManifest {
    pub fn lines(&self) -> Vec<ManifestLine> {
        self.examples
            .iter()
            .enumerate()
            .map(|(index, ex)| ManifestLine {
                task: self.task.name().to_string(),
                split: self.split.name().to_string(),
                index,
                label: ex.label,
                choices: ex.choices.clone(),
                image: ex.image_path.clone(),
                problem: ex.problem_text.clone(),
                seed: ex.seed,
            })
            .collect()
    }

    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for l in self.lines() {
            s.push_str(&serde_json::to_string(&l).expect("manifest lines serialize"));
            s.push('\n');
        }
        s
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.task.num_classes()];
        for ex in &self.examples {
            c[ex.label] += 1;
        }
        c
    }
}

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("{task:?} class {class} seed {seed}: no label-preserving diagram within {MAX_RESAMPLES} resamples")]
    BudgetExhausted {
        task: TaskKind,
        class: usize,
        seed: u64,
        index: Option<usize>,
    },
    #[error("class {class} out of range for {task:?}")]
    InvalidClass { task: TaskKind, class: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("stored problem no longer parses or solves: {0}")]
    SolveMismatch(String),
}

/// A generated example with its solved geometry.
#[derive(Clone, Debug)]
pub struct GeneratedExample {
    pub example: BenchmarkExample,
    pub problem: Problem,
    pub diagram: Diagram,
}

fn constraint(kind: RelationKind, args: &[&PointId], value: Option<f64>) -> Constraint {
    Constraint {
        kind,
        args: args.iter().map(|p| (*p).clone()).collect(),
        value,
    }
}

/// Foundational structure for `class`; the builder then receives the
/// distractors.
fn foundation<R: Rng>(task: TaskKind, class: usize, r: &mut R) -> ProblemBuilder {
    use RelationKind::*;
    let mut b = ProblemBuilder::new();
    match task {
        TaskKind::Concyclic => {
            let o = b.add_object(CircleThrough);
            for k in 0..4 {
                let x = b.fresh_name();
                let c = if k < class {
                    constraint(EqLength, &[&o[0], &x, &o[0], &o[1]], None)
                } else {
                    constraint(Free, &[&x], None)
                };
                b.push(Clause {
                    new_points: vec![x],
                    constraints: vec![c],
                });
            }
        }
        TaskKind::TwoLines => {
            let ab = b.add_object(Segment);
            let c = b.fresh_name();
            let con = match class {
                0 => constraint(Perpendicular, &[&ab[0], &ab[1], &ab[1], &c], None),
                1 => constraint(Collinear, &[&ab[0], &ab[1], &c], None),
                _ => {
                    let lo = CLASS_MARGIN_DEG as u32;
                    let hi = 90 - lo;
                    let mut deg = r.gen_range(lo..=hi);
                    if r.gen_bool(0.5) {
                        deg = 180 - deg;
                    }
                    constraint(AngleMeasure, &[&ab[0], &ab[1], &c], Some(f64::from(deg)))
                }
            };
            b.push(Clause {
                new_points: vec![c],
                constraints: vec![con],
            });
        }
        TaskKind::ObjectShape => {
            b.add_object([Segment, Triangle, Square, Pentagon][class]);
        }
        TaskKind::SquareShape => {
            b.add_object([Trapezoid, Parallelogram, Rectangle][class]);
        }
        TaskKind::AngleDetection => {
            let ab = b.add_object(Segment);
            let c = b.fresh_name();
            let deg = 15 + 5 * class as u32;
            b.push(Clause {
                new_points: vec![c.clone()],
                constraints: vec![constraint(
                    AngleMeasure,
                    &[&ab[0], &ab[1], &c],
                    Some(f64::from(deg)),
                )],
            });
        }
    }
    b
}

fn foundation_len(task: TaskKind) -> usize {
    match task {
        TaskKind::Concyclic => 5,
        TaskKind::TwoLines | TaskKind::AngleDetection => 2,
        TaskKind::ObjectShape | TaskKind::SquareShape => 1,
    }
}

fn nth_point(p: &Problem, clause: usize, k: usize) -> &PointId {
    &p.clauses[clause].new_points[k]
}

fn two_lines_class(a: Vec2, b: Vec2, c: Vec2) -> Option<usize> {
    let theta = line_angle_deg(b - a, c - b);
    if theta < LINE_SLACK_DEG {
        Some(1)
    } else if (90.0 - theta) < LINE_SLACK_DEG {
        Some(0)
    } else if (CLASS_MARGIN_DEG - MARGIN_SLACK_DEG..=90.0 - CLASS_MARGIN_DEG + MARGIN_SLACK_DEG)
        .contains(&theta)
    {
        Some(2)
    } else {
        None
    }
}

fn regular_polygon(pts: &[Vec2]) -> bool {
    let n = pts.len();
    let side = pts[0].dist(pts[1]);
    let interior = 180.0 * (n as f64 - 2.0) / n as f64;
    (0..n).all(|i| {
        let (p, q, s) = (pts[i], pts[(i + 1) % n], pts[(i + 2) % n]);
        (p.dist(q) - side).abs() <= EXACT_TOL * side.max(1.0)
            && (angle_at(p, q, s).to_degrees() - interior).abs() <= EXACT_TOL
    })
}

fn object_class(pts: &[Vec2]) -> Option<usize> {
    match pts.len() {
        2 if pts[0].dist(pts[1]) > 0.0 => Some(0),
        3 if (pts[1] - pts[0]).cross(pts[2] - pts[0]).abs() > EXACT_TOL => Some(1),
        4 if regular_polygon(pts) => Some(2),
        5 if regular_polygon(pts) => Some(3),
        _ => None,
    }
}

fn quad_class(p: &[Vec2]) -> Option<usize> {
    if p.len() != 4 {
        return None;
    }
    let (ab, bc, cd, da) = (p[1] - p[0], p[2] - p[1], p[3] - p[2], p[0] - p[3]);
    let par1 = abs_sin(ab, cd) <= EXACT_TOL;
    let par2 = abs_sin(bc, da) <= EXACT_TOL;
    match (par1, par2) {
        (true, true) => {
            if abs_cos(ab, bc) <= EXACT_TOL {
                Some(2)
            } else if line_angle_deg(ab, bc) <= 90.0 - CLASS_MARGIN_DEG + MARGIN_SLACK_DEG {
                Some(1)
            } else {
                None
            }
        }
        (true, false) if line_angle_deg(bc, da) >= CLASS_MARGIN_DEG - MARGIN_SLACK_DEG => Some(0),
        (false, true) if line_angle_deg(ab, cd) >= CLASS_MARGIN_DEG - MARGIN_SLACK_DEG => Some(0),
        _ => None,
    }
}

/// Class of a solved diagram, or `None` when the geometry is ambiguous for
/// the task (inside a margin, or not of the foundational form).
pub fn label_from_diagram(task: TaskKind, p: &Problem, d: &Diagram) -> Option<usize> {
    let at = |c: usize, k: usize| d.get(nth_point(p, c, k));
    match task {
        TaskKind::Concyclic => {
            let center = at(0, 0)?;
            let r = center.dist(at(0, 1)?);
            let first = p.clauses[0].new_points.as_slice();
            let mut on = 0;
            for (id, v) in &d.points {
                if first.contains(id) {
                    continue;
                }
                let gap = (v.dist(center) - r).abs();
                if gap <= EXACT_TOL {
                    on += 1;
                } else if gap < OFF_CIRCLE_MARGIN {
                    return None;
                }
            }
            (on <= 4).then_some(on)
        }
        TaskKind::TwoLines => two_lines_class(at(0, 0)?, at(0, 1)?, at(1, 0)?),
        TaskKind::ObjectShape | TaskKind::SquareShape => {
            let pts: Option<Vec<Vec2>> =
                p.clauses[0].new_points.iter().map(|id| d.get(id)).collect();
            let pts = pts?;
            if task == TaskKind::ObjectShape {
                object_class(&pts)
            } else {
                quad_class(&pts)
            }
        }
        TaskKind::AngleDetection => {
            let deg = angle_at(at(0, 0)?, at(0, 1)?, at(1, 0)?).to_degrees();
            let k = ((deg - 15.0) / 5.0).round();
            ((0.0..13.0).contains(&k) && (deg - (15.0 + 5.0 * k)).abs() <= EXACT_TOL)
                .then_some(k as usize)
        }
    }
}

fn truncated(p: &Problem, n: usize) -> Problem {
    Problem {
        clauses: p.clauses[..n.min(p.clauses.len())].to_vec(),
    }
}

/// Samples foundation + 1-3 distractor clauses for `target_class`, solving
/// and re-verifying the label (with and without distractors) each time.
pub fn generate_example(
    task: TaskKind,
    target_class: usize,
    seed: u64,
) -> Result<GeneratedExample, BenchmarkError> {
    if target_class >= task.num_classes() {
        return Err(BenchmarkError::InvalidClass {
            task,
            class: target_class,
        });
    }
    let pool = RelationKind::RELATIONS;
    let base = foundation_len(task);
    for attempt in 0..MAX_RESAMPLES {
        let s = mix(seed, attempt);
        let mut r = rng(s);
        let mut b = foundation(task, target_class, &mut r);
        let extra = r.gen_range(1..=3);
        let mut ok = true;
        for _ in 0..extra {
            ok &= b.add_random_clause(&pool, AngleGrid::Free, 2, &mut r);
        }
        if !ok {
            continue;
        }
        let problem = b.finish();
        debug_assert!(problem.validate().is_ok());
        let Ok(diagram) = solve_diagram(&problem, s) else {
            continue;
        };
        if label_from_diagram(task, &problem, &diagram) != Some(target_class) {
            continue;
        }
        let Ok(bare) = solve_diagram(&truncated(&problem, base), s) else {
            continue;
        };
        if label_from_diagram(task, &truncated(&problem, base), &bare) != Some(target_class) {
            continue;
        }
        return Ok(GeneratedExample {
            example: BenchmarkExample {
                task,
                image_path: String::new(),
                label: target_class,
                choices: task.choices(),
                problem_text: serialize_problem(&problem),
                seed: s,
                foundation_clauses: base,
            },
            problem,
            diagram,
        });
    }
    Err(BenchmarkError::BudgetExhausted {
        task,
        class: target_class,
        seed,
        index: None,
    })
}

/// Re-solves the stored problem under the stored seed and re-derives the
/// label from coordinates.
pub fn verify_label(ex: &BenchmarkExample) -> Result<bool, VerifyError> {
    let p =
        parse_problem(&ex.problem_text).map_err(|e| VerifyError::SolveMismatch(e.to_string()))?;
    let d = solve_diagram(&p, ex.seed).map_err(|e| VerifyError::SolveMismatch(e.to_string()))?;
    Ok(label_from_diagram(ex.task, &p, &d) == Some(ex.label))
}

/// Only right-angle marks are drawn on benchmark images; measures would
/// print the answer.
pub fn benchmark_premises(g: &GeneratedExample) -> Vec<Premise> {
    derive_premises(&g.diagram, &g.problem)
        .into_iter()
        .filter(|p| p.kind == RelationKind::Perpendicular)
        .collect()
}

pub fn render_example(g: &GeneratedExample) -> DiagramImage {
    render_svg(
        &g.diagram,
        &benchmark_premises(g),
        &sample_style(DomainTag::Synthetic, g.example.seed),
    )
}

pub fn example_seed(dataset_seed: u64, split: Split, index: usize) -> u64 {
    mix3(dataset_seed, split.id(), index as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImageFormat {
    Pgm,
    Png,
}

impl ImageFormat {
    pub fn ext(self) -> &'static str {
        match self {
            ImageFormat::Pgm => "pgm",
            ImageFormat::Png => "png",
        }
    }

    pub fn encode(self, img: &DiagramImage) -> Vec<u8> {
        match self {
            ImageFormat::Pgm => encode_pgm(&img.raster),
            ImageFormat::Png => encode_png(&img.raster),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SplitOptions {
    /// Root directory; images go to `<out>/<split>/<task>/<index>.<ext>`.
    pub out_dir: Option<PathBuf>,
    pub format: ImageFormat,
    pub write_svg: bool,
    /// Examples generated and written per parallel batch.
    pub chunk: usize,
}

impl Default for SplitOptions {
    fn default() -> Self {
        Self {
            out_dir: None,
            format: ImageFormat::Pgm,
            write_svg: false,
            chunk: 1024,
        }
    }
}

pub fn image_rel_path(split: Split, task: TaskKind, index: usize, ext: &str) -> String {
    format!("{}/{}/{index}.{ext}", split.name(), task.name())
}

fn write_file(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut f = io::BufWriter::new(fs::File::create(path)?);
    f.write_all(bytes)?;
    f.flush()
}

/// Class for position `index` under round-robin balancing.
pub fn round_robin_class(task: TaskKind, index: usize) -> usize {
    index % task.num_classes()
}

/// Generates `count` examples. With an output directory, renders and
/// writes each image; without one, only the manifest is built.
pub fn generate_split(
    task: TaskKind,
    split: Split,
    count: usize,
    dataset_seed: u64,
    opts: &SplitOptions,
) -> Result<DatasetManifest, BenchmarkError> {
    let ext = opts.format.ext();
    if let Some(dir) = &opts.out_dir {
        fs::create_dir_all(dir.join(split.name()).join(task.name()))?;
    }
    let mut examples = Vec::with_capacity(count);
    let chunk = opts.chunk.max(1);
    for start in (0..count).step_by(chunk) {
        let end = (start + chunk).min(count);
        let batch: Vec<Result<BenchmarkExample, BenchmarkError>> = (start..end)
            .into_par_iter()
            .map(|index| {
                let class = round_robin_class(task, index);
                let seed = example_seed(dataset_seed, split, index);
                let g = generate_example(task, class, seed).map_err(|e| match e {
                    BenchmarkError::BudgetExhausted {
                        task, class, seed, ..
                    } => BenchmarkError::BudgetExhausted {
                        task,
                        class,
                        seed,
                        index: Some(index),
                    },
                    other => other,
                })?;
                let mut ex = g.example.clone();
                ex.image_path = image_rel_path(split, task, index, ext);
                if let Some(dir) = &opts.out_dir {
                    let img = render_example(&g);
                    write_file(&dir.join(&ex.image_path), &opts.format.encode(&img))?;
                    if opts.write_svg {
                        let svg = image_rel_path(split, task, index, "svg");
                        write_file(&dir.join(svg), img.svg.as_bytes())?;
                    }
                }
                Ok(ex)
            })
            .collect();
        for ex in batch {
            examples.push(ex?);
        }
    }
    Ok(DatasetManifest {
        task,
        split,
        examples,
        generator_version: GENERATOR_VERSION.to_string(),
        dataset_seed,
    })
}

/// Manifest path for a split: `<out>/<split>/<task>.jsonl`.
pub fn manifest_path(out: &Path, split: Split, task: TaskKind) -> PathBuf {
    out.join(split.name())
        .join(format!("{}.jsonl", task.name()))
}

pub fn write_manifest(out: &Path, m: &DatasetManifest) -> io::Result<PathBuf> {
    let path = manifest_path(out, m.split, m.task);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    write_file(&path, m.to_jsonl().as_bytes())?;
    Ok(path)
}
