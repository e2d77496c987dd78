//! Premise extraction, caption filtering and caption text.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::{abs_cos, abs_sin, collinear_height, concyclic_spread, EXACT_TOL};
use crate::geom::{angle_at, Vec2};
use crate::lang::{Constraint, PointId, Problem, RelationKind};
use crate::seed::fnv1a64;
use crate::synth::Diagram;

/// Bumped whenever any sentence template below changes.
pub const CAPTION_TEMPLATE_VERSION: u32 = 1;

/// Kinds that survive caption filtering.
pub const CAPTION_KINDS: [RelationKind; 4] = [
    RelationKind::Concyclic,
    RelationKind::Perpendicular,
    RelationKind::AngleMeasure,
    RelationKind::LengthMeasure,
];

/// Kinds a premise may carry: the six visual ones plus the non-visual
/// relations the language can express.
pub const PREMISE_KINDS: [RelationKind; 12] = RelationKind::RELATIONS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Measure {
    /// Whole degrees.
    Degrees(i32),
    /// Hundredths of a problem-language length unit.
    Centi(i64),
}

impl Measure {
    pub fn degrees(v: f64) -> Self {
        Measure::Degrees(v.round() as i32)
    }

    pub fn length(v: f64) -> Self {
        Measure::Centi((v * 100.0).round() as i64)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Measure::Degrees(d) => write!(f, "{d}"),
            Measure::Centi(c) => write!(f, "{}", c as f64 / 100.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Premise {
    pub kind: RelationKind,
    pub args: Vec<PointId>,
    pub value: Option<Measure>,
    pub visual: bool,
}

impl Premise {
    /// Builds a premise with canonical argument order.
    pub fn new(kind: RelationKind, args: Vec<PointId>, value: Option<Measure>) -> Self {
        assert!(
            PREMISE_KINDS.contains(&kind),
            "{kind} is not a premise kind"
        );
        assert_eq!(args.len(), kind.arity());
        Self {
            kind,
            args: canonical_args(kind, args),
            value,
            visual: kind.is_visual(),
        }
    }

    pub fn perpendicular(a: &PointId, b: &PointId, c: &PointId, d: &PointId) -> Self {
        Self::new(
            RelationKind::Perpendicular,
            vec![a.clone(), b.clone(), c.clone(), d.clone()],
            None,
        )
    }

    pub fn parallel(a: &PointId, b: &PointId, c: &PointId, d: &PointId) -> Self {
        Self::new(
            RelationKind::Parallel,
            vec![a.clone(), b.clone(), c.clone(), d.clone()],
            None,
        )
    }
}

impl fmt::Display for Premise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        if let Some(v) = self.value {
            write!(f, " = {v}")?;
        }
        Ok(())
    }
}

fn sorted_pair(a: PointId, b: PointId) -> [PointId; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

fn canonical_args(kind: RelationKind, mut a: Vec<PointId>) -> Vec<PointId> {
    use RelationKind::*;
    match kind {
        Perpendicular | Parallel | EqLength => {
            let l1 = sorted_pair(a[0].clone(), a[1].clone());
            let l2 = sorted_pair(a[2].clone(), a[3].clone());
            let (x, y) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
            x.into_iter().chain(y).collect()
        }
        Collinear | Concyclic => {
            a.sort();
            a
        }
        AngleMeasure => {
            let [lo, hi] = sorted_pair(a[0].clone(), a[2].clone());
            vec![lo, a[1].clone(), hi]
        }
        LengthMeasure => sorted_pair(a[0].clone(), a[1].clone()).to_vec(),
        Midpoint => {
            let [lo, hi] = sorted_pair(a[1].clone(), a[2].clone());
            vec![a[0].clone(), lo, hi]
        }
        Foot => {
            let [lo, hi] = sorted_pair(a[2].clone(), a[3].clone());
            vec![a[0].clone(), a[1].clone(), lo, hi]
        }
        Circumcenter => {
            a[1..].sort();
            a
        }
        EqAngle => {
            let angle = |v: &[PointId]| {
                let [lo, hi] = sorted_pair(v[0].clone(), v[2].clone());
                vec![lo, v[1].clone(), hi]
            };
            let x = angle(&a[0..3]);
            let y = angle(&a[3..6]);
            if x <= y {
                x.into_iter().chain(y).collect()
            } else {
                y.into_iter().chain(x).collect()
            }
        }
        EqRatio => {
            // s0/s1 = s2/s3 is preserved by swapping sides, inverting both,
            // and exchanging the means (s1 <-> s2).
            let s: Vec<[PointId; 2]> = (0..4)
                .map(|i| sorted_pair(a[2 * i].clone(), a[2 * i + 1].clone()))
                .collect();
            let forms = [
                [0, 1, 2, 3],
                [2, 3, 0, 1],
                [1, 0, 3, 2],
                [3, 2, 1, 0],
                [0, 2, 1, 3],
                [1, 3, 0, 2],
                [2, 0, 3, 1],
                [3, 1, 2, 0],
            ];
            forms
                .iter()
                .map(|f| f.iter().flat_map(|&i| s[i].clone()).collect::<Vec<_>>())
                .min()
                .expect("non-empty")
        }
        _ => a,
    }
}

/// Facts a constraint asserts, restated as premises. Object constructors
/// expand into the relations their shape implies.
fn restate(c: &Constraint, d: &Diagram) -> Vec<Premise> {
    use RelationKind::*;
    let a = &c.args;
    let p = |i: usize| a[i].clone();
    let perp = |i, j, k, l| Premise::perpendicular(&a[i], &a[j], &a[k], &a[l]);
    let para = |i, j, k, l| Premise::parallel(&a[i], &a[j], &a[k], &a[l]);
    let eqlen = |i: usize, j: usize, k: usize, l: usize| {
        Premise::new(EqLength, vec![p(i), p(j), p(k), p(l)], None)
    };
    match c.kind {
        Segment | Triangle | CircleThrough | Free => vec![],
        Square => vec![
            perp(0, 1, 1, 2),
            perp(1, 2, 2, 3),
            perp(2, 3, 3, 0),
            perp(3, 0, 0, 1),
            para(0, 1, 2, 3),
            para(1, 2, 3, 0),
            eqlen(0, 1, 1, 2),
            eqlen(1, 2, 2, 3),
            eqlen(2, 3, 3, 0),
        ],
        Rectangle => vec![
            perp(0, 1, 1, 2),
            perp(1, 2, 2, 3),
            perp(2, 3, 3, 0),
            perp(3, 0, 0, 1),
            para(0, 1, 2, 3),
            para(1, 2, 3, 0),
            eqlen(0, 1, 2, 3),
            eqlen(1, 2, 3, 0),
        ],
        Parallelogram => vec![
            para(0, 1, 2, 3),
            para(1, 2, 3, 0),
            eqlen(0, 1, 2, 3),
            eqlen(1, 2, 3, 0),
        ],
        Trapezoid => vec![para(0, 1, 2, 3)],
        Pentagon => vec![
            eqlen(0, 1, 1, 2),
            eqlen(1, 2, 2, 3),
            eqlen(2, 3, 3, 4),
            eqlen(3, 4, 4, 0),
        ],
        AngleMeasure => {
            let deg = angle_at(d.pos(&a[0]), d.pos(&a[1]), d.pos(&a[2])).to_degrees();
            vec![Premise::new(
                AngleMeasure,
                a.clone(),
                Some(Measure::degrees(deg)),
            )]
        }
        LengthMeasure => {
            let len = d.pos(&a[0]).dist(d.pos(&a[1])) / d.length_scale;
            vec![Premise::new(
                LengthMeasure,
                a.clone(),
                Some(Measure::length(len)),
            )]
        }
        kind => vec![Premise::new(kind, a.clone(), None)],
    }
}

fn push_unique(out: &mut Vec<Premise>, seen: &mut HashSet<Premise>, p: Premise) {
    if seen.insert(p.clone()) {
        out.push(p);
    }
}

/// Asserted facts first (constraint order), then emergent visual facts:
/// collinear triples, concyclic quadruples, and perpendicular / parallel
/// pairs of drawn segments.
pub fn derive_premises(d: &Diagram, p: &Problem) -> Vec<Premise> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for c in p.constraints() {
        for prem in restate(c, d) {
            push_unique(&mut out, &mut seen, prem);
        }
    }
    for prem in emergent_premises(d) {
        push_unique(&mut out, &mut seen, prem);
    }
    out
}

fn emergent_premises(d: &Diagram) -> Vec<Premise> {
    let ids: Vec<&PointId> = d.points.iter().map(|(p, _)| p).collect();
    let pts: Vec<Vec2> = d.points.iter().map(|(_, v)| *v).collect();
    let n = pts.len();
    let mut out = Vec::new();
    let mut collinear = vec![vec![vec![false; n]; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if collinear_height(pts[i], pts[j], pts[k]) <= EXACT_TOL {
                    for (x, y, z) in [
                        (i, j, k),
                        (i, k, j),
                        (j, i, k),
                        (j, k, i),
                        (k, i, j),
                        (k, j, i),
                    ] {
                        collinear[x][y][z] = true;
                    }
                    out.push(Premise::new(
                        RelationKind::Collinear,
                        vec![ids[i].clone(), ids[j].clone(), ids[k].clone()],
                        None,
                    ));
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if collinear[i][j][k] {
                    continue;
                }
                for l in k + 1..n {
                    if collinear[i][j][l] || collinear[i][k][l] || collinear[j][k][l] {
                        continue;
                    }
                    if let Some((spread, _)) = concyclic_spread([pts[i], pts[j], pts[k], pts[l]]) {
                        if spread <= EXACT_TOL {
                            out.push(Premise::new(
                                RelationKind::Concyclic,
                                vec![
                                    ids[i].clone(),
                                    ids[j].clone(),
                                    ids[k].clone(),
                                    ids[l].clone(),
                                ],
                                None,
                            ));
                        }
                    }
                }
            }
        }
    }
    let segs = &d.segments;
    for s in 0..segs.len() {
        for t in s + 1..segs.len() {
            let (a, b) = &segs[s];
            let (c, e) = &segs[t];
            let (pa, pb, pc, pe) = (d.pos(a), d.pos(b), d.pos(c), d.pos(e));
            let u = pb - pa;
            let v = pe - pc;
            if abs_cos(u, v) <= EXACT_TOL {
                out.push(Premise::perpendicular(a, b, c, e));
            } else if abs_sin(u, v) <= EXACT_TOL {
                let same_line = collinear_height(pa, pb, pc) <= EXACT_TOL
                    && collinear_height(pa, pb, pe) <= EXACT_TOL;
                if !same_line {
                    out.push(Premise::parallel(a, b, c, e));
                }
            }
        }
    }
    out
}

pub fn passes_caption_filter(p: &Premise) -> bool {
    CAPTION_KINDS.contains(&p.kind)
}

/// Keeps concyclicity, perpendicularity, angle and length measures.
pub fn filter_premises(ps: &[Premise]) -> Vec<Premise> {
    ps.iter()
        .filter(|p| passes_caption_filter(p))
        .cloned()
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caption {
    pub sentences: Vec<String>,
    /// Index into the premise list each sentence was instantiated from.
    pub premise_ids: Vec<usize>,
}

impl Caption {
    pub fn text(&self) -> String {
        self.sentences.join(" ")
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaptionError {
    #[error("premise `{0}` is not allowed in captions")]
    UnfilteredPremise(String),
}

fn upper(ids: &[PointId]) -> String {
    ids.iter().map(PointId::label).collect()
}

pub fn sentence(p: &Premise) -> Result<String, CaptionError> {
    let a = &p.args;
    let s = match (p.kind, p.value) {
        (RelationKind::Perpendicular, _) => {
            format!(
                "{} is perpendicular to {}.",
                upper(&a[0..2]),
                upper(&a[2..4])
            )
        }
        (RelationKind::Concyclic, _) => format!(
            "Points {}, {}, {} and {} lie on the same circle.",
            a[0].label(),
            a[1].label(),
            a[2].label(),
            a[3].label()
        ),
        (RelationKind::AngleMeasure, Some(v)) => {
            format!("Angle {} measures {v} degrees.", upper(a))
        }
        (RelationKind::LengthMeasure, Some(v)) => format!("Segment {} has length {v}.", upper(a)),
        _ => return Err(CaptionError::UnfilteredPremise(p.to_string())),
    };
    Ok(s)
}

pub fn caption_from_premises(ps: &[Premise]) -> Result<Caption, CaptionError> {
    let mut sentences = Vec::with_capacity(ps.len());
    for p in ps {
        if !passes_caption_filter(p) {
            return Err(CaptionError::UnfilteredPremise(p.to_string()));
        }
        sentences.push(sentence(p)?);
    }
    Ok(Caption {
        premise_ids: (0..ps.len()).collect(),
        sentences,
    })
}

/// Order-sensitive content hash of a premise list, as 16 hex digits.
pub fn premise_hash(ps: &[Premise]) -> String {
    let text: Vec<String> = ps.iter().map(Premise::to_string).collect();
    format!("{:016x}", fnv1a64(text.join(";").as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::pid;
    use crate::synth::{CircleElem, RecordEntry};

    fn diagram(points: &[(&str, f64, f64)], segs: &[(&str, &str)]) -> Diagram {
        Diagram {
            points: points
                .iter()
                .map(|(n, x, y)| (pid(n), Vec2::new(*x, *y)))
                .collect(),
            segments: segs.iter().map(|(a, b)| (pid(a), pid(b))).collect(),
            circles: Vec::<CircleElem>::new(),
            construction_record: Vec::<RecordEntry>::new(),
            length_scale: 1.0,
        }
    }

    fn empty_problem() -> Problem {
        Problem { clauses: vec![] }
    }

    fn prem(kind: RelationKind, args: &[&str], value: Option<Measure>) -> Premise {
        Premise::new(kind, args.iter().map(|a| pid(a)).collect(), value)
    }

    #[test]
    fn unit_square() {
        let d = diagram(
            &[
                ("a", 0.0, 0.0),
                ("b", 1.0, 0.0),
                ("c", 1.0, 1.0),
                ("d", 0.0, 1.0),
            ],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")],
        );
        let ps = derive_premises(&d, &empty_problem());
        assert!(ps.contains(&prem(
            RelationKind::Perpendicular,
            &["a", "b", "b", "c"],
            None
        )));
        assert!(ps.contains(&prem(RelationKind::Parallel, &["a", "b", "c", "d"], None)));
    }

    #[test]
    fn circle_points() {
        let pts: Vec<(&str, f64, f64)> = [("a", 0.0), ("b", 90.0), ("c", 180.0), ("d", 270.0)]
            .iter()
            .map(|(n, deg)| {
                (
                    *n,
                    f64::cos(f64::to_radians(*deg)),
                    f64::sin(f64::to_radians(*deg)),
                )
            })
            .chain(std::iter::once(("o", 0.0, 0.0)))
            .collect();
        let ps = derive_premises(&diagram(&pts, &[]), &empty_problem());
        assert!(ps.contains(&prem(RelationKind::Concyclic, &["d", "c", "b", "a"], None)));
    }

    #[test]
    fn asserted_angle_value() {
        let r = 60f64.to_radians();
        let d = Diagram {
            construction_record: vec![RecordEntry {
                constraint: Constraint::with_value(
                    RelationKind::AngleMeasure,
                    &["a", "b", "c"],
                    60.0,
                ),
                residual: 0.0,
            }],
            ..diagram(
                &[("a", 1.0, 0.0), ("b", 0.0, 0.0), ("c", r.cos(), r.sin())],
                &[],
            )
        };
        let p = Problem {
            clauses: vec![crate::lang::Clause {
                new_points: vec![pid("a"), pid("b"), pid("c")],
                constraints: vec![Constraint::with_value(
                    RelationKind::AngleMeasure,
                    &["a", "b", "c"],
                    60.0,
                )],
            }],
        };
        let ps = derive_premises(&d, &p);
        assert_eq!(
            ps[0],
            prem(
                RelationKind::AngleMeasure,
                &["c", "b", "a"],
                Some(Measure::Degrees(60))
            )
        );
    }

    #[test]
    fn canonical_forms_compare_equal() {
        assert_eq!(
            prem(RelationKind::Perpendicular, &["d", "c", "b", "a"], None),
            prem(RelationKind::Perpendicular, &["a", "b", "c", "d"], None)
        );
        assert_eq!(
            prem(
                RelationKind::EqRatio,
                &["a", "b", "c", "d", "e", "f", "g", "h"],
                None
            ),
            prem(
                RelationKind::EqRatio,
                &["d", "c", "b", "a", "h", "g", "f", "e"],
                None
            )
        );
        assert_eq!(
            prem(
                RelationKind::EqRatio,
                &["a", "b", "c", "d", "e", "f", "g", "h"],
                None
            ),
            prem(
                RelationKind::EqRatio,
                &["a", "b", "e", "f", "c", "d", "g", "h"],
                None
            )
        );
        assert_ne!(
            prem(RelationKind::AngleMeasure, &["a", "b", "c"], None),
            prem(RelationKind::AngleMeasure, &["b", "a", "c"], None)
        );
    }

    #[test]
    fn filter_examples() {
        let perp = prem(RelationKind::Perpendicular, &["a", "b", "b", "c"], None);
        let coll = prem(RelationKind::Collinear, &["a", "b", "c"], None);
        let ang = prem(
            RelationKind::AngleMeasure,
            &["a", "b", "c"],
            Some(Measure::Degrees(60)),
        );
        assert_eq!(
            filter_premises(&[perp.clone(), coll, ang.clone()]),
            vec![perp, ang]
        );
        assert_eq!(filter_premises(&[]), vec![]);
        let para = prem(RelationKind::Parallel, &["a", "b", "c", "d"], None);
        let mid = prem(RelationKind::Midpoint, &["m", "a", "b"], None);
        let eq = prem(RelationKind::EqLength, &["a", "b", "c", "d"], None);
        assert_eq!(filter_premises(&[para, mid, eq]), vec![]);
    }

    #[test]
    fn caption_templates() {
        let ang = prem(
            RelationKind::AngleMeasure,
            &["a", "b", "c"],
            Some(Measure::Degrees(60)),
        );
        assert_eq!(
            caption_from_premises(&[ang]).unwrap().text(),
            "Angle ABC measures 60 degrees."
        );
        assert!(caption_from_premises(&[]).unwrap().is_empty());
        let perp = prem(RelationKind::Perpendicular, &["a", "b", "b", "c"], None);
        let cyc = prem(RelationKind::Concyclic, &["a", "b", "c", "d"], None);
        let cap = caption_from_premises(&[perp, cyc]).unwrap();
        assert_eq!(
            cap.sentences,
            vec![
                "AB is perpendicular to BC.".to_string(),
                "Points A, B, C and D lie on the same circle.".to_string()
            ]
        );
        assert_eq!(cap.premise_ids, vec![0, 1]);
        let len = prem(
            RelationKind::LengthMeasure,
            &["b", "a"],
            Some(Measure::length(1.25)),
        );
        assert_eq!(sentence(&len).unwrap(), "Segment AB has length 1.25.");
        let coll = prem(RelationKind::Collinear, &["a", "b", "c"], None);
        assert!(matches!(
            caption_from_premises(&[coll]),
            Err(CaptionError::UnfilteredPremise(_))
        ));
    }
}
