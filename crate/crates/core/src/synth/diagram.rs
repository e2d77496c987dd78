use serde::{Deserialize, Serialize};

use crate::geom::{circumcircle, Vec2};
use crate::lang::{Constraint, PointId, RelationKind};

use super::relations::{max_abs, residuals};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CircleCenter {
    Point(PointId),
    Coords(Vec2),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleElem {
    pub center: CircleCenter,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub constraint: Constraint,
    pub residual: f64,
}

/// Solved coordinates in the canonical frame plus drawable elements.
///
/// Points keep declaration order. `length_scale` is the number of frame
/// units per problem-language length unit, fixed by normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagram {
    pub points: Vec<(PointId, Vec2)>,
    pub segments: Vec<(PointId, PointId)>,
    pub circles: Vec<CircleElem>,
    pub construction_record: Vec<RecordEntry>,
    pub length_scale: f64,
}

impl Diagram {
    pub fn get(&self, id: &PointId) -> Option<Vec2> {
        self.points.iter().find(|(p, _)| p == id).map(|(_, v)| *v)
    }

    pub fn pos(&self, id: &PointId) -> Vec2 {
        self.get(id)
            .unwrap_or_else(|| panic!("point `{id}` missing from diagram"))
    }

    pub fn circle_center(&self, c: &CircleElem) -> Vec2 {
        match &c.center {
            CircleCenter::Point(p) => self.pos(p),
            CircleCenter::Coords(v) => *v,
        }
    }

    pub fn constraints(&self) -> impl Iterator<Item = &Constraint> {
        self.construction_record.iter().map(|r| &r.constraint)
    }

    /// Largest residual over the construction record, recomputed from the
    /// current coordinates.
    pub fn max_residual(&self) -> f64 {
        self.constraints()
            .map(|c| constraint_residual(c, self))
            .fold(0.0, f64::max)
    }

    /// Applies `f` to every coordinate (points and raw circle centers).
    /// `f` must be a similarity with ratio `scale`.
    pub fn map_similarity(&self, scale: f64, f: impl Fn(Vec2) -> Vec2) -> Diagram {
        let mut d = self.clone();
        for (_, v) in d.points.iter_mut() {
            *v = f(*v);
        }
        for c in d.circles.iter_mut() {
            if let CircleCenter::Coords(v) = &mut c.center {
                *v = f(*v);
            }
            c.radius *= scale;
        }
        d.length_scale *= scale;
        d
    }

    /// Rotation about the frame origin, the transform applied by rendering.
    pub fn rotated(&self, degrees: f64) -> Diagram {
        let theta = degrees.to_radians();
        self.map_similarity(1.0, |v| v.rotate(theta))
    }
}

pub fn constraint_residual(c: &Constraint, d: &Diagram) -> f64 {
    let pts: Vec<Vec2> = c.args.iter().map(|a| d.pos(a)).collect();
    max_abs(&residuals(c, &pts, d.length_scale))
}

/// Segments drawn for a constraint, given solved coordinates.
pub(crate) fn segments_for(
    c: &Constraint,
    pos: &dyn Fn(&PointId) -> Vec2,
) -> Vec<(PointId, PointId)> {
    use RelationKind::*;
    let a = &c.args;
    let pair = |i: usize, j: usize| (a[i].clone(), a[j].clone());
    let ring = |n: usize| (0..n).map(|i| pair(i, (i + 1) % n)).collect::<Vec<_>>();
    let extremes = |ids: &[PointId]| {
        let mut best = (ids[0].clone(), ids[1].clone());
        let mut best_d = -1.0;
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                let d = pos(&ids[i]).dist(pos(&ids[j]));
                if d > best_d {
                    best_d = d;
                    best = (ids[i].clone(), ids[j].clone());
                }
            }
        }
        best
    };
    match c.kind {
        Segment | LengthMeasure => vec![pair(0, 1)],
        Triangle => ring(3),
        Square | Rectangle | Parallelogram | Trapezoid => ring(4),
        Pentagon => ring(5),
        Perpendicular | Parallel => vec![pair(0, 1), pair(2, 3)],
        Collinear => vec![extremes(a)],
        Midpoint => vec![pair(1, 2)],
        Foot => vec![
            pair(0, 1),
            extremes(&[a[0].clone(), a[2].clone(), a[3].clone()]),
        ],
        AngleMeasure => vec![pair(1, 0), pair(1, 2)],
        EqAngle => vec![pair(1, 0), pair(1, 2), pair(4, 3), pair(4, 5)],
        EqRatio => vec![pair(0, 1), pair(2, 3), pair(4, 5), pair(6, 7)],
        // Equal distances are not drawn: radii would give circle membership away.
        EqLength | Concyclic | Circumcenter | CircleThrough | Free => vec![],
    }
}

pub(crate) fn circles_for(c: &Constraint, pos: &dyn Fn(&PointId) -> Vec2) -> Vec<CircleElem> {
    use RelationKind::*;
    let a = &c.args;
    match c.kind {
        CircleThrough | Circumcenter => vec![CircleElem {
            center: CircleCenter::Point(a[0].clone()),
            radius: pos(&a[0]).dist(pos(&a[1])),
        }],
        Concyclic => match circumcircle(pos(&a[0]), pos(&a[1]), pos(&a[2])) {
            Some((center, radius)) => vec![CircleElem {
                center: CircleCenter::Coords(center),
                radius,
            }],
            None => vec![],
        },
        _ => vec![],
    }
}

pub(crate) fn push_unique_segment(list: &mut Vec<(PointId, PointId)>, s: (PointId, PointId)) {
    if s.0 == s.1 {
        return;
    }
    let dup = list
        .iter()
        .any(|(a, b)| (*a == s.0 && *b == s.1) || (*a == s.1 && *b == s.0));
    if !dup {
        list.push(s);
    }
}
