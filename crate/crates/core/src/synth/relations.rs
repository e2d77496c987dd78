//! Per-relation geometry: residuals, the locus a single unknown point is
//! confined to, and the closed-form templates for object constructors.

use std::f64::consts::PI;

use rand::Rng;

use crate::geom::{angle_at, circumcircle, project_on_line, Locus, Vec2};
use crate::lang::{Constraint, PointId, RelationKind};

/// Large finite residual reported when a relation is undefined at the
/// current coordinates (e.g. the circumcircle of collinear points).
const UNDEFINED: f64 = 1e3;

/// Signed residual components of `c`; all zero iff the relation holds.
///
/// `length_scale` converts problem-unit lengths into frame units.
pub fn residuals(c: &Constraint, p: &[Vec2], length_scale: f64) -> Vec<f64> {
    use RelationKind::*;
    match c.kind {
        Perpendicular => vec![(p[1] - p[0]).dot(p[3] - p[2])],
        Parallel => vec![(p[1] - p[0]).cross(p[3] - p[2])],
        Collinear => vec![(p[1] - p[0]).cross(p[2] - p[0])],
        Concyclic => match circumcircle(p[0], p[1], p[2]) {
            Some((center, r)) => vec![p[3].dist(center) - r],
            None => vec![UNDEFINED],
        },
        AngleMeasure => {
            let target = c.value.unwrap_or(0.0).to_radians();
            vec![angle_at(p[0], p[1], p[2]) - target]
        }
        LengthMeasure => vec![p[0].dist(p[1]) - c.value.unwrap_or(0.0) * length_scale],
        Midpoint => {
            let m = (p[1] + p[2]) * 0.5;
            vec![p[0].x - m.x, p[0].y - m.y]
        }
        Foot => {
            let d = p[3] - p[2];
            vec![(p[0] - p[2]).cross(d), (p[1] - p[0]).dot(d)]
        }
        Circumcenter => {
            let r = p[0].dist(p[1]);
            vec![p[0].dist(p[2]) - r, p[0].dist(p[3]) - r]
        }
        EqLength => vec![p[0].dist(p[1]) - p[2].dist(p[3])],
        EqAngle => vec![angle_at(p[0], p[1], p[2]) - angle_at(p[3], p[4], p[5])],
        EqRatio => vec![p[0].dist(p[1]) * p[6].dist(p[7]) - p[2].dist(p[3]) * p[4].dist(p[5])],
        Segment | Triangle | CircleThrough | Free => vec![],
        Square => {
            let side = (p[1] - p[0]).perp();
            let c = p[1] + side;
            let d = p[0] + side;
            vec![p[2].x - c.x, p[2].y - c.y, p[3].x - d.x, p[3].y - d.y]
        }
        Rectangle => {
            let closure = p[0] + p[2] - p[1] - p[3];
            vec![(p[1] - p[0]).dot(p[2] - p[1]), closure.x, closure.y]
        }
        Parallelogram => {
            let closure = p[0] + p[2] - p[1] - p[3];
            vec![closure.x, closure.y]
        }
        Trapezoid => vec![(p[1] - p[0]).cross(p[2] - p[3])],
        Pentagon => {
            let step = 2.0 * PI / 5.0;
            let mut out = Vec::with_capacity(6);
            for i in 2..5 {
                let want = p[i - 1] + (p[i - 1] - p[i - 2]).rotate(step);
                out.push(p[i].x - want.x);
                out.push(p[i].y - want.y);
            }
            out
        }
    }
}

pub fn max_abs(r: &[f64]) -> f64 {
    r.iter().fold(0.0f64, |m, v| {
        if v.is_nan() {
            f64::INFINITY
        } else {
            m.max(v.abs())
        }
    })
}

/// Locus of `target` implied by `c`, given every other argument is known.
/// Returns `None` when the relation does not pin the point to a curve the
/// solver has a closed form for.
pub fn locus<R: Rng>(
    c: &Constraint,
    target: &PointId,
    known: &dyn Fn(&PointId) -> Option<Vec2>,
    rng: &mut R,
) -> Option<Locus> {
    use RelationKind::*;
    let slots: Vec<usize> = c
        .args
        .iter()
        .enumerate()
        .filter(|(_, a)| *a == target)
        .map(|(i, _)| i)
        .collect();
    if slots.is_empty() {
        return None;
    }
    let mut pts = Vec::with_capacity(c.args.len());
    for (i, a) in c.args.iter().enumerate() {
        if slots.contains(&i) {
            pts.push(Vec2::ZERO);
        } else {
            pts.push(known(a)?);
        }
    }
    let p = &pts;
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    match (c.kind, slots.as_slice()) {
        (Perpendicular | Parallel, &[i]) => {
            let (line, other) = if i < 2 {
                ((0, 1), (2, 3))
            } else {
                ((2, 3), (0, 1))
            };
            let anchor = if i == line.0 { p[line.1] } else { p[line.0] };
            let d = p[other.1] - p[other.0];
            let dir = if c.kind == Perpendicular { d.perp() } else { d };
            Some(Locus::Line {
                origin: anchor,
                dir,
            })
        }
        // Right angle at the shared point: Thales circle on the other two.
        (Perpendicular, &[1, 2]) => {
            let (a, b) = (p[0], p[3]);
            Some(Locus::Circle {
                center: (a + b) * 0.5,
                radius: a.dist(b) * 0.5,
            })
        }
        (Perpendicular, &[0, 3]) => {
            let (a, b) = (p[1], p[2]);
            Some(Locus::Circle {
                center: (a + b) * 0.5,
                radius: a.dist(b) * 0.5,
            })
        }
        (Collinear, &[i]) => {
            let others: Vec<Vec2> = (0..3).filter(|&j| j != i).map(|j| p[j]).collect();
            Some(Locus::Line {
                origin: others[0],
                dir: others[1] - others[0],
            })
        }
        (Concyclic, &[i]) => {
            let others: Vec<Vec2> = (0..4).filter(|&j| j != i).map(|j| p[j]).collect();
            let (center, radius) = circumcircle(others[0], others[1], others[2])?;
            Some(Locus::Circle { center, radius })
        }
        (AngleMeasure, &[i]) if i != 1 => {
            let vertex = p[1];
            let arm = if i == 0 { p[2] } else { p[0] };
            let theta = c.value?.to_radians();
            Some(Locus::Ray {
                origin: vertex,
                dir: (arm - vertex).normalized().rotate(sign * theta),
            })
        }
        (LengthMeasure, &[i]) => Some(Locus::Circle {
            center: p[1 - i],
            radius: c.value?,
        }),
        (Midpoint, &[0]) => Some(Locus::Point((p[1] + p[2]) * 0.5)),
        (Midpoint, &[i]) => Some(Locus::Point(p[0] * 2.0 - p[3 - i])),
        (Foot, &[0]) => Some(Locus::Point(project_on_line(p[1], p[2], p[3]))),
        (Foot, &[1]) => Some(Locus::Line {
            origin: p[0],
            dir: (p[3] - p[2]).perp(),
        }),
        (Foot, &[i]) => {
            let other = if i == 2 { p[3] } else { p[2] };
            Some(Locus::Line {
                origin: p[0],
                dir: other - p[0],
            })
        }
        (Circumcenter, &[0]) => {
            let (center, _) = circumcircle(p[1], p[2], p[3])?;
            Some(Locus::Point(center))
        }
        (Circumcenter, &[i]) => {
            let other = (1..4).find(|&j| j != i)?;
            Some(Locus::Circle {
                center: p[0],
                radius: p[0].dist(p[other]),
            })
        }
        (EqLength, &[i]) => {
            let partner = i ^ 1;
            let (o0, o1) = if i < 2 { (2, 3) } else { (0, 1) };
            Some(Locus::Circle {
                center: p[partner],
                radius: p[o0].dist(p[o1]),
            })
        }
        (EqAngle, &[i]) if i % 3 != 1 => {
            let base = i / 3 * 3;
            let other = 3 - base;
            let vertex = p[base + 1];
            let arm = if i == base { p[base + 2] } else { p[base] };
            let theta = angle_at(p[other], p[other + 1], p[other + 2]);
            Some(Locus::Ray {
                origin: vertex,
                dir: (arm - vertex).normalized().rotate(sign * theta),
            })
        }
        (EqRatio, &[i]) => {
            // |p0p1| * |p6p7| = |p2p3| * |p4p5|
            let partner = i ^ 1;
            let seg = |a: usize| p[a].dist(p[a + 1]);
            let radius = match i / 2 {
                0 => seg(2) * seg(4) / seg(6),
                3 => seg(2) * seg(4) / seg(0),
                1 => seg(0) * seg(6) / seg(4),
                _ => seg(0) * seg(6) / seg(2),
            };
            if !radius.is_finite() {
                return None;
            }
            Some(Locus::Circle {
                center: p[partner],
                radius,
            })
        }
        _ => None,
    }
}

/// Places the unknown vertices of an object constructor from its already
/// known leading vertices. `known[i]` is `Some` for fixed arguments.
pub fn place_object<R: Rng>(kind: RelationKind, known: &[Option<Vec2>], rng: &mut R) -> Vec<Vec2> {
    use RelationKind::*;
    let mut out: Vec<Vec2> = Vec::with_capacity(known.len());
    let random_point = |rng: &mut R| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let side = rng.gen_range(0.8..1.6);
    let heading = rng.gen_range(0.0..2.0 * PI);
    // Shape parameters drawn up front so the stream does not depend on which
    // vertices happen to be known.
    let aspect = if rng.gen_bool(0.5) {
        rng.gen_range(0.45..0.8)
    } else {
        rng.gen_range(1.25..2.0)
    };
    let slant = if rng.gen_bool(0.5) {
        rng.gen_range(25.0f64..80.0)
    } else {
        rng.gen_range(100.0f64..155.0)
    }
    .to_radians();
    let leg = rng.gen_range(40.0f64..140.0).to_radians();
    let shrink = rng.gen_range(0.3..0.75);
    let stretch = rng.gen_range(0.6..1.4);
    for (i, k) in known.iter().enumerate() {
        if let Some(v) = k {
            out.push(*v);
            continue;
        }
        let v = match (kind, i) {
            (_, 0) => random_point(rng),
            (Triangle, _) | (Free, _) => random_point(rng),
            (CircleThrough, 1) => out[0] + Vec2::from_angle(heading) * (side * 0.6),
            (_, 1) => out[0] + Vec2::from_angle(heading) * side,
            (Square, 2) => out[1] + (out[1] - out[0]).perp(),
            (Rectangle, 2) => out[1] + (out[1] - out[0]).perp() * aspect,
            (Parallelogram, 2) => out[1] + (out[1] - out[0]).rotate(slant) * stretch,
            (Trapezoid, 2) => out[1] + (out[1] - out[0]).rotate(leg) * stretch,
            (Trapezoid, 3) => out[2] + (out[0] - out[1]) * shrink,
            (Square | Rectangle | Parallelogram, 3) => out[0] + out[2] - out[1],
            (Pentagon, _) => out[i - 1] + (out[i - 1] - out[i - 2]).rotate(2.0 * PI / 5.0),
            _ => random_point(rng),
        };
        out.push(v);
    }
    out
}

/// Collinear point sets a constraint asserts.
pub fn asserted_lines(c: &Constraint) -> Vec<Vec<PointId>> {
    use RelationKind::*;
    let a = &c.args;
    match c.kind {
        Collinear => vec![a.clone()],
        Midpoint => vec![a.clone()],
        Foot => vec![vec![a[0].clone(), a[2].clone(), a[3].clone()]],
        Parallel if a[0] == a[2] || a[0] == a[3] || a[1] == a[2] || a[1] == a[3] => {
            vec![a.clone()]
        }
        _ => vec![],
    }
}

/// A circle a constraint asserts: optional center point, and the points on it.
#[derive(Clone, Debug, PartialEq)]
pub struct AssertedCircle {
    pub center: Option<PointId>,
    /// Distinguishes circles around the same center with different radii.
    pub radius_key: Option<u64>,
    pub points: Vec<PointId>,
}

pub fn asserted_circles(c: &Constraint) -> Vec<AssertedCircle> {
    use RelationKind::*;
    let a = &c.args;
    let ring = |center: &PointId, pts: Vec<PointId>| AssertedCircle {
        center: Some(center.clone()),
        radius_key: None,
        points: pts,
    };
    let free = |pts: Vec<PointId>| AssertedCircle {
        center: None,
        radius_key: None,
        points: pts,
    };
    match c.kind {
        Concyclic | Square | Rectangle | Pentagon => vec![free(a.clone())],
        CircleThrough => vec![ring(&a[0], vec![a[1].clone()])],
        Circumcenter => vec![ring(&a[0], a[1..].to_vec())],
        EqLength => {
            let mut out = vec![];
            for (x, y) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
                if a[x] == a[y] {
                    out.push(ring(&a[x], vec![a[x ^ 1].clone(), a[y ^ 1].clone()]));
                }
            }
            out
        }
        LengthMeasure => {
            let key = c.value.map(f64::to_bits);
            vec![
                AssertedCircle {
                    center: Some(a[0].clone()),
                    radius_key: key,
                    points: vec![a[1].clone()],
                },
                AssertedCircle {
                    center: Some(a[1].clone()),
                    radius_key: key,
                    points: vec![a[0].clone()],
                },
            ]
        }
        // Thales: a right angle at a shared vertex puts it on the circle
        // over the other two points.
        Perpendicular => {
            let mut out = vec![];
            for (x, y) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
                if a[x] == a[y] && a[x ^ 1] != a[y ^ 1] {
                    out.push(free(vec![a[x].clone(), a[x ^ 1].clone(), a[y ^ 1].clone()]));
                }
            }
            out
        }
        Foot => vec![
            free(vec![a[0].clone(), a[1].clone(), a[2].clone()]),
            free(vec![a[0].clone(), a[1].clone(), a[3].clone()]),
        ],
        _ => vec![],
    }
}
