//! Test-only oracles. Everything here recomputes geometric facts from raw
//! coordinates with formulas deliberately different from the library's
//! (polar angles, law of cosines, shoelace areas, Cramer solves), so a
//! shared bug cannot make both sides agree.

use planegen_core::benchmark::TaskKind;
use planegen_core::lang::{Constraint, Problem, RelationKind};
use planegen_core::premises::{Measure, Premise};
use planegen_core::synth::Diagram;

type P = (f64, f64);

fn sub(a: P, b: P) -> P {
    (a.0 - b.0, a.1 - b.1)
}

fn len(v: P) -> f64 {
    v.0.hypot(v.1)
}

fn dist(a: P, b: P) -> f64 {
    len(sub(a, b))
}

fn heading(v: P) -> f64 {
    v.1.atan2(v.0)
}

/// |u||v| cos of the angle between, via polar headings.
fn polar_dot(u: P, v: P) -> f64 {
    len(u) * len(v) * (heading(u) - heading(v)).cos()
}

/// |u||v| sin of the angle between, via polar headings.
fn polar_cross(u: P, v: P) -> f64 {
    len(u) * len(v) * (heading(v) - heading(u)).sin()
}

/// Twice the signed triangle area (shoelace).
fn shoelace(a: P, b: P, c: P) -> f64 {
    a.0 * (b.1 - c.1) + b.0 * (c.1 - a.1) + c.0 * (a.1 - b.1)
}

/// Interior angle at `b`, radians. Kahan's half-angle form
/// 2·atan2(|u|v| - v|u||, |u|v| + v|u||), accurate at 0 and 180 degrees.
pub fn angle_at(a: P, b: P, c: P) -> f64 {
    let (u, v) = (sub(a, b), sub(c, b));
    let (nu, nv) = (dist(a, b), dist(c, b));
    let d = (u.0 * nv - v.0 * nu, u.1 * nv - v.1 * nu);
    let s = (u.0 * nv + v.0 * nu, u.1 * nv + v.1 * nu);
    2.0 * d.0.hypot(d.1).atan2(s.0.hypot(s.1))
}

/// Circle through three points by Cramer's rule on the bisector equations.
pub fn circle3(a: P, b: P, c: P) -> Option<(P, f64)> {
    let (a1, b1, c1) = (
        2.0 * (b.0 - a.0),
        2.0 * (b.1 - a.1),
        b.0 * b.0 + b.1 * b.1 - a.0 * a.0 - a.1 * a.1,
    );
    let (a2, b2, c2) = (
        2.0 * (c.0 - a.0),
        2.0 * (c.1 - a.1),
        c.0 * c.0 + c.1 * c.1 - a.0 * a.0 - a.1 * a.1,
    );
    let det = a1 * b2 - a2 * b1;
    if det.abs() < 1e-14 {
        return None;
    }
    let o = ((c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det);
    Some((o, dist(o, a)))
}

/// Independent residual of one constraint; 0 means exactly satisfied.
pub fn residual(c: &Constraint, p: &[P], length_scale: f64) -> f64 {
    use RelationKind::*;
    let r: Vec<f64> = match c.kind {
        Perpendicular => vec![polar_dot(sub(p[1], p[0]), sub(p[3], p[2]))],
        Parallel => vec![polar_cross(sub(p[1], p[0]), sub(p[3], p[2]))],
        Collinear => vec![shoelace(p[0], p[1], p[2])],
        Concyclic => match circle3(p[0], p[1], p[2]) {
            Some((o, r)) => vec![dist(o, p[3]) - r],
            None => vec![f64::INFINITY],
        },
        AngleMeasure => vec![angle_at(p[0], p[1], p[2]) - c.value.unwrap().to_radians()],
        LengthMeasure => vec![dist(p[0], p[1]) - c.value.unwrap() * length_scale],
        Midpoint => vec![
            dist(p[0], p[1]) - dist(p[0], p[2]),
            dist(p[1], p[2]) / 2.0 - dist(p[0], p[1]),
        ],
        Foot => vec![
            shoelace(p[0], p[2], p[3]),
            polar_dot(sub(p[1], p[0]), sub(p[3], p[2])),
        ],
        Circumcenter => vec![
            dist(p[0], p[1]) - dist(p[0], p[2]),
            dist(p[0], p[1]) - dist(p[0], p[3]),
        ],
        EqLength => vec![dist(p[0], p[1]) - dist(p[2], p[3])],
        EqAngle => vec![angle_at(p[0], p[1], p[2]) - angle_at(p[3], p[4], p[5])],
        EqRatio => vec![dist(p[0], p[1]) * dist(p[6], p[7]) - dist(p[2], p[3]) * dist(p[4], p[5])],
        Segment | Triangle | CircleThrough | Free => vec![],
        Square => {
            let s = dist(p[0], p[1]);
            let mut v: Vec<f64> = (1..4).map(|i| dist(p[i], p[(i + 1) % 4]) - s).collect();
            v.push(polar_dot(sub(p[1], p[0]), sub(p[2], p[1])));
            v.push(polar_dot(sub(p[2], p[1]), sub(p[3], p[2])));
            v.push(dist(p[0], p[2]) - dist(p[1], p[3]));
            // Counter-clockwise vertex order.
            v.push(if shoelace(p[0], p[1], p[2]) > 0.0 {
                0.0
            } else {
                f64::INFINITY
            });
            v
        }
        Rectangle => (0..4)
            .map(|i| {
                polar_dot(
                    sub(p[(i + 1) % 4], p[i]),
                    sub(p[(i + 2) % 4], p[(i + 1) % 4]),
                )
            })
            .collect(),
        Parallelogram => vec![
            dist(p[0], p[1]) - dist(p[2], p[3]),
            dist(p[1], p[2]) - dist(p[3], p[0]),
            polar_cross(sub(p[1], p[0]), sub(p[2], p[3])),
        ],
        Trapezoid => vec![polar_cross(sub(p[1], p[0]), sub(p[2], p[3]))],
        Pentagon => {
            let s = dist(p[0], p[1]);
            let mut v: Vec<f64> = (1..5).map(|i| dist(p[i], p[(i + 1) % 5]) - s).collect();
            for i in 0..3 {
                v.push(angle_at(p[i], p[i + 1], p[i + 2]) - 108f64.to_radians());
            }
            v
        }
    };
    r.into_iter().map(f64::abs).fold(0.0, f64::max)
}

fn coords(d: &Diagram, ids: &[planegen_core::PointId]) -> Vec<P> {
    ids.iter()
        .map(|id| {
            let v = d.get(id).expect("point present");
            (v.x, v.y)
        })
        .collect()
}

pub fn diagram_residual(c: &Constraint, d: &Diagram) -> f64 {
    residual(c, &coords(d, &c.args), d.length_scale)
}

/// Worst oracle residual over every constraint of `p` on `d`.
pub fn max_problem_residual(p: &Problem, d: &Diagram) -> f64 {
    p.constraints()
        .map(|c| diagram_residual(c, d))
        .fold(0.0, f64::max)
}

/// Whether a premise holds on `d`, at the exact-detection tolerance, using
/// scale-free forms for the visual relations.
pub fn premise_holds(p: &Premise, d: &Diagram) -> bool {
    use RelationKind::*;
    const TOL: f64 = 1e-6;
    let x = coords(d, &p.args);
    match (p.kind, p.value) {
        (Perpendicular, _) => {
            let (u, v) = (sub(x[1], x[0]), sub(x[3], x[2]));
            (polar_dot(u, v) / (len(u) * len(v))).abs() <= TOL
        }
        (Parallel, _) => {
            let (u, v) = (sub(x[1], x[0]), sub(x[3], x[2]));
            (polar_cross(u, v) / (len(u) * len(v))).abs() <= TOL
        }
        (Collinear, _) => {
            let longest = dist(x[0], x[1]).max(dist(x[1], x[2])).max(dist(x[0], x[2]));
            shoelace(x[0], x[1], x[2]).abs() / longest <= TOL
        }
        (Concyclic, _) => {
            // Some triple must define a circle the fourth point lies on.
            [[0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 3, 1], [1, 2, 3, 0]]
                .iter()
                .any(|t| {
                    circle3(x[t[0]], x[t[1]], x[t[2]])
                        .is_some_and(|(o, r)| (dist(o, x[t[3]]) - r).abs() <= TOL)
                })
        }
        (AngleMeasure, Some(Measure::Degrees(v))) => {
            (angle_at(x[0], x[1], x[2]).to_degrees() - f64::from(v)).abs() <= 0.5 + 1e-9
        }
        (LengthMeasure, Some(Measure::Centi(v))) => {
            (dist(x[0], x[1]) / d.length_scale * 100.0 - v as f64).abs() <= 0.5 + 1e-9
        }
        (kind, _) => {
            let c = Constraint {
                kind,
                args: p.args.clone(),
                value: None,
            };
            residual(&c, &x, d.length_scale) <= TOL
        }
    }
}

/// Label recomputed from coordinates, mirroring the task definitions:
/// concyclic counts points (besides the circle's own two) on the circle,
/// two-lines classifies the acute angle between AB and BC, shapes inspect
/// the foundational object's vertices, angle reads off ∠ABC.
pub fn label_oracle(task: TaskKind, p: &Problem, d: &Diagram) -> Option<usize> {
    let pt = |c: usize, k: usize| {
        let v = d.get(&p.clauses[c].new_points[k])?;
        Some((v.x, v.y))
    };
    match task {
        TaskKind::Concyclic => {
            let (o, r0) = (pt(0, 0)?, pt(0, 1)?);
            let r = dist(o, r0);
            let mut on = 0;
            for (id, v) in &d.points {
                if p.clauses[0].new_points.contains(id) {
                    continue;
                }
                let gap = (dist(o, (v.x, v.y)) - r).abs();
                if gap <= 1e-6 {
                    on += 1;
                } else if gap < 0.08 {
                    return None;
                }
            }
            (on <= 4).then_some(on)
        }
        TaskKind::TwoLines => {
            let (a, b, c) = (pt(0, 0)?, pt(0, 1)?, pt(1, 0)?);
            let u = sub(b, a);
            let v = sub(c, b);
            let cos = (polar_dot(u, v) / (len(u) * len(v))).abs().min(1.0);
            let theta = cos.acos().to_degrees();
            if theta < 1.0 {
                Some(1)
            } else if theta > 89.0 {
                Some(0)
            } else if (10.0 - 1e-6..=80.0 + 1e-6).contains(&theta) {
                Some(2)
            } else {
                None
            }
        }
        TaskKind::ObjectShape => {
            let n = p.clauses[0].new_points.len();
            let v: Vec<P> = (0..n).map(|k| pt(0, k)).collect::<Option<_>>()?;
            let equal_sides = |m: usize| {
                (0..m).all(|i| (dist(v[i], v[(i + 1) % m]) - dist(v[0], v[1])).abs() <= 1e-6)
            };
            let angles = |m: usize, want: f64| {
                (0..m).all(|i| {
                    (angle_at(v[i], v[(i + 1) % m], v[(i + 2) % m]).to_degrees() - want).abs()
                        <= 1e-6
                })
            };
            match n {
                2 => Some(0),
                3 => (shoelace(v[0], v[1], v[2]).abs() > 1e-6).then_some(1),
                4 => (equal_sides(4) && angles(4, 90.0)).then_some(2),
                5 => (equal_sides(5) && angles(5, 108.0)).then_some(3),
                _ => None,
            }
        }
        TaskKind::SquareShape => {
            let v: Vec<P> = (0..4).map(|k| pt(0, k)).collect::<Option<_>>()?;
            let line_angle = |u: P, w: P| {
                let c = (polar_dot(u, w) / (len(u) * len(w))).abs().min(1.0);
                c.acos().to_degrees()
            };
            let (ab, bc, cd, da) = (
                sub(v[1], v[0]),
                sub(v[2], v[1]),
                sub(v[3], v[2]),
                sub(v[0], v[3]),
            );
            let par = |u: P, w: P| (polar_cross(u, w) / (len(u) * len(w))).abs() <= 1e-6;
            match (par(ab, cd), par(bc, da)) {
                (true, true) => {
                    let corner = line_angle(ab, bc);
                    if (90.0 - corner).abs() <= 1e-4 {
                        Some(2)
                    } else if corner <= 80.0 + 1e-6 {
                        Some(1)
                    } else {
                        None
                    }
                }
                (true, false) => (line_angle(bc, da) >= 10.0 - 1e-6).then_some(0),
                (false, true) => (line_angle(ab, cd) >= 10.0 - 1e-6).then_some(0),
                _ => None,
            }
        }
        TaskKind::AngleDetection => {
            let deg = angle_at(pt(0, 0)?, pt(0, 1)?, pt(1, 0)?).to_degrees();
            (0..13).find(|k| (deg - (15.0 + 5.0 * *k as f64)).abs() <= 1e-6)
        }
    }
}
