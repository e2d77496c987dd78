//! Coordinate realization of a problem.
//!
//! Clauses are processed in order. Object constructors are placed from
//! closed-form templates; every other new point is confined to the loci its
//! constraints imply and, with two or more loci, placed at an analytic
//! intersection. Whatever remains violated is handed to a damped
//! Gauss-Newton pass over the clause's new points. Free parameters come from
//! a per-clause RNG stream, so earlier clauses are unaffected by later ones.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::{intersect, Locus, Vec2};
use crate::lang::{Clause, PointId, Problem};
use crate::seed::{mix, rng};

use super::degeneracy::check_nondegenerate;
use super::diagram::{
    circles_for, push_unique_segment, segments_for, CircleElem, Diagram, RecordEntry,
};
use super::relations::{locus, max_abs, place_object, residuals};

pub const MAX_ATTEMPTS: u64 = 50;
/// Residual bound every accepted diagram satisfies in the canonical frame.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Largest distance of any drawn element from the centroid after normalization.
pub const FRAME_EXTENT: f64 = 0.9;

const WORKING_TOL: f64 = 1e-12;
const LM_LAMBDA: f64 = 1e-3;
const LM_MAX_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("no acceptable diagram within {attempts} attempts")]
    UnsatisfiableWithinBudget { attempts: u64 },
}

pub fn solve_diagram(p: &Problem, seed: u64) -> Result<Diagram, SolveError> {
    for attempt in 0..MAX_ATTEMPTS {
        if let Some(d) = try_solve(p, mix(seed, attempt)) {
            if d.max_residual() <= RESIDUAL_TOL && check_nondegenerate(&d) {
                return Ok(d);
            }
        }
    }
    Err(SolveError::UnsatisfiableWithinBudget {
        attempts: MAX_ATTEMPTS,
    })
}

fn try_solve(p: &Problem, attempt_seed: u64) -> Option<Diagram> {
    let mut pos: BTreeMap<PointId, Vec2> = BTreeMap::new();
    for (ci, clause) in p.clauses.iter().enumerate() {
        let mut r = rng(mix(attempt_seed, ci as u64));
        place_clause(clause, &mut pos, &mut r)?;
    }
    Some(normalize(p, &pos))
}

fn scene_bounds(pos: &BTreeMap<PointId, Vec2>) -> (Vec2, f64) {
    if pos.is_empty() {
        return (Vec2::ZERO, 1.0);
    }
    let n = pos.len() as f64;
    let c = pos.values().fold(Vec2::ZERO, |acc, v| acc + *v) / n;
    let r = pos.values().map(|v| v.dist(c)).fold(0.5, f64::max);
    (c, r)
}

fn sample_on<R: Rng>(l: &Locus, scale: f64, rng: &mut R) -> Vec2 {
    match *l {
        Locus::Point(p) => p,
        Locus::Line { origin, dir } => {
            let t = rng.gen_range(0.25..1.0) * scale;
            let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            origin + dir.normalized() * (s * t)
        }
        Locus::Ray { origin, dir } => {
            origin + dir.normalized() * (rng.gen_range(0.35..1.0) * scale)
        }
        Locus::Circle { center, radius } => {
            center + Vec2::from_angle(rng.gen_range(0.0..2.0 * PI)) * radius
        }
    }
}

fn place_clause(
    clause: &Clause,
    pos: &mut BTreeMap<PointId, Vec2>,
    rng: &mut ChaCha8Rng,
) -> Option<()> {
    for c in clause.constraints.iter().filter(|c| c.kind.is_object()) {
        if c.args.iter().all(|a| pos.contains_key(a)) {
            continue;
        }
        let known: Vec<Option<Vec2>> = c.args.iter().map(|a| pos.get(a).copied()).collect();
        let placed = place_object(c.kind, &known, rng);
        for (a, v) in c.args.iter().zip(placed) {
            pos.entry(a.clone()).or_insert(v);
        }
    }

    loop {
        let pending: Vec<&PointId> = clause
            .new_points
            .iter()
            .filter(|p| !pos.contains_key(*p))
            .collect();
        if pending.is_empty() {
            break;
        }
        // Most constrained point first; ties keep declaration order.
        let mut best: Option<(&PointId, Vec<Locus>)> = None;
        for &pt in &pending {
            let known = |q: &PointId| pos.get(q).copied();
            let loci: Vec<Locus> = clause
                .constraints
                .iter()
                .filter(|c| !c.kind.is_object())
                .filter_map(|c| locus(c, pt, &known, rng))
                .collect();
            if best.as_ref().is_none_or(|(_, l)| loci.len() > l.len()) {
                best = Some((pt, loci));
            }
        }
        let (pt, mut loci) = best?;
        let (center, scale) = scene_bounds(pos);
        let v = match loci.len() {
            0 => center + Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale,
            1 => sample_on(&loci[0], scale, rng),
            _ => {
                loci.sort_by_key(|l| match l {
                    Locus::Point(_) => 0,
                    Locus::Line { .. } | Locus::Ray { .. } => 1,
                    Locus::Circle { .. } => 2,
                });
                let cands = intersect(&loci[0], &loci[1]);
                if cands.is_empty() {
                    sample_on(&loci[0], scale, rng)
                } else {
                    cands[rng.gen_range(0..cands.len())]
                }
            }
        };
        if !(v.x.is_finite() && v.y.is_finite()) {
            return None;
        }
        pos.insert(pt.clone(), v);
    }

    if clause_residual(clause, pos) > WORKING_TOL {
        refine(clause, pos);
        if clause_residual(clause, pos) > WORKING_TOL {
            return None;
        }
    }
    Some(())
}

fn clause_residual_vec(clause: &Clause, pos: &BTreeMap<PointId, Vec2>) -> Vec<f64> {
    let mut out = Vec::new();
    for c in &clause.constraints {
        let pts: Vec<Vec2> = c.args.iter().map(|a| pos[a]).collect();
        out.extend(residuals(c, &pts, 1.0));
    }
    out
}

fn clause_residual(clause: &Clause, pos: &BTreeMap<PointId, Vec2>) -> f64 {
    max_abs(&clause_residual_vec(clause, pos))
}

/// Damped Gauss-Newton over the coordinates of the clause's new points.
fn refine(clause: &Clause, pos: &mut BTreeMap<PointId, Vec2>) {
    let vars = &clause.new_points;
    let n = vars.len() * 2;
    let read = |pos: &BTreeMap<PointId, Vec2>| {
        let mut x = DVector::zeros(n);
        for (i, v) in vars.iter().enumerate() {
            x[2 * i] = pos[v].x;
            x[2 * i + 1] = pos[v].y;
        }
        x
    };
    let write = |pos: &mut BTreeMap<PointId, Vec2>, x: &DVector<f64>| {
        for (i, v) in vars.iter().enumerate() {
            pos.insert(v.clone(), Vec2::new(x[2 * i], x[2 * i + 1]));
        }
    };
    let eval = |pos: &mut BTreeMap<PointId, Vec2>, x: &DVector<f64>| {
        write(pos, x);
        DVector::from_vec(clause_residual_vec(clause, pos))
    };

    let mut x = read(pos);
    let mut r = eval(pos, &x);
    let m = r.len();
    if m == 0 {
        return;
    }
    let mut lambda = LM_LAMBDA;
    for _ in 0..LM_MAX_ITERS {
        let cost = r.norm_squared();
        if !cost.is_finite() || max_abs(r.as_slice()) <= WORKING_TOL * 1e-2 {
            break;
        }
        let mut jac = DMatrix::zeros(m, n);
        for k in 0..n {
            let h = 1e-7 * x[k].abs().max(1.0);
            let mut xp = x.clone();
            xp[k] += h;
            let rp = eval(pos, &xp);
            let mut xm = x.clone();
            xm[k] -= h;
            let rm = eval(pos, &xm);
            jac.set_column(k, &((rp - rm) / (2.0 * h)));
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &r;
        let mut improved = false;
        for _ in 0..8 {
            let damped = &jtj + DMatrix::identity(n, n) * lambda;
            let Some(step) = damped.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let xn = &x + step;
            let rn = eval(pos, &xn);
            if rn.norm_squared() < cost {
                x = xn;
                r = rn;
                lambda = (lambda * 0.1).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    write(pos, &x);
}

/// Translates the centroid to the origin and scales so every point and
/// circle lies within `FRAME_EXTENT` of it.
fn normalize(p: &Problem, pos: &BTreeMap<PointId, Vec2>) -> Diagram {
    let order: Vec<PointId> = p.points().cloned().collect();
    let get = |id: &PointId| pos[id];
    let circles_raw: Vec<CircleElem> = p.constraints().flat_map(|c| circles_for(c, &get)).collect();

    let n = order.len() as f64;
    let centroid = order.iter().fold(Vec2::ZERO, |acc, id| acc + pos[id]) / n;
    let raw = Diagram {
        points: order.iter().map(|id| (id.clone(), pos[id])).collect(),
        segments: vec![],
        circles: circles_raw,
        construction_record: vec![],
        length_scale: 1.0,
    };
    let mut extent = order
        .iter()
        .map(|id| pos[id].dist(centroid))
        .fold(0.0, f64::max);
    for c in &raw.circles {
        extent = extent.max(raw.circle_center(c).dist(centroid) + c.radius);
    }
    let scale = if extent > 0.0 {
        FRAME_EXTENT / extent
    } else {
        1.0
    };
    let mut d = raw.map_similarity(scale, |v| (v - centroid) * scale);

    let get = |id: &PointId| d.pos(id);
    let mut segments = Vec::new();
    let mut circles: Vec<CircleElem> = Vec::new();
    for c in p.constraints() {
        for s in segments_for(c, &get) {
            push_unique_segment(&mut segments, s);
        }
        for ce in circles_for(c, &get) {
            let center = d.circle_center(&ce);
            let dup = circles.iter().any(|o| {
                d.circle_center(o).dist(center) < 1e-9 && (o.radius - ce.radius).abs() < 1e-9
            });
            if !dup {
                circles.push(ce);
            }
        }
    }
    d.segments = segments;
    d.circles = circles;
    d.construction_record = p
        .constraints()
        .map(|c| RecordEntry {
            constraint: c.clone(),
            residual: 0.0,
        })
        .collect();
    let residuals: Vec<f64> = d
        .constraints()
        .map(|c| super::diagram::constraint_residual(c, &d))
        .collect();
    for (entry, r) in d.construction_record.iter_mut().zip(residuals) {
        entry.residual = r;
    }
    d
}
