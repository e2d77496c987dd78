//! Rejection test for solved diagrams: points must be well separated, and
//! no triple/quadruple may look collinear/concyclic unless the construction
//! (or exact geometry) makes it so.

use std::collections::BTreeSet;

use crate::detect::{collinear_height, concyclic_spread, straightness_gap_deg, EXACT_TOL};
use crate::lang::PointId;

use super::diagram::Diagram;
use super::relations::{asserted_circles, asserted_lines, AssertedCircle};

pub const MIN_POINT_DISTANCE: f64 = 0.05;
pub const COLLINEAR_SLACK_DEG: f64 = 1.0;
pub const CONCYCLIC_SLACK: f64 = 0.01;
/// Circles larger than this are treated as near-lines, not circles.
const MAX_CIRCLE_RADIUS: f64 = 10.0;

pub fn check_nondegenerate(d: &Diagram) -> bool {
    let pts: Vec<_> = d.points.iter().map(|(_, v)| *v).collect();
    if pts
        .iter()
        .any(|v| !(v.x.is_finite() && v.y.is_finite()) || v.x.abs() > 1.0 || v.y.abs() > 1.0)
    {
        return false;
    }
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[i].dist(pts[j]) < MIN_POINT_DISTANCE {
                return false;
            }
        }
    }
    let ids: Vec<&PointId> = d.points.iter().map(|(p, _)| p).collect();
    let lines = line_sets(d);
    let circles = circle_sets(d);
    let index_in = |set: &BTreeSet<PointId>, i: usize| set.contains(ids[i]);

    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if straightness_gap_deg(pts[i], pts[j], pts[k]) > COLLINEAR_SLACK_DEG {
                    continue;
                }
                let intended = lines
                    .iter()
                    .any(|s| index_in(s, i) && index_in(s, j) && index_in(s, k))
                    || collinear_height(pts[i], pts[j], pts[k]) <= EXACT_TOL;
                if !intended {
                    return false;
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    let Some((spread, radius)) = concyclic_spread([pts[i], pts[j], pts[k], pts[l]])
                    else {
                        continue;
                    };
                    if radius > MAX_CIRCLE_RADIUS || spread > CONCYCLIC_SLACK {
                        continue;
                    }
                    let quad = [i, j, k, l];
                    let intended = circles.iter().any(|s| quad.iter().all(|&q| index_in(s, q)))
                        || spread <= EXACT_TOL;
                    if !intended {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Asserted collinear sets, merged when they share two points.
pub fn line_sets(d: &Diagram) -> Vec<BTreeSet<PointId>> {
    let mut sets: Vec<BTreeSet<PointId>> = d
        .constraints()
        .flat_map(asserted_lines)
        .map(|v| v.into_iter().collect())
        .collect();
    merge_while(&mut sets, 2);
    sets
}

/// Asserted concyclic sets. Circles sharing a center (and radius key) merge,
/// as do circles sharing three points.
pub fn circle_sets(d: &Diagram) -> Vec<BTreeSet<PointId>> {
    let raw: Vec<AssertedCircle> = d.constraints().flat_map(asserted_circles).collect();
    let mut keyed: Vec<(Option<(PointId, Option<u64>)>, BTreeSet<PointId>)> = Vec::new();
    for c in raw {
        let key = c.center.map(|p| (p, c.radius_key));
        let pts: BTreeSet<PointId> = c.points.into_iter().collect();
        match keyed.iter_mut().find(|(k, _)| key.is_some() && *k == key) {
            Some((_, s)) => s.extend(pts),
            None => keyed.push((key, pts)),
        }
    }
    // A circle given by center and one point merges with any same-center
    // circle of unknown radius that shares that point.
    let mut sets: Vec<BTreeSet<PointId>> = Vec::new();
    for (i, (ki, si)) in keyed.iter().enumerate() {
        let mut s = si.clone();
        for (j, (kj, sj)) in keyed.iter().enumerate() {
            if i != j {
                if let (Some((ci, _)), Some((cj, _))) = (ki, kj) {
                    if ci == cj && !si.is_disjoint(sj) {
                        s.extend(sj.iter().cloned());
                    }
                }
            }
        }
        sets.push(s);
    }
    merge_while(&mut sets, 3);
    sets
}

fn merge_while(sets: &mut Vec<BTreeSet<PointId>>, shared: usize) {
    loop {
        let mut merged = false;
        'outer: for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                if sets[i].intersection(&sets[j]).count() >= shared {
                    let other = sets.remove(j);
                    sets[i].extend(other);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
}
