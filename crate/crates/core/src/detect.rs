//! Numeric measures behind relation detection. Both the exact premise
//! detectors (tolerance 1e-6) and the looser degeneracy checks are phrased
//! in terms of these.

use crate::geom::{angle_at, circumcircle, Vec2};

/// Tolerance under which a relation counts as constructed-true.
pub const EXACT_TOL: f64 = 1e-6;

/// Height of the triangle over its longest side: zero iff collinear.
pub fn collinear_height(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let area2 = (b - a).cross(c - a).abs();
    let longest = a.dist(b).max(b.dist(c)).max(c.dist(a));
    if longest == 0.0 {
        0.0
    } else {
        area2 / longest
    }
}

/// Deviation of the triangle's largest angle from a straight angle, in degrees.
pub fn straightness_gap_deg(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let largest = angle_at(b, a, c)
        .max(angle_at(a, b, c))
        .max(angle_at(a, c, b));
    180.0 - largest.to_degrees()
}

/// Spread of the four distances to the circle through the best-conditioned
/// triple (smallest circumradius), with that radius. `None` when every
/// triple is collinear.
pub fn concyclic_spread(p: [Vec2; 4]) -> Option<(f64, f64)> {
    let triples = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    let mut best: Option<(Vec2, f64)> = None;
    for t in triples {
        if let Some((c, r)) = circumcircle(p[t[0]], p[t[1]], p[t[2]]) {
            if best.is_none_or(|(_, br)| r < br) {
                best = Some((c, r));
            }
        }
    }
    let (center, radius) = best?;
    let dists = p.map(|v| v.dist(center));
    let lo = dists.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = dists.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some((hi - lo, radius))
}

/// |cos| of the angle between two directions.
pub fn abs_cos(u: Vec2, v: Vec2) -> f64 {
    (u.dot(v) / (u.norm() * v.norm())).abs()
}

/// |sin| of the angle between two directions.
pub fn abs_sin(u: Vec2, v: Vec2) -> f64 {
    (u.cross(v) / (u.norm() * v.norm())).abs()
}

/// Acute angle between two lines, in degrees within [0, 90].
pub fn line_angle_deg(u: Vec2, v: Vec2) -> f64 {
    abs_sin(u, v).atan2(abs_cos(u, v)).to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures() {
        let o = Vec2::ZERO;
        assert!(collinear_height(o, Vec2::new(1.0, 0.0), Vec2::new(3.0, 0.0)) < 1e-15);
        assert!(straightness_gap_deg(o, Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)) < 1e-9);
        let quad = [0.0f64, 90.0, 180.0, 270.0].map(|d| Vec2::from_angle(d.to_radians()));
        let (spread, r) = concyclic_spread(quad).unwrap();
        assert!(spread < 1e-12 && (r - 1.0).abs() < 1e-12);
        assert!((line_angle_deg(Vec2::new(1.0, 0.0), Vec2::new(-1.0, 1.0)) - 45.0).abs() < 1e-12);
    }
}
