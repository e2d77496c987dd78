//! Plane vectors and the handful of closed-form constructions the solver
//! and the detectors share.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Vec2 {
        self / self.norm()
    }

    /// Counter-clockwise rotation by `theta` radians.
    pub fn rotate(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        self + (o - self) * t
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Unsigned angle at `vertex` between rays to `a` and `c`, in radians.
pub fn angle_at(a: Vec2, vertex: Vec2, c: Vec2) -> f64 {
    let u = a - vertex;
    let v = c - vertex;
    u.cross(v).abs().atan2(u.dot(v))
}

/// Circle through three points, `None` when they are (nearly) collinear.
pub fn circumcircle(a: Vec2, b: Vec2, c: Vec2) -> Option<(Vec2, f64)> {
    let ab = b - a;
    let ac = c - a;
    let d = 2.0 * ab.cross(ac);
    let scale = ab.norm() * ac.norm();
    if d.abs() <= 1e-12 * scale.max(1e-300) {
        return None;
    }
    let ab2 = ab.dot(ab);
    let ac2 = ac.dot(ac);
    let off = Vec2::new(ac.y * ab2 - ab.y * ac2, ab.x * ac2 - ac.x * ab2) / d;
    let center = a + off;
    Some((center, off.norm()))
}

/// Orthogonal projection of `p` on the line through `a` and `b`.
pub fn project_on_line(p: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let d = b - a;
    a + d * ((p - a).dot(d) / d.dot(d))
}

/// Distance from `p` to the line through `a` and `b`.
pub fn line_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    (p - a).cross(d).abs() / d.norm()
}

/// A one-dimensional set of candidate positions for a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Locus {
    Point(Vec2),
    Line { origin: Vec2, dir: Vec2 },
    Ray { origin: Vec2, dir: Vec2 },
    Circle { center: Vec2, radius: f64 },
}

impl Locus {
    /// Whether a point produced by a line/circle intersection respects the
    /// ray restriction (rays are intersected as full lines first).
    fn admits(&self, p: Vec2) -> bool {
        match *self {
            Locus::Ray { origin, dir } => (p - origin).dot(dir) > 0.0,
            _ => true,
        }
    }
}

fn line_params(l: &Locus) -> Option<(Vec2, Vec2)> {
    match *l {
        Locus::Line { origin, dir } | Locus::Ray { origin, dir } => Some((origin, dir)),
        _ => None,
    }
}

/// All intersection points of two loci. Point loci intersect with anything
/// by returning the point itself; callers verify residuals afterwards.
pub fn intersect(a: &Locus, b: &Locus) -> Vec<Vec2> {
    if let Locus::Point(p) = *a {
        return vec![p];
    }
    if let Locus::Point(p) = *b {
        return vec![p];
    }
    let raw = match (line_params(a), line_params(b)) {
        (Some((o1, d1)), Some((o2, d2))) => {
            let den = d1.cross(d2);
            if den.abs() < 1e-12 * d1.norm() * d2.norm() {
                vec![]
            } else {
                let t = (o2 - o1).cross(d2) / den;
                vec![o1 + d1 * t]
            }
        }
        (Some((o, d)), None) | (None, Some((o, d))) => {
            let (c, r) = match (a, b) {
                (Locus::Circle { center, radius }, _) | (_, Locus::Circle { center, radius }) => {
                    (*center, *radius)
                }
                _ => unreachable!(),
            };
            line_circle(o, d, c, r)
        }
        (None, None) => match (*a, *b) {
            (
                Locus::Circle {
                    center: c1,
                    radius: r1,
                },
                Locus::Circle {
                    center: c2,
                    radius: r2,
                },
            ) => circle_circle(c1, r1, c2, r2),
            _ => vec![],
        },
    };
    raw.into_iter()
        .filter(|p| a.admits(*p) && b.admits(*p))
        .collect()
}

fn line_circle(o: Vec2, d: Vec2, c: Vec2, r: f64) -> Vec<Vec2> {
    let u = d.normalized();
    let foot = o + u * (c - o).dot(u);
    let h2 = r * r - (foot - c).dot(foot - c);
    if h2 < 0.0 {
        return vec![];
    }
    let h = h2.sqrt();
    vec![foot - u * h, foot + u * h]
}

fn circle_circle(c1: Vec2, r1: f64, c2: Vec2, r2: f64) -> Vec<Vec2> {
    let d = c1.dist(c2);
    if d < 1e-12 || d > r1 + r2 || d < (r1 - r2).abs() {
        return vec![];
    }
    let a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let u = (c2 - c1) / d;
    let m = c1 + u * a;
    vec![m - u.perp() * h, m + u.perp() * h]
}
