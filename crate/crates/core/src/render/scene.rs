//! Display list in pixel coordinates (y down). Both the SVG document and the
//! raster are produced from the same list.

use std::f64::consts::{PI, TAU};

use crate::geom::{circumcircle, Vec2};
use crate::lang::{PointId, RelationKind};
use crate::premises::{Measure, Premise};
use crate::synth::{Diagram, FRAME_EXTENT};

use super::font::{self, text_extent};
use super::style::{FontFamily, Rgb, StyleConfig};

/// Radius of the frame disk in canvas widths; the rest is label margin.
const DISK_FRACTION: f64 = 0.42;

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Line {
        a: Vec2,
        b: Vec2,
        width: f64,
        class: &'static str,
    },
    Circle {
        center: Vec2,
        radius: f64,
        width: f64,
    },
    Polyline {
        points: Vec<Vec2>,
        width: f64,
        class: &'static str,
    },
    /// Counter-clockwise on screen means negative `sweep` (y points down).
    Arc {
        center: Vec2,
        radius: f64,
        start: f64,
        sweep: f64,
        width: f64,
        class: &'static str,
    },
    Disk {
        center: Vec2,
        radius: f64,
    },
    Text {
        origin: Vec2,
        text: String,
        size: f64,
        face: FontFamily,
        class: &'static str,
    },
}

impl Item {
    /// Drawn with the fill colour rather than the stroke colour.
    pub fn uses_fill(&self) -> bool {
        matches!(self, Item::Disk { .. } | Item::Text { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub size: u32,
    pub background: Rgb,
    pub stroke: Rgb,
    pub fill: Rgb,
    pub items: Vec<Item>,
}

impl Scene {
    pub fn blank(style: &StyleConfig) -> Self {
        Self {
            size: style.resolution_px,
            background: style.palette.background,
            stroke: style.palette.stroke,
            fill: style.palette.fill,
            items: vec![],
        }
    }

    pub fn count_class(&self, class: &str) -> usize {
        self.items
            .iter()
            .filter(|it| match it {
                Item::Line { class: c, .. }
                | Item::Polyline { class: c, .. }
                | Item::Arc { class: c, .. }
                | Item::Text { class: c, .. } => *c == class,
                _ => false,
            })
            .count()
    }
}

#[derive(Clone, Copy, Debug)]
struct Rect {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl Rect {
    fn overlap(&self, o: &Rect) -> f64 {
        let w = self.x1.min(o.x1) - self.x0.max(o.x0);
        let h = self.y1.min(o.y1) - self.y0.max(o.y0);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }

    fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// Length of segment `ab` inside the rectangle (Liang-Barsky clip).
    fn clip_len(&self, a: Vec2, b: Vec2) -> f64 {
        let d = b - a;
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for (p, q) in [
            (-d.x, a.x - self.x0),
            (d.x, self.x1 - a.x),
            (-d.y, a.y - self.y0),
            (d.y, self.y1 - a.y),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return 0.0;
                }
            } else {
                let t = q / p;
                if p < 0.0 {
                    t0 = t0.max(t);
                } else {
                    t1 = t1.min(t);
                }
            }
        }
        if t1 > t0 {
            (t1 - t0) * d.norm()
        } else {
            0.0
        }
    }
}

struct Layout {
    size: f64,
    scale: f64,
}

impl Layout {
    fn to_px(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.size / 2.0 + v.x * self.scale,
            self.size / 2.0 - v.y * self.scale,
        )
    }
}

/// Intersection of lines `ab` and `cd`, if they are not parallel.
fn line_meet(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> Option<Vec2> {
    let u = b - a;
    let v = d - c;
    let den = u.cross(v);
    if den.abs() < 1e-12 {
        return None;
    }
    Some(a + u * ((c - a).cross(v) / den))
}

/// Direction from `x` toward whichever of `p`, `q` lies farther from it.
fn away(x: Vec2, p: Vec2, q: Vec2) -> Vec2 {
    let far = if x.dist(p) >= x.dist(q) { p } else { q };
    (far - x).normalized()
}

fn centered_text(at: Vec2, text: String, style: &StyleConfig, class: &'static str) -> Item {
    let size = f64::from(style.font_size_px);
    let (w, h) = text_extent(&text, style.font_family, size);
    Item::Text {
        origin: Vec2::new(at.x - w / 2.0, at.y - h / 2.0),
        text,
        size,
        face: style.font_family,
        class,
    }
}

fn text_rect(item: &Item) -> Option<Rect> {
    match item {
        Item::Text {
            origin,
            text,
            size,
            face,
            ..
        } => {
            let (w, h) = text_extent(text, *face, *size);
            Some(Rect {
                x0: origin.x,
                y0: origin.y,
                x1: origin.x + w,
                y1: origin.y + h,
            })
        }
        _ => None,
    }
}

/// Builds the display list for `d` (already in the canonical frame) under
/// `style`. Rotation is applied to the geometry; text stays upright.
pub fn build_scene(d: &Diagram, premises: &[Premise], style: &StyleConfig) -> Scene {
    let d = d.rotated(style.rotation_deg);
    let size = f64::from(style.resolution_px);
    let lay = Layout {
        size,
        scale: size * DISK_FRACTION / FRAME_EXTENT,
    };
    let lw = f64::from(style.line_width_px);
    let px = |id: &PointId| lay.to_px(d.pos(id));
    let mut scene = Scene::blank(style);
    let mut items = Vec::new();

    let mut circles: Vec<(Vec2, f64)> = d
        .circles
        .iter()
        .map(|c| (lay.to_px(d.circle_center(c)), c.radius * lay.scale))
        .collect();
    for p in premises
        .iter()
        .filter(|p| p.kind == RelationKind::Concyclic)
    {
        let pts: Vec<Vec2> = p.args.iter().map(&px).collect();
        let drawn = circles.iter().any(|(c, r)| {
            pts.iter()
                .all(|q| (q.dist(*c) - r).abs() <= 1e-6 * lay.scale)
        });
        if !drawn {
            if let Some(c) = circumcircle(pts[0], pts[1], pts[2]) {
                circles.push(c);
            }
        }
    }
    for (center, radius) in &circles {
        items.push(Item::Circle {
            center: *center,
            radius: *radius,
            width: lw,
        });
    }
    for (a, b) in &d.segments {
        items.push(Item::Line {
            a: px(a),
            b: px(b),
            width: lw,
            class: "segment",
        });
    }

    let mark = (size * 0.035).max(6.0);
    let arc_r = (size * 0.06).max(10.0);
    let mut annotations = Vec::new();
    for p in premises {
        let a: Vec<Vec2> = p.args.iter().map(&px).collect();
        match (p.kind, p.value) {
            (RelationKind::Perpendicular, _) if style.right_angle_mark => {
                let Some(x) = line_meet(a[0], a[1], a[2], a[3]) else {
                    continue;
                };
                let u = away(x, a[0], a[1]) * mark;
                let v = away(x, a[2], a[3]) * mark;
                items.push(Item::Polyline {
                    points: vec![x + u, x + u + v, x + v],
                    width: (lw * 0.75).max(1.0),
                    class: "right-angle",
                });
            }
            (RelationKind::AngleMeasure, Some(Measure::Degrees(deg))) => {
                let b = a[1];
                let ta = (a[0] - b).y.atan2((a[0] - b).x);
                let tc = (a[2] - b).y.atan2((a[2] - b).x);
                let mut sweep = (tc - ta).rem_euclid(TAU);
                if sweep > PI {
                    sweep -= TAU;
                }
                items.push(Item::Arc {
                    center: b,
                    radius: arc_r,
                    start: ta,
                    sweep,
                    width: (lw * 0.75).max(1.0),
                    class: "angle-arc",
                });
                let bis = Vec2::from_angle(ta + sweep / 2.0);
                let at = b + bis * (arc_r + f64::from(style.font_size_px) * 1.1);
                annotations.push(centered_text(at, format!("{deg}°"), style, "angle-label"));
            }
            (RelationKind::LengthMeasure, Some(v @ Measure::Centi(_))) => {
                let mid = a[0].lerp(a[1], 0.5);
                let n = (a[1] - a[0]).perp().normalized();
                let n = if n.y > 0.0 { -n } else { n };
                let at = mid + n * (f64::from(style.font_size_px) * 0.9 + lw);
                annotations.push(centered_text(at, v.to_string(), style, "length-label"));
            }
            (RelationKind::EqLength, _) if style.tick_marks => {
                let drawn = |i: usize, j: usize| {
                    d.segments.iter().any(|(s, t)| {
                        (*s == p.args[i] && *t == p.args[j]) || (*s == p.args[j] && *t == p.args[i])
                    })
                };
                if !(drawn(0, 1) && drawn(2, 3)) {
                    continue;
                }
                for (s, t) in [(a[0], a[1]), (a[2], a[3])] {
                    let mid = s.lerp(t, 0.5);
                    let n = (t - s).perp().normalized() * (mark * 0.8);
                    items.push(Item::Line {
                        a: mid - n,
                        b: mid + n,
                        width: lw,
                        class: "tick",
                    });
                }
            }
            _ => {}
        }
    }

    let dot_r = (lw * 1.2).max(2.0);
    for (id, _) in &d.points {
        items.push(Item::Disk {
            center: px(id),
            radius: dot_r,
        });
    }
    items.extend(annotations);

    let labels = place_labels(&d, &lay, &items, style, dot_r);
    items.extend(labels);
    scene.items = items;
    scene
}

fn collision_cost(r: &Rect, items: &[Item], placed: &[Rect], size: f64) -> f64 {
    let mut cost = 0.0;
    let canvas = Rect {
        x0: 0.0,
        y0: 0.0,
        x1: size,
        y1: size,
    };
    cost += r.area() - r.overlap(&canvas);
    for p in placed {
        cost += r.overlap(p);
    }
    for it in items {
        match it {
            Item::Line { a, b, width, .. } => cost += r.clip_len(*a, *b) * width,
            Item::Polyline { points, width, .. } => {
                for w in points.windows(2) {
                    cost += r.clip_len(w[0], w[1]) * width;
                }
            }
            Item::Circle {
                center,
                radius,
                width,
            } => {
                const N: usize = 96;
                let step = TAU * radius / N as f64;
                for k in 0..N {
                    let q = *center + Vec2::from_angle(k as f64 * TAU / N as f64) * *radius;
                    if q.x >= r.x0 && q.x <= r.x1 && q.y >= r.y0 && q.y <= r.y1 {
                        cost += step * width;
                    }
                }
            }
            Item::Arc { center, radius, .. } => {
                let b = Rect {
                    x0: center.x - radius,
                    y0: center.y - radius,
                    x1: center.x + radius,
                    y1: center.y + radius,
                };
                cost += r.overlap(&b) * 0.25;
            }
            Item::Disk { center, radius } => {
                let b = Rect {
                    x0: center.x - radius,
                    y0: center.y - radius,
                    x1: center.x + radius,
                    y1: center.y + radius,
                };
                cost += r.overlap(&b);
            }
            Item::Text { .. } => {}
        }
    }
    cost
}

/// Point labels, each at the first of 8 offsets around its point that
/// collides with nothing, else at the offset with the least overlap.
fn place_labels(
    d: &Diagram,
    lay: &Layout,
    items: &[Item],
    style: &StyleConfig,
    dot_r: f64,
) -> Vec<Item> {
    let size = f64::from(style.font_size_px);
    let mut placed: Vec<Rect> = items.iter().filter_map(text_rect).collect();
    let mut out = Vec::new();
    for (id, v) in &d.points {
        let text = id.label();
        let (w, h) = text_extent(&text, style.font_family, size);
        let p = lay.to_px(*v);
        let gap = dot_r + 2.0 + font::cell_px(size);
        let outward = if v.norm() > 1e-9 {
            let q = v.normalized();
            q.y.atan2(q.x)
        } else {
            PI / 2.0
        };
        let mut best: Option<(f64, Rect)> = None;
        for k in 0..8 {
            // Alternate around the outward direction: 0, +45, -45, +90, ...
            let step = (k + 1) / 2;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let theta = outward + sign * step as f64 * PI / 4.0;
            let dir = Vec2::new(theta.cos(), -theta.sin());
            // Push the box out until its near edge clears the point.
            let reach = gap + (w / 2.0 * dir.x.abs()).max(h / 2.0 * dir.y.abs());
            let c = p + dir * reach;
            let r = Rect {
                x0: c.x - w / 2.0,
                y0: c.y - h / 2.0,
                x1: c.x + w / 2.0,
                y1: c.y + h / 2.0,
            };
            let cost = collision_cost(&r, items, &placed, f64::from(style.resolution_px));
            if best.is_none_or(|(bc, _)| cost < bc) {
                best = Some((cost, r));
            }
            if cost == 0.0 {
                break;
            }
        }
        let (_, r) = best.expect("eight candidates");
        placed.push(r);
        out.push(Item::Text {
            origin: Vec2::new(r.x0, r.y0),
            text,
            size,
            face: style.font_family,
            class: "label",
        });
    }
    out
}
