//! Scanline rasterizer over the display list with 4x4 supersampling.
//!
//! Every item is reduced to horizontal spans per subsample row; later items
//! overwrite earlier ones. A pixel's value is the mean over its 16
//! subsamples of |L(colour) - L(background)|, so the background is 0 and
//! ink is high.

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;

use super::font::{advance, cell_px, glyph_cells};
use super::scene::{Item, Scene};

pub const SUPERSAMPLE: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrayImage {
    pub size: u32,
    /// Row-major, values in [0, 1].
    pub data: Vec<f32>,
}

impl GrayImage {
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.size as usize + x]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }
}

struct Canvas {
    n: usize,
    cells: Vec<u8>,
}

impl Canvas {
    fn row_y(j: usize) -> f64 {
        (j as f64 + 0.5) / SUPERSAMPLE as f64
    }

    fn col_x(i: usize) -> f64 {
        (i as f64 + 0.5) / SUPERSAMPLE as f64
    }

    /// Subsample rows whose centres fall in `[y0, y1]`.
    fn rows(&self, y0: f64, y1: f64) -> std::ops::Range<usize> {
        let s = SUPERSAMPLE as f64;
        let lo = (y0 * s - 0.5).ceil().max(0.0);
        let hi = ((y1 * s - 0.5).floor() + 1.0).clamp(0.0, self.n as f64);
        if lo >= hi {
            return 0..0;
        }
        lo as usize..hi as usize
    }

    fn span(&mut self, j: usize, x0: f64, x1: f64, ink: u8) {
        let s = SUPERSAMPLE as f64;
        let lo = (x0 * s - 0.5).ceil().max(0.0);
        let hi = ((x1 * s - 0.5).floor() + 1.0).min(self.n as f64);
        if lo >= hi {
            return;
        }
        let row = &mut self.cells[j * self.n..(j + 1) * self.n];
        for c in &mut row[lo as usize..hi as usize] {
            *c = ink;
        }
    }
}

fn union(a: Option<(f64, f64)>, b: Option<(f64, f64)>) -> Option<(f64, f64)> {
    match (a, b) {
        (Some((a0, a1)), Some((b0, b1))) => Some((a0.min(b0), a1.max(b1))),
        (x, None) | (None, x) => x,
    }
}

fn disk_span(c: Vec2, r: f64, y: f64) -> Option<(f64, f64)> {
    let dy = y - c.y;
    if dy.abs() > r {
        return None;
    }
    let h = (r * r - dy * dy).sqrt();
    Some((c.x - h, c.x + h))
}

fn convex_span(poly: &[Vec2], y: f64) -> Option<(f64, f64)> {
    let mut out: Option<(f64, f64)> = None;
    for k in 0..poly.len() {
        let p = poly[k];
        let q = poly[(k + 1) % poly.len()];
        if (p.y - y) * (q.y - y) > 0.0 {
            continue;
        }
        let xs = if p.y == q.y {
            (p.x.min(q.x), p.x.max(q.x))
        } else {
            let x = p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y);
            (x, x)
        };
        out = union(out, Some(xs));
    }
    out
}

/// Round-capped segment of half-width `h`: a convex capsule.
fn capsule(cv: &mut Canvas, a: Vec2, b: Vec2, h: f64, ink: u8) {
    let n = if a.dist(b) > 0.0 {
        (b - a).normalized().perp() * h
    } else {
        Vec2::ZERO
    };
    let quad = [a + n, b + n, b - n, a - n];
    for j in cv.rows(a.y.min(b.y) - h, a.y.max(b.y) + h) {
        let y = Canvas::row_y(j);
        let s = union(
            union(disk_span(a, h, y), disk_span(b, h, y)),
            convex_span(&quad, y),
        );
        if let Some((x0, x1)) = s {
            cv.span(j, x0, x1, ink);
        }
    }
}

fn ring(cv: &mut Canvas, c: Vec2, r: f64, h: f64, ink: u8) {
    let (ro, ri) = (r + h, r - h);
    for j in cv.rows(c.y - ro, c.y + ro) {
        let y = Canvas::row_y(j);
        let Some((o0, o1)) = disk_span(c, ro, y) else {
            continue;
        };
        match disk_span(c, ri.max(0.0), y).filter(|_| ri > 0.0) {
            Some((i0, i1)) => {
                cv.span(j, o0, i0, ink);
                cv.span(j, i1, o1, ink);
            }
            None => cv.span(j, o0, o1, ink),
        }
    }
}

fn arc(cv: &mut Canvas, c: Vec2, r: f64, start: f64, sweep: f64, h: f64, ink: u8) {
    let ro = r + h;
    let ri = (r - h).max(0.0);
    let tau = std::f64::consts::TAU;
    for j in cv.rows(c.y - ro, c.y + ro) {
        let y = Canvas::row_y(j);
        let Some((x0, x1)) = disk_span(c, ro, y) else {
            continue;
        };
        let s = SUPERSAMPLE as f64;
        let lo = (x0 * s - 0.5).ceil().max(0.0) as usize;
        let hi = (((x1 * s - 0.5).floor() + 1.0).min(cv.n as f64)).max(0.0) as usize;
        for i in lo..hi {
            let p = Vec2::new(Canvas::col_x(i), y) - c;
            if p.norm() < ri {
                continue;
            }
            let phi = p.y.atan2(p.x);
            let t = if sweep >= 0.0 {
                (phi - start).rem_euclid(tau)
            } else {
                (start - phi).rem_euclid(tau)
            };
            if t <= sweep.abs() {
                cv.cells[j * cv.n + i] = ink;
            }
        }
    }
}

fn rect(cv: &mut Canvas, x0: f64, y0: f64, x1: f64, y1: f64, ink: u8) {
    // Half-open box so adjacent glyph cells tile without double coverage.
    let eps = 1e-9;
    for j in cv.rows(y0, y1 - eps) {
        cv.span(j, x0, x1 - eps, ink);
    }
}

fn paint(cv: &mut Canvas, it: &Item, ink: u8) {
    match it {
        Item::Line { a, b, width, .. } => capsule(cv, *a, *b, width / 2.0, ink),
        Item::Polyline { points, width, .. } => {
            for w in points.windows(2) {
                capsule(cv, w[0], w[1], width / 2.0, ink);
            }
        }
        Item::Circle {
            center,
            radius,
            width,
        } => ring(cv, *center, *radius, width / 2.0, ink),
        Item::Arc {
            center,
            radius,
            start,
            sweep,
            width,
            ..
        } => arc(cv, *center, *radius, *start, *sweep, width / 2.0, ink),
        Item::Disk { center, radius } => {
            for j in cv.rows(center.y - radius, center.y + radius) {
                if let Some((x0, x1)) = disk_span(*center, *radius, Canvas::row_y(j)) {
                    cv.span(j, x0, x1, ink);
                }
            }
        }
        Item::Text {
            origin,
            text,
            size,
            face,
            ..
        } => {
            let cell = cell_px(*size);
            for (k, ch) in text.chars().enumerate() {
                let gx = origin.x + (k * advance(*face)) as f64 * cell;
                for (c, r) in glyph_cells(ch, *face) {
                    let x0 = gx + c as f64 * cell;
                    let y0 = origin.y + r as f64 * cell;
                    rect(cv, x0, y0, x0 + cell, y0 + cell, ink);
                }
            }
        }
    }
}

pub fn rasterize_scene(scene: &Scene) -> GrayImage {
    let size = scene.size as usize;
    let n = size * SUPERSAMPLE;
    let mut cv = Canvas {
        n,
        cells: vec![0; n * n],
    };
    for it in &scene.items {
        paint(&mut cv, it, if it.uses_fill() { 2 } else { 1 });
    }
    let bg = scene.background.luminance();
    let gaps = [
        0.0,
        (scene.stroke.luminance() - bg).abs(),
        (scene.fill.luminance() - bg).abs(),
    ];
    let mut data = vec![0f32; size * size];
    let norm = (SUPERSAMPLE * SUPERSAMPLE) as f64;
    for y in 0..size {
        for x in 0..size {
            let mut acc = 0.0;
            for sy in 0..SUPERSAMPLE {
                let row = (y * SUPERSAMPLE + sy) * n + x * SUPERSAMPLE;
                for sx in 0..SUPERSAMPLE {
                    acc += gaps[cv.cells[row + sx] as usize];
                }
            }
            data[y * size + x] = (acc / norm) as f32;
        }
    }
    GrayImage {
        size: scene.size,
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::style::StyleConfig;

    #[test]
    fn blank_is_zero() {
        let img = rasterize_scene(&Scene::blank(&StyleConfig::plain(224)));
        assert!(img.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn full_disk_coverage() {
        let mut s = Scene::blank(&StyleConfig::plain(224));
        s.items.push(Item::Disk {
            center: Vec2::new(112.0, 112.0),
            radius: 20.0,
        });
        let img = rasterize_scene(&s);
        assert_eq!(img.get(112, 112), 1.0);
        assert_eq!(img.get(10, 10), 0.0);
        let ink: f64 = img.data.iter().map(|&v| f64::from(v)).sum();
        let area = std::f64::consts::PI * 400.0;
        assert!((ink - area).abs() / area < 0.01, "{ink} vs {area}");
    }

    #[test]
    fn arc_stays_in_its_quadrant() {
        let mut s = Scene::blank(&StyleConfig::plain(224));
        s.items.push(Item::Arc {
            center: Vec2::new(112.0, 112.0),
            radius: 30.0,
            start: 0.0,
            sweep: std::f64::consts::FRAC_PI_2,
            width: 2.0,
            class: "angle-arc",
        });
        let img = rasterize_scene(&s);
        // Positive sweep runs from +x toward +y, i.e. down the screen.
        assert!(img.get(133, 133) > 0.0);
        assert_eq!(img.get(91, 91), 0.0);
        assert_eq!(img.get(133, 91), 0.0);
    }
}
