use std::fmt::Write;

use super::font::text_extent;
use super::scene::{Item, Scene};

fn n(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// SVG 1.1 document for a scene. Text positions use the same top-left
/// boxes as the raster (baseline at the box bottom).
pub fn to_svg(scene: &Scene) -> String {
    let stroke = scene.stroke.hex();
    let fill = scene.fill.hex();
    let mut s = String::new();
    let size = scene.size;
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(
        s,
        "<rect width=\"{size}\" height=\"{size}\" fill=\"{}\"/>",
        scene.background.hex()
    );
    for it in &scene.items {
        match it {
            Item::Line { a, b, width, class } => {
                let _ = writeln!(
                    s,
                    "<line class=\"{class}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{stroke}\" stroke-width=\"{}\" stroke-linecap=\"round\"/>",
                    n(a.x),
                    n(a.y),
                    n(b.x),
                    n(b.y),
                    n(*width)
                );
            }
            Item::Circle {
                center,
                radius,
                width,
            } => {
                let _ = writeln!(
                    s,
                    "<circle class=\"circle\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{}\"/>",
                    n(center.x),
                    n(center.y),
                    n(*radius),
                    n(*width)
                );
            }
            Item::Polyline {
                points,
                width,
                class,
            } => {
                let pts: Vec<String> = points
                    .iter()
                    .map(|p| format!("{},{}", n(p.x), n(p.y)))
                    .collect();
                let _ = writeln!(
                    s,
                    "<polyline class=\"{class}\" points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{}\"/>",
                    pts.join(" "),
                    n(*width)
                );
            }
            Item::Arc {
                center,
                radius,
                start,
                sweep,
                width,
                class,
            } => {
                let p0 = *center + crate::geom::Vec2::from_angle(*start) * *radius;
                let p1 = *center + crate::geom::Vec2::from_angle(start + sweep) * *radius;
                let flag = u8::from(*sweep > 0.0);
                let _ = writeln!(
                    s,
                    "<path class=\"{class}\" d=\"M {} {} A {} {} 0 0 {flag} {} {}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{}\"/>",
                    n(p0.x),
                    n(p0.y),
                    n(*radius),
                    n(*radius),
                    n(p1.x),
                    n(p1.y),
                    n(*width)
                );
            }
            Item::Disk { center, radius } => {
                let _ = writeln!(
                    s,
                    "<circle class=\"point\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{fill}\"/>",
                    n(center.x),
                    n(center.y),
                    n(*radius)
                );
            }
            Item::Text {
                origin,
                text,
                size,
                face,
                class,
            } => {
                let (_, h) = text_extent(text, *face, *size);
                let _ = writeln!(
                    s,
                    "<text class=\"{class}\" x=\"{}\" y=\"{}\" {} font-size=\"{}\" fill=\"{fill}\">{}</text>",
                    n(origin.x),
                    n(origin.y + h),
                    face.svg_attrs(),
                    n(*size),
                    escape(text)
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}
