//! Diagram rendering: style presets, a display list, SVG output and a
//! deterministic supersampled rasterizer.

mod font;
pub mod image_io;
pub mod raster;
pub mod scene;
pub mod style;
pub mod svg;

pub use image_io::{decode_pgm, decode_png, encode_pgm, encode_png};
pub use raster::{rasterize_scene, GrayImage};
pub use scene::{build_scene, Item, Scene};
pub use style::{sample_style, DomainTag, FontFamily, Palette, Rgb, StyleConfig, RESOLUTIONS};

use crate::lang::Problem;
use crate::premises::{
    caption_from_premises, derive_premises, filter_premises, premise_hash, Caption, Premise,
};
use crate::seed::mix;
use crate::synth::{solve_diagram, Diagram, SolveError};

#[derive(Clone, Debug, PartialEq)]
pub struct DiagramImage {
    pub svg: String,
    pub raster: GrayImage,
    pub style: StyleConfig,
    /// Hash of the premise list the image was drawn for.
    pub source_premises: String,
    /// Coordinates as drawn (after the style's rotation), canonical frame.
    pub geometry: Diagram,
    pub scene: Scene,
}

impl DiagramImage {
    /// Wraps an already-built scene; used for hand-made display lists.
    pub fn from_scene(
        scene: Scene,
        style: StyleConfig,
        geometry: Diagram,
        source_premises: String,
    ) -> Self {
        let svg = svg::to_svg(&scene);
        let raster = rasterize_scene(&scene);
        Self {
            svg,
            raster,
            style,
            source_premises,
            geometry,
            scene,
        }
    }
}

/// Draws `d` with annotations for `premises` (which should come from
/// `derive_premises` on the same diagram).
pub fn render_svg(d: &Diagram, premises: &[Premise], style: &StyleConfig) -> DiagramImage {
    let scene = build_scene(d, premises, style);
    DiagramImage::from_scene(
        scene,
        style.clone(),
        d.rotated(style.rotation_deg),
        premise_hash(premises),
    )
}

/// Re-rasterizes the image's display list.
pub fn rasterize(img: &DiagramImage) -> GrayImage {
    rasterize_scene(&img.scene)
}

/// Seed of the synthetic-style member of a pair.
pub fn source_style_seed(seed: u64) -> u64 {
    mix(seed, 1)
}

/// One solve, two renders: the target-domain look and the synthetic look.
pub fn make_style_pair_for(
    target: DomainTag,
    p: &Problem,
    seed: u64,
) -> Result<(DiagramImage, DiagramImage, Caption), SolveError> {
    let d = solve_diagram(p, seed)?;
    let kept = filter_premises(&derive_premises(&d, p));
    let caption = caption_from_premises(&kept).expect("filtered premises always caption");
    let t = render_svg(&d, &kept, &sample_style(target, seed));
    let s = render_svg(
        &d,
        &kept,
        &sample_style(DomainTag::Synthetic, source_style_seed(seed)),
    );
    Ok((t, s, caption))
}

pub fn make_style_pair(
    p: &Problem,
    seed: u64,
) -> Result<(DiagramImage, DiagramImage, Caption), SolveError> {
    make_style_pair_for(DomainTag::TargetA, p, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::lang::RelationKind;
    use crate::lang::{parse_problem, pid};
    use crate::premises::Measure;
    use crate::synth::{CircleElem, RecordEntry};

    fn square() -> Diagram {
        let pts = [
            ("a", -0.5, -0.5),
            ("b", 0.5, -0.5),
            ("c", 0.5, 0.5),
            ("d", -0.5, 0.5),
        ];
        Diagram {
            points: pts
                .iter()
                .map(|(n, x, y)| (pid(n), Vec2::new(*x, *y)))
                .collect(),
            segments: vec![
                (pid("a"), pid("b")),
                (pid("b"), pid("c")),
                (pid("c"), pid("d")),
                (pid("d"), pid("a")),
            ],
            circles: Vec::<CircleElem>::new(),
            construction_record: Vec::<RecordEntry>::new(),
            length_scale: 1.0,
        }
    }

    #[test]
    fn one_mark_per_perpendicular() {
        let d = square();
        let perp = Premise::perpendicular(&pid("a"), &pid("b"), &pid("b"), &pid("c"));
        let img = render_svg(&d, &[perp], &StyleConfig::plain(224));
        assert_eq!(img.svg.matches("class=\"right-angle\"").count(), 1);
        let mut off = StyleConfig::plain(224);
        off.right_angle_mark = false;
        let img = render_svg(
            &d,
            &[Premise::perpendicular(
                &pid("a"),
                &pid("b"),
                &pid("b"),
                &pid("c"),
            )],
            &off,
        );
        assert_eq!(img.svg.matches("class=\"right-angle\"").count(), 0);
    }

    #[test]
    fn angle_text_node() {
        let d = square();
        let ang = Premise::new(
            RelationKind::AngleMeasure,
            vec![pid("a"), pid("b"), pid("c")],
            Some(Measure::Degrees(60)),
        );
        let img = render_svg(&d, &[ang], &StyleConfig::plain(224));
        assert!(img.svg.contains(">60°</text>"));
        assert_eq!(img.scene.count_class("angle-arc"), 1);
    }

    #[test]
    fn labels_upright_and_present() {
        let mut style = StyleConfig::plain(336);
        style.rotation_deg = 90.0;
        let img = render_svg(&square(), &[], &style);
        for l in ["A", "B", "C", "D"] {
            assert!(img.svg.contains(&format!(">{l}</text>")));
        }
        assert!(!img.svg.contains("rotate("));
    }

    #[test]
    fn raster_is_deterministic() {
        let img = render_svg(&square(), &[], &sample_style(DomainTag::Synthetic, 4));
        assert_eq!(rasterize(&img), img.raster);
        assert!(img.raster.data.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn style_pair_shares_hash() {
        let p = parse_problem("a b c = triangle a b c; d = foot d a b c").unwrap();
        let (t, s, cap) = make_style_pair(&p, 9).unwrap();
        assert_eq!(t.source_premises, s.source_premises);
        assert_eq!(t.style.domain_tag, DomainTag::TargetA);
        assert_eq!(s.style.domain_tag, DomainTag::Synthetic);
        assert!(cap.text().contains("perpendicular"));
        assert_eq!(make_style_pair(&p, 9).unwrap().1.raster, s.raster);
    }
}
