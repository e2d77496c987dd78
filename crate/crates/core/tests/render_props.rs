use planegen_core::geom::Vec2;
use planegen_core::lang::RelationKind;
use planegen_core::premises::{derive_premises, filter_premises, premise_hash};
use planegen_core::render::{
    decode_pgm, encode_pgm, make_style_pair_for, rasterize, render_svg, sample_style, DiagramImage,
    DomainTag, Item, Rgb, Scene, StyleConfig, RESOLUTIONS,
};
use planegen_core::synth::{sample_problem, solve_diagram, Diagram, SamplerConfig};

fn lum(c: Rgb) -> f64 {
    let lin = [c.0, c.1, c.2].map(|v| f64::from(v) / 255.0);
    0.2126 * lin[0] + 0.7152 * lin[1] + 0.0722 * lin[2]
}

fn empty_diagram() -> Diagram {
    Diagram {
        points: vec![],
        segments: vec![],
        circles: vec![],
        construction_record: vec![],
        length_scale: 1.0,
    }
}

#[test]
fn style_sweep() {
    for domain in DomainTag::ALL {
        for seed in 0..1000 {
            let s = sample_style(domain, seed);
            assert!((8..=24).contains(&s.font_size_px));
            assert!((1..=4).contains(&s.line_width_px));
            assert!((0.0..360.0).contains(&s.rotation_deg));
            assert!(RESOLUTIONS.contains(&s.resolution_px));
            let bg = lum(s.palette.background);
            assert!(
                (lum(s.palette.stroke) - bg).abs() >= 0.3,
                "{domain:?} {seed}"
            );
            assert!((lum(s.palette.fill) - bg).abs() >= 0.3, "{domain:?} {seed}");
        }
    }
}

#[test]
fn horizontal_segment_band() {
    for res in RESOLUTIONS {
        for w in 1..=4u32 {
            let mut style = StyleConfig::plain(res);
            style.line_width_px = w;
            let mut scene = Scene::blank(&style);
            let y = res as f64 / 2.0 + 0.3;
            scene.items.push(Item::Line {
                a: Vec2::new(40.0, y),
                b: Vec2::new(160.0, y),
                width: f64::from(w),
                class: "segment",
            });
            let img = DiagramImage::from_scene(scene, style, empty_diagram(), String::new());
            let n = res as usize;
            let rows: Vec<usize> = (0..n)
                .filter(|&r| (0..n).any(|c| img.raster.get(c, r) > 0.0))
                .collect();
            assert!(!rows.is_empty());
            assert!(
                rows.len() <= w as usize + 2,
                "res {res} width {w}: {} rows",
                rows.len()
            );
            assert!(rows.windows(2).all(|p| p[1] == p[0] + 1));
            assert!(img.raster.get(100, y as usize) > 0.0);
            assert_eq!(img.raster.get(20, y as usize), 0.0);
            assert_eq!(img.raster.get(180, y as usize), 0.0);
        }
    }
}

#[test]
fn blank_canvas_is_zero_and_round_trips() {
    for domain in DomainTag::ALL {
        let style = sample_style(domain, 3);
        let img =
            DiagramImage::from_scene(Scene::blank(&style), style, empty_diagram(), String::new());
        assert!(img.raster.data.iter().all(|&v| v == 0.0));
        let back = decode_pgm(&encode_pgm(&img.raster)[..]).unwrap();
        assert_eq!(back, img.raster);
    }
}

#[test]
fn one_right_angle_mark_per_perpendicular_premise() {
    let mut checked = 0;
    for s in 0..200u64 {
        let p = sample_problem(&SamplerConfig::full(1 + (s % 5) as usize, s));
        let Ok(d) = solve_diagram(&p, s) else {
            continue;
        };
        let kept = filter_premises(&derive_premises(&d, &p));
        let perps = kept
            .iter()
            .filter(|x| x.kind == RelationKind::Perpendicular)
            .count();
        let img = render_svg(&d, &kept, &sample_style(DomainTag::Synthetic, s));
        assert_eq!(img.scene.count_class("right-angle"), perps, "{p}");
        assert_eq!(img.svg.matches("class=\"right-angle\"").count(), perps);
        assert_eq!(rasterize(&img), img.raster);
        checked += usize::from(perps > 0);
    }
    assert!(checked > 10);
}

#[test]
fn style_pairs_share_premises() {
    let mut pairs = 0;
    let mut s = 0u64;
    while pairs < 100 {
        s += 1;
        let p = sample_problem(&SamplerConfig::full(1 + (s % 5) as usize, s));
        let target = if s.is_multiple_of(2) {
            DomainTag::TargetA
        } else {
            DomainTag::TargetB
        };
        let Ok((t, syn, cap)) = make_style_pair_for(target, &p, s) else {
            continue;
        };
        let from_t = filter_premises(&derive_premises(&t.geometry, &p));
        let from_s = filter_premises(&derive_premises(&syn.geometry, &p));
        assert_eq!(from_t, from_s, "{p}");
        assert_eq!(premise_hash(&from_t), t.source_premises);
        assert_eq!(t.source_premises, syn.source_premises);
        assert_eq!(cap.sentences.len(), from_t.len());
        assert_eq!(t.style.domain_tag, target);
        assert_eq!(syn.style.domain_tag, DomainTag::Synthetic);
        pairs += 1;
    }
}

#[test]
fn svg_is_well_formed() {
    let p = sample_problem(&SamplerConfig::full(4, 21));
    let d = solve_diagram(&p, 21).unwrap();
    let kept = filter_premises(&derive_premises(&d, &p));
    let img = render_svg(&d, &kept, &sample_style(DomainTag::TargetB, 21));
    assert!(img.svg.starts_with("<svg") || img.svg.starts_with("<?xml"));
    assert!(img.svg.trim_end().ends_with("</svg>"));
    let texts = img
        .scene
        .items
        .iter()
        .filter(|i| matches!(i, Item::Text { .. }))
        .count();
    assert_eq!(img.svg.matches("<text").count(), texts);
    assert!(texts >= d.points.len());
}
