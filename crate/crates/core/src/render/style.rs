use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seed::{mix, rng};

pub const RESOLUTIONS: [u32; 3] = [224, 336, 512];
pub const MIN_LUMINANCE_GAP: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FontFamily {
    Sans,
    Mono,
    Serif,
    Bold,
}

impl FontFamily {
    /// SVG font attributes for this face.
    pub fn svg_attrs(self) -> &'static str {
        match self {
            FontFamily::Sans => "font-family=\"sans-serif\"",
            FontFamily::Mono => "font-family=\"monospace\"",
            FontFamily::Serif => "font-family=\"serif\"",
            FontFamily::Bold => "font-family=\"sans-serif\" font-weight=\"bold\"",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DomainTag {
    Synthetic,
    TargetA,
    TargetB,
}

impl DomainTag {
    pub const ALL: [DomainTag; 3] = [DomainTag::Synthetic, DomainTag::TargetA, DomainTag::TargetB];

    pub fn name(self) -> &'static str {
        match self {
            DomainTag::Synthetic => "synthetic",
            DomainTag::TargetA => "target_a",
            DomainTag::TargetB => "target_b",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.name() == s)
    }

    fn salt(self) -> u64 {
        match self {
            DomainTag::Synthetic => 0x5359_4e54,
            DomainTag::TargetA => 0x5441_5241,
            DomainTag::TargetB => 0x5441_5242,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const WHITE: Rgb = Rgb(255, 255, 255);
    pub const BLACK: Rgb = Rgb(0, 0, 0);

    /// Rec. 709 luma on the encoded channel values, in [0, 1].
    pub fn luminance(self) -> f64 {
        (0.2126 * f64::from(self.0) + 0.7152 * f64::from(self.1) + 0.0722 * f64::from(self.2))
            / 255.0
    }

    pub fn hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }

    fn spread(self) -> u8 {
        let hi = self.0.max(self.1).max(self.2);
        let lo = self.0.min(self.1).min(self.2);
        hi - lo
    }

    /// `h` in degrees, `s` and `v` in [0, 1].
    pub fn from_hsv(h: f64, s: f64, v: f64) -> Rgb {
        let c = v * s;
        let hp = (h.rem_euclid(360.0)) / 60.0;
        let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
        let (r, g, b) = match hp as u32 {
            0 => (c, x, 0.0),
            1 => (x, c, 0.0),
            2 => (0.0, c, x),
            3 => (0.0, x, c),
            4 => (x, 0.0, c),
            _ => (c, 0.0, x),
        };
        let m = v - c;
        let q = |u: f64| ((u + m) * 255.0).round().clamp(0.0, 255.0) as u8;
        Rgb(q(r), q(g), q(b))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Palette {
    pub stroke: Rgb,
    pub fill: Rgb,
    pub background: Rgb,
}

impl Palette {
    pub fn min_gap(&self) -> f64 {
        let bg = self.background.luminance();
        (self.stroke.luminance() - bg)
            .abs()
            .min((self.fill.luminance() - bg).abs())
    }

    /// Which preset family produced this palette. The families do not
    /// overlap: pure black on white, neutral grey grounds, tinted grounds.
    pub fn family(&self) -> DomainTag {
        if self.background == Rgb::WHITE && self.stroke == Rgb::BLACK {
            DomainTag::TargetA
        } else if self.background.spread() <= 2 && self.background != Rgb::WHITE {
            DomainTag::TargetB
        } else {
            DomainTag::Synthetic
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StyleConfig {
    pub font_family: FontFamily,
    pub font_size_px: u32,
    pub palette: Palette,
    pub line_width_px: u32,
    pub rotation_deg: f64,
    pub resolution_px: u32,
    pub right_angle_mark: bool,
    pub tick_marks: bool,
    pub domain_tag: DomainTag,
}

impl StyleConfig {
    /// Plain black-on-white style used where a fixed look is wanted.
    pub fn plain(resolution_px: u32) -> Self {
        Self {
            font_family: FontFamily::Sans,
            font_size_px: 14,
            palette: Palette {
                stroke: Rgb::BLACK,
                fill: Rgb::BLACK,
                background: Rgb::WHITE,
            },
            line_width_px: 2,
            rotation_deg: 0.0,
            resolution_px,
            right_angle_mark: true,
            tick_marks: false,
            domain_tag: DomainTag::TargetA,
        }
    }

    pub fn is_valid(&self) -> bool {
        (8..=24).contains(&self.font_size_px)
            && (1..=4).contains(&self.line_width_px)
            && (0.0..360.0).contains(&self.rotation_deg)
            && RESOLUTIONS.contains(&self.resolution_px)
            && self.palette.min_gap() >= MIN_LUMINANCE_GAP
    }
}

fn sample_palette<R: Rng>(domain: DomainTag, r: &mut R) -> Palette {
    match domain {
        DomainTag::TargetA => Palette {
            stroke: Rgb::BLACK,
            fill: Rgb::BLACK,
            background: Rgb::WHITE,
        },
        DomainTag::TargetB => loop {
            let g = r.gen_range(232..=250u8);
            let p = Palette {
                stroke: Rgb::from_hsv(
                    r.gen_range(200.0..240.0),
                    r.gen_range(0.6..0.9),
                    r.gen_range(0.3..0.55),
                ),
                fill: Rgb::from_hsv(
                    r.gen_range(0.0..20.0),
                    r.gen_range(0.7..0.9),
                    r.gen_range(0.35..0.5),
                ),
                background: Rgb(g, g, g),
            };
            if p.min_gap() >= MIN_LUMINANCE_GAP {
                break p;
            }
        },
        DomainTag::Synthetic => loop {
            let p = Palette {
                stroke: Rgb::from_hsv(
                    r.gen_range(0.0..360.0),
                    r.gen_range(0.5..1.0),
                    r.gen_range(0.1..0.45),
                ),
                fill: Rgb::from_hsv(
                    r.gen_range(0.0..360.0),
                    r.gen_range(0.5..1.0),
                    r.gen_range(0.1..0.4),
                ),
                background: Rgb::from_hsv(
                    r.gen_range(0.0..360.0),
                    r.gen_range(0.1..0.25),
                    r.gen_range(0.92..1.0),
                ),
            };
            if p.min_gap() >= MIN_LUMINANCE_GAP && p.family() == DomainTag::Synthetic {
                break p;
            }
        },
    }
}

pub fn sample_style(domain: DomainTag, seed: u64) -> StyleConfig {
    let mut r = rng(mix(seed, domain.salt()));
    let palette = sample_palette(domain, &mut r);
    let resolution_px = *RESOLUTIONS.choose(&mut r).expect("non-empty");
    match domain {
        DomainTag::Synthetic => StyleConfig {
            font_family: *[FontFamily::Sans, FontFamily::Mono]
                .choose(&mut r)
                .expect("non-empty"),
            font_size_px: r.gen_range(8..=24),
            palette,
            line_width_px: r.gen_range(1..=4),
            rotation_deg: f64::from(r.gen_range(0..360u32)),
            resolution_px,
            right_angle_mark: true,
            tick_marks: r.gen_bool(0.5),
            domain_tag: domain,
        },
        DomainTag::TargetA => StyleConfig {
            font_family: FontFamily::Serif,
            font_size_px: r.gen_range(12..=18),
            palette,
            line_width_px: r.gen_range(1..=2),
            rotation_deg: 0.0,
            resolution_px,
            right_angle_mark: true,
            tick_marks: false,
            domain_tag: domain,
        },
        DomainTag::TargetB => StyleConfig {
            font_family: FontFamily::Bold,
            font_size_px: r.gen_range(10..=16),
            palette,
            line_width_px: r.gen_range(2..=3),
            rotation_deg: 0.0,
            resolution_px,
            right_angle_mark: true,
            tick_marks: true,
            domain_tag: domain,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        assert_eq!(
            sample_style(DomainTag::Synthetic, 1),
            sample_style(DomainTag::Synthetic, 1)
        );
    }

    #[test]
    fn sweep_invariants_and_families() {
        for domain in DomainTag::ALL {
            for seed in 0..1000 {
                let s = sample_style(domain, seed);
                assert!(s.is_valid(), "{domain:?} {seed}: {s:?}");
                assert_eq!(s.palette.family(), domain);
                assert_eq!(s.domain_tag, domain);
            }
        }
    }

    #[test]
    fn hsv_corners() {
        assert_eq!(Rgb::from_hsv(0.0, 1.0, 1.0), Rgb(255, 0, 0));
        assert_eq!(Rgb::from_hsv(120.0, 1.0, 1.0), Rgb(0, 255, 0));
        assert_eq!(Rgb::from_hsv(0.0, 0.0, 1.0), Rgb::WHITE);
        assert!((Rgb::WHITE.luminance() - 1.0).abs() < 1e-12);
    }
}
