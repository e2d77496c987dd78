//! 5x7 bitmap glyphs for the characters labels and annotations use.
//! Faces are derived from the one bitmap: Mono widens the advance, Bold
//! doubles each stem, Serif slants the upper rows.

use super::style::FontFamily;

pub const GLYPH_ROWS: usize = 7;

fn rows(ch: char) -> [u8; 7] {
    match ch {
        'A' => [0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'B' => [0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E],
        'C' => [0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E],
        'D' => [0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E],
        'E' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F],
        'F' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10],
        'G' => [0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F],
        'H' => [0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'I' => [0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E],
        'J' => [0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C],
        'K' => [0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11],
        'L' => [0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F],
        'M' => [0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11],
        'N' => [0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11],
        'O' => [0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'P' => [0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10],
        'Q' => [0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D],
        'R' => [0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11],
        'S' => [0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E],
        'T' => [0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04],
        'U' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'V' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04],
        'W' => [0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A],
        'X' => [0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11],
        'Y' => [0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04],
        'Z' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F],
        '0' => [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
        '1' => [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
        '2' => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F],
        '3' => [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E],
        '4' => [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
        '5' => [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
        '6' => [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
        '7' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
        '9' => [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
        '.' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C],
        '°' => [0x0C, 0x12, 0x12, 0x0C, 0x00, 0x00, 0x00],
        ' ' => [0; 7],
        _ => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04],
    }
}

fn glyph_width(face: FontFamily) -> usize {
    match face {
        FontFamily::Sans | FontFamily::Mono => 5,
        FontFamily::Bold => 6,
        FontFamily::Serif => 7,
    }
}

/// Horizontal advance in cells.
pub fn advance(face: FontFamily) -> usize {
    match face {
        FontFamily::Mono => 7,
        f => glyph_width(f) + 1,
    }
}

/// Lit cells `(column, row)` of one glyph in the given face.
pub fn glyph_cells(ch: char, face: FontFamily) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (r, bits) in rows(ch).iter().enumerate() {
        for c in 0..5 {
            if bits & (0x10 >> c) == 0 {
                continue;
            }
            match face {
                FontFamily::Sans | FontFamily::Mono => out.push((c, r)),
                FontFamily::Bold => {
                    out.push((c, r));
                    out.push((c + 1, r));
                }
                FontFamily::Serif => out.push((c + (GLYPH_ROWS - 1 - r) / 3, r)),
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Size of one glyph cell in pixels.
pub fn cell_px(font_size: f64) -> f64 {
    font_size / GLYPH_ROWS as f64
}

/// Width and height of a rendered string in pixels.
pub fn text_extent(text: &str, face: FontFamily, font_size: f64) -> (f64, f64) {
    let n = text.chars().count();
    let cell = cell_px(font_size);
    if n == 0 {
        return (0.0, 0.0);
    }
    let w = ((n - 1) * advance(face) + glyph_width(face)) as f64 * cell;
    (w, GLYPH_ROWS as f64 * cell)
}
