use std::io::{self, BufRead, BufReader, Read, Write};

use super::raster::GrayImage;

/// Binary PGM (P5, maxval 255).
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.size, img.size).into_bytes();
    out.extend(img.to_bytes());
    out
}

fn bad(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

fn header_token<R: BufRead>(r: &mut R) -> io::Result<String> {
    let mut tok = String::new();
    let mut byte = [0u8; 1];
    loop {
        r.read_exact(&mut byte)?;
        match byte[0] {
            b'#' => {
                let mut skip = Vec::new();
                r.read_until(b'\n', &mut skip)?;
            }
            b if b.is_ascii_whitespace() => {
                if !tok.is_empty() {
                    return Ok(tok);
                }
            }
            b => tok.push(b as char),
        }
    }
}

/// Reads a square P5 image with maxval 255 back into [0, 1] values.
pub fn decode_pgm<R: Read>(r: R) -> io::Result<GrayImage> {
    let mut r = BufReader::new(r);
    if header_token(&mut r)? != "P5" {
        return Err(bad("not a binary PGM"));
    }
    let parse = |t: String| t.parse::<u32>().map_err(|_| bad("bad PGM header"));
    let w = parse(header_token(&mut r)?)?;
    let h = parse(header_token(&mut r)?)?;
    let max = parse(header_token(&mut r)?)?;
    if w != h || max != 255 {
        return Err(bad("expected a square 8-bit PGM"));
    }
    let mut bytes = vec![0u8; (w * h) as usize];
    r.read_exact(&mut bytes)?;
    Ok(GrayImage {
        size: w,
        data: bytes.into_iter().map(|b| f32::from(b) / 255.0).collect(),
    })
}

pub fn encode_png(img: &GrayImage) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.size, img.size);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().expect("in-memory PNG header");
        w.write_image_data(&img.to_bytes())
            .expect("in-memory PNG body");
    }
    out
}

/// Reads an 8-bit grayscale square PNG, as written by `encode_png`.
pub fn decode_png<R: Read>(r: R) -> io::Result<GrayImage> {
    let dec = png::Decoder::new(r);
    let mut reader = dec.read_info().map_err(|e| bad(&e.to_string()))?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| bad(&e.to_string()))?;
    if info.color_type != png::ColorType::Grayscale
        || info.bit_depth != png::BitDepth::Eight
        || info.width != info.height
    {
        return Err(bad("expected a square 8-bit grayscale PNG"));
    }
    buf.truncate(info.buffer_size());
    Ok(GrayImage {
        size: info.width,
        data: buf.into_iter().map(|b| f32::from(b) / 255.0).collect(),
    })
}

pub fn write_pgm<W: Write>(img: &GrayImage, mut w: W) -> io::Result<()> {
    w.write_all(&encode_pgm(img))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip() {
        let img = GrayImage {
            size: 2,
            data: vec![0.0, 1.0, 0.5, 0.25],
        };
        let bytes = encode_pgm(&img);
        assert!(bytes.starts_with(b"P5\n2 2\n255\n"));
        let back = decode_pgm(&bytes[..]).unwrap();
        assert_eq!(back.to_bytes(), img.to_bytes());
        let png = encode_png(&img);
        assert!(png.starts_with(b"\x89PNG"));
        assert_eq!(decode_png(&png[..]).unwrap().to_bytes(), img.to_bytes());
    }
}
