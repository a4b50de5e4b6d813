//! Netpbm grayscale (PGM) reading and writing.
//!
//! Both the ASCII (`P2`) and binary (`P5`) variants are supported, with
//! `maxval` up to 65535; binary samples above 255 use the two-byte big-endian
//! encoding. Samples are scaled to `[0, 1]` on read. On write they are
//! clamped to `[0, 1]` and quantized with round-half-to-even, so a
//! write-then-read round trip moves each sample by at most `1 / (2 maxval)`.
//!
//! The pixel spacing of a loaded image is chosen so the longer image side
//! spans the unit interval: `h = 1 / (max(width, height) - 1)`.

use std::path::Path;

use crate::error::{FractvError, Result};
use crate::image::Image;

fn parse_err(offset: usize, message: impl Into<String>) -> FractvError {
    FractvError::Parse { offset, message: message.into() }
}

/// Byte scanner for the ASCII parts of a PGM stream. Whitespace separates
/// tokens; `#` starts a comment running to the end of the line.
struct Scanner<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Scanner { buf, pos: 0 }
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.buf.len() {
            match self.buf[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' | 0x0b | 0x0c => self.pos += 1,
                b'#' => {
                    while self.pos < self.buf.len() && self.buf[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => return,
            }
        }
    }

    /// Next whitespace-delimited token and the byte offset it starts at.
    fn next_token(&mut self, what: &str) -> Result<(usize, &'a [u8])> {
        self.skip_space_and_comments();
        if self.pos >= self.buf.len() {
            return Err(parse_err(self.buf.len(), format!("unexpected end of file, expected {what}")));
        }
        let start = self.pos;
        while self.pos < self.buf.len() && !self.buf[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Ok((start, &self.buf[start..self.pos]))
    }

    fn next_uint(&mut self, what: &str, max: u64) -> Result<u64> {
        let (start, tok) = self.next_token(what)?;
        let text = std::str::from_utf8(tok)
            .map_err(|_| parse_err(start, format!("{what} is not ASCII")))?;
        let value: u64 = text
            .parse()
            .map_err(|_| parse_err(start, format!("{what} must be an unsigned integer, got {text:?}")))?;
        if value > max {
            return Err(parse_err(start, format!("{what} {value} exceeds the limit {max}")));
        }
        Ok(value)
    }

    /// After the final ASCII payload token, only whitespace and comments may
    /// remain.
    fn expect_end(&mut self) -> Result<()> {
        self.skip_space_and_comments();
        if self.pos < self.buf.len() {
            return Err(parse_err(self.pos, "trailing data after the pixel raster"));
        }
        Ok(())
    }
}

/// Decode a PGM byte stream.
pub fn read_pgm_bytes(bytes: &[u8]) -> Result<Image> {
    let mut sc = Scanner::new(bytes);
    let (magic_at, magic) = sc.next_token("a PGM magic number")?;
    let binary = match magic {
        b"P2" => false,
        b"P5" => true,
        _ => {
            return Err(parse_err(
                magic_at,
                format!("unsupported magic {:?}, expected P2 or P5", String::from_utf8_lossy(magic)),
            ))
        }
    };
    let width = sc.next_uint("image width", 1 << 20)? as usize;
    let height = sc.next_uint("image height", 1 << 20)? as usize;
    let maxval_at = {
        sc.skip_space_and_comments();
        sc.pos
    };
    let maxval = sc.next_uint("maxval", 65535)?;
    if width < 2 || height < 2 {
        return Err(parse_err(magic_at, format!("image must be at least 2x2, got {width}x{height}")));
    }
    if maxval == 0 {
        return Err(parse_err(maxval_at, "maxval must be at least 1"));
    }
    let scale = 1.0 / maxval as f64;
    let count = width * height;
    let mut samples = Vec::with_capacity(count);

    if binary {
        // exactly one whitespace byte separates the header from the raster
        if sc.pos >= bytes.len() || !bytes[sc.pos].is_ascii_whitespace() {
            return Err(parse_err(sc.pos, "expected a whitespace byte before the binary raster"));
        }
        sc.pos += 1;
        let per = if maxval > 255 { 2 } else { 1 };
        let need = count * per;
        let have = bytes.len() - sc.pos;
        if have < need {
            return Err(parse_err(
                bytes.len(),
                format!("binary raster truncated: need {need} bytes, found {have}"),
            ));
        }
        for i in 0..count {
            let at = sc.pos + per * i;
            let raw = if per == 2 {
                u64::from(bytes[at]) << 8 | u64::from(bytes[at + 1])
            } else {
                u64::from(bytes[at])
            };
            if raw > maxval {
                return Err(parse_err(at, format!("sample {raw} exceeds maxval {maxval}")));
            }
            samples.push(raw as f64 * scale);
        }
        if sc.pos + need < bytes.len() {
            return Err(parse_err(sc.pos + need, "trailing data after the pixel raster"));
        }
    } else {
        for _ in 0..count {
            let at = {
                sc.skip_space_and_comments();
                sc.pos
            };
            let raw = sc.next_uint("a pixel sample", u64::MAX)?;
            if raw > maxval {
                return Err(parse_err(at, format!("sample {raw} exceeds maxval {maxval}")));
            }
            samples.push(raw as f64 * scale);
        }
        sc.expect_end()?;
    }

    let h = 1.0 / ((width.max(height) - 1) as f64);
    Image::new(width, height, h, samples)
}

/// Read a PGM file from disk.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let bytes = std::fs::read(path)?;
    read_pgm_bytes(&bytes)
}

fn quantize(v: f64, maxval: u16) -> u16 {
    let q = (v.clamp(0.0, 1.0) * f64::from(maxval)).round_ties_even();
    q as u16
}

/// Encode an image as a PGM byte stream; `binary` selects `P5` over `P2`.
pub fn write_pgm_bytes(img: &Image, maxval: u16, binary: bool) -> Result<Vec<u8>> {
    if maxval == 0 {
        return Err(crate::error::invalid("PGM maxval must be at least 1"));
    }
    let (w, hgt) = (img.width(), img.height());
    let mut out = Vec::with_capacity(w * hgt * 3 + 32);
    let magic = if binary { "P5" } else { "P2" };
    out.extend_from_slice(format!("{magic}\n{w} {hgt}\n{maxval}\n").as_bytes());
    if binary {
        let two = maxval > 255;
        for y in 0..hgt {
            for x in 0..w {
                let q = quantize(img.get(x, y), maxval);
                if two {
                    out.extend_from_slice(&q.to_be_bytes());
                } else {
                    out.push(q as u8);
                }
            }
        }
    } else {
        for y in 0..hgt {
            let mut line = String::with_capacity(6 * w);
            for x in 0..w {
                if x > 0 {
                    line.push(' ');
                }
                line.push_str(&quantize(img.get(x, y), maxval).to_string());
            }
            line.push('\n');
            out.extend_from_slice(line.as_bytes());
        }
    }
    Ok(out)
}

/// Write an image to disk as PGM.
pub fn write_pgm(path: impl AsRef<Path>, img: &Image, maxval: u16, binary: bool) -> Result<()> {
    let bytes = write_pgm_bytes(img, maxval, binary)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_example_scales_to_unit_range() {
        let img = read_pgm_bytes(b"P2 2 2 255\n0 255\n128 64\n").unwrap();
        assert_eq!(img.width(), 2);
        assert_eq!(img.height(), 2);
        assert_eq!(img.data(), &[0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
        assert_eq!(img.h(), 1.0);
    }

    #[test]
    fn comments_and_odd_whitespace_are_tolerated() {
        let src = b"P2 # magic\n# a comment line\n 2\t2\n255\n0 1 # trailing\n2 3\n";
        let img = read_pgm_bytes(src).unwrap();
        assert_eq!(img.data()[3], 3.0 / 255.0);
    }

    #[test]
    fn binary_and_ascii_encodings_read_identically() {
        let img = Image::new(3, 2, 0.5, vec![0.0, 0.25, 0.5, 0.75, 1.0, 0.125]).unwrap();
        for maxval in [255u16, 65535] {
            let a = read_pgm_bytes(&write_pgm_bytes(&img, maxval, false).unwrap()).unwrap();
            let b = read_pgm_bytes(&write_pgm_bytes(&img, maxval, true).unwrap()).unwrap();
            assert_eq!(a.data(), b.data());
        }
    }

    #[test]
    fn round_trip_error_is_within_the_quantization_bound() {
        let n = 16;
        let img = Image::from_fn(n, n, 1.0 / 15.0, |x, y| {
            (0.37 * x as f64 + 0.11 * y as f64).sin().abs()
        })
        .unwrap();
        for maxval in [255u16, 1023, 65535] {
            let back = read_pgm_bytes(&write_pgm_bytes(&img, maxval, true).unwrap()).unwrap();
            let bound = 1.0 / (2.0 * f64::from(maxval));
            for (a, b) in img.data().iter().zip(back.data()) {
                assert!((a - b).abs() <= bound + 1e-15, "maxval {maxval}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn sixteen_bit_samples_use_big_endian_pairs() {
        let img = Image::new(2, 2, 1.0, vec![0.0, 1.0, 0.5, 0.25]).unwrap();
        let bytes = write_pgm_bytes(&img, 65535, true).unwrap();
        let raster = &bytes[bytes.len() - 8..];
        assert_eq!(&raster[..4], &[0x00, 0x00, 0xff, 0xff]);
        let mid = u16::from_be_bytes([raster[4], raster[5]]);
        assert_eq!(mid, 32768); // 0.5 * 65535 = 32767.5 rounds to even
    }

    #[test]
    fn write_clamps_out_of_range_samples() {
        let img = Image::new(2, 2, 1.0, vec![-0.5, 1.5, 0.0, 1.0]).unwrap();
        let back = read_pgm_bytes(&write_pgm_bytes(&img, 255, true).unwrap()).unwrap();
        assert_eq!(back.data(), &[0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn malformed_streams_report_byte_offsets() {
        match read_pgm_bytes(b"P3 2 2 255 0 0 0 0") {
            Err(FractvError::Parse { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("expected a parse error, got {other:?}"),
        }
        match read_pgm_bytes(b"P2 2 2 70000 0 0 0 0") {
            Err(FractvError::Parse { offset, .. }) => assert_eq!(offset, 7),
            other => panic!("expected a maxval error, got {other:?}"),
        }
        // truncated binary raster
        match read_pgm_bytes(b"P5 2 2 255\n\x01\x02") {
            Err(FractvError::Parse { offset, message }) => {
                assert_eq!(offset, 13);
                assert!(message.contains("truncated"));
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
        // ASCII sample above maxval, offset points at the sample
        match read_pgm_bytes(b"P2 2 2 9\n1 2 3 10") {
            Err(FractvError::Parse { offset, .. }) => assert_eq!(offset, 15),
            other => panic!("expected sample range error, got {other:?}"),
        }
        // trailing garbage
        assert!(read_pgm_bytes(b"P2 2 2 9\n1 2 3 4 5").is_err());
        assert!(read_pgm_bytes(b"P5 2 2 255\n\x01\x02\x03\x04garbage").is_err());
    }
}
