//! PFM density maps and 16-bit PGM label masks.
//!
//! Readers report the byte offset of the first violation. Writers always
//! emit the canonical header (`Pf\n<w> <h>\n-1.0\n` and
//! `P5\n<w> <h>\n65535\n`), so a read of a written file followed by a write
//! reproduces it byte for byte.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::density::DensityMap;
use crate::error::{Error, Result};
use crate::extract::LabelMask;
use crate::geometry::ImageGeometry;

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        offset,
        message: message.into(),
    }
}

/// Whitespace/comment-aware header tokenizer.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| !b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format_err(start, format!("missing {what}")));
        }
        let tok = std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| format_err(start, format!("{what} is not ASCII")))?;
        Ok((start, tok))
    }

    fn dimension(&mut self, what: &str) -> Result<usize> {
        let (at, tok) = self.token(what)?;
        match tok.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(format_err(at, format!("invalid {what} `{tok}`"))),
        }
    }

    /// Consumes the single whitespace byte that ends the header.
    fn end(&mut self) -> Result<usize> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => Ok(self.pos + 1),
            Some(_) => Err(format_err(self.pos, "expected whitespace after header")),
            None => Err(format_err(self.pos, "truncated header")),
        }
    }
}

fn check_payload(bytes: &[u8], start: usize, needed: usize) -> Result<()> {
    let have = bytes.len() - start;
    if have < needed {
        return Err(format_err(
            bytes.len(),
            format!("pixel data truncated: expected {needed} bytes, found {have}"),
        ));
    }
    if have > needed {
        return Err(format_err(
            start + needed,
            format!("{} trailing bytes after pixel data", have - needed),
        ));
    }
    Ok(())
}

/// Parses a grayscale PFM. Both byte orders are accepted.
pub fn read_pfm(bytes: &[u8]) -> Result<DensityMap> {
    let mut hdr = Header::new(bytes);
    let (at, magic) = hdr.token("magic number")?;
    match magic {
        "Pf" => {}
        "PF" => return Err(format_err(at, "color PFM (`PF`) is not supported; expected `Pf`")),
        other => return Err(format_err(at, format!("expected `Pf`, found `{other}`"))),
    }
    let width = hdr.dimension("width")?;
    let height = hdr.dimension("height")?;
    let (at, scale_tok) = hdr.token("scale")?;
    let scale: f64 = scale_tok
        .parse()
        .ok()
        .filter(|s: &f64| s.is_finite() && *s != 0.0)
        .ok_or_else(|| format_err(at, format!("invalid scale `{scale_tok}`")))?;
    let little_endian = scale < 0.0;
    let start = hdr.end()?;

    let count = width
        .checked_mul(height)
        .ok_or_else(|| format_err(0, "image dimensions overflow"))?;
    check_payload(bytes, start, count * 4)?;

    let mut values = vec![0.0f32; count];
    for (k, chunk) in bytes[start..].chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little_endian {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        if !v.is_finite() {
            return Err(format_err(start + 4 * k, "non-finite sample"));
        }
        // File rows run bottom to top.
        let (file_row, x) = (k / width, k % width);
        values[(height - 1 - file_row) * width + x] = v;
    }
    DensityMap::from_values(ImageGeometry { width, height }, values)
}

pub fn write_pfm<W: Write>(mut writer: W, map: &DensityMap) -> Result<()> {
    let (w, h) = (map.width(), map.height());
    write!(writer, "Pf\n{w} {h}\n-1.0\n")?;
    let mut buf = Vec::with_capacity(w * h * 4);
    for row in (0..h).rev() {
        for &v in &map.values()[row * w..(row + 1) * w] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    writer.write_all(&buf)?;
    Ok(())
}

pub fn read_pfm_file(path: impl AsRef<Path>) -> Result<DensityMap> {
    read_pfm(&std::fs::read(path)?)
}

pub fn write_pfm_file(path: impl AsRef<Path>, map: &DensityMap) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_pfm(&mut out, map)?;
    out.flush()?;
    Ok(())
}

/// Parses a binary PGM label mask. Samples are one byte when maxval < 256
/// and two big-endian bytes otherwise.
pub fn read_label_mask(bytes: &[u8]) -> Result<LabelMask> {
    let mut hdr = Header::new(bytes);
    let (at, magic) = hdr.token("magic number")?;
    if magic != "P5" {
        return Err(format_err(
            at,
            format!("expected binary PGM `P5`, found `{magic}`"),
        ));
    }
    let width = hdr.dimension("width")?;
    let height = hdr.dimension("height")?;
    let (at, max_tok) = hdr.token("maxval")?;
    let maxval = match max_tok.parse::<u32>() {
        Ok(m) if (1..=65535).contains(&m) => m as u16,
        _ => return Err(format_err(at, format!("invalid maxval `{max_tok}`"))),
    };
    let start = hdr.end()?;

    let count = width
        .checked_mul(height)
        .ok_or_else(|| format_err(0, "image dimensions overflow"))?;
    let wide = maxval > 255;
    let sample_size = if wide { 2 } else { 1 };
    check_payload(bytes, start, count * sample_size)?;

    let mut labels = Vec::with_capacity(count);
    for (k, chunk) in bytes[start..].chunks_exact(sample_size).enumerate() {
        let v = if wide {
            u16::from_be_bytes([chunk[0], chunk[1]])
        } else {
            u16::from(chunk[0])
        };
        if v > maxval {
            return Err(format_err(
                start + sample_size * k,
                format!("sample {v} exceeds maxval {maxval}"),
            ));
        }
        labels.push(v);
    }
    LabelMask::new(ImageGeometry { width, height }, labels)
}

pub fn write_label_mask<W: Write>(mut writer: W, mask: &LabelMask) -> Result<()> {
    let g = mask.geometry();
    write!(writer, "P5\n{} {}\n65535\n", g.width, g.height)?;
    let buf: Vec<u8> = mask.labels().iter().flat_map(|l| l.to_be_bytes()).collect();
    writer.write_all(&buf)?;
    Ok(())
}

pub fn read_label_mask_file(path: impl AsRef<Path>) -> Result<LabelMask> {
    read_label_mask(&std::fs::read(path)?)
}

pub fn write_label_mask_file(path: impl AsRef<Path>, mask: &LabelMask) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_label_mask(&mut out, mask)?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn offset_of(err: Error) -> usize {
        match err {
            Error::Format { offset, .. } => offset,
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn pfm_layout_is_bottom_up_little_endian() {
        let g = ImageGeometry::new(2, 2).unwrap();
        let map = DensityMap::from_values(g, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut buf = Vec::new();
        write_pfm(&mut buf, &map).unwrap();
        let header = b"Pf\n2 2\n-1.0\n";
        assert_eq!(&buf[..header.len()], header);
        let first = f32::from_le_bytes(buf[header.len()..header.len() + 4].try_into().unwrap());
        assert_eq!(first, 3.0);
        assert_eq!(read_pfm(&buf).unwrap(), map);
    }

    #[test]
    fn pfm_big_endian_input() {
        let mut buf = b"Pf\n1 2\n1.0\n".to_vec();
        buf.extend_from_slice(&0.25f32.to_be_bytes());
        buf.extend_from_slice(&0.5f32.to_be_bytes());
        let map = read_pfm(&buf).unwrap();
        assert_eq!(map.values(), &[0.5, 0.25]);
    }

    #[test]
    fn pfm_errors_carry_offsets() {
        assert_eq!(offset_of(read_pfm(b"P5\n1 1\n-1.0\n").unwrap_err()), 0);
        assert_eq!(offset_of(read_pfm(b"PF\n1 1\n-1.0\n").unwrap_err()), 0);
        assert_eq!(offset_of(read_pfm(b"Pf\n1 x\n-1.0\n").unwrap_err()), 5);
        assert_eq!(offset_of(read_pfm(b"Pf\n1 1\n0\n").unwrap_err()), 7);
        // Truncated payload reports end of file.
        assert_eq!(offset_of(read_pfm(b"Pf\n1 1\n-1.0\n\0\0").unwrap_err()), 14);
        let mut nan = b"Pf\n2 1\n-1.0\n".to_vec();
        nan.extend_from_slice(&0.0f32.to_le_bytes());
        nan.extend_from_slice(&f32::NAN.to_le_bytes());
        assert_eq!(offset_of(read_pfm(&nan).unwrap_err()), 16);
    }

    #[test]
    fn pgm_sixteen_bit_round_trip() {
        let g = ImageGeometry::new(3, 1).unwrap();
        let mask = LabelMask::new(g, vec![0, 258, 65535]).unwrap();
        let mut buf = Vec::new();
        write_label_mask(&mut buf, &mask).unwrap();
        assert_eq!(buf, b"P5\n3 1\n65535\n\x00\x00\x01\x02\xff\xff");
        assert_eq!(read_label_mask(&buf).unwrap(), mask);
    }

    #[test]
    fn pgm_eight_bit_and_comments() {
        let mask = read_label_mask(b"P5\n# made by hand\n2 1 # dims\n255\n\x03\x00").unwrap();
        assert_eq!(mask.labels(), &[3, 0]);
    }

    #[test]
    fn pgm_errors_carry_offsets() {
        assert_eq!(offset_of(read_label_mask(b"P2\n1 1\n255\n0").unwrap_err()), 0);
        assert_eq!(offset_of(read_label_mask(b"P5\n1 1\n70000\n\0").unwrap_err()), 7);
        assert_eq!(
            offset_of(read_label_mask(b"P5\n2 1\n9\n\x01\x0a").unwrap_err()),
            10
        );
        assert_eq!(offset_of(read_label_mask(b"P5\n1 1\n255\n\0\0").unwrap_err()), 12);
    }
}
