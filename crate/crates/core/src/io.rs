//! Image files: binary PPM (P6, maxval 255) always, PNG behind the `png`
//! feature.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

/// Encodes as `P6\n<w> <h>\n255\n` followed by the RGB bytes.
pub fn encode_ppm(img: &Image) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.len() * 3);
    out.extend_from_slice(header.as_bytes());
    for px in img.pixels() {
        out.extend_from_slice(px);
    }
    out
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Ppm {
            offset: self.pos,
            message: message.into(),
        })
    }

    /// Skips whitespace and `#` comments.
    fn skip_blank(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while self.data.get(self.pos).is_some_and(|&b| b != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_blank();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(format!("expected {what}"));
        }
        let text = std::str::from_utf8(&self.data[start..self.pos]).expect("ASCII digits");
        match text.parse() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                self.err(format!("{what} `{text}` out of range"))
            }
        }
    }
}

pub fn decode_ppm(data: &[u8]) -> Result<Image> {
    let mut cur = Cursor { data, pos: 0 };
    if !data.starts_with(b"P6") {
        return cur.err("missing P6 magic number");
    }
    cur.pos = 2;
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval_at = cur.pos;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        cur.pos = maxval_at;
        cur.skip_blank();
        return cur.err(format!("maxval {maxval} is not supported, only 255"));
    }
    if width == 0 || height == 0 {
        return cur.err(format!("empty image {width}x{height}"));
    }
    if !data.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
        return cur.err("expected a single whitespace byte after maxval");
    }
    cur.pos += 1;
    let need = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::Ppm {
            offset: cur.pos,
            message: format!("dimensions {width}x{height} overflow"),
        })?;
    let payload = &data[cur.pos..];
    if payload.len() < need {
        cur.pos = data.len();
        return cur.err(format!("truncated payload: {} of {need} bytes", payload.len()));
    }
    let pixels = payload[..need]
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    Image::new(width, height, pixels)
}

pub fn read_ppm(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_ppm(&data)
}

pub fn write_ppm(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_ppm(img)).map_err(|e| Error::io(path, e))
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// Whether [`read_image`] can load files with this path's extension.
pub fn is_supported(path: &Path) -> bool {
    let ext = extension(path);
    ext == "ppm" || (ext == "png" && cfg!(feature = "png"))
}

/// Reads a PPM, or a PNG when the `png` feature is on.
pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "ppm" => read_ppm(path),
        #[cfg(feature = "png")]
        "png" => png::read(path),
        other => Err(Error::UnsupportedFormat(format!("{} (.{other})", path.display()))),
    }
}

/// Writes a PPM, or a PNG when the `png` feature is on.
pub fn write_image(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "ppm" => write_ppm(path, img),
        #[cfg(feature = "png")]
        "png" => png::write(path, img),
        other => Err(Error::UnsupportedFormat(format!("{} (.{other})", path.display()))),
    }
}

#[cfg(feature = "png")]
mod png {
    use super::*;

    fn convert(path: &Path, e: image::ImageError) -> Error {
        match e {
            image::ImageError::IoError(e) => Error::io(path, e),
            other => Error::UnsupportedFormat(format!("{}: {other}", path.display())),
        }
    }

    pub(super) fn read(path: &Path) -> Result<Image> {
        let rgb = image::open(path).map_err(|e| convert(path, e))?.into_rgb8();
        let (w, h) = rgb.dimensions();
        let pixels = rgb.pixels().map(|p| p.0).collect();
        Image::new(w as usize, h as usize, pixels)
    }

    pub(super) fn write(path: &Path, img: &Image) -> Result<()> {
        let raw: Vec<u8> = img.pixels().iter().flatten().copied().collect();
        let buf = image::RgbImage::from_raw(img.width() as u32, img.height() as u32, raw)
            .expect("buffer length matches dimensions");
        buf.save(path).map_err(|e| convert(path, e))
    }
}
