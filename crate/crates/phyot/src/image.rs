//! Grayscale image grid and PGM (P5) codec.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::io::{Read, Write};
use std::path::Path;

/// Plain row-major grid of scalars, no range constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![T::zero(); width * height],
        }
    }

    pub fn filled(width: usize, height: usize, v: T) -> Self {
        Self {
            width,
            height,
            data: vec![v; width * height],
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.data[y * self.width + x] = v;
    }

    /// Sample at integer coordinates with edge clamping.
    #[inline]
    pub fn at_clamped(&self, x: isize, y: isize) -> T {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.at(xc, yc)
    }

    /// Bilinear sample at fractional coordinates, edge-clamped.
    pub fn sample_bilinear(&self, x: T, y: T) -> T {
        let x0f = x.floor();
        let y0f = y.floor();
        let fx = x - x0f;
        let fy = y - y0f;
        let x0 = x0f.into_f64() as isize;
        let y0 = y0f.into_f64() as isize;
        let v00 = self.at_clamped(x0, y0);
        let v10 = self.at_clamped(x0 + 1, y0);
        let v01 = self.at_clamped(x0, y0 + 1);
        let v11 = self.at_clamped(x0 + 1, y0 + 1);
        let one = T::one();
        (one - fy) * ((one - fx) * v00 + fx * v10) + fy * ((one - fx) * v01 + fx * v11)
    }

    pub fn same_size<U>(&self, other: &Grid<U>) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Intensity image with all values finite and inside [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage<T> {
    grid: Grid<T>,
}

impl<T: Scalar> GrayImage<T> {
    pub fn from_grid(grid: Grid<T>) -> Result<Self> {
        if grid.data.len() != grid.width * grid.height {
            return Err(Error::InvalidInput("image data length mismatch".into()));
        }
        for &v in &grid.data {
            if !v.is_finite() || v < T::zero() || v > T::one() {
                return Err(Error::InvalidInput(
                    "image intensities must be finite and within [0,1]".into(),
                ));
            }
        }
        Ok(Self { grid })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> T,
    ) -> Result<Self> {
        let mut g = Grid::zeros(width, height);
        for y in 0..height {
            for x in 0..width {
                g.set(x, y, f(x, y));
            }
        }
        Self::from_grid(g)
    }

    pub fn constant(width: usize, height: usize, v: T) -> Result<Self> {
        Self::from_grid(Grid::filled(width, height, v))
    }

    pub fn width(&self) -> usize {
        self.grid.width
    }

    pub fn height(&self) -> usize {
        self.grid.height
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> T {
        self.grid.at(x, y)
    }

    pub fn sample_bilinear(&self, x: T, y: T) -> T {
        self.grid.sample_bilinear(x, y)
    }

    /// Rectangular crop; the rect is clamped to the image bounds.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> GrayImage<T> {
        let x0 = x0.min(self.width().saturating_sub(1));
        let y0 = y0.min(self.height().saturating_sub(1));
        let w = w.min(self.width() - x0).max(1);
        let h = h.min(self.height() - y0).max(1);
        let mut g = Grid::zeros(w, h);
        for y in 0..h {
            for x in 0..w {
                g.set(x, y, self.at(x0 + x, y0 + y));
            }
        }
        GrayImage { grid: g }
    }

    /// Decode binary PGM (P5, 8-bit) into [0,1] intensities.
    pub fn read_pgm(mut reader: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        let mut pos = 0usize;
        let mut token = |bytes: &[u8]| -> Result<String> {
            // skip whitespace and comments
            loop {
                while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    break;
                }
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::Parse {
                    line: 0,
                    msg: "unexpected end of PGM header".into(),
                });
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        let magic = token(&bytes)?;
        if magic != "P5" {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected P5 magic, got {magic}"),
            });
        }
        let width: usize = token(&bytes)?.parse().map_err(|_| Error::Parse {
            line: 1,
            msg: "bad PGM width".into(),
        })?;
        let height: usize = token(&bytes)?.parse().map_err(|_| Error::Parse {
            line: 1,
            msg: "bad PGM height".into(),
        })?;
        let maxval: usize = token(&bytes)?.parse().map_err(|_| Error::Parse {
            line: 1,
            msg: "bad PGM maxval".into(),
        })?;
        if maxval == 0 || maxval > 255 {
            return Err(Error::Parse {
                line: 1,
                msg: "only 8-bit PGM supported".into(),
            });
        }
        pos += 1; // single whitespace after maxval
        let need = width * height;
        if bytes.len() < pos + need {
            return Err(Error::Parse {
                line: 1,
                msg: "truncated PGM payload".into(),
            });
        }
        let scale = T::from_f64(1.0 / maxval as f64);
        let data = bytes[pos..pos + need]
            .iter()
            .map(|&b| T::from_f64(b as f64) * scale)
            .collect();
        Self::from_grid(Grid {
            width,
            height,
            data,
        })
    }

    /// Encode as binary PGM (P5, 8-bit), rounding to the nearest level.
    pub fn write_pgm(&self, mut writer: impl Write) -> Result<()> {
        write!(writer, "P5\n{} {}\n255\n", self.width(), self.height())?;
        let half = T::from_f64(0.5);
        let max = T::from_f64(255.0);
        let buf: Vec<u8> = self
            .grid
            .data
            .iter()
            .map(|&v| (v * max + half).floor().into_f64() as u8)
            .collect();
        writer.write_all(&buf)?;
        Ok(())
    }

    pub fn load_pgm(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_pgm(std::fs::File::open(path)?)
    }

    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_pgm(std::fs::File::create(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        let g = Grid {
            width: 2,
            height: 1,
            data: vec![0.5f64, 1.5],
        };
        assert!(GrayImage::from_grid(g).is_err());
    }

    #[test]
    fn bilinear_on_ramp() {
        let g = Grid {
            width: 4,
            height: 1,
            data: vec![0.0f64, 1.0, 2.0, 3.0],
        };
        assert!((g.sample_bilinear(1.5, 0.0) - 1.5).abs() < 1e-12);
        // edge clamp
        assert!((g.sample_bilinear(-2.0, 0.0) - 0.0).abs() < 1e-12);
        assert!((g.sample_bilinear(9.0, 0.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn pgm_roundtrip() {
        let img =
            GrayImage::<f64>::from_fn(5, 3, |x, y| (x as f64 + y as f64 * 5.0) / 255.0).unwrap();
        let mut buf = Vec::new();
        img.write_pgm(&mut buf).unwrap();
        let back = GrayImage::<f64>::read_pgm(&buf[..]).unwrap();
        assert_eq!(img, back);
    }

    #[test]
    fn pgm_with_comment() {
        let data = b"P5\n# a comment\n2 2\n255\n\x00\x40\x80\xff";
        let img = GrayImage::<f64>::read_pgm(&data[..]).unwrap();
        assert_eq!(img.width(), 2);
        assert!((img.at(1, 1) - 1.0).abs() < 1e-12);
    }
}
