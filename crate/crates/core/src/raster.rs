//! Binary raster images, the printable pixel set, and PBM input/output.
//!
//! Images are grids of binary pixels in row-major order. Value 1 means the
//! pixel receives ink ("printable"), value 0 means bare surface. This matches
//! PBM polarity, where 1 is black. Pixel positions are the integer pixel
//! centers `(col, row)`; conversion to physical units is a separate explicit
//! step via [`PhysicalScale`] so all planning runs in exact integer pixel
//! space.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use std::fs;
use std::path::Path;

/// A width x height grid of binary pixels, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryRaster {
    width: u32,
    height: u32,
    values: Vec<u8>,
}

impl BinaryRaster {
    /// Builds a raster from row-major values. Every value must be 0 or 1 and
    /// the length must equal `width * height`.
    pub fn new(width: u32, height: u32, values: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("raster dimensions must be positive"));
        }
        if values.len() != (width as usize) * (height as usize) {
            return Err(Error::invalid(format!(
                "raster payload has {} values, expected {}",
                values.len(),
                (width as usize) * (height as usize)
            )));
        }
        if let Some(pos) = values.iter().position(|v| *v > 1) {
            return Err(Error::invalid(format!(
                "raster value at index {pos} is {}, expected 0 or 1",
                values[pos]
            )));
        }
        Ok(BinaryRaster { width, height, values })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Result<Self> {
        let mut values = Vec::with_capacity((width as usize) * (height as usize));
        for row in 0..height {
            for col in 0..width {
                values.push(f(col, row) as u8);
            }
        }
        BinaryRaster::new(width, height, values)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn get(&self, col: u32, row: u32) -> u8 {
        assert!(col < self.width && row < self.height, "pixel out of bounds");
        self.values[(row as usize) * (self.width as usize) + col as usize]
    }

    /// The printable pixels (value 1) in row-major order.
    pub fn printable_set(&self) -> Vec<PixelPoint> {
        let mut out = Vec::new();
        for row in 0..self.height {
            for col in 0..self.width {
                if self.get(col, row) == 1 {
                    out.push(PixelPoint::new(col, row));
                }
            }
        }
        out
    }

    pub fn printable_count(&self) -> usize {
        self.values.iter().filter(|v| **v == 1).count()
    }

    /// Parses PBM bytes: plain "P1" or packed binary "P4".
    pub fn from_pbm_bytes(data: &[u8]) -> Result<Self> {
        parse_pbm(data)
    }

    pub fn load_pbm(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let data = fs::read(path).map_err(|e| Error::io(path, e))?;
        parse_pbm(&data)
    }

    /// Encodes as plain PBM ("P1"), wrapping rows at 70 characters.
    pub fn to_p1_bytes(&self) -> Vec<u8> {
        let mut out = format!("P1\n{} {}\n", self.width, self.height).into_bytes();
        for row in 0..self.height {
            let mut line_len = 0;
            for col in 0..self.width {
                if line_len == 70 {
                    out.push(b'\n');
                    line_len = 0;
                }
                out.push(b'0' + self.get(col, row));
                line_len += 1;
            }
            out.push(b'\n');
        }
        out
    }

    /// Encodes as packed binary PBM ("P4"), each row padded to a byte.
    pub fn to_p4_bytes(&self) -> Vec<u8> {
        let mut out = format!("P4\n{} {}\n", self.width, self.height).into_bytes();
        for row in 0..self.height {
            let mut byte = 0u8;
            let mut bits = 0;
            for col in 0..self.width {
                byte = (byte << 1) | self.get(col, row);
                bits += 1;
                if bits == 8 {
                    out.push(byte);
                    byte = 0;
                    bits = 0;
                }
            }
            if bits > 0 {
                out.push(byte << (8 - bits));
            }
        }
        out
    }

    pub fn save_p1(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_p1_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn save_p4(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_p4_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// One pixel of a raster, addressed by column and row.
///
/// The associated planar position is exactly `(col, row)` in pixel units
/// (pixel-center convention).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixelPoint {
    pub row: u32,
    pub col: u32,
}

impl PixelPoint {
    pub fn new(col: u32, row: u32) -> Self {
        PixelPoint { row, col }
    }

    pub fn pos(&self) -> Vec2 {
        Vec2::new(self.col as f64, self.row as f64)
    }
}

/// Physical length of one pixel step, in millimetres per pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalScale {
    pitch: f64,
}

impl PhysicalScale {
    pub fn new(pitch: f64) -> Result<Self> {
        if !(pitch > 0.0) || !pitch.is_finite() {
            return Err(Error::invalid(format!("pitch must be positive, got {pitch}")));
        }
        Ok(PhysicalScale { pitch })
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    /// Millimetre position of a pixel: `pos * pitch`.
    pub fn to_physical(&self, p: PixelPoint) -> Vec2 {
        p.pos() * self.pitch
    }
}

struct Scanner<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::PbmParse { offset: self.pos, message: message.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.data.get(self.pos).copied()
    }

    /// Skips whitespace and `#` comments (which run to end of line).
    fn skip_separators(&mut self) {
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(b) = self.peek() {
                    self.pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn read_dimension(&mut self, what: &str) -> Result<u32> {
        self.skip_separators();
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err(format!("expected {what} (unsigned integer)")));
        }
        let text = std::str::from_utf8(&self.data[start..self.pos]).unwrap();
        let value: u32 = text
            .parse()
            .map_err(|_| Error::PbmParse { offset: start, message: format!("{what} out of range") })?;
        if value == 0 {
            return Err(Error::PbmParse { offset: start, message: format!("{what} must be positive") });
        }
        Ok(value)
    }
}

fn parse_pbm(data: &[u8]) -> Result<BinaryRaster> {
    let mut sc = Scanner { data, pos: 0 };
    if data.len() < 2 {
        return Err(sc.err("truncated file, missing magic number"));
    }
    let magic = &data[0..2];
    sc.pos = 2;
    let packed = match magic {
        b"P1" => false,
        b"P4" => true,
        _ => {
            sc.pos = 0;
            return Err(sc.err(format!(
                "bad magic {:?}, expected \"P1\" or \"P4\"",
                String::from_utf8_lossy(magic)
            )));
        }
    };

    let width = sc.read_dimension("width")?;
    let height = sc.read_dimension("height")?;
    let total = (width as usize) * (height as usize);
    let mut values = Vec::with_capacity(total);

    if packed {
        // Exactly one whitespace byte separates the header from the payload.
        match sc.peek() {
            Some(b) if b.is_ascii_whitespace() => sc.pos += 1,
            _ => return Err(sc.err("expected single whitespace before packed payload")),
        }
        let row_bytes = width.div_ceil(8) as usize;
        for _ in 0..height {
            if sc.pos + row_bytes > data.len() {
                sc.pos = data.len();
                return Err(sc.err(format!(
                    "payload ends early, expected {} bytes per row",
                    row_bytes
                )));
            }
            let row = &data[sc.pos..sc.pos + row_bytes];
            for col in 0..width as usize {
                let bit = (row[col / 8] >> (7 - (col % 8))) & 1;
                values.push(bit);
            }
            sc.pos += row_bytes;
        }
    } else {
        while values.len() < total {
            sc.skip_separators();
            match sc.peek() {
                Some(b'0') => values.push(0),
                Some(b'1') => values.push(1),
                Some(b) => {
                    return Err(sc.err(format!(
                        "expected binary digit, found {:?}",
                        char::from(b)
                    )))
                }
                None => {
                    return Err(sc.err(format!(
                        "payload ends after {} of {} pixels",
                        values.len(),
                        total
                    )))
                }
            }
            sc.pos += 1;
        }
    }

    BinaryRaster::new(width, height, values)
}
