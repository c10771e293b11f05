//! Flat-color RGB canvases and plain PPM ("P3") encoding, used for the cell
//! visualization and the simulator's progress frames.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use std::fs;
use std::path::Path;

pub const WHITE: [u8; 3] = [255, 255, 255];
/// Already-printed ink.
pub const INK: [u8; 3] = [40, 40, 40];
/// Printable pixels that are still waiting for ink.
pub const PENDING: [u8; 3] = [225, 225, 225];
pub const MARKER: [u8; 3] = [0, 0, 0];

/// Distinct flat colors for cells and their robots.
pub const PALETTE: [[u8; 3]; 12] = [
    [31, 119, 180],
    [255, 127, 14],
    [44, 160, 44],
    [214, 39, 40],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [127, 127, 127],
    [188, 189, 34],
    [23, 190, 207],
    [174, 199, 232],
    [255, 187, 120],
];

pub fn cell_color(index: usize) -> [u8; 3] {
    PALETTE[index % PALETTE.len()]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl RgbImage {
    pub fn filled(width: u32, height: u32, color: [u8; 3]) -> Self {
        let mut pixels = Vec::with_capacity((width as usize) * (height as usize) * 3);
        for _ in 0..(width as usize) * (height as usize) {
            pixels.extend_from_slice(&color);
        }
        RgbImage { width, height, pixels }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Raw RGB bytes, row-major, three per pixel.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, col: u32, row: u32) -> [u8; 3] {
        let i = ((row as usize) * (self.width as usize) + col as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Sets one pixel; coordinates outside the canvas are ignored.
    pub fn set(&mut self, col: i64, row: i64, color: [u8; 3]) {
        if col < 0 || row < 0 || col >= self.width as i64 || row >= self.height as i64 {
            return;
        }
        let i = ((row as usize) * (self.width as usize) + col as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&color);
    }

    /// Fills the disc of the given radius around a continuous center.
    pub fn draw_disc(&mut self, center: Vec2, radius: f64, color: [u8; 3]) {
        let r = radius.max(0.5);
        let c0 = (center.x - r).floor() as i64;
        let c1 = (center.x + r).ceil() as i64;
        let r0 = (center.y - r).floor() as i64;
        let r1 = (center.y + r).ceil() as i64;
        for row in r0..=r1 {
            for col in c0..=c1 {
                let p = Vec2::new(col as f64, row as f64);
                if p.dist_sq(center) <= r * r {
                    self.set(col, row, color);
                }
            }
        }
    }

    /// Draws a 1-pixel line between the rounded endpoints.
    pub fn draw_line(&mut self, from: Vec2, to: Vec2, color: [u8; 3]) {
        let a = (from.x.round() as i64, from.y.round() as i64);
        let b = (to.x.round() as i64, to.y.round() as i64);
        for (x, y) in crate::pathplan::bresenham(a, b) {
            self.set(x, y, color);
        }
    }

    /// Marks a mean/goal with a small cross.
    pub fn draw_cross(&mut self, center: Vec2, color: [u8; 3]) {
        let cx = center.x.round() as i64;
        let cy = center.y.round() as i64;
        for d in -2..=2 {
            self.set(cx + d, cy, color);
            self.set(cx, cy + d, color);
        }
    }

    /// Encodes as plain PPM ("P3"), one pixel triplet per line.
    pub fn to_p3_bytes(&self) -> Vec<u8> {
        let mut out = format!("P3\n{} {}\n255\n", self.width, self.height).into_bytes();
        for px in self.pixels.chunks_exact(3) {
            out.extend_from_slice(format!("{} {} {}\n", px[0], px[1], px[2]).as_bytes());
        }
        out
    }

    pub fn save_p3(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_p3_bytes()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filled_canvas_is_uniform() {
        let img = RgbImage::filled(3, 2, WHITE);
        assert_eq!(img.pixels().len(), 18);
        assert!(img.pixels().iter().all(|b| *b == 255));
    }

    #[test]
    fn out_of_bounds_set_ignored() {
        let mut img = RgbImage::filled(2, 2, WHITE);
        img.set(-1, 0, INK);
        img.set(0, 5, INK);
        assert!(img.pixels().iter().all(|b| *b == 255));
    }

    #[test]
    fn p3_header_and_size() {
        let img = RgbImage::filled(2, 2, [1, 2, 3]);
        let bytes = img.to_p3_bytes();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.starts_with("P3\n2 2\n255\n"));
        assert_eq!(text.lines().count(), 3 + 4);
    }

    #[test]
    fn disc_covers_center() {
        let mut img = RgbImage::filled(9, 9, WHITE);
        img.draw_disc(Vec2::new(4.0, 4.0), 2.0, INK);
        assert_eq!(img.get(4, 4), INK);
        assert_eq!(img.get(6, 4), INK);
        assert_eq!(img.get(8, 8), WHITE);
    }
}
