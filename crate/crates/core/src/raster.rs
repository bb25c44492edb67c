//! Agent-centric bird's-eye-view raster images.
//!
//! The image window spans `ahead`/`behind` meters along the agent's heading
//! and `left`/`right` meters across it. Agent-frame +y points up the image
//! and +x to the right. Pixel `(row, col)` covers the square whose top-left
//! corner is `(col, row)` in pixel units; polygons are filled where the pixel
//! center lies inside under the even-odd rule.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{box_corners, Point2, Pose, PredictionInstance};

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorMap {
    pub background: Rgb,
    pub drivable_area: Rgb,
    pub crosswalk: Rgb,
    pub other_agent: Rgb,
    pub target_agent: Rgb,
}

impl Default for ColorMap {
    fn default() -> Self {
        ColorMap {
            background: [0, 0, 0],
            drivable_area: [64, 64, 64],
            crosswalk: [192, 192, 192],
            other_agent: [0, 0, 255],
            target_agent: [255, 0, 0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterConfig {
    /// Meters per pixel.
    pub resolution: f64,
    pub width_px: usize,
    pub height_px: usize,
    pub ahead: f64,
    pub behind: f64,
    pub left: f64,
    pub right: f64,
    pub color_map: ColorMap,
    /// Footprint of the target agent, which the scene file does not carry.
    pub target_length: f64,
    pub target_width: f64,
}

impl Default for RasterConfig {
    fn default() -> Self {
        RasterConfig {
            resolution: 0.1,
            width_px: 500,
            height_px: 500,
            ahead: 40.0,
            behind: 10.0,
            left: 25.0,
            right: 25.0,
            color_map: ColorMap::default(),
            target_length: 4.0,
            target_width: 2.0,
        }
    }
}

impl RasterConfig {
    pub fn validate(&self) -> Result<()> {
        let extents = [self.ahead, self.behind, self.left, self.right];
        if extents.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::invalid("raster extents must be finite and non-negative"));
        }
        if self.resolution.is_nan() || self.resolution <= 0.0 || self.width_px == 0 || self.height_px == 0 {
            return Err(Error::invalid("raster size and resolution must be positive"));
        }
        let tol = 1e-9 * (1.0 + self.ahead + self.behind + self.left + self.right);
        if ((self.ahead + self.behind) - self.height_px as f64 * self.resolution).abs() > tol {
            return Err(Error::invalid("ahead + behind must equal height_px x resolution"));
        }
        if ((self.left + self.right) - self.width_px as f64 * self.resolution).abs() > tol {
            return Err(Error::invalid("left + right must equal width_px x resolution"));
        }
        if !(self.target_length >= 0.0 && self.target_width >= 0.0) {
            return Err(Error::invalid("target footprint must be non-negative"));
        }
        Ok(())
    }

    // Pixels per meter, derived from the integer sizes so the common case
    // (500 px over 50 m) is exactly 10.
    fn scale_x(&self) -> f64 {
        self.width_px as f64 / (self.left + self.right)
    }

    fn scale_y(&self) -> f64 {
        self.height_px as f64 / (self.ahead + self.behind)
    }

    /// Continuous pixel coordinates `(col, row)` of an agent-frame point.
    fn to_pixel_space(&self, p: Point2) -> (f64, f64) {
        ((p.x + self.left) * self.scale_x(), (self.ahead - p.y) * self.scale_y())
    }
}

/// Pixel containing `p`, or `None` outside the window.
pub fn world_to_pixel(p: Point2, config: &RasterConfig) -> Option<(usize, usize)> {
    let (col, row) = config.to_pixel_space(p);
    let (col, row) = (col.floor(), row.floor());
    if !(col >= 0.0 && row >= 0.0) || col >= config.width_px as f64 || row >= config.height_px as f64 {
        return None;
    }
    Some((row as usize, col as usize))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width_px: usize,
    pub height_px: usize,
    /// Row-major RGB.
    pub pixels: Vec<u8>,
}

impl RasterImage {
    fn filled(width_px: usize, height_px: usize, color: Rgb) -> Self {
        let mut pixels = Vec::with_capacity(width_px * height_px * 3);
        for _ in 0..width_px * height_px {
            pixels.extend_from_slice(&color);
        }
        RasterImage { width_px, height_px, pixels }
    }

    pub fn pixel(&self, row: usize, col: usize) -> Rgb {
        let i = (row * self.width_px + col) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn fill_span(&mut self, row: usize, cols: std::ops::Range<usize>, color: Rgb) {
        let start = (row * self.width_px + cols.start) * 3;
        let end = (row * self.width_px + cols.end) * 3;
        for px in self.pixels[start..end].chunks_exact_mut(3) {
            px.copy_from_slice(&color);
        }
    }

    /// Even-odd scanline fill of one ring given in continuous pixel coordinates.
    fn fill_ring(&mut self, ring: &[(f64, f64)], color: Rgb) {
        if ring.len() < 3 {
            return;
        }
        let min_row = ring.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let max_row = ring.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let first = (min_row - 0.5).ceil().max(0.0) as usize;
        let last = ((max_row - 0.5).floor()).min(self.height_px as f64 - 1.0);
        if last < 0.0 {
            return;
        }
        let mut crossings = Vec::new();
        for row in first..=last as usize {
            let yc = row as f64 + 0.5;
            crossings.clear();
            for (i, &(x0, y0)) in ring.iter().enumerate() {
                let (x1, y1) = ring[(i + 1) % ring.len()];
                if (y0 <= yc) != (y1 <= yc) {
                    crossings.push(x0 + (yc - y0) / (y1 - y0) * (x1 - x0));
                }
            }
            crossings.sort_by(f64::total_cmp);
            for pair in crossings.chunks_exact(2) {
                // columns whose center c + 0.5 lies in [pair[0], pair[1])
                let c0 = (pair[0] - 0.5).ceil().max(0.0);
                let c1 = (pair[1] - 0.5).ceil().min(self.width_px as f64);
                if c1 > c0 {
                    self.fill_span(row, c0 as usize..c1 as usize, color);
                }
            }
        }
    }

    /// Binary PPM (P6).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pixels.len() + 32);
        let _ = write!(out, "P6\n{} {}\n255\n", self.width_px, self.height_px);
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        let encoder = image::codecs::png::PngEncoder::new(&mut out);
        image::ImageEncoder::write_image(
            encoder,
            &self.pixels,
            self.width_px as u32,
            self.height_px as u32,
            image::ExtendedColorType::Rgb8,
        )?;
        Ok(out)
    }
}

/// Paints background, drivable area, crosswalks, other agents and finally
/// the target agent, later layers over earlier ones.
pub fn render(instance: &PredictionInstance, config: &RasterConfig) -> Result<RasterImage> {
    config.validate()?;
    let colors = &config.color_map;
    let mut img = RasterImage::filled(config.width_px, config.height_px, colors.background);
    let project = |ring: &[Point2]| -> Vec<(f64, f64)> { ring.iter().map(|&p| config.to_pixel_space(p)).collect() };
    for ring in &instance.map.drivable_area {
        img.fill_ring(&project(ring), colors.drivable_area);
    }
    for ring in &instance.map.crosswalks {
        img.fill_ring(&project(ring), colors.crosswalk);
    }
    for agent in &instance.map.other_agents {
        img.fill_ring(&project(&agent.corners()), colors.other_agent);
    }
    let target = box_corners(&Pose::agent_origin(), config.target_length, config.target_width);
    img.fill_ring(&project(&target), colors.target_agent);
    Ok(img)
}
