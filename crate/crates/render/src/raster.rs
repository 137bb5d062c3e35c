use std::path::Path;

use graphsim_core::{Graph, LayoutKind};
use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::layout::Drawing;
use crate::style::StyleParams;
use crate::RenderError;

pub const MIN_CANVAS: u32 = 256;
pub const STIMULUS_CANVAS: u32 = 1024;
pub const MARGIN_FRACTION: f64 = 0.05;
pub const WHITE: [u8; 3] = [255, 255, 255];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub graph_id: String,
    pub layout: Option<LayoutKind>,
    pub rotation_degrees: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    pub pixels: RgbImage,
    pub provenance: Provenance,
}

impl RasterImage {
    pub fn blank(width: u32, height: u32, provenance: Provenance) -> Self {
        RasterImage { pixels: RgbImage::from_pixel(width, height, Rgb(WHITE)), provenance }
    }

    pub fn width(&self) -> u32 {
        self.pixels.width()
    }

    pub fn height(&self) -> u32 {
        self.pixels.height()
    }

    pub fn save_png(&self, path: &Path) -> Result<(), RenderError> {
        self.pixels.save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }

    pub fn load_png(path: &Path, provenance: Provenance) -> Result<Self, RenderError> {
        let pixels = image::open(path)?.to_rgb8();
        Ok(RasterImage { pixels, provenance })
    }
}

fn blend(img: &mut RgbImage, x: u32, y: u32, color: [u8; 3], alpha: f64) {
    let px = img.get_pixel_mut(x, y);
    for (c, &target) in px.0.iter_mut().zip(&color) {
        *c = (*c as f64 * (1.0 - alpha) + target as f64 * alpha).round() as u8;
    }
}

/// Coverage of a stroke of half-width `hw` at distance `d` from its centre line,
/// with a one-pixel ramp and thin strokes capped at their area.
fn coverage(d: f64, hw: f64) -> f64 {
    (hw + 0.5 - d).clamp(0.0, (2.0 * hw).min(1.0))
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 { ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let q = [a[0] + t * ab[0] - p[0], a[1] + t * ab[1] - p[1]];
    (q[0] * q[0] + q[1] * q[1]).sqrt()
}

fn pixel_box(img: &RgbImage, lo: [f64; 2], hi: [f64; 2]) -> (std::ops::Range<u32>, std::ops::Range<u32>) {
    let clampx = |v: f64| v.clamp(0.0, img.width() as f64) as u32;
    let clampy = |v: f64| v.clamp(0.0, img.height() as f64) as u32;
    (clampx(lo[0].floor())..clampx(hi[0].ceil() + 1.0), clampy(lo[1].floor())..clampy(hi[1].ceil() + 1.0))
}

fn stroke_segment(img: &mut RgbImage, a: [f64; 2], b: [f64; 2], width: f64, color: [u8; 3]) {
    let hw = 0.5 * width;
    let pad = hw + 1.0;
    let lo = [a[0].min(b[0]) - pad, a[1].min(b[1]) - pad];
    let hi = [a[0].max(b[0]) + pad, a[1].max(b[1]) + pad];
    let (xs, ys) = pixel_box(img, lo, hi);
    for y in ys {
        for x in xs.clone() {
            let c = coverage(segment_distance([x as f64 + 0.5, y as f64 + 0.5], a, b), hw);
            if c > 0.0 {
                blend(img, x, y, color, c);
            }
        }
    }
}

fn fill_disc(img: &mut RgbImage, centre: [f64; 2], radius: f64, color: [u8; 3]) {
    let pad = radius + 1.0;
    let (xs, ys) = pixel_box(img, [centre[0] - pad, centre[1] - pad], [centre[0] + pad, centre[1] + pad]);
    for y in ys {
        for x in xs.clone() {
            let d = ((x as f64 + 0.5 - centre[0]).powi(2) + (y as f64 + 0.5 - centre[1]).powi(2)).sqrt();
            let c = coverage(d, radius);
            if c > 0.0 {
                blend(img, x, y, color, c);
            }
        }
    }
}

/// Pixel position of a unit-square coordinate; y grows upwards in the drawing.
pub fn to_canvas(p: [f64; 2], canvas: u32) -> [f64; 2] {
    let side = canvas as f64;
    let margin = MARGIN_FRACTION * side;
    let span = side - 2.0 * margin;
    [margin + p[0] * span, margin + (1.0 - p[1]) * span]
}

/// Draws edges, then nodes, on a white square canvas.
pub fn render(g: &Graph, d: &Drawing, style: &StyleParams, canvas: u32) -> Result<RasterImage, RenderError> {
    if canvas < MIN_CANVAS {
        return Err(RenderError::CanvasTooSmall(canvas));
    }
    if d.positions.len() != g.node_count() {
        return Err(RenderError::PositionCount { expected: g.node_count(), found: d.positions.len() });
    }
    let s = style.scaled(canvas);
    let pts: Vec<[f64; 2]> = d.positions.iter().map(|&p| to_canvas(p, canvas)).collect();
    let mut img = RgbImage::from_pixel(canvas, canvas, Rgb(WHITE));
    for (u, v) in g.edges() {
        stroke_segment(&mut img, pts[u], pts[v], s.edge_width, s.edge_color);
    }
    for p in &pts {
        fill_disc(&mut img, *p, s.node_radius, s.node_color);
    }
    Ok(RasterImage { pixels: img, provenance: Provenance { graph_id: d.graph_id.clone(), layout: Some(d.layout), rotation_degrees: 0.0 } })
}

/// Writes the drawing's coordinates as JSON next to an image.
pub fn write_sidecar(d: &Drawing, path: &Path) -> Result<(), RenderError> {
    std::fs::write(path, serde_json::to_string_pretty(d)?)?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<Drawing, RenderError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
