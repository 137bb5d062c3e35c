//! Rotation alignment of a target drawing to a query by maximizing the area under
//! the IoU-versus-dilation curve, plus cropping for model input.

use image::imageops::{self, FilterType};
use image::{Rgb, RgbImage};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::raster::{Provenance, RasterImage, WHITE};
use crate::RenderError;

/// Luminance distance from white, in 0..=255 units, above which a pixel is foreground.
pub const FOREGROUND_THRESHOLD: f64 = 10.0;
pub const ROTATION_STEP: u32 = 10;
pub const MODEL_MAX_SIDE: u32 = 512;
pub const CROP_MARGIN_FRACTION: f64 = 0.02;

/// Dilation radii in pixels at a 1024 canvas: 0, 2, ..., 20.
pub fn default_radii() -> Vec<u32> {
    (0..=20).step_by(2).collect()
}

/// Radii rescaled for a canvas other than 1024.
pub fn radii_for_canvas(canvas: u32) -> Vec<u32> {
    let mut radii: Vec<u32> = default_radii().into_iter().map(|r| (r as f64 * canvas as f64 / 1024.0).round() as u32).collect();
    radii.dedup();
    radii
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Mask { width, height, bits: vec![false; width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn area(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| (i % self.width, i / self.width))
    }

    pub fn centroid(&self) -> Option<[f64; 2]> {
        let (mut sx, mut sy, mut k) = (0.0, 0.0, 0usize);
        for (x, y) in self.foreground() {
            sx += x as f64;
            sy += y as f64;
            k += 1;
        }
        (k > 0).then(|| [sx / k as f64, sy / k as f64])
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)` of the foreground.
    pub fn bbox(&self) -> Option<(usize, usize, usize, usize)> {
        self.foreground().fold(None, |acc, (x, y)| {
            Some(match acc {
                None => (x, y, x, y),
                Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
            })
        })
    }
}

fn luminance(p: &Rgb<u8>) -> f64 {
    0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64
}

pub fn binarize(img: &RgbImage) -> Mask {
    Mask {
        width: img.width() as usize,
        height: img.height() as usize,
        bits: img.pixels().map(|p| 255.0 - luminance(p) > FOREGROUND_THRESHOLD).collect(),
    }
}

/// One-dimensional squared distance transform (lower envelope of parabolas).
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        if f[q].is_infinite() {
            continue;
        }
        if f[v[k]].is_infinite() {
            v[k] = q;
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    let mut k = 0usize;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = if f[p].is_infinite() { f64::INFINITY } else { d * d + f[p] };
    }
}

/// Squared Euclidean distance from every pixel to the nearest foreground pixel.
pub fn squared_distance_transform(mask: &Mask) -> Vec<f64> {
    let (w, h) = (mask.width, mask.height);
    // Vertical pass: distance to the nearest foreground pixel in the same column,
    // by a downward and an upward scan over whole rows.
    let mut grid = vec![f64::INFINITY; w * h];
    let mut run = vec![f64::INFINITY; w];
    for y in 0..h {
        let row = &mask.bits[y * w..(y + 1) * w];
        for ((r, &b), out) in run.iter_mut().zip(row).zip(&mut grid[y * w..(y + 1) * w]) {
            *r = if b { 0.0 } else { *r + 1.0 };
            *out = *r;
        }
    }
    run.fill(f64::INFINITY);
    for y in (0..h).rev() {
        let row = &mask.bits[y * w..(y + 1) * w];
        for ((r, &b), out) in run.iter_mut().zip(row).zip(&mut grid[y * w..(y + 1) * w]) {
            *r = if b { 0.0 } else { *r + 1.0 };
            *out = out.min(*r);
        }
    }
    grid.iter_mut().for_each(|g| *g *= *g);
    let (mut out, mut v, mut z) = (vec![0.0; w], vec![0usize; w], vec![0.0; w + 1]);
    for row in grid.chunks_mut(w) {
        edt_1d(row, &mut out, &mut v, &mut z);
        row.copy_from_slice(&out);
    }
    grid
}

/// Foreground pixels of `m` shifted by `offset` into a frame of the given size.
fn place(m: &Mask, offset: [i64; 2], width: usize, height: usize) -> Mask {
    let mut out = Mask::new(width, height);
    for (x, y) in m.foreground() {
        out.set((x as i64 + offset[0]) as usize, (y as i64 + offset[1]) as usize, true);
    }
    out
}

fn checked_radii(radii: &[u32]) -> Result<Vec<u32>, RenderError> {
    let mut r = radii.to_vec();
    r.sort_unstable();
    r.dedup();
    if r.is_empty() {
        return Err(RenderError::NoRadii);
    }
    Ok(r)
}

/// For every pixel of a mask's bounding box padded by the largest radius, the index
/// of the smallest radius whose dilation covers it (`radii.len()` if none does).
struct DilationField {
    origin: [i64; 2],
    width: usize,
    height: usize,
    level: Vec<u16>,
    /// Dilated area per radius.
    areas: Vec<u64>,
    centroid: [f64; 2],
}

impl DilationField {
    fn new(m: &Mask, radii: &[u32]) -> Result<Self, RenderError> {
        let centroid = m.centroid().ok_or(RenderError::EmptyMask)?;
        let (x0, y0, x1, y1) = m.bbox().expect("nonempty");
        let rmax = *radii.last().expect("checked radii") as usize;
        let pad = rmax + 1;
        let origin = [x0 as i64 - pad as i64, y0 as i64 - pad as i64];
        let (width, height) = (x1 - x0 + 1 + 2 * pad, y1 - y0 + 1 + 2 * pad);
        let frame = place(m, [-origin[0], -origin[1]], width, height);
        let lookup: Vec<u16> =
            (0..=rmax * rmax).map(|s| radii.iter().position(|&r| (r as usize).pow(2) >= s).expect("s <= rmax^2") as u16).collect();
        let never = radii.len() as u16;
        let level: Vec<u16> = squared_distance_transform(&frame)
            .into_iter()
            .map(|d| if d <= (rmax * rmax) as f64 { lookup[d as usize] } else { never })
            .collect();
        let mut areas = vec![0u64; radii.len() + 1];
        for &l in &level {
            areas[l as usize] += 1;
        }
        for i in 1..areas.len() {
            areas[i] += areas[i - 1];
        }
        areas.pop();
        Ok(DilationField { origin, width, height, level, areas, centroid })
    }

    /// Mean IoU over radii with `other` translated onto this field's centroid.
    fn auc(&self, other: &DilationField) -> f64 {
        let shift = [(self.centroid[0] - other.centroid[0]).round() as i64, (self.centroid[1] - other.centroid[1]).round() as i64];
        let bo = [other.origin[0] + shift[0], other.origin[1] + shift[1]];
        let x_lo = self.origin[0].max(bo[0]);
        let x_hi = (self.origin[0] + self.width as i64).min(bo[0] + other.width as i64);
        let y_lo = self.origin[1].max(bo[1]);
        let y_hi = (self.origin[1] + self.height as i64).min(bo[1] + other.height as i64);
        let n = self.areas.len();
        let mut inter = vec![0u64; n + 1];
        for y in y_lo..y_hi {
            let ra = (y - self.origin[1]) as usize * self.width;
            let rb = (y - bo[1]) as usize * other.width;
            for x in x_lo..x_hi {
                let la = self.level[ra + (x - self.origin[0]) as usize];
                let lb = other.level[rb + (x - bo[0]) as usize];
                inter[la.max(lb) as usize] += 1;
            }
        }
        let mut common = 0u64;
        let mut total = 0.0;
        for ((&hits, &area_a), &area_b) in inter.iter().zip(&self.areas).zip(&other.areas) {
            common += hits;
            total += common as f64 / (area_a + area_b - common) as f64;
        }
        total / n as f64
    }
}

/// Mean IoU of the two masks over the dilation radii after translating `b` so the
/// centroids coincide (rounded to whole pixels).
pub fn iou_auc(a: &Mask, b: &Mask, radii: &[u32]) -> Result<f64, RenderError> {
    let radii = checked_radii(radii)?;
    Ok(DilationField::new(a, &radii)?.auc(&DilationField::new(b, &radii)?))
}

fn snapped_trig(degrees: f64) -> (f64, f64) {
    let quarter = degrees / 90.0;
    if quarter.fract() == 0.0 {
        match (quarter as i64).rem_euclid(4) {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    } else {
        let r = degrees.to_radians();
        (r.cos(), r.sin())
    }
}

/// Geometry of a rotation about the image centre onto an enlarged canvas.
struct Rotation {
    cos: f64,
    sin: f64,
    centre: [f64; 2],
    new_centre: [f64; 2],
    width: u32,
    height: u32,
}

impl Rotation {
    fn new(width: u32, height: u32, degrees: f64) -> Self {
        let (cos, sin) = snapped_trig(degrees);
        let (w, h) = (width as f64, height as f64);
        let nw = (w * cos.abs() + h * sin.abs() - 1e-9).ceil().max(1.0) as u32;
        let nh = (w * sin.abs() + h * cos.abs() - 1e-9).ceil().max(1.0) as u32;
        Rotation { cos, sin, centre: [w / 2.0, h / 2.0], new_centre: [nw as f64 / 2.0, nh as f64 / 2.0], width: nw, height: nh }
    }

    /// Continuous source coordinate (pixel-index units) sampled by output pixel (x, y).
    fn source(&self, x: u32, y: u32) -> [f64; 2] {
        let dx = x as f64 + 0.5 - self.new_centre[0];
        let dy = y as f64 + 0.5 - self.new_centre[1];
        [self.centre[0] + dx * self.cos - dy * self.sin - 0.5, self.centre[1] + dx * self.sin + dy * self.cos - 0.5]
    }

    /// Output pixel position of source pixel (x, y).
    fn forward(&self, x: f64, y: f64) -> [f64; 2] {
        let dx = x + 0.5 - self.centre[0];
        let dy = y + 0.5 - self.centre[1];
        [self.new_centre[0] + dx * self.cos + dy * self.sin - 0.5, self.new_centre[1] - dx * self.sin + dy * self.cos - 0.5]
    }
}

/// Bilinear sample of a `width x height` plane where outside pixels read as `fill`.
fn bilinear(at: [f64; 2], width: u32, height: u32, fill: f64, read: impl Fn(u32, u32) -> f64) -> f64 {
    let (x0, y0) = (at[0].floor(), at[1].floor());
    let (fx, fy) = (at[0] - x0, at[1] - y0);
    let (x0, y0) = (x0 as i64, y0 as i64);
    let get = |x: i64, y: i64| {
        if x < 0 || y < 0 || x >= width as i64 || y >= height as i64 {
            fill
        } else {
            read(x as u32, y as u32)
        }
    };
    let top = get(x0, y0) * (1.0 - fx) + get(x0 + 1, y0) * fx;
    let bottom = get(x0, y0 + 1) * (1.0 - fx) + get(x0 + 1, y0 + 1) * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Rotates counterclockwise (as displayed) by `degrees` about the image centre,
/// enlarging the canvas to hold the result; uncovered pixels are white.
pub fn rotate_image(img: &RasterImage, degrees: f64) -> RasterImage {
    let rot = Rotation::new(img.width(), img.height(), degrees);
    let src = &img.pixels;
    let mut out = RgbImage::from_pixel(rot.width, rot.height, Rgb(WHITE));
    for (x, y, px) in out.enumerate_pixels_mut() {
        let at = rot.source(x, y);
        for ch in 0..3 {
            let v = bilinear(at, src.width(), src.height(), WHITE[ch] as f64, |sx, sy| src.get_pixel(sx, sy)[ch] as f64);
            px[ch] = v.round() as u8;
        }
    }
    RasterImage {
        pixels: out,
        provenance: Provenance { rotation_degrees: img.provenance.rotation_degrees + degrees, ..img.provenance.clone() },
    }
}

/// Darkness (255 minus luminance) of an image, bordered by one white pixel so
/// bilinear reads near the edge need no bounds checks.
struct InkPlane {
    width: u32,
    height: u32,
    stride: usize,
    ink: Vec<f32>,
    /// Inclusive foreground bounding box.
    bbox: (usize, usize, usize, usize),
}

impl InkPlane {
    fn new(img: &RgbImage) -> Result<Self, RenderError> {
        let bbox = binarize(img).bbox().ok_or(RenderError::EmptyMask)?;
        let (w, h) = (img.width() as usize, img.height() as usize);
        let stride = w + 2;
        let mut ink = vec![0.0f32; stride * (h + 2)];
        for (x, y, p) in img.enumerate_pixels() {
            ink[(y as usize + 1) * stride + x as usize + 1] = (255.0 - luminance(p)) as f32;
        }
        Ok(InkPlane { width: img.width(), height: img.height(), stride, ink, bbox })
    }

    /// Foreground mask of the image rotated by `degrees`; only the rotated
    /// foreground box (plus the bilinear spread) is resampled.
    fn rotated_mask(&self, degrees: f64) -> Mask {
        let rot = Rotation::new(self.width, self.height, degrees);
        let mut mask = Mask::new(rot.width as usize, rot.height as usize);
        let (x0, y0, x1, y1) = self.bbox;
        let corners = [(x0, y0), (x1, y0), (x0, y1), (x1, y1)].map(|(x, y)| rot.forward(x as f64, y as f64));
        let lo = |a: usize| corners.iter().map(|c| c[a]).fold(f64::INFINITY, f64::min).floor() - 2.0;
        let hi = |a: usize| corners.iter().map(|c| c[a]).fold(f64::NEG_INFINITY, f64::max).ceil() + 2.0;
        let xs = lo(0).max(0.0) as u32..(hi(0) + 1.0).clamp(0.0, rot.width as f64) as u32;
        let ys = lo(1).max(0.0) as u32..(hi(1) + 1.0).clamp(0.0, rot.height as f64) as u32;
        let (w, h) = (self.width as f64, self.height as f64);
        let threshold = FOREGROUND_THRESHOLD as f32;
        for y in ys {
            for x in xs.clone() {
                let [sx, sy] = rot.source(x, y);
                if sx < -1.0 || sy < -1.0 || sx >= w || sy >= h {
                    continue;
                }
                let (fx0, fy0) = (sx.floor(), sy.floor());
                let (fx, fy) = ((sx - fx0) as f32, (sy - fy0) as f32);
                let i = (fy0 as isize + 1) as usize * self.stride + (fx0 as isize + 1) as usize;
                let top = self.ink[i] * (1.0 - fx) + self.ink[i + 1] * fx;
                let bottom = self.ink[i + self.stride] * (1.0 - fx) + self.ink[i + self.stride + 1] * fx;
                if top * (1.0 - fy) + bottom * fy > threshold {
                    mask.set(x as usize, y as usize, true);
                }
            }
        }
        mask
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    /// Rotation the target appears to carry; undo it by rotating by the negative.
    pub rotation_degrees: u32,
    pub auc: f64,
}

/// Scores all 36 grid rotations of the target against the query; ties go to the
/// smallest angle.
pub fn best_rotation(query: &RasterImage, target: &RasterImage, radii: &[u32]) -> Result<AlignmentResult, RenderError> {
    let radii = checked_radii(radii)?;
    let field = DilationField::new(&binarize(&query.pixels), &radii)?;
    let plane = InkPlane::new(&target.pixels)?;
    let scores: Vec<Result<f64, RenderError>> = (0..360 / ROTATION_STEP)
        .into_par_iter()
        .map(|i| {
            let undone = plane.rotated_mask(-((i * ROTATION_STEP) as f64));
            Ok(field.auc(&DilationField::new(&undone, &radii)?))
        })
        .collect();
    let mut best = AlignmentResult { rotation_degrees: 0, auc: f64::NEG_INFINITY };
    for (i, s) in scores.into_iter().enumerate() {
        let auc = s?;
        if auc > best.auc {
            best = AlignmentResult { rotation_degrees: i as u32 * ROTATION_STEP, auc };
        }
    }
    Ok(best)
}

/// Applies the inverse of the chosen rotation to the target image.
pub fn apply_alignment(target: &RasterImage, result: &AlignmentResult) -> RasterImage {
    if result.rotation_degrees == 0 {
        target.clone()
    } else {
        rotate_image(target, -(result.rotation_degrees as f64))
    }
}

/// Crops to the foreground plus a 2% margin, pads to a white square and
/// downscales so the side is at most [`MODEL_MAX_SIDE`].
pub fn preprocess_for_model(img: &RasterImage) -> Result<RasterImage, RenderError> {
    let mask = binarize(&img.pixels);
    let (x0, y0, x1, y1) = mask.bbox().ok_or(RenderError::EmptyMask)?;
    let longer = (x1 - x0 + 1).max(y1 - y0 + 1);
    let margin = (CROP_MARGIN_FRACTION * longer as f64).ceil() as usize;
    let x0 = x0.saturating_sub(margin);
    let y0 = y0.saturating_sub(margin);
    let x1 = (x1 + margin).min(mask.width - 1);
    let y1 = (y1 + margin).min(mask.height - 1);
    let (cw, ch) = ((x1 - x0 + 1) as u32, (y1 - y0 + 1) as u32);
    let cropped = imageops::crop_imm(&img.pixels, x0 as u32, y0 as u32, cw, ch).to_image();
    let side = cw.max(ch);
    let mut square = RgbImage::from_pixel(side, side, Rgb(WHITE));
    imageops::replace(&mut square, &cropped, ((side - cw) / 2) as i64, ((side - ch) / 2) as i64);
    let pixels =
        if side > MODEL_MAX_SIDE { imageops::resize(&square, MODEL_MAX_SIDE, MODEL_MAX_SIDE, FilterType::Triangle) } else { square };
    Ok(RasterImage { pixels, provenance: img.provenance.clone() })
}
