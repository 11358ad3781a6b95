//! Image preprocessing: from a grayscale photograph to a probability map
//! whose peaks mark likely latent texture-element centers.
//!
//! The pipeline is boundary detection (derivative-of-Gaussian gradient
//! magnitude), thresholding (Otsu or fixed), the exact Euclidean distance
//! transform of the boundary mask, and normalization. Texture elements are
//! regions away from boundaries, so the normalized distance-to-boundary field
//! peaks at element interiors.
//!
//! All transforms are pure and deterministic: identical input bytes produce
//! identical output bytes.

mod edt;
mod pgm;
#[cfg(feature = "png")]
mod png_io;

pub use edt::{distance_transform, distance_transform_squared};
pub use pgm::{load_pgm, save_pgm16, save_pgm8};

use crate::error::{Error, Result};
use crate::geometry::{ObservationWindow, Point2};
use std::path::Path;

/// Row-major grayscale raster.
///
/// Image loaders produce values in `[0, 1]`; intermediate fields (distance
/// transforms) may exceed 1 and are normalized before leaving the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn from_pixels(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width} x {height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "expected {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if let Some(bad) = pixels.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidImage(format!("invalid pixel value {bad}")));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::from_pixels(width, height, vec![0.0; width * height])
    }

    /// Fills pixels from a function of (column, row).
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(col, row));
            }
        }
        Self::from_pixels(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, value: f64) {
        self.pixels[row * self.width + col] = value;
    }

    pub fn max(&self) -> f64 {
        self.pixels
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Binary boundary mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn from_data(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height || width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "mask dimensions {width} x {height} do not match {} entries",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> bool {
        self.data[row * self.width + col]
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count_true(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// Image format selector for [`load_image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Png,
}

/// Loads a grayscale image from disk, mapping 8/16-bit samples linearly onto
/// `[0, 1]`. Color PNG input is converted with luma weights
/// (0.299, 0.587, 0.114); PNG support requires the `png` feature.
pub fn load_image(path: &Path, format: ImageFormat) -> Result<GrayImage> {
    let bytes = std::fs::read(path)?;
    decode_image(&bytes, format)
}

/// Decodes in-memory image bytes; see [`load_image`].
pub fn decode_image(bytes: &[u8], format: ImageFormat) -> Result<GrayImage> {
    match format {
        ImageFormat::Pgm => load_pgm(bytes),
        #[cfg(feature = "png")]
        ImageFormat::Png => png_io::load_png(bytes),
        #[cfg(not(feature = "png"))]
        ImageFormat::Png => Err(Error::UnsupportedImageFormat(
            "png support is not compiled in (enable the `png` feature)".into(),
        )),
    }
}

/// Sniffs the format from magic bytes.
pub fn detect_format(bytes: &[u8]) -> Result<ImageFormat> {
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        Ok(ImageFormat::Pgm)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        Ok(ImageFormat::Png)
    } else {
        Err(Error::UnsupportedImageFormat(
            "unrecognized magic bytes (expected PGM P2/P5 or PNG)".into(),
        ))
    }
}

/// Derivative-of-Gaussian gradient magnitude, rescaled to `[0, 1]` by its
/// maximum.
///
/// Separable convolution with a Gaussian and its derivative, both truncated at
/// `4 sigma` and renormalized; borders are handled by mirror reflection. A
/// constant image yields exact zeros (the derivative kernel has zero sum).
pub fn gradient_magnitude(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    if !sigma.is_finite() || sigma < 0.5 {
        return Err(Error::InvalidImage(format!(
            "sigma must be at least 0.5 px, got {sigma}"
        )));
    }
    let radius = (4.0 * sigma).ceil() as usize;
    let mut smooth = vec![0.0; 2 * radius + 1];
    let mut deriv = vec![0.0; 2 * radius + 1];
    for i in 0..=2 * radius {
        let t = i as f64 - radius as f64;
        let g = (-t * t / (2.0 * sigma * sigma)).exp();
        smooth[i] = g;
        deriv[i] = -t / (sigma * sigma) * g;
    }
    let sum: f64 = smooth.iter().sum();
    smooth.iter_mut().for_each(|v| *v /= sum);
    // normalize the derivative kernel to unit response on a unit ramp
    let ramp: f64 = deriv
        .iter()
        .enumerate()
        .map(|(i, k)| -(i as f64 - radius as f64) * k)
        .sum();
    deriv.iter_mut().for_each(|v| *v /= ramp);

    let gx = convolve_separable(img, &deriv, &smooth, radius);
    let gy = convolve_separable(img, &smooth, &deriv, radius);
    let mut mag: Vec<f64> = gx
        .iter()
        .zip(gy.iter())
        .map(|(a, b)| (a * a + b * b).sqrt())
        .collect();
    let max = mag.iter().copied().fold(0.0f64, f64::max);
    // responses at the accumulation noise floor are rounding residue of a
    // constant image, not signal
    if max > 1e-12 {
        mag.iter_mut().for_each(|v| *v /= max);
    } else {
        mag.iter_mut().for_each(|v| *v = 0.0);
    }
    GrayImage::from_pixels(img.width, img.height, mag)
}

/// Mirror reflection of an out-of-range index (`-1 -> 0`, `n -> n-1`).
#[inline]
fn reflect(idx: i64, len: usize) -> usize {
    let len = len as i64;
    let mut i = idx;
    // at most two folds are needed for kernel radii below the image size
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= len {
            i = 2 * len - 1 - i;
        } else {
            return i as usize;
        }
    }
}

/// Separable convolution: `kx` along rows, then `ky` along columns.
fn convolve_separable(img: &GrayImage, kx: &[f64], ky: &[f64], radius: usize) -> Vec<f64> {
    let (w, h) = (img.width, img.height);
    let mut tmp = vec![0.0; w * h];
    for row in 0..h {
        for col in 0..w {
            let mut acc = 0.0;
            for (k, &kv) in kx.iter().enumerate() {
                let src = reflect(col as i64 + k as i64 - radius as i64, w);
                acc += kv * img.pixels[row * w + src];
            }
            tmp[row * w + col] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for row in 0..h {
        for col in 0..w {
            let mut acc = 0.0;
            for (k, &kv) in ky.iter().enumerate() {
                let src = reflect(row as i64 + k as i64 - radius as i64, h);
                acc += kv * tmp[src * w + col];
            }
            out[row * w + col] = acc;
        }
    }
    out
}

/// Threshold selection strategy for [`threshold_boundaries`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMethod {
    /// 256-bin Otsu threshold (maximum between-class variance).
    Otsu,
    /// Fixed threshold in `(0, 1)`.
    Fixed(f64),
}

/// Otsu's threshold over a 256-bin histogram of `[0, 1]` values.
///
/// Returns the upper edge of the best split bin; ties in the between-class
/// variance are resolved by averaging the tied split positions.
pub fn otsu_threshold(img: &GrayImage) -> Result<f64> {
    const BINS: usize = 256;
    let mut hist = [0u64; BINS];
    for &v in &img.pixels {
        let b = ((v * BINS as f64) as usize).min(BINS - 1);
        hist[b] += 1;
    }
    let total = img.pixels.len() as f64;
    let sum_total: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| i as f64 * c as f64)
        .sum();

    let mut best_var = 0.0f64;
    let mut tied: Vec<usize> = Vec::new();
    let mut w_bg = 0.0;
    let mut sum_bg = 0.0;
    for (t, &count) in hist.iter().enumerate().take(BINS - 1) {
        w_bg += count as f64;
        sum_bg += t as f64 * count as f64;
        let w_fg = total - w_bg;
        if w_bg == 0.0 {
            continue;
        }
        if w_fg == 0.0 {
            break;
        }
        let mean_bg = sum_bg / w_bg;
        let mean_fg = (sum_total - sum_bg) / w_fg;
        let var = w_bg * w_fg * (mean_bg - mean_fg).powi(2);
        let near_tie = (var - best_var).abs() <= 1e-9 * best_var.max(var);
        if near_tie && !tied.is_empty() {
            tied.push(t);
        } else if var > best_var {
            best_var = var;
            tied = vec![t];
        }
    }
    if tied.is_empty() || best_var <= 0.0 {
        return Err(Error::DegenerateHistogram);
    }
    let mid = tied.iter().sum::<usize>() as f64 / tied.len() as f64;
    Ok((mid + 1.0) / BINS as f64)
}

/// Boundary mask: pixels whose value reaches the threshold.
pub fn threshold_boundaries(mag: &GrayImage, method: ThresholdMethod) -> Result<Mask> {
    let threshold = match method {
        ThresholdMethod::Otsu => otsu_threshold(mag)?,
        ThresholdMethod::Fixed(t) => {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidImage(format!(
                    "fixed threshold must lie in (0, 1), got {t}"
                )));
            }
            t
        }
    };
    let data = mag.pixels.iter().map(|&v| v >= threshold).collect();
    Mask::from_data(mag.width, mag.height, data)
}

/// Probability map: scalar field over the window with `max = 1`, plus the
/// affine pixel-to-window mapping.
///
/// Pixels are square in window units; pixel center `(col, row) = (0, 0)` maps
/// just inside the window's top-left corner and rows increase downward while
/// the window's second coordinate increases upward.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    window: ObservationWindow,
    /// Window units per pixel (identical for both axes).
    scale: f64,
}

impl ProbabilityMap {
    pub fn new(
        width: usize,
        height: usize,
        values: Vec<f64>,
        window: ObservationWindow,
    ) -> Result<Self> {
        if values.len() != width * height || width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "map dimensions {width} x {height} do not match {} values",
                values.len()
            )));
        }
        if let Some(bad) = values
            .iter()
            .find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::InvalidImage(format!(
                "probability map value {bad} outside [0, 1]"
            )));
        }
        let sx = window.width() / width as f64;
        let sy = window.height() / height as f64;
        if ((sx - sy) / sx).abs() > 1e-9 {
            return Err(Error::InvalidImage(format!(
                "window does not preserve the pixel aspect ratio: {sx} vs {sy} window units/px"
            )));
        }
        Ok(Self {
            width,
            height,
            values,
            window,
            scale: sx,
        })
    }

    /// Window matching the pixel grid with unit height and area equal to the
    /// aspect ratio, centered on the origin.
    pub fn derived_window(width: usize, height: usize) -> Result<ObservationWindow> {
        let aspect = width as f64 / height as f64;
        ObservationWindow::centered(aspect, 1.0)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn window(&self) -> &ObservationWindow {
        &self.window
    }

    /// Window units per pixel.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Window coordinates of a pixel center.
    pub fn pixel_to_window(&self, col: f64, row: f64) -> Point2 {
        [
            self.window.a1 + (col + 0.5) * self.scale,
            self.window.b2 - (row + 0.5) * self.scale,
        ]
    }

    /// Continuous pixel coordinates of a window point.
    pub fn window_to_pixel(&self, p: Point2) -> (f64, f64) {
        (
            (p[0] - self.window.a1) / self.scale - 0.5,
            (self.window.b2 - p[1]) / self.scale - 0.5,
        )
    }

    /// Bilinear interpolation at continuous pixel coordinates, clamped to the
    /// pixel-center grid at borders.
    pub fn sample_bilinear(&self, col: f64, row: f64) -> f64 {
        let x = col.clamp(0.0, (self.width - 1) as f64);
        let y = row.clamp(0.0, (self.height - 1) as f64);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let v00 = self.get(x0, y0);
        let v10 = self.get(x1, y0);
        let v01 = self.get(x0, y1);
        let v11 = self.get(x1, y1);
        v00 * (1.0 - fx) * (1.0 - fy)
            + v10 * fx * (1.0 - fy)
            + v01 * (1.0 - fx) * fy
            + v11 * fx * fy
    }

    /// 16-bit PGM encoding with `value = round(65535 * Y)`.
    pub fn to_pgm16(&self) -> Vec<u8> {
        let img = GrayImage::from_pixels(self.width, self.height, self.values.clone())
            .expect("map values are valid pixels");
        save_pgm16(&img)
    }

    /// Rebuilds a map from a 16-bit PGM and its window.
    pub fn from_pgm16(bytes: &[u8], window: ObservationWindow) -> Result<Self> {
        let img = load_pgm(bytes)?;
        Self::new(img.width, img.height, img.pixels, window)
    }
}

/// Crops `margin_x`/`margin_y` pixels from the vertical/horizontal sides,
/// normalizes by the post-crop maximum and attaches the window mapping.
///
/// `window = None` derives the area-normalized window matching the post-crop
/// aspect ratio; an explicit window must preserve square pixels.
pub fn to_probability_map(
    dist: &GrayImage,
    window: Option<ObservationWindow>,
    margin_x: usize,
    margin_y: usize,
) -> Result<ProbabilityMap> {
    let (w, h) = (dist.width, dist.height);
    if 2 * margin_x >= w || 2 * margin_y >= h {
        return Err(Error::DegenerateMap(format!(
            "margins ({margin_x}, {margin_y}) leave no pixels of {w} x {h}"
        )));
    }
    let cw = w - 2 * margin_x;
    let ch = h - 2 * margin_y;
    let mut values = Vec::with_capacity(cw * ch);
    for row in margin_y..h - margin_y {
        for col in margin_x..w - margin_x {
            values.push(dist.get(col, row));
        }
    }
    let max = values.iter().copied().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Err(Error::DegenerateMap("post-crop maximum is zero".into()));
    }
    values.iter_mut().for_each(|v| *v /= max);
    // guard against values like 1.0000000000000002 after division
    values.iter_mut().for_each(|v| *v = v.min(1.0));
    let window = match window {
        Some(w) => w,
        None => ProbabilityMap::derived_window(cw, ch)?,
    };
    ProbabilityMap::new(cw, ch, values, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn gray_image_validation() {
        assert!(GrayImage::from_pixels(2, 2, vec![0.0; 4]).is_ok());
        assert!(GrayImage::from_pixels(2, 2, vec![0.0; 3]).is_err());
        assert!(GrayImage::from_pixels(0, 2, vec![]).is_err());
        assert!(GrayImage::from_pixels(1, 1, vec![f64::NAN]).is_err());
        assert!(GrayImage::from_pixels(1, 1, vec![-0.1]).is_err());
    }

    #[test]
    fn gradient_of_constant_image_is_zero() {
        let img = GrayImage::from_fn(32, 24, |_, _| 0.7).unwrap();
        let mag = gradient_magnitude(&img, 1.5).unwrap();
        assert!(mag.pixels().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_rejects_tiny_sigma() {
        let img = GrayImage::zeros(8, 8).unwrap();
        assert!(gradient_magnitude(&img, 0.4).is_err());
    }

    #[test]
    fn gradient_peaks_on_step_edge_and_is_symmetric() {
        let w = 64;
        let edge = 32;
        let img = GrayImage::from_fn(w, 32, |col, _| if col < edge { 0.0 } else { 1.0 }).unwrap();
        let mag = gradient_magnitude(&img, 1.5).unwrap();
        let row = 16;
        // response is maximal at the two columns straddling the edge
        let peak: f64 = mag.get(edge - 1, row).max(mag.get(edge, row));
        assert!((peak - 1.0).abs() < 1e-12);
        for col in 0..w {
            assert!(mag.get(col, row) <= peak + 1e-12);
        }
        // symmetry about the edge
        for k in 0..10 {
            let a = mag.get(edge - 1 - k, row);
            let b = mag.get(edge + k, row);
            assert!((a - b).abs() < 1e-9, "asymmetry at offset {k}: {a} vs {b}");
        }
    }

    #[test]
    fn gradient_peak_localizes_disk_boundary() {
        // rasterized disk oracle: the response ridge lies within one pixel of
        // the analytic circle
        let (w, h) = (96, 96);
        let (cx, cy, r) = (47.5, 47.5, 30.0);
        let img = GrayImage::from_fn(w, h, |col, row| {
            let d = ((col as f64 - cx).powi(2) + (row as f64 - cy).powi(2)).sqrt();
            if d <= r {
                0.1
            } else {
                0.9
            }
        })
        .unwrap();
        let mag = gradient_magnitude(&img, 1.5).unwrap();
        // scan along the central row: the peak column must be within 1 px of
        // the circle crossing
        let row = 48;
        let mut best = (0usize, 0.0);
        for col in 0..w / 2 {
            let v = mag.get(col, row);
            if v > best.1 {
                best = (col, v);
            }
        }
        let y = row as f64 - cy;
        let crossing = cx - (r * r - y * y).sqrt();
        assert!(
            (best.0 as f64 - crossing).abs() <= 1.0,
            "peak at {} vs crossing {crossing}",
            best.0
        );
    }

    #[test]
    fn otsu_separates_bimodal_histogram() {
        let mut pixels = vec![0.2; 60];
        pixels.extend(vec![0.8; 40]);
        let img = GrayImage::from_pixels(10, 10, pixels).unwrap();
        let t = otsu_threshold(&img).unwrap();
        assert!(t > 0.2 && t < 0.8, "threshold {t} not between the modes");
        let mask = threshold_boundaries(&img, ThresholdMethod::Otsu).unwrap();
        assert_eq!(mask.count_true(), 40);
    }

    #[test]
    fn otsu_rejects_constant_image() {
        let img = GrayImage::from_fn(8, 8, |_, _| 0.5).unwrap();
        assert!(matches!(
            otsu_threshold(&img),
            Err(Error::DegenerateHistogram)
        ));
    }

    #[test]
    fn fixed_threshold_mask() {
        let img = GrayImage::from_pixels(2, 1, vec![0.2, 0.7]).unwrap();
        let mask = threshold_boundaries(&img, ThresholdMethod::Fixed(0.5)).unwrap();
        assert_eq!(mask.data(), &[false, true]);
        assert!(threshold_boundaries(&img, ThresholdMethod::Fixed(0.0)).is_err());
        assert!(threshold_boundaries(&img, ThresholdMethod::Fixed(1.0)).is_err());
    }

    #[test]
    fn disk_edge_mask_is_thin_annulus() {
        let (w, h) = (96, 96);
        let (cx, cy, r) = (47.5, 47.5, 30.0);
        let img = GrayImage::from_fn(w, h, |col, row| {
            let d = ((col as f64 - cx).powi(2) + (row as f64 - cy).powi(2)).sqrt();
            if d <= r {
                0.1
            } else {
                0.9
            }
        })
        .unwrap();
        let mag = gradient_magnitude(&img, 1.5).unwrap();
        let mask = threshold_boundaries(&mag, ThresholdMethod::Otsu).unwrap();
        assert!(mask.count_true() > 0);
        for row in 0..h {
            for col in 0..w {
                if mask.get(col, row) {
                    let d = ((col as f64 - cx).powi(2) + (row as f64 - cy).powi(2)).sqrt();
                    assert!(
                        (d - r).abs() <= 2.5,
                        "mask pixel ({col}, {row}) is {d} px from center, circle at {r}"
                    );
                }
            }
        }
    }

    #[test]
    fn probability_map_normalizes_and_preserves_ratios() {
        let dist = GrayImage::from_fn(12, 10, |col, row| (col + row) as f64 * 0.5).unwrap();
        let map = to_probability_map(&dist, None, 1, 1).unwrap();
        assert_eq!(map.width(), 10);
        assert_eq!(map.height(), 8);
        let max = map.values().iter().copied().fold(0.0f64, f64::max);
        assert_eq!(max, 1.0);
        // interior ratios survive the normalization
        let a = dist.get(3, 4);
        let b = dist.get(7, 5);
        let ma = map.get(2, 3);
        let mb = map.get(6, 4);
        assert!((a / b - ma / mb).abs() < 1e-12);
    }

    #[test]
    fn probability_map_margins_match_published_crop() {
        let dist =
            GrayImage::from_fn(1280, 960, |col, row| ((col * 31 + row * 17) % 97) as f64).unwrap();
        let map = to_probability_map(&dist, None, 107, 57).unwrap();
        assert_eq!((map.width(), map.height()), (1066, 846));
    }

    #[test]
    fn probability_map_rejects_degenerate_inputs() {
        let zeros = GrayImage::zeros(8, 8).unwrap();
        assert!(to_probability_map(&zeros, None, 0, 0).is_err());
        let img = GrayImage::from_fn(8, 8, |c, _| c as f64).unwrap();
        assert!(to_probability_map(&img, None, 4, 0).is_err());
        // aspect-violating window
        let bad = ObservationWindow::new(-1.0, 1.0, -0.5, 0.5).unwrap();
        assert!(to_probability_map(&img, Some(bad), 0, 0).is_err());
    }

    #[test]
    fn pixel_window_mapping_roundtrip() {
        let dist = GrayImage::from_fn(40, 30, |c, r| (c + r) as f64 + 1.0).unwrap();
        let map = to_probability_map(&dist, None, 0, 0).unwrap();
        // top-left pixel center lands just inside the top-left corner
        let tl = map.pixel_to_window(0.0, 0.0);
        assert!(tl[0] > map.window().a1 && tl[0] < map.window().a1 + map.scale());
        assert!(tl[1] < map.window().b2 && tl[1] > map.window().b2 - map.scale());
        let mut rng = Rng::seed_from(3);
        for _ in 0..50 {
            let col = rng.next_f64() * 39.0;
            let row = rng.next_f64() * 29.0;
            let p = map.pixel_to_window(col, row);
            let (c2, r2) = map.window_to_pixel(p);
            assert!((c2 - col).abs() < 1e-12 && (r2 - row).abs() < 1e-12);
        }
    }

    #[test]
    fn bilinear_sampling_interpolates() {
        let img = GrayImage::from_fn(4, 4, |c, r| (c + 2 * r) as f64 / 16.0).unwrap();
        let map = ProbabilityMap::new(
            4,
            4,
            img.pixels().to_vec(),
            ProbabilityMap::derived_window(4, 4).unwrap(),
        )
        .unwrap();
        // halfway between (1,1)=3/16 and (2,1)=4/16
        let v = map.sample_bilinear(1.5, 1.0);
        assert!((v - 3.5 / 16.0).abs() < 1e-12);
        // clamped outside
        assert_eq!(map.sample_bilinear(-5.0, 0.0), map.get(0, 0));
    }

    #[test]
    fn format_detection() {
        assert_eq!(detect_format(b"P5 1 1 255 \x00").unwrap(), ImageFormat::Pgm);
        assert_eq!(detect_format(b"P2 1 1 255 0").unwrap(), ImageFormat::Pgm);
        assert_eq!(
            detect_format(&[0x89, b'P', b'N', b'G', 0x0d, 0x0a]).unwrap(),
            ImageFormat::Png
        );
        assert!(detect_format(b"GIF89a").is_err());
    }
}
