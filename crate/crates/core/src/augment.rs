//! Camera-parameter augmentation, image-space augmentation and camera dropout.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::camera::Intrinsics;
use crate::error::{Error, Result};
use crate::projector::SyntheticImage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraAugConfig {
    pub d_f_range: [f64; 2],
    pub d_up_range: [f64; 2],
    pub epsilon_range: [f64; 2],
    /// Half-width of the uniform relative noise applied to each intrinsic.
    pub intrinsic_noise_sigma: f64,
    /// Draw one parameter set per object instead of one per view.
    pub per_object: bool,
}

impl Default for CameraAugConfig {
    fn default() -> Self {
        Self {
            d_f_range: [1.5, 4.0],
            d_up_range: [0.5, 2.5],
            epsilon_range: [0.02, 0.15],
            intrinsic_noise_sigma: 0.05,
            per_object: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraSample {
    pub d_f: f64,
    pub d_up: f64,
    pub epsilon: f64,
    pub intrinsics: Intrinsics,
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, r: [f64; 2]) -> f64 {
    rng.random_range(r[0]..=r[1])
}

/// Draws placement distances, ROI extension and perturbed intrinsics.
///
/// Draw order is fixed (d_f, d_up, epsilon, then the five intrinsics) so a
/// seed always maps to the same sample.
pub fn sample_camera_params<R: Rng + ?Sized>(rng: &mut R, cfg: &CameraAugConfig, base: Intrinsics) -> CameraSample {
    let d_f = uniform(rng, cfg.d_f_range);
    let d_up = uniform(rng, cfg.d_up_range);
    let epsilon = uniform(rng, cfg.epsilon_range);
    let sigma = cfg.intrinsic_noise_sigma;
    let mut jitter = |v: f64| {
        if sigma > 0.0 {
            v * (1.0 + rng.random_range(-sigma..=sigma))
        } else {
            v
        }
    };
    let gamma_x = jitter(base.gamma_x).max(f64::MIN_POSITIVE);
    let gamma_y = jitter(base.gamma_y).max(f64::MIN_POSITIVE);
    let c_x = jitter(base.c_x);
    let c_y = jitter(base.c_y);
    let zeta = jitter(base.zeta).max(0.0);
    CameraSample {
        d_f,
        d_up,
        epsilon,
        intrinsics: Intrinsics {
            gamma_x,
            gamma_y,
            c_x,
            c_y,
            zeta,
        },
    }
}

/// For each of `views` slots, the index of the view whose content it carries.
///
/// `drop_count` slots chosen uniformly are replaced by a uniformly chosen
/// surviving view; the rest map to themselves.
pub fn dropout_sources<R: Rng + ?Sized>(views: usize, drop_count: usize, rng: &mut R) -> Result<Vec<usize>> {
    if drop_count >= views {
        return Err(Error::DropoutTooLarge {
            drop: drop_count,
            views,
        });
    }
    let mut sources: Vec<usize> = (0..views).collect();
    if drop_count == 0 {
        return Ok(sources);
    }
    let mut dropped = index::sample(rng, views, drop_count).into_vec();
    dropped.sort_unstable();
    let survivors: Vec<usize> = (0..views).filter(|k| dropped.binary_search(k).is_err()).collect();
    for slot in dropped {
        sources[slot] = survivors[rng.random_range(0..survivors.len())];
    }
    Ok(sources)
}

/// Replaces `drop_count` random views with copies of surviving views.
pub fn apply_camera_dropout<T: Clone, R: Rng + ?Sized>(views: &[T], rng: &mut R, drop_count: usize) -> Result<Vec<T>> {
    let sources = dropout_sources(views.len(), drop_count, rng)?;
    Ok(sources.into_iter().map(|k| views[k].clone()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImageAugConfig {
    pub hflip_p: f64,
    pub vflip_p: f64,
    pub jitter_p: f64,
    pub brightness: f64,
    pub contrast: f64,
    pub saturation: f64,
    pub blur_p: f64,
    pub scale_p: f64,
    pub scale_range: [f64; 2],
    pub shift_p: f64,
    /// Maximum shift as a fraction of the image side.
    pub shift_max: f64,
    pub crop_p: f64,
    /// Side of the crop window as a fraction of the image side.
    pub crop_fraction: f64,
}

impl Default for ImageAugConfig {
    fn default() -> Self {
        Self {
            hflip_p: 0.5,
            vflip_p: 0.5,
            jitter_p: 0.5,
            brightness: 0.2,
            contrast: 0.2,
            saturation: 0.2,
            blur_p: 0.2,
            scale_p: 0.3,
            scale_range: [0.8, 1.2],
            shift_p: 0.3,
            shift_max: 0.1,
            crop_p: 0.3,
            crop_fraction: 0.8,
        }
    }
}

impl ImageAugConfig {
    /// Every transform switched off.
    pub fn disabled() -> Self {
        Self {
            hflip_p: 0.0,
            vflip_p: 0.0,
            jitter_p: 0.0,
            blur_p: 0.0,
            scale_p: 0.0,
            shift_p: 0.0,
            crop_p: 0.0,
            ..Self::default()
        }
    }
}

/// Applies the enabled transforms in the order flip-h, flip-v, color
/// jitter, blur, scale, shift, crop-and-resize. Output dimensions always
/// match the input.
pub fn apply_image_aug<R: Rng + ?Sized>(image: &SyntheticImage, rng: &mut R, cfg: &ImageAugConfig) -> SyntheticImage {
    let mut img = image.clone();
    if rng.random_bool(cfg.hflip_p) {
        img = flip_horizontal(&img);
    }
    if rng.random_bool(cfg.vflip_p) {
        img = flip_vertical(&img);
    }
    if rng.random_bool(cfg.jitter_p) {
        let b = 1.0 + rng.random_range(-cfg.brightness..=cfg.brightness);
        let c = 1.0 + rng.random_range(-cfg.contrast..=cfg.contrast);
        let s = 1.0 + rng.random_range(-cfg.saturation..=cfg.saturation);
        color_jitter(&mut img, b, c, s);
    }
    if rng.random_bool(cfg.blur_p) {
        img = box_blur(&img);
    }
    if rng.random_bool(cfg.scale_p) {
        let s = uniform(rng, cfg.scale_range);
        img = scale_about_center(&img, s);
    }
    if rng.random_bool(cfg.shift_p) {
        let max_x = (cfg.shift_max * img.width as f64).round() as i64;
        let max_y = (cfg.shift_max * img.height as f64).round() as i64;
        let dx = rng.random_range(-max_x..=max_x);
        let dy = rng.random_range(-max_y..=max_y);
        img = shift(&img, dx, dy);
    }
    if rng.random_bool(cfg.crop_p) {
        let cw = ((cfg.crop_fraction * img.width as f64).round() as usize).clamp(1, img.width);
        let ch = ((cfg.crop_fraction * img.height as f64).round() as usize).clamp(1, img.height);
        let x0 = rng.random_range(0..=img.width - cw);
        let y0 = rng.random_range(0..=img.height - ch);
        img = crop_resize(&img, x0, y0, cw, ch);
    }
    img
}

/// Builds a same-sized image where each output pixel copies the source pixel
/// returned by `map`, or background when `map` yields `None`.
fn remap(img: &SyntheticImage, map: impl Fn(usize, usize) -> Option<(usize, usize)>) -> SyntheticImage {
    let mut out = SyntheticImage::blank(img.width, img.height, img.background);
    for row in 0..img.height {
        for col in 0..img.width {
            if let Some((sr, sc)) = map(row, col) {
                if img.is_occupied(sr, sc) {
                    out.set(row, col, img.pixel(sr, sc));
                }
            }
        }
    }
    out
}

pub fn flip_horizontal(img: &SyntheticImage) -> SyntheticImage {
    remap(img, |r, c| Some((r, img.width - 1 - c)))
}

pub fn flip_vertical(img: &SyntheticImage) -> SyntheticImage {
    remap(img, |r, c| Some((img.height - 1 - r, c)))
}

fn color_jitter(img: &mut SyntheticImage, brightness: f64, contrast: f64, saturation: f64) {
    let gray = |p: [f64; 3]| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    let occupied: Vec<usize> = (0..img.width * img.height).filter(|&i| img.occupancy[i]).collect();
    if occupied.is_empty() {
        return;
    }
    let bright: Vec<[f64; 3]> = occupied
        .iter()
        .map(|&i| {
            let p = &img.pixels[3 * i..3 * i + 3];
            [0, 1, 2].map(|k| p[k] as f64 * brightness)
        })
        .collect();
    let mean = bright.iter().map(|p| gray(*p)).sum::<f64>() / bright.len() as f64;
    for (&i, p) in occupied.iter().zip(bright) {
        let p = p.map(|x| (x - mean) * contrast + mean);
        let g = gray(p);
        let p = p.map(|x| g + (x - g) * saturation);
        for k in 0..3 {
            img.pixels[3 * i + k] = p[k].round().clamp(0.0, 255.0) as u8;
        }
    }
}

/// 3x3 box filter over in-bounds neighbours. A pixel becomes occupied when
/// any neighbour is.
pub fn box_blur(img: &SyntheticImage) -> SyntheticImage {
    let mut out = SyntheticImage::blank(img.width, img.height, img.background);
    for row in 0..img.height {
        for col in 0..img.width {
            let mut sum = [0u32; 3];
            let mut n = 0u32;
            let mut any = false;
            for r in row.saturating_sub(1)..=(row + 1).min(img.height - 1) {
                for c in col.saturating_sub(1)..=(col + 1).min(img.width - 1) {
                    let p = img.pixel(r, c);
                    for k in 0..3 {
                        sum[k] += p[k] as u32;
                    }
                    n += 1;
                    any |= img.is_occupied(r, c);
                }
            }
            if any {
                out.set(row, col, sum.map(|s| ((s + n / 2) / n) as u8));
            }
        }
    }
    out
}

/// Nearest-neighbour zoom about the image center by `factor`.
pub fn scale_about_center(img: &SyntheticImage, factor: f64) -> SyntheticImage {
    let (w, h) = (img.width as f64, img.height as f64);
    remap(img, |r, c| {
        let sx = ((c as f64 + 0.5 - w / 2.0) / factor + w / 2.0).floor();
        let sy = ((r as f64 + 0.5 - h / 2.0) / factor + h / 2.0).floor();
        (sx >= 0.0 && sy >= 0.0 && sx < w && sy < h).then_some((sy as usize, sx as usize))
    })
}

/// Translates content by (`dx`, `dy`) pixels.
pub fn shift(img: &SyntheticImage, dx: i64, dy: i64) -> SyntheticImage {
    remap(img, |r, c| {
        let sr = r as i64 - dy;
        let sc = c as i64 - dx;
        (sr >= 0 && sc >= 0 && (sr as usize) < img.height && (sc as usize) < img.width)
            .then_some((sr as usize, sc as usize))
    })
}

/// Crops the `cw` x `ch` window at (`x0`, `y0`) and resizes it back to the
/// full image with nearest-neighbour sampling.
pub fn crop_resize(img: &SyntheticImage, x0: usize, y0: usize, cw: usize, ch: usize) -> SyntheticImage {
    remap(img, |r, c| Some((y0 + r * ch / img.height, x0 + c * cw / img.width)))
}
