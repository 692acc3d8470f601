//! Render configuration, its config-file form, and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::augment::{CameraAugConfig, ImageAugConfig};
use crate::camera::cocoon_angles;
use crate::error::{Error, Result};

/// Which points are rasterized into a view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// Only the proposal's own points.
    Object,
    /// Every scene point whose projection falls inside the object's extended ROI.
    #[default]
    Scene,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub camera: Option<CameraAugConfig>,
    pub image: Option<ImageAugConfig>,
    /// Views replaced by duplicates of surviving views, per object.
    pub camera_dropout: usize,
}

impl AugmentConfig {
    /// Camera and image augmentation with their default ranges.
    pub fn enabled() -> Self {
        Self {
            camera: Some(CameraAugConfig::default()),
            image: Some(ImageAugConfig::default()),
            camera_dropout: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub views: usize,
    /// Angular step of the camera fan, degrees.
    pub theta_step: f64,
    /// Explicit view angles in degrees; overrides the `theta_step` fan.
    pub angles: Option<Vec<f64>>,
    pub image_size: u32,
    pub d_f: f64,
    pub d_up: f64,
    pub epsilon: f64,
    pub source: Source,
    pub background: [u8; 3],
    pub seed: u64,
    /// Worker threads for batch rendering; 0 uses every available core.
    pub workers: usize,
    #[serde(skip)]
    pub augment: Option<AugmentConfig>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            views: 5,
            theta_step: 30.0,
            angles: None,
            image_size: 32,
            d_f: 2.0,
            d_up: 1.0,
            epsilon: 0.02,
            source: Source::Scene,
            background: [0, 0, 0],
            seed: 0,
            workers: 0,
            augment: None,
        }
    }
}

impl RenderConfig {
    pub fn view_angles(&self) -> Vec<f64> {
        match &self.angles {
            Some(a) => a.clone(),
            None => cocoon_angles(self.views, self.theta_step),
        }
    }

    /// Reads a `[render]` / `[augment.camera]` / `[augment.image]` TOML file.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self {
            augment: file.augment,
            ..file.render
        })
    }

    pub fn to_toml(&self) -> String {
        let file = ConfigFile {
            render: self.clone(),
            augment: self.augment.clone(),
        };
        toml::to_string(&file).expect("config is always representable as TOML")
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    render: RenderConfig,
    augment: Option<AugmentConfig>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    /// Converts to an error listing every problem, if there is any.
    pub fn into_result(self) -> Result<Vec<String>> {
        if self.is_ok() {
            Ok(self.warnings)
        } else {
            Err(Error::Config(self.errors.join("; ")))
        }
    }
}

fn check_range(d: &mut Diagnostics, name: &str, r: [f64; 2], min_allowed: f64, strict: bool) {
    if !(r[0].is_finite() && r[1].is_finite()) {
        d.error(format!("{name} must be finite, got {r:?}"));
    } else if r[0] > r[1] {
        d.error(format!("{name} is inverted: [{}, {}]; put the lower bound first", r[0], r[1]));
    } else if (strict && r[0] <= min_allowed) || r[0] < min_allowed {
        let op = if strict { ">" } else { ">=" };
        d.error(format!("{name} lower bound must be {op} {min_allowed}, got {}", r[0]));
    }
}

fn check_prob(d: &mut Diagnostics, name: &str, p: f64) {
    if !(0.0..=1.0).contains(&p) {
        d.error(format!("augment.image.{name} must be a probability in [0, 1], got {p}"));
    }
}

pub fn validate_config(cfg: &RenderConfig) -> Diagnostics {
    let mut d = Diagnostics::default();
    if cfg.views == 0 {
        d.error("views must be at least 1");
    }
    if cfg.image_size < 8 {
        d.error(format!("image_size must be at least 8 pixels, got {}", cfg.image_size));
    }
    if !cfg.theta_step.is_finite() {
        d.error("theta_step must be finite");
    }
    if let Some(angles) = &cfg.angles {
        if angles.len() != cfg.views {
            d.error(format!("{} explicit angles given for {} views", angles.len(), cfg.views));
        }
    }
    if cfg.theta_step.is_finite() && cfg.view_angles().iter().any(|a| !(-180.0..=180.0).contains(a)) {
        d.error("view angles must lie in [-180, 180] degrees; reduce views or theta_step");
    }
    if !(cfg.d_f.is_finite() && cfg.d_f > 0.0) {
        d.error(format!("d_f must be a positive distance in meters, got {}", cfg.d_f));
    }
    if !(cfg.d_up.is_finite() && cfg.d_up >= 0.0) {
        d.error(format!("d_up must be >= 0 meters, got {}", cfg.d_up));
    }
    if !(cfg.epsilon.is_finite() && cfg.epsilon >= 0.0) {
        d.error(format!("epsilon must be a non-negative fraction, got {}", cfg.epsilon));
    }

    let Some(aug) = &cfg.augment else { return d };
    if let Some(cam) = &aug.camera {
        check_range(&mut d, "augment.camera.d_f_range", cam.d_f_range, 0.0, true);
        check_range(&mut d, "augment.camera.d_up_range", cam.d_up_range, 0.0, false);
        check_range(&mut d, "augment.camera.epsilon_range", cam.epsilon_range, 0.0, false);
        if !(0.0..1.0).contains(&cam.intrinsic_noise_sigma) {
            d.error(format!(
                "augment.camera.intrinsic_noise_sigma must be in [0, 1), got {}",
                cam.intrinsic_noise_sigma
            ));
        }
        let outside = |r: [f64; 2], v: f64| v < r[0] || v > r[1];
        if outside(cam.d_f_range, cfg.d_f) {
            d.warn(format!("augment.camera.d_f_range {:?} excludes the default d_f = {}", cam.d_f_range, cfg.d_f));
        }
        if outside(cam.d_up_range, cfg.d_up) {
            d.warn(format!(
                "augment.camera.d_up_range {:?} excludes the default d_up = {}",
                cam.d_up_range, cfg.d_up
            ));
        }
        if outside(cam.epsilon_range, cfg.epsilon) {
            d.warn(format!(
                "augment.camera.epsilon_range {:?} excludes the default epsilon = {}",
                cam.epsilon_range, cfg.epsilon
            ));
        }
    }
    if let Some(img) = &aug.image {
        check_prob(&mut d, "hflip_p", img.hflip_p);
        check_prob(&mut d, "vflip_p", img.vflip_p);
        check_prob(&mut d, "jitter_p", img.jitter_p);
        check_prob(&mut d, "blur_p", img.blur_p);
        check_prob(&mut d, "scale_p", img.scale_p);
        check_prob(&mut d, "shift_p", img.shift_p);
        check_prob(&mut d, "crop_p", img.crop_p);
        for (name, m) in [
            ("brightness", img.brightness),
            ("contrast", img.contrast),
            ("saturation", img.saturation),
        ] {
            if !(0.0..=1.0).contains(&m) {
                d.error(format!("augment.image.{name} must be in [0, 1], got {m}"));
            }
        }
        check_range(&mut d, "augment.image.scale_range", img.scale_range, 0.0, true);
        if !(0.0..1.0).contains(&img.shift_max) {
            d.error(format!("augment.image.shift_max must be in [0, 1), got {}", img.shift_max));
        }
        if !(img.crop_fraction > 0.0 && img.crop_fraction <= 1.0) {
            d.error(format!("augment.image.crop_fraction must be in (0, 1], got {}", img.crop_fraction));
        }
    }
    if cfg.views > 0 && aug.camera_dropout >= cfg.views {
        d.error(format!(
            "augment.camera_dropout = {} must be smaller than views = {}",
            aug.camera_dropout, cfg.views
        ));
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let d = validate_config(&RenderConfig::default());
        assert!(d.is_ok(), "{d:?}");
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn default_augmentation_is_valid_without_warnings() {
        let cfg = RenderConfig {
            augment: Some(AugmentConfig::enabled()),
            ..Default::default()
        };
        let d = validate_config(&cfg);
        assert!(d.is_ok() && d.warnings.is_empty(), "{d:?}");
    }

    #[test]
    fn negative_epsilon_rejected() {
        let cfg = RenderConfig {
            epsilon: -0.1,
            ..Default::default()
        };
        let d = validate_config(&cfg);
        assert!(!d.is_ok());
        assert!(d.errors[0].contains("epsilon"));
    }

    #[test]
    fn inverted_range_rejected() {
        let mut aug = AugmentConfig::enabled();
        aug.camera.as_mut().unwrap().d_f_range = [4.0, 1.5];
        let cfg = RenderConfig {
            augment: Some(aug),
            ..Default::default()
        };
        let d = validate_config(&cfg);
        assert!(d.errors.iter().any(|e| e.contains("d_f_range") && e.contains("inverted")), "{d:?}");
    }

    #[test]
    fn range_excluding_default_warns() {
        let mut aug = AugmentConfig::enabled();
        aug.camera.as_mut().unwrap().d_up_range = [1.5, 2.5];
        let cfg = RenderConfig {
            augment: Some(aug),
            ..Default::default()
        };
        let d = validate_config(&cfg);
        assert!(d.is_ok());
        assert_eq!(d.warnings.len(), 1);
    }

    #[test]
    fn misc_rejections() {
        for cfg in [
            RenderConfig { views: 0, ..Default::default() },
            RenderConfig { image_size: 4, ..Default::default() },
            RenderConfig { d_f: 0.0, ..Default::default() },
            RenderConfig { d_up: -1.0, ..Default::default() },
            RenderConfig { views: 15, ..Default::default() },
            RenderConfig { angles: Some(vec![0.0]), ..Default::default() },
            RenderConfig {
                augment: Some(AugmentConfig { camera_dropout: 5, ..Default::default() }),
                ..Default::default()
            },
        ] {
            assert!(!validate_config(&cfg).is_ok(), "{cfg:?}");
        }
    }

    #[test]
    fn toml_sections() {
        let cfg = RenderConfig::from_toml(
            "[render]\nviews = 3\nimage_size = 128\nsource = \"object\"\n\
             [augment.camera]\nd_f_range = [1.5, 3.0]\n",
        )
        .unwrap();
        assert_eq!(cfg.views, 3);
        assert_eq!(cfg.image_size, 128);
        assert_eq!(cfg.source, Source::Object);
        assert_eq!(cfg.d_f, 2.0);
        let aug = cfg.augment.as_ref().unwrap();
        assert_eq!(aug.camera.as_ref().unwrap().d_f_range, [1.5, 3.0]);
        assert_eq!(aug.camera.as_ref().unwrap().d_up_range, [0.5, 2.5]);
        assert!(aug.image.is_none());
        assert_eq!(RenderConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RenderConfig::from_toml("[render]\nview = 3\n").is_err());
    }
}
