//! Command-line arguments and their merge with the config file.

use std::path::PathBuf;

use clap::Parser;

use crate::batch::SceneInput;
use crate::config::{AugmentConfig, RenderConfig, Source};
use crate::error::{Error, Result};

/// Render multi-view synthetic images for every object proposal of one or
/// more point-cloud scenes.
#[derive(Debug, Clone, Parser)]
#[command(name = "pointview", version)]
pub struct Args {
    /// Scene point cloud (PLY). Repeat once per scene.
    #[arg(long = "scene", required = true)]
    pub scenes: Vec<PathBuf>,

    /// Proposals JSON, paired with `--scene` in order.
    #[arg(long = "proposals", required = true)]
    pub proposals: Vec<PathBuf>,

    #[arg(long)]
    pub out_dir: PathBuf,

    /// TOML file with [render], [augment.camera] and [augment.image] sections.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub views: Option<usize>,

    /// Degrees between neighbouring cameras.
    #[arg(long)]
    pub theta_step: Option<f64>,

    #[arg(long)]
    pub image_size: Option<u32>,

    /// Horizontal camera distance from the prominent face, meters.
    #[arg(long = "df")]
    pub d_f: Option<f64>,

    /// Camera height above the floor, meters.
    #[arg(long = "dup")]
    pub d_up: Option<f64>,

    /// ROI extension fraction.
    #[arg(long = "eps", allow_hyphen_values = true)]
    pub epsilon: Option<f64>,

    #[arg(long, value_enum)]
    pub source: Option<Source>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    pub workers: Option<usize>,

    /// Enable camera and image augmentation (default ranges unless the
    /// config file sets them).
    #[arg(long)]
    pub augment: bool,
}

impl Args {
    /// Config file values (or defaults) overridden by any flags given.
    pub fn render_config(&self) -> Result<RenderConfig> {
        let mut cfg = match &self.config {
            Some(path) => RenderConfig::from_file(path)?,
            None => RenderConfig::default(),
        };
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    cfg.$field = v;
                }
            )*};
        }
        take!(views, theta_step, image_size, d_f, d_up, epsilon, source, seed, workers);
        if self.augment && cfg.augment.is_none() {
            cfg.augment = Some(AugmentConfig::enabled());
        }
        Ok(cfg)
    }

    pub fn inputs(&self) -> Result<Vec<SceneInput>> {
        if self.scenes.len() != self.proposals.len() {
            return Err(Error::Config(format!(
                "{} --scene paths but {} --proposals paths",
                self.scenes.len(),
                self.proposals.len()
            )));
        }
        Ok(self
            .scenes
            .iter()
            .zip(&self.proposals)
            .map(|(s, p)| SceneInput {
                scene: s.clone(),
                proposals: p.clone(),
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(extra: &[&str]) -> Args {
        let mut argv = vec!["pointview", "--scene", "a.ply", "--proposals", "a.json", "--out-dir", "out"];
        argv.extend_from_slice(extra);
        Args::try_parse_from(argv).unwrap()
    }

    #[test]
    fn no_flags_gives_defaults() {
        assert_eq!(parse(&[]).render_config().unwrap(), RenderConfig::default());
    }

    #[test]
    fn flags_override() {
        let cfg = parse(&["--image-size", "128", "--views", "5", "--df", "3", "--eps", "0.1", "--source", "object"])
            .render_config()
            .unwrap();
        assert_eq!(cfg.image_size, 128);
        assert_eq!(cfg.views, 5);
        assert_eq!(cfg.d_f, 3.0);
        assert_eq!(cfg.epsilon, 0.1);
        assert_eq!(cfg.source, Source::Object);
        assert!(cfg.augment.is_none());
        assert!(parse(&["--augment"]).render_config().unwrap().augment.is_some());
    }

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[render]\nviews = 3\nd_up = 0.5\n").unwrap();
        let cfg = parse(&["--config", path.to_str().unwrap(), "--views", "1"])
            .render_config()
            .unwrap();
        assert_eq!(cfg.views, 1);
        assert_eq!(cfg.d_up, 0.5);
    }

    #[test]
    fn unpaired_inputs_rejected() {
        let args = Args::try_parse_from([
            "pointview", "--scene", "a.ply", "--scene", "b.ply", "--proposals", "a.json", "--out-dir", "o",
        ])
        .unwrap();
        assert!(args.inputs().is_err());
    }
}
