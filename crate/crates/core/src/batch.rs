//! Parallel batch rendering of scenes to PNG images plus metadata.
//!
//! Output layout: `<out>/<scene>/<object>/view_<k>.png` and
//! `<out>/<scene>/<object>/meta.jsonl`. Every view's randomness is derived
//! from (seed, scene, object, view), so the tree is identical for any worker
//! count.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use image::{ExtendedColorType, ImageFormat};
use log::{debug, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{validate_config, RenderConfig};
use crate::error::{Error, Result};
use crate::ply::load_scene;
use crate::projector::SyntheticImage;
use crate::proposals::load_proposals;
use crate::render::render_object_views;
use crate::scene::{ObjectProposal, Scene};
use crate::semantics::serialize_meta;

#[derive(Debug, Clone)]
pub struct SceneInput {
    pub scene: PathBuf,
    pub proposals: PathBuf,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BatchSummary {
    pub scenes: usize,
    pub objects_rendered: usize,
    pub objects_failed: usize,
    pub views_rendered: usize,
    pub views_failed: usize,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(serialize_with = "as_millis")]
    pub wall_time: Duration,
}

fn as_millis<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

struct LoadedScene {
    id: String,
    scene: Scene,
    proposals: Vec<ObjectProposal>,
}

#[derive(Default)]
struct UnitOutcome {
    views_ok: usize,
    views_failed: usize,
    object_failed: bool,
    failures: Vec<String>,
}

/// File-system friendly form of an identifier.
pub fn sanitize_id(id: &str) -> String {
    let s: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    if s.is_empty() || s.chars().all(|c| c == '.') {
        format!("_{s}")
    } else {
        s
    }
}

pub fn write_png(image: &SyntheticImage, path: &Path) -> Result<()> {
    image::save_buffer_with_format(
        path,
        &image.pixels,
        image.width as u32,
        image.height as u32,
        ExtendedColorType::Rgb8,
        ImageFormat::Png,
    )?;
    Ok(())
}

fn scene_id(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(sanitize_id)
        .ok_or_else(|| Error::Config(format!("cannot derive a scene id from {}", path.display())))
}

fn render_unit(loaded: &LoadedScene, proposal: &ObjectProposal, out_dir: &Path, config: &RenderConfig) -> UnitOutcome {
    let mut outcome = UnitOutcome::default();
    let tag = format!("{}/{}", loaded.id, proposal.id());
    let render = match render_object_views(&loaded.scene, &loaded.id, proposal, config) {
        Ok(r) => r,
        Err(e) => {
            warn!("{tag}: {e}");
            outcome.object_failed = true;
            outcome.views_failed = config.views;
            outcome.failures.push(format!("{tag}: {e}"));
            return outcome;
        }
    };
    let dir = out_dir.join(&loaded.id).join(sanitize_id(proposal.id()));
    let write = || -> Result<()> {
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut meta = String::new();
        for view in &render.views {
            match view {
                Ok(v) => {
                    write_png(&v.image, &dir.join(format!("view_{}.png", v.meta.view_index)))?;
                    meta.push_str(&serialize_meta(&v.meta, &v.geo)?);
                    meta.push('\n');
                }
                Err(f) => {
                    warn!("{tag} view {}: {}", f.view_index, f.message);
                }
            }
        }
        let path = dir.join("meta.jsonl");
        fs::File::create(&path)
            .and_then(|mut f| f.write_all(meta.as_bytes()))
            .map_err(|e| Error::io(&path, e))
    };
    for f in render.failures() {
        outcome.failures.push(format!("{tag} view {}: {}", f.view_index, f.message));
    }
    outcome.views_failed = render.failures().count();
    outcome.views_ok = render.views.len() - outcome.views_failed;
    if let Err(e) = write() {
        warn!("{tag}: {e}");
        outcome.object_failed = true;
        outcome.views_failed = render.views.len();
        outcome.views_ok = 0;
        outcome.failures.push(format!("{tag}: {e}"));
    }
    debug!("{tag}: {} views", outcome.views_ok);
    outcome
}

/// Renders every proposal of every scene into `out_dir`.
///
/// Unreadable inputs abort the batch; per-object and per-view failures are
/// logged, counted in the summary, and do not stop other work.
pub fn run_batch(inputs: &[SceneInput], out_dir: &Path, config: &RenderConfig) -> Result<BatchSummary> {
    let started = Instant::now();
    let warnings = validate_config(config).into_result()?;
    for w in &warnings {
        warn!("{w}");
    }

    let mut ids = HashSet::new();
    let mut named = Vec::with_capacity(inputs.len());
    for input in inputs {
        let id = scene_id(&input.scene)?;
        if !ids.insert(id.clone()) {
            return Err(Error::Config(format!("two scenes share the id `{id}`")));
        }
        named.push((id, input));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let outcomes = pool.install(|| -> Result<Vec<UnitOutcome>> {
        let loaded: Vec<LoadedScene> = named
            .par_iter()
            .map(|(id, input)| {
                let scene = load_scene(&input.scene)?;
                let proposals = load_proposals(&input.proposals, &scene)?;
                Ok(LoadedScene {
                    id: id.clone(),
                    scene,
                    proposals,
                })
            })
            .collect::<Result<_>>()?;
        fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let units: Vec<(&LoadedScene, &ObjectProposal)> = loaded
            .iter()
            .flat_map(|s| s.proposals.iter().map(move |p| (s, p)))
            .collect();
        Ok(units
            .par_iter()
            .map(|(s, p)| render_unit(s, p, out_dir, config))
            .collect())
    })?;

    let mut summary = BatchSummary {
        scenes: inputs.len(),
        warnings,
        ..Default::default()
    };
    for o in outcomes {
        if o.object_failed {
            summary.objects_failed += 1;
        } else {
            summary.objects_rendered += 1;
        }
        summary.views_rendered += o.views_ok;
        summary.views_failed += o.views_failed;
        summary.failures.extend(o.failures);
    }
    summary.wall_time = started.elapsed();
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sanitized_ids() {
        assert_eq!(sanitize_id("chair_12"), "chair_12");
        assert_eq!(sanitize_id("a/b c"), "a_b_c");
        assert_eq!(sanitize_id(".."), "_..");
        assert_eq!(sanitize_id(""), "_");
    }
}
