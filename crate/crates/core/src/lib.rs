//! Deterministic multi-view synthetic images from point-cloud object proposals.
//!
//! For each object a fan of virtual cameras is placed in front of the box
//! face nearest the room center. Points are projected with the Unified Camera
//! Model, cropped to the object's extended region of interest and rasterized
//! with a height-priority z-buffer. Every view comes with a 30-dimensional
//! geometry vector and a metadata record sufficient to re-render it.

pub mod augment;
pub mod batch;
pub mod camera;
pub mod cli;
pub mod config;
pub mod error;
pub mod ply;
pub mod projector;
pub mod proposals;
pub mod render;
pub mod scene;
pub mod semantics;
pub mod synthetic;

pub use config::{validate_config, AugmentConfig, RenderConfig, Source};
pub use error::{Error, Result};
pub use render::{render_object_views, ObjectRender, RenderedView, ViewMeta};
pub use scene::{Aabb, ObjectProposal, Point, Scene};
