//! Writes a procedural room to `<dir>/room.ply` and `<dir>/room.json`.
//!
//! cargo run --example make_room -- demo

use pointview::ply::{save_scene, PlyFormat};
use pointview::proposals::save_proposals;
use pointview::synthetic::{generate_room, RoomSpec};

fn main() -> anyhow::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "demo".into());
    std::fs::create_dir_all(&dir)?;
    let (scene, proposals) = generate_room(&RoomSpec::default())?;
    let dir = std::path::Path::new(&dir);
    save_scene(&scene, dir.join("room.ply"), PlyFormat::BinaryLittleEndian)?;
    save_proposals(&proposals, dir.join("room.json"))?;
    println!("{} points, {} objects in {}", scene.len(), proposals.len(), dir.display());
    Ok(())
}
