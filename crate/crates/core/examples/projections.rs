//! Projects an object onto its three principal planes, resolves the axis
//! signs and writes the density images as PGM files.
//!
//!     cargo run --example projections -- [OUT_DIR]

use std::path::PathBuf;

use orthonet::frame::transform_to_frame;
use orthonet::projection::{aabb_side, disambiguate_sign, project_views, rasterize, Plane, RasterMode};
use orthonet::synthetic::{synth_cloud, ShapeFamily, SynthParams};
use orthonet::build_reference_frame;

fn main() -> orthonet::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("orthonet_views"));
    std::fs::create_dir_all(&out)?;

    let cloud = synth_cloud(ShapeFamily::LShape, 3, &SynthParams::default())?;
    let frame = build_reference_frame(&cloud)?;
    let local = transform_to_frame(&cloud, &frame)?;
    let l = aabb_side(&local)?;
    let views = project_views(&local, l);

    let (sign, resolved) = disambiguate_sign(&views)?;
    println!("l = {l:.4}");
    println!(
        "r_x = {:+.4}  r_y = {:+.4}  flip x/y/z = {}/{}/{}  mirrored = {}",
        sign.r_x,
        sign.r_y,
        sign.flip_x,
        sign.flip_y,
        sign.flip_z(),
        sign.mirrored
    );

    for plane in Plane::ALL {
        let img = rasterize(resolved.get(plane), 64, RasterMode::Density)?;
        let occupied = img.bins().iter().filter(|&&b| b > 0.0).count();
        let path = out.join(format!("{plane:?}.pgm"));
        std::fs::write(&path, img.to_pgm())?;
        println!("{plane:?}: {occupied} occupied bins of {}, wrote {}", img.bins().len(), path.display());
    }
    Ok(())
}
