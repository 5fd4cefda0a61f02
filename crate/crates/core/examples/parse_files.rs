//! Loads the bundled OFF, PLY and XYZ fixtures and samples the mesh into a
//! point cloud.
//!
//!     cargo run --example parse_files

use std::path::Path;

use orthonet::io::{parse_off, parse_ply_ascii, parse_xyz, sample_mesh, write_xyz};

fn main() -> orthonet::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");

    let cube = parse_off(&std::fs::read(dir.join("cube.off"))?)?;
    let area: f64 = (0..cube.faces().len()).map(|f| cube.triangle_area(f)).sum();
    println!("cube.off: {} vertices, {} triangles, area {area}", cube.vertices().len(), cube.faces().len());

    let tetra = parse_ply_ascii(&std::fs::read(dir.join("tetra.ply"))?)?;
    println!("tetra.ply: {} points, colors {:?}", tetra.len(), tetra.colors());

    let pts = parse_xyz(&std::fs::read(dir.join("points.xyz"))?)?;
    println!("points.xyz: {} points, canonical form:", pts.len());
    print!("{}", write_xyz(&pts));

    // meshes become clouds by area-weighted sampling; same seed, same cloud
    let cloud = sample_mesh(&cube, 1000, 42)?;
    let again = sample_mesh(&cube, 1000, 42)?;
    println!("sampled {} points from the cube, reproducible: {}", cloud.len(), cloud == again);
    Ok(())
}
