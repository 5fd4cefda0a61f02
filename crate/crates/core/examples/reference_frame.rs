//! Builds the principal-axes frame of a posed object and shows that it moves
//! with the object.
//!
//!     cargo run --example reference_frame

use orthonet::frame::principal_axes;
use orthonet::geometry::Mat3;
use orthonet::synthetic::{synth_cloud, ShapeFamily, SynthParams};
use orthonet::{build_reference_frame, Point3};

fn main() -> orthonet::Result<()> {
    let params = SynthParams {
        random_pose: false,
        ..SynthParams::default()
    };
    let cloud = synth_cloud(ShapeFamily::Cylinder, 1, &params)?;

    let (c, basis) = principal_axes(&cloud);
    println!("centroid {:?}", c.to_array());
    println!("eigenvalues {:?} ({} Jacobi sweeps)", basis.values, basis.sweeps);

    let frame = build_reference_frame(&cloud)?;
    println!("frame axes X {:?}", frame.x_axis.to_array());
    println!("           Y {:?}", frame.y_axis.to_array());
    println!("           Z {:?}", frame.z_axis.to_array());
    println!("det {:.12}", frame.determinant());

    // rotate and translate: the new frame is the old one carried along,
    // up to the sign of each axis
    let r = Mat3::from_quaternion(0.8, 0.2, -0.4, 0.4);
    let t = Point3::new(3.0, -1.0, 0.5);
    let moved = cloud.map_points(|p| r.apply(p) + t)?;
    let f2 = build_reference_frame(&moved)?;
    for (name, a, b) in [("X", frame.x_axis, f2.x_axis), ("Y", frame.y_axis, f2.y_axis)] {
        println!("|{name}·R^T {name}'| = {:.12}", r.apply(a).dot(b).abs());
    }
    println!("pose record: {}", f2.record_line());
    Ok(())
}
