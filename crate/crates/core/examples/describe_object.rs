//! The full pipeline on one object, and how little the descriptor moves
//! when the object is re-posed.
//!
//!     cargo run --release --example describe_object

use orthonet::geometry::Mat3;
use orthonet::learner::chi2;
use orthonet::synthetic::{synth_cloud, ShapeFamily, SynthParams};
use orthonet::{describe_object, DescribeConfig, Point3, Pooling};

fn main() -> orthonet::Result<()> {
    let cloud = synth_cloud(ShapeFamily::Ring, 5, &SynthParams::default())?;
    let config = DescribeConfig::default();
    let d = describe_object(&cloud, &config)?;
    let v = d.descriptor.feature.values();
    println!("descriptor: {} values, sum {:.6}, embedder {}", v.len(), d.descriptor.feature.sum(), d.descriptor.embedder_id);
    println!("first bins {:?}", &v[..5]);
    println!("pose {}", d.frame.record_line());

    let r = Mat3::from_quaternion(0.3, -0.7, 0.5, 0.4);
    let posed = cloud.map_points(|p| r.apply(p) + Point3::new(10.0, 0.0, -4.0))?;
    let d2 = describe_object(&posed, &config)?;
    println!("chi2 to the re-posed copy: {:.3e}", chi2(&d.descriptor.feature, &d2.descriptor.feature)?);

    let max = DescribeConfig {
        pooling: Pooling::Max,
        ..config
    };
    let other = synth_cloud(ShapeFamily::Box, 5, &SynthParams::default())?;
    let (a, b) = (describe_object(&cloud, &max)?, describe_object(&other, &max)?);
    println!("chi2 ring vs box (max pooling): {:.4}", chi2(&a.descriptor.feature, &b.descriptor.feature)?);
    Ok(())
}
