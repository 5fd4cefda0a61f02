//! Teaching, classifying and persisting an instance-based category store.
//!
//!     cargo run --release --example category_learning

use orthonet::synthetic::{synth_cloud, ShapeFamily, SynthParams};
use orthonet::{describe_object, CategoryStore, DescribeConfig, Distance};

fn main() -> orthonet::Result<()> {
    let config = DescribeConfig::default();
    let params = SynthParams::default();
    let describe = |f, seed| -> orthonet::Result<_> { Ok(describe_object(&synth_cloud(f, seed, &params)?, &config)?.descriptor) };

    let first = describe(ShapeFamily::Sphere, 0)?;
    let mut store = CategoryStore::for_descriptor(&first, Distance::Chi2);
    println!("empty store predicts {:?}", store.classify(&first)?.predicted);

    for f in [ShapeFamily::Sphere, ShapeFamily::Plane, ShapeFamily::Cylinder] {
        for seed in 0..2 {
            store.teach(f.name(), &describe(f, seed)?)?;
        }
    }
    println!("{} categories, {} instances", store.num_categories(), store.num_instances());

    for f in [ShapeFamily::Sphere, ShapeFamily::Plane, ShapeFamily::Cylinder] {
        let c = store.classify(&describe(f, 100)?)?;
        println!("new {f}: predicted {:?} (ocd {:.4})", c.predicted, c.distance);
    }

    let path = std::env::temp_dir().join("orthonet_example_store.bin");
    store.save(&path)?;
    let loaded = CategoryStore::load(&path)?;
    println!("reloaded {} instances from {}", loaded.num_instances(), path.display());
    Ok(())
}
