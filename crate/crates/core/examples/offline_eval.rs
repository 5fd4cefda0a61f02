//! Offline evaluation on a synthetic dataset: teach all training objects,
//! classify the test objects, print accuracies and the confusion matrix.
//!
//!     cargo run --release --example offline_eval

use orthonet::protocol::Sample;
use orthonet::synthetic::{synth_dataset, ShapeFamily, SynthParams};
use orthonet::{describe_object, offline_eval, DescribeConfig, Distance};

fn main() -> orthonet::Result<()> {
    let config = DescribeConfig::default();
    let params = SynthParams {
        points: 3000,
        ..SynthParams::default()
    };
    let clouds = synth_dataset(&ShapeFamily::ALL, 12, 7, &params)?;
    let data = clouds.try_map(|label, cloud| {
        Ok(Sample {
            id: label.to_string(),
            descriptor: describe_object(cloud, &config)?.descriptor,
        })
    })?;

    // first 8 of each family train, the rest test
    let split = |train: bool| {
        let cats = data
            .categories()
            .iter()
            .map(|(l, v)| {
                let part = if train { &v[..8] } else { &v[8..] };
                (l.clone(), part.to_vec())
            })
            .collect();
        orthonet::LabeledDataset::new(cats)
    };
    let (train, test) = (split(true)?, split(false)?);

    for distance in [Distance::Chi2, Distance::Js] {
        let r = offline_eval(&train, &test, distance)?;
        println!("{distance}: AIA {:.3}  ACA {:.3}", r.aia, r.aca);
    }
    let r = offline_eval(&train, &test, Distance::Chi2)?;
    println!("confusion (rows true):");
    println!("{:>9} {}", "", r.labels.iter().map(|l| format!("{l:>9}")).collect::<String>());
    for (label, row) in r.labels.iter().zip(&r.confusion) {
        println!("{label:>9} {}", row.iter().map(|n| format!("{n:>9}")).collect::<String>());
    }
    Ok(())
}
