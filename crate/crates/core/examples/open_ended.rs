//! Open-ended learning with the simulated teacher over several seeds, with
//! the per-run metrics and their mean.
//!
//!     cargo run --release --example open_ended

use orthonet::protocol::{aggregate, ProtocolConfig, Sample};
use orthonet::synthetic::{synth_dataset, ShapeFamily, SynthParams};
use orthonet::{compute_metrics, describe_object, run_simulated_teacher, DescribeConfig, Distance};

fn main() -> orthonet::Result<()> {
    let config = DescribeConfig::default();
    let params = SynthParams {
        points: 2000,
        ..SynthParams::default()
    };
    let clouds = synth_dataset(&ShapeFamily::ALL, 15, 1, &params)?;
    let data = clouds.try_map(|label, cloud| {
        Ok(Sample {
            id: label.to_string(),
            descriptor: describe_object(cloud, &config)?.descriptor,
        })
    })?;

    let protocol = ProtocolConfig {
        shuffle_categories: true,
        ..ProtocolConfig::default()
    };
    println!("seed  QCI  TLC    AIC    GCA    APA  stop");
    let mut runs = Vec::new();
    for seed in 0..5 {
        let (log, store) = run_simulated_teacher(&data, &protocol, Distance::Chi2, seed)?;
        let m = compute_metrics(&log, store.num_instances())?;
        println!(
            "{seed:>4} {:>4} {:>4} {:>6.2} {:>6.3} {:>6.3}  {}",
            m.qci, m.tlc, m.aic, m.gca, m.apa, m.stop
        );
        if seed == 0 {
            let tsv = log.to_tsv();
            let head: Vec<&str> = tsv.lines().take(6).collect();
            eprintln!("first log lines of seed 0:\n{}", head.join("\n"));
        }
        runs.push(m);
    }
    let a = aggregate(&runs);
    println!(
        "mean {:>4.0} {:>4.1} {:>6.2} {:>6.3} {:>6.3}  lack_of_data in {}/{}",
        a.qci, a.alc, a.aic, a.gca, a.apa, a.lack_of_data, a.runs
    );
    Ok(())
}
