//! The `orthonet` command-line front end.
//!
//! [`run`] takes its arguments and streams explicitly so it can be driven
//! in-process. Exit codes: 0 success, 2 usage, 3 data, 4 numeric/degeneracy.

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{Config, EmbedderChoice};
use crate::dataset::{describe_dataset, object_seed, read_splits, scan_dataset, ObjectRef};
use crate::embedding::{describe_object_with, format_record, Pooling};
use crate::error::{Error, Result};
use crate::io::{load_cloud, format_sig};
use crate::learner::{CategoryStore, Distance};
use crate::projection::ViewName;
use crate::protocol::{aggregate, compute_metrics, offline_eval, run_simulated_teacher, Metrics};
use crate::synthetic::{write_off_dataset, ShapeFamily, SynthParams};

#[derive(Debug, Parser)]
#[command(name = "orthonet", version, about = "Orthographic-projection object descriptors and open-ended category learning")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. They override the config file.
#[derive(Debug, Args)]
struct Common {
    /// Config file (defaults to $ORTHONET_CONFIG).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// max or avg
    #[arg(long, global = true)]
    pooling: Option<Pooling>,
    /// chi2 or js
    #[arg(long, global = true)]
    distance: Option<Distance>,
    /// raw or external:PATH
    #[arg(long, global = true)]
    embedder: Option<EmbedderChoice>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    breakpoint: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Points sampled from each mesh.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Extra config entries, `KEY=VALUE`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the descriptor (and optionally pose and projections) of one object.
    Describe {
        input: PathBuf,
        /// Record key; defaults to the file stem.
        #[arg(long)]
        id: Option<String>,
        /// Also print the 12-number pose (origin, then X, Y, Z axes).
        #[arg(long)]
        emit_pose: bool,
        /// Write the three projections as PGM images into this directory.
        #[arg(long, value_name = "DIR")]
        emit_pgm: Option<PathBuf>,
    },
    /// Teach every training object, classify every test object.
    EvalOffline {
        /// Training dataset; with no TEST its splits/ lists are used.
        train: PathBuf,
        test: Option<PathBuf>,
    },
    /// Simulated-teacher protocol, one run per seed.
    EvalOpenended {
        dataset: PathBuf,
        /// Comma-separated protocol seeds.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        /// Write one log per run into this directory.
        #[arg(long, value_name = "DIR")]
        log_dir: Option<PathBuf>,
    },
    /// Interactive teach/correct session over the given objects.
    Teach {
        /// Store file; loaded if it exists, saved on exit.
        #[arg(long)]
        store: PathBuf,
        /// Object files or dataset directories.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Write a synthetic OFF dataset with train/test splits.
    Synth {
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        train: usize,
        #[arg(long, default_value_t = 20)]
        test: usize,
        /// Comma-separated subset of box,sphere,cylinder,lshape,ring,plane.
        #[arg(long, value_delimiter = ',')]
        families: Vec<ShapeFamily>,
        #[arg(long, default_value_t = 0.1)]
        jitter: f64,
    },
}

impl Common {
    fn config(&self) -> Result<Config> {
        let mut c = match &self.config {
            Some(p) => Config::from_file(p)?,
            None => Config::from_env()?,
        };
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            c.set(k.trim(), v)?;
        }
        macro_rules! over {
            ($($f:ident),*) => { $( if let Some(v) = &self.$f { c.$f = v.clone(); } )* };
        }
        over!(resolution, pooling, distance, embedder, tau, breakpoint, seed, samples);
        c.validate()?;
        Ok(c)
    }
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli, input, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<()> {
    let config = cli.common.config()?;
    match cli.command {
        Command::Describe {
            input: path,
            id,
            emit_pose,
            emit_pgm,
        } => cmd_describe(&path, id, emit_pose, emit_pgm.as_deref(), &config, out),
        Command::EvalOffline { train, test } => cmd_eval_offline(&train, test.as_deref(), &config, out),
        Command::EvalOpenended { dataset, seeds, log_dir } => {
            cmd_eval_openended(&dataset, &seeds, log_dir.as_deref(), &config, out)
        }
        Command::Teach { store, inputs } => cmd_teach(&store, &inputs, &config, input, out),
        Command::Synth {
            out: root,
            train,
            test,
            families,
            jitter,
        } => {
            if !(0.0..1.0).contains(&jitter) {
                return Err(Error::InvalidArgument("jitter must be in [0, 1)".into()));
            }
            let families = if families.is_empty() { ShapeFamily::ALL.to_vec() } else { families };
            let params = SynthParams {
                jitter,
                ..SynthParams::default()
            };
            write_off_dataset(&root, &families, train, test, config.seed, &params)?;
            writeln!(out, "wrote {} objects to {}", families.len() * (train + test), root.display())?;
            Ok(())
        }
    }
}

fn file_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "object".into())
}

fn cmd_describe(
    path: &Path,
    id: Option<String>,
    emit_pose: bool,
    emit_pgm: Option<&Path>,
    config: &Config,
    out: &mut dyn Write,
) -> Result<()> {
    let id = id.unwrap_or_else(|| file_id(path));
    let cloud = load_cloud(path, config.samples, object_seed(config.seed, &id))?;
    let embedder = config.embedder()?;
    let d = describe_object_with(&cloud, &config.describe_config(), embedder.as_ref(), &id)?;
    write!(out, "{}", config.header())?;
    writeln!(out, "{}", format_record(&id, d.descriptor.feature.values()))?;
    if emit_pose {
        writeln!(out, "# pose\t{}", d.frame.record_line())?;
        writeln!(out, "# sign\tr_x={} r_y={} mirrored={}", d.sign.r_x, d.sign.r_y, d.sign.mirrored)?;
    }
    if let Some(dir) = emit_pgm {
        fs::create_dir_all(dir)?;
        for (view, img) in ViewName::ALL.iter().zip(&d.images) {
            fs::write(dir.join(format!("{id}_{view}.pgm").replace('/', "_")), img.to_pgm())?;
        }
    }
    Ok(())
}

fn cmd_eval_offline(train: &Path, test: Option<&Path>, config: &Config, out: &mut dyn Write) -> Result<()> {
    let (train_refs, test_refs) = match test {
        Some(t) => (scan_dataset(train)?, scan_dataset(t)?),
        None => read_splits(train)?.ok_or_else(|| {
            Error::InvalidArgument(format!(
                "{} has no splits/train.txt and splits/test.txt; pass a TEST directory",
                train.display()
            ))
        })?,
    };
    let train_set = describe_dataset(&train_refs, config)?;
    let test_set = describe_dataset(&test_refs, config)?;
    let report = offline_eval(&train_set, &test_set, config.distance)?;

    write!(out, "# orthonet eval-offline\n{}", config.header())?;
    writeln!(out, "train_objects={}", train_set.num_items())?;
    writeln!(out, "test_objects={}", test_set.num_items())?;
    writeln!(out, "AIA={:.6}", report.aia)?;
    writeln!(out, "ACA={:.6}", report.aca)?;
    writeln!(out, "# class\taccuracy\tcount")?;
    for (label, acc, n) in report.per_class_accuracy() {
        writeln!(out, "{label}\t{acc:.6}\t{n}")?;
    }
    writeln!(out, "# confusion (rows true, columns predicted)")?;
    writeln!(out, "-\t{}", report.labels.join("\t"))?;
    for (label, row) in report.labels.iter().zip(&report.confusion) {
        let cells: Vec<String> = row.iter().map(usize::to_string).collect();
        writeln!(out, "{label}\t{}", cells.join("\t"))?;
    }
    Ok(())
}

fn metrics_row(name: &str, m: &Metrics) -> String {
    format!(
        "{name}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{}",
        m.qci, m.tlc, m.aic, m.gca, m.apa, m.stop
    )
}

fn cmd_eval_openended(
    dataset: &Path,
    seeds: &[u64],
    log_dir: Option<&Path>,
    config: &Config,
    out: &mut dyn Write,
) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("no seeds given".into()));
    }
    let data = describe_dataset(&scan_dataset(dataset)?, config)?;
    let protocol = config.protocol_config();
    let runs = seeds
        .par_iter()
        .map(|&s| {
            let (log, store) = run_simulated_teacher(&data, &protocol, config.distance, s)?;
            let m = compute_metrics(&log, store.num_instances())?;
            Ok((log, m))
        })
        .collect::<Result<Vec<_>>>()?;

    if let Some(dir) = log_dir {
        fs::create_dir_all(dir)?;
        for (i, (&s, (log, m))) in seeds.iter().zip(&runs).enumerate() {
            let text = format!("{}# seed={s}\n{}{}", config.header(), log.to_tsv(), m.to_kv());
            fs::write(dir.join(format!("run{i:02}_seed{s}.tsv")), text)?;
        }
    }

    write!(out, "# orthonet eval-openended\n{}", config.header())?;
    writeln!(out, "# categories={} objects={}", data.num_categories(), data.num_items())?;
    writeln!(out, "seed\tQCI\tTLC\tAIC\tGCA\tAPA\tstop")?;
    for (&s, (_, m)) in seeds.iter().zip(&runs) {
        writeln!(out, "{}", metrics_row(&s.to_string(), m))?;
    }
    let metrics: Vec<Metrics> = runs.iter().map(|(_, m)| *m).collect();
    let a = aggregate(&metrics);
    writeln!(out, "# mean over {} runs: QCI ALC AIC GCA APA lack_of_data_runs", a.runs)?;
    writeln!(
        out,
        "mean\t{:.2}\t{:.2}\t{:.4}\t{:.4}\t{:.4}\t{}",
        a.qci, a.alc, a.aic, a.gca, a.apa, a.lack_of_data
    )?;
    Ok(())
}

enum Reply {
    Store(String),
    Skip,
    Quit,
}

fn parse_reply(line: &str) -> std::result::Result<Reply, String> {
    let mut parts = line.split_whitespace();
    let cmd = parts.next().unwrap_or("");
    let arg: Vec<&str> = parts.collect();
    match (cmd, arg.as_slice()) {
        ("teach" | "correct", [label]) => Ok(Reply::Store(label.to_string())),
        ("teach" | "correct", _) => Err(format!("usage: {cmd} LABEL")),
        ("skip", []) => Ok(Reply::Skip),
        ("quit", []) => Ok(Reply::Quit),
        _ => Err("commands: teach LABEL | correct LABEL | skip | quit".into()),
    }
}

fn teach_objects(inputs: &[PathBuf]) -> Result<Vec<ObjectRef>> {
    let mut objects = Vec::new();
    for p in inputs {
        if p.is_dir() {
            objects.extend(scan_dataset(p)?.iter().map(|(_, r)| r.clone()));
        } else {
            objects.push(ObjectRef {
                id: file_id(p),
                path: p.clone(),
            });
        }
    }
    Ok(objects)
}

fn cmd_teach(
    store_path: &Path,
    inputs: &[PathBuf],
    config: &Config,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<()> {
    let objects = teach_objects(inputs)?;
    let embedder = config.embedder()?;
    let describe = config.describe_config();
    let mut store = if store_path.exists() {
        CategoryStore::load(store_path)?
    } else {
        CategoryStore::new(embedder.id(), embedder.dim(), config.pooling, config.distance)
    };
    writeln!(out, "store: {} categories, {} instances", store.num_categories(), store.num_instances())?;

    'objects: for obj in &objects {
        let cloud = load_cloud(&obj.path, config.samples, object_seed(config.seed, &obj.id))?;
        let d = describe_object_with(&cloud, &describe, embedder.as_ref(), &obj.id)?.descriptor;
        let c = store.classify(&d)?;
        match &c.predicted {
            Some(label) => writeln!(out, "object {}: predicted {label} (ocd {})", obj.id, format_sig(c.distance))?,
            None => writeln!(out, "object {}: predicted unknown", obj.id)?,
        }
        loop {
            write!(out, "> ")?;
            out.flush()?;
            let mut line = String::new();
            if input.read_line(&mut line)? == 0 {
                writeln!(out)?;
                break 'objects;
            }
            match parse_reply(line.trim()) {
                Ok(Reply::Store(label)) => match store.teach(&label, &d) {
                    Ok(()) => {
                        writeln!(out, "stored under {label} ({} instances)", store.num_instances())?;
                        break;
                    }
                    Err(e) => writeln!(out, "error: {e}")?,
                },
                Ok(Reply::Skip) => break,
                Ok(Reply::Quit) => break 'objects,
                Err(msg) => writeln!(out, "error: {msg}")?,
            }
        }
    }

    store.save(store_path)?;
    writeln!(out, "saved {} categories, {} instances to {}", store.num_categories(), store.num_instances(), store_path.display())?;
    Ok(())
}
