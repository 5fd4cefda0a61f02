use std::fs;
use std::io::Cursor;
use std::path::Path;

use orthonet::cli;

const FAST: &[&str] = &["--samples", "1500", "--resolution", "60"];

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_with_input(args: &[&str], stdin: &str) -> Out {
    let mut argv = vec!["orthonet"];
    argv.extend_from_slice(args);
    let mut input = Cursor::new(stdin.as_bytes().to_vec());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(argv, &mut input, &mut out, &mut err);
    Out {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn run(args: &[&str]) -> Out {
    run_with_input(args, "")
}

fn fast(args: &[&str]) -> Vec<String> {
    args.iter().chain(FAST).map(|s| s.to_string()).collect()
}

fn run_fast(args: &[&str]) -> Out {
    let v = fast(args);
    run(&v.iter().map(String::as_str).collect::<Vec<_>>())
}

fn synth(root: &Path, train: usize, test: usize, families: &str) {
    let r = run(&[
        "synth",
        root.to_str().unwrap(),
        "--train",
        &train.to_string(),
        "--test",
        &test.to_string(),
        "--families",
        families,
        "--seed",
        "3",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
}

#[test]
fn describe_is_deterministic_and_emits_extras() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("data");
    synth(&root, 1, 0, "box");
    let obj = root.join("box/box_000.off");
    let obj = obj.to_str().unwrap();

    let a = run_fast(&["describe", obj]);
    let b = run_fast(&["describe", obj]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stdout.contains("# resolution=60"));
    let record = a.stdout.lines().find(|l| !l.starts_with('#')).unwrap();
    let fields: Vec<&str> = record.split('\t').collect();
    assert_eq!(fields[..2], ["box_000", "225"]);
    let values: Vec<f64> = fields[2].split(' ').map(|v| v.parse().unwrap()).collect();
    assert_eq!(values.len(), 225);
    assert!((values.iter().sum::<f64>() - 1.0).abs() < 1e-6);

    let pgm = dir.path().join("pgm");
    let c = run_fast(&["describe", obj, "--id", "x/y", "--emit-pose", "--emit-pgm", pgm.to_str().unwrap()]);
    assert_eq!(c.code, 0, "{}", c.stderr);
    let pose = c.stdout.lines().find(|l| l.starts_with("# pose")).unwrap();
    assert_eq!(pose.split('\t').nth(1).unwrap().split_whitespace().count(), 12);
    assert!(c.stdout.lines().any(|l| l.starts_with("x/y\t")));
    let mut files: Vec<_> = fs::read_dir(&pgm).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    assert_eq!(files.len(), 3);
    for f in files {
        let bytes = fs::read(pgm.join(f)).unwrap();
        assert!(bytes.starts_with(b"P"));
    }
}

#[test]
fn describe_failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.xyz");
    fs::write(&empty, "").unwrap();
    let r = run_fast(&["describe", empty.to_str().unwrap()]);
    assert_ne!(r.code, 0);
    assert!(r.stderr.starts_with("error:"));
    assert!(r.stdout.is_empty());

    let flat = dir.path().join("flat.xyz");
    fs::write(&flat, "0 0 0\n1 0 0\n2 0 0\n3 0 0\n").unwrap();
    assert_eq!(run_fast(&["describe", flat.to_str().unwrap()]).code, 4);

    assert_eq!(run_fast(&["describe", "/nonexistent/file.off"]).code, 3);
}

#[test]
fn usage_and_config_errors_exit_2() {
    assert_eq!(run(&[]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
    assert_eq!(run(&["--help"]).code, 0);
    assert_eq!(run(&["describe", "x.off", "--set", "colour=red"]).code, 2);
    assert_eq!(run(&["describe", "x.off", "--tau", "1.5"]).code, 2);
    assert_eq!(run(&["describe", "x.off", "--config", "/nonexistent.conf"]).code, 2);
}

#[test]
fn config_file_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("data");
    synth(&root, 1, 0, "sphere");
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "resolution = 30\npool_side = 5\nsamples = 800\n").unwrap();
    let obj = root.join("sphere/sphere_000.off");
    let r = run(&["describe", obj.to_str().unwrap(), "--config", conf.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("# resolution=30"));
    let record = r.stdout.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(record.split('\t').nth(1), Some("25"));
}

#[test]
fn offline_on_training_data_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("data");
    synth(&root, 3, 2, "box,ring,plane");
    let r = run_fast(&["eval-offline", root.to_str().unwrap(), root.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("AIA=1.000000"), "{}", r.stdout);
    assert!(r.stdout.contains("ACA=1.000000"));

    let split = run_fast(&["eval-offline", root.to_str().unwrap()]);
    assert_eq!(split.code, 0, "{}", split.stderr);
    assert!(split.stdout.contains("train_objects=9"));
    assert!(split.stdout.contains("test_objects=6"));

    assert_ne!(run_fast(&["eval-offline", "/nonexistent/dir"]).code, 0);
}

#[test]
fn openended_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("data");
    synth(&root, 4, 0, "box,sphere,ring");
    let logs = dir.path().join("logs");
    let r = run_fast(&[
        "eval-openended",
        root.to_str().unwrap(),
        "--seeds",
        "7,7,8",
        "--log-dir",
        logs.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let a = fs::read_to_string(logs.join("run00_seed7.tsv")).unwrap();
    let b = fs::read_to_string(logs.join("run01_seed7.tsv")).unwrap();
    assert_eq!(a, b);
    assert!(logs.join("run02_seed8.tsv").is_file());
    assert!(a.contains("# stop="));
    let rows: Vec<&str> = r.stdout.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "seed\tQCI\tTLC\tAIC\tGCA\tAPA\tstop");
    assert_eq!(rows[1], rows[2]);
    assert!(rows[4].starts_with("mean\t"));
}

#[test]
fn teach_session() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("data");
    synth(&root, 2, 0, "box,ring");
    let store = dir.path().join("store.txt");
    let store_s = store.to_str().unwrap();
    let mug = root.join("box/box_000.off");
    let mug_s = mug.to_str().unwrap();
    let ring = root.join("ring/ring_000.off");
    let ring_s = ring.to_str().unwrap();

    let first = run_with_input(
        &fast(&["teach", "--store", store_s, mug_s]).iter().map(String::as_str).collect::<Vec<_>>(),
        "hello\nteach\nteach cup\n",
    );
    assert_eq!(first.code, 0, "{}", first.stderr);
    assert!(first.stdout.contains("predicted unknown"));
    assert_eq!(first.stdout.matches("error:").count(), 2, "{}", first.stdout);
    assert!(first.stdout.contains("saved 1 categories, 1 instances"));

    let second = run_with_input(
        &fast(&["teach", "--store", store_s, mug_s, ring_s]).iter().map(String::as_str).collect::<Vec<_>>(),
        "skip\nquit\n",
    );
    assert_eq!(second.code, 0, "{}", second.stderr);
    // instances are stored as float32, so a reloaded match is only near zero
    let line = second.stdout.lines().find(|l| l.contains("object box_000")).unwrap();
    assert!(line.contains("predicted cup (ocd "), "{line}");
    let ocd: f64 = line.rsplit("ocd ").next().unwrap().trim_end_matches(')').parse().unwrap();
    assert!(ocd < 1e-9, "{ocd}");
    assert!(second.stdout.contains("saved 1 categories, 1 instances"));

    // end of input saves what was taught so far
    let third = run_with_input(
        &fast(&["teach", "--store", store_s, ring_s, mug_s]).iter().map(String::as_str).collect::<Vec<_>>(),
        "correct ring\n",
    );
    assert_eq!(third.code, 0, "{}", third.stderr);
    assert!(third.stdout.contains("saved 2 categories, 2 instances"));
}
