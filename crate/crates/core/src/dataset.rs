//! On-disk datasets laid out as `root/<label>/<object files>`, with optional
//! `root/splits/train.txt` and `root/splits/test.txt` listing relative paths.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{Config, EmbedderChoice};
use crate::embedding::{describe_object_with, ExternalEmbedder};
use crate::error::{Error, Result};
use crate::io::{load_cloud, FileKind};
use crate::protocol::{LabeledDataset, Sample};

/// One object file. `id` is `label/stem`, which is also the key prefix of
/// external embedding records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectRef {
    pub id: String,
    pub path: PathBuf,
}

const SPLITS_DIR: &str = "splits";

/// Mixes the run seed with an FNV-1a hash of the object id so that every
/// object gets its own, order-independent sampling stream.
pub fn object_seed(seed: u64, id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn object_ref(label: &str, path: PathBuf) -> Result<ObjectRef> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Dataset(format!("bad file name: {}", path.display())))?;
    Ok(ObjectRef {
        id: format!("{label}/{stem}"),
        path,
    })
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = fs::read_dir(dir)
        .map_err(|e| Error::Dataset(format!("{}: {e}", dir.display())))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?;
    out.sort();
    Ok(out)
}

fn to_dataset(map: BTreeMap<String, Vec<ObjectRef>>) -> Result<LabeledDataset<ObjectRef>> {
    let mut ids = HashSet::new();
    for r in map.values().flatten() {
        if !ids.insert(r.id.as_str()) {
            return Err(Error::Dataset(format!("duplicate object id `{}`", r.id)));
        }
    }
    LabeledDataset::new(map.into_iter().collect())
}

/// Every recognised object file under `root/<label>/`, labels and files in
/// lexicographic order. Files with unknown extensions are ignored.
pub fn scan_dataset(root: &Path) -> Result<LabeledDataset<ObjectRef>> {
    let mut map = BTreeMap::new();
    for dir in sorted_entries(root)? {
        if !dir.is_dir() {
            continue;
        }
        let Some(label) = dir.file_name().and_then(|s| s.to_str()) else {
            continue;
        };
        if label == SPLITS_DIR || label.starts_with('.') {
            continue;
        }
        let mut refs = Vec::new();
        for path in sorted_entries(&dir)? {
            if path.is_file() && FileKind::from_path(&path).is_some() {
                refs.push(object_ref(label, path)?);
            }
        }
        if !refs.is_empty() {
            map.insert(label.to_string(), refs);
        }
    }
    if map.is_empty() {
        return Err(Error::Dataset(format!("no objects found under {}", root.display())));
    }
    to_dataset(map)
}

/// Reads one split list: non-empty lines of `label/file` paths relative to
/// `root`.
pub fn read_split(root: &Path, list: &Path) -> Result<LabeledDataset<ObjectRef>> {
    let text = fs::read_to_string(list)
        .map_err(|e| Error::Dataset(format!("{}: {e}", list.display())))?;
    let mut map: BTreeMap<String, Vec<ObjectRef>> = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let rel = line.trim();
        if rel.is_empty() || rel.starts_with('#') {
            continue;
        }
        let rel_path = Path::new(rel);
        let mut parts = rel_path.components();
        let label = match (parts.next(), parts.next(), parts.next()) {
            (Some(l), Some(_), None) => l.as_os_str().to_string_lossy().into_owned(),
            _ => {
                return Err(Error::Dataset(format!(
                    "{} line {}: expected label/file, got `{rel}`",
                    list.display(),
                    n + 1
                )))
            }
        };
        let path = root.join(rel_path);
        if !path.is_file() {
            return Err(Error::Dataset(format!("{} line {}: missing file {}", list.display(), n + 1, path.display())));
        }
        map.entry(label.clone()).or_default().push(object_ref(&label, path)?);
    }
    if map.is_empty() {
        return Err(Error::Dataset(format!("{} lists no objects", list.display())));
    }
    to_dataset(map)
}

/// The `splits/train.txt` / `splits/test.txt` pair under `root`, if both
/// exist.
pub fn read_splits(root: &Path) -> Result<Option<(LabeledDataset<ObjectRef>, LabeledDataset<ObjectRef>)>> {
    let train = root.join(SPLITS_DIR).join("train.txt");
    let test = root.join(SPLITS_DIR).join("test.txt");
    if !(train.is_file() && test.is_file()) {
        return Ok(None);
    }
    Ok(Some((read_split(root, &train)?, read_split(root, &test)?)))
}

/// Computes the descriptor of every object in parallel. The result keeps
/// dataset order, so output never depends on scheduling.
pub fn describe_dataset(data: &LabeledDataset<ObjectRef>, config: &Config) -> Result<LabeledDataset<Sample>> {
    if let EmbedderChoice::External(p) = &config.embedder {
        // features were computed elsewhere; geometry is not needed
        let ext = ExternalEmbedder::from_path(p)?;
        return data.try_map(|_, r| {
            Ok(Sample {
                id: r.id.clone(),
                descriptor: ext.descriptor(&r.id, config.pooling)?,
            })
        });
    }

    let embedder = config.embedder()?;
    let describe = config.describe_config();
    let flat: Vec<(&str, &ObjectRef)> = data.iter().collect();
    let described = flat
        .par_iter()
        .map(|(_, r)| {
            let cloud = load_cloud(&r.path, config.samples, object_seed(config.seed, &r.id))?;
            let d = describe_object_with(&cloud, &describe, embedder.as_ref(), &r.id)
                .map_err(|e| with_context(e, &r.path))?;
            Ok(Sample {
                id: r.id.clone(),
                descriptor: d.descriptor,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut it = described.into_iter();
    let categories = data
        .categories()
        .iter()
        .map(|(l, v)| (l.clone(), it.by_ref().take(v.len()).collect()))
        .collect();
    LabeledDataset::new(categories)
}

fn with_context(e: Error, path: &Path) -> Error {
    match e {
        Error::DegenerateFrame(_) | Error::ZeroExtent | Error::DegenerateMesh => e,
        other => Error::Dataset(format!("{}: {other}", path.display())),
    }
}
