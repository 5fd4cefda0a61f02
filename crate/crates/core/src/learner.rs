//! Instance-based category model.
//!
//! A category is the set of descriptors taught for it. A query is compared
//! against every stored instance; the distance to a category (OCD) is the
//! minimum over its instances and the predicted label is the category with
//! the smallest OCD, ties going to the lexicographically smallest label.
//!
//! `teach` needs `&mut self`; share a store across threads behind an
//! `RwLock` so readers see either the state before or after a write.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use crate::embedding::{read_binary_records, write_binary_record, FeatureVector, ObjectDescriptor, Pooling};
use crate::error::{Error, Result};

/// Dissimilarity between two feature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Distance {
    #[default]
    Chi2,
    Js,
}

impl Distance {
    pub fn eval(self, p: &FeatureVector, q: &FeatureVector) -> Result<f64> {
        match self {
            Distance::Chi2 => chi2(p, q),
            Distance::Js => js_distance(p, q),
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distance::Chi2 => "chi2",
            Distance::Js => "js",
        })
    }
}

impl FromStr for Distance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chi2" => Ok(Distance::Chi2),
            "js" => Ok(Distance::Js),
            _ => Err(Error::InvalidArgument(format!("unknown distance `{s}`"))),
        }
    }
}

fn check_pair(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    for v in [p, q] {
        if let Some(i) = v.iter().position(|&x| x < 0.0) {
            return Err(Error::NegativeValue { index: i, value: v[i] });
        }
    }
    Ok(())
}

/// `½ Σ (Pᵢ−Qᵢ)² / (Pᵢ+Qᵢ)`, with `0/0` terms contributing nothing.
pub fn chi2(p: &FeatureVector, q: &FeatureVector) -> Result<f64> {
    chi2_slices(p.values(), q.values())
}

pub fn chi2_slices(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pair(p, q)?;
    Ok(chi2_unchecked(p, q))
}

fn chi2_unchecked(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let s = a + b;
        if s > 0.0 {
            let d = a - b;
            acc += d * d / s;
        }
    }
    0.5 * acc
}

/// Jensen–Shannon divergence in bits (so within `[0, 1]`) of the two
/// vectors after normalising each to unit sum.
pub fn js_distance(p: &FeatureVector, q: &FeatureVector) -> Result<f64> {
    js_slices(p.values(), q.values())
}

pub fn js_slices(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pair(p, q)?;
    let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
    if !(sp > 0.0 && sq > 0.0) {
        return Err(Error::InvalidArgument(
            "Jensen-Shannon needs vectors with positive sum".into(),
        ));
    }
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let (a, b) = (a / sp, b / sq);
        let m = 0.5 * (a + b);
        let term = |x: f64| if x > 0.0 { x * (x / m).log2() } else { 0.0 };
        // one commutative addition per element keeps js(P,Q) == js(Q,P) bit for bit
        acc += term(a) + term(b);
    }
    Ok((0.5 * acc).clamp(0.0, 1.0))
}

/// Outcome of [`CategoryStore::classify`].
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// `None` when the store is empty.
    pub predicted: Option<String>,
    pub distance: f64,
    /// OCD of every category, in label order.
    pub table: Vec<(String, f64)>,
}

/// Label → stored instances, for one embedder/pooling/distance setting.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryStore {
    embedder_id: String,
    dim: usize,
    pooling: Pooling,
    distance: Distance,
    categories: BTreeMap<String, Vec<FeatureVector>>,
}

const STORE_MAGIC: &str = "ORTHONET-STORE 1";

impl CategoryStore {
    pub fn new(embedder_id: impl Into<String>, dim: usize, pooling: Pooling, distance: Distance) -> Self {
        Self {
            embedder_id: embedder_id.into(),
            dim,
            pooling,
            distance,
            categories: BTreeMap::new(),
        }
    }

    /// Empty store matching `d`'s embedder, dimension and pooling.
    pub fn for_descriptor(d: &ObjectDescriptor, distance: Distance) -> Self {
        Self::new(d.embedder_id.clone(), d.dim(), d.pooling, distance)
    }

    pub fn embedder_id(&self) -> &str {
        &self.embedder_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pooling(&self) -> Pooling {
        self.pooling
    }

    pub fn distance(&self) -> Distance {
        self.distance
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.categories.keys().map(String::as_str)
    }

    pub fn instances(&self, label: &str) -> Option<&[FeatureVector]> {
        self.categories.get(label).map(Vec::as_slice)
    }

    pub fn num_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn num_instances(&self) -> usize {
        self.categories.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    /// Average stored instances per category; 0 for an empty store.
    pub fn average_instances(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.num_instances() as f64 / self.num_categories() as f64
        }
    }

    fn check(&self, d: &ObjectDescriptor) -> Result<()> {
        if d.embedder_id != self.embedder_id || d.pooling != self.pooling {
            return Err(Error::Incompatible(format!(
                "descriptor from {}/{} offered to a {}/{} store",
                d.embedder_id, d.pooling, self.embedder_id, self.pooling
            )));
        }
        if d.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: d.dim(),
            });
        }
        Ok(())
    }

    /// Adds one instance, creating the category if it is new. Duplicates are
    /// kept.
    pub fn teach(&mut self, label: &str, d: &ObjectDescriptor) -> Result<()> {
        self.check(d)?;
        if label.is_empty() || label.contains(['\t', '\n']) {
            return Err(Error::InvalidArgument(format!("invalid label `{label}`")));
        }
        self.categories
            .entry(label.to_string())
            .or_default()
            .push(d.feature.clone());
        Ok(())
    }

    /// Minimum distance from `d` to the instances of `label`.
    pub fn object_category_distance(&self, label: &str, d: &ObjectDescriptor) -> Result<f64> {
        self.check(d)?;
        let inst = self
            .categories
            .get(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        self.min_distance(inst, &d.feature)
    }

    fn min_distance(&self, inst: &[FeatureVector], q: &FeatureVector) -> Result<f64> {
        let mut best = f64::INFINITY;
        for x in inst {
            let v = match self.distance {
                Distance::Chi2 => chi2_unchecked(x.values(), q.values()),
                Distance::Js => js_distance(x, q)?,
            };
            best = best.min(v);
        }
        Ok(best)
    }

    /// Minimum-OCD classification.
    pub fn classify(&self, d: &ObjectDescriptor) -> Result<Classification> {
        self.check(d)?;
        let mut table = Vec::with_capacity(self.categories.len());
        let mut best: Option<(&str, f64)> = None;
        for (label, inst) in &self.categories {
            let ocd = self.min_distance(inst, &d.feature)?;
            table.push((label.clone(), ocd));
            if best.is_none_or(|(_, b)| ocd < b) {
                best = Some((label, ocd));
            }
        }
        Ok(Classification {
            predicted: best.map(|(l, _)| l.to_string()),
            distance: best.map_or(f64::INFINITY, |(_, v)| v),
            table,
        })
    }

    /// Writes a text header followed by binary instance records keyed by
    /// label, grouped per category.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{STORE_MAGIC}")?;
        writeln!(w, "embedder={}", self.embedder_id)?;
        writeln!(w, "dim={}", self.dim)?;
        writeln!(w, "distance={}", self.distance)?;
        writeln!(w, "pooling={}", self.pooling)?;
        writeln!(w, "categories={}", self.categories.len())?;
        writeln!(w, "instances={}", self.num_instances())?;
        writeln!(w, "end_header")?;
        let mut buf = Vec::new();
        for (label, inst) in &self.categories {
            for x in inst {
                write_binary_record(&mut buf, label, x.values());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    /// Parses and validates a store written by [`Self::write_to`]. Values
    /// round-trip through `f32`.
    pub fn read_from(mut r: impl BufRead) -> Result<Self> {
        let mut header = BTreeMap::new();
        let mut line = String::new();
        let mut ln = 0;
        loop {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Err(Error::parse(ln + 1, "store header not terminated"));
            }
            ln += 1;
            let l = line.trim_end();
            if ln == 1 {
                if l != STORE_MAGIC {
                    return Err(Error::parse(1, "not an orthonet store"));
                }
                continue;
            }
            if l == "end_header" {
                break;
            }
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| Error::parse(ln, "expected key=value"))?;
            header.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| {
            header
                .get(k)
                .cloned()
                .ok_or_else(|| Error::Schema(format!("store header lacks `{k}`")))
        };
        let count = |k: &str| -> Result<usize> {
            get(k)?
                .parse()
                .map_err(|_| Error::Schema(format!("store header `{k}` is not a count")))
        };
        let mut store = CategoryStore::new(
            get("embedder")?,
            count("dim")?,
            get("pooling")?.parse()?,
            get("distance")?.parse()?,
        );

        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        let records = read_binary_records(&body)?;
        let mut current: Option<&str> = None;
        for (label, values) in &records {
            if current != Some(label.as_str()) {
                if store.categories.contains_key(label) {
                    return Err(Error::Record {
                        key: label.clone(),
                        msg: "category block is not contiguous".into(),
                    });
                }
                current = Some(label);
            }
            let feature = FeatureVector::new(values.clone()).map_err(|e| Error::Record {
                key: label.clone(),
                msg: e.to_string(),
            })?;
            let d = ObjectDescriptor {
                feature,
                pooling: store.pooling,
                embedder_id: store.embedder_id.clone(),
            };
            store.teach(label, &d).map_err(|e| Error::Record {
                key: label.clone(),
                msg: e.to_string(),
            })?;
        }
        if store.num_categories() != count("categories")? || store.num_instances() != count("instances")? {
            return Err(Error::Schema("store body does not match its header counts".into()));
        }
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}
