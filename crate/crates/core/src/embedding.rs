//! From three projection images to one object descriptor.
//!
//! A per-view [`Embedder`] maps each image to a feature vector and the three
//! vectors are pooled element-wise. [`RawEmbedder`] block-sums the image
//! itself; [`ExternalEmbedder`] looks up precomputed features (for example
//! CNN activations) by object id and view.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::frame::{build_reference_frame_with, transform_to_frame, DegeneratePolicy, ReferenceFrame};
use crate::io::PointCloud;
use crate::projection::{
    aabb_side, disambiguate_sign, project_views, rasterize, ProjectionImage, RasterMode,
    SignResolution, ViewLayout, ViewName,
};

/// Non-negative, finite feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteFeature(i));
            }
            if v < 0.0 {
                return Err(Error::NegativeValue { index: i, value: v });
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Element-wise view pooling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pooling {
    Max,
    #[default]
    Avg,
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pooling::Max => "max",
            Pooling::Avg => "avg",
        })
    }
}

impl FromStr for Pooling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Pooling::Max),
            "avg" => Ok(Pooling::Avg),
            _ => Err(Error::InvalidArgument(format!("unknown pooling `{s}`"))),
        }
    }
}

/// Pooled feature plus the tags that decide comparability.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectDescriptor {
    pub feature: FeatureVector,
    pub pooling: Pooling,
    pub embedder_id: String,
}

impl ObjectDescriptor {
    pub fn dim(&self) -> usize {
        self.feature.dim()
    }
}

/// Per-view feature extractor. Implementations must be deterministic.
pub trait Embedder: Send + Sync {
    fn id(&self) -> String;
    fn dim(&self) -> usize;
    fn embed(&self, object_id: &str, view: ViewName, image: &ProjectionImage) -> Result<FeatureVector>;
}

/// Block-sums the image down to `pool_side × pool_side`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawEmbedder {
    pub pool_side: usize,
}

impl Default for RawEmbedder {
    fn default() -> Self {
        Self { pool_side: 15 }
    }
}

impl Embedder for RawEmbedder {
    fn id(&self) -> String {
        format!("raw:{}", self.pool_side)
    }

    fn dim(&self) -> usize {
        self.pool_side * self.pool_side
    }

    fn embed(&self, _object_id: &str, _view: ViewName, image: &ProjectionImage) -> Result<FeatureVector> {
        embed_raw(image, self.pool_side)
    }
}

/// Sums `⌈R/pool_side⌉`-sized square blocks (edge blocks may be smaller or
/// empty) and flattens the result row-major. Total mass is preserved.
pub fn embed_raw(image: &ProjectionImage, pool_side: usize) -> Result<FeatureVector> {
    let r = image.resolution();
    if pool_side < 1 || pool_side > r {
        return Err(Error::InvalidArgument(format!(
            "pool side {pool_side} outside 1..={r}"
        )));
    }
    let block = r.div_ceil(pool_side);
    let mut out = vec![0.0; pool_side * pool_side];
    for i in 0..r {
        let row = &image.bins()[i * r..(i + 1) * r];
        let bi = i / block;
        for (j, &v) in row.iter().enumerate() {
            out[bi * pool_side + j / block] += v;
        }
    }
    FeatureVector::new(out)
}

/// Element-wise max or mean of three equally sized vectors.
pub fn pool(a: &FeatureVector, b: &FeatureVector, c: &FeatureVector, mode: Pooling) -> Result<FeatureVector> {
    let d = a.dim();
    for v in [b, c] {
        if v.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: v.dim(),
            });
        }
    }
    let out = (0..d)
        .map(|i| {
            let (x, y, z) = (a.0[i], b.0[i], c.0[i]);
            match mode {
                Pooling::Max => x.max(y).max(z),
                Pooling::Avg => (x + y + z) / 3.0,
            }
        })
        .collect();
    FeatureVector::new(out)
}

/// Precomputed features keyed by `objectid/front|top|side`.
#[derive(Debug, Clone)]
pub struct ExternalEmbedder {
    name: String,
    dim: usize,
    features: HashMap<String, FeatureVector>,
}

impl ExternalEmbedder {
    pub fn new(name: impl Into<String>, features: HashMap<String, FeatureVector>) -> Result<Self> {
        let mut dims = features.values().map(FeatureVector::dim);
        let dim = dims.next().unwrap_or(0);
        if let Some(d) = dims.find(|&d| d != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: d });
        }
        Ok(Self {
            name: name.into(),
            dim,
            features,
        })
    }

    /// Loads a text or (for `.bin` files) binary embedding file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::new(name, load_external_embeddings(path)?)
    }

    pub fn lookup(&self, object_id: &str, view: ViewName) -> Result<&FeatureVector> {
        let key = format!("{object_id}/{view}");
        self.features.get(&key).ok_or(Error::Record {
            key,
            msg: "no external embedding for this view".into(),
        })
    }

    /// Pooled descriptor straight from the stored features, no geometry.
    pub fn descriptor(&self, object_id: &str, pooling: Pooling) -> Result<ObjectDescriptor> {
        let [f, t, s] = ViewName::ALL.map(|v| self.lookup(object_id, v));
        Ok(ObjectDescriptor {
            feature: pool(f?, t?, s?, pooling)?,
            pooling,
            embedder_id: self.id(),
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

impl Embedder for ExternalEmbedder {
    fn id(&self) -> String {
        format!("external:{}", self.name)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, object_id: &str, view: ViewName, _image: &ProjectionImage) -> Result<FeatureVector> {
        self.lookup(object_id, view).cloned()
    }
}

/// Reads an embedding file; `.bin` selects the binary layout, anything else
/// the text layout.
pub fn load_external_embeddings(path: &Path) -> Result<HashMap<String, FeatureVector>> {
    let bytes = std::fs::read(path)?;
    if path.extension().is_some_and(|e| e == "bin") {
        parse_embeddings_binary(&bytes)
    } else {
        parse_embeddings_text(&String::from_utf8_lossy(&bytes))
    }
}

/// Text records: `key<TAB>D<TAB>v1 v2 ... vD`, one per line. Blank lines
/// and `#` comments are skipped.
pub fn parse_embeddings_text(text: &str) -> Result<HashMap<String, FeatureVector>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(3, '\t');
        let (key, d, vals) = match (parts.next(), parts.next(), parts.next()) {
            (Some(k), Some(d), Some(v)) => (k, d, v),
            _ => return Err(Error::parse(i + 1, "expected key<TAB>D<TAB>values")),
        };
        let d: usize = d
            .trim()
            .parse()
            .map_err(|_| Error::parse(i + 1, format!("bad dimension `{d}`")))?;
        let values = vals
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::parse(i + 1, format!("bad value `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != d {
            return Err(Error::Record {
                key: key.to_string(),
                msg: format!("declares D={d} but lists {} values", values.len()),
            });
        }
        records.push((key.to_string(), values));
    }
    collect_records(records)
}

/// Binary records, little-endian: `u32` key length, key bytes, `u32` D,
/// D × `f32`, repeated to end of input.
pub fn parse_embeddings_binary(bytes: &[u8]) -> Result<HashMap<String, FeatureVector>> {
    collect_records(read_binary_records(bytes)?)
}

pub(crate) fn read_binary_records(mut bytes: &[u8]) -> Result<Vec<(String, Vec<f64>)>> {
    fn take<'a>(b: &mut &'a [u8], n: usize, what: &str) -> Result<&'a [u8]> {
        if b.len() < n {
            return Err(Error::Schema(format!("truncated binary record ({what})")));
        }
        let (head, tail) = b.split_at(n);
        *b = tail;
        Ok(head)
    }
    fn u32_le(b: &mut &[u8], what: &str) -> Result<usize> {
        let s = take(b, 4, what)?;
        Ok(u32::from_le_bytes([s[0], s[1], s[2], s[3]]) as usize)
    }

    let mut records = Vec::new();
    while !bytes.is_empty() {
        let klen = u32_le(&mut bytes, "key length")?;
        let key = String::from_utf8(take(&mut bytes, klen, "key")?.to_vec())
            .map_err(|_| Error::Schema("record key is not UTF-8".into()))?;
        let d = u32_le(&mut bytes, "dimension")?;
        let raw = take(&mut bytes, d.saturating_mul(4), "values")?;
        let values = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        records.push((key, values));
    }
    Ok(records)
}

pub(crate) fn write_binary_record(out: &mut Vec<u8>, key: &str, values: &[f64]) {
    out.extend_from_slice(&(key.len() as u32).to_le_bytes());
    out.extend_from_slice(key.as_bytes());
    out.extend_from_slice(&(values.len() as u32).to_le_bytes());
    for &v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
}

/// Binary form of a set of records, in the layout read by
/// [`parse_embeddings_binary`].
pub fn encode_embeddings_binary<'a>(records: impl IntoIterator<Item = (&'a str, &'a FeatureVector)>) -> Vec<u8> {
    let mut out = Vec::new();
    for (k, v) in records {
        write_binary_record(&mut out, k, v.values());
    }
    out
}

/// Text record line for `key`.
pub fn format_record(key: &str, values: &[f64]) -> String {
    let vals: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
    format!("{key}\t{}\t{}", values.len(), vals.join(" "))
}

fn collect_records(records: Vec<(String, Vec<f64>)>) -> Result<HashMap<String, FeatureVector>> {
    let mut map = HashMap::with_capacity(records.len());
    let mut dim = None;
    for (key, values) in records {
        let d = *dim.get_or_insert(values.len());
        if values.len() != d {
            return Err(Error::Record {
                key,
                msg: format!("dimension {} differs from {d}", values.len()),
            });
        }
        let fv = FeatureVector::new(values).map_err(|e| Error::Record {
            key: key.clone(),
            msg: e.to_string(),
        })?;
        if map.contains_key(&key) {
            return Err(Error::Record {
                key,
                msg: "duplicate key".into(),
            });
        }
        map.insert(key, fv);
    }
    Ok(map)
}

/// Settings of the geometric part of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescribeConfig {
    pub resolution: usize,
    pub pooling: Pooling,
    pub raster: RasterMode,
    pub layout: ViewLayout,
    pub degenerate: DegeneratePolicy,
    /// Block-pooling side of the built-in embedder.
    pub pool_side: usize,
}

impl Default for DescribeConfig {
    fn default() -> Self {
        Self {
            resolution: 150,
            pooling: Pooling::Avg,
            raster: RasterMode::Density,
            layout: ViewLayout::default(),
            degenerate: DegeneratePolicy::Fail,
            pool_side: 15,
        }
    }
}

/// Everything the pipeline produces for one object.
#[derive(Debug, Clone)]
pub struct Description {
    pub descriptor: ObjectDescriptor,
    /// Pose estimate: the reference frame after sign resolution.
    pub frame: ReferenceFrame,
    pub sign: SignResolution,
    /// Images in front, top, side order.
    pub images: [ProjectionImage; 3],
}

/// Full pipeline with the built-in raw embedder.
pub fn describe_object(cloud: &PointCloud, config: &DescribeConfig) -> Result<Description> {
    let embedder = RawEmbedder {
        pool_side: config.pool_side,
    };
    describe_object_with(cloud, config, &embedder, "")
}

/// Full pipeline: frame → transform → AABB → views → sign resolution →
/// rasterize → embed each view → pool.
pub fn describe_object_with(
    cloud: &PointCloud,
    config: &DescribeConfig,
    embedder: &dyn Embedder,
    object_id: &str,
) -> Result<Description> {
    let frame = build_reference_frame_with(cloud, config.degenerate)?;
    describe_in_frame(cloud, &frame, config, embedder, object_id)
}

/// Pipeline from a given (right-handed) frame onwards.
pub fn describe_in_frame(
    cloud: &PointCloud,
    frame: &ReferenceFrame,
    config: &DescribeConfig,
    embedder: &dyn Embedder,
    object_id: &str,
) -> Result<Description> {
    config.layout.validate()?;
    let local = transform_to_frame(cloud, frame)?;
    let l = aabb_side(&local)?;
    let views = project_views(&local, l);
    let (sign, views) = disambiguate_sign(&views)?;

    let images = ViewName::ALL
        .map(|v| rasterize(views.get(config.layout.plane(v)), config.resolution, config.raster));
    let [front, top, side] = images;
    let images = [front?, top?, side?];

    let features = ViewName::ALL
        .iter()
        .zip(&images)
        .map(|(&v, img)| embedder.embed(object_id, v, img))
        .collect::<Result<Vec<_>>>()?;
    let feature = pool(&features[0], &features[1], &features[2], config.pooling)?;

    Ok(Description {
        descriptor: ObjectDescriptor {
            feature,
            pooling: config.pooling,
            embedder_id: embedder.id(),
        },
        frame: frame.with_flips(sign.flip_x, sign.flip_y),
        sign,
        images,
    })
}
