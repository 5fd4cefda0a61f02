//! Orthographic views of a cloud in its reference frame.
//!
//! Each view drops one coordinate, shifts the other two by `l/2` so the
//! object centre lands in the middle of an `l × l` plane (`l` being the
//! largest AABB edge), and is finally binned into an `R × R` image whose
//! bins sum to one.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::io::PointCloud;

/// Projection plane, named by the two axes it keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Plane {
    /// Drops X.
    YoZ,
    /// Drops Y.
    XoZ,
    /// Drops Z.
    XoY,
}

impl Plane {
    pub const ALL: [Plane; 3] = [Plane::YoZ, Plane::XoZ, Plane::XoY];

    /// Frame axes mapped to (α, β).
    pub fn axes(self) -> (usize, usize) {
        match self {
            Plane::YoZ => (1, 2),
            Plane::XoZ => (0, 2),
            Plane::XoY => (0, 1),
        }
    }

    fn index(self) -> usize {
        match self {
            Plane::YoZ => 0,
            Plane::XoZ => 1,
            Plane::XoY => 2,
        }
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Plane::YoZ => "YoZ",
            Plane::XoZ => "XoZ",
            Plane::XoY => "XoY",
        })
    }
}

impl FromStr for Plane {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "yoz" => Ok(Plane::YoZ),
            "xoz" => Ok(Plane::XoZ),
            "xoy" => Ok(Plane::XoY),
            _ => Err(Error::InvalidArgument(format!("unknown plane `{s}`"))),
        }
    }
}

/// The three named views.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViewName {
    Front,
    Top,
    Side,
}

impl ViewName {
    pub const ALL: [ViewName; 3] = [ViewName::Front, ViewName::Top, ViewName::Side];

    pub fn as_str(self) -> &'static str {
        match self {
            ViewName::Front => "front",
            ViewName::Top => "top",
            ViewName::Side => "side",
        }
    }
}

impl fmt::Display for ViewName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Binding of view names to planes. The default looks along X for the
/// front view (X is the longest principal direction), along Z for the top
/// and along Y for the right side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ViewLayout {
    pub front: Plane,
    pub top: Plane,
    pub side: Plane,
}

impl Default for ViewLayout {
    fn default() -> Self {
        Self {
            front: Plane::YoZ,
            top: Plane::XoY,
            side: Plane::XoZ,
        }
    }
}

impl ViewLayout {
    pub fn plane(&self, view: ViewName) -> Plane {
        match view {
            ViewName::Front => self.front,
            ViewName::Top => self.top,
            ViewName::Side => self.side,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = [false; 3];
        for p in [self.front, self.top, self.side] {
            if std::mem::replace(&mut seen[p.index()], true) {
                return Err(Error::InvalidArgument(format!("plane {p} bound twice")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ViewLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.front, self.top, self.side)
    }
}

impl FromStr for ViewLayout {
    type Err = Error;
    /// `front,top,side` plane names, e.g. `YoZ,XoY,XoZ`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "view layout needs three planes, got `{s}`"
            )));
        }
        let layout = ViewLayout {
            front: parts[0].parse()?,
            top: parts[1].parse()?,
            side: parts[2].parse()?,
        };
        layout.validate()?;
        Ok(layout)
    }
}

/// Points of one view, shifted into `[0, l]²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedView {
    pub plane: Plane,
    pub points: Vec<[f64; 2]>,
    pub side: f64,
}

impl ProjectedView {
    /// Reflects α and/or β about `l/2`.
    pub fn mirrored(&self, alpha: bool, beta: bool) -> Self {
        let l = self.side;
        let points = self
            .points
            .iter()
            .map(|&[a, b]| [if alpha { l - a } else { a }, if beta { l - b } else { b }])
            .collect();
        Self {
            plane: self.plane,
            points,
            side: l,
        }
    }
}

/// The three views of one object, addressed by plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewSet {
    views: [ProjectedView; 3],
}

impl ViewSet {
    pub fn get(&self, plane: Plane) -> &ProjectedView {
        &self.views[plane.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ProjectedView> {
        self.views.iter()
    }
}

/// Largest edge of the axis-aligned bounding box.
pub fn aabb_side(cloud: &PointCloud) -> Result<f64> {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in cloud.points() {
        for (k, v) in p.to_array().into_iter().enumerate() {
            lo[k] = lo[k].min(v);
            hi[k] = hi[k].max(v);
        }
    }
    let l = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    if l > 0.0 && l.is_finite() {
        Ok(l)
    } else {
        Err(Error::ZeroExtent)
    }
}

/// Orthographic projections of a cloud centred in its reference frame.
/// Coordinates are shifted by `l/2` and clamped into `[0, l]`.
pub fn project_views(cloud: &PointCloud, l: f64) -> ViewSet {
    let half = 0.5 * l;
    let views = Plane::ALL.map(|plane| {
        let (a, b) = plane.axes();
        let points = cloud
            .points()
            .iter()
            .map(|p| {
                [
                    (p[a] + half).clamp(0.0, l),
                    (p[b] + half).clamp(0.0, l),
                ]
            })
            .collect();
        ProjectedView {
            plane,
            points,
            side: l,
        }
    });
    ViewSet { views }
}

/// Pearson correlation of the (α, β) scatter. Returns 0 when either
/// coordinate has no spread.
pub fn pearson(points: &[[f64; 2]]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let (sa, sb) = points
        .iter()
        .fold((0.0, 0.0), |(x, y), p| (x + p[0], y + p[1]));
    let (ma, mb) = (sa / n, sb / n);
    let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
    let mut scale = 0.0f64;
    for p in points {
        let (da, db) = (p[0] - ma, p[1] - mb);
        saa += da * da;
        sbb += db * db;
        sab += da * db;
        scale = scale.max(p[0].abs()).max(p[1].abs());
    }
    // spread indistinguishable from rounding noise counts as none
    let floor = n * (4.0 * f64::EPSILON * scale).powi(2);
    if saa <= floor || sbb <= floor {
        return Ok(0.0);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation between each point's horizontal coordinate α and its
/// squared distance from the view centroid.
///
/// In the principal-axes frame the plain α/β correlation of any view is zero
/// up to rounding, so it cannot carry a sign. This statistic is positive when
/// the far-out mass of the view lies on the +α side, flips sign under
/// α → l−α and is unchanged by β → l−β.
pub fn sign_correlation(points: &[[f64; 2]]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let (sa, sb) = points
        .iter()
        .fold((0.0, 0.0), |(x, y), p| (x + p[0], y + p[1]));
    let (ma, mb) = (sa / n, sb / n);
    let pairs: Vec<[f64; 2]> = points
        .iter()
        .map(|p| {
            let (da, db) = (p[0] - ma, p[1] - mb);
            [p[0], da * da + db * db]
        })
        .collect();
    pearson(&pairs)
}

/// Outcome of sign disambiguation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignResolution {
    /// Sign correlation of the XoZ view before resolution.
    pub r_x: f64,
    /// Sign correlation of the YoZ view before resolution.
    pub r_y: f64,
    /// `r_x · r_y`.
    pub s: f64,
    /// `s < 0`: the views were mirrored (Z changed sign).
    pub mirrored: bool,
    pub flip_x: bool,
    pub flip_y: bool,
}

impl SignResolution {
    pub fn flip_z(&self) -> bool {
        self.flip_x != self.flip_y
    }
}

/// Fixes the sign ambiguity of the principal axes: `r_x` from the XoZ view
/// orients X, `r_y` from the YoZ view orients Y (see [`sign_correlation`]).
///
/// X is negated when `r_x < 0`, Y when `r_y < 0`, and Z follows as their
/// cross product, so it flips exactly when `s = r_x·r_y < 0`. The views are
/// mirrored along every flipped axis. Resolved views have `r_x, r_y ≥ 0` and
/// pass through unchanged.
pub fn disambiguate_sign(views: &ViewSet) -> Result<(SignResolution, ViewSet)> {
    let r_x = sign_correlation(&views.get(Plane::XoZ).points)?;
    let r_y = sign_correlation(&views.get(Plane::YoZ).points)?;
    let s = r_x * r_y;
    let flip_x = r_x < 0.0;
    let flip_y = r_y < 0.0;
    let flip = [flip_x, flip_y, flip_x != flip_y];

    let resolved = views.views.clone().map(|v| {
        let (a, b) = v.plane.axes();
        if flip[a] || flip[b] {
            v.mirrored(flip[a], flip[b])
        } else {
            v
        }
    });
    Ok((
        SignResolution {
            r_x,
            r_y,
            s,
            mirrored: s < 0.0,
            flip_x,
            flip_y,
        },
        ViewSet { views: resolved },
    ))
}

/// How points become bin values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RasterMode {
    /// Point counts, normalised to sum 1.
    #[default]
    Density,
    /// 1 for every occupied bin, normalised to sum 1.
    Occupancy,
}

impl fmt::Display for RasterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RasterMode::Density => "density",
            RasterMode::Occupancy => "occupancy",
        })
    }
}

impl FromStr for RasterMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "density" => Ok(RasterMode::Density),
            "occupancy" => Ok(RasterMode::Occupancy),
            _ => Err(Error::InvalidArgument(format!("unknown raster mode `{s}`"))),
        }
    }
}

/// `R × R` bin grid of one view. Bin `(i, j)` is stored at `i·R + j`, with
/// `i` indexing α and `j` indexing β.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionImage {
    pub plane: Plane,
    resolution: usize,
    bins: Vec<f64>,
}

impl ProjectionImage {
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.bins[i * self.resolution + j]
    }

    /// Plain PGM (P2), maxval 255, bins scaled by the maximum. Rows run top
    /// to bottom in decreasing β, columns in increasing α.
    pub fn to_pgm(&self) -> String {
        let r = self.resolution;
        let max = self.bins.iter().cloned().fold(0.0, f64::max);
        let mut out = format!("P2\n# plane {}\n{r} {r}\n255\n", self.plane);
        for j in (0..r).rev() {
            let row: Vec<String> = (0..r)
                .map(|i| {
                    let v = if max > 0.0 { self.get(i, j) / max } else { 0.0 };
                    ((v * 255.0).round() as u8).to_string()
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Row-major little-endian float32 bins.
    pub fn to_f32_le_bytes(&self) -> Vec<u8> {
        self.bins
            .iter()
            .flat_map(|&v| (v as f32).to_le_bytes())
            .collect()
    }
}

/// Bins a view into an `R × R` grid normalised to unit mass. A coordinate of
/// exactly `l` falls in the last bin.
pub fn rasterize(view: &ProjectedView, resolution: usize, mode: RasterMode) -> Result<ProjectionImage> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    if view.points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let r = resolution;
    let scale = r as f64 / view.side;
    let bin = |v: f64| ((v * scale).floor().max(0.0) as usize).min(r - 1);

    let mut bins = vec![0.0; r * r];
    for &[a, b] in &view.points {
        let cell = &mut bins[bin(a) * r + bin(b)];
        match mode {
            RasterMode::Density => *cell += 1.0,
            RasterMode::Occupancy => *cell = 1.0,
        }
    }
    let total: f64 = bins.iter().sum();
    for v in &mut bins {
        *v /= total;
    }
    Ok(ProjectionImage {
        plane: view.plane,
        resolution: r,
        bins,
    })
}
