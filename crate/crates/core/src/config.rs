//! Run configuration: a flat `key = value` file, overridable from the command
//! line. Unknown keys and out-of-range values are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::embedding::{DescribeConfig, Embedder, ExternalEmbedder, Pooling, RawEmbedder};
use crate::error::{Error, Result};
use crate::frame::DegeneratePolicy;
use crate::learner::Distance;
use crate::projection::{RasterMode, ViewLayout};
use crate::protocol::ProtocolConfig;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "ORTHONET_CONFIG";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum EmbedderChoice {
    #[default]
    Raw,
    External(PathBuf),
}

impl fmt::Display for EmbedderChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbedderChoice::Raw => f.write_str("raw"),
            EmbedderChoice::External(p) => write!(f, "external:{}", p.display()),
        }
    }
}

impl FromStr for EmbedderChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(EmbedderChoice::Raw),
            _ => match s.strip_prefix("external:") {
                Some(p) if !p.is_empty() => Ok(EmbedderChoice::External(PathBuf::from(p))),
                _ => Err(Error::Config(format!("embedder must be `raw` or `external:PATH`, got `{s}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub resolution: usize,
    pub pooling: Pooling,
    pub distance: Distance,
    pub embedder: EmbedderChoice,
    pub tau: f64,
    pub breakpoint: usize,
    pub window_multiplier: usize,
    pub seed: u64,
    /// Points sampled from each mesh.
    pub samples: usize,
    pub pool_side: usize,
    pub raster: RasterMode,
    pub degenerate: DegeneratePolicy,
    pub views: ViewLayout,
    pub initial_teach: usize,
    pub shuffle_categories: bool,
}

impl Default for Config {
    fn default() -> Self {
        let d = DescribeConfig::default();
        let p = ProtocolConfig::default();
        Self {
            resolution: d.resolution,
            pooling: d.pooling,
            distance: Distance::Chi2,
            embedder: EmbedderChoice::Raw,
            tau: p.tau,
            breakpoint: p.breakpoint,
            window_multiplier: p.window_multiplier,
            seed: 0,
            samples: 10_000,
            pool_side: d.pool_side,
            raster: d.raster,
            degenerate: d.degenerate,
            views: d.layout,
            initial_teach: p.initial_teach,
            shuffle_categories: p.shuffle_categories,
        }
    }
}

const KEYS: &[&str] = &[
    "resolution",
    "pooling",
    "distance",
    "embedder",
    "tau",
    "breakpoint",
    "window_multiplier",
    "seed",
    "samples",
    "pool_side",
    "raster",
    "degenerate",
    "views",
    "initial_teach",
    "shuffle_categories",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value for {key}: `{value}`")))
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl Config {
    /// Sets one key. The value is checked on its own; cross-field checks
    /// happen in [`Config::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "resolution" => self.resolution = parse_num(key, value)?,
            "pooling" => self.pooling = value.parse().map_err(config_err)?,
            "distance" => self.distance = value.parse().map_err(config_err)?,
            "embedder" => self.embedder = value.parse()?,
            "tau" => self.tau = parse_num(key, value)?,
            "breakpoint" => self.breakpoint = parse_num(key, value)?,
            "window_multiplier" => self.window_multiplier = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "samples" => self.samples = parse_num(key, value)?,
            "pool_side" => self.pool_side = parse_num(key, value)?,
            "raster" => self.raster = value.parse().map_err(config_err)?,
            "degenerate" => {
                self.degenerate = match value {
                    "fail" => DegeneratePolicy::Fail,
                    "canonical" => DegeneratePolicy::Canonical,
                    _ => return Err(Error::Config(format!("degenerate must be fail or canonical, got `{value}`"))),
                }
            }
            "views" => self.views = value.parse().map_err(config_err)?,
            "initial_teach" => self.initial_teach = parse_num(key, value)?,
            "shuffle_categories" => self.shuffle_categories = parse_num(key, value)?,
            _ => {
                return Err(Error::Config(format!(
                    "unknown key `{key}` (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies a `key = value` text on top of `self`. Blank lines and `#`
    /// comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v)
                .map_err(|e| Error::Config(format!("line {}: {}", n + 1, e)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    /// Defaults, overlaid with the file named by `ORTHONET_CONFIG` if set.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::from_file(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(Error::Config(msg.into())) };
        check((2..=1024).contains(&self.resolution), "resolution must be in 2..=1024")?;
        check(
            (1..=self.resolution).contains(&self.pool_side),
            "pool_side must be in 1..=resolution",
        )?;
        check(self.tau.is_finite() && (0.0..1.0).contains(&self.tau), "tau must be in [0, 1)")?;
        check(self.breakpoint >= 1, "breakpoint must be at least 1")?;
        check(self.window_multiplier >= 1, "window_multiplier must be at least 1")?;
        check((1..=10_000_000).contains(&self.samples), "samples must be in 1..=10000000")?;
        check(self.initial_teach >= 1, "initial_teach must be at least 1")?;
        self.views.validate().map_err(config_err)
    }

    pub fn describe_config(&self) -> DescribeConfig {
        DescribeConfig {
            resolution: self.resolution,
            pooling: self.pooling,
            raster: self.raster,
            layout: self.views,
            degenerate: self.degenerate,
            pool_side: self.pool_side,
        }
    }

    pub fn protocol_config(&self) -> ProtocolConfig {
        ProtocolConfig {
            tau: self.tau,
            breakpoint: self.breakpoint,
            window_multiplier: self.window_multiplier,
            initial_teach: self.initial_teach,
            shuffle_categories: self.shuffle_categories,
            ..ProtocolConfig::default()
        }
    }

    /// Instantiates the configured embedder (loads external features).
    pub fn embedder(&self) -> Result<Box<dyn Embedder>> {
        Ok(match &self.embedder {
            EmbedderChoice::Raw => Box::new(RawEmbedder {
                pool_side: self.pool_side,
            }),
            EmbedderChoice::External(p) => Box::new(ExternalEmbedder::from_path(p)?),
        })
    }

    /// Canonical `key=value` rendering; [`Config::from_text`] reads it back.
    pub fn to_text(&self) -> String {
        let degenerate = match self.degenerate {
            DegeneratePolicy::Fail => "fail",
            DegeneratePolicy::Canonical => "canonical",
        };
        let values: [(&str, String); 15] = [
            ("resolution", self.resolution.to_string()),
            ("pooling", self.pooling.to_string()),
            ("distance", self.distance.to_string()),
            ("embedder", self.embedder.to_string()),
            ("tau", self.tau.to_string()),
            ("breakpoint", self.breakpoint.to_string()),
            ("window_multiplier", self.window_multiplier.to_string()),
            ("seed", self.seed.to_string()),
            ("samples", self.samples.to_string()),
            ("pool_side", self.pool_side.to_string()),
            ("raster", self.raster.to_string()),
            ("degenerate", degenerate.to_string()),
            ("views", self.views.to_string()),
            ("initial_teach", self.initial_teach.to_string()),
            ("shuffle_categories", self.shuffle_categories.to_string()),
        ];
        values.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// The configuration as `# key=value` comment lines for report headers.
    pub fn header(&self) -> String {
        self.to_text().lines().map(|l| format!("# {l}\n")).collect()
    }
}
