//! Pose-invariant 3D object descriptors from three orthographic projections,
//! with an instance-based open-ended category learner and the
//! simulated-teacher evaluation protocol.
//!
//! Pipeline: [`io`] loads a cloud (sampling meshes), [`frame`] attaches a
//! principal-axes reference frame, [`projection`] projects onto the three
//! principal planes, resolves eigenvector signs and rasterizes, and
//! [`embedding`] turns the images into one pooled [`ObjectDescriptor`].
//! [`learner`] stores descriptors per category and classifies by minimum
//! object-category distance; [`protocol`] evaluates it.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod eigen;
pub mod embedding;
pub mod error;
pub mod frame;
pub mod geometry;
pub mod io;
pub mod learner;
pub mod projection;
pub mod protocol;
pub mod synthetic;

pub use config::Config;
pub use embedding::{describe_object, describe_object_with, DescribeConfig, Description, FeatureVector, ObjectDescriptor, Pooling};
pub use error::{Error, Result};
pub use frame::{build_reference_frame, ReferenceFrame};
pub use geometry::{Mat3, Point3, Vec3};
pub use io::{load_cloud, PointCloud, TriangleMesh};
pub use learner::{CategoryStore, Classification, Distance};
pub use protocol::{compute_metrics, offline_eval, run_simulated_teacher, LabeledDataset, Metrics, Sample};
