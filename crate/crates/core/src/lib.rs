//! Lane graph extraction from aerial imagery with a driving agent.

pub mod aggregation;
pub mod config;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod halton;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod planning;
pub mod pruning;
pub mod raster;
pub mod sampling;
pub mod scalar;
pub mod scorer;
pub mod shortest_path;
pub mod spatial;
pub mod worldgen;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use geometry::{Aabb, Point2, Pose};
pub use graph::{CoordinateFrame, Edge, FrameKind, LaneGraph, Node};
pub use raster::Raster;
pub use scalar::Scalar;

pub type Graph64 = LaneGraph<f64>;
pub type Graph32 = LaneGraph<f32>;
pub type Point64 = Point2<f64>;
pub type Pose64 = Pose<f64>;
pub type Params64 = scorer::ScorerParams<f64>;
pub type Params32 = scorer::ScorerParams<f32>;
