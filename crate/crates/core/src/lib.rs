//! Codec between UV-mapped PBR triangle meshes and object images: 12-channel
//! multi-chart geometry images holding position, occupancy, normal, albedo,
//! metalness and roughness.
//!
//! Encoding merges coincident vertices, extracts UV islands, keeps the K
//! largest, repacks them into the unit square, bakes at high resolution and
//! pools with boundary snapping. Decoding connects occupied pixel triplets.

pub mod atlas;
pub mod baker;
pub mod cli;
pub mod error;
pub mod mesh_io;
pub mod metrics;
pub mod packer;
pub mod pipeline;
pub mod raster;
pub mod remesher;
pub mod resampler;
mod union_find;

pub use error::{Error, Result};
pub use union_find::UnionFind;
