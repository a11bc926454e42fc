//! End-to-end encoding: merge, islands, top-K selection, packing, baking and
//! pooling.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::atlas::{
    extract_islands, merge_default, select_top_k, validate_atlas, AtlasReport, UvIsland,
};
use crate::baker::{bake, NormalizedFrame, DEFAULT_BAKE_RESOLUTION};
use crate::error::{Error, Result};
use crate::mesh_io::{IndexedMesh, MaterialSet, ObjectImage};
use crate::packer::{pack_aabb, IslandTransform};
use crate::resampler::{naive_pool, sparse_pool};

pub const THREADS_ENV: &str = "OMAGE_THREADS";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub bake_resolution: usize,
    pub low_resolution: usize,
    pub max_patches: usize,
    /// Spacing between packed islands, in low-resolution pixels.
    pub margin_px: usize,
    pub chamfer_samples: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            bake_resolution: DEFAULT_BAKE_RESOLUTION,
            low_resolution: 64,
            max_patches: 64,
            margin_px: 2,
            chamfer_samples: 100_000,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("bake_resolution", self.bake_resolution),
            ("low_resolution", self.low_resolution),
            ("max_patches", self.max_patches),
            ("chamfer_samples", self.chamfer_samples),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidConfig(format!("{name} must be positive")));
        }
        if self.bake_resolution % self.low_resolution != 0 {
            return Err(Error::InvalidConfig(format!(
                "bake_resolution {} is not divisible by low_resolution {}",
                self.bake_resolution, self.low_resolution
            )));
        }
        Ok(())
    }

    /// Parses `key = value` lines. Missing keys keep their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings(pub Vec<StageTiming>);

impl Timings {
    pub fn record<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.push(StageTiming {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn total(&self) -> f64 {
        self.0.iter().map(|t| t.seconds).sum()
    }
}

#[derive(Debug, Clone)]
pub struct Encoded {
    pub high: ObjectImage,
    pub low: ObjectImage,
    pub frame: NormalizedFrame,
    pub atlas: AtlasReport,
    pub islands: Vec<UvIsland>,
    pub transforms: Vec<IslandTransform>,
    pub timings: Timings,
}

/// Pooling rule used for the low-resolution output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pooling {
    #[default]
    Sparse,
    Naive,
}

pub fn pool(img: &ObjectImage, r_low: usize, pooling: Pooling) -> Result<ObjectImage> {
    match pooling {
        Pooling::Sparse => sparse_pool(img, r_low),
        Pooling::Naive => naive_pool(img, r_low),
    }
}

/// Encodes a mesh into a high-resolution omage and its pooled
/// low-resolution version. Islands are packed with the margin measured in
/// low-resolution pixels so that pooling keeps patches apart.
pub fn encode_mesh(mesh: &IndexedMesh, config: &PipelineConfig) -> Result<Encoded> {
    config.validate()?;
    let mut timings = Timings::default();
    let merged = timings.record("merge", || merge_default(mesh));
    let islands = timings.record("islands", || extract_islands(&merged));
    let validation = timings.record("validate", || validate_atlas(&merged));
    let (kept, selection) = timings.record("select", || select_top_k(&islands, config.max_patches));
    let atlas = validation.with_selection(&selection);
    let transforms = timings.record("pack", || {
        pack_aabb(&kept, config.margin_px, config.low_resolution)
    })?;
    let default_materials = MaterialSet::default();
    let materials = mesh.material.as_ref().unwrap_or(&default_materials);
    let (high, frame) = timings.record("bake", || {
        bake(
            &merged,
            &kept,
            &transforms,
            materials,
            config.bake_resolution,
        )
    })?;
    let low = timings.record("pool", || sparse_pool(&high, config.low_resolution))?;
    Ok(Encoded {
        high,
        low,
        frame,
        atlas,
        islands: kept,
        transforms,
        timings,
    })
}

/// Thread cap from `OMAGE_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    let raw = std::env::var(THREADS_ENV).ok()?;
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => Some(n),
        _ => {
            tracing::warn!("ignoring {THREADS_ENV}={raw:?}: expected a positive integer");
            None
        }
    }
}

/// Runs `f` on a rayon pool sized by `threads`, or by `OMAGE_THREADS` when
/// `threads` is `None`, or by rayon's default when neither is set.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads.or_else(thread_cap) {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(e) => {
            tracing::warn!("could not build thread pool ({e}); using the global pool");
            f()
        }
    }
}
