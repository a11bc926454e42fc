//! Texture baking of a repacked atlas into an [`ObjectImage`].
//!
//! Baking runs in two passes. The coverage pass records, per pixel, the
//! highest-indexed triangle covering its center; bands of rows are
//! processed in parallel but each band walks its triangles in index order,
//! so the result does not depend on scheduling. The shading pass then
//! interpolates position, normal and material for every covered pixel.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atlas::UvIsland;
use crate::error::{Error, Result};
use crate::mesh_io::{
    cross, normalize, sub, IndexedMesh, MaterialSet, ObjectImage, ALBEDO, ALPHA, CHANNELS,
    METALNESS, NORMAL, ROUGHNESS,
};
use crate::packer::IslandTransform;
use crate::raster::{barycentric, RasterTriangle};

/// Default bake resolution.
pub const DEFAULT_BAKE_RESOLUTION: usize = 1024;
const BAND_ROWS: usize = 16;
const NO_TRIANGLE: u32 = u32::MAX;

/// Uniform normalization `p' = (p - center) * scale + 0.5` that maps the
/// mesh bounding box into the unit cube with its longest axis spanning
/// exactly `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedFrame {
    pub center: [f64; 3],
    pub scale: f64,
}

impl NormalizedFrame {
    pub fn from_bounds(lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        let extent = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::DegenerateBounds);
        }
        Ok(NormalizedFrame {
            center: [
                0.5 * (lo[0] + hi[0]),
                0.5 * (lo[1] + hi[1]),
                0.5 * (lo[2] + hi[2]),
            ],
            scale: 1.0 / extent,
        })
    }

    pub fn to_unit(&self, p: [f64; 3]) -> [f64; 3] {
        [
            (p[0] - self.center[0]) * self.scale + 0.5,
            (p[1] - self.center[1]) * self.scale + 0.5,
            (p[2] - self.center[2]) * self.scale + 0.5,
        ]
    }

    pub fn to_world(&self, q: [f64; 3]) -> [f64; 3] {
        [
            (q[0] - 0.5) / self.scale + self.center[0],
            (q[1] - 0.5) / self.scale + self.center[1],
            (q[2] - 0.5) / self.scale + self.center[2],
        ]
    }
}

/// Maps positions into the unit cube, returning the frame that undoes it.
pub fn normalize_positions(mesh: &IndexedMesh) -> Result<(IndexedMesh, NormalizedFrame)> {
    let (lo, hi) = mesh.bounds().ok_or(Error::DegenerateBounds)?;
    let frame = NormalizedFrame::from_bounds(lo, hi)?;
    let mut out = mesh.clone();
    for p in &mut out.positions {
        *p = frame.to_unit(*p);
    }
    Ok((out, frame))
}

struct Prepared {
    tri: usize,
    raster: RasterTriangle,
    /// packed corner positions in pixel units
    pixel: [[f64; 2]; 3],
}

/// Bakes the islands' triangles into an `r`×`r` omage.
///
/// Each triangle is rasterized at its packed UV location with a pixel-center
/// test. Covered pixels get α = 1, the barycentric interpolation of the
/// normalized corner positions, the interpolated object-space normal
/// (encoded `(n + 1) / 2`) and material samples taken at the interpolated
/// original UV. When triangles overlap the one with the larger index wins.
pub fn bake(
    mesh: &IndexedMesh,
    islands: &[UvIsland],
    transforms: &[IslandTransform],
    materials: &MaterialSet,
    r: usize,
) -> Result<(ObjectImage, NormalizedFrame)> {
    if r == 0 {
        return Err(Error::InvalidConfig(
            "bake resolution must be positive".into(),
        ));
    }
    let (unit, frame) = normalize_positions(mesh)?;
    let by_id: HashMap<usize, &IslandTransform> =
        transforms.iter().map(|t| (t.island_id, t)).collect();

    let mut prepared: Vec<Prepared> = Vec::new();
    for island in islands {
        let t = by_id
            .get(&island.island_id)
            .ok_or(Error::TransformMissing {
                island_id: island.island_id,
            })?;
        for &tri in &island.triangle_ids {
            let pixel = mesh.corner_uvs(tri).map(|uv| {
                let p = t.apply(uv);
                [p[0] * r as f64, p[1] * r as f64]
            });
            if let Some(raster) = RasterTriangle::new(pixel, r, r) {
                prepared.push(Prepared { tri, raster, pixel });
            }
        }
    }
    prepared.sort_by_key(|p| p.tri);

    let winners = coverage(&prepared, r);
    let mut slot_of = vec![0usize; mesh.triangles.len()];
    for (k, p) in prepared.iter().enumerate() {
        slot_of[p.tri] = k;
    }

    let vertex_normals = unit.vertex_normals();
    let mut img = ObjectImage::new(r);
    img.data_mut()
        .par_chunks_mut(r * CHANNELS)
        .zip(winners.par_chunks(r))
        .enumerate()
        .for_each(|(i, (row, row_winners))| {
            for (j, &w) in row_winners.iter().enumerate() {
                if w == NO_TRIANGLE {
                    continue;
                }
                let p = &prepared[slot_of[w as usize]];
                let px = &mut row[j * CHANNELS..(j + 1) * CHANNELS];
                shade(
                    &unit,
                    &vertex_normals,
                    materials,
                    p,
                    [j as f64 + 0.5, i as f64 + 0.5],
                    px,
                );
            }
        });
    Ok((img, frame))
}

/// Per-pixel index of the highest-numbered covering triangle.
fn coverage(prepared: &[Prepared], r: usize) -> Vec<u32> {
    let bands = r.div_ceil(BAND_ROWS);
    let mut per_band: Vec<Vec<usize>> = vec![Vec::new(); bands];
    for (k, p) in prepared.iter().enumerate() {
        let first = p.raster.rows.start / BAND_ROWS;
        let last = (p.raster.rows.end - 1) / BAND_ROWS;
        for band in &mut per_band[first..=last] {
            band.push(k);
        }
    }
    let mut winners = vec![NO_TRIANGLE; r * r];
    winners
        .par_chunks_mut(BAND_ROWS * r)
        .zip(per_band.par_iter())
        .enumerate()
        .for_each(|(b, (chunk, list))| {
            let row0 = b * BAND_ROWS;
            let rows = row0..(row0 + BAND_ROWS).min(r);
            for &k in list {
                let tri = prepared[k].tri as u32;
                prepared[k].raster.for_each_covered(rows.clone(), |i, j| {
                    chunk[(i - row0) * r + j] = tri;
                });
            }
        });
    winners
}

fn shade(
    unit: &IndexedMesh,
    vertex_normals: &[[f64; 3]],
    materials: &MaterialSet,
    p: &Prepared,
    center: [f64; 2],
    px: &mut [f32],
) {
    let w = barycentric(p.pixel, center).unwrap_or([1.0 / 3.0; 3]);
    let corners = &unit.triangles[p.tri];
    let lerp3 = |vals: [[f64; 3]; 3]| -> [f64; 3] {
        let mut out = [0.0; 3];
        for k in 0..3 {
            out[k] = w[0] * vals[0][k] + w[1] * vals[1][k] + w[2] * vals[2][k];
        }
        out
    };
    let positions = unit.corner_positions(p.tri);
    let pos = lerp3(positions);
    let uvs = unit.corner_uvs(p.tri);
    let uv = [
        w[0] * uvs[0][0] + w[1] * uvs[1][0] + w[2] * uvs[2][0],
        w[0] * uvs[0][1] + w[1] * uvs[1][1] + w[2] * uvs[2][1],
    ];
    let face = || {
        normalize(cross(
            sub(positions[1], positions[0]),
            sub(positions[2], positions[0]),
        ))
    };
    let normal = materials
        .normal_at(uv)
        .and_then(normalize)
        .or_else(|| normalize(lerp3(corners.map(|c| vertex_normals[c.position as usize]))))
        .or_else(face)
        .unwrap_or([0.0, 0.0, 1.0]);

    for k in 0..3 {
        px[k] = pos[k].clamp(0.0, 1.0) as f32;
        px[NORMAL + k] = ((normal[k] + 1.0) * 0.5).clamp(0.0, 1.0) as f32;
    }
    px[ALPHA] = 1.0;
    px[ALBEDO..ALBEDO + 3].copy_from_slice(&materials.albedo_at(uv));
    px[METALNESS] = materials.metalness_at(uv);
    px[ROUGHNESS] = materials.roughness_at(uv);
}
