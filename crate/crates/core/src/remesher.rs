//! Reconstruction of a triangle mesh from an object image.
//!
//! Every 2×2 cell of pixels yields up to two triangles,
//! `(i,j),(i,j+1),(i+1,j)` and `(i+1,j+1),(i,j+1),(i+1,j)`, each emitted only
//! when all three of its pixels are occupied. Vertices are numbered in pixel
//! raster order.

use std::collections::VecDeque;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::baker::NormalizedFrame;
use crate::error::{Error, Result};
use crate::mesh_io::{
    cross, normalize, sub, write_obj, Corner, IndexedMesh, ObjectImage, ALBEDO, METALNESS, NORMAL,
    ROUGHNESS,
};

/// Mesh decoded from an omage, with per-vertex attributes copied from the
/// source pixels. Positions and UVs share indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedMesh {
    pub mesh: IndexedMesh,
    /// Source pixel `(i, j)` of each vertex.
    pub pixels: Vec<(usize, usize)>,
    pub patch_label: Vec<u32>,
    /// Unit-length object-space normals.
    pub normals: Vec<[f64; 3]>,
    pub albedo: Vec<[f32; 3]>,
    pub metalness: Vec<f32>,
    pub roughness: Vec<f32>,
    /// Set once positions have been mapped back to world units.
    pub frame: Option<NormalizedFrame>,
}

/// Per-pixel labels of the 4-connected components of the occupancy map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchLabels {
    pub resolution: usize,
    /// Row-major; `None` for unoccupied pixels.
    pub labels: Vec<Option<u32>>,
    pub count: usize,
}

impl PatchLabels {
    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        self.labels[i * self.resolution + j]
    }
}

/// Labels 4-connected occupied regions. Labels are handed out in the order
/// a raster scan first meets each region, starting at 0.
pub fn label_patches(img: &ObjectImage) -> PatchLabels {
    let r = img.resolution();
    let occ = img.occupancy();
    let mut labels = vec![None; r * r];
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..r * r {
        if !occ[start] || labels[start].is_some() {
            continue;
        }
        labels[start] = Some(count);
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            let (i, j) = (idx / r, idx % r);
            let mut visit = |n: usize| {
                if occ[n] && labels[n].is_none() {
                    labels[n] = Some(count);
                    queue.push_back(n);
                }
            };
            if i > 0 {
                visit(idx - r);
            }
            if i + 1 < r {
                visit(idx + r);
            }
            if j > 0 {
                visit(idx - 1);
            }
            if j + 1 < r {
                visit(idx + 1);
            }
        }
        count += 1;
    }
    PatchLabels {
        resolution: r,
        labels,
        count: count as usize,
    }
}

/// Triangles of the cell rule as pixel triplets, in cell raster order with
/// the upper triangle of a cell before the lower one.
pub fn cell_triangles(img: &ObjectImage) -> Vec<[(usize, usize); 3]> {
    let r = img.resolution();
    let occ = img.occupancy();
    let at = |i: usize, j: usize| occ[i * r + j];
    let mut out = Vec::new();
    for i in 0..r.saturating_sub(1) {
        for j in 0..r - 1 {
            let (b, c) = (at(i, j + 1), at(i + 1, j));
            if !(b && c) {
                continue;
            }
            if at(i, j) {
                out.push([(i, j), (i, j + 1), (i + 1, j)]);
            }
            if at(i + 1, j + 1) {
                out.push([(i + 1, j + 1), (i, j + 1), (i + 1, j)]);
            }
        }
    }
    out
}

/// Decodes `img` into a mesh in the normalized unit frame.
pub fn remesh(img: &ObjectImage) -> Result<DecodedMesh> {
    if img.occupied_count() == 0 {
        return Err(Error::EmptyImage);
    }
    let r = img.resolution();
    let cells = cell_triangles(img);

    let mut vertex_of = vec![u32::MAX; r * r];
    for tri in &cells {
        for &(i, j) in tri {
            vertex_of[i * r + j] = 0;
        }
    }
    let labels = label_patches(img);
    let mut decoded = DecodedMesh {
        mesh: IndexedMesh::default(),
        pixels: Vec::new(),
        patch_label: Vec::new(),
        normals: Vec::new(),
        albedo: Vec::new(),
        metalness: Vec::new(),
        roughness: Vec::new(),
        frame: None,
    };
    let mut next = 0u32;
    for (idx, slot) in vertex_of.iter_mut().enumerate() {
        if *slot == u32::MAX {
            continue;
        }
        *slot = next;
        next += 1;
        let (i, j) = (idx / r, idx % r);
        let px = img.pixel(i, j);
        decoded
            .mesh
            .positions
            .push([px[0] as f64, px[1] as f64, px[2] as f64]);
        decoded
            .mesh
            .uvs
            .push([(j as f64 + 0.5) / r as f64, (i as f64 + 0.5) / r as f64]);
        decoded.pixels.push((i, j));
        decoded
            .patch_label
            .push(labels.labels[idx].expect("vertex pixel is occupied"));
        let n = [
            2.0 * px[NORMAL] as f64 - 1.0,
            2.0 * px[NORMAL + 1] as f64 - 1.0,
            2.0 * px[NORMAL + 2] as f64 - 1.0,
        ];
        decoded.normals.push(normalize(n).unwrap_or([0.0; 3]));
        decoded
            .albedo
            .push([px[ALBEDO], px[ALBEDO + 1], px[ALBEDO + 2]]);
        decoded.metalness.push(px[METALNESS]);
        decoded.roughness.push(px[ROUGHNESS]);
    }
    decoded.mesh.triangles = cells
        .iter()
        .map(|tri| {
            tri.map(|(i, j)| {
                let v = vertex_of[i * r + j];
                Corner::new(v, v)
            })
        })
        .collect();

    if decoded.normals.iter().any(|n| *n == [0.0; 3]) {
        let fallback = uv_oriented_normals(&decoded.mesh);
        for (n, f) in decoded.normals.iter_mut().zip(fallback) {
            if *n == [0.0; 3] {
                *n = f;
            }
        }
    }
    Ok(decoded)
}

/// Area-weighted vertex normals with every face oriented by the sign of its
/// UV-space area. The cell rule emits the two triangles of a cell with
/// opposite windings, so raw face normals would cancel.
fn uv_oriented_normals(mesh: &IndexedMesh) -> Vec<[f64; 3]> {
    let mut acc = vec![[0.0; 3]; mesh.positions.len()];
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.corner_positions(t);
        let [ta, tb, tc] = mesh.corner_uvs(t);
        let uv_area = (tb[0] - ta[0]) * (tc[1] - ta[1]) - (tb[1] - ta[1]) * (tc[0] - ta[0]);
        let sign = if uv_area < 0.0 { -1.0 } else { 1.0 };
        let n = cross(sub(b, a), sub(c, a));
        for corner in &mesh.triangles[t] {
            let slot = &mut acc[corner.position as usize];
            for k in 0..3 {
                slot[k] += sign * n[k];
            }
        }
    }
    acc.into_iter()
        .map(|n| normalize(n).unwrap_or([0.0; 3]))
        .collect()
}

impl DecodedMesh {
    pub fn vertex_count(&self) -> usize {
        self.mesh.positions.len()
    }

    /// Maps positions from the unit frame back to world units.
    pub fn restore_frame(&mut self, frame: NormalizedFrame) {
        if let Some(old) = self.frame.take() {
            for p in &mut self.mesh.positions {
                *p = old.to_unit(*p);
            }
        }
        for p in &mut self.mesh.positions {
            *p = frame.to_world(*p);
        }
        self.frame = Some(frame);
    }

    /// Triangles whose corners carry more than one patch label.
    pub fn cross_patch_triangles(&self) -> usize {
        self.mesh
            .triangles
            .iter()
            .filter(|t| {
                let l = t.map(|c| self.patch_label[c.position as usize]);
                l[0] != l[1] || l[1] != l[2]
            })
            .count()
    }

    pub fn patch_count(&self) -> usize {
        self.patch_label
            .iter()
            .map(|&l| l as usize + 1)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    vertex_count: usize,
    frame: Option<NormalizedFrame>,
    patch_label: &'a [u32],
    normal: &'a [[f64; 3]],
    albedo: &'a [[f32; 3]],
    metalness: &'a [f32],
    roughness: &'a [f32],
}

/// Path of the JSON attribute sidecar written next to a decoded OBJ.
pub fn sidecar_path(obj_path: &Path) -> PathBuf {
    obj_path.with_extension("json")
}

/// Writes the mesh as OBJ and the per-vertex attributes as a JSON sidecar.
pub fn write_decoded(decoded: &DecodedMesh, obj_path: &Path) -> Result<()> {
    write_obj(&decoded.mesh, obj_path)?;
    let sidecar = Sidecar {
        vertex_count: decoded.vertex_count(),
        frame: decoded.frame,
        patch_label: &decoded.patch_label,
        normal: &decoded.normals,
        albedo: &decoded.albedo,
        metalness: &decoded.metalness,
        roughness: &decoded.roughness,
    };
    let path = sidecar_path(obj_path);
    let text = serde_json::to_string(&sidecar).expect("sidecar serializes");
    std::fs::write(&path, text).map_err(|e| Error::io(path, e))
}
