//! UV atlas repair: vertex merging, island extraction, top-K selection and
//! validation.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::mesh_io::{Corner, IndexedMesh};
use crate::raster::RasterTriangle;
use crate::union_find::UnionFind;

/// Relative 3D merge tolerance, scaled by the bounding-box diagonal.
pub const MERGE_EPS_3D_REL: f64 = 1e-6;
pub const MERGE_EPS_UV: f64 = 1e-6;
/// Default cap on retained islands.
pub const DEFAULT_MAX_PATCHES: usize = 64;
/// Grid used for the per-island self-overlap test.
pub const OVERLAP_GRID: usize = 256;

/// One UV chart: a connected set of triangles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UvIsland {
    pub island_id: usize,
    /// Ascending triangle indices into the source mesh.
    pub triangle_ids: Vec<usize>,
    /// `[min_u, min_v, max_u, max_v]`
    pub uv_bbox: [f64; 4],
    pub area3d: f64,
}

impl UvIsland {
    pub fn uv_width(&self) -> f64 {
        self.uv_bbox[2] - self.uv_bbox[0]
    }

    pub fn uv_height(&self) -> f64 {
        self.uv_bbox[3] - self.uv_bbox[1]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AtlasReport {
    pub island_count: usize,
    pub dropped_island_ids: Vec<usize>,
    pub dropped_area_fraction: f64,
    pub self_overlap_detected: bool,
    pub out_of_bounds_uv_count: usize,
}

impl AtlasReport {
    /// Combines a validation report with a selection report.
    pub fn with_selection(mut self, selection: &AtlasReport) -> Self {
        self.dropped_island_ids = selection.dropped_island_ids.clone();
        self.dropped_area_fraction = selection.dropped_area_fraction;
        self
    }
}

/// Merge tolerances for `mesh`: `(1e-6 × bbox diagonal, 1e-6)`.
pub fn default_merge_eps(mesh: &IndexedMesh) -> (f64, f64) {
    let diag = mesh
        .bounds()
        .map(|(lo, hi)| {
            ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2) + (hi[2] - lo[2]).powi(2)).sqrt()
        })
        .unwrap_or(0.0);
    (MERGE_EPS_3D_REL * diag, MERGE_EPS_UV)
}

fn cell_key(p: [f64; 3], eps: f64) -> [i64; 3] {
    if eps > 0.0 {
        p.map(|x| (x / eps).floor() as i64)
    } else {
        p.map(|x| x.to_bits() as i64)
    }
}

fn within(a: &[f64], b: &[f64], eps: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= eps)
}

/// Remaps corners whose position and UV both lie within tolerance
/// (per-coordinate) of another corner onto one canonical `(position, uv)`
/// pair. Clusters are the transitive closure of that relation; the
/// canonical pair is the one that appears first in corner order.
///
/// Position and UV arrays are left untouched; only corner indices change.
pub fn merge_coincident_vertices(mesh: &IndexedMesh, eps3d: f64, eps_uv: f64) -> IndexedMesh {
    let mut pair_index: HashMap<Corner, usize> = HashMap::new();
    let mut pairs: Vec<Corner> = Vec::new();
    for c in mesh.triangles.iter().flat_map(|t| t.iter()) {
        pair_index.entry(*c).or_insert_with(|| {
            pairs.push(*c);
            pairs.len() - 1
        });
    }

    let mut uf = UnionFind::new(pairs.len());
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let exact = !(eps3d > 0.0);
    for (k, c) in pairs.iter().enumerate() {
        let p = mesh.positions[c.position as usize];
        let t = mesh.uvs[c.uv as usize];
        let key = cell_key(p, eps3d);
        let visit = |cell: &[i64; 3], uf: &mut UnionFind| {
            if let Some(members) = grid.get(cell) {
                for &m in members {
                    let other = pairs[m];
                    if within(&mesh.positions[other.position as usize], &p, eps3d)
                        && within(&mesh.uvs[other.uv as usize], &t, eps_uv)
                    {
                        uf.union(m, k);
                    }
                }
            }
        };
        if exact {
            visit(&key, &mut uf);
        } else {
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        visit(&[key[0] + dx, key[1] + dy, key[2] + dz], &mut uf);
                    }
                }
            }
        }
        grid.entry(key).or_default().push(k);
    }

    let mut out = mesh.clone();
    for tri in &mut out.triangles {
        for c in tri.iter_mut() {
            let root = uf.find(pair_index[c]);
            *c = pairs[root];
        }
    }
    out
}

/// [`merge_coincident_vertices`] with [`default_merge_eps`].
pub fn merge_default(mesh: &IndexedMesh) -> IndexedMesh {
    let (e3, euv) = default_merge_eps(mesh);
    merge_coincident_vertices(mesh, e3, euv)
}

/// Orders islands by descending area, then ascending `key`.
fn by_area_then(a_area: f64, a_key: usize, b_area: f64, b_key: usize) -> Ordering {
    b_area.total_cmp(&a_area).then(a_key.cmp(&b_key))
}

/// Connected components of the triangle graph, where two triangles are
/// adjacent when they share a `(position, uv)` corner. Islands come back
/// sorted by descending 3D area (ties: smallest triangle index) and
/// `island_id` is the position in that order.
pub fn extract_islands(mesh: &IndexedMesh) -> Vec<UvIsland> {
    let n = mesh.triangles.len();
    let mut uf = UnionFind::new(n);
    let mut owner: HashMap<Corner, usize> = HashMap::with_capacity(n * 2);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for c in tri {
            match owner.get(c) {
                Some(&first) => uf.union(first, t),
                None => {
                    owner.insert(*c, t);
                }
            }
        }
    }

    // roots are component minima, so grouping in triangle order yields
    // ascending triangle lists
    let mut slot_of_root: HashMap<usize, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for t in 0..n {
        let root = uf.find(t);
        let slot = *slot_of_root.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[slot].push(t);
    }

    let mut islands: Vec<UvIsland> = groups
        .into_iter()
        .map(|triangle_ids| {
            let mut bbox = [
                f64::INFINITY,
                f64::INFINITY,
                f64::NEG_INFINITY,
                f64::NEG_INFINITY,
            ];
            let mut area = 0.0;
            for &t in &triangle_ids {
                area += mesh.triangle_area(t);
                for uv in mesh.corner_uvs(t) {
                    bbox[0] = bbox[0].min(uv[0]);
                    bbox[1] = bbox[1].min(uv[1]);
                    bbox[2] = bbox[2].max(uv[0]);
                    bbox[3] = bbox[3].max(uv[1]);
                }
            }
            UvIsland {
                island_id: 0,
                triangle_ids,
                uv_bbox: bbox,
                area3d: area,
            }
        })
        .collect();
    islands.sort_by(|a, b| by_area_then(a.area3d, a.triangle_ids[0], b.area3d, b.triangle_ids[0]));
    for (id, island) in islands.iter_mut().enumerate() {
        island.island_id = id;
    }
    islands
}

/// Keeps the `k` largest islands by 3D area (ties: lower `island_id`).
/// `k` is treated as at least 1.
pub fn select_top_k(islands: &[UvIsland], k: usize) -> (Vec<UvIsland>, AtlasReport) {
    let k = k.max(1);
    let mut sorted: Vec<&UvIsland> = islands.iter().collect();
    sorted.sort_by(|a, b| by_area_then(a.area3d, a.island_id, b.area3d, b.island_id));
    let split = k.min(sorted.len());
    let kept: Vec<UvIsland> = sorted[..split].iter().map(|&i| i.clone()).collect();
    let dropped = &sorted[split..];
    let total: f64 = islands.iter().map(|i| i.area3d).sum();
    let dropped_area: f64 = dropped.iter().map(|i| i.area3d).sum();
    let report = AtlasReport {
        island_count: islands.len(),
        dropped_island_ids: dropped.iter().map(|i| i.island_id).collect(),
        // an empty float sum is -0.0
        dropped_area_fraction: if total > 0.0 && !dropped.is_empty() {
            dropped_area / total
        } else {
            0.0
        },
        ..Default::default()
    };
    (kept, report)
}

/// Counts out-of-range UV corners and detects intra-island self-overlap by
/// rasterizing each island alone (fit to a 256² grid) and looking for a
/// pixel center covered by two of its triangles. Overlap between different
/// islands is not reported; repacking separates islands.
pub fn validate_atlas(mesh: &IndexedMesh) -> AtlasReport {
    let islands = extract_islands(mesh);
    let out_of_bounds_uv_count = mesh
        .triangles
        .iter()
        .flat_map(|t| t.iter())
        .filter(|c| {
            let uv = mesh.uvs[c.uv as usize];
            !(0.0..=1.0).contains(&uv[0]) || !(0.0..=1.0).contains(&uv[1])
        })
        .count();
    let self_overlap_detected = islands.iter().any(|isl| island_self_overlaps(mesh, isl));
    AtlasReport {
        island_count: islands.len(),
        self_overlap_detected,
        out_of_bounds_uv_count,
        ..Default::default()
    }
}

/// Self-overlap test for a single island at [`OVERLAP_GRID`] resolution.
pub fn island_self_overlaps(mesh: &IndexedMesh, island: &UvIsland) -> bool {
    let size = island.uv_width().max(island.uv_height());
    if !(size > 0.0) || !size.is_finite() {
        return false;
    }
    let scale = OVERLAP_GRID as f64 / size;
    let mut hits = vec![false; OVERLAP_GRID * OVERLAP_GRID];
    for &t in &island.triangle_ids {
        let uv = mesh.corner_uvs(t).map(|p| {
            [
                (p[0] - island.uv_bbox[0]) * scale,
                (p[1] - island.uv_bbox[1]) * scale,
            ]
        });
        let Some(tri) = RasterTriangle::new(uv, OVERLAP_GRID, OVERLAP_GRID) else {
            continue;
        };
        let mut overlap = false;
        tri.for_each_covered(tri.rows.clone(), |i, j| {
            let h = &mut hits[i * OVERLAP_GRID + j];
            overlap |= *h;
            *h = true;
        });
        if overlap {
            return true;
        }
    }
    false
}
