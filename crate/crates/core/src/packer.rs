//! Axis-aligned shelf packing of UV island bounding boxes.
//!
//! Boxes are sorted by decreasing height and placed left to right into
//! horizontal shelves (next-fit). All islands share one uniform scale, the
//! largest found by bisection for which every box fits inside the unit
//! square with `margin` spacing between boxes and from the border. The
//! finished layout is centered in the unit square.

use serde::{Deserialize, Serialize};

use crate::atlas::UvIsland;
use crate::error::{Error, Result};

pub const BISECTION_ITERS: usize = 32;
/// Width given to bounding boxes that are degenerate along one axis.
pub const DEGENERATE_PAD: f64 = 1e-6;

/// Uniform scale followed by translation, mapping an island's original UVs
/// into its packed location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IslandTransform {
    pub island_id: usize,
    pub scale: f64,
    pub translate: [f64; 2],
}

impl IslandTransform {
    pub fn identity(island_id: usize) -> Self {
        IslandTransform {
            island_id,
            scale: 1.0,
            translate: [0.0, 0.0],
        }
    }

    pub fn apply(&self, uv: [f64; 2]) -> [f64; 2] {
        [
            self.scale * uv[0] + self.translate[0],
            self.scale * uv[1] + self.translate[1],
        ]
    }

    /// The island's bounding box after the transform.
    pub fn transformed_bbox(&self, island: &UvIsland) -> [f64; 4] {
        let lo = self.apply([island.uv_bbox[0], island.uv_bbox[1]]);
        let hi = self.apply([island.uv_bbox[2], island.uv_bbox[3]]);
        [lo[0], lo[1], hi[0], hi[1]]
    }
}

/// Margin between boxes in UV units.
pub fn margin_uv(margin_px: usize, target_res: usize) -> f64 {
    margin_px as f64 / target_res as f64
}

fn box_sizes(islands: &[UvIsland]) -> Result<Vec<[f64; 2]>> {
    islands
        .iter()
        .map(|isl| {
            let (w, h) = (isl.uv_width(), isl.uv_height());
            if !(w > 0.0) && !(h > 0.0) {
                return Err(Error::UnpackableInput {
                    island_id: isl.island_id,
                });
            }
            Ok([w.max(DEGENERATE_PAD), h.max(DEGENERATE_PAD)])
        })
        .collect()
}

/// Indices of `sizes` in shelf order: decreasing height, then input order.
fn shelf_order(sizes: &[[f64; 2]]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| sizes[b][1].total_cmp(&sizes[a][1]).then(a.cmp(&b)));
    order
}

/// Lower-left corner of every box (indexed like `sizes`) for a shelf layout
/// at `scale`, or `None` if the layout does not fit.
fn layout(sizes: &[[f64; 2]], order: &[usize], margin: f64, scale: f64) -> Option<Vec<[f64; 2]>> {
    let limit = 1.0 - margin;
    let mut placed = vec![[0.0; 2]; sizes.len()];
    let (mut x, mut y) = (margin, margin);
    let mut shelf_h = 0.0f64;
    let mut shelf_empty = true;
    for &k in order {
        let (w, h) = (sizes[k][0] * scale, sizes[k][1] * scale);
        if margin + w > limit || margin + h > limit {
            return None;
        }
        if !shelf_empty && x + w > limit {
            y += shelf_h + margin;
            x = margin;
            shelf_h = 0.0;
        }
        if y + h > limit {
            return None;
        }
        placed[k] = [x, y];
        x += w + margin;
        shelf_h = shelf_h.max(h);
        shelf_empty = false;
    }
    Some(placed)
}

/// Whether the shelf layout fits at the given uniform scale.
pub fn fits_at_scale(
    islands: &[UvIsland],
    margin_px: usize,
    target_res: usize,
    scale: f64,
) -> bool {
    let Ok(sizes) = box_sizes(islands) else {
        return false;
    };
    let order = shelf_order(&sizes);
    layout(&sizes, &order, margin_uv(margin_px, target_res), scale).is_some()
}

/// Packs island bounding boxes into the unit square. Returns one transform
/// per input island, in input order.
pub fn pack_aabb(
    islands: &[UvIsland],
    margin_px: usize,
    target_res: usize,
) -> Result<Vec<IslandTransform>> {
    if islands.is_empty() {
        return Ok(Vec::new());
    }
    if target_res == 0 || target_res < 4 * (margin_px + 1) {
        return Err(Error::InvalidConfig(format!(
            "target resolution {target_res} too small for a margin of {margin_px} px"
        )));
    }
    let margin = margin_uv(margin_px, target_res);
    let sizes = box_sizes(islands)?;
    let order = shelf_order(&sizes);

    let inner = 1.0 - 2.0 * margin;
    let largest = sizes.iter().map(|s| s[0].max(s[1])).fold(0.0, f64::max);
    let total_area: f64 = sizes.iter().map(|s| s[0] * s[1]).sum();
    let mut hi = (inner / largest).min(inner / total_area.sqrt());
    let mut lo = 0.0;
    if layout(&sizes, &order, margin, hi).is_some() {
        lo = hi;
    } else {
        for _ in 0..BISECTION_ITERS {
            let mid = 0.5 * (lo + hi);
            if layout(&sizes, &order, margin, mid).is_some() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let scale = lo;
    let placed = match layout(&sizes, &order, margin, scale) {
        Some(p) if scale > 0.0 => p,
        _ => {
            return Err(Error::InvalidConfig(format!(
                "{} islands do not fit with a margin of {margin_px} px at {target_res}",
                islands.len()
            )))
        }
    };

    let mut extent = [margin, margin];
    for (k, p) in placed.iter().enumerate() {
        extent[0] = extent[0].max(p[0] + sizes[k][0] * scale);
        extent[1] = extent[1].max(p[1] + sizes[k][1] * scale);
    }
    let shift = [
        ((1.0 - margin - extent[0]) * 0.5).max(0.0),
        ((1.0 - margin - extent[1]) * 0.5).max(0.0),
    ];

    Ok(islands
        .iter()
        .zip(&placed)
        .map(|(isl, p)| IslandTransform {
            island_id: isl.island_id,
            scale,
            translate: [
                p[0] + shift[0] - scale * isl.uv_bbox[0],
                p[1] + shift[1] - scale * isl.uv_bbox[1],
            ],
        })
        .collect())
}
