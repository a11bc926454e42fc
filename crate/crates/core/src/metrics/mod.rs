//! Representation fidelity: Chamfer distance, occupancy, open-boundary
//! length and seam gaps.

mod kdtree;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use kdtree::KdTree;

use crate::baker::NormalizedFrame;
use crate::error::{Error, Result};
use crate::mesh_io::{omg_file_size, IndexedMesh, ObjectImage};
use crate::remesher::{remesh, DecodedMesh};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    /// Symmetric mean of squared nearest-neighbour distances, model units².
    pub chamfer: f64,
    pub occupancy_ratio: f64,
    /// Total length of edges used by exactly one triangle, model units.
    pub open_boundary_length: f64,
    pub patch_count: usize,
    pub cross_patch_triangles: usize,
    /// Size of the OMG1 encoding.
    pub byte_size: usize,
    pub sample_count: usize,
    /// Mean distance from a boundary vertex to the nearest boundary vertex
    /// of a different patch, model units.
    pub boundary_gap: f64,
}

/// Draws `n` points uniformly over the surface: triangles are picked in
/// proportion to area, then a point is sampled uniformly inside.
pub fn sample_surface(mesh: &IndexedMesh, n: usize, seed: u64) -> Result<Vec<[f64; 3]>> {
    if n == 0 {
        return Err(Error::InvalidConfig("sample count must be positive".into()));
    }
    let mut cdf = Vec::with_capacity(mesh.triangles.len());
    let mut total = 0.0;
    for t in 0..mesh.triangles.len() {
        total += mesh.triangle_area(t);
        cdf.push(total);
    }
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::ZeroArea);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let last = cdf.len() - 1;
    Ok((0..n)
        .map(|_| {
            let target = rng.random::<f64>() * total;
            let t = cdf.partition_point(|&c| c <= target).min(last);
            let [a, b, c] = mesh.corner_positions(t);
            let r1 = rng.random::<f64>().sqrt();
            let r2 = rng.random::<f64>();
            let (wa, wb, wc) = (1.0 - r1, r1 * (1.0 - r2), r1 * r2);
            [
                wa * a[0] + wb * b[0] + wc * c[0],
                wa * a[1] + wb * b[1] + wc * c[1],
                wa * a[2] + wb * b[2] + wc * c[2],
            ]
        })
        .collect())
}

/// Spreads the low 21 bits of `x` to every third bit.
fn spread3(x: u64) -> u64 {
    let mut x = x & 0x1f_ffff;
    x = (x | x << 32) & 0x1f00000000ffff;
    x = (x | x << 16) & 0x1f0000ff0000ff;
    x = (x | x << 8) & 0x100f00f00f00f00f;
    x = (x | x << 4) & 0x10c30c30c30c30c3;
    (x | x << 2) & 0x1249249249249249
}

/// Indices of `points` sorted along a Morton curve over their bounding box.
fn morton_order(points: &[[f64; 3]]) -> Vec<usize> {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let cells = ((1u64 << 21) - 1) as f64;
    let code = |p: &[f64; 3]| {
        (0..3).fold(0u64, |acc, k| {
            let span = hi[k] - lo[k];
            let t = if span > 0.0 {
                (p[k] - lo[k]) / span
            } else {
                0.0
            };
            acc | spread3((t * cells) as u64) << k
        })
    };
    let mut keyed: Vec<(u64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (code(p), i))
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Mean squared distance from each point of `from` to its nearest point in
/// `to`. Queries run in parallel in Morton order for locality; the sum is
/// taken in input order so the result does not depend on scheduling.
pub fn directed_chamfer(from: &[[f64; 3]], to: &[[f64; 3]]) -> f64 {
    let tree = KdTree::new(to);
    let order = morton_order(from);
    let found: Vec<f64> = order
        .par_iter()
        .map(|&i| tree.nearest_sq(from[i]))
        .collect();
    let mut d = vec![0.0; from.len()];
    for (&i, v) in order.iter().zip(found) {
        d[i] = v;
    }
    d.iter().sum::<f64>() / from.len() as f64
}

/// Symmetric squared Chamfer distance.
///
/// # Panics
/// If either cloud is empty.
pub fn chamfer(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    assert!(
        !a.is_empty() && !b.is_empty(),
        "chamfer needs two non-empty clouds"
    );
    directed_chamfer(a, b) + directed_chamfer(b, a)
}

/// Edges used by exactly one triangle, as sorted position-index pairs in
/// ascending order.
pub fn open_boundary_edges(mesh: &IndexedMesh) -> Vec<(u32, u32)> {
    let mut uses: HashMap<(u32, u32), u32> = HashMap::new();
    for t in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (t[k].position, t[(k + 1) % 3].position);
            *uses.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut edges: Vec<(u32, u32)> = uses
        .into_iter()
        .filter(|&(_, n)| n == 1)
        .map(|(e, _)| e)
        .collect();
    edges.sort_unstable();
    edges
}

/// Total length of the open-boundary edges.
pub fn open_boundary_length(mesh: &IndexedMesh) -> f64 {
    open_boundary_edges(mesh)
        .iter()
        .map(|&(a, b)| {
            let (p, q) = (mesh.positions[a as usize], mesh.positions[b as usize]);
            ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
        })
        .fold(0.0, |acc, l| acc + l)
}

/// Mean distance from each boundary vertex to the closest boundary vertex
/// carrying another patch label. Zero when fewer than two patches have a
/// boundary.
pub fn boundary_gap(decoded: &DecodedMesh) -> f64 {
    let mut on_boundary = vec![false; decoded.vertex_count()];
    for (a, b) in open_boundary_edges(&decoded.mesh) {
        on_boundary[a as usize] = true;
        on_boundary[b as usize] = true;
    }
    let ids: Vec<usize> = (0..on_boundary.len()).filter(|&v| on_boundary[v]).collect();
    let pts: Vec<[f64; 3]> = ids.iter().map(|&v| decoded.mesh.positions[v]).collect();
    let labels: Vec<u32> = ids.iter().map(|&v| decoded.patch_label[v]).collect();
    if labels.iter().all(|&l| Some(&l) == labels.first()) {
        return 0.0;
    }
    let tree = KdTree::new(&pts);
    let d: Vec<f64> = (0..pts.len())
        .into_par_iter()
        .map(|k| {
            tree.nearest_where(pts[k], |m| labels[m] != labels[k])
                .map_or(0.0, |(_, d2)| d2.sqrt())
        })
        .collect();
    d.iter().sum::<f64>() / d.len() as f64
}

/// Decodes `img`, restores world units and compares it against `original`
/// with `n` surface samples per mesh.
pub fn fidelity(
    original: &IndexedMesh,
    img: &ObjectImage,
    frame: &NormalizedFrame,
    n: usize,
    seed: u64,
) -> Result<FidelityReport> {
    let mut decoded = remesh(img)?;
    decoded.restore_frame(*frame);
    fidelity_decoded(original, img, &decoded, n, seed)
}

/// [`fidelity`] for an already decoded, world-unit mesh.
pub fn fidelity_decoded(
    original: &IndexedMesh,
    img: &ObjectImage,
    decoded: &DecodedMesh,
    n: usize,
    seed: u64,
) -> Result<FidelityReport> {
    let a = sample_surface(original, n, seed)?;
    let b = sample_surface(&decoded.mesh, n, seed.wrapping_add(1))?;
    Ok(FidelityReport {
        chamfer: chamfer(&a, &b),
        occupancy_ratio: img.occupancy_ratio(),
        open_boundary_length: open_boundary_length(&decoded.mesh),
        patch_count: decoded.patch_count(),
        cross_patch_triangles: decoded.cross_patch_triangles(),
        byte_size: omg_file_size(img.resolution()),
        sample_count: n,
        boundary_gap: boundary_gap(decoded),
    })
}

/// Formats with 6 significant digits, like C's `%g`.
pub fn format_g6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..6).contains(&exp) {
        trim(&format!("{x:.*}", (5 - exp) as usize))
    } else {
        format!(
            "{}e{}{:02}",
            trim(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

/// One `x y z` line per point.
pub fn xyz_string(points: &[[f64; 3]]) -> String {
    let mut s = String::with_capacity(points.len() * 30);
    for p in points {
        let _ = writeln!(
            s,
            "{} {} {}",
            format_g6(p[0]),
            format_g6(p[1]),
            format_g6(p[2])
        );
    }
    s
}

pub fn write_xyz(points: &[[f64; 3]], path: &Path) -> Result<()> {
    std::fs::write(path, xyz_string(points)).map_err(|e| Error::io(path, e))
}
