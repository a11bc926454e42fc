//! Pixel-center triangle coverage on a fixed-point grid.
//!
//! Vertices are snapped to 1/256 pixel and edge functions are evaluated in
//! exact integer arithmetic, so coverage has no rounding ambiguity. Pixel
//! `(i, j)` (row, column) has its center at `(j + 0.5, i + 0.5)` in pixel
//! units, x along columns and y along rows. Ties on an edge go to the
//! triangle for which that edge is a top or left edge, which makes coverage
//! of triangles sharing an edge disjoint and gap-free.

use std::ops::Range;

pub const SUBPIXEL_BITS: u32 = 8;
pub const SUBPIXEL: i64 = 1 << SUBPIXEL_BITS;
const HALF: i64 = SUBPIXEL / 2;
const LIMIT: f64 = (1u64 << 40) as f64;

/// Snaps a pixel-space coordinate to the fixed-point grid.
pub fn snap(x: f64) -> i64 {
    (x * SUBPIXEL as f64).round().clamp(-LIMIT, LIMIT) as i64
}

#[derive(Debug, Clone)]
pub struct RasterTriangle {
    v: [[i64; 2]; 3],
    bias: [i64; 3],
    pub cols: Range<usize>,
    pub rows: Range<usize>,
}

fn is_top_left(d: [i64; 2]) -> bool {
    d[1] < 0 || (d[1] == 0 && d[0] > 0)
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

impl RasterTriangle {
    /// Sets up a triangle given in pixel units on a `width`×`height` grid.
    /// Returns `None` for triangles with zero snapped area or no overlap
    /// with the grid.
    pub fn new(points: [[f64; 2]; 3], width: usize, height: usize) -> Option<Self> {
        let mut v = points.map(|p| [snap(p[0]), snap(p[1])]);
        let area2 = edge(v[0], v[1], v[2]);
        if area2 == 0 {
            return None;
        }
        if area2 < 0 {
            v.swap(1, 2);
        }
        let mut bias = [0; 3];
        for k in 0..3 {
            let (a, b) = (v[k], v[(k + 1) % 3]);
            bias[k] = is_top_left([b[0] - a[0], b[1] - a[1]]) as i64;
        }
        let axis = |k: usize, limit: usize| -> Range<usize> {
            let lo = v.iter().map(|p| p[k]).min().unwrap();
            let hi = v.iter().map(|p| p[k]).max().unwrap();
            let first = ceil_div(lo - HALF, SUBPIXEL).max(0);
            let last = (hi - HALF).div_euclid(SUBPIXEL).min(limit as i64 - 1);
            if first > last {
                0..0
            } else {
                first as usize..last as usize + 1
            }
        };
        let cols = axis(0, width);
        let rows = axis(1, height);
        if cols.is_empty() || rows.is_empty() {
            return None;
        }
        Some(RasterTriangle {
            v,
            bias,
            cols,
            rows,
        })
    }

    fn center(i: usize, j: usize) -> [i64; 2] {
        [j as i64 * SUBPIXEL + HALF, i as i64 * SUBPIXEL + HALF]
    }

    /// Direct coverage test for one pixel.
    pub fn covers(&self, i: usize, j: usize) -> bool {
        let p = Self::center(i, j);
        (0..3).all(|k| edge(self.v[k], self.v[(k + 1) % 3], p) + self.bias[k] > 0)
    }

    /// Calls `f(i, j)` for every covered pixel whose row is in `rows`,
    /// in row-major order. Edge functions are stepped incrementally.
    pub fn for_each_covered(&self, rows: Range<usize>, mut f: impl FnMut(usize, usize)) {
        let r0 = rows.start.max(self.rows.start);
        let r1 = rows.end.min(self.rows.end);
        if r0 >= r1 {
            return;
        }
        let origin = Self::center(r0, self.cols.start);
        let mut row_start = [0i64; 3];
        let mut step_col = [0i64; 3];
        let mut step_row = [0i64; 3];
        for k in 0..3 {
            let (a, b) = (self.v[k], self.v[(k + 1) % 3]);
            row_start[k] = edge(a, b, origin) + self.bias[k];
            step_col[k] = -(b[1] - a[1]) * SUBPIXEL;
            step_row[k] = (b[0] - a[0]) * SUBPIXEL;
        }
        for i in r0..r1 {
            let mut e = row_start;
            for j in self.cols.clone() {
                if e[0] > 0 && e[1] > 0 && e[2] > 0 {
                    f(i, j);
                }
                for k in 0..3 {
                    e[k] += step_col[k];
                }
            }
            for k in 0..3 {
                row_start[k] += step_row[k];
            }
        }
    }

    pub fn covered_pixels(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        self.for_each_covered(self.rows.clone(), |i, j| out.push((i, j)));
        out
    }
}

/// Twice the signed area of (a, b, p).
fn edge(a: [i64; 2], b: [i64; 2], p: [i64; 2]) -> i64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

/// Barycentric coordinates of `p` in the (unsnapped) triangle, or `None`
/// for a degenerate triangle.
pub fn barycentric(tri: [[f64; 2]; 3], p: [f64; 2]) -> Option<[f64; 3]> {
    let [a, b, c] = tri;
    let area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    if area == 0.0 || !area.is_finite() {
        return None;
    }
    let w0 = ((b[0] - p[0]) * (c[1] - p[1]) - (b[1] - p[1]) * (c[0] - p[0])) / area;
    let w1 = ((c[0] - p[0]) * (a[1] - p[1]) - (c[1] - p[1]) * (a[0] - p[0])) / area;
    Some([w0, w1, 1.0 - w0 - w1])
}
