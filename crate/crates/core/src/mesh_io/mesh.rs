use super::material::MaterialSet;

/// One triangle corner: an index into `positions` and one into `uvs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Corner {
    pub position: u32,
    pub uv: u32,
}

impl Corner {
    pub fn new(position: u32, uv: u32) -> Self {
        Corner { position, uv }
    }
}

/// Triangle mesh with per-corner position and UV indices.
///
/// Position and UV arrays are independent so that seams (same position, two
/// UVs) are representable without duplicating geometry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IndexedMesh {
    pub positions: Vec<[f64; 3]>,
    pub uvs: Vec<[f64; 2]>,
    pub triangles: Vec<[Corner; 3]>,
    pub material: Option<MaterialSet>,
}

impl IndexedMesh {
    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn corner_positions(&self, tri: usize) -> [[f64; 3]; 3] {
        let t = &self.triangles[tri];
        [
            self.positions[t[0].position as usize],
            self.positions[t[1].position as usize],
            self.positions[t[2].position as usize],
        ]
    }

    pub fn corner_uvs(&self, tri: usize) -> [[f64; 2]; 3] {
        let t = &self.triangles[tri];
        [
            self.uvs[t[0].uv as usize],
            self.uvs[t[1].uv as usize],
            self.uvs[t[2].uv as usize],
        ]
    }

    /// Area of triangle `tri`: half the norm of the edge cross product.
    pub fn triangle_area(&self, tri: usize) -> f64 {
        let [a, b, c] = self.corner_positions(tri);
        0.5 * norm(cross(sub(b, a), sub(c, a)))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.triangle_area(t))
            .sum()
    }

    /// Indices of triangles whose 3D area is exactly zero.
    pub fn zero_area_triangles(&self) -> Vec<usize> {
        (0..self.triangles.len())
            .filter(|&t| self.triangle_area(t) == 0.0)
            .collect()
    }

    /// Axis-aligned bounds over positions referenced by triangles.
    pub fn bounds(&self) -> Option<([f64; 3], [f64; 3])> {
        let mut iter = self
            .triangles
            .iter()
            .flat_map(|t| t.iter())
            .map(|c| self.positions[c.position as usize]);
        let first = iter.next()?;
        let (mut lo, mut hi) = (first, first);
        for p in iter {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Some((lo, hi))
    }

    /// Checks that every corner index is in range.
    pub fn indices_in_range(&self) -> bool {
        self.triangles.iter().flat_map(|t| t.iter()).all(|c| {
            (c.position as usize) < self.positions.len() && (c.uv as usize) < self.uvs.len()
        })
    }

    /// Area-weighted vertex normals, one per entry of `positions`.
    ///
    /// Positions not referenced by any triangle (or only by zero-area ones)
    /// get a zero vector.
    pub fn vertex_normals(&self) -> Vec<[f64; 3]> {
        let mut acc = vec![[0.0; 3]; self.positions.len()];
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.corner_positions(t);
            // unnormalized cross product is twice the area times the unit normal
            let n = cross(sub(b, a), sub(c, a));
            for corner in &self.triangles[t] {
                let slot = &mut acc[corner.position as usize];
                for k in 0..3 {
                    slot[k] += n[k];
                }
            }
        }
        for n in &mut acc {
            *n = normalize(*n).unwrap_or([0.0; 3]);
        }
        acc
    }
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn normalize(a: [f64; 3]) -> Option<[f64; 3]> {
    let len = norm(a);
    if len > 0.0 && len.is_finite() {
        Some([a[0] / len, a[1] / len, a[2] / len])
    } else {
        None
    }
}
