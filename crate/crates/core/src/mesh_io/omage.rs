/// Number of channels per pixel.
pub const CHANNELS: usize = 12;

pub const POSITION: usize = 0;
pub const ALPHA: usize = 3;
pub const NORMAL: usize = 4;
pub const ALBEDO: usize = 7;
pub const METALNESS: usize = 10;
pub const ROUGHNESS: usize = 11;

/// A square R×R grid of 12-channel pixels, stored row-major and
/// channel-interleaved: `[px,py,pz, α, nx,ny,nz, ar,ag,ab, metal, rough]`.
///
/// Row `i` runs along the v axis and column `j` along u; the pixel center of
/// `(i, j)` sits at `((j + 0.5) / R, (i + 0.5) / R)` in UV space.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectImage {
    resolution: usize,
    data: Vec<f32>,
}

impl ObjectImage {
    pub fn new(resolution: usize) -> Self {
        ObjectImage {
            resolution,
            data: vec![0.0; resolution * resolution * CHANNELS],
        }
    }

    /// Wraps raw channel data. Panics if the length does not match.
    pub fn from_raw(resolution: usize, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), resolution * resolution * CHANNELS);
        ObjectImage { resolution, data }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_raw(self) -> Vec<f32> {
        self.data
    }

    pub fn pixel(&self, i: usize, j: usize) -> &[f32] {
        let o = (i * self.resolution + j) * CHANNELS;
        &self.data[o..o + CHANNELS]
    }

    pub fn pixel_mut(&mut self, i: usize, j: usize) -> &mut [f32] {
        let o = (i * self.resolution + j) * CHANNELS;
        &mut self.data[o..o + CHANNELS]
    }

    pub fn occupied(&self, i: usize, j: usize) -> bool {
        self.pixel(i, j)[ALPHA] != 0.0
    }

    pub fn position(&self, i: usize, j: usize) -> [f32; 3] {
        let p = self.pixel(i, j);
        [p[0], p[1], p[2]]
    }

    /// Row-major occupancy mask.
    pub fn occupancy(&self) -> Vec<bool> {
        self.data
            .chunks_exact(CHANNELS)
            .map(|p| p[ALPHA] != 0.0)
            .collect()
    }

    pub fn occupied_count(&self) -> usize {
        self.data
            .chunks_exact(CHANNELS)
            .filter(|p| p[ALPHA] != 0.0)
            .count()
    }

    pub fn occupancy_ratio(&self) -> f64 {
        if self.resolution == 0 {
            return 0.0;
        }
        self.occupied_count() as f64 / (self.resolution * self.resolution) as f64
    }

    /// Checks the representation invariants: α ∈ {0,1}, unoccupied pixels
    /// all-zero, every channel finite and in [0,1].
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (idx, px) in self.data.chunks_exact(CHANNELS).enumerate() {
            let (i, j) = (idx / self.resolution, idx % self.resolution);
            let alpha = px[ALPHA];
            if alpha != 0.0 && alpha != 1.0 {
                return Err(format!("pixel ({i},{j}) has alpha {alpha}"));
            }
            if alpha == 0.0 && px.iter().any(|&v| v != 0.0) {
                return Err(format!("unoccupied pixel ({i},{j}) has nonzero channels"));
            }
            if px.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(format!("pixel ({i},{j}) has a channel outside [0,1]"));
            }
        }
        Ok(())
    }
}
