//! Block downsampling of object images.
//!
//! [`sparse_pool`] snaps patch contours: a block that contains boundary
//! pixels takes the mean of those pixels only, so low-resolution boundary
//! samples stay on the high-resolution contour. [`naive_pool`] is the plain
//! occupied-pixel mean used as a baseline.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh_io::{ObjectImage, ALPHA, CHANNELS, POSITION};

/// Block occupancy threshold: a low-resolution pixel is occupied when the
/// fraction of occupied source pixels is above zero.
pub const OCCUPANCY_TAU: f64 = 0.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMask {
    pub resolution: usize,
    /// Row-major.
    pub mask: Vec<bool>,
}

impl BoundaryMask {
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.resolution + j]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}

/// An occupied pixel is on the boundary when one of its 4-neighbours is
/// unoccupied or outside the image.
pub fn detect_boundary(img: &ObjectImage) -> BoundaryMask {
    let r = img.resolution();
    let occ = img.occupancy();
    let at = |i: isize, j: isize| -> bool {
        i >= 0 && j >= 0 && (i as usize) < r && (j as usize) < r && occ[i as usize * r + j as usize]
    };
    let mask = (0..r * r)
        .map(|idx| {
            let (i, j) = ((idx / r) as isize, (idx % r) as isize);
            occ[idx] && !(at(i - 1, j) && at(i + 1, j) && at(i, j - 1) && at(i, j + 1))
        })
        .collect();
    BoundaryMask {
        resolution: r,
        mask,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Sparse,
    Naive,
}

fn check_divisible(img: &ObjectImage, r_low: usize) -> Result<usize> {
    let r = img.resolution();
    if r_low == 0 || r % r_low != 0 {
        return Err(Error::NotDivisible {
            resolution: r,
            low: r_low,
        });
    }
    Ok(r / r_low)
}

/// Downsamples to `r_low` with boundary snapping.
///
/// Per block: the mean of boundary pixels if there are any, otherwise the
/// mean of occupied pixels, otherwise zero. α is 1 when the block's occupied
/// fraction exceeds [`OCCUPANCY_TAU`].
pub fn sparse_pool(img: &ObjectImage, r_low: usize) -> Result<ObjectImage> {
    pool(img, r_low, Mode::Sparse)
}

/// Downsamples to `r_low` taking the mean over all occupied pixels of each
/// block. Same α rule as [`sparse_pool`].
pub fn naive_pool(img: &ObjectImage, r_low: usize) -> Result<ObjectImage> {
    pool(img, r_low, Mode::Naive)
}

fn pool(img: &ObjectImage, r_low: usize, mode: Mode) -> Result<ObjectImage> {
    let block = check_divisible(img, r_low)?;
    let r = img.resolution();
    let boundary = match mode {
        Mode::Sparse => Some(detect_boundary(img)),
        Mode::Naive => None,
    };
    let src = img.data();
    let mut out = ObjectImage::new(r_low);
    out.data_mut()
        .par_chunks_mut(r_low * CHANNELS)
        .enumerate()
        .for_each(|(bi, row)| {
            for bj in 0..r_low {
                let mut occupied = 0usize;
                let mut sum_occ = [0.0f64; CHANNELS];
                let mut on_edge = 0usize;
                let mut sum_edge = [0.0f64; CHANNELS];
                // row-major within the block
                for i in bi * block..(bi + 1) * block {
                    for j in bj * block..(bj + 1) * block {
                        let idx = i * r + j;
                        let px = &src[idx * CHANNELS..(idx + 1) * CHANNELS];
                        if px[ALPHA] == 0.0 {
                            continue;
                        }
                        occupied += 1;
                        for c in 0..CHANNELS {
                            sum_occ[c] += px[c] as f64;
                        }
                        if boundary.as_ref().is_some_and(|b| b.mask[idx]) {
                            on_edge += 1;
                            for c in 0..CHANNELS {
                                sum_edge[c] += px[c] as f64;
                            }
                        }
                    }
                }
                let fraction = occupied as f64 / (block * block) as f64;
                if occupied == 0 || fraction <= OCCUPANCY_TAU {
                    continue;
                }
                let (sum, n) = if on_edge > 0 {
                    (&sum_edge, on_edge)
                } else {
                    (&sum_occ, occupied)
                };
                let dst = &mut row[bj * CHANNELS..(bj + 1) * CHANNELS];
                for c in 0..CHANNELS {
                    dst[c] = (sum[c] / n as f64) as f32;
                }
                for v in &mut dst[POSITION..POSITION + 3] {
                    *v = v.clamp(0.0, 1.0);
                }
                dst[ALPHA] = 1.0;
            }
        });
    Ok(out)
}
