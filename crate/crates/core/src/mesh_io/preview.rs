use std::fs;
use std::path::Path;

use image::{Rgb, RgbImage};

use super::omage::{ObjectImage, ALBEDO, NORMAL, POSITION};
use crate::error::{Error, Result};

pub const PREVIEW_FILES: [&str; 3] = ["geometry.png", "albedo.png", "normal.png"];

/// 8-bit quantizer: `round(v * 255)` with halves rounded up, clamped.
pub fn quantize(v: f32) -> u8 {
    (v as f64 * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Renders three channels starting at `first` into an RGB image. Unoccupied
/// pixels stay black.
pub fn render_channels(img: &ObjectImage, first: usize) -> RgbImage {
    let r = img.resolution() as u32;
    RgbImage::from_fn(r, r, |x, y| {
        let px = img.pixel(y as usize, x as usize);
        if !img.occupied(y as usize, x as usize) {
            return Rgb([0, 0, 0]);
        }
        Rgb([
            quantize(px[first]),
            quantize(px[first + 1]),
            quantize(px[first + 2]),
        ])
    })
}

/// Writes `geometry.png` (xyz as rgb), `albedo.png` and `normal.png` into
/// `dir`, creating it if needed.
pub fn write_previews(img: &ObjectImage, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, first) in PREVIEW_FILES.iter().zip([POSITION, ALBEDO, NORMAL]) {
        let path = dir.join(name);
        render_channels(img, first)
            .save(&path)
            .map_err(|e| Error::Png {
                path: path.clone(),
                message: e.to_string(),
            })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_io::omage::ALPHA;

    #[test]
    fn quantizer_recovers_every_level() {
        for k in 0..=255u32 {
            assert_eq!(quantize(k as f32 / 255.0) as u32, k);
        }
    }

    #[test]
    fn mid_gray_rounds_half_up() {
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(-0.2), 0);
        assert_eq!(quantize(1.7), 255);
    }

    #[test]
    fn geometry_channel_mapping() {
        let mut img = ObjectImage::new(2);
        let px = img.pixel_mut(0, 1);
        px[0] = 1.0;
        px[ALPHA] = 1.0;
        let px = img.pixel_mut(1, 1);
        px[..3].copy_from_slice(&[0.5, 0.5, 0.5]);
        px[ALPHA] = 1.0;
        let geo = render_channels(&img, POSITION);
        assert_eq!(geo.get_pixel(1, 0), &Rgb([255, 0, 0]));
        assert_eq!(geo.get_pixel(1, 1), &Rgb([128, 128, 128]));
        assert_eq!(geo.get_pixel(0, 0), &Rgb([0, 0, 0]));
        for first in [ALBEDO, NORMAL] {
            assert_eq!(
                render_channels(&img, first).get_pixel(0, 0),
                &Rgb([0, 0, 0])
            );
        }
    }

    #[test]
    fn writes_three_pngs() {
        let dir = tempfile::tempdir().unwrap();
        write_previews(&ObjectImage::new(4), dir.path()).unwrap();
        for name in PREVIEW_FILES {
            let back = image::open(dir.path().join(name)).unwrap().to_rgb8();
            assert_eq!(back.dimensions(), (4, 4));
        }
    }
}
