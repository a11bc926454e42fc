use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_ALBEDO: [f32; 3] = [0.8, 0.8, 0.8];
pub const DEFAULT_METALNESS: f32 = 0.0;
pub const DEFAULT_ROUGHNESS: f32 = 0.5;

/// A decoded raster map with 1 or 3 channels, values in [0,1].
///
/// Row 0 is the top row of the source image; UV `v = 1` maps to the top.
#[derive(Debug, Clone, PartialEq)]
pub struct Texture {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

/// How a PNG is decoded into a [`Texture`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextureKind {
    /// sRGB color decoded to linear RGB.
    Albedo,
    /// Linear RGB.
    Normal,
    /// Linear single channel, taken from the red channel.
    Scalar,
}

impl Texture {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Self {
        assert!(channels == 1 || channels == 3);
        assert_eq!(data.len(), width * height * channels);
        Texture {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn constant(value: &[f32]) -> Self {
        Texture::new(1, 1, value.len(), value.to_vec())
    }

    pub fn load(path: &Path, kind: TextureKind) -> Result<Self> {
        let img = image::open(path).map_err(|e| Error::Png {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let rgb = img.to_rgb32f();
        let (w, h) = (rgb.width() as usize, rgb.height() as usize);
        let raw = rgb.into_raw();
        let data = match kind {
            TextureKind::Albedo => raw.iter().map(|&c| srgb_to_linear(c)).collect(),
            TextureKind::Normal => raw.iter().map(|&c| c.clamp(0.0, 1.0)).collect(),
            TextureKind::Scalar => raw
                .chunks_exact(3)
                .map(|px| px[0].clamp(0.0, 1.0))
                .collect(),
        };
        let channels = if kind == TextureKind::Scalar { 1 } else { 3 };
        Ok(Texture::new(w, h, channels, data))
    }

    fn texel(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Bilinear lookup with repeat wrapping of the UV and clamp-to-edge
    /// neighbour texels.
    pub fn sample(&self, uv: [f64; 2], out: &mut [f32]) {
        let u = uv[0] - uv[0].floor();
        let v = uv[1] - uv[1].floor();
        let x = u * self.width as f64 - 0.5;
        let y = (1.0 - v) * self.height as f64 - 0.5;
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let clamp_x = |i: f64| i.clamp(0.0, (self.width - 1) as f64) as usize;
        let clamp_y = |i: f64| i.clamp(0.0, (self.height - 1) as f64) as usize;
        let (xa, xb) = (clamp_x(x0), clamp_x(x0 + 1.0));
        let (ya, yb) = (clamp_y(y0), clamp_y(y0 + 1.0));
        for (c, slot) in out.iter_mut().enumerate().take(self.channels) {
            let top = self.texel(xa, ya, c) as f64 * (1.0 - fx) + self.texel(xb, ya, c) as f64 * fx;
            let bottom =
                self.texel(xa, yb, c) as f64 * (1.0 - fx) + self.texel(xb, yb, c) as f64 * fx;
            *slot = (top * (1.0 - fy) + bottom * fy).clamp(0.0, 1.0) as f32;
        }
    }
}

pub fn srgb_to_linear(c: f32) -> f32 {
    let c = c.clamp(0.0, 1.0);
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

/// Source PBR maps sampled during baking. Absent maps fall back to the
/// `DEFAULT_*` constants; an absent normal map means geometric normals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaterialSet {
    pub albedo: Option<Texture>,
    pub normal: Option<Texture>,
    pub metalness: Option<Texture>,
    pub roughness: Option<Texture>,
}

impl MaterialSet {
    pub fn albedo_at(&self, uv: [f64; 2]) -> [f32; 3] {
        match &self.albedo {
            Some(t) => {
                let mut out = [0.0; 3];
                t.sample(uv, &mut out);
                out
            }
            None => DEFAULT_ALBEDO,
        }
    }

    pub fn metalness_at(&self, uv: [f64; 2]) -> f32 {
        scalar_at(self.metalness.as_ref(), uv, DEFAULT_METALNESS)
    }

    pub fn roughness_at(&self, uv: [f64; 2]) -> f32 {
        scalar_at(self.roughness.as_ref(), uv, DEFAULT_ROUGHNESS)
    }

    /// Object-space normal decoded as `2c - 1`, or `None` without a map.
    pub fn normal_at(&self, uv: [f64; 2]) -> Option<[f64; 3]> {
        self.normal.as_ref().map(|t| {
            let mut out = [0.0; 3];
            t.sample(uv, &mut out);
            [
                2.0 * out[0] as f64 - 1.0,
                2.0 * out[1] as f64 - 1.0,
                2.0 * out[2] as f64 - 1.0,
            ]
        })
    }
}

fn scalar_at(tex: Option<&Texture>, uv: [f64; 2], default: f32) -> f32 {
    match tex {
        Some(t) => {
            let mut out = [0.0; 1];
            t.sample(uv, &mut out);
            out[0]
        }
        None => default,
    }
}
