//! Synthetic UV-mapped meshes shared by the integration and acceptance
//! suites. Every fixture fits a unit bounding box (longest extent 1).
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use omage::mesh_io::{write_obj, Corner, IndexedMesh};

pub struct Fixture {
    pub name: &'static str,
    pub mesh: IndexedMesh,
}

/// Charts are laid out left to right in UV with a gap between them, so no
/// two charts share or overlap UVs; `build` rescales all UVs into [0,1]².
#[derive(Default)]
pub struct Builder {
    pub mesh: IndexedMesh,
    uv_cursor: f64,
}

const UV_GAP: f64 = 0.05;

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn len(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

impl Builder {
    /// One chart: an `nu`×`nv` grid over `(u, v) ∈ [0,1]²` mapped through
    /// `f`, with UVs spanning `[0, uv_size[0]] × [0, uv_size[1]]`.
    pub fn chart(
        &mut self,
        nu: usize,
        nv: usize,
        uv_size: [f64; 2],
        f: impl Fn(f64, f64) -> [f64; 3],
    ) -> &mut Self {
        let base = self.mesh.positions.len() as u32;
        for b in 0..=nv {
            for a in 0..=nu {
                let (u, v) = (a as f64 / nu as f64, b as f64 / nv as f64);
                self.mesh.positions.push(f(u, v));
                self.mesh
                    .uvs
                    .push([self.uv_cursor + u * uv_size[0], v * uv_size[1]]);
            }
        }
        self.uv_cursor += uv_size[0] + UV_GAP;
        let id = |a: usize, b: usize| base + (b * (nu + 1) + a) as u32;
        for b in 0..nv {
            for a in 0..nu {
                let (p, q, r, s) = (id(a, b), id(a + 1, b), id(a + 1, b + 1), id(a, b + 1));
                self.mesh
                    .triangles
                    .push([p, q, r].map(|k| Corner::new(k, k)));
                self.mesh
                    .triangles
                    .push([p, r, s].map(|k| Corner::new(k, k)));
            }
        }
        self
    }

    /// Flat parallelogram chart with UVs proportional to its edge lengths.
    pub fn quad(&mut self, origin: [f64; 3], e1: [f64; 3], e2: [f64; 3], n: usize) -> &mut Self {
        self.chart(n, n, [len(e1), len(e2)], |u, v| {
            add(origin, add(scale(e1, u), scale(e2, v)))
        })
    }

    /// Axis-aligned box, one chart per face.
    pub fn cuboid(&mut self, lo: [f64; 3], size: [f64; 3], n: usize) -> &mut Self {
        let [x, y, z] = lo;
        let [w, h, d] = size;
        let ex = [w, 0.0, 0.0];
        let ey = [0.0, h, 0.0];
        let ez = [0.0, 0.0, d];
        self.quad([x, y, z], ex, ey, n)
            .quad([x, y, z + d], ex, ey, n)
            .quad([x, y, z], ex, ez, n)
            .quad([x, y + h, z], ex, ez, n)
            .quad([x, y, z], ey, ez, n)
            .quad([x + w, y, z], ey, ez, n)
    }

    /// Open cylinder around the z axis split into `charts` angular charts.
    pub fn cylinder(
        &mut self,
        center: [f64; 2],
        radius: f64,
        height: f64,
        charts: usize,
        segments: usize,
    ) -> &mut Self {
        let span = 2.0 * PI / charts as f64;
        let uv_scale = 1.0 / (span * radius).max(height);
        for c in 0..charts {
            let a0 = c as f64 * span;
            self.chart(
                segments / charts,
                4,
                [span * radius * uv_scale, height * uv_scale],
                |u, v| {
                    let a = a0 + u * span;
                    [
                        center[0] + radius * a.cos(),
                        center[1] + radius * a.sin(),
                        v * height,
                    ]
                },
            );
        }
        self
    }

    pub fn build(&mut self) -> IndexedMesh {
        let mut mesh = std::mem::take(&mut self.mesh);
        let extent = mesh.uvs.iter().fold(0.0f64, |m, t| m.max(t[0]).max(t[1]));
        if extent > 1.0 {
            for t in &mut mesh.uvs {
                *t = [t[0] / extent, t[1] / extent];
            }
        }
        self.uv_cursor = 0.0;
        mesh
    }
}

pub fn plane() -> IndexedMesh {
    Builder::default()
        .quad([0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 4)
        .build()
}

/// Two coplanar rectangles touching along an edge, each its own chart.
pub fn two_patch_plane() -> IndexedMesh {
    Builder::default()
        .quad([0.0; 3], [0.5, 0.0, 0.0], [0.0, 1.0, 0.0], 4)
        .quad([0.5, 0.0, 0.0], [0.5, 0.0, 0.0], [0.0, 1.0, 0.0], 4)
        .build()
}

pub fn tilted_plane() -> IndexedMesh {
    let s = 0.5f64.sqrt();
    Builder::default()
        .quad([0.0; 3], [1.0, 0.0, 0.0], [0.0, 0.6 * s, 0.6 * s], 6)
        .build()
}

pub fn unit_box() -> IndexedMesh {
    Builder::default()
        .cuboid([0.0; 3], [1.0, 1.0, 1.0], 4)
        .build()
}

pub fn thin_box() -> IndexedMesh {
    Builder::default()
        .cuboid([0.0; 3], [1.0, 0.8, 0.1], 4)
        .build()
}

pub fn oblong_box() -> IndexedMesh {
    Builder::default()
        .cuboid([0.0; 3], [1.0, 0.5, 0.25], 4)
        .build()
}

pub fn open_cylinder() -> IndexedMesh {
    Builder::default()
        .cylinder([0.5, 0.5], 0.5, 1.0, 1, 64)
        .build()
}

pub fn split_cylinder() -> IndexedMesh {
    Builder::default()
        .cylinder([0.5, 0.5], 0.5, 1.0, 2, 64)
        .build()
}

/// A thin cushion resting on a seat block: two stacked layers whose
/// contact faces coincide in 3D.
pub fn cushion_on_seat() -> IndexedMesh {
    Builder::default()
        .cuboid([0.0, 0.0, 0.0], [1.0, 0.25, 1.0], 4)
        .cuboid([0.05, 0.25, 0.05], [0.9, 0.1, 0.9], 4)
        .build()
}

pub fn l_shape() -> IndexedMesh {
    Builder::default()
        .cuboid([0.0, 0.0, 0.0], [1.0, 0.3, 0.3], 4)
        .cuboid([0.0, 0.3, 0.0], [0.3, 0.7, 0.3], 4)
        .build()
}

/// The ten-shape roundtrip suite.
pub fn fixtures() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "plane",
            mesh: plane(),
        },
        Fixture {
            name: "two_patch_plane",
            mesh: two_patch_plane(),
        },
        Fixture {
            name: "tilted_plane",
            mesh: tilted_plane(),
        },
        Fixture {
            name: "box",
            mesh: unit_box(),
        },
        Fixture {
            name: "thin_box",
            mesh: thin_box(),
        },
        Fixture {
            name: "oblong_box",
            mesh: oblong_box(),
        },
        Fixture {
            name: "open_cylinder",
            mesh: open_cylinder(),
        },
        Fixture {
            name: "split_cylinder",
            mesh: split_cylinder(),
        },
        Fixture {
            name: "cushion_on_seat",
            mesh: cushion_on_seat(),
        },
        Fixture {
            name: "l_shape",
            mesh: l_shape(),
        },
    ]
}

/// `n` separate square plates on a grid, all with distinct areas. Plate `k`
/// is larger than plate `k + 1`.
pub fn plate_grid(n: usize) -> IndexedMesh {
    let cols = (n as f64).sqrt().ceil() as usize;
    let pitch = 1.0 / cols as f64;
    let mut b = Builder::default();
    for k in 0..n {
        let side = pitch * (0.8 - 0.3 * k as f64 / n as f64);
        let (r, c) = (k / cols, k % cols);
        let origin = [c as f64 * pitch, r as f64 * pitch, 0.0];
        b.quad(origin, [side, 0.0, 0.0], [0.0, side, 0.0], 1);
    }
    b.build()
}

/// Torus with `charts`×`charts` rectangular charts of `cells`×`cells` quads
/// each, so `2·charts²·cells²` triangles.
pub fn torus(charts: usize, cells: usize) -> IndexedMesh {
    let (big, small) = (0.35, 0.15);
    let mut b = Builder::default();
    let span = 2.0 * PI / charts as f64;
    // UV extents follow the mean arc lengths of a chart
    let uv = [big * span, small * span];
    let norm = 1.0 / uv[0].max(uv[1]) / charts as f64;
    for ci in 0..charts {
        for cj in 0..charts {
            b.chart(cells, cells, [uv[0] * norm, uv[1] * norm], |u, v| {
                let theta = (ci as f64 + u) * span;
                let phi = (cj as f64 + v) * span;
                let ring = big + small * phi.cos();
                [
                    0.5 + ring * theta.cos(),
                    0.5 + ring * theta.sin(),
                    0.5 + small * phi.sin(),
                ]
            });
        }
    }
    b.build()
}

/// Writes `mesh` with a PBR material whose four maps are procedural
/// `tex`×`tex` PNGs. Returns the OBJ path.
pub fn write_textured_obj(mesh: &IndexedMesh, dir: &Path, name: &str, tex: u32) -> PathBuf {
    std::fs::create_dir_all(dir).unwrap();
    let obj = dir.join(format!("{name}.obj"));
    write_obj(mesh, &obj).unwrap();
    let body = std::fs::read_to_string(&obj).unwrap();
    std::fs::write(&obj, format!("mtllib {name}.mtl\nusemtl surface\n{body}")).unwrap();
    std::fs::write(
        dir.join(format!("{name}.mtl")),
        format!(
            "newmtl surface\nmap_Kd {name}_albedo.png\nmap_Bump {name}_normal.png\n\
             map_Pm {name}_metal.png\nmap_Pr {name}_rough.png\n"
        ),
    )
    .unwrap();
    let albedo = image::RgbImage::from_fn(tex, tex, |x, y| {
        image::Rgb([(x % 256) as u8, (y % 256) as u8, ((x ^ y) % 256) as u8])
    });
    albedo.save(dir.join(format!("{name}_albedo.png"))).unwrap();
    let normal = image::RgbImage::from_fn(tex, tex, |x, _| {
        image::Rgb([128 + ((x / 64) % 2) as u8 * 20, 128, 255])
    });
    normal.save(dir.join(format!("{name}_normal.png"))).unwrap();
    let metal = image::GrayImage::from_fn(tex, tex, |x, y| {
        image::Luma([if (x / 128 + y / 128) % 2 == 0 { 255 } else { 0 }])
    });
    metal.save(dir.join(format!("{name}_metal.png"))).unwrap();
    let rough =
        image::GrayImage::from_fn(tex, tex, |_, y| image::Luma([(y * 255 / tex.max(1)) as u8]));
    rough.save(dir.join(format!("{name}_rough.png"))).unwrap();
    obj
}

/// Deterministic small omage pinned as the golden OMG1 fixture.
pub fn golden_omage() -> omage::Result<omage::mesh_io::ObjectImage> {
    let config = omage::pipeline::PipelineConfig {
        bake_resolution: 32,
        low_resolution: 16,
        margin_px: 1,
        ..Default::default()
    };
    Ok(omage::pipeline::encode_mesh(&two_patch_plane(), &config)?.high)
}
