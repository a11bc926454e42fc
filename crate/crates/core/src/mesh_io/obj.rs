//! Wavefront OBJ subset: `v`, `vt`, `f`, `mtllib`, `usemtl`; plus the MTL
//! texture records `map_Kd`, `map_Bump`/`bump`/`norm`, `map_Pm`, `map_Pr`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use tracing::warn;

use super::material::{MaterialSet, Texture, TextureKind};
use super::mesh::{Corner, IndexedMesh};
use crate::error::{Error, Result};

/// Loads an OBJ file and, when referenced, its MTL textures.
///
/// Polygons are fan-triangulated around their first corner. Positions and
/// UVs are kept exactly as listed; no deduplication happens here.
pub fn load_obj(path: &Path) -> Result<IndexedMesh> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed = parse_obj(&text, path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut mesh = parsed.mesh;
    if !parsed.mtllibs.is_empty() {
        mesh.material = Some(load_material(base, &parsed.mtllibs, &parsed.used_materials));
    }
    let degenerate = mesh.zero_area_triangles().len();
    if degenerate > 0 {
        warn!("{}: {degenerate} zero-area triangles", path.display());
    }
    Ok(mesh)
}

/// Result of parsing the OBJ text alone, before any MTL is resolved.
#[derive(Debug, Default)]
pub struct ParsedObj {
    pub mesh: IndexedMesh,
    pub mtllibs: Vec<String>,
    /// Material names in order of first `usemtl`.
    pub used_materials: Vec<String>,
}

pub fn parse_obj(text: &str, path: &Path) -> Result<ParsedObj> {
    let mut out = ParsedObj::default();
    let mut face: Vec<Corner> = Vec::with_capacity(8);
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        match tag {
            "v" => {
                let p = parse_floats::<3>(&mut tokens).map_err(parse_err)?;
                out.mesh.positions.push(p);
            }
            "vt" => {
                let t = parse_floats::<2>(&mut tokens).map_err(parse_err)?;
                out.mesh.uvs.push(t);
            }
            "f" => {
                face.clear();
                for tok in tokens {
                    let corner = parse_corner(tok, out.mesh.positions.len(), out.mesh.uvs.len())
                        .map_err(|e| match e {
                            CornerError::MissingUv => Error::MissingUv {
                                path: path.to_path_buf(),
                                line: line_no,
                            },
                            CornerError::Bad(m) => parse_err(m),
                        })?;
                    face.push(corner);
                }
                if face.len() < 3 {
                    return Err(parse_err(format!("face has {} corners", face.len())));
                }
                for k in 1..face.len() - 1 {
                    let tri = [face[0], face[k], face[k + 1]];
                    if tri[0].position == tri[1].position
                        || tri[1].position == tri[2].position
                        || tri[0].position == tri[2].position
                    {
                        return Err(parse_err("face repeats a position index".into()));
                    }
                    out.mesh.triangles.push(tri);
                }
            }
            "mtllib" => {
                let name = line["mtllib".len()..].trim();
                if !name.is_empty() {
                    out.mtllibs.push(name.to_string());
                }
            }
            "usemtl" => {
                let name = line["usemtl".len()..].trim().to_string();
                if !out.used_materials.contains(&name) {
                    out.used_materials.push(name);
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

fn parse_floats<'a, const N: usize>(
    tokens: &mut impl Iterator<Item = &'a str>,
) -> std::result::Result<[f64; N], String> {
    let mut out = [0.0; N];
    for slot in out.iter_mut() {
        let tok = tokens
            .next()
            .ok_or_else(|| format!("expected {N} numbers"))?;
        *slot = tok
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("invalid number {tok:?}"))?;
    }
    Ok(out)
}

enum CornerError {
    MissingUv,
    Bad(String),
}

fn resolve_index(tok: &str, count: usize, what: &str) -> std::result::Result<u32, CornerError> {
    let raw: i64 = tok
        .parse()
        .map_err(|_| CornerError::Bad(format!("invalid {what} index {tok:?}")))?;
    let idx = match raw {
        0 => return Err(CornerError::Bad(format!("{what} index 0 is invalid"))),
        r if r > 0 => r - 1,
        r => count as i64 + r,
    };
    if idx < 0 || idx as usize >= count {
        return Err(CornerError::Bad(format!(
            "{what} index {raw} out of range ({count} defined)"
        )));
    }
    Ok(idx as u32)
}

fn parse_corner(tok: &str, n_pos: usize, n_uv: usize) -> std::result::Result<Corner, CornerError> {
    let mut parts = tok.split('/');
    let p = parts.next().unwrap_or("");
    let t = parts.next().unwrap_or("");
    if t.is_empty() {
        return Err(CornerError::MissingUv);
    }
    Ok(Corner::new(
        resolve_index(p, n_pos, "position")?,
        resolve_index(t, n_uv, "texture")?,
    ))
}

#[derive(Debug, Default, Clone)]
struct MtlEntry {
    name: String,
    albedo: Option<String>,
    normal: Option<String>,
    metalness: Option<String>,
    roughness: Option<String>,
}

fn parse_mtl(text: &str) -> Vec<MtlEntry> {
    let mut entries: Vec<MtlEntry> = Vec::new();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        if tag == "newmtl" {
            entries.push(MtlEntry {
                name: line["newmtl".len()..].trim().to_string(),
                ..Default::default()
            });
            continue;
        }
        let Some(entry) = entries.last_mut() else {
            continue;
        };
        // map options (e.g. `-bm 1.0`) precede the file name
        let Some(file) = tokens.last().map(str::to_string) else {
            continue;
        };
        match tag {
            "map_Kd" => entry.albedo = Some(file),
            "map_Bump" | "map_bump" | "bump" | "norm" => entry.normal = Some(file),
            "map_Pm" => entry.metalness = Some(file),
            "map_Pr" => entry.roughness = Some(file),
            _ => {}
        }
    }
    entries
}

/// Resolves the material used by the mesh. Only one material is supported:
/// the first `usemtl` name, or the first MTL entry when none is used.
fn load_material(base: &Path, mtllibs: &[String], used: &[String]) -> MaterialSet {
    let mut entries = Vec::new();
    let mut mtl_dir = base.to_path_buf();
    for lib in mtllibs {
        let path = base.join(lib);
        match fs::read_to_string(&path) {
            Ok(text) => {
                if entries.is_empty() {
                    mtl_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
                }
                entries.extend(parse_mtl(&text));
            }
            Err(e) => warn!("cannot read material library {}: {e}", path.display()),
        }
    }
    if used.len() > 1 {
        warn!(
            "{} materials in use, only {:?} is baked",
            used.len(),
            used[0]
        );
    }
    let chosen = match used.first() {
        Some(name) => entries.iter().find(|e| &e.name == name),
        None => entries.first(),
    };
    let Some(entry) = chosen else {
        if let Some(name) = used.first() {
            warn!("material {name:?} not found, using defaults");
        }
        return MaterialSet::default();
    };
    let load = |file: &Option<String>, kind: TextureKind| -> Option<Texture> {
        let file = file.as_ref()?;
        let path: PathBuf = mtl_dir.join(file);
        match Texture::load(&path, kind) {
            Ok(t) => Some(t),
            Err(e) => {
                warn!("missing texture, substituting default: {e}");
                None
            }
        }
    };
    MaterialSet {
        albedo: load(&entry.albedo, TextureKind::Albedo),
        normal: load(&entry.normal, TextureKind::Normal),
        metalness: load(&entry.metalness, TextureKind::Scalar),
        roughness: load(&entry.roughness, TextureKind::Scalar),
    }
}

/// Serializes `v`, `vt` and `f p/t` records. Materials are not written.
pub fn obj_string(mesh: &IndexedMesh) -> String {
    let mut s = String::with_capacity(mesh.positions.len() * 40 + mesh.triangles.len() * 24);
    for p in &mesh.positions {
        let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
    }
    for t in &mesh.uvs {
        let _ = writeln!(s, "vt {} {}", t[0], t[1]);
    }
    for tri in &mesh.triangles {
        let _ = writeln!(
            s,
            "f {}/{} {}/{} {}/{}",
            tri[0].position + 1,
            tri[0].uv + 1,
            tri[1].position + 1,
            tri[1].uv + 1,
            tri[2].position + 1,
            tri[2].uv + 1
        );
    }
    s
}

pub fn write_obj(mesh: &IndexedMesh, path: &Path) -> Result<()> {
    fs::write(path, obj_string(mesh)).map_err(|e| Error::io(path, e))
}
