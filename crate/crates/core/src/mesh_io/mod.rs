//! Mesh, material and object-image types together with their file formats.

mod material;
mod mesh;
mod obj;
mod omage;
mod omg;
mod preview;

pub use material::{
    srgb_to_linear, MaterialSet, Texture, TextureKind, DEFAULT_ALBEDO, DEFAULT_METALNESS,
    DEFAULT_ROUGHNESS,
};
pub use mesh::{Corner, IndexedMesh};
pub use obj::{load_obj, obj_string, parse_obj, write_obj, ParsedObj};
pub use omage::{ObjectImage, ALBEDO, ALPHA, CHANNELS, METALNESS, NORMAL, POSITION, ROUGHNESS};
pub use omg::{
    decode_omage, encode_omage, omg_file_size, read_omage, write_omage, HEADER_LEN, MAGIC,
};
pub use preview::{quantize, render_channels, write_previews, PREVIEW_FILES};

pub(crate) use mesh::{cross, normalize, sub};
