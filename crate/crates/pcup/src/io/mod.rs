//! Point and mesh file formats.

mod mesh;
mod xyz;

pub use mesh::{format_off, load_mesh, parse_off, parse_ply};
pub use xyz::{format_g6, format_xyz, parse_xyz, read_xyz, write_xyz};
