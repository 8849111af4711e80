//! Mesh and point-cloud file I/O.
//!
//! Formats:
//!
//! * OBJ: `v`/`f` records, triangles or quads (one arity per file).
//! * PLY: ascii and `binary_little_endian`, vertex positions as float or
//!   double, optional `uchar` RGB vertex colors, faces as
//!   `property list uchar int vertex_indices`.
//!
//! The PLY writer emits doubles, so binary round-trips are bit-exact; the
//! ascii writer uses shortest-round-trip formatting and is exact as well.
//! Parse errors carry the path and 1-based line number (or byte offset for
//! binary payloads).

mod colormap;
mod obj;
mod ply;

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{LoadedMesh, PointCloud, QuadMesh, TriangleMesh};

pub use colormap::{distance_color, COLOR_RANGE_MM};
pub use ply::load_mesh_with_colors;

/// Borrowed mesh of either arity, for the writers.
#[derive(Clone, Copy)]
pub enum MeshRef<'a> {
    Triangles(&'a TriangleMesh),
    Quads(&'a QuadMesh),
}

impl<'a> From<&'a TriangleMesh> for MeshRef<'a> {
    fn from(m: &'a TriangleMesh) -> Self {
        MeshRef::Triangles(m)
    }
}

impl<'a> From<&'a QuadMesh> for MeshRef<'a> {
    fn from(m: &'a QuadMesh) -> Self {
        MeshRef::Quads(m)
    }
}

impl<'a> From<&'a LoadedMesh> for MeshRef<'a> {
    fn from(m: &'a LoadedMesh) -> Self {
        match m {
            LoadedMesh::Triangles(t) => MeshRef::Triangles(t),
            LoadedMesh::Quads(q) => MeshRef::Quads(q),
        }
    }
}

impl<'a> MeshRef<'a> {
    pub fn vertices(&self) -> &'a [nalgebra::Point3<f64>] {
        match self {
            MeshRef::Triangles(m) => &m.vertices,
            MeshRef::Quads(m) => &m.vertices,
        }
    }

    pub(crate) fn face_arity(&self) -> usize {
        match self {
            MeshRef::Triangles(_) => 3,
            MeshRef::Quads(_) => 4,
        }
    }

    pub(crate) fn face_count(&self) -> usize {
        match self {
            MeshRef::Triangles(m) => m.faces.len(),
            MeshRef::Quads(m) => m.faces.len(),
        }
    }

    pub(crate) fn face(&self, i: usize) -> &'a [u32] {
        match self {
            MeshRef::Triangles(m) => &m.faces[i],
            MeshRef::Quads(m) => &m.faces[i],
        }
    }
}

/// Writer options. Default: binary PLY, no colors.
#[derive(Clone, Copy, Default)]
pub struct SaveOptions<'a> {
    pub ascii: bool,
    /// Per-vertex RGB, PLY only. Length must match the vertex count.
    pub vertex_colors: Option<&'a [[u8; 3]]>,
}

/// Load a mesh, dispatching on the file extension (`.obj` or `.ply`).
pub fn load_mesh(path: impl AsRef<Path>) -> Result<LoadedMesh> {
    let path = path.as_ref();
    match extension(path)? {
        "obj" => obj::load(path),
        "ply" => ply::load_mesh(path),
        other => Err(Error::InvalidArgument(format!(
            "unsupported mesh extension {other:?} for {}",
            path.display()
        ))),
    }
}

/// Save a mesh; format from the extension. PLY defaults to binary.
pub fn save_mesh<'a>(path: impl AsRef<Path>, mesh: impl Into<MeshRef<'a>>) -> Result<()> {
    save_mesh_with(path, mesh, SaveOptions::default())
}

pub fn save_mesh_with<'a>(
    path: impl AsRef<Path>,
    mesh: impl Into<MeshRef<'a>>,
    options: SaveOptions<'_>,
) -> Result<()> {
    let path = path.as_ref();
    let mesh = mesh.into();
    if let Some(colors) = options.vertex_colors {
        if colors.len() != mesh.vertices().len() {
            return Err(Error::DimensionMismatch(format!(
                "{} colors for {} vertices",
                colors.len(),
                mesh.vertices().len()
            )));
        }
    }
    match extension(path)? {
        "obj" => {
            if options.vertex_colors.is_some() {
                return Err(Error::InvalidArgument(
                    "vertex colors are only supported for PLY output".into(),
                ));
            }
            obj::save(path, mesh)
        }
        "ply" => ply::save_mesh(path, mesh, options),
        other => Err(Error::InvalidArgument(format!(
            "unsupported mesh extension {other:?} for {}",
            path.display()
        ))),
    }
}

/// Load a point cloud: a PLY with (possibly) no faces, or any mesh whose
/// vertices are taken.
pub fn load_cloud(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    match extension(path)? {
        "ply" => ply::load_cloud(path),
        "obj" => Ok(PointCloud::new(obj::load(path)?.vertices().to_vec())?),
        other => Err(Error::InvalidArgument(format!(
            "unsupported cloud extension {other:?} for {}",
            path.display()
        ))),
    }
}

/// Save a point cloud as a face-less PLY (binary by default).
pub fn save_cloud(path: impl AsRef<Path>, cloud: &PointCloud) -> Result<()> {
    save_cloud_with(path, cloud, SaveOptions::default())
}

pub fn save_cloud_with(
    path: impl AsRef<Path>,
    cloud: &PointCloud,
    options: SaveOptions<'_>,
) -> Result<()> {
    ply::save_cloud(path.as_ref(), cloud, options)
}

/// Save a mesh with a per-vertex scalar field (mm) baked into vertex colors
/// via the fixed blue-to-red map over [0, 10] mm.
pub fn save_mesh_with_field<'a>(
    path: impl AsRef<Path>,
    mesh: impl Into<MeshRef<'a>>,
    field_mm: &[f64],
) -> Result<()> {
    let mesh = mesh.into();
    if field_mm.len() != mesh.vertices().len() {
        return Err(Error::DimensionMismatch(format!(
            "{} field values for {} vertices",
            field_mm.len(),
            mesh.vertices().len()
        )));
    }
    let colors: Vec<[u8; 3]> = field_mm.iter().map(|&v| distance_color(v)).collect();
    save_mesh_with(
        path,
        mesh,
        SaveOptions {
            ascii: false,
            vertex_colors: Some(&colors),
        },
    )
}

fn extension(path: &Path) -> Result<&str> {
    path.extension().and_then(|e| e.to_str()).ok_or_else(|| {
        Error::InvalidArgument(format!("missing file extension on {}", path.display()))
    })
}
