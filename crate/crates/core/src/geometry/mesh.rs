use nalgebra::Point3;

use crate::error::{Error, Result};

/// Triangle mesh with indexed faces.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3<f64>>,
    pub faces: Vec<[u32; 3]>,
}

/// Quad mesh with indexed faces. Grid-structured quad meshes (row-major
/// vertex layout) are the currency of the wavelet transform.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadMesh {
    pub vertices: Vec<Point3<f64>>,
    pub faces: Vec<[u32; 4]>,
}

/// Result of loading a polygon file: face arity decides the variant.
#[derive(Debug, Clone)]
pub enum LoadedMesh {
    Triangles(TriangleMesh),
    Quads(QuadMesh),
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[u32; 3]>) -> Result<Self> {
        validate_vertices(&vertices)?;
        for f in &faces {
            validate_face(&f[..], vertices.len())?;
        }
        Ok(TriangleMesh { vertices, faces })
    }
}

impl QuadMesh {
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[u32; 4]>) -> Result<Self> {
        validate_vertices(&vertices)?;
        for f in &faces {
            validate_face(&f[..], vertices.len())?;
        }
        Ok(QuadMesh { vertices, faces })
    }

    /// Grid-structured quad mesh: `rows * cols` vertices in row-major order,
    /// one quad per grid cell.
    pub fn from_grid(rows: usize, cols: usize, vertices: Vec<Point3<f64>>) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid must be at least 2x2, got {rows}x{cols}"
            )));
        }
        if vertices.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "grid {rows}x{cols} needs {} vertices, got {}",
                rows * cols,
                vertices.len()
            )));
        }
        let mut faces = Vec::with_capacity((rows - 1) * (cols - 1));
        for r in 0..rows - 1 {
            for c in 0..cols - 1 {
                let a = (r * cols + c) as u32;
                let b = (r * cols + c + 1) as u32;
                let d = ((r + 1) * cols + c) as u32;
                let e = ((r + 1) * cols + c + 1) as u32;
                faces.push([a, b, e, d]);
            }
        }
        QuadMesh::new(vertices, faces)
    }

    /// Triangulate each quad along its (0,2) diagonal, preserving vertex
    /// order.
    pub fn triangulated(&self) -> TriangleMesh {
        let mut faces = Vec::with_capacity(self.faces.len() * 2);
        for q in &self.faces {
            faces.push([q[0], q[1], q[2]]);
            faces.push([q[0], q[2], q[3]]);
        }
        TriangleMesh {
            vertices: self.vertices.clone(),
            faces,
        }
    }
}

impl LoadedMesh {
    pub fn vertices(&self) -> &[Point3<f64>] {
        match self {
            LoadedMesh::Triangles(m) => &m.vertices,
            LoadedMesh::Quads(m) => &m.vertices,
        }
    }

    pub fn into_triangles(self) -> Result<TriangleMesh> {
        match self {
            LoadedMesh::Triangles(m) => Ok(m),
            LoadedMesh::Quads(m) => Ok(m.triangulated()),
        }
    }

    pub fn into_quads(self) -> Result<QuadMesh> {
        match self {
            LoadedMesh::Quads(m) => Ok(m),
            LoadedMesh::Triangles(_) => Err(Error::InvalidArgument(
                "expected a quad mesh, found triangles".into(),
            )),
        }
    }
}

pub(crate) fn validate_vertices(vertices: &[Point3<f64>]) -> Result<()> {
    for (i, v) in vertices.iter().enumerate() {
        if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite coordinate at vertex {i}"
            )));
        }
    }
    Ok(())
}

pub(crate) fn validate_face(face: &[u32], n_vertices: usize) -> Result<()> {
    for &ix in face {
        if ix as usize >= n_vertices {
            return Err(Error::InvalidArgument(format!(
                "face index {ix} out of range (mesh has {n_vertices} vertices)"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_connectivity() {
        let verts = (0..6)
            .map(|i| Point3::new((i % 3) as f64, (i / 3) as f64, 0.0))
            .collect();
        let m = QuadMesh::from_grid(2, 3, verts).unwrap();
        assert_eq!(m.faces, vec![[0, 1, 4, 3], [1, 2, 5, 4]]);
    }

    #[test]
    fn face_index_out_of_range_rejected() {
        let verts = vec![Point3::origin(); 3];
        assert!(TriangleMesh::new(verts, vec![[0, 1, 3]]).is_err());
    }

    #[test]
    fn non_finite_vertex_rejected() {
        let verts = vec![Point3::new(0.0, f64::NAN, 0.0)];
        assert!(TriangleMesh::new(verts, vec![]).is_err());
    }
}
