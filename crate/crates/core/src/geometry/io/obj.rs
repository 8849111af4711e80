use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::geometry::io::MeshRef;
use crate::geometry::{LoadedMesh, QuadMesh, TriangleMesh};

pub(super) fn load(path: &Path) -> Result<LoadedMesh> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut faces: Vec<Vec<u32>> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let mut coord = |what: &str| -> Result<f64> {
                    let tok = parts.next().ok_or_else(|| {
                        Error::parse(path, lineno, format!("vertex missing {what}"))
                    })?;
                    tok.parse().map_err(|_| {
                        Error::parse(path, lineno, format!("bad {what} coordinate {tok:?}"))
                    })
                };
                let (x, y, z) = (coord("x")?, coord("y")?, coord("z")?);
                vertices.push(Point3::new(x, y, z));
            }
            Some("f") => {
                let mut face = Vec::with_capacity(4);
                for tok in parts {
                    // `f 1/2/3` style references: the vertex index is the
                    // part before the first slash.
                    let vtok = tok.split('/').next().unwrap();
                    let ix: i64 = vtok.parse().map_err(|_| {
                        Error::parse(path, lineno, format!("bad face index {tok:?}"))
                    })?;
                    if ix < 1 || ix as usize > vertices.len() {
                        return Err(Error::parse(
                            path,
                            lineno,
                            format!("face index {ix} out of range (1..={})", vertices.len()),
                        ));
                    }
                    face.push((ix - 1) as u32);
                }
                if face.len() != 3 && face.len() != 4 {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("face with {} indices (expected 3 or 4)", face.len()),
                    ));
                }
                faces.push(face);
            }
            // Normals, texture coordinates, groups, comments: skipped.
            _ => {}
        }
    }
    build_loaded(path, vertices, faces)
}

pub(super) fn build_loaded(
    path: &Path,
    vertices: Vec<Point3<f64>>,
    faces: Vec<Vec<u32>>,
) -> Result<LoadedMesh> {
    let arity = faces.first().map(|f| f.len()).unwrap_or(3);
    if faces.iter().any(|f| f.len() != arity) {
        return Err(Error::parse(
            path,
            0,
            "mixed triangle/quad faces are not supported",
        ));
    }
    if arity == 3 {
        let faces = faces.into_iter().map(|f| [f[0], f[1], f[2]]).collect();
        Ok(LoadedMesh::Triangles(TriangleMesh::new(vertices, faces)?))
    } else {
        let faces = faces
            .into_iter()
            .map(|f| [f[0], f[1], f[2], f[3]])
            .collect();
        Ok(LoadedMesh::Quads(QuadMesh::new(vertices, faces)?))
    }
}

pub(super) fn save(path: &Path, mesh: MeshRef<'_>) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    for v in mesh.vertices() {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for i in 0..mesh.face_count() {
        write!(out, "f")?;
        for &ix in mesh.face(i) {
            write!(out, " {}", ix + 1)?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}
