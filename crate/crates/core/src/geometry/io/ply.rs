use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::geometry::io::{MeshRef, SaveOptions};
use crate::geometry::{LoadedMesh, PointCloud};

#[derive(Debug, Clone, Copy, PartialEq)]
enum CoordType {
    F32,
    F64,
}

#[derive(Debug)]
struct Header {
    binary: bool,
    n_vertices: usize,
    coord: CoordType,
    has_colors: bool,
    /// None when the file declares no face element (a point cloud).
    n_faces: Option<usize>,
    /// Lines consumed by the header, for error positions in ascii bodies.
    lines: usize,
}

pub(super) fn load_mesh(path: &Path) -> Result<LoadedMesh> {
    let (vertices, _colors, faces) = load_raw(path)?;
    let faces = faces.ok_or_else(|| {
        Error::parse(path, 0, "no face element; use the point-cloud loader")
    })?;
    super::obj::build_loaded(path, vertices, faces)
}

pub(super) fn load_cloud(path: &Path) -> Result<PointCloud> {
    let (vertices, _colors, _faces) = load_raw(path)?;
    PointCloud::new(vertices)
}

/// Mesh plus vertex colors when the file carries them.
pub fn load_mesh_with_colors(path: &Path) -> Result<(LoadedMesh, Option<Vec<[u8; 3]>>)> {
    let (vertices, colors, faces) = load_raw(path)?;
    let faces = faces.ok_or_else(|| {
        Error::parse(path, 0, "no face element; use the point-cloud loader")
    })?;
    Ok((super::obj::build_loaded(path, vertices, faces)?, colors))
}

type RawPly = (Vec<Point3<f64>>, Option<Vec<[u8; 3]>>, Option<Vec<Vec<u32>>>);

fn load_raw(path: &Path) -> Result<RawPly> {
    let bytes = std::fs::read(path)?;
    let (header, body_start) = parse_header(path, &bytes)?;
    if header.binary {
        read_binary_body(path, &header, &bytes[body_start..])
    } else {
        let body = std::str::from_utf8(&bytes[body_start..])
            .map_err(|_| Error::parse(path, header.lines + 1, "ascii body is not valid UTF-8"))?;
        read_ascii_body(path, &header, body)
    }
}

fn parse_header(path: &Path, bytes: &[u8]) -> Result<(Header, usize)> {
    let mut lines = Vec::new();
    let mut pos = 0;
    let mut found_end = false;
    while pos < bytes.len() {
        let nl = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| pos + i)
            .unwrap_or(bytes.len());
        let line = std::str::from_utf8(&bytes[pos..nl])
            .map_err(|_| Error::parse(path, lines.len() + 1, "header is not valid UTF-8"))?
            .trim_end_matches('\r')
            .to_string();
        pos = nl + 1;
        let is_end = line.trim() == "end_header";
        lines.push(line);
        if is_end {
            found_end = true;
            break;
        }
        if lines.len() > 1000 {
            break;
        }
    }
    if !found_end {
        return Err(Error::parse(path, lines.len(), "missing end_header"));
    }
    if lines.first().map(String::as_str) != Some("ply") {
        return Err(Error::parse(path, 1, "not a PLY file (missing `ply` magic)"));
    }

    let mut binary = None;
    let mut n_vertices = None;
    let mut coord_types: Vec<(String, CoordType)> = Vec::new();
    let mut color_props: Vec<String> = Vec::new();
    let mut n_faces = None;
    let mut face_list_seen = false;
    #[derive(PartialEq)]
    enum Section {
        None,
        Vertex,
        Face,
    }
    let mut section = Section::None;

    for (i, line) in lines.iter().enumerate().skip(1) {
        let lineno = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] | ["end_header"] => {}
            ["format", fmt, "1.0"] => {
                binary = Some(match *fmt {
                    "ascii" => false,
                    "binary_little_endian" => true,
                    other => {
                        return Err(Error::parse(
                            path,
                            lineno,
                            format!("unsupported format {other:?}"),
                        ))
                    }
                });
            }
            ["element", "vertex", n] => {
                section = Section::Vertex;
                n_vertices = Some(n.parse::<usize>().map_err(|_| {
                    Error::parse(path, lineno, format!("bad vertex count {n:?}"))
                })?);
            }
            ["element", "face", n] => {
                section = Section::Face;
                n_faces = Some(n.parse::<usize>().map_err(|_| {
                    Error::parse(path, lineno, format!("bad face count {n:?}"))
                })?);
            }
            ["element", kind, _] => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("unsupported element type {kind:?}"),
                ));
            }
            ["property", "list", count_ty, index_ty, name] if section == Section::Face => {
                if !matches!(*count_ty, "uchar" | "uint8") {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("unsupported face count type {count_ty:?}"),
                    ));
                }
                if !matches!(*index_ty, "int" | "uint" | "int32" | "uint32") {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("unsupported face index type {index_ty:?}"),
                    ));
                }
                if !matches!(*name, "vertex_indices" | "vertex_index") {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("unsupported face property {name:?}"),
                    ));
                }
                face_list_seen = true;
            }
            ["property", ty, name] if section == Section::Vertex => match *name {
                "x" | "y" | "z" => {
                    let ct = match *ty {
                        "float" | "float32" => CoordType::F32,
                        "double" | "float64" => CoordType::F64,
                        other => {
                            return Err(Error::parse(
                                path,
                                lineno,
                                format!("unsupported coordinate type {other:?}"),
                            ))
                        }
                    };
                    coord_types.push((name.to_string(), ct));
                }
                "red" | "green" | "blue" => {
                    if !matches!(*ty, "uchar" | "uint8") {
                        return Err(Error::parse(
                            path,
                            lineno,
                            format!("unsupported color type {ty:?}"),
                        ));
                    }
                    color_props.push(name.to_string());
                }
                other => {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("unsupported vertex property {other:?}"),
                    ));
                }
            },
            ["property", ..] => {
                return Err(Error::parse(path, lineno, "property outside an element"));
            }
            _ => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("unrecognized header line {line:?}"),
                ));
            }
        }
    }

    let binary =
        binary.ok_or_else(|| Error::parse(path, lines.len(), "missing format line"))?;
    let n_vertices =
        n_vertices.ok_or_else(|| Error::parse(path, lines.len(), "missing vertex element"))?;
    let coord_names: Vec<&str> = coord_types.iter().map(|(n, _)| n.as_str()).collect();
    if coord_names != ["x", "y", "z"] {
        return Err(Error::parse(
            path,
            lines.len(),
            format!("vertex properties must be x, y, z in order, got {coord_names:?}"),
        ));
    }
    if coord_types.iter().any(|(_, t)| *t != coord_types[0].1) {
        return Err(Error::parse(path, lines.len(), "mixed coordinate types"));
    }
    let has_colors = match color_props.len() {
        0 => false,
        3 if color_props == ["red", "green", "blue"] => true,
        _ => {
            return Err(Error::parse(
                path,
                lines.len(),
                format!("vertex colors must be red, green, blue in order, got {color_props:?}"),
            ))
        }
    };
    if n_faces.is_some() && !face_list_seen {
        return Err(Error::parse(
            path,
            lines.len(),
            "face element without a vertex_indices list property",
        ));
    }

    Ok((
        Header {
            binary,
            n_vertices,
            coord: coord_types[0].1,
            has_colors,
            n_faces,
            lines: lines.len(),
        },
        header_body_offset(bytes),
    ))
}

fn header_body_offset(bytes: &[u8]) -> usize {
    // Position just past the newline terminating `end_header`.
    let needle = b"end_header";
    let mut i = 0;
    while i + needle.len() <= bytes.len() {
        if &bytes[i..i + needle.len()] == needle {
            let mut j = i + needle.len();
            while j < bytes.len() && bytes[j] != b'\n' {
                j += 1;
            }
            return (j + 1).min(bytes.len());
        }
        i += 1;
    }
    bytes.len()
}

fn read_ascii_body(path: &Path, header: &Header, body: &str) -> Result<RawPly> {
    let mut lines = body.lines().enumerate();
    let mut vertices = Vec::with_capacity(header.n_vertices);
    let mut colors = header.has_colors.then(Vec::new);

    let mut next_line = |what: &str| -> Result<(usize, &str)> {
        for (i, line) in lines.by_ref() {
            if !line.trim().is_empty() {
                return Ok((header.lines + i + 1, line));
            }
        }
        Err(Error::parse(path, 0, format!("unexpected end of file reading {what}")))
    };

    for _ in 0..header.n_vertices {
        let (lineno, line) = next_line("vertices")?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let expected = if header.has_colors { 6 } else { 3 };
        if toks.len() != expected {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {expected} vertex fields, got {}", toks.len()),
            ));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad coordinate {s:?}")))
        };
        vertices.push(Point3::new(parse(toks[0])?, parse(toks[1])?, parse(toks[2])?));
        if let Some(colors) = colors.as_mut() {
            let parse_c = |s: &str| -> Result<u8> {
                s.parse()
                    .map_err(|_| Error::parse(path, lineno, format!("bad color value {s:?}")))
            };
            colors.push([parse_c(toks[3])?, parse_c(toks[4])?, parse_c(toks[5])?]);
        }
    }

    let faces = match header.n_faces {
        None => None,
        Some(n_faces) => {
            let mut faces = Vec::with_capacity(n_faces);
            for _ in 0..n_faces {
                let (lineno, line) = next_line("faces")?;
                let mut toks = line.split_whitespace();
                let count: usize = toks
                    .next()
                    .ok_or_else(|| Error::parse(path, lineno, "empty face line"))?
                    .parse()
                    .map_err(|_| Error::parse(path, lineno, "bad face vertex count"))?;
                let ixs: Vec<u32> = toks
                    .map(|t| {
                        t.parse::<u32>().map_err(|_| {
                            Error::parse(path, lineno, format!("bad face index {t:?}"))
                        })
                    })
                    .collect::<Result<_>>()?;
                if ixs.len() != count {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("face declares {count} indices but has {}", ixs.len()),
                    ));
                }
                faces.push(ixs);
            }
            Some(faces)
        }
    };
    Ok((vertices, colors, faces))
}

fn read_binary_body(path: &Path, header: &Header, body: &[u8]) -> Result<RawPly> {
    let mut cur = Cursor {
        path,
        body,
        pos: 0,
    };
    let mut vertices = Vec::with_capacity(header.n_vertices);
    let mut colors = header.has_colors.then(Vec::new);
    for _ in 0..header.n_vertices {
        let (x, y, z) = match header.coord {
            CoordType::F32 => (
                cur.f32()? as f64,
                cur.f32()? as f64,
                cur.f32()? as f64,
            ),
            CoordType::F64 => (cur.f64()?, cur.f64()?, cur.f64()?),
        };
        vertices.push(Point3::new(x, y, z));
        if let Some(colors) = colors.as_mut() {
            colors.push([cur.u8()?, cur.u8()?, cur.u8()?]);
        }
    }
    let faces = match header.n_faces {
        None => None,
        Some(n_faces) => {
            let mut faces = Vec::with_capacity(n_faces);
            for _ in 0..n_faces {
                let count = cur.u8()? as usize;
                let mut ixs = Vec::with_capacity(count);
                for _ in 0..count {
                    ixs.push(cur.u32()?);
                }
                faces.push(ixs);
            }
            Some(faces)
        }
    };
    if cur.pos != body.len() {
        return Err(Error::parse(
            path,
            0,
            format!(
                "{} trailing bytes after binary payload",
                body.len() - cur.pos
            ),
        ));
    }
    Ok((vertices, colors, faces))
}

struct Cursor<'a> {
    path: &'a Path,
    body: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.pos + n > self.body.len() {
            return Err(Error::parse(
                self.path,
                0,
                format!("binary payload truncated at offset {}", self.pos),
            ));
        }
        let out = &self.body[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub(super) fn save_mesh(path: &Path, mesh: MeshRef<'_>, options: SaveOptions<'_>) -> Result<()> {
    write_ply(
        path,
        mesh.vertices(),
        options.vertex_colors,
        Some((mesh.face_count(), mesh.face_arity(), &|i| mesh.face(i))),
        options.ascii,
    )
}

pub(super) fn save_cloud(path: &Path, cloud: &PointCloud, options: SaveOptions<'_>) -> Result<()> {
    if let Some(colors) = options.vertex_colors {
        if colors.len() != cloud.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} colors for {} points",
                colors.len(),
                cloud.len()
            )));
        }
    }
    write_ply(path, &cloud.points, options.vertex_colors, None, options.ascii)
}

type FaceAccess<'a> = (usize, usize, &'a dyn Fn(usize) -> &'a [u32]);

fn write_ply(
    path: &Path,
    vertices: &[Point3<f64>],
    colors: Option<&[[u8; 3]]>,
    faces: Option<FaceAccess<'_>>,
    ascii: bool,
) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    let format = if ascii { "ascii" } else { "binary_little_endian" };
    write!(
        out,
        "ply\nformat {format} 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\n",
        vertices.len()
    )?;
    if colors.is_some() {
        write!(
            out,
            "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        )?;
    }
    if let Some((n_faces, _, _)) = faces {
        write!(
            out,
            "element face {n_faces}\nproperty list uchar int vertex_indices\n"
        )?;
    }
    writeln!(out, "end_header")?;

    if ascii {
        for (i, v) in vertices.iter().enumerate() {
            write!(out, "{} {} {}", v.x, v.y, v.z)?;
            if let Some(colors) = colors {
                let c = colors[i];
                write!(out, " {} {} {}", c[0], c[1], c[2])?;
            }
            writeln!(out)?;
        }
        if let Some((n_faces, _, face)) = faces {
            for i in 0..n_faces {
                let f = face(i);
                write!(out, "{}", f.len())?;
                for &ix in f {
                    write!(out, " {ix}")?;
                }
                writeln!(out)?;
            }
        }
    } else {
        for (i, v) in vertices.iter().enumerate() {
            out.write_all(&v.x.to_le_bytes())?;
            out.write_all(&v.y.to_le_bytes())?;
            out.write_all(&v.z.to_le_bytes())?;
            if let Some(colors) = colors {
                out.write_all(&colors[i])?;
            }
        }
        if let Some((n_faces, arity, face)) = faces {
            for i in 0..n_faces {
                out.write_all(&[arity as u8])?;
                for &ix in face(i) {
                    out.write_all(&ix.to_le_bytes())?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}
