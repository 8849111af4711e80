use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{LandmarkSet, NearestNeighborIndex, PointCloud, QuadMesh, TriangleMesh};
use crate::wavelet::SubdivisionHierarchy;

/// Landmark labels anchoring the base-grid corners, in grid order:
/// (0,0), (0, cols-1), (rows-1, 0), (rows-1, cols-1).
pub const CORNER_LABELS: [&str; 4] = ["corner_tl", "corner_tr", "corner_bl", "corner_br"];

/// Resample a disc-topology triangle mesh onto the hierarchy's finest grid.
///
/// The four corner landmarks anchor a bilinear base patch whose nodes are
/// projected to the exact closest surface point; every refinement level
/// then predicts the new vertices with the linear subdivision stencil and
/// projects them onto the surface. A mesh that already is a row-major grid
/// triangulation of matching dimensions is returned unchanged.
pub fn resample_to_grid(
    mesh: &TriangleMesh,
    landmarks: &LandmarkSet,
    hierarchy: &SubdivisionHierarchy,
) -> Result<QuadMesh> {
    let (rows, cols) = hierarchy.finest_dims();
    if let Some(grid) = detect_grid(mesh, rows, cols) {
        return Ok(grid);
    }
    check_disc_topology(mesh)?;

    let mut corners = [Point3::origin(); 4];
    for (slot, label) in corners.iter_mut().zip(CORNER_LABELS) {
        *slot = landmarks.get(label).ok_or_else(|| {
            Error::InvalidArgument(format!("missing corner landmark {label:?}"))
        })?;
    }

    let projector = SurfaceProjector::new(mesh)?;
    let (brows, bcols) = hierarchy.base_dims();
    let mut grid = Vec::with_capacity(brows * bcols);
    for r in 0..brows {
        for c in 0..bcols {
            let u = r as f64 / (brows - 1) as f64;
            let v = c as f64 / (bcols - 1) as f64;
            let p = corners[0].coords * ((1.0 - u) * (1.0 - v))
                + corners[1].coords * ((1.0 - u) * v)
                + corners[2].coords * (u * (1.0 - v))
                + corners[3].coords * (u * v);
            grid.push(projector.closest(&Point3::from(p)));
        }
    }

    let mut dims = (brows, bcols);
    for level in 1..=hierarchy.levels() {
        let (nr, nc) = hierarchy.dims_at(level);
        let mut next = vec![Point3::origin(); nr * nc];
        let old = |r: usize, c: usize| grid[r * dims.1 + c];
        for r in 0..nr {
            for c in 0..nc {
                let (ro, co) = (r % 2 == 1, c % 2 == 1);
                let p = match (ro, co) {
                    (false, false) => old(r / 2, c / 2),
                    (false, true) => {
                        let m = (old(r / 2, c / 2).coords + old(r / 2, c / 2 + 1).coords) * 0.5;
                        projector.closest(&Point3::from(m))
                    }
                    (true, false) => {
                        let m = (old(r / 2, c / 2).coords + old(r / 2 + 1, c / 2).coords) * 0.5;
                        projector.closest(&Point3::from(m))
                    }
                    (true, true) => {
                        let m = (old(r / 2, c / 2).coords
                            + old(r / 2, c / 2 + 1).coords
                            + old(r / 2 + 1, c / 2).coords
                            + old(r / 2 + 1, c / 2 + 1).coords)
                            * 0.25;
                        projector.closest(&Point3::from(m))
                    }
                };
                next[r * nc + c] = p;
            }
        }
        grid = next;
        dims = (nr, nc);
    }

    QuadMesh::from_grid(rows, cols, grid)
}

/// Recognize this crate's own grid triangulation: row-major vertices, each
/// cell split along the (top-left, bottom-right) diagonal.
fn detect_grid(mesh: &TriangleMesh, rows: usize, cols: usize) -> Option<QuadMesh> {
    if mesh.vertices.len() != rows * cols {
        return None;
    }
    if mesh.faces.len() != 2 * (rows - 1) * (cols - 1) {
        return None;
    }
    let quad = QuadMesh::from_grid(rows, cols, mesh.vertices.clone()).ok()?;
    let expected = quad.triangulated();
    (expected.faces == mesh.faces).then_some(quad)
}

/// A mesh is accepted when it is manifold with exactly one boundary loop
/// and disc Euler characteristic (V - E + F = 1).
fn check_disc_topology(mesh: &TriangleMesh) -> Result<()> {
    if mesh.faces.is_empty() {
        return Err(Error::InvalidArgument("mesh has no faces".into()));
    }
    let mut edges: HashMap<(u32, u32), u32> = HashMap::new();
    for f in &mesh.faces {
        if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
            return Err(Error::Degenerate(format!("degenerate face {f:?}")));
        }
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            *edges.entry(key).or_insert(0) += 1;
        }
    }
    let mut boundary: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut n_boundary_edges = 0usize;
    for (&(a, b), &count) in &edges {
        if count > 2 {
            return Err(Error::Degenerate(format!(
                "non-manifold edge ({a}, {b}) used by {count} faces"
            )));
        }
        if count == 1 {
            n_boundary_edges += 1;
            boundary.entry(a).or_default().push(b);
            boundary.entry(b).or_default().push(a);
        }
    }
    if n_boundary_edges == 0 {
        return Err(Error::Degenerate(
            "mesh is closed; expected disc topology with one boundary loop".into(),
        ));
    }
    for (v, nbrs) in &boundary {
        if nbrs.len() != 2 {
            return Err(Error::Degenerate(format!(
                "boundary vertex {v} has {} boundary edges",
                nbrs.len()
            )));
        }
    }
    // Walk one loop and require it to cover every boundary edge.
    let start = *boundary.keys().min().unwrap();
    let mut prev = start;
    let mut cur = boundary[&start][0];
    let mut walked = 1usize;
    while cur != start {
        let nbrs = &boundary[&cur];
        let next = if nbrs[0] == prev { nbrs[1] } else { nbrs[0] };
        prev = cur;
        cur = next;
        walked += 1;
        if walked > n_boundary_edges {
            break;
        }
    }
    if walked != n_boundary_edges {
        return Err(Error::Degenerate(
            "boundary is not a single loop; expected disc topology".into(),
        ));
    }
    let v = mesh.vertices.len() as i64;
    let e = edges.len() as i64;
    let f = mesh.faces.len() as i64;
    if v - e + f != 1 {
        return Err(Error::Degenerate(format!(
            "Euler characteristic {} is not 1; expected disc topology",
            v - e + f
        )));
    }
    Ok(())
}

/// Exact closest-point queries against a triangle mesh. A k-d tree over
/// triangle centroids prunes candidates; the radius bound keeps the result
/// exact.
struct SurfaceProjector {
    triangles: Vec<[Point3<f64>; 3]>,
    centroids: NearestNeighborIndex,
    max_radius: f64,
}

impl SurfaceProjector {
    fn new(mesh: &TriangleMesh) -> Result<Self> {
        let mut triangles = Vec::with_capacity(mesh.faces.len());
        let mut centers = Vec::with_capacity(mesh.faces.len());
        let mut max_radius: f64 = 0.0;
        for f in &mesh.faces {
            let t = [
                mesh.vertices[f[0] as usize],
                mesh.vertices[f[1] as usize],
                mesh.vertices[f[2] as usize],
            ];
            let c = Point3::from((t[0].coords + t[1].coords + t[2].coords) / 3.0);
            for v in &t {
                max_radius = max_radius.max((v - c).norm());
            }
            triangles.push(t);
            centers.push(c);
        }
        Ok(SurfaceProjector {
            triangles,
            centroids: NearestNeighborIndex::build(&PointCloud::from(centers))?,
            max_radius,
        })
    }

    fn closest(&self, p: &Point3<f64>) -> Point3<f64> {
        let (seed, _) = self.centroids.nearest(p);
        let mut best = closest_point_on_triangle(p, &self.triangles[seed]);
        let mut best_d = (best - p).norm();
        // Any triangle holding a closer point has its centroid within
        // best_d + max_radius of the query.
        for i in self.centroids.indices_within(p, best_d + self.max_radius) {
            let q = closest_point_on_triangle(p, &self.triangles[i as usize]);
            let d = (q - p).norm();
            if d < best_d {
                best_d = d;
                best = q;
            }
        }
        best
    }
}

/// Ericson's region-based closest point on a triangle.
fn closest_point_on_triangle(p: &Point3<f64>, tri: &[Point3<f64>; 3]) -> Point3<f64> {
    let (a, b, c) = (tri[0], tri[1], tri[2]);
    let ab: Vector3<f64> = b - a;
    let ac: Vector3<f64> = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}
