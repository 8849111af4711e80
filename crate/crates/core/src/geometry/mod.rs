//! Mesh, point-cloud, and landmark containers plus exact nearest-neighbor
//! search.
//!
//! # Units
//!
//! Coordinates are in millimeters (mm) unless the surrounding frame was
//! explicitly normalized (see the Procrustes gauge in [`crate::align`]).
//!
//! All containers are plain data: vertices are `nalgebra::Point3<f64>`,
//! faces are index arrays into the vertex list. Loaders validate index
//! ranges and finiteness once at the boundary; the rest of the crate may
//! assume both.

mod cloud;
mod kdtree;
mod landmarks;
mod mesh;

pub mod io;

pub use cloud::PointCloud;
pub use kdtree::NearestNeighborIndex;
pub use landmarks::LandmarkSet;
pub use mesh::{LoadedMesh, QuadMesh, TriangleMesh};

pub(crate) fn centroid(points: &[nalgebra::Point3<f64>]) -> nalgebra::Point3<f64> {
    let mut acc = nalgebra::Vector3::zeros();
    for p in points {
        acc += p.coords;
    }
    nalgebra::Point3::from(acc / points.len() as f64)
}
