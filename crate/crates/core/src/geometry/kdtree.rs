//! Exact nearest-neighbor search over a 3-d point set.
//!
//! Median-split k-d tree, built once and immutable afterwards. Queries are
//! exact: distance ties resolve to the smallest point index, so results are
//! independent of tree layout and iteration order. A relaxed atomic counts
//! `nearest` calls, which lets callers assert query budgets.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

const LEAF_SIZE: usize = 8;

#[derive(Debug)]
enum Node {
    Split {
        axis: usize,
        value: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        start: u32,
        end: u32,
    },
}

#[derive(Debug)]
pub struct NearestNeighborIndex {
    points: Vec<Point3<f64>>,
    order: Vec<u32>,
    nodes: Vec<Node>,
    queries: AtomicU64,
}

impl NearestNeighborIndex {
    /// Build over a copy of the cloud. O(m log m). Errors on an empty cloud.
    pub fn build(cloud: &PointCloud) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::InvalidArgument(
                "cannot build a nearest-neighbor index over an empty cloud".into(),
            ));
        }
        let points = cloud.points.clone();
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::new();
        build_node(&points, &mut order, 0, points.len(), &mut nodes);
        Ok(NearestNeighborIndex {
            points,
            order,
            nodes,
            queries: AtomicU64::new(0),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }

    /// Exact nearest neighbor: (point index, Euclidean distance). Ties by
    /// distance return the smallest index.
    pub fn nearest(&self, query: &Point3<f64>) -> (usize, f64) {
        let (i, d2) = self.nearest_squared(query);
        (i, d2.sqrt())
    }

    /// Same as [`nearest`](Self::nearest) but returns squared distance.
    pub fn nearest_squared(&self, query: &Point3<f64>) -> (usize, f64) {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let mut best = (f64::INFINITY, u32::MAX);
        self.search(self.nodes.len() - 1, query, &mut best);
        (best.1 as usize, best.0)
    }

    /// Number of `nearest`/`nearest_squared` calls since construction.
    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    /// Indices of all points within `radius` of `query` (inclusive), in
    /// ascending index order. Not counted as a nearest query.
    pub fn indices_within(&self, query: &Point3<f64>, radius: f64) -> Vec<u32> {
        let mut out = Vec::new();
        let r2 = radius * radius;
        self.collect_within(self.nodes.len() - 1, query, r2, &mut out);
        out.sort_unstable();
        out
    }

    fn search(&self, node: usize, q: &Point3<f64>, best: &mut (f64, u32)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start as usize..end as usize] {
                    let d2 = (self.points[i as usize] - q).norm_squared();
                    if d2 < best.0 || (d2 == best.0 && i < best.1) {
                        *best = (d2, i);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = q[axis] - value;
                let (near, far) = if delta < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near as usize, q, best);
                // Equal plane distance can still hide an equal-distance point
                // with a smaller index, hence <=.
                if delta * delta <= best.0 {
                    self.search(far as usize, q, best);
                }
            }
        }
    }

    fn collect_within(&self, node: usize, q: &Point3<f64>, r2: f64, out: &mut Vec<u32>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start as usize..end as usize] {
                    if (self.points[i as usize] - q).norm_squared() <= r2 {
                        out.push(i);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = q[axis] - value;
                let (near, far) = if delta < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.collect_within(near as usize, q, r2, out);
                if delta * delta <= r2 {
                    self.collect_within(far as usize, q, r2, out);
                }
            }
        }
    }
}

/// Builds the subtree over `order[lo..hi]`, returns its node id. Children
/// are pushed before their parent, so the root is the last node.
fn build_node(
    points: &[Point3<f64>],
    order: &mut [u32],
    lo: usize,
    hi: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    if hi - lo <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: lo as u32,
            end: hi as u32,
        });
        return (nodes.len() - 1) as u32;
    }
    let axis = widest_axis(points, &order[lo..hi]);
    let mid = lo + (hi - lo) / 2;
    order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
        let (pa, pb) = (points[a as usize][axis], points[b as usize][axis]);
        pa.partial_cmp(&pb).unwrap().then(a.cmp(&b))
    });
    let value = points[order[mid] as usize][axis];
    let left = build_node(points, order, lo, mid, nodes);
    let right = build_node(points, order, mid, hi, nodes);
    nodes.push(Node::Split {
        axis,
        value,
        left,
        right,
    });
    (nodes.len() - 1) as u32
}

fn widest_axis(points: &[Point3<f64>], order: &[u32]) -> usize {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in order {
        let p = &points[i as usize];
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let mut axis = 0;
    let mut span = hi[0] - lo[0];
    for k in 1..3 {
        if hi[k] - lo[k] > span {
            span = hi[k] - lo[k];
            axis = k;
        }
    }
    axis
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn brute_force(points: &[Point3<f64>], q: &Point3<f64>) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, p) in points.iter().enumerate() {
            let d2 = (p - q).norm_squared();
            if d2 < best.1 {
                best = (i, d2);
            }
        }
        (best.0, best.1.sqrt())
    }

    fn random_cloud(rng: &mut impl Rng, m: usize, span: f64) -> PointCloud {
        PointCloud::from(
            (0..m)
                .map(|_| {
                    Point3::new(
                        rng.gen_range(-span..span),
                        rng.gen_range(-span..span),
                        rng.gen_range(-span..span),
                    )
                })
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &m in &[1usize, 2, 9, 57, 300] {
            let cloud = random_cloud(&mut rng, m, 50.0);
            let index = NearestNeighborIndex::build(&cloud).unwrap();
            for _ in 0..200 {
                let q = Point3::new(
                    rng.gen_range(-60.0..60.0),
                    rng.gen_range(-60.0..60.0),
                    rng.gen_range(-60.0..60.0),
                );
                let (bi, bd) = brute_force(&cloud.points, &q);
                let (i, d) = index.nearest(&q);
                assert_eq!(i, bi, "m={m}");
                assert!((d - bd).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn tie_breaks_to_smallest_index() {
        // Duplicate points: the query sits at the duplicates themselves and
        // exactly between two symmetric points.
        let pts = vec![
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(-1.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
        ];
        let index = NearestNeighborIndex::build(&PointCloud::from(pts)).unwrap();
        let (i, d) = index.nearest(&Point3::origin());
        assert_eq!(i, 0);
        assert!((d - 1.0).abs() <= 1e-15);
        let (i, d) = index.nearest(&Point3::new(1.0, 0.0, 0.0));
        assert_eq!(i, 0);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn empty_cloud_rejected() {
        assert!(NearestNeighborIndex::build(&PointCloud::default()).is_err());
    }

    #[test]
    fn query_counter_counts_each_call() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cloud = random_cloud(&mut rng, 64, 10.0);
        let index = NearestNeighborIndex::build(&cloud).unwrap();
        assert_eq!(index.query_count(), 0);
        for k in 0..17 {
            index.nearest(&Point3::new(k as f64, 0.0, 0.0));
        }
        assert_eq!(index.query_count(), 17);
    }

    #[test]
    fn radius_query_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cloud = random_cloud(&mut rng, 400, 20.0);
        let index = NearestNeighborIndex::build(&cloud).unwrap();
        for _ in 0..50 {
            let q = Point3::new(
                rng.gen_range(-25.0..25.0),
                rng.gen_range(-25.0..25.0),
                rng.gen_range(-25.0..25.0),
            );
            let r = rng.gen_range(0.0..15.0);
            let got = index.indices_within(&q, r);
            let want: Vec<u32> = cloud
                .points
                .iter()
                .enumerate()
                .filter(|(_, p)| (*p - q).norm() <= r)
                .map(|(i, _)| i as u32)
                .collect();
            assert_eq!(got, want);
        }
    }
}
