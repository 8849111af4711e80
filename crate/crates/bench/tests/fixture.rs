//! The benchmarks assume the fixture builds; keep that assumption tested.

use shapespace::model::ShapeModel;

#[test]
fn fixture_builds_and_is_consistent() {
    let fx = shapespace_bench::fixture();
    assert_eq!(fx.corpus.shapes.len(), 20);
    assert_eq!(fx.global.vertex_count(), fx.hierarchy.vertex_count());
    assert_eq!(fx.local.vertex_count(), fx.hierarchy.vertex_count());
}
