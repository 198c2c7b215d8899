//! Computational-geometry substrate shared by every lowering pass.

mod boolean;
mod clip;
mod mesh;
mod plane;
mod polygon;
pub mod tolerance;
mod transform;

use thiserror::Error;

pub use boolean::{
    boolean, overlap_area, polygon_difference, polygon_intersection, polygon_union, regions_touch, BoolOp,
};
pub use clip::{clip_line_intervals, clip_line_to_polygon, outward_normal_at, segment_on_boundary};
pub use mesh::{extrude_polygon, TriangleMesh};
pub use plane::{
    interval_set_intersection, normalize_intervals, plane_intersection, plane_of, segment_set_intersection,
    Interval, Line2, Line3, Plane3, PlaneIntersection, Segment2, Segment3,
};
pub use polygon::{point_segment_distance, signed_area, Bbox2, Polygon2, Pt2};
pub use transform::Transform;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("union of disjoint regions")]
    DisjointUnion,
    #[error("segments are not collinear with the carrier line")]
    NotCollinear,
    #[error("boolean operation failed: {0}")]
    BooleanFailed(String),
    #[error("triangulation failed: {0}")]
    Triangulation(String),
}
