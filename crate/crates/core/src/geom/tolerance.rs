//! Shared geometric tolerances. Every predicate in the crate reads these
//! constants; none defines its own epsilon.

/// Point-on-plane and coplanarity distance tolerance, in millimeters.
pub const EPS_PLANE: f64 = 1e-6;

/// Minimum length of a non-degenerate segment, in millimeters.
pub const EPS_LEN: f64 = 1e-6;

/// Tolerance on `|n1 x n2|` below which two unit normals are parallel.
pub const EPS_ANGLE: f64 = 1e-9;

/// Tolerance on entries of composed rigid transforms.
pub const EPS_TRANSFORM: f64 = 1e-9;

/// Offset used to probe the region on either side of a boundary edge.
/// Must stay well above `EPS_PLANE` and below the smallest feature we cut.
pub(crate) const EPS_PROBE: f64 = 1e-4;
