use nalgebra::{Point3, Vector3};
use serde::Serialize;

use super::polygon::{Polygon2, Pt2};
use super::tolerance::{EPS_ANGLE, EPS_LEN, EPS_PLANE};
use super::transform::Transform;
use super::GeomError;

/// Plane `{p : normal · p = offset}` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane3 {
    normal: Vector3<f64>,
    offset: f64,
}

impl Plane3 {
    pub fn new(normal: Vector3<f64>, offset: f64) -> Result<Self, GeomError> {
        let n = normal.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(GeomError::Degenerate("plane normal has zero length".into()));
        }
        Ok(Self {
            normal: normal / n,
            offset: offset / n,
        })
    }

    pub fn through(point: &Point3<f64>, normal: Vector3<f64>) -> Result<Self, GeomError> {
        let n = normal.try_normalize(0.0).ok_or_else(|| GeomError::Degenerate("zero normal".into()))?;
        Ok(Self {
            normal: n,
            offset: n.dot(&point.coords),
        })
    }

    pub fn normal(&self) -> &Vector3<f64> {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }

    /// Same plane with the normal sign fixed so that its largest-magnitude
    /// component is positive.
    pub fn canonical(&self) -> Plane3 {
        let n = self.normal;
        let k = n.iamax();
        if n[k] < 0.0 {
            Plane3 {
                normal: -n,
                offset: -self.offset,
            }
        } else {
            *self
        }
    }

    pub fn is_parallel_to(&self, other: &Plane3) -> bool {
        self.normal.cross(&other.normal).norm() < EPS_ANGLE
            || self.normal.dot(&other.normal).abs() > 1.0 - EPS_ANGLE
    }

    pub fn is_coplanar_with(&self, other: &Plane3) -> bool {
        let a = self.canonical();
        let b = other.canonical();
        a.normal.dot(&b.normal).abs() > 1.0 - EPS_ANGLE && (a.offset - b.offset).abs() < EPS_PLANE
    }
}

/// Infinite line `origin + t·direction`, unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line3 {
    pub origin: Point3<f64>,
    pub direction: Vector3<f64>,
}

impl Line3 {
    pub fn at(&self, t: f64) -> Point3<f64> {
        self.origin + self.direction * t
    }

    pub fn param_of(&self, p: &Point3<f64>) -> f64 {
        (p - self.origin).dot(&self.direction)
    }

    /// Same line, with the direction flipped.
    pub fn reversed(&self) -> Line3 {
        Line3 {
            origin: self.origin,
            direction: -self.direction,
        }
    }
}

/// Infinite 2D line `origin + t·direction`, unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line2 {
    pub origin: Pt2,
    pub direction: nalgebra::Vector2<f64>,
}

impl Line2 {
    pub fn new(origin: Pt2, direction: nalgebra::Vector2<f64>) -> Result<Self, GeomError> {
        let d = direction
            .try_normalize(0.0)
            .ok_or_else(|| GeomError::Degenerate("line direction has zero length".into()))?;
        Ok(Self { origin, direction: d })
    }

    pub fn through(a: Pt2, b: Pt2) -> Result<Self, GeomError> {
        Self::new(a, b - a)
    }

    pub fn at(&self, t: f64) -> Pt2 {
        self.origin + self.direction * t
    }

    pub fn param_of(&self, p: &Pt2) -> f64 {
        (p - self.origin).dot(&self.direction)
    }

    pub fn distance(&self, p: &Pt2) -> f64 {
        let v = p - self.origin;
        (v.x * self.direction.y - v.y * self.direction.x).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlaneIntersection {
    Line(Line3),
    Parallel,
    Coplanar,
}

/// Plane of a polygon placed by `placement`: the image of the local z = 0
/// plane, normal along the placed front direction.
pub fn plane_of(poly: &Polygon2, placement: &Transform) -> Result<Plane3, GeomError> {
    // Three non-collinear vertices define the plane; collinear input is
    // rejected rather than silently falling back to the frame normal.
    let pts = poly.outer();
    let a = pts[0];
    let mut found = None;
    'outer: for i in 1..pts.len() {
        for j in (i + 1)..pts.len() {
            let u = pts[i] - a;
            let v = pts[j] - a;
            if (u.x * v.y - u.y * v.x).abs() > EPS_LEN * EPS_LEN.max(u.norm() * v.norm() * 1e-12) {
                found = Some((i, j));
                break 'outer;
            }
        }
    }
    let (i, j) = found.ok_or_else(|| GeomError::Degenerate("polygon vertices are collinear".into()))?;
    let pa = placement.apply_xy(a.x, a.y);
    let pb = placement.apply_xy(pts[i].x, pts[i].y);
    let pc = placement.apply_xy(pts[j].x, pts[j].y);
    let mut n = (pb - pa).cross(&(pc - pa));
    // Keep the normal pointing along the placed front face.
    let front = placement.apply_vector(&Vector3::z());
    if n.dot(&front) < 0.0 {
        n = -n;
    }
    Plane3::through(&pa, n)
}

pub fn plane_intersection(p1: &Plane3, p2: &Plane3) -> PlaneIntersection {
    if p1.is_coplanar_with(p2) {
        return PlaneIntersection::Coplanar;
    }
    let n1 = p1.normal;
    let n2 = p2.normal;
    let dir = n1.cross(&n2);
    if dir.norm() < EPS_ANGLE {
        return PlaneIntersection::Parallel;
    }
    // Point on both planes closest to the origin.
    let d1 = p1.offset;
    let d2 = p2.offset;
    let n12 = n1.dot(&n2);
    let det = 1.0 - n12 * n12;
    let c1 = (d1 - d2 * n12) / det;
    let c2 = (d2 - d1 * n12) / det;
    let origin = Point3::from(n1 * c1 + n2 * c2);
    PlaneIntersection::Line(Line3 {
        origin,
        direction: dir.normalize(),
    })
}

/// Directed 3D segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment3 {
    pub a: Point3<f64>,
    pub b: Point3<f64>,
}

impl Segment3 {
    pub fn new(a: Point3<f64>, b: Point3<f64>) -> Result<Self, GeomError> {
        if (b - a).norm() <= EPS_LEN {
            return Err(GeomError::Degenerate("segment shorter than eps_len".into()));
        }
        Ok(Self { a, b })
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn midpoint(&self) -> Point3<f64> {
        Point3::from((self.a.coords + self.b.coords) * 0.5)
    }
}

/// Directed 2D segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment2 {
    pub a: Pt2,
    pub b: Pt2,
}

impl Segment2 {
    pub fn new(a: Pt2, b: Pt2) -> Result<Self, GeomError> {
        if (b - a).norm() <= EPS_LEN {
            return Err(GeomError::Degenerate("segment shorter than eps_len".into()));
        }
        Ok(Self { a, b })
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn midpoint(&self) -> Pt2 {
        Pt2::from((self.a.coords + self.b.coords) * 0.5)
    }

    pub fn point_at(&self, s: f64) -> Pt2 {
        self.a + (self.b - self.a) * s
    }

    pub fn direction(&self) -> nalgebra::Vector2<f64> {
        (self.b - self.a).normalize()
    }

    pub fn reversed(&self) -> Segment2 {
        Segment2 { a: self.b, b: self.a }
    }
}

/// Closed 1D interval on a carrier line, by arclength parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo: lo.min(hi),
            hi: lo.max(hi),
        }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.len() < EPS_LEN
    }
}

/// Set intersection of two collections of intervals on the same line.
/// Result intervals are maximal, sorted, and at least `EPS_LEN` long.
pub fn interval_set_intersection(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let a = normalize_intervals(a);
    let b = normalize_intervals(b);
    let mut out: Vec<Interval> = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].lo.max(b[j].lo);
        let hi = a[i].hi.min(b[j].hi);
        if hi - lo >= EPS_LEN {
            out.push(Interval { lo, hi });
        }
        if a[i].hi < b[j].hi {
            i += 1;
        } else {
            j += 1;
        }
    }
    normalize_intervals(&out)
}

/// Sorts and merges touching/overlapping intervals, dropping empty ones.
pub fn normalize_intervals(v: &[Interval]) -> Vec<Interval> {
    let mut v: Vec<Interval> = v.iter().copied().filter(|iv| !iv.is_empty()).collect();
    v.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    let mut out: Vec<Interval> = Vec::with_capacity(v.len());
    for iv in v {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi + EPS_LEN => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

/// Intersection of two sets of 2D segments lying on one carrier line.
/// Segments are parameterized by arclength along `line`.
pub fn segment_set_intersection(
    line: &Line2,
    sa: &[Segment2],
    sb: &[Segment2],
) -> Result<Vec<Segment2>, GeomError> {
    let to_intervals = |segs: &[Segment2]| -> Result<Vec<Interval>, GeomError> {
        segs.iter()
            .map(|s| {
                if line.distance(&s.a) > EPS_PLANE || line.distance(&s.b) > EPS_PLANE {
                    Err(GeomError::NotCollinear)
                } else {
                    Ok(Interval::new(line.param_of(&s.a), line.param_of(&s.b)))
                }
            })
            .collect()
    };
    let ia = to_intervals(sa)?;
    let ib = to_intervals(sb)?;
    Ok(interval_set_intersection(&ia, &ib)
        .into_iter()
        .map(|iv| Segment2 {
            a: line.at(iv.lo),
            b: line.at(iv.hi),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    /// Brute-force oracle: sample the line finely and rebuild runs.
    fn sweep_oracle(a: &[Interval], b: &[Interval], lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let step = 1e-3;
        let inside = |x: f64, s: &[Interval]| s.iter().any(|i| x >= i.lo && x <= i.hi);
        let mut runs = Vec::new();
        let mut start: Option<f64> = None;
        let mut x = lo;
        while x <= hi + step {
            let in_both = inside(x, a) && inside(x, b);
            match (in_both, start) {
                (true, None) => start = Some(x),
                (false, Some(s)) => {
                    runs.push((s, x - step));
                    start = None;
                }
                _ => {}
            }
            x += step;
        }
        runs
    }

    #[test]
    fn basic_overlaps() {
        let r = interval_set_intersection(&[iv(0.0, 10.0)], &[iv(5.0, 15.0)]);
        assert_eq!(r, vec![iv(5.0, 10.0)]);
        assert!(interval_set_intersection(&[iv(0.0, 4.0)], &[iv(6.0, 9.0)]).is_empty());
    }

    #[test]
    fn two_piece_overlap_matches_sweep() {
        let a = [iv(0.0, 3.0), iv(5.0, 9.0)];
        let b = [iv(2.0, 7.0)];
        let r = interval_set_intersection(&a, &b);
        assert_eq!(r, vec![iv(2.0, 3.0), iv(5.0, 7.0)]);
        let oracle = sweep_oracle(&a, &b, -1.0, 10.0);
        assert_eq!(oracle.len(), r.len());
        for ((lo, hi), got) in oracle.iter().zip(&r) {
            assert!((lo - got.lo).abs() < 2e-3 && (hi - got.hi).abs() < 2e-3);
        }
    }

    #[test]
    fn touching_intervals_are_discarded() {
        assert!(interval_set_intersection(&[iv(0.0, 1.0)], &[iv(1.0, 2.0)]).is_empty());
    }

    #[test]
    fn segment_sets_require_collinearity() {
        let line = Line2::through(Pt2::new(0.0, 0.0), Pt2::new(1.0, 0.0)).unwrap();
        let a = [Segment2::new(Pt2::new(0.0, 0.0), Pt2::new(10.0, 0.0)).unwrap()];
        let b = [Segment2::new(Pt2::new(5.0, 1.0), Pt2::new(15.0, 1.0)).unwrap()];
        assert!(matches!(segment_set_intersection(&line, &a, &b), Err(GeomError::NotCollinear)));
        let b = [Segment2::new(Pt2::new(15.0, 0.0), Pt2::new(5.0, 0.0)).unwrap()];
        let r = segment_set_intersection(&line, &a, &b).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].a.x - 5.0).abs() < 1e-12 && (r[0].b.x - 10.0).abs() < 1e-12);
    }

    #[test]
    fn plane_of_unit_square() {
        let sq = Polygon2::rect(0.0, 0.0, 1.0, 1.0);
        let p = plane_of(&sq, &Transform::identity()).unwrap();
        assert!((p.normal() - Vector3::z()).norm() < 1e-12 && p.offset().abs() < 1e-12);
        let p = plane_of(&sq, &Transform::translation(0.0, 0.0, 5.0)).unwrap();
        assert!((p.offset() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn plane_of_rotated_square_matches_cross_product() {
        let sq = Polygon2::rect(0.0, 0.0, 1.0, 1.0);
        let t = Transform::rot_x(90.0);
        let p = plane_of(&sq, &t).unwrap();
        // Oracle: transform three vertices and take the cross product.
        let a = t.apply_xy(0.0, 0.0);
        let b = t.apply_xy(1.0, 0.0);
        let c = t.apply_xy(0.0, 1.0);
        let n = (b - a).cross(&(c - a)).normalize();
        assert!((p.normal() - n).norm() < 1e-12);
        assert!((p.normal().y.abs() - 1.0).abs() < 1e-12);
        for v in sq.outer() {
            assert!(p.signed_distance(&t.apply_xy(v.x, v.y)).abs() < EPS_PLANE);
        }
    }

    #[test]
    fn collinear_polygon_has_no_plane() {
        let bad = Polygon2::new_unchecked(
            vec![Pt2::new(0.0, 0.0), Pt2::new(1.0, 0.0), Pt2::new(2.0, 0.0)],
            vec![],
        );
        assert!(plane_of(&bad, &Transform::identity()).is_err());
    }

    #[test]
    fn plane_pairs() {
        let z0 = Plane3::new(Vector3::z(), 0.0).unwrap();
        let y0 = Plane3::new(Vector3::y(), 0.0).unwrap();
        let z3 = Plane3::new(Vector3::z(), 3.0).unwrap();
        let x1 = Plane3::new(Vector3::x(), 1.0).unwrap();
        match plane_intersection(&z0, &y0) {
            PlaneIntersection::Line(l) => {
                assert!(l.origin.coords.norm() < 1e-12);
                assert!((l.direction.x.abs() - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(plane_intersection(&z0, &z3), PlaneIntersection::Parallel);
        assert_eq!(plane_intersection(&z0, &z0), PlaneIntersection::Coplanar);
        let flipped = Plane3::new(-Vector3::z(), 0.0).unwrap();
        assert_eq!(plane_intersection(&z0, &flipped), PlaneIntersection::Coplanar);
        match plane_intersection(&z0, &x1) {
            PlaneIntersection::Line(l) => {
                assert!((l.origin.x - 1.0).abs() < 1e-12 && l.origin.z.abs() < 1e-12);
                assert!((l.direction.y.abs() - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }
}
