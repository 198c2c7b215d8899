use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use super::tolerance::{EPS_LEN, EPS_PLANE};
use super::GeomError;

pub type Pt2 = Point2<f64>;

/// A planar part outline in its local frame: one counter-clockwise outer
/// ring and any number of clockwise holes. Rings are stored open (the
/// closing edge from last to first vertex is implicit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon2 {
    outer: Vec<Pt2>,
    holes: Vec<Vec<Pt2>>,
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bbox2 {
    pub min: Pt2,
    pub max: Pt2,
}

impl Bbox2 {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

impl Polygon2 {
    /// Validates and wraps the given rings.
    pub fn new(outer: Vec<Pt2>, holes: Vec<Vec<Pt2>>) -> Result<Self, GeomError> {
        let p = Self { outer, holes };
        p.validate()?;
        Ok(p)
    }

    /// Like [`Polygon2::new`] but first fixes ring orientation.
    pub fn from_rings(mut outer: Vec<Pt2>, mut holes: Vec<Vec<Pt2>>) -> Result<Self, GeomError> {
        if signed_area(&outer) < 0.0 {
            outer.reverse();
        }
        for h in &mut holes {
            if signed_area(h) > 0.0 {
                h.reverse();
            }
        }
        Self::new(outer, holes)
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self::new(
            vec![
                Pt2::new(x0, y0),
                Pt2::new(x1, y0),
                Pt2::new(x1, y1),
                Pt2::new(x0, y1),
            ],
            vec![],
        )
        .expect("axis-aligned rectangle with positive extent")
    }

    pub(crate) fn new_unchecked(outer: Vec<Pt2>, holes: Vec<Vec<Pt2>>) -> Self {
        Self { outer, holes }
    }

    pub fn outer(&self) -> &[Pt2] {
        &self.outer
    }

    pub fn holes(&self) -> &[Vec<Pt2>] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &[Pt2]> {
        std::iter::once(self.outer.as_slice()).chain(self.holes.iter().map(|h| h.as_slice()))
    }

    /// Every boundary edge of every ring.
    pub fn edges(&self) -> impl Iterator<Item = (Pt2, Pt2)> + '_ {
        self.rings().flat_map(ring_edges)
    }

    /// Net area (outer minus holes).
    pub fn area(&self) -> f64 {
        signed_area(&self.outer) + self.holes.iter().map(|h| signed_area(h)).sum::<f64>()
    }

    pub fn bbox(&self) -> Bbox2 {
        let mut min = Pt2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Pt2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.outer {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Bbox2 { min, max }
    }

    /// Applies `f` to every vertex, keeping ring structure. Orientation is
    /// repaired if `f` is a reflection.
    pub fn map_points(&self, f: impl Fn(&Pt2) -> Pt2) -> Polygon2 {
        let mut outer: Vec<Pt2> = self.outer.iter().map(&f).collect();
        let mut holes: Vec<Vec<Pt2>> = self.holes.iter().map(|h| h.iter().map(&f).collect()).collect();
        if signed_area(&outer) < 0.0 {
            outer.reverse();
            for h in &mut holes {
                h.reverse();
            }
        }
        Polygon2 { outer, holes }
    }

    /// Closed-region membership: boundary points (within `EPS_PLANE`) count
    /// as inside.
    pub fn contains(&self, p: &Pt2) -> bool {
        if self.distance_to_boundary(p) <= EPS_PLANE {
            return true;
        }
        self.contains_strict(p)
    }

    /// Even-odd membership without boundary tolerance.
    pub fn contains_strict(&self, p: &Pt2) -> bool {
        self.rings().filter(|r| ring_winding_crossings(r, p)).count() % 2 == 1
    }

    pub fn distance_to_boundary(&self, p: &Pt2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, &a, &b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn on_boundary(&self, p: &Pt2) -> bool {
        self.distance_to_boundary(p) <= EPS_PLANE
    }

    pub fn validate(&self) -> Result<(), GeomError> {
        validate_ring(&self.outer, "outer")?;
        if signed_area(&self.outer) <= 0.0 {
            return Err(GeomError::InvalidPolygon("outer ring is not counter-clockwise".into()));
        }
        for (i, h) in self.holes.iter().enumerate() {
            validate_ring(h, &format!("hole {i}"))?;
            if signed_area(h) >= 0.0 {
                return Err(GeomError::InvalidPolygon(format!("hole {i} is not clockwise")));
            }
        }
        // Rings must not cross each other. Touching at isolated points is
        // tolerated; a shared vertex is not a crossing.
        let rings: Vec<&[Pt2]> = self.rings().collect();
        for i in 0..rings.len() {
            for j in (i + 1)..rings.len() {
                for (a, b) in ring_edges(rings[i]) {
                    for (c, d) in ring_edges(rings[j]) {
                        if segments_cross_properly(&a, &b, &c, &d) {
                            return Err(GeomError::InvalidPolygon(format!(
                                "rings {i} and {j} intersect"
                            )));
                        }
                    }
                }
            }
        }
        for (i, h) in self.holes.iter().enumerate() {
            let probe = interior_probe(h);
            let outer_only = Polygon2::new_unchecked(self.outer.clone(), vec![]);
            if !outer_only.contains(&probe) {
                return Err(GeomError::InvalidPolygon(format!("hole {i} lies outside the outer ring")));
            }
        }
        Ok(())
    }

    /// Adds `ring` as a new hole when it lies strictly inside the material,
    /// clear of every existing ring. Returns `None` when that cannot be
    /// shown cheaply; callers then fall back to a boolean difference.
    pub fn with_interior_hole(&self, ring: &[Pt2]) -> Option<Polygon2> {
        if ring.len() < 3 {
            return None;
        }
        let mut lo = ring[0];
        let mut hi = ring[0];
        for p in ring {
            lo = Pt2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Pt2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let near = |p: &Pt2| {
            p.x >= lo.x - EPS_LEN && p.x <= hi.x + EPS_LEN && p.y >= lo.y - EPS_LEN && p.y <= hi.y + EPS_LEN
        };
        for r in self.rings() {
            if r.iter().any(near) {
                return None;
            }
            for (a, b) in ring_edges(r) {
                for (c, d) in ring_edges(ring) {
                    if segments_cross_properly(&a, &b, &c, &d) {
                        return None;
                    }
                }
            }
        }
        if !ring.iter().all(|p| self.contains_strict(p) && self.distance_to_boundary(p) > EPS_LEN) {
            return None;
        }
        let mut hole = ring.to_vec();
        if signed_area(&hole) > 0.0 {
            hole.reverse();
        }
        let mut holes = self.holes.clone();
        holes.push(hole);
        Some(Polygon2::new_unchecked(self.outer.clone(), holes))
    }

    /// Canonical form for emission: every ring starts at its
    /// lexicographically smallest vertex; holes sorted by that vertex.
    pub fn canonical(&self) -> Polygon2 {
        let outer = rotate_to_min(&self.outer);
        let mut holes: Vec<Vec<Pt2>> = self.holes.iter().map(|h| rotate_to_min(h)).collect();
        holes.sort_by(|a, b| cmp_pt(&a[0], &b[0]));
        Polygon2 { outer, holes }
    }

    /// Removes repeated and collinear vertices from every ring.
    pub fn simplified(&self) -> Polygon2 {
        Polygon2 {
            outer: simplify_ring(&self.outer),
            holes: self.holes.iter().map(|h| simplify_ring(h)).collect(),
        }
    }
}

pub fn ring_edges(ring: &[Pt2]) -> impl Iterator<Item = (Pt2, Pt2)> + '_ {
    let n = ring.len();
    (0..n).map(move |i| (ring[i], ring[(i + 1) % n]))
}

/// Shoelace signed area; positive for counter-clockwise rings.
pub fn signed_area(ring: &[Pt2]) -> f64 {
    let n = ring.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

pub fn cross(o: &Pt2, a: &Pt2, b: &Pt2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

pub fn point_segment_distance(p: &Pt2, a: &Pt2, b: &Pt2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Ray-crossing parity test for one ring (ray towards +x).
fn ring_winding_crossings(ring: &[Pt2], p: &Pt2) -> bool {
    let mut inside = false;
    let n = ring.len();
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (ring[i], ring[j]);
        if (pi.y > p.y) != (pj.y > p.y) {
            let x = pj.x + (p.y - pj.y) * (pi.x - pj.x) / (pi.y - pj.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// True when the open segments ab and cd cross at a single interior point.
pub(crate) fn segments_cross_properly(a: &Pt2, b: &Pt2, c: &Pt2, d: &Pt2) -> bool {
    let scale = (b - a).norm().max((d - c).norm()).max(1.0);
    let tol = EPS_LEN * scale;
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
}

fn validate_ring(ring: &[Pt2], what: &str) -> Result<(), GeomError> {
    if ring.len() < 3 {
        return Err(GeomError::InvalidPolygon(format!("{what} ring has fewer than 3 vertices")));
    }
    if ring.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(GeomError::InvalidPolygon(format!("{what} ring has a non-finite vertex")));
    }
    if signed_area(ring).abs() <= EPS_LEN * EPS_LEN {
        return Err(GeomError::InvalidPolygon(format!("{what} ring is degenerate")));
    }
    let n = ring.len();
    for (i, (a, b)) in ring_edges(ring).enumerate() {
        if (b - a).norm() <= EPS_LEN {
            return Err(GeomError::InvalidPolygon(format!("{what} ring has a zero-length edge at {i}")));
        }
        for (j, (c, d)) in ring_edges(ring).enumerate().skip(i + 1) {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_cross_properly(&a, &b, &c, &d)
                || point_segment_distance(&c, &a, &b) <= EPS_LEN
                || point_segment_distance(&d, &a, &b) <= EPS_LEN
            {
                return Err(GeomError::InvalidPolygon(format!(
                    "{what} ring self-intersects between edges {i} and {j}"
                )));
            }
        }
    }
    Ok(())
}

/// A point strictly inside a simple ring.
pub(crate) fn interior_probe(ring: &[Pt2]) -> Pt2 {
    // Horizontal scanline through the middle of the ring's y-extent, taking
    // the midpoint of the widest inside span.
    let (ymin, ymax) = ring
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)));
    for frac in [0.5, 0.37, 0.63, 0.21, 0.79, 0.11, 0.89] {
        let y = ymin + (ymax - ymin) * frac;
        let mut xs: Vec<f64> = ring_edges(ring)
            .filter(|(a, b)| (a.y > y) != (b.y > y))
            .map(|(a, b)| a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y))
            .collect();
        xs.sort_by(|a, b| a.total_cmp(b));
        let best = xs
            .chunks(2)
            .filter(|c| c.len() == 2)
            .max_by(|a, b| (a[1] - a[0]).total_cmp(&(b[1] - b[0])));
        if let Some(c) = best {
            if c[1] - c[0] > 0.0 {
                return Pt2::new(0.5 * (c[0] + c[1]), y);
            }
        }
    }
    ring[0]
}

fn cmp_pt(a: &Pt2, b: &Pt2) -> std::cmp::Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
}

fn rotate_to_min(ring: &[Pt2]) -> Vec<Pt2> {
    let start = ring
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| cmp_pt(a, b))
        .map(|(i, _)| i)
        .unwrap_or(0);
    ring[start..].iter().chain(ring[..start].iter()).copied().collect()
}

pub(crate) fn simplify_ring(ring: &[Pt2]) -> Vec<Pt2> {
    let mut pts: Vec<Pt2> = Vec::with_capacity(ring.len());
    for p in ring {
        if pts.last().is_none_or(|q| (p - q).norm() > EPS_LEN) {
            pts.push(*p);
        }
    }
    while pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() <= EPS_LEN {
        pts.pop();
    }
    loop {
        let n = pts.len();
        if n < 3 {
            return pts;
        }
        let mut removed = false;
        for i in 0..n {
            let prev = pts[(i + n - 1) % n];
            let cur = pts[i];
            let next = pts[(i + 1) % n];
            let base = (next - prev).norm().max(EPS_LEN);
            // Drop vertices that sit on the chord between their neighbours,
            // including spikes that fold back on themselves.
            if cross(&prev, &cur, &next).abs() / base <= EPS_LEN {
                pts.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            return pts;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> Polygon2 {
        Polygon2::rect(0.0, 0.0, 1.0, 1.0)
    }

    #[test]
    fn unit_square_area_and_orientation() {
        assert!((sq().area() - 1.0).abs() < 1e-15);
        assert!(signed_area(sq().outer()) > 0.0);
    }

    #[test]
    fn clockwise_outer_rejected() {
        let pts = vec![Pt2::new(0.0, 0.0), Pt2::new(0.0, 1.0), Pt2::new(1.0, 1.0), Pt2::new(1.0, 0.0)];
        assert!(Polygon2::new(pts.clone(), vec![]).is_err());
        assert!(Polygon2::from_rings(pts, vec![]).is_ok());
    }

    #[test]
    fn bowtie_rejected() {
        let pts = vec![Pt2::new(0.0, 0.0), Pt2::new(1.0, 1.0), Pt2::new(1.0, 0.0), Pt2::new(0.0, 1.0)];
        assert!(Polygon2::from_rings(pts, vec![]).is_err());
    }

    #[test]
    fn hole_must_be_inside() {
        let hole = vec![Pt2::new(2.0, 2.0), Pt2::new(2.0, 3.0), Pt2::new(3.0, 3.0), Pt2::new(3.0, 2.0)];
        assert!(Polygon2::new(sq().outer().to_vec(), vec![hole]).is_err());
    }

    #[test]
    fn membership_counts_boundary_and_excludes_holes() {
        let hole = vec![
            Pt2::new(0.25, 0.25),
            Pt2::new(0.25, 0.75),
            Pt2::new(0.75, 0.75),
            Pt2::new(0.75, 0.25),
        ];
        let p = Polygon2::new(sq().outer().to_vec(), vec![hole]).unwrap();
        assert!((p.area() - 0.75).abs() < 1e-12);
        assert!(p.contains(&Pt2::new(0.1, 0.1)));
        assert!(p.contains(&Pt2::new(1.0, 0.5)));
        assert!(p.contains(&Pt2::new(0.25, 0.5)));
        assert!(!p.contains(&Pt2::new(0.5, 0.5)));
        assert!(!p.contains(&Pt2::new(1.5, 0.5)));
    }

    #[test]
    fn simplify_drops_collinear() {
        let r = vec![
            Pt2::new(0.0, 0.0),
            Pt2::new(0.5, 0.0),
            Pt2::new(1.0, 0.0),
            Pt2::new(1.0, 1.0),
            Pt2::new(0.0, 1.0),
        ];
        assert_eq!(simplify_ring(&r).len(), 4);
    }

    #[test]
    fn canonical_starts_at_min_vertex() {
        let p = Polygon2::new(
            vec![Pt2::new(1.0, 0.0), Pt2::new(1.0, 1.0), Pt2::new(0.0, 1.0), Pt2::new(0.0, 0.0)],
            vec![],
        )
        .unwrap();
        assert_eq!(p.canonical().outer()[0], Pt2::new(0.0, 0.0));
    }
}
