use super::plane::{normalize_intervals, Interval, Line2, Segment2};
use super::polygon::{cross, Polygon2};
use super::tolerance::{EPS_LEN, EPS_PLANE};

/// Parameter intervals of `line ∩ poly` (closed region, holes removed),
/// sorted along the line and merged.
pub fn clip_line_intervals(line: &Line2, poly: &Polygon2) -> Vec<Interval> {
    let mut ts: Vec<f64> = Vec::new();
    let q = line.origin;
    let d = line.direction;
    for (a, b) in poly.edges() {
        let da = line.distance(&a);
        let db = line.distance(&b);
        if da <= EPS_PLANE {
            ts.push(line.param_of(&a));
        }
        if db <= EPS_PLANE {
            ts.push(line.param_of(&b));
        }
        if da <= EPS_PLANE || db <= EPS_PLANE {
            continue;
        }
        // Proper crossing of the edge's interior.
        let e = b - a;
        let denom = d.x * e.y - d.y * e.x;
        if denom.abs() < 1e-15 {
            continue;
        }
        let w = a - q;
        let t = (w.x * e.y - w.y * e.x) / denom;
        let u = (w.x * d.y - w.y * d.x) / denom;
        if (0.0..=1.0).contains(&u) {
            ts.push(t);
        }
    }
    if ts.is_empty() {
        return Vec::new();
    }
    ts.sort_by(|a, b| a.total_cmp(b));
    ts.dedup_by(|b, a| (*b - *a).abs() <= EPS_LEN);
    let mut out = Vec::new();
    for w in ts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 - t0 < EPS_LEN {
            continue;
        }
        if poly.contains(&line.at(0.5 * (t0 + t1))) {
            out.push(Interval { lo: t0, hi: t1 });
        }
    }
    normalize_intervals(&out)
}

/// Segments of `line ∩ poly`, ordered along the line and maximal.
pub fn clip_line_to_polygon(line: &Line2, poly: &Polygon2) -> Vec<Segment2> {
    clip_line_intervals(line, poly)
        .into_iter()
        .map(|iv| Segment2 {
            a: line.at(iv.lo),
            b: line.at(iv.hi),
        })
        .collect()
}

/// True when every point of `seg` lies on the polygon boundary, probed at
/// both endpoints and the midpoint.
pub fn segment_on_boundary(poly: &Polygon2, seg: &Segment2) -> bool {
    [seg.a, seg.midpoint(), seg.b].iter().all(|p| poly.on_boundary(p))
}

/// Outward unit normal of the boundary edge supporting `seg`, if `seg`
/// lies along one.
pub fn outward_normal_at(poly: &Polygon2, seg: &Segment2) -> Option<nalgebra::Vector2<f64>> {
    let m = seg.midpoint();
    for (a, b) in poly.edges() {
        if super::polygon::point_segment_distance(&m, &a, &b) <= EPS_PLANE
            && cross(&a, &b, &seg.a).abs() / (b - a).norm() <= EPS_PLANE
            && cross(&a, &b, &seg.b).abs() / (b - a).norm() <= EPS_PLANE
        {
            let e = (b - a).normalize();
            // Counter-clockwise outer rings and clockwise holes both keep the
            // material on the left of each edge.
            return Some(nalgebra::Vector2::new(e.y, -e.x));
        }
    }
    None
}
