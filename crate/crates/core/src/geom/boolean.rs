//! Polygon boolean operations on regions with holes.
//!
//! Every edge of both operands is split at all mutual intersection points
//! (crossings, T-junctions and collinear overlaps). Each resulting sub-edge
//! is then classified by probing the region on its left and right; it is
//! kept, reversed, or dropped depending on whether the result region lies
//! on exactly one side. The surviving directed edges are traced into rings.

use std::collections::BTreeMap;

use nalgebra::Vector2;

use super::polygon::{
    interior_probe, point_segment_distance, signed_area, simplify_ring, Polygon2, Pt2,
};
use super::tolerance::{EPS_LEN, EPS_PROBE};
use super::GeomError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOp {
    Union,
    Intersection,
    Difference,
}

impl BoolOp {
    fn apply(self, a: bool, b: bool) -> bool {
        match self {
            BoolOp::Union => a || b,
            BoolOp::Intersection => a && b,
            BoolOp::Difference => a && !b,
        }
    }
}

/// Union of two polygons that overlap or share boundary.
pub fn polygon_union(a: &Polygon2, b: &Polygon2) -> Result<Polygon2, GeomError> {
    let mut out = boolean(std::slice::from_ref(a), std::slice::from_ref(b), BoolOp::Union)?;
    if out.len() != 1 {
        return Err(GeomError::DisjointUnion);
    }
    Ok(out.remove(0))
}

pub fn polygon_difference(a: &Polygon2, b: &Polygon2) -> Result<Vec<Polygon2>, GeomError> {
    boolean(std::slice::from_ref(a), std::slice::from_ref(b), BoolOp::Difference)
}

pub fn polygon_intersection(a: &Polygon2, b: &Polygon2) -> Result<Vec<Polygon2>, GeomError> {
    boolean(std::slice::from_ref(a), std::slice::from_ref(b), BoolOp::Intersection)
}

/// Area of the overlap of two polygons (zero when they only touch).
pub fn overlap_area(a: &Polygon2, b: &Polygon2) -> Result<f64, GeomError> {
    Ok(polygon_intersection(a, b)?.iter().map(Polygon2::area).sum())
}

/// Boolean operation on two polygon sets. Each set must consist of
/// interior-disjoint valid polygons.
pub fn boolean(a: &[Polygon2], b: &[Polygon2], op: BoolOp) -> Result<Vec<Polygon2>, GeomError> {
    let mut pool = VertexPool::default();
    let edges_a: Vec<(Pt2, Pt2)> = a.iter().flat_map(|p| p.edges().collect::<Vec<_>>()).collect();
    let edges_b: Vec<(Pt2, Pt2)> = b.iter().flat_map(|p| p.edges().collect::<Vec<_>>()).collect();

    let mut splits_a: Vec<Vec<Pt2>> = edges_a.iter().map(|(s, e)| vec![*s, *e]).collect();
    let mut splits_b: Vec<Vec<Pt2>> = edges_b.iter().map(|(s, e)| vec![*s, *e]).collect();
    for (i, (p, q)) in edges_a.iter().enumerate() {
        for (j, (r, s)) in edges_b.iter().enumerate() {
            if !boxes_touch(p, q, r, s) {
                continue;
            }
            for x in [r, s] {
                if point_segment_distance(x, p, q) <= EPS_LEN {
                    splits_a[i].push(*x);
                }
            }
            for x in [p, q] {
                if point_segment_distance(x, r, s) <= EPS_LEN {
                    splits_b[j].push(*x);
                }
            }
            if let Some(x) = proper_crossing(p, q, r, s) {
                splits_a[i].push(x);
                splits_b[j].push(x);
            }
        }
    }

    let mut sub_edges: Vec<(usize, usize)> = Vec::new();
    for (edges, splits) in [(&edges_a, &mut splits_a), (&edges_b, &mut splits_b)] {
        for ((s, e), pts) in edges.iter().zip(splits.iter_mut()) {
            let dir = e - s;
            pts.sort_by(|x, y| (x - s).dot(&dir).total_cmp(&(y - s).dot(&dir)));
            let ids: Vec<usize> = pts.iter().map(|p| pool.id(*p)).collect();
            for w in ids.windows(2) {
                if w[0] != w[1] {
                    sub_edges.push((w[0], w[1]));
                }
            }
        }
    }

    let inside = |set: &[Polygon2], p: &Pt2| set.iter().any(|poly| poly.contains_strict(p));
    let mut kept: BTreeMap<(usize, usize), ()> = BTreeMap::new();
    for (u, v) in sub_edges {
        let (pu, pv) = (pool.pts[u], pool.pts[v]);
        let d = pv - pu;
        let len = d.norm();
        if len <= EPS_LEN {
            continue;
        }
        let left = Vector2::new(-d.y, d.x) / len;
        let m = Pt2::from((pu.coords + pv.coords) * 0.5);
        let pl = m + left * EPS_PROBE;
        let pr = m - left * EPS_PROBE;
        let in_left = op.apply(inside(a, &pl), inside(b, &pl));
        let in_right = op.apply(inside(a, &pr), inside(b, &pr));
        match (in_left, in_right) {
            (true, false) => {
                kept.insert((u, v), ());
            }
            (false, true) => {
                kept.insert((v, u), ());
            }
            _ => {}
        }
    }

    let rings = trace_rings(&pool.pts, kept.into_keys().collect())?;
    assemble(rings)
}

fn boxes_touch(p: &Pt2, q: &Pt2, r: &Pt2, s: &Pt2) -> bool {
    let e = EPS_LEN;
    p.x.min(q.x) <= r.x.max(s.x) + e
        && r.x.min(s.x) <= p.x.max(q.x) + e
        && p.y.min(q.y) <= r.y.max(s.y) + e
        && r.y.min(s.y) <= p.y.max(q.y) + e
}

/// Crossing point strictly inside both segments, if any.
fn proper_crossing(p: &Pt2, q: &Pt2, r: &Pt2, s: &Pt2) -> Option<Pt2> {
    let d1 = q - p;
    let d2 = s - r;
    let denom = d1.x * d2.y - d1.y * d2.x;
    if denom.abs() <= 1e-12 * d1.norm() * d2.norm() {
        return None;
    }
    let w = r - p;
    let t = (w.x * d2.y - w.y * d2.x) / denom;
    let u = (w.x * d1.y - w.y * d1.x) / denom;
    let et = EPS_LEN / d1.norm();
    let eu = EPS_LEN / d2.norm();
    if t > et && t < 1.0 - et && u > eu && u < 1.0 - eu {
        Some(p + d1 * t)
    } else {
        None
    }
}

#[derive(Default)]
struct VertexPool {
    pts: Vec<Pt2>,
}

impl VertexPool {
    fn id(&mut self, p: Pt2) -> usize {
        if let Some(i) = self.pts.iter().position(|q| (q - p).norm() <= EPS_LEN) {
            return i;
        }
        self.pts.push(p);
        self.pts.len() - 1
    }
}

/// Follows directed edges into closed rings, turning as far left as
/// possible at shared vertices so touching faces stay separate.
fn trace_rings(pts: &[Pt2], edges: Vec<(usize, usize)>) -> Result<Vec<Vec<Pt2>>, GeomError> {
    let mut out_edges: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (u, v) in &edges {
        out_edges.entry(*u).or_default().push(*v);
    }
    let mut used: BTreeMap<(usize, usize), bool> = edges.iter().map(|e| (*e, false)).collect();
    let mut rings = Vec::new();
    for &(s, t) in &edges {
        if used[&(s, t)] {
            continue;
        }
        used.insert((s, t), true);
        let mut ring = vec![s];
        let (mut prev, mut cur) = (s, t);
        let mut guard = 0;
        while cur != s {
            guard += 1;
            if guard > edges.len() + 1 {
                return Err(GeomError::BooleanFailed("ring tracing did not close".into()));
            }
            ring.push(cur);
            let d_in = pts[cur] - pts[prev];
            let next = out_edges
                .get(&cur)
                .into_iter()
                .flatten()
                .filter(|n| !used[&(cur, **n)])
                .max_by(|x, y| {
                    let ax = turn_angle(&d_in, &(pts[**x] - pts[cur]));
                    let ay = turn_angle(&d_in, &(pts[**y] - pts[cur]));
                    ax.total_cmp(&ay)
                })
                .copied()
                .ok_or_else(|| GeomError::BooleanFailed("open chain in boolean result".into()))?;
            used.insert((cur, next), true);
            prev = cur;
            cur = next;
        }
        rings.push(ring.into_iter().map(|i| pts[i]).collect());
    }
    Ok(rings)
}

fn turn_angle(d_in: &Vector2<f64>, d_out: &Vector2<f64>) -> f64 {
    let c = d_in.x * d_out.y - d_in.y * d_out.x;
    let d = d_in.dot(d_out);
    let a = c.atan2(d);
    if (a.abs() - std::f64::consts::PI).abs() < 1e-12 {
        -std::f64::consts::PI
    } else {
        a
    }
}

fn assemble(rings: Vec<Vec<Pt2>>) -> Result<Vec<Polygon2>, GeomError> {
    let mut outers: Vec<Vec<Pt2>> = Vec::new();
    let mut holes: Vec<Vec<Pt2>> = Vec::new();
    for r in rings {
        let r = simplify_ring(&r);
        if r.len() < 3 {
            continue;
        }
        let a = signed_area(&r);
        if a.abs() <= EPS_LEN * EPS_LEN {
            continue;
        }
        if a > 0.0 {
            outers.push(r);
        } else {
            holes.push(r);
        }
    }
    // Deterministic output order: by lexicographically smallest vertex.
    outers.sort_by(|a, b| min_vertex(a).partial_cmp(&min_vertex(b)).unwrap());
    let mut assigned: Vec<Vec<Vec<Pt2>>> = vec![Vec::new(); outers.len()];
    for h in holes {
        let probe = interior_probe(&h);
        let owner = outers
            .iter()
            .enumerate()
            .filter(|(_, o)| Polygon2::new_unchecked((*o).clone(), vec![]).contains_strict(&probe))
            .min_by(|(_, x), (_, y)| signed_area(x).total_cmp(&signed_area(y)))
            .map(|(i, _)| i)
            .ok_or_else(|| GeomError::BooleanFailed("hole without an enclosing ring".into()))?;
        assigned[owner].push(h);
    }
    outers
        .into_iter()
        .zip(assigned)
        .map(|(o, hs)| Polygon2::new(o, hs))
        .collect()
}

fn min_vertex(r: &[Pt2]) -> (f64, f64) {
    r.iter()
        .map(|p| (p.x, p.y))
        .fold((f64::INFINITY, f64::INFINITY), |m, p| if p < m { p } else { m })
}

/// True when the regions overlap or share boundary of positive length or
/// a vertex.
pub fn regions_touch(a: &Polygon2, b: &Polygon2) -> bool {
    for (p, q) in a.edges() {
        for (r, s) in b.edges() {
            if point_segment_distance(&r, &p, &q) <= EPS_LEN
                || point_segment_distance(&p, &r, &s) <= EPS_LEN
                || proper_crossing(&p, &q, &r, &s).is_some()
            {
                return true;
            }
        }
    }
    a.contains(&b.outer()[0]) || b.contains(&a.outer()[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(x: f64, y: f64) -> Polygon2 {
        Polygon2::rect(x, y, x + 1.0, y + 1.0)
    }

    /// Grid membership oracle for the union area.
    fn grid_union_area(a: &Polygon2, b: &Polygon2, step: f64) -> f64 {
        let bb = |p: &Polygon2| p.bbox();
        let (ba, bbb) = (bb(a), bb(b));
        let x0 = ba.min.x.min(bbb.min.x);
        let y0 = ba.min.y.min(bbb.min.y);
        let x1 = ba.max.x.max(bbb.max.x);
        let y1 = ba.max.y.max(bbb.max.y);
        let nx = ((x1 - x0) / step).ceil() as usize;
        let ny = ((y1 - y0) / step).ceil() as usize;
        let mut count = 0usize;
        for i in 0..nx {
            for j in 0..ny {
                let p = Pt2::new(x0 + (i as f64 + 0.5) * step, y0 + (j as f64 + 0.5) * step);
                if a.contains_strict(&p) || b.contains_strict(&p) {
                    count += 1;
                }
            }
        }
        count as f64 * step * step
    }

    #[test]
    fn union_is_idempotent() {
        let u = polygon_union(&sq(0.0, 0.0), &sq(0.0, 0.0)).unwrap();
        assert!((u.area() - 1.0).abs() < 1e-12);
        assert_eq!(u.outer().len(), 4);
    }

    #[test]
    fn half_overlap_union() {
        let u = polygon_union(&sq(0.0, 0.0), &sq(0.5, 0.0)).unwrap();
        assert!((u.area() - 1.5).abs() < 1e-12);
        // Collinear vertices are removed: a clean 1.5 x 1 rectangle.
        assert_eq!(u.outer().len(), 4);
    }

    #[test]
    fn diagonal_overlap_union_matches_grid() {
        let a = sq(0.0, 0.0);
        let b = sq(0.5, 0.5);
        let u = polygon_union(&a, &b).unwrap();
        assert!((u.area() - 1.75).abs() < 1e-12);
        assert_eq!(u.outer().len(), 8);
        assert!((grid_union_area(&a, &b, 1e-3) - 1.75).abs() < 1e-3);
    }

    #[test]
    fn edge_sharing_squares_fuse() {
        let u = polygon_union(&sq(0.0, 0.0), &sq(1.0, 0.0)).unwrap();
        assert!((u.area() - 2.0).abs() < 1e-12);
        assert_eq!(u.outer().len(), 4);
    }

    #[test]
    fn disjoint_union_is_an_error() {
        assert_eq!(polygon_union(&sq(0.0, 0.0), &sq(3.0, 0.0)), Err(GeomError::DisjointUnion));
        // Corner contact only: still two separate regions.
        assert_eq!(polygon_union(&sq(0.0, 0.0), &sq(1.0, 1.0)), Err(GeomError::DisjointUnion));
    }

    #[test]
    fn difference_cuts_a_notch_and_a_hole() {
        let base = Polygon2::rect(0.0, 0.0, 10.0, 10.0);
        let notch = Polygon2::rect(4.0, -1.0, 6.0, 3.0);
        let d = polygon_difference(&base, &notch).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d[0].area() - 94.0).abs() < 1e-9);
        assert_eq!(d[0].outer().len(), 8);
        let hole = Polygon2::rect(2.0, 6.0, 3.0, 8.0);
        let d2 = polygon_difference(&d[0], &hole).unwrap();
        assert_eq!(d2[0].holes().len(), 1);
        assert!((d2[0].area() - 92.0).abs() < 1e-9);
    }

    #[test]
    fn finger_union_adds_four_vertices() {
        let base = Polygon2::rect(0.0, 0.0, 10.0, 10.0);
        let finger = Polygon2::rect(4.0, 10.0, 6.0, 13.0);
        let u = polygon_union(&base, &finger).unwrap();
        assert_eq!(u.outer().len(), 8);
        assert!((u.area() - 106.0).abs() < 1e-9);
    }

    #[test]
    fn notch_into_a_hole_merges_with_it() {
        let frame = Polygon2::new(
            Polygon2::rect(0.0, 0.0, 10.0, 10.0).outer().to_vec(),
            vec![vec![Pt2::new(3.0, 3.0), Pt2::new(3.0, 7.0), Pt2::new(7.0, 7.0), Pt2::new(7.0, 3.0)]],
        )
        .unwrap();
        let cut = Polygon2::rect(4.5, 1.0, 5.5, 3.0);
        let d = polygon_difference(&frame, &cut).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].holes().len(), 1);
        assert_eq!(d[0].holes()[0].len(), 8);
        assert!((d[0].area() - (100.0 - 16.0 - 2.0)).abs() < 1e-9);
    }

    #[test]
    fn regions_touch_detects_contact() {
        assert!(regions_touch(&sq(0.0, 0.0), &sq(1.0, 0.0)));
        assert!(regions_touch(&sq(0.0, 0.0), &sq(0.5, 0.5)));
        assert!(!regions_touch(&sq(0.0, 0.0), &sq(2.0, 0.0)));
        let big = Polygon2::rect(-5.0, -5.0, 5.0, 5.0);
        assert!(regions_touch(&big, &sq(0.0, 0.0)));
    }
}
