//! Coplanar merging and detection of every part-part intersection segment.

use std::collections::BTreeMap;

use nalgebra::{Point3, Vector3};
use serde::{Serialize, Serializer};

use crate::design::{ComponentInstance, Connection};
use crate::geom::{
    clip_line_intervals, interval_set_intersection, plane_intersection, plane_of, polygon_union, regions_touch,
    segment_on_boundary, GeomError, Line2, Plane3, PlaneIntersection, Polygon2, Pt2, Segment2, Segment3, Transform,
};

/// Which part of a face-face-contained record holds the full-length slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    I,
    J,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    EdgeEdge,
    /// On an edge of part i, inside the face of part j.
    EdgeFace,
    FaceEdge,
    FaceFace,
    /// The other part passes through a slot in the given side.
    FaceFaceContained(Side),
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::EdgeEdge => "edge-edge",
            Classification::EdgeFace => "edge-face",
            Classification::FaceEdge => "face-edge",
            Classification::FaceFace => "face-face",
            Classification::FaceFaceContained(_) => "face-face-contained",
        }
    }
}

impl Serialize for Classification {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// Index of the user connection relating the two parts.
    User(usize),
    Auto,
}

impl Serialize for Source {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Source::User(_) => s.serialize_str("user"),
            Source::Auto => s.serialize_str("auto"),
        }
    }
}

/// One segment along which parts `i` and `j` (i < j by id) intersect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionRecord {
    pub i: String,
    pub j: String,
    pub segment_3d: Segment3,
    pub local_i: Segment2,
    pub local_j: Segment2,
    pub classification: Classification,
    pub source: Source,
    /// Angle between the two part planes, degrees in [0, 90].
    pub dihedral_deg: f64,
}

impl IntersectionRecord {
    pub fn length(&self) -> f64 {
        self.segment_3d.length()
    }

    /// `i × j: <class> len=<mm> source=<user|auto>`
    pub fn report_line(&self) -> String {
        let src = match self.source {
            Source::User(_) => "user",
            Source::Auto => "auto",
        };
        format!(
            "{} × {}: {} len={:.3} source={}",
            self.i,
            self.j,
            self.classification.name(),
            self.length(),
            src
        )
    }
}

/// Outcome of the intersection pass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Intersections {
    pub records: Vec<IntersectionRecord>,
    pub warnings: Vec<String>,
}

/// True iff both endpoints and the midpoint lie on the polygon boundary.
pub fn on_edge(poly: &Polygon2, seg: &Segment2) -> bool {
    segment_on_boundary(poly, seg)
}

fn placed_plane(part: &ComponentInstance) -> Result<Plane3, GeomError> {
    plane_of(&part.polygon, &part.placement())
}

/// Polygon of `other` expressed in the local frame of `host`.
fn polygon_in_frame(host: &Transform, other: &ComponentInstance) -> Polygon2 {
    let m = host.inverse().compose(&other.placement());
    other.polygon.map_points(|p| {
        let q = m.apply_xy(p.x, p.y);
        Pt2::new(q.x, q.y)
    })
}

/// Merges coplanar parts whose regions overlap or share boundary. The
/// smaller id survives and absorbs the other in its own frame; merging
/// repeats until nothing changes.
pub fn merge_coplanar(parts: Vec<ComponentInstance>) -> Result<Vec<ComponentInstance>, GeomError> {
    let mut parts = parts;
    parts.sort_by(|a, b| a.id.cmp(&b.id));
    loop {
        let mut changed = false;
        'outer: for i in 0..parts.len() {
            let pi = placed_plane(&parts[i])?;
            for j in (i + 1)..parts.len() {
                let pj = placed_plane(&parts[j])?;
                if !pi.is_coplanar_with(&pj) {
                    continue;
                }
                let host = parts[i].placement();
                let other = polygon_in_frame(&host, &parts[j]);
                if !regions_touch(&parts[i].polygon, &other) {
                    continue;
                }
                let merged = match polygon_union(&parts[i].polygon, &other) {
                    Ok(p) => p,
                    Err(GeomError::DisjointUnion) => continue,
                    Err(e) => return Err(e),
                };
                let gone = parts.remove(j);
                let survivor = &mut parts[i];
                survivor.polygon = merged;
                survivor.merged_from.push(gone.id);
                survivor.merged_from.extend(gone.merged_from);
                survivor.merged_from.sort();
                changed = true;
                break 'outer;
            }
        }
        if !changed {
            return Ok(parts);
        }
    }
}

fn local_line(t: &Transform, origin: &Point3<f64>, dir: &Vector3<f64>) -> Line2 {
    let inv = t.inverse();
    let o = inv.apply_point(origin);
    let d = inv.apply_vector(dir);
    Line2 {
        origin: Pt2::new(o.x, o.y),
        direction: nalgebra::Vector2::new(d.x, d.y),
    }
}

fn classify(pi: &Polygon2, si: &Segment2, pj: &Polygon2, sj: &Segment2) -> Classification {
    match (on_edge(pi, si), on_edge(pj, sj)) {
        (true, true) => Classification::EdgeEdge,
        (true, false) => Classification::EdgeFace,
        (false, true) => Classification::FaceEdge,
        (false, false) => {
            let spans = |p: &Polygon2, s: &Segment2| p.on_boundary(&s.a) && p.on_boundary(&s.b);
            let inside = |p: &Polygon2, s: &Segment2| !p.on_boundary(&s.a) && !p.on_boundary(&s.b);
            if spans(pi, si) && inside(pj, sj) {
                Classification::FaceFaceContained(Side::J)
            } else if spans(pj, sj) && inside(pi, si) {
                Classification::FaceFaceContained(Side::I)
            } else {
                Classification::FaceFace
            }
        }
    }
}

/// Finds every intersection segment between pairs of placed, merged parts.
///
/// Merged parts stand in for the ids they absorbed, so user connections
/// still match their records after merging. Segments shorter than
/// `min_len` are dropped with a warning; pairs listed in `suppress` get no
/// auto-detected records.
pub fn find_intersection_segments(
    parts: &[ComponentInstance],
    connections: &[Connection],
    suppress: &[(String, String)],
    min_len: f64,
) -> Result<Intersections, GeomError> {
    let mut alias: BTreeMap<&str, &str> = BTreeMap::new();
    for p in parts {
        alias.insert(p.id.as_str(), p.id.as_str());
        for m in &p.merged_from {
            alias.insert(m.as_str(), p.id.as_str());
        }
    }
    let key = |a: &str, b: &str| -> Option<(String, String)> {
        let (a, b) = (*alias.get(a)?, *alias.get(b)?);
        (a != b).then(|| if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) })
    };
    let mut user: BTreeMap<(String, String), usize> = BTreeMap::new();
    for (k, c) in connections.iter().enumerate() {
        if let Some(pair) = key(&c.connecting.0, &c.connected.0) {
            user.entry(pair).or_insert(k);
        }
    }
    let vetoed: Vec<(String, String)> = suppress.iter().filter_map(|(a, b)| key(a, b)).collect();

    let mut order: Vec<usize> = (0..parts.len()).collect();
    order.sort_by(|&a, &b| parts[a].id.cmp(&parts[b].id));
    let planes: Vec<Plane3> = parts.iter().map(placed_plane).collect::<Result<_, _>>()?;

    let mut out = Intersections::default();
    for (oi, &i) in order.iter().enumerate() {
        for &j in &order[oi + 1..] {
            let (a, b) = (&parts[i], &parts[j]);
            let line = match plane_intersection(&planes[i], &planes[j]) {
                PlaneIntersection::Line(l) => l,
                PlaneIntersection::Parallel | PlaneIntersection::Coplanar => continue,
            };
            let (ni, nj) = (planes[i].normal(), planes[j].normal());
            let dir = ni.cross(nj).normalize();
            let origin = line.origin;
            let (ta, tb) = (a.placement(), b.placement());
            let la = local_line(&ta, &origin, &dir);
            let lb = local_line(&tb, &origin, &dir);
            let shared = interval_set_intersection(&clip_line_intervals(&la, &a.polygon), &clip_line_intervals(&lb, &b.polygon));
            if shared.is_empty() {
                continue;
            }
            let pair = (a.id.clone(), b.id.clone());
            let source = user.get(&pair).map_or(Source::Auto, |&k| Source::User(k));
            if source == Source::Auto && vetoed.contains(&pair) {
                continue;
            }
            let cosang = ni.dot(nj).abs().min(1.0);
            let dihedral_deg = cosang.acos().to_degrees();
            for iv in shared {
                if iv.len() < min_len {
                    out.warnings.push(format!(
                        "{} × {}: intersection of {:.3} mm is shorter than {:.3} mm, no joint",
                        a.id,
                        b.id,
                        iv.len(),
                        min_len
                    ));
                    continue;
                }
                let p0 = origin + dir * iv.lo;
                let p1 = origin + dir * iv.hi;
                let local_i = Segment2 { a: la.at(iv.lo), b: la.at(iv.hi) };
                let local_j = Segment2 { a: lb.at(iv.lo), b: lb.at(iv.hi) };
                out.records.push(IntersectionRecord {
                    i: a.id.clone(),
                    j: b.id.clone(),
                    segment_3d: Segment3 { a: p0, b: p1 },
                    local_i,
                    local_j,
                    classification: classify(&a.polygon, &local_i, &b.polygon, &local_j),
                    source,
                    dihedral_deg,
                });
            }
        }
    }
    Ok(out)
}
