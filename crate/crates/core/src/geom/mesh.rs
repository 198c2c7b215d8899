use std::collections::HashMap;

use nalgebra::Point3;

use spade::handles::FixedVertexHandle;
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use super::polygon::{signed_area, Polygon2, Pt2};
use super::transform::Transform;
use super::GeomError;

/// Indexed triangle mesh, counter-clockwise triangles seen from outside.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Signed volume by the divergence theorem; positive when outward.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let (a, b, c) = (self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]);
                a.coords.dot(&b.coords.cross(&c.coords)) / 6.0
            })
            .sum()
    }

    /// Directed-edge use counts. A closed, consistently oriented 2-manifold
    /// uses every directed edge exactly once and its reverse exactly once.
    fn directed_edges(&self) -> HashMap<(usize, usize), usize> {
        let mut m = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                *m.entry((t[k], t[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        m
    }

    /// Every undirected edge is shared by exactly two triangles that
    /// traverse it in opposite directions.
    pub fn is_watertight(&self) -> bool {
        let d = self.directed_edges();
        d.iter().all(|(&(a, b), &n)| n == 1 && d.get(&(b, a)) == Some(&1))
    }

    pub fn edge_count(&self) -> usize {
        self.directed_edges().len() / 2
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    pub fn transformed(&self, t: &Transform) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(|p| t.apply_point(p)).collect(),
            triangles: self.triangles.clone(),
        }
    }

    pub fn append(&mut self, other: &TriangleMesh) {
        let base = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
    }
}

/// Prism `poly × [0, thickness]` along local +z, then moved by `placement`.
///
/// Caps come from a constrained Delaunay triangulation of all ring
/// vertices with every ring edge as a constraint, keeping the triangles
/// inside the polygon; side walls are one quad per ring edge.
pub fn extrude_polygon(
    poly: &Polygon2,
    thickness: f64,
    placement: &Transform,
) -> Result<TriangleMesh, GeomError> {
    if !(thickness > 0.0) {
        return Err(GeomError::Degenerate(format!("extrusion thickness {thickness} must be positive")));
    }
    poly.validate()?;
    let tri_err = |m: String| GeomError::Triangulation(m);
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut ring_handles: Vec<Vec<FixedVertexHandle>> = Vec::new();
    for r in poly.rings() {
        let hs = r
            .iter()
            .map(|p| cdt.insert(Point2::new(p.x, p.y)).map_err(|e| tri_err(format!("{e:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        ring_handles.push(hs);
    }
    for hs in &ring_handles {
        for k in 0..hs.len() {
            let (a, b) = (hs[k], hs[(k + 1) % hs.len()]);
            if a == b {
                return Err(tri_err("ring has coincident vertices".into()));
            }
            if !cdt.can_add_constraint(a, b) {
                return Err(tri_err("ring edges cross".into()));
            }
            cdt.add_constraint(a, b);
        }
    }
    let n = cdt.num_vertices();
    let mut mesh = TriangleMesh::default();
    for z in [0.0, thickness] {
        for v in cdt.vertices() {
            let p = v.position();
            mesh.vertices.push(Point3::new(p.x, p.y, z));
        }
    }
    let mut cap_area = 0.0;
    for f in cdt.inner_faces() {
        let [a, b, c] = f.vertices();
        let (pa, pb, pc) = (a.position(), b.position(), c.position());
        let centroid = Pt2::new((pa.x + pb.x + pc.x) / 3.0, (pa.y + pb.y + pc.y) / 3.0);
        if !poly.contains(&centroid) {
            continue;
        }
        cap_area += signed_area(&[Pt2::new(pa.x, pa.y), Pt2::new(pb.x, pb.y), Pt2::new(pc.x, pc.y)]);
        let (a, b, c) = (a.fix().index(), b.fix().index(), c.fix().index());
        // Spade faces are counter-clockwise: top cap faces +z, bottom -z.
        mesh.triangles.push([a + n, b + n, c + n]);
        mesh.triangles.push([b, a, c]);
    }
    let area = poly.area();
    if (cap_area - area).abs() > 1e-9 * area.max(1.0) {
        return Err(tri_err(format!("cap area {cap_area} differs from polygon area {area}")));
    }
    for hs in &ring_handles {
        for k in 0..hs.len() {
            let i = hs[k].index();
            let j = hs[(k + 1) % hs.len()].index();
            mesh.triangles.push([i, j, j + n]);
            mesh.triangles.push([i, j + n, i + n]);
        }
    }
    Ok(mesh.transformed(placement))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cube() {
        let m = extrude_polygon(&Polygon2::rect(0.0, 0.0, 1.0, 1.0), 1.0, &Transform::identity()).unwrap();
        assert_eq!(m.triangles.len(), 12);
        assert!((m.signed_volume() - 1.0).abs() < 1e-12);
        assert!(m.is_watertight());
        assert_eq!(m.euler_characteristic(), 2);
    }

    #[test]
    fn square_with_hole_is_genus_one() {
        let hole = vec![
            Pt2::new(0.25, 0.25),
            Pt2::new(0.25, 0.75),
            Pt2::new(0.75, 0.75),
            Pt2::new(0.75, 0.25),
        ];
        let p = Polygon2::new(Polygon2::rect(0.0, 0.0, 1.0, 1.0).outer().to_vec(), vec![hole]).unwrap();
        let m = extrude_polygon(&p, 1.0, &Transform::identity()).unwrap();
        assert!(m.is_watertight());
        assert!((m.signed_volume() - 0.75).abs() < 1e-12);
        assert_eq!(m.euler_characteristic(), 0);
    }

    #[test]
    fn zero_thickness_rejected() {
        assert!(extrude_polygon(&Polygon2::rect(0.0, 0.0, 1.0, 1.0), 0.0, &Transform::identity()).is_err());
    }

    #[test]
    fn placement_preserves_volume_and_orientation() {
        let t = Transform::from_euler_xyz_deg(30.0, -40.0, 10.0).compose(&Transform::translation(5.0, 6.0, 7.0));
        let m = extrude_polygon(&Polygon2::rect(0.0, 0.0, 2.0, 3.0), 1.5, &t).unwrap();
        assert!((m.signed_volume() - 9.0).abs() < 1e-9);
    }
}
