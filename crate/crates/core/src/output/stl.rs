//! Binary STL preview of the assembled design.

use crate::design::ComponentInstance;
use crate::geom::{extrude_polygon, TriangleMesh};

use super::OutputError;

const HEADER: &[u8] = b"flatpack assembled preview";

/// Each part extruded by `thickness` along its local +z and moved to its
/// global placement, in part order.
pub fn part_meshes(parts: &[ComponentInstance], thickness: f64) -> Result<Vec<(String, TriangleMesh)>, OutputError> {
    parts
        .iter()
        .map(|p| {
            extrude_polygon(&p.polygon, thickness, &p.placement())
                .map(|m| (p.id.clone(), m))
                .map_err(|e| OutputError::MeshError { part: p.id.clone(), message: e.to_string() })
        })
        .collect()
}

/// Little-endian binary STL: 80-byte header, triangle count, then normal,
/// three vertices and a zero attribute word per triangle.
pub fn write_stl(meshes: &[&TriangleMesh]) -> Vec<u8> {
    let count: usize = meshes.iter().map(|m| m.triangles.len()).sum();
    let mut out = Vec::with_capacity(84 + 50 * count);
    let mut header = [0u8; 80];
    header[..HEADER.len()].copy_from_slice(HEADER);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(count as u32).to_le_bytes());
    for m in meshes {
        for t in &m.triangles {
            let (a, b, c) = (m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
            let n = (b - a).cross(&(c - a));
            let n = if n.norm() > 0.0 { n.normalize() } else { n };
            for v in [n.x, n.y, n.z] {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
            for p in [a, b, c] {
                for v in [p.x, p.y, p.z] {
                    out.extend_from_slice(&(v as f32).to_le_bytes());
                }
            }
            out.extend_from_slice(&[0, 0]);
        }
    }
    out
}

pub fn emit_stl(parts: &[ComponentInstance], thickness: f64) -> Result<Vec<u8>, OutputError> {
    let meshes = part_meshes(parts, thickness)?;
    Ok(write_stl(&meshes.iter().map(|(_, m)| m).collect::<Vec<_>>()))
}

/// Triangles (three vertices each) from a binary STL.
pub fn read_stl(bytes: &[u8]) -> Result<Vec<[[f32; 3]; 3]>, String> {
    if bytes.len() < 84 {
        return Err("file shorter than header".into());
    }
    let n = u32::from_le_bytes(bytes[80..84].try_into().expect("4 bytes")) as usize;
    if bytes.len() != 84 + 50 * n {
        return Err(format!("expected {} bytes for {n} triangles, found {}", 84 + 50 * n, bytes.len()));
    }
    let f = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    Ok((0..n)
        .map(|k| {
            let base = 84 + 50 * k + 12;
            let v = |i: usize| [f(base + 12 * i), f(base + 12 * i + 4), f(base + 12 * i + 8)];
            [v(0), v(1), v(2)]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Polygon2;

    #[test]
    fn unit_square_is_684_bytes() {
        let parts = vec![ComponentInstance::from_polygon("a", Polygon2::rect(0.0, 0.0, 1.0, 1.0), vec![])];
        let bytes = emit_stl(&parts, 1.0).unwrap();
        assert_eq!(bytes.len(), 684);
        assert_eq!(read_stl(&bytes).unwrap().len(), 12);
    }

    #[test]
    fn slotted_part_volume() {
        let poly = Polygon2::new(
            Polygon2::rect(0.0, 0.0, 40.0, 30.0).outer().to_vec(),
            vec![Polygon2::rect(10.0, 10.0, 13.25, 20.0).outer().iter().rev().copied().collect()],
        )
        .unwrap();
        let parts = vec![ComponentInstance::from_polygon("a", poly.clone(), vec![])];
        let meshes = part_meshes(&parts, 3.0).unwrap();
        let m = &meshes[0].1;
        assert!(m.is_watertight());
        assert_eq!(m.euler_characteristic(), 0);
        let want = poly.area() * 3.0;
        assert!((m.signed_volume() - want).abs() <= 1e-6 * want);
    }

    #[test]
    fn invalid_polygon_names_part() {
        let bowtie = crate::geom::Polygon2::rect(0.0, 0.0, 1.0, 1.0).map_points(|p| {
            if p.x == 1.0 { crate::geom::Pt2::new(1.0, 1.0 - p.y) } else { *p }
        });
        let parts = vec![ComponentInstance::from_polygon("bad", bowtie, vec![])];
        assert!(matches!(emit_stl(&parts, 1.0), Err(OutputError::MeshError { part, .. }) if part == "bad"));
    }
}
