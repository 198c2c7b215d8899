//! Global placement of every part from the connection graph.

use std::collections::BTreeMap;

use nalgebra::Vector3;
use serde::Serialize;
use thiserror::Error;

use crate::design::{connectivity_islands, Alignment, ComponentInstance, Connection, FlatDesign};
use crate::geom::tolerance::EPS_LEN;
use crate::geom::Transform;

/// Largest per-entry disagreement tolerated when a cycle revisits a part.
pub const CYCLE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlacementError {
    #[error("component `{component}` has no interface `{interface}`")]
    UnknownInterface { component: String, interface: String },
    #[error("interface `{interface}` of `{component}` has zero length")]
    DegenerateInterface { component: String, interface: String },
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("design is disconnected: {}", format_islands(.0))]
    DisconnectedDesign(Vec<Vec<String>>),
    #[error("connection {connection} disagrees with an earlier placement by {deviation:.3e}")]
    OverConstrained { connection: String, deviation: f64 },
}

fn format_islands(islands: &[Vec<String>]) -> String {
    islands
        .iter()
        .map(|g| format!("{{{}}}", g.join(", ")))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Frame of an interface edge: origin at its midpoint, x along the edge,
/// z along the part's front normal, y pointing into the part.
pub fn edge_frame(part: &ComponentInstance, interface: &str) -> Result<Transform, PlacementError> {
    let (a, b) = part.interface_edge(interface).ok_or_else(|| PlacementError::UnknownInterface {
        component: part.id.clone(),
        interface: interface.to_string(),
    })?;
    let d = b - a;
    let len = d.norm();
    if len <= EPS_LEN {
        return Err(PlacementError::DegenerateInterface {
            component: part.id.clone(),
            interface: interface.to_string(),
        });
    }
    let x = Vector3::new(d.x / len, d.y / len, 0.0);
    let z = Vector3::z();
    let y = z.cross(&x);
    let origin = Vector3::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0, 0.0);
    Ok(Transform::from_frame(origin, x, y, z))
}

fn flip(alignment: Alignment) -> Transform {
    match alignment {
        Alignment::FrontFront => Transform::rot_z(180.0),
        Alignment::FrontBack => Transform::rot_y(180.0),
    }
}

/// Pose of A in B's local frame realizing the connection: interface edges
/// coincide at their midpoints, anti-parallel; then the offset (B-local)
/// and the intrinsic x-y-z rotation about A's aligned edge frame.
pub fn find_relative_transform(
    conn: &Connection,
    a: &ComponentInstance,
    b: &ComponentInstance,
) -> Result<Transform, PlacementError> {
    let fa = edge_frame(a, &conn.connecting.1)?;
    let fb = edge_frame(b, &conn.connected.1)?;
    let [ox, oy, oz] = conn.offset;
    let [rx, ry, rz] = conn.rotation;
    Ok(Transform::translation(ox, oy, oz)
        .compose(&fb)
        .compose(&flip(conn.alignment))
        .compose(&Transform::from_euler_xyz_deg(rx, ry, rz))
        .compose(&fa.inverse()))
}

/// Offset and rotation that make `A.ia → B.ib` realize the given pose of A
/// in B's frame. Any rigid pose is reachable.
pub fn fit_connection(
    a: &ComponentInstance,
    ia: &str,
    b: &ComponentInstance,
    ib: &str,
    alignment: Alignment,
    pose: &Transform,
) -> Result<Connection, PlacementError> {
    let fa = edge_frame(a, ia)?;
    let fb = edge_frame(b, ib)?;
    let g = fb.compose(&flip(alignment));
    let m = pose.compose(&fa);
    let r = g.inverse().compose(&m);
    let rotation = Transform::from_parts(*r.rotation(), Vector3::zeros()).expect("rigid rotation");
    let off = m.translation_vector() - g.translation_vector();
    Ok(Connection {
        connecting: (a.id.clone(), ia.to_string()),
        connected: (b.id.clone(), ib.to_string()),
        alignment,
        offset: [off.x, off.y, off.z],
        rotation: rotation.euler_xyz_deg(),
    })
}

/// The equivalent connection with the roles of the two parts swapped.
pub fn reverse_connection(
    conn: &Connection,
    a: &ComponentInstance,
    b: &ComponentInstance,
) -> Result<Connection, PlacementError> {
    let t = find_relative_transform(conn, a, b)?;
    fit_connection(b, &conn.connected.1, a, &conn.connecting.1, conn.alignment, &t.inverse())
}

/// Parts with global placements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedModel {
    pub parts: Vec<ComponentInstance>,
    /// Connection indices leading from the seed to each part.
    pub provenance: BTreeMap<String, Vec<usize>>,
    pub seed: String,
}

impl PlacedModel {
    pub fn part(&self, id: &str) -> Option<&ComponentInstance> {
        self.parts.iter().find(|p| p.id == id)
    }

    /// Pose of part `j` in the frame of part `i`.
    pub fn relative(&self, i: &str, j: &str) -> Option<Transform> {
        let ti = self.part(i)?.placement();
        let tj = self.part(j)?.placement();
        Some(ti.inverse().compose(&tj))
    }
}

/// Places every component by depth-first traversal from the
/// lexicographically smallest id.
pub fn place_components(design: &FlatDesign) -> Result<PlacedModel, PlacementError> {
    place_from(design, None)
}

/// As [`place_components`] with an explicit seed component.
pub fn place_from(design: &FlatDesign, seed: Option<&str>) -> Result<PlacedModel, PlacementError> {
    let parts = &design.components;
    let index: BTreeMap<&str, usize> = parts.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();
    let mut rel = Vec::with_capacity(design.connections.len());
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); parts.len()];
    for (k, c) in design.connections.iter().enumerate() {
        let ia = *index
            .get(c.connecting.0.as_str())
            .ok_or_else(|| PlacementError::UnknownComponent(c.connecting.0.clone()))?;
        let ib = *index
            .get(c.connected.0.as_str())
            .ok_or_else(|| PlacementError::UnknownComponent(c.connected.0.clone()))?;
        rel.push((ia, ib, find_relative_transform(c, &parts[ia], &parts[ib])?));
        adj[ia].push(k);
        adj[ib].push(k);
    }
    let mut out = parts.clone();
    if parts.is_empty() {
        return Ok(PlacedModel {
            parts: out,
            provenance: BTreeMap::new(),
            seed: String::new(),
        });
    }
    let ids: Vec<String> = parts.iter().map(|p| p.id.clone()).collect();
    let edges: Vec<(String, String)> = design
        .connections
        .iter()
        .map(|c| (c.connecting.0.clone(), c.connected.0.clone()))
        .collect();
    let islands = connectivity_islands(&ids, &edges);
    if islands.len() > 1 {
        return Err(PlacementError::DisconnectedDesign(islands));
    }
    let seed_id = match seed {
        Some(s) => s.to_string(),
        None => ids.iter().min().cloned().unwrap_or_default(),
    };
    let s = *index
        .get(seed_id.as_str())
        .ok_or_else(|| PlacementError::UnknownComponent(seed_id.clone()))?;

    let mut placed: Vec<Option<Transform>> = vec![None; parts.len()];
    let mut chain: Vec<Vec<usize>> = vec![Vec::new(); parts.len()];
    placed[s] = Some(Transform::identity());
    let mut stack = vec![(s, 0usize)];
    while let Some(&mut (cur, ref mut next)) = stack.last_mut() {
        let Some(&k) = adj[cur].get(*next) else {
            stack.pop();
            continue;
        };
        *next += 1;
        let (ia, ib, t) = &rel[k];
        let tc = placed[cur].expect("visited");
        let (other, pose) = if cur == *ib {
            (*ia, tc.compose(t))
        } else {
            (*ib, tc.compose(&t.inverse()))
        };
        match placed[other] {
            None => {
                placed[other] = Some(pose);
                let mut ch = chain[cur].clone();
                ch.push(k);
                chain[other] = ch;
                stack.push((other, 0));
            }
            Some(existing) => {
                let dev = existing.max_abs_diff(&pose);
                if dev > CYCLE_TOLERANCE {
                    return Err(PlacementError::OverConstrained {
                        connection: design.connections[k].label(),
                        deviation: dev,
                    });
                }
            }
        }
    }
    let mut provenance = BTreeMap::new();
    for (i, p) in out.iter_mut().enumerate() {
        p.placement = placed[i];
        provenance.insert(p.id.clone(), std::mem::take(&mut chain[i]));
    }
    Ok(PlacedModel {
        parts: out,
        provenance,
        seed: seed_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{instantiate_component, ComponentTemplate, ParamSummary};
    use nalgebra::Point3;

    fn square(id: &str) -> ComponentInstance {
        let b = [("l".to_string(), 1.0), ("w".to_string(), 1.0)].into();
        instantiate_component(id, &ComponentTemplate::rectangle(), &b).unwrap()
    }

    fn conn(a: &str, b: &str, al: Alignment, off: [f64; 3], rot: [f64; 3]) -> Connection {
        Connection::new((a, "t"), (b, "b"), al, off, rot).unwrap()
    }

    fn design(parts: Vec<ComponentInstance>, connections: Vec<Connection>) -> FlatDesign {
        FlatDesign {
            components: parts,
            connections,
            no_joint: vec![],
            hinges: vec![],
            params: ParamSummary { total: 0, free: vec![] },
        }
    }

    fn close(p: Point3<f64>, q: [f64; 3]) -> bool {
        (p - Point3::from(q)).norm() < 1e-9
    }

    #[test]
    fn flat_unfolded_pair() {
        let (a, b) = (square("A"), square("B"));
        let t = find_relative_transform(&conn("A", "B", Alignment::FrontFront, [0.0; 3], [0.0; 3]), &a, &b).unwrap();
        // A's top edge lands on B's bottom edge, A lies below B.
        assert!(close(t.apply_point(&Point3::new(0.0, 1.0, 0.0)), [0.0, 0.0, 0.0]));
        assert!(close(t.apply_point(&Point3::new(1.0, 1.0, 0.0)), [1.0, 0.0, 0.0]));
        assert!(close(t.apply_point(&Point3::new(0.5, 0.0, 0.0)), [0.5, -1.0, 0.0]));
        assert!((t.apply_vector(&Vector3::z()) - Vector3::z()).norm() < 1e-12);
    }

    #[test]
    fn bookend_is_perpendicular() {
        let (a, b) = (square("A"), square("B"));
        let t = find_relative_transform(&conn("A", "B", Alignment::FrontFront, [0.0; 3], [90.0, 0.0, 0.0]), &a, &b).unwrap();
        assert!(close(t.apply_point(&Point3::new(0.5, 1.0, 0.0)), [0.5, 0.0, 0.0]));
        assert!(close(t.apply_point(&Point3::new(0.5, 0.0, 0.0)), [0.5, 0.0, 1.0]));
        assert!(t.apply_vector(&Vector3::z()).dot(&Vector3::z()).abs() < 1e-12);
    }

    #[test]
    fn front_back_stacks() {
        let (a, b) = (square("A"), square("B"));
        let w = 3.0;
        let t = find_relative_transform(&conn("A", "B", Alignment::FrontBack, [0.0, 0.0, w], [0.0; 3]), &a, &b).unwrap();
        // Matrix oracle: F_B · Ry(180) · F_A^-1, then lift by w.
        for (p, q) in [
            ([0.0, 0.0, 0.0], [0.0, 1.0, w]),
            ([1.0, 0.0, 0.0], [1.0, 1.0, w]),
            ([1.0, 1.0, 0.0], [1.0, 0.0, w]),
            ([0.0, 1.0, 0.0], [0.0, 0.0, w]),
        ] {
            assert!(close(t.apply_point(&Point3::from(p)), q), "{p:?}");
        }
        assert!((t.apply_vector(&Vector3::z()) + Vector3::z()).norm() < 1e-12);
    }

    #[test]
    fn chain_matches_matrix_product() {
        let parts = vec![square("A"), square("B"), square("C")];
        let c1 = conn("A", "B", Alignment::FrontFront, [0.2, 0.0, 0.0], [90.0, 0.0, 0.0]);
        let c2 = conn("B", "C", Alignment::FrontFront, [0.0, 0.5, 0.0], [0.0, 30.0, 0.0]);
        let t1 = find_relative_transform(&c1, &parts[0], &parts[1]).unwrap();
        let t2 = find_relative_transform(&c2, &parts[1], &parts[2]).unwrap();
        let pm = place_components(&design(parts, vec![c1, c2])).unwrap();
        assert_eq!(pm.seed, "A");
        let rel = pm.relative("C", "A").unwrap();
        assert!(rel.approx_eq(&t2.compose(&t1), 1e-9));
    }

    #[test]
    fn reversal_preserves_relative_pose() {
        let (a, b) = (square("A"), square("B"));
        let c = conn("A", "B", Alignment::FrontBack, [0.1, 0.2, 0.3], [20.0, -35.0, 110.0]);
        let r = reverse_connection(&c, &a, &b).unwrap();
        let t = find_relative_transform(&c, &a, &b).unwrap();
        let tr = find_relative_transform(&r, &b, &a).unwrap();
        assert!(tr.approx_eq(&t.inverse(), 1e-9));
    }

    #[test]
    fn disconnected_and_over_constrained() {
        let parts = vec![square("A"), square("B"), square("C")];
        let r = place_components(&design(parts.clone(), vec![conn("A", "B", Alignment::FrontFront, [0.0; 3], [0.0; 3])]));
        assert_eq!(
            r.unwrap_err(),
            PlacementError::DisconnectedDesign(vec![vec!["A".into(), "B".into()], vec!["C".into()]])
        );
        let cs = vec![
            conn("A", "B", Alignment::FrontFront, [0.0; 3], [0.0; 3]),
            conn("A", "B", Alignment::FrontFront, [1.0, 0.0, 0.0], [0.0; 3]),
            conn("C", "B", Alignment::FrontFront, [0.0; 3], [0.0; 3]),
        ];
        assert!(matches!(
            place_components(&design(parts, cs)),
            Err(PlacementError::OverConstrained { .. })
        ));
    }

    #[test]
    fn single_component() {
        let pm = place_components(&design(vec![square("A")], vec![])).unwrap();
        assert_eq!(pm.parts[0].placement, Some(Transform::identity()));
    }
}
