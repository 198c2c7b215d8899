//! Joint synthesis: press-fit cut geometry for every intersection record,
//! plus flexible hinges, applied to the part outlines.

mod hinge;
mod patterns;

use serde::Serialize;
use thiserror::Error;

use crate::design::{ComponentInstance, FabricationSpec, HingeRequest};
use crate::geom::{overlap_area, polygon_difference, polygon_union, GeomError, Polygon2, Segment2};
use crate::intersect::IntersectionRecord;

pub use hinge::{flex_hinge_pattern, hinge_slits};
pub use patterns::{
    default_pitch, finger_dims, finger_finger_pattern, finger_hole_pattern, pattern_for_record, slot_dims,
    slot_slot_pattern, FingerDims, SlotDims, ANGLE_TOLERANCE_DEG,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JointError {
    #[error("joint too small: {0}")]
    JointTooSmall(String),
    #[error("cannot place joint on `{part}`: {message}")]
    JointPlacementError { part: String, message: String },
    #[error("joints {first} and {second} overlap on `{part}`")]
    JointConflict { part: String, first: String, second: String },
    #[error("parts `{i}` and `{j}` meet at {angle:.2}°, finger joints need 90°")]
    JointUnsupportedAngle { i: String, j: String, angle: f64 },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum JointKind {
    #[serde(rename = "finger-finger")]
    FingerFinger,
    #[serde(rename = "finger-hole")]
    FingerHole,
    #[serde(rename = "slot-slot")]
    SlotSlot,
    #[serde(rename = "slot-single")]
    SlotSingle,
    #[serde(rename = "flex-hinge")]
    FlexHinge,
}

impl JointKind {
    pub fn name(&self) -> &'static str {
        match self {
            JointKind::FingerFinger => "finger-finger",
            JointKind::FingerHole => "finger-hole",
            JointKind::SlotSlot => "slot-slot",
            JointKind::SlotSingle => "slot-single",
            JointKind::FlexHinge => "flex-hinge",
        }
    }
}

/// Joint dimensions in mm; only those meaningful for the kind are set.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct JointParams {
    pub w_f: Option<f64>,
    pub w_d: Option<f64>,
    pub w_h: Option<f64>,
    pub w_s: Option<f64>,
    pub l_f: Option<f64>,
    pub l_h: Option<f64>,
    pub l_s: Option<f64>,
    pub sections: Option<usize>,
}

/// Geometry one joint adds to or removes from one part, in its local frame.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PartEdits {
    pub part: String,
    /// Regions unioned onto the outline (finger protrusions).
    pub add: Vec<Polygon2>,
    /// Regions cut away (holes, slots, notches).
    pub cut: Vec<Polygon2>,
    pub fingers: Vec<Segment2>,
    pub holes: Vec<Segment2>,
    pub slots: Vec<Segment2>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointPattern {
    pub kind: JointKind,
    pub label: String,
    pub params: JointParams,
    pub edits: Vec<PartEdits>,
}

/// One pattern per record, followed by one per hinge request.
pub fn synthesize(
    parts: &[ComponentInstance],
    records: &[IntersectionRecord],
    hinges: &[HingeRequest],
    spec: &FabricationSpec,
) -> Result<Vec<JointPattern>, JointError> {
    let polys: Vec<(&str, &Polygon2)> = parts.iter().map(|p| (p.id.as_str(), &p.polygon)).collect();
    let mut out = Vec::with_capacity(records.len() + hinges.len());
    for r in records {
        out.push(pattern_for_record(r, &polys, spec)?);
    }
    for h in hinges {
        let part = parts
            .iter()
            .find(|p| p.id == h.part || p.merged_from.contains(&h.part))
            .ok_or_else(|| JointError::JointPlacementError {
                part: h.part.clone(),
                message: "hinge refers to an unknown part".into(),
            })?;
        if part.id != h.part {
            return Err(JointError::JointPlacementError {
                part: h.part.clone(),
                message: format!("hinge part was merged into `{}`", part.id),
            });
        }
        out.push(flex_hinge_pattern(&part.id, &part.polygon, h.region, spec, h.rows, h.cols)?);
    }
    Ok(out)
}

fn bboxes_overlap(a: &Polygon2, b: &Polygon2) -> bool {
    let (p, q) = (a.bbox(), b.bbox());
    p.min.x < q.max.x && q.min.x < p.max.x && p.min.y < q.max.y && q.min.y < p.max.y
}

/// Positive-area overlap below which two edits are considered disjoint.
const CONFLICT_AREA: f64 = 1e-6;

/// Applies every pattern: protrusions are unioned onto the outline, then
/// cuts are subtracted. Edits from different patterns on one part must not
/// overlap.
pub fn apply_patterns(parts: &mut [ComponentInstance], patterns: &[JointPattern]) -> Result<(), JointError> {
    for part in parts.iter_mut() {
        let mine: Vec<(&JointPattern, &PartEdits)> = patterns
            .iter()
            .flat_map(|p| p.edits.iter().filter(|e| e.part == part.id).map(move |e| (p, e)))
            .collect();
        let regions: Vec<(usize, &Polygon2)> = mine
            .iter()
            .enumerate()
            .flat_map(|(k, (_, e))| e.add.iter().chain(e.cut.iter()).map(move |r| (k, r)))
            .collect();
        for (x, (ka, ra)) in regions.iter().enumerate() {
            for (kb, rb) in &regions[x + 1..] {
                if ka == kb || !bboxes_overlap(ra, rb) {
                    continue;
                }
                if overlap_area(ra, rb)? > CONFLICT_AREA {
                    return Err(JointError::JointConflict {
                        part: part.id.clone(),
                        first: mine[*ka].0.label.clone(),
                        second: mine[*kb].0.label.clone(),
                    });
                }
            }
        }
        let mut poly = part.polygon.clone();
        for (p, e) in &mine {
            for a in &e.add {
                poly = polygon_union(&poly, a).map_err(|err| JointError::JointPlacementError {
                    part: part.id.clone(),
                    message: format!("{}: {err}", p.label),
                })?;
            }
        }
        for (p, e) in &mine {
            for c in &e.cut {
                if c.holes().is_empty() {
                    if let Some(next) = poly.with_interior_hole(c.outer()) {
                        poly = next;
                        continue;
                    }
                }
                let mut pieces = polygon_difference(&poly, c)?;
                if pieces.len() != 1 {
                    return Err(JointError::JointPlacementError {
                        part: part.id.clone(),
                        message: format!("{}: cut splits the part into {} pieces", p.label, pieces.len()),
                    });
                }
                poly = pieces.pop().expect("one piece");
            }
        }
        poly.validate()?;
        part.polygon = poly;
        for (_, e) in &mine {
            part.fingers.extend(e.fingers.iter().copied());
            part.holes.extend(e.holes.iter().copied());
            part.slots.extend(e.slots.iter().copied());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Pt2, Transform};
    use crate::intersect::{find_intersection_segments, Classification};

    fn rect_part(id: &str, l: f64, w: f64, t: Transform) -> ComponentInstance {
        let mut c = ComponentInstance::from_polygon(id, Polygon2::rect(0.0, 0.0, l, w), vec![]);
        c.placement = Some(t);
        c
    }

    #[test]
    fn finger_finger_on_square_top_edge() {
        let spec = FabricationSpec::default();
        let mut parts = vec![
            rect_part("a", 30.0, 30.0, Transform::translation(0.0, 30.0, 0.0).compose(&Transform::rot_x(90.0))),
            rect_part("b", 30.0, 30.0, Transform::identity()),
        ];
        let rec = find_intersection_segments(&parts, &[], &[], spec.min_joint_len()).unwrap().records;
        assert_eq!(rec[0].classification, Classification::EdgeEdge);
        let pats = synthesize(&parts, &rec, &[], &spec).unwrap();
        assert_eq!(pats[0].kind, JointKind::FingerFinger);
        let fingers_b = pats[0].edits[1].add.len();
        apply_patterns(&mut parts, &pats).unwrap();
        assert_eq!(parts[1].polygon.outer().len(), 4 + 4 * fingers_b);
        assert!(parts[1].polygon.validate().is_ok());
    }

    #[test]
    fn two_slots_remove_exact_area() {
        let spec = FabricationSpec::default();
        let mut part = rect_part("p", 100.0, 50.0, Transform::identity());
        let before = part.polygon.area();
        let s1 = Polygon2::rect(20.0, -5.0, 23.25, 25.0);
        let s2 = Polygon2::rect(60.0, 10.0, 63.25, 30.0);
        let pat = |cut: Polygon2, label: &str| JointPattern {
            kind: JointKind::SlotSlot,
            label: label.into(),
            params: JointParams { w_s: Some(spec.thickness + 2.0 * spec.kerf + spec.fit), ..Default::default() },
            edits: vec![PartEdits { part: "p".into(), cut: vec![cut], ..Default::default() }],
        };
        let pats = vec![pat(s1, "one"), pat(s2, "two")];
        apply_patterns(std::slice::from_mut(&mut part), &pats).unwrap();
        let removed = 3.25 * 25.0 + 3.25 * 20.0;
        assert!((before - part.polygon.area() - removed).abs() < 1e-9);
        assert_eq!(part.polygon.holes().len(), 1);
    }

    #[test]
    fn overlapping_edits_conflict() {
        let mut part = rect_part("p", 100.0, 50.0, Transform::identity());
        let pat = |x: f64, label: &str| JointPattern {
            kind: JointKind::SlotSlot,
            label: label.into(),
            params: JointParams::default(),
            edits: vec![PartEdits { part: "p".into(), cut: vec![Polygon2::rect(x, 10.0, x + 5.0, 20.0)], ..Default::default() }],
        };
        let r = apply_patterns(std::slice::from_mut(&mut part), &[pat(10.0, "one"), pat(12.0, "two")]);
        assert!(matches!(r, Err(JointError::JointConflict { .. })));
    }

    #[test]
    fn breach_is_reported() {
        let spec = FabricationSpec::default();
        // Shelf edge 1 mm from the panel border.
        let parts = vec![
            rect_part("p", 40.0, 40.0, Transform::identity()),
            rect_part("s", 30.0, 10.0, Transform::translation(5.0, 1.0, 0.0).compose(&Transform::rot_x(90.0))),
        ];
        let rec = find_intersection_segments(&parts, &[], &[], spec.min_joint_len()).unwrap().records;
        assert_eq!(rec[0].classification, Classification::FaceEdge);
        assert!(matches!(synthesize(&parts, &rec, &[], &spec), Err(JointError::JointPlacementError { .. })));
    }

    #[test]
    fn non_right_angle_rejected() {
        let spec = FabricationSpec::default();
        let parts = vec![
            rect_part("a", 30.0, 30.0, Transform::translation(0.0, 30.0, 0.0).compose(&Transform::rot_x(60.0))),
            rect_part("b", 30.0, 30.0, Transform::identity()),
        ];
        let rec = find_intersection_segments(&parts, &[], &[], spec.min_joint_len()).unwrap().records;
        assert!(matches!(synthesize(&parts, &rec, &[], &spec), Err(JointError::JointUnsupportedAngle { .. })));
    }

    #[test]
    fn cross_lap_slots_meet_at_midpoint() {
        let spec = FabricationSpec::default();
        let mut parts = vec![
            rect_part("a", 40.0, 40.0, Transform::translation(0.0, 20.0, -20.0).compose(&Transform::rot_x(90.0))),
            rect_part("b", 40.0, 40.0, Transform::identity()),
        ];
        let rec = find_intersection_segments(&parts, &[], &[], spec.min_joint_len()).unwrap().records;
        assert_eq!(rec[0].classification, Classification::FaceFace);
        let pats = synthesize(&parts, &rec, &[], &spec).unwrap();
        assert_eq!(pats[0].kind, JointKind::SlotSlot);
        assert_eq!(pats[0].params.l_s, Some(20.0));
        let before: Vec<f64> = parts.iter().map(|p| p.polygon.area()).collect();
        apply_patterns(&mut parts, &pats).unwrap();
        for (p, b) in parts.iter().zip(before) {
            assert!((b - p.polygon.area() - 20.0 * 3.25).abs() < 1e-9, "{}", p.id);
            assert_eq!(p.slots.len(), 1);
        }
        let _ = Pt2::origin();
    }
}
