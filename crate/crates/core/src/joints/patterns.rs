//! Finger-finger, finger-hole and slot-slot cut geometry.

use nalgebra::Vector2;

use crate::design::FabricationSpec;
use crate::geom::{outward_normal_at, Polygon2, Pt2, Segment2};
use crate::intersect::{Classification, IntersectionRecord, Side};

use super::{JointError, JointKind, JointParams, JointPattern, PartEdits};

/// Tolerance on the right-angle policy for finger joints, degrees.
pub const ANGLE_TOLERANCE_DEG: f64 = 1.0;

/// Section layout and widths of a finger joint along a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerDims {
    pub sections: usize,
    pub pitch: f64,
    pub w_f: f64,
    pub w_d: f64,
    pub w_h: f64,
    pub l_f: f64,
    pub l_h: f64,
}

/// Default nominal pitch: two material thicknesses, or a ninth of the
/// segment for long edges.
pub fn default_pitch(len: f64, spec: &FabricationSpec) -> f64 {
    (2.0 * spec.thickness).max(len / 9.0)
}

pub fn finger_dims(len: f64, spec: &FabricationSpec, nominal_pitch: f64) -> Result<FingerDims, JointError> {
    if len < spec.min_joint_len() || !(nominal_pitch > 0.0) {
        return Err(JointError::JointTooSmall(format!(
            "segment of {len:.3} mm cannot hold a finger joint (minimum {:.3} mm)",
            spec.min_joint_len()
        )));
    }
    let mut n = (len / nominal_pitch + 1e-9).floor() as usize;
    if n % 2 == 0 {
        n = n.saturating_sub(1);
    }
    let n = n.max(3);
    let pitch = len / n as f64;
    let c = spec.finger_clearance();
    Ok(FingerDims {
        sections: n,
        pitch,
        w_f: pitch + c / 2.0,
        w_d: pitch - c / 2.0,
        w_h: pitch - c / 2.0,
        l_f: spec.thickness,
        l_h: spec.thickness,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotDims {
    pub w_s: f64,
    pub l_s: f64,
}

pub fn slot_dims(len: f64, spec: &FabricationSpec) -> SlotDims {
    SlotDims {
        w_s: spec.thickness + 2.0 * spec.kerf + spec.fit,
        l_s: len / 2.0,
    }
}

/// Rectangle spanning `[s0, s1]` along the segment and `[d0, d1]` along `n`.
fn strip(seg: &Segment2, n: &Vector2<f64>, s0: f64, s1: f64, d0: f64, d1: f64) -> Polygon2 {
    let u = seg.direction();
    let at = |s: f64, d: f64| -> Pt2 { seg.a + u * s + n * d };
    Polygon2::from_rings(vec![at(s0, d0), at(s1, d0), at(s1, d1), at(s0, d1)], vec![])
        .expect("strip of positive size")
}

/// Unit normal to the segment (left of its direction).
fn left_normal(seg: &Segment2) -> Vector2<f64> {
    let u = seg.direction();
    Vector2::new(-u.y, u.x)
}

fn check_angle(rec: &IntersectionRecord) -> Result<(), JointError> {
    if (rec.dihedral_deg - 90.0).abs() > ANGLE_TOLERANCE_DEG {
        return Err(JointError::JointUnsupportedAngle {
            i: rec.i.clone(),
            j: rec.j.clone(),
            angle: rec.dihedral_deg,
        });
    }
    Ok(())
}

fn outward(poly: &Polygon2, seg: &Segment2, part: &str) -> Result<Vector2<f64>, JointError> {
    outward_normal_at(poly, seg).ok_or_else(|| JointError::JointPlacementError {
        part: part.to_string(),
        message: "finger segment does not lie along a single boundary edge".into(),
    })
}

/// Finger rectangles on sections of the given parity, widened by a quarter
/// of the clearance on each side and kept within the segment.
fn fingers(seg: &Segment2, n: &Vector2<f64>, d: &FingerDims, parity: usize, clearance: f64) -> (Vec<Polygon2>, Vec<Segment2>) {
    let len = seg.length();
    let mut polys = Vec::new();
    let mut segs = Vec::new();
    for k in (parity..d.sections).step_by(2) {
        let s0 = (k as f64 * d.pitch - clearance / 4.0).max(0.0);
        let s1 = ((k + 1) as f64 * d.pitch + clearance / 4.0).min(len);
        polys.push(strip(seg, n, s0, s1, 0.0, d.l_f));
        segs.push(Segment2 {
            a: seg.point_at(s0 / len),
            b: seg.point_at(s1 / len),
        });
    }
    (polys, segs)
}

fn part_poly<'a>(parts: &'a [(&str, &Polygon2)], id: &str) -> &'a Polygon2 {
    parts.iter().find(|(p, _)| *p == id).map(|(_, p)| *p).expect("record refers to a live part")
}

/// Complementary fingers on both parts of an edge-edge record: part i on
/// even sections, part j on odd ones.
pub fn finger_finger_pattern(
    rec: &IntersectionRecord,
    poly_i: &Polygon2,
    poly_j: &Polygon2,
    spec: &FabricationSpec,
    nominal_pitch: Option<f64>,
) -> Result<JointPattern, JointError> {
    check_angle(rec)?;
    let len = rec.local_i.length();
    let d = finger_dims(len, spec, nominal_pitch.unwrap_or_else(|| default_pitch(len, spec)))?;
    let c = spec.finger_clearance();
    let ni = outward(poly_i, &rec.local_i, &rec.i)?;
    let nj = outward(poly_j, &rec.local_j, &rec.j)?;
    let (add_i, seg_i) = fingers(&rec.local_i, &ni, &d, 0, c);
    let (add_j, seg_j) = fingers(&rec.local_j, &nj, &d, 1, c);
    Ok(JointPattern {
        kind: JointKind::FingerFinger,
        label: format!("{} × {}", rec.i, rec.j),
        params: JointParams {
            w_f: Some(d.w_f),
            w_d: Some(d.w_d),
            l_f: Some(d.l_f),
            sections: Some(d.sections),
            ..Default::default()
        },
        edits: vec![
            PartEdits {
                part: rec.i.clone(),
                add: add_i,
                fingers: seg_i,
                ..PartEdits::default()
            },
            PartEdits {
                part: rec.j.clone(),
                add: add_j,
                fingers: seg_j,
                ..PartEdits::default()
            },
        ],
    })
}

/// Fingers on the edge part, matching through-holes in the face part.
pub fn finger_hole_pattern(
    rec: &IntersectionRecord,
    poly_i: &Polygon2,
    poly_j: &Polygon2,
    spec: &FabricationSpec,
    nominal_pitch: Option<f64>,
) -> Result<JointPattern, JointError> {
    check_angle(rec)?;
    let (edge_id, edge_seg, edge_poly, face_id, face_seg, face_poly) = match rec.classification {
        Classification::EdgeFace => (&rec.i, &rec.local_i, poly_i, &rec.j, &rec.local_j, poly_j),
        Classification::FaceEdge => (&rec.j, &rec.local_j, poly_j, &rec.i, &rec.local_i, poly_i),
        other => {
            return Err(JointError::JointPlacementError {
                part: rec.i.clone(),
                message: format!("finger-hole joint requested for a {} record", other.name()),
            })
        }
    };
    let len = edge_seg.length();
    let d = finger_dims(len, spec, nominal_pitch.unwrap_or_else(|| default_pitch(len, spec)))?;
    let c = spec.finger_clearance();
    let n_edge = outward(edge_poly, edge_seg, edge_id)?;
    let (add, finger_segs) = fingers(edge_seg, &n_edge, &d, 0, c);

    let across = left_normal(face_seg);
    let half = d.l_h / 2.0;
    let mut cuts = Vec::new();
    let mut hole_segs = Vec::new();
    for k in (0..d.sections).step_by(2) {
        let s0 = k as f64 * d.pitch + c / 4.0;
        let s1 = (k + 1) as f64 * d.pitch - c / 4.0;
        let mid = face_seg.point_at(0.5 * (s0 + s1) / len);
        for probe in [mid, mid + across * half, mid - across * half] {
            if !face_poly.contains(&probe) {
                return Err(JointError::JointPlacementError {
                    part: face_id.clone(),
                    message: format!(
                        "hole for {} × {} at ({:.3}, {:.3}) breaches the part outline",
                        rec.i, rec.j, mid.x, mid.y
                    ),
                });
            }
        }
        cuts.push(strip(face_seg, &across, s0, s1, -half, half));
        hole_segs.push(Segment2 {
            a: face_seg.point_at(s0 / len),
            b: face_seg.point_at(s1 / len),
        });
    }
    Ok(JointPattern {
        kind: JointKind::FingerHole,
        label: format!("{} × {}", rec.i, rec.j),
        params: JointParams {
            w_f: Some(d.w_f),
            w_d: Some(d.w_d),
            w_h: Some(d.w_h),
            l_f: Some(d.l_f),
            l_h: Some(d.l_h),
            sections: Some(d.sections),
            ..Default::default()
        },
        edits: vec![
            PartEdits {
                part: edge_id.clone(),
                add,
                fingers: finger_segs,
                ..PartEdits::default()
            },
            PartEdits {
                part: face_id.clone(),
                cut: cuts,
                holes: hole_segs,
                ..PartEdits::default()
            },
        ],
    })
}

/// Slot from `s0` to `s1` along the segment; ends lying on the part
/// boundary are carried past it so the notch opens cleanly.
fn slot(poly: &Polygon2, seg: &Segment2, s0: f64, s1: f64, w_s: f64) -> (Polygon2, Segment2) {
    let len = seg.length();
    let a = seg.point_at(s0 / len);
    let b = seg.point_at(s1 / len);
    let ext0 = if poly.on_boundary(&a) { w_s } else { 0.0 };
    let ext1 = if poly.on_boundary(&b) { w_s } else { 0.0 };
    let n = left_normal(seg);
    (strip(seg, &n, s0 - ext0, s1 + ext1, -w_s / 2.0, w_s / 2.0), Segment2 { a, b })
}

/// Cross-lap slots meeting at the segment midpoint, or one full-length slot
/// in the containing part.
pub fn slot_slot_pattern(
    rec: &IntersectionRecord,
    poly_i: &Polygon2,
    poly_j: &Polygon2,
    spec: &FabricationSpec,
) -> Result<JointPattern, JointError> {
    let len = rec.local_i.length();
    let d = slot_dims(len, spec);
    let one = |part: &str, poly: &Polygon2, seg: &Segment2, s0: f64, s1: f64| {
        let (cut, s) = slot(poly, seg, s0, s1, d.w_s);
        PartEdits {
            part: part.to_string(),
            cut: vec![cut],
            slots: vec![s],
            ..PartEdits::default()
        }
    };
    let (kind, l_s, edits) = match rec.classification {
        Classification::FaceFace => (
            JointKind::SlotSlot,
            d.l_s,
            vec![
                one(&rec.i, poly_i, &rec.local_i, 0.0, d.l_s),
                one(&rec.j, poly_j, &rec.local_j, d.l_s, len),
            ],
        ),
        Classification::FaceFaceContained(Side::I) => {
            (JointKind::SlotSingle, len, vec![one(&rec.i, poly_i, &rec.local_i, 0.0, len)])
        }
        Classification::FaceFaceContained(Side::J) => {
            (JointKind::SlotSingle, len, vec![one(&rec.j, poly_j, &rec.local_j, 0.0, len)])
        }
        other => {
            return Err(JointError::JointPlacementError {
                part: rec.i.clone(),
                message: format!("slot joint requested for a {} record", other.name()),
            })
        }
    };
    Ok(JointPattern {
        kind,
        label: format!("{} × {}", rec.i, rec.j),
        params: JointParams {
            w_s: Some(d.w_s),
            l_s: Some(l_s),
            ..Default::default()
        },
        edits,
    })
}

/// Chooses and builds the pattern for a classified record.
pub fn pattern_for_record(
    rec: &IntersectionRecord,
    parts: &[(&str, &Polygon2)],
    spec: &FabricationSpec,
) -> Result<JointPattern, JointError> {
    let pi = part_poly(parts, &rec.i);
    let pj = part_poly(parts, &rec.j);
    match rec.classification {
        Classification::EdgeEdge => finger_finger_pattern(rec, pi, pj, spec, None),
        Classification::EdgeFace | Classification::FaceEdge => finger_hole_pattern(rec, pi, pj, spec, None),
        Classification::FaceFace | Classification::FaceFaceContained(_) => slot_slot_pattern(rec, pi, pj, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(t: f64, k: f64, f: f64) -> FabricationSpec {
        FabricationSpec {
            thickness: t,
            kerf: k,
            fit: f,
            ..FabricationSpec::default()
        }
    }

    #[test]
    fn finger_example() {
        let d = finger_dims(30.0, &spec(3.0, 0.1, 0.05), 6.0).unwrap();
        assert_eq!(d.sections, 5);
        assert!((d.w_f - 6.225).abs() < 1e-12);
        assert!((d.w_d - 5.775).abs() < 1e-12);
        assert!((d.w_f - d.w_d - 0.45).abs() < 1e-12);
        assert_eq!(d.l_f, 3.0);
    }

    #[test]
    fn zero_compensation() {
        let d = finger_dims(30.0, &spec(3.0, 0.0, 0.0), 6.0).unwrap();
        assert_eq!(d.w_f, 6.0);
        assert_eq!(d.w_d, 6.0);
    }

    #[test]
    fn section_count_is_odd() {
        let s = spec(3.0, 0.1, 0.05);
        assert_eq!(finger_dims(36.0, &s, 6.0).unwrap().sections, 5);
        assert_eq!(finger_dims(6.5, &s, 6.0).unwrap().sections, 3);
        assert_eq!(finger_dims(90.0, &s, 6.0).unwrap().sections, 15);
        assert!(finger_dims(5.0, &s, 6.0).is_err());
    }

    #[test]
    fn slot_example() {
        let d = slot_dims(40.0, &spec(3.0, 0.1, 0.05));
        assert_eq!(d.l_s, 20.0);
        assert!((d.w_s - 3.25).abs() < 1e-12);
    }
}
