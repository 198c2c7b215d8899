//! Flexible lattice hinge cut into a rectangular region of a part.
//!
//! Each module is a cell with solid junction strips (one beam wide) along
//! its bottom and top. Between them, horizontal slits of the gap width are
//! stacked at a pitch of beam + gap, alternately inset by one and two beam
//! widths from the left so the remaining material forms a serpentine
//! spring between the junctions. Modules repeat in a rows × cols grid.

use crate::design::FabricationSpec;
use crate::geom::{overlap_area, Polygon2, Segment2, Pt2};

use super::{JointError, JointKind, JointParams, JointPattern, PartEdits};

/// Slit rectangles for one hinge grid.
pub fn hinge_slits(region: [f64; 4], spec: &FabricationSpec, rows: u32, cols: u32) -> Result<Vec<Polygon2>, JointError> {
    let [x0, y0, x1, y1] = region;
    let (b, g) = (spec.hinge_beam, spec.hinge_gap);
    if rows == 0 || cols == 0 || !(x1 > x0) || !(y1 > y0) {
        return Err(JointError::JointTooSmall("hinge grid needs at least one module".into()));
    }
    let cw = (x1 - x0) / cols as f64;
    let ch = (y1 - y0) / rows as f64;
    let slit_len = cw - 3.0 * b;
    if slit_len <= 0.0 || ch < 2.0 * b + g {
        return Err(JointError::JointTooSmall(format!(
            "hinge module {cw:.3} x {ch:.3} mm is too small for beam {b} mm and gap {g} mm"
        )));
    }
    let per_cell = ((ch - 2.0 * b - g) / (b + g) + 1e-9).floor() as usize + 1;
    let mut out = Vec::with_capacity(per_cell * (rows * cols) as usize);
    for r in 0..rows {
        for c in 0..cols {
            let cx = x0 + c as f64 * cw;
            let cy = y0 + r as f64 * ch;
            for m in 0..per_cell {
                let inset = if m % 2 == 0 { b } else { 2.0 * b };
                let sy = cy + b + m as f64 * (b + g);
                out.push(Polygon2::rect(cx + inset, sy, cx + inset + slit_len, sy + g));
            }
        }
    }
    Ok(out)
}

/// Hinge pattern for `part`. The region must lie inside the part outline.
pub fn flex_hinge_pattern(
    part: &str,
    poly: &Polygon2,
    region: [f64; 4],
    spec: &FabricationSpec,
    rows: u32,
    cols: u32,
) -> Result<JointPattern, JointError> {
    let slits = hinge_slits(region, spec, rows, cols)?;
    let [x0, y0, x1, y1] = region;
    let rect = Polygon2::rect(x0, y0, x1, y1);
    let inside = overlap_area(&rect, poly).map_err(JointError::Geom)?;
    if (inside - rect.area()).abs() > 1e-6 * rect.area().max(1.0) {
        return Err(JointError::JointPlacementError {
            part: part.to_string(),
            message: format!("hinge region [{x0}, {y0}, {x1}, {y1}] is not inside the part"),
        });
    }
    let slots = slits
        .iter()
        .map(|s| {
            let bb = s.bbox();
            let ym = 0.5 * (bb.min.y + bb.max.y);
            Segment2 { a: Pt2::new(bb.min.x, ym), b: Pt2::new(bb.max.x, ym) }
        })
        .collect();
    Ok(JointPattern {
        kind: JointKind::FlexHinge,
        label: format!("{part} hinge"),
        params: JointParams::default(),
        edits: vec![PartEdits {
            part: part.to_string(),
            cut: slits,
            slots,
            ..PartEdits::default()
        }],
    })
}
