//! SVG cut files, one document per sheet.

use std::fmt::Write;

use crate::design::ComponentInstance;
use crate::geom::Pt2;

use super::{fmt_coord, OutputError, SheetLayout};

fn find<'a>(parts: &'a [ComponentInstance], id: &str) -> Result<&'a ComponentInstance, OutputError> {
    parts.iter().find(|p| p.id == id).ok_or_else(|| OutputError::UnknownPart(id.to_string()))
}

/// One SVG document per sheet. Units are millimetres; the sheet y axis
/// points up, so it is flipped into SVG's downward y. Each part is one
/// even-odd path whose first subpath is the outline and the rest its holes.
pub fn emit_svg(layout: &SheetLayout, parts: &[ComponentInstance]) -> Result<Vec<String>, OutputError> {
    let (w, h) = (layout.width, layout.height);
    let mut docs = Vec::with_capacity(layout.sheets.len());
    for sheet in &layout.sheets {
        let mut s = String::new();
        s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}mm\" height=\"{h}mm\" viewBox=\"0 0 {w} {h}\">",
            w = fmt_coord(w),
            h = fmt_coord(h)
        );
        s.push_str("<g fill=\"none\" stroke=\"#ff0000\" stroke-width=\"0.1\" fill-rule=\"evenodd\">\n");
        for pl in &sheet.placements {
            let poly = pl.place(&find(parts, &pl.part)?.polygon).canonical();
            let mut d = String::new();
            for ring in poly.rings() {
                for (k, p) in ring.iter().enumerate() {
                    let q = Pt2::new(p.x, h - p.y);
                    let _ = write!(d, "{}{} {} ", if k == 0 { "M" } else { "L" }, fmt_coord(q.x), fmt_coord(q.y));
                }
                d.push_str("Z ");
            }
            let _ = writeln!(s, "<path d=\"{}\"/>", d.trim_end());
        }
        s.push_str("</g>\n</svg>\n");
        docs.push(s);
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::FabricationSpec;
    use crate::geom::Polygon2;
    use crate::output::layout_sheets;

    fn spec() -> FabricationSpec {
        FabricationSpec { sheet_width: 100.0, sheet_height: 100.0, spacing: 2.0, ..FabricationSpec::default() }
    }

    #[test]
    fn unit_square_path() {
        let parts = vec![ComponentInstance::from_polygon("a", Polygon2::rect(0.0, 0.0, 1.0, 1.0), vec![])];
        let l = layout_sheets(&parts, &spec()).unwrap();
        let docs = emit_svg(&l, &parts).unwrap();
        assert_eq!(docs.len(), 1);
        let doc = &docs[0];
        assert_eq!(doc.matches("<path").count(), 1);
        let d = doc.split("d=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(d.matches('M').count(), 1);
        assert_eq!(d.matches('L').count(), 3);
        assert!(d.ends_with('Z'));
        assert!(doc.contains("width=\"100.000mm\""));
    }

    #[test]
    fn slot_hole_is_second_subpath() {
        let poly = Polygon2::new(
            Polygon2::rect(0.0, 0.0, 10.0, 10.0).outer().to_vec(),
            vec![Polygon2::rect(4.0, 2.0, 6.0, 8.0).outer().iter().rev().copied().collect()],
        )
        .unwrap();
        let parts = vec![ComponentInstance::from_polygon("a", poly, vec![])];
        let l = layout_sheets(&parts, &spec()).unwrap();
        let doc = &emit_svg(&l, &parts).unwrap()[0];
        assert_eq!(doc.matches("<path").count(), 1);
        let d = doc.split("d=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(d.matches('M').count(), 2);
        assert_eq!(d.matches('Z').count(), 2);
    }

    #[test]
    fn deterministic() {
        let parts = vec![
            ComponentInstance::from_polygon("a", Polygon2::rect(0.0, 0.0, 10.0, 3.0), vec![]),
            ComponentInstance::from_polygon("b", Polygon2::rect(0.0, 0.0, 7.0, 3.0), vec![]),
        ];
        let l = layout_sheets(&parts, &spec()).unwrap();
        assert_eq!(emit_svg(&l, &parts).unwrap(), emit_svg(&l, &parts).unwrap());
    }
}
