//! First-fit decreasing-height shelf packing of part bounding boxes.

use serde::Serialize;

use crate::design::{ComponentInstance, FabricationSpec};
use crate::geom::{Polygon2, Pt2};

use super::{fmt_coord, OutputError};

/// Where one part sits on a sheet: local point `p` maps to
/// `rot(p) + offset`, with `rot` a quarter turn counter-clockwise when
/// `rotated` is set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SheetPlacement {
    pub part: String,
    pub rotated: bool,
    pub offset: [f64; 2],
}

impl SheetPlacement {
    pub fn apply(&self, p: &Pt2) -> Pt2 {
        let q = if self.rotated { Pt2::new(-p.y, p.x) } else { *p };
        Pt2::new(q.x + self.offset[0], q.y + self.offset[1])
    }

    pub fn place(&self, poly: &Polygon2) -> Polygon2 {
        poly.map_points(|p| self.apply(p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sheet {
    pub index: usize,
    pub placements: Vec<SheetPlacement>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SheetLayout {
    pub sheets: Vec<Sheet>,
    pub width: f64,
    pub height: f64,
    pub spacing: f64,
}

impl SheetLayout {
    pub fn part_count(&self) -> usize {
        self.sheets.iter().map(|s| s.placements.len()).sum()
    }
}

struct Item<'a> {
    id: &'a str,
    rotated: bool,
    /// Inflated cell size.
    w: f64,
    h: f64,
    area: f64,
    key: String,
    poly: &'a Polygon2,
}

struct Shelf {
    y: f64,
    h: f64,
    x: f64,
}

struct OpenSheet {
    shelves: Vec<Shelf>,
    top: f64,
    placements: Vec<SheetPlacement>,
}

fn rotated_poly(p: &Polygon2) -> Polygon2 {
    p.map_points(|q| Pt2::new(-q.y, q.x))
}

/// Shape fingerprint independent of position and ring start vertex, used
/// to order equal-sized boxes without relying on part ids.
fn shape_key(p: &Polygon2) -> String {
    let b = p.bbox();
    let c = p.map_points(|q| Pt2::new(q.x - b.min.x, q.y - b.min.y)).canonical();
    let mut s = String::new();
    for r in c.rings() {
        for q in r {
            s.push_str(&fmt_coord(q.x));
            s.push(',');
            s.push_str(&fmt_coord(q.y));
            s.push(' ');
        }
        s.push('|');
    }
    s
}

/// Packs every part. Each part occupies a cell of its bounding box grown by
/// the spacing, with the part centred in it; cells never overlap and stay
/// inside the sheet. Parts are laid landscape when that fits.
pub fn layout_sheets(parts: &[ComponentInstance], spec: &FabricationSpec) -> Result<SheetLayout, OutputError> {
    let (sw, sh, gap) = (spec.sheet_width, spec.sheet_height, spec.spacing);
    let mut items = Vec::with_capacity(parts.len());
    for part in parts {
        let b = part.polygon.bbox();
        let (w, h) = (b.width() + gap, b.height() + gap);
        let fits = |w: f64, h: f64| w <= sw + 1e-9 && h <= sh + 1e-9;
        let upright_ok = fits(w, h);
        let turned_ok = fits(h, w);
        let rotated = match (upright_ok, turned_ok) {
            (false, false) => {
                return Err(OutputError::PartTooLarge {
                    part: part.id.clone(),
                    width: b.width(),
                    height: b.height(),
                    sheet_width: sw,
                    sheet_height: sh,
                })
            }
            (true, true) => h > w + 1e-9,
            (ok, _) => !ok,
        };
        let (w, h) = if rotated { (h, w) } else { (w, h) };
        let shaped = if rotated { rotated_poly(&part.polygon) } else { part.polygon.clone() };
        items.push(Item {
            id: &part.id,
            rotated,
            w,
            h,
            area: part.polygon.area(),
            key: shape_key(&shaped),
            poly: &part.polygon,
        });
    }
    items.sort_by(|a, b| {
        b.h.total_cmp(&a.h)
            .then(b.w.total_cmp(&a.w))
            .then(b.area.total_cmp(&a.area))
            .then_with(|| a.key.cmp(&b.key))
            .then_with(|| a.id.cmp(b.id))
    });

    let mut sheets: Vec<OpenSheet> = Vec::new();
    for it in &items {
        let mut slot = None;
        'find: for (si, s) in sheets.iter().enumerate() {
            for (hi, shelf) in s.shelves.iter().enumerate() {
                if it.h <= shelf.h + 1e-9 && shelf.x + it.w <= sw + 1e-9 {
                    slot = Some((si, hi));
                    break 'find;
                }
            }
        }
        if slot.is_none() {
            let si = match sheets.iter().position(|s| s.top + it.h <= sh + 1e-9) {
                Some(si) => si,
                None => {
                    sheets.push(OpenSheet { shelves: Vec::new(), top: 0.0, placements: Vec::new() });
                    sheets.len() - 1
                }
            };
            let s = &mut sheets[si];
            s.shelves.push(Shelf { y: s.top, h: it.h, x: 0.0 });
            s.top += it.h;
            slot = Some((si, s.shelves.len() - 1));
        }
        let (si, hi) = slot.expect("a shelf was found or opened");
        let s = &mut sheets[si];
        let shelf = &mut s.shelves[hi];
        let shaped_min = if it.rotated { rotated_poly(it.poly).bbox().min } else { it.poly.bbox().min };
        let offset = [
            shelf.x + gap / 2.0 - shaped_min.x,
            shelf.y + gap / 2.0 - shaped_min.y,
        ];
        shelf.x += it.w;
        s.placements.push(SheetPlacement { part: it.id.to_string(), rotated: it.rotated, offset });
    }
    Ok(SheetLayout {
        sheets: sheets
            .into_iter()
            .enumerate()
            .map(|(index, s)| Sheet { index, placements: s.placements })
            .collect(),
        width: sw,
        height: sh,
        spacing: gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(w: f64, h: f64, gap: f64) -> FabricationSpec {
        FabricationSpec { sheet_width: w, sheet_height: h, spacing: gap, ..FabricationSpec::default() }
    }

    fn rect(id: &str, w: f64, h: f64) -> ComponentInstance {
        ComponentInstance::from_polygon(id, Polygon2::rect(0.0, 0.0, w, h), vec![])
    }

    #[test]
    fn three_squares_one_sheet() {
        let parts: Vec<_> = ["a", "b", "c"].iter().map(|id| rect(id, 100.0, 100.0)).collect();
        let l = layout_sheets(&parts, &spec(400.0, 400.0, 5.0)).unwrap();
        assert_eq!(l.sheets.len(), 1);
        assert_eq!(l.part_count(), 3);
    }

    #[test]
    fn oversize_part() {
        let r = layout_sheets(&[rect("big", 500.0, 100.0)], &spec(400.0, 400.0, 5.0));
        assert!(matches!(r, Err(OutputError::PartTooLarge { part, .. }) if part == "big"));
    }

    #[test]
    fn tall_part_is_turned() {
        let l = layout_sheets(&[rect("p", 50.0, 300.0)], &spec(400.0, 400.0, 5.0)).unwrap();
        assert!(l.sheets[0].placements[0].rotated);
    }

    #[test]
    fn random_parts_never_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let parts: Vec<_> = (0..20)
                .map(|k| rect(&format!("p{k:02}"), rng.gen_range(5.0..300.0), rng.gen_range(5.0..300.0)))
                .collect();
            let sp = spec(600.0, 500.0, 4.0);
            let l = layout_sheets(&parts, &sp).unwrap();
            assert_eq!(l.part_count(), 20);
            for s in &l.sheets {
                let boxes: Vec<_> = s
                    .placements
                    .iter()
                    .map(|pl| {
                        let part = parts.iter().find(|p| p.id == pl.part).unwrap();
                        pl.place(&part.polygon).bbox()
                    })
                    .collect();
                for b in &boxes {
                    assert!(b.min.x >= -1e-9 && b.min.y >= -1e-9);
                    assert!(b.max.x <= sp.sheet_width + 1e-9 && b.max.y <= sp.sheet_height + 1e-9);
                }
                for (i, a) in boxes.iter().enumerate() {
                    for b in &boxes[i + 1..] {
                        let h = sp.spacing / 2.0;
                        let overlap = a.min.x - h < b.max.x + h - 1e-9
                            && b.min.x - h < a.max.x + h - 1e-9
                            && a.min.y - h < b.max.y + h - 1e-9
                            && b.min.y - h < a.max.y + h - 1e-9;
                        assert!(!overlap, "{a:?} {b:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn area_is_conserved() {
        let parts = vec![rect("a", 30.0, 70.0), rect("b", 80.0, 20.0)];
        let l = layout_sheets(&parts, &spec(400.0, 400.0, 5.0)).unwrap();
        let placed: f64 = l.sheets[0]
            .placements
            .iter()
            .map(|pl| pl.place(&parts.iter().find(|p| p.id == pl.part).unwrap().polygon).area())
            .sum();
        assert!((placed - 30.0 * 70.0 - 80.0 * 20.0).abs() < 1e-9);
    }
}
