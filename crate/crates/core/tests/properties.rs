use std::path::Path;

use flatpack_core::design::{ComponentInstance, FabricationSpec, Loader};
use flatpack_core::geom::{overlap_area, Polygon2};
use flatpack_core::output::{emit_dxf, emit_svg, layout_sheets, parse_dxf_polylines};
use flatpack_core::pipeline::{compile_file, Formats};
use proptest::prelude::*;

fn rects(sizes: &[(f64, f64)]) -> Vec<ComponentInstance> {
    sizes
        .iter()
        .enumerate()
        .map(|(i, &(w, h))| ComponentInstance::from_polygon(&format!("r{i:02}"), Polygon2::rect(0.0, 0.0, w, h), vec![]))
        .collect()
}

fn small_sheet() -> FabricationSpec {
    FabricationSpec { sheet_width: 400.0, sheet_height: 600.0, ..FabricationSpec::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn layout_keeps_parts_on_sheet_and_apart(sizes in prop::collection::vec((5.0f64..380.0, 5.0f64..380.0), 1..16)) {
        let parts = rects(&sizes);
        let spec = small_sheet();
        let layout = layout_sheets(&parts, &spec).unwrap();
        prop_assert_eq!(layout.part_count(), parts.len());
        for sheet in &layout.sheets {
            let placed: Vec<Polygon2> = sheet
                .placements
                .iter()
                .map(|p| p.place(&parts.iter().find(|q| q.id == p.part).unwrap().polygon))
                .collect();
            for (k, a) in placed.iter().enumerate() {
                let b = a.bbox();
                prop_assert!(b.min.x >= -1e-9 && b.min.y >= -1e-9);
                prop_assert!(b.max.x <= spec.sheet_width + 1e-9 && b.max.y <= spec.sheet_height + 1e-9);
                for c in &placed[k + 1..] {
                    prop_assert!(overlap_area(a, c).unwrap() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn emitters_are_deterministic_and_dxf_round_trips(sizes in prop::collection::vec((5.0f64..300.0, 5.0f64..300.0), 1..8)) {
        let parts = rects(&sizes);
        let spec = small_sheet();
        let layout = layout_sheets(&parts, &spec).unwrap();
        let svg = emit_svg(&layout, &parts).unwrap();
        prop_assert_eq!(&svg, &emit_svg(&layout_sheets(&parts, &spec).unwrap(), &parts).unwrap());
        let dxf = emit_dxf(&layout, &parts).unwrap();
        prop_assert_eq!(dxf.len(), layout.sheets.len());
        for (text, sheet) in dxf.iter().zip(&layout.sheets) {
            let rings = parse_dxf_polylines(text).unwrap();
            prop_assert_eq!(rings.len(), sheet.placements.len());
            let area: f64 = rings
                .iter()
                .map(|r| {
                    (0..r.len())
                        .map(|i| {
                            let (a, b) = (r[i], r[(i + 1) % r.len()]);
                            a[0] * b[1] - a[1] * b[0]
                        })
                        .sum::<f64>()
                        .abs()
                        / 2.0
                })
                .sum();
            let want: f64 = sheet
                .placements
                .iter()
                .map(|p| parts.iter().find(|q| q.id == p.part).unwrap().polygon.area())
                .sum();
            // Three printed decimals bound the per-vertex error.
            prop_assert!((area - want).abs() <= 1e-3 * want.sqrt() * 4.0 * sheet.placements.len() as f64);
        }
    }
}

#[test]
fn pipeline_is_deterministic() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/reading_desk.yaml");
    let loader = Loader::with_dirs(vec![]).unwrap();
    let spec = FabricationSpec::default();
    let a = compile_file(&path, &loader, &spec, Formats::default()).unwrap();
    let b = compile_file(&path, &loader, &spec, Formats::default()).unwrap();
    assert_eq!(a.report.deterministic_json(), b.report.deterministic_json());
    assert_eq!(a.svg, b.svg);
    assert_eq!(a.dxf, b.dxf);
    assert_eq!(a.stl, b.stl);
}

#[test]
fn formats_can_be_skipped() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/bookend.yaml");
    let loader = Loader::with_dirs(vec![]).unwrap();
    let only_svg = Formats { svg: true, dxf: false, stl: false };
    let c = compile_file(&path, &loader, &FabricationSpec::default(), only_svg).unwrap();
    assert_eq!(c.svg.len(), 1);
    assert!(c.dxf.is_empty());
    assert!(c.stl.is_none());
    assert_eq!(c.report.joints_by_kind.get("finger-finger"), Some(&1));
}
