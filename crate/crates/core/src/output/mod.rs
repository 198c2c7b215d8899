//! Back ends: sheet layout, 2D cut files and the 3D preview mesh.

mod dxf;
mod layout;
mod stl;
mod svg;

use thiserror::Error;

pub use dxf::{emit_dxf, parse_dxf_polylines};
pub use layout::{layout_sheets, Sheet, SheetLayout, SheetPlacement};
pub use stl::{emit_stl, part_meshes, read_stl, write_stl};
pub use svg::emit_svg;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OutputError {
    #[error("part `{part}` ({width:.3} x {height:.3} mm) does not fit a {sheet_width} x {sheet_height} mm sheet")]
    PartTooLarge {
        part: String,
        width: f64,
        height: f64,
        sheet_width: f64,
        sheet_height: f64,
    },
    #[error("cannot mesh part `{part}`: {message}")]
    MeshError { part: String, message: String },
    #[error("layout refers to unknown part `{0}`")]
    UnknownPart(String),
}

/// Fixed-precision coordinate text: snapped to 1e-9 first so values that
/// differ only by float noise print identically, and never `-0.000`.
pub(crate) fn fmt_coord(v: f64) -> String {
    let snapped = (v * 1e9).round() / 1e9;
    let s = format!("{snapped:.3}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::fmt_coord;

    #[test]
    fn coordinate_text() {
        assert_eq!(fmt_coord(-0.0), "0.000");
        assert_eq!(fmt_coord(-0.0001), "0.000");
        assert_eq!(fmt_coord(1.0006), "1.001");
        assert_eq!(fmt_coord(2.4999999999), "2.500");
        assert_eq!(fmt_coord(-3.25), "-3.250");
    }
}
