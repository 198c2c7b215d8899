//! ASCII DXF (R12) cut files with closed polylines on layer CUT.

use std::fmt::Write;

use crate::design::ComponentInstance;
use crate::geom::Pt2;

use super::{fmt_coord, OutputError, SheetLayout};

fn pair(s: &mut String, code: u32, value: &str) {
    let _ = write!(s, "{code}\n{value}\n");
}

fn polyline(s: &mut String, ring: &[Pt2]) {
    pair(s, 0, "POLYLINE");
    pair(s, 8, "CUT");
    pair(s, 66, "1");
    pair(s, 70, "1");
    pair(s, 10, "0.0");
    pair(s, 20, "0.0");
    pair(s, 30, "0.0");
    for p in ring {
        pair(s, 0, "VERTEX");
        pair(s, 8, "CUT");
        pair(s, 10, &fmt_coord(p.x));
        pair(s, 20, &fmt_coord(p.y));
        pair(s, 30, "0.0");
    }
    pair(s, 0, "SEQEND");
    pair(s, 8, "CUT");
}

/// One DXF document per sheet: every outline and hole becomes a closed
/// polyline in sheet coordinates (mm, y up).
pub fn emit_dxf(layout: &SheetLayout, parts: &[ComponentInstance]) -> Result<Vec<String>, OutputError> {
    let mut docs = Vec::with_capacity(layout.sheets.len());
    for sheet in &layout.sheets {
        let mut s = String::new();
        pair(&mut s, 0, "SECTION");
        pair(&mut s, 2, "HEADER");
        pair(&mut s, 9, "$ACADVER");
        pair(&mut s, 1, "AC1009");
        pair(&mut s, 9, "$INSUNITS");
        pair(&mut s, 70, "4");
        pair(&mut s, 0, "ENDSEC");
        pair(&mut s, 0, "SECTION");
        pair(&mut s, 2, "ENTITIES");
        for pl in &sheet.placements {
            let part = parts
                .iter()
                .find(|p| p.id == pl.part)
                .ok_or_else(|| OutputError::UnknownPart(pl.part.clone()))?;
            for ring in pl.place(&part.polygon).canonical().rings() {
                polyline(&mut s, ring);
            }
        }
        pair(&mut s, 0, "ENDSEC");
        pair(&mut s, 0, "EOF");
        docs.push(s);
    }
    Ok(docs)
}

/// Minimal reader for the subset written above: returns the vertex list of
/// every closed polyline. Used to check emitted files independently.
pub fn parse_dxf_polylines(text: &str) -> Result<Vec<Vec<[f64; 2]>>, String> {
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    if lines.len() % 2 != 0 {
        return Err("odd number of lines".into());
    }
    let pairs: Vec<(i32, &str)> = lines
        .chunks(2)
        .map(|c| c[0].parse::<i32>().map(|g| (g, c[1])).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    let mut current: Option<(Vec<[f64; 2]>, bool)> = None;
    let mut vertex: Option<[f64; 2]> = None;
    let mut in_vertex = false;
    let flush = |vertex: &mut Option<[f64; 2]>, current: &mut Option<(Vec<[f64; 2]>, bool)>| {
        if let (Some(v), Some((pts, _))) = (vertex.take(), current.as_mut()) {
            pts.push(v);
        }
    };
    for (code, value) in pairs {
        match (code, value) {
            (0, entity) => {
                if in_vertex {
                    flush(&mut vertex, &mut current);
                }
                in_vertex = false;
                match entity {
                    "POLYLINE" => current = Some((Vec::new(), false)),
                    "VERTEX" => {
                        if current.is_none() {
                            return Err("VERTEX outside POLYLINE".into());
                        }
                        in_vertex = true;
                        vertex = Some([f64::NAN, f64::NAN]);
                    }
                    "SEQEND" => {
                        let (pts, closed) = current.take().ok_or("SEQEND outside POLYLINE")?;
                        if !closed {
                            return Err("open polyline".into());
                        }
                        if pts.iter().any(|p| p[0].is_nan() || p[1].is_nan()) {
                            return Err("vertex missing a coordinate".into());
                        }
                        out.push(pts);
                    }
                    _ => {}
                }
            }
            (70, flags) if !in_vertex => {
                if let Some((_, closed)) = current.as_mut() {
                    *closed = flags.parse::<i32>().map_err(|e| e.to_string())? & 1 == 1;
                }
            }
            (10, x) if in_vertex => vertex.as_mut().expect("in vertex")[0] = x.parse().map_err(|e: std::num::ParseFloatError| e.to_string())?,
            (20, y) if in_vertex => vertex.as_mut().expect("in vertex")[1] = y.parse().map_err(|e: std::num::ParseFloatError| e.to_string())?,
            _ => {}
        }
    }
    if current.is_some() {
        return Err("unterminated polyline".into());
    }
    Ok(out)
}
