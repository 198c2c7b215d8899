//! The full compiler: design text in, cut files, preview mesh and report out.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::design::{load_design, ComponentInstance, DesignError, DesignModel, FabricationSpec, FlatDesign, Loader};
use crate::geom::GeomError;
use crate::intersect::{find_intersection_segments, merge_coplanar, IntersectionRecord, Source};
use crate::joints::{apply_patterns, synthesize, JointError, JointPattern};
use crate::output::{emit_dxf, emit_stl, emit_svg, layout_sheets, OutputError, SheetLayout};
use crate::placement::{place_components, PlacementError, PlacedModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("{0}")]
    Design(#[from] DesignError),
    #[error("{0}")]
    Placement(#[from] PlacementError),
    #[error("{0}")]
    Merge(GeomError),
    #[error("{0}")]
    Intersect(GeomError),
    #[error("{0}")]
    Joint(#[from] JointError),
    #[error("{0}")]
    Output(#[from] OutputError),
}

impl CompileError {
    pub fn stage(&self) -> &'static str {
        match self {
            CompileError::Design(_) => "design",
            CompileError::Placement(_) => "placement",
            CompileError::Merge(_) => "merge",
            CompileError::Intersect(_) => "intersection",
            CompileError::Joint(_) => "joints",
            CompileError::Output(_) => "output",
        }
    }

    /// True for failures caused by the input rather than by the compiler.
    /// Geometry kernel failures during merging or intersection are internal.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, CompileError::Merge(_) | CompileError::Intersect(_))
    }
}

/// Which files to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub svg: bool,
    pub dxf: bool,
    pub stl: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Self { svg: true, dxf: true, stl: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectionCounts {
    /// Connections written in the design.
    pub declared: usize,
    /// Intersection records realizing a declared connection.
    pub user: usize,
    /// Intersection records found only by detection.
    pub auto: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompileReport {
    pub parts_before_merge: usize,
    pub parts_after_merge: usize,
    pub merged: BTreeMap<String, Vec<String>>,
    pub connections: ConnectionCounts,
    pub joints_total: usize,
    pub joints_by_kind: BTreeMap<String, usize>,
    pub intersections: Vec<String>,
    pub sheets: usize,
    pub params_total: usize,
    pub params_free: usize,
    pub warnings: Vec<String>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl CompileReport {
    /// Report JSON without the timing block, stable across runs.
    pub fn deterministic_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("timings_ms");
        }
        v
    }
}

/// Everything one compilation produces.
#[derive(Debug, Clone)]
pub struct Compilation {
    pub design: FlatDesign,
    pub placed: PlacedModel,
    /// Final parts after merging and joint synthesis, sorted by id.
    pub parts: Vec<ComponentInstance>,
    pub records: Vec<IntersectionRecord>,
    pub patterns: Vec<JointPattern>,
    pub layout: SheetLayout,
    pub svg: Vec<String>,
    pub dxf: Vec<String>,
    pub stl: Option<Vec<u8>>,
    pub report: CompileReport,
}

struct Timer {
    start: Instant,
    timings: BTreeMap<String, f64>,
}

impl Timer {
    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.insert(stage.to_string(), (now - self.start).as_secs_f64() * 1e3);
        self.start = now;
    }
}

/// Runs every pass after loading. `dir` resolves relative includes.
pub fn compile_model(
    model: &DesignModel,
    dir: Option<&Path>,
    loader: &Loader,
    spec: &FabricationSpec,
    formats: Formats,
) -> Result<Compilation, CompileError> {
    spec.validate()?;
    let mut t = Timer { start: Instant::now(), timings: BTreeMap::new() };
    let design = model.flatten(loader, dir)?;
    t.lap("flatten");
    let placed = place_components(&design)?;
    t.lap("place");
    let mut parts = merge_coplanar(placed.parts.clone()).map_err(CompileError::Merge)?;
    t.lap("merge");
    let found = find_intersection_segments(&parts, &design.connections, &design.no_joint, spec.min_joint_len())
        .map_err(CompileError::Intersect)?;
    t.lap("intersect");
    let patterns = synthesize(&parts, &found.records, &design.hinges, spec)?;
    apply_patterns(&mut parts, &patterns)?;
    t.lap("joints");
    let layout = layout_sheets(&parts, spec)?;
    t.lap("layout");
    let svg = if formats.svg { emit_svg(&layout, &parts)? } else { Vec::new() };
    let dxf = if formats.dxf { emit_dxf(&layout, &parts)? } else { Vec::new() };
    let stl = if formats.stl { Some(emit_stl(&parts, spec.thickness)?) } else { None };
    t.lap("emit");

    let mut joints_by_kind = BTreeMap::new();
    for p in &patterns {
        *joints_by_kind.entry(p.kind.name().to_string()).or_insert(0) += 1;
    }
    let user = found.records.iter().filter(|r| matches!(r.source, Source::User(_))).count();
    let report = CompileReport {
        parts_before_merge: placed.parts.len(),
        parts_after_merge: parts.len(),
        merged: parts
            .iter()
            .filter(|p| !p.merged_from.is_empty())
            .map(|p| (p.id.clone(), p.merged_from.clone()))
            .collect(),
        connections: ConnectionCounts {
            declared: design.connections.len(),
            user,
            auto: found.records.len() - user,
        },
        joints_total: patterns.len(),
        joints_by_kind,
        intersections: found.records.iter().map(IntersectionRecord::report_line).collect(),
        sheets: layout.sheets.len(),
        params_total: design.params.total,
        params_free: design.params.free.len(),
        warnings: found.warnings.clone(),
        timings_ms: t.timings,
    };
    Ok(Compilation {
        design,
        placed,
        parts,
        records: found.records,
        patterns,
        layout,
        svg,
        dxf,
        stl,
        report,
    })
}

/// Reads, parses and compiles a design file.
pub fn compile_file(
    path: &Path,
    loader: &Loader,
    spec: &FabricationSpec,
    formats: Formats,
) -> Result<Compilation, CompileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DesignError::Io(format!("{}: {e}", path.display())))?;
    let model = load_design(&text)?;
    compile_model(&model, path.parent(), loader, spec, formats)
}

/// Parses and flattens a design file without any geometry pass.
pub fn load_flat(path: &Path, loader: &Loader) -> Result<(DesignModel, FlatDesign), DesignError> {
    let text = std::fs::read_to_string(path).map_err(|e| DesignError::Io(format!("{}: {e}", path.display())))?;
    let model = load_design(&text)?;
    let flat = model.flatten(loader, path.parent())?;
    Ok((model, flat))
}

/// One machine-readable finding from [`validate_design`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: &'static str,
    pub code: &'static str,
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    fn error(code: &'static str, path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { severity: "error", code, path: path.into(), message: message.into() }
    }

    pub fn from_design_error(e: &DesignError) -> Self {
        let (code, path) = match e {
            DesignError::Schema { path, .. } => ("E_SCHEMA", path.clone()),
            DesignError::Version(_) => ("E_VERSION", "/flatpack".to_string()),
            DesignError::Parse { .. } => ("E_PARSE", String::new()),
            DesignError::UnknownSymbol(_) => ("E_REFERENCE", "/constraints".to_string()),
            DesignError::Reference(m) => ("E_REFERENCE", leading_path(m)),
            DesignError::Cycle(_) => ("E_CYCLE", "/constraints".to_string()),
            DesignError::Eval(_) | DesignError::Constraint(_) => ("E_CONSTRAINT", "/constraints".to_string()),
            DesignError::Binding(_) => ("E_BINDING", String::new()),
            DesignError::Template(_) => ("E_TEMPLATE", "/templates".to_string()),
            DesignError::SelfConnection(_) => ("E_SELF_CONNECTION", String::new()),
            DesignError::Duplicate(_) => ("E_DUPLICATE", String::new()),
            DesignError::Include(_) => ("E_INCLUDE", "/includes".to_string()),
            DesignError::Spec(_) => ("E_SPEC", String::new()),
            DesignError::Io(_) => ("E_IO", String::new()),
            DesignError::Geom(_) => ("E_GEOMETRY", String::new()),
        };
        Self::error(code, path, e.to_string())
    }
}

/// The `/section/index` prefix of messages that start with a document path.
fn leading_path(message: &str) -> String {
    match message.split_once(':') {
        Some((p, _)) if p.starts_with('/') && !p.contains(' ') => p.to_string(),
        _ => String::new(),
    }
}

/// Schema, reference, constraint and connectivity checks without any
/// geometry pass. An empty list means the design is valid.
pub fn validate_design(text: &str, dir: Option<&Path>, loader: &Loader) -> Vec<Diagnostic> {
    let model = match load_design(text) {
        Ok(m) => m,
        Err(e) => return vec![Diagnostic::from_design_error(&e)],
    };
    let flat = match model.flatten(loader, dir) {
        Ok(f) => f,
        Err(e) => return vec![Diagnostic::from_design_error(&e)],
    };
    let ids: Vec<String> = flat.components.iter().map(|c| c.id.clone()).collect();
    let edges: Vec<(String, String)> =
        flat.connections.iter().map(|c| (c.connecting.0.clone(), c.connected.0.clone())).collect();
    let islands = crate::design::connectivity_islands(&ids, &edges);
    if islands.len() > 1 {
        let listed: Vec<String> = islands.iter().map(|g| format!("{{{}}}", g.join(", "))).collect();
        return vec![Diagnostic::error(
            "E_DISCONNECTED",
            "/connections",
            format!("design splits into {} islands: {}", islands.len(), listed.join(" ")),
        )];
    }
    Vec::new()
}
