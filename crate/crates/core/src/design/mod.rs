//! Front end: templates, constraint expressions, connections, hierarchical
//! models and YAML persistence.

mod component;
mod connection;
mod constraints;
mod expr;
mod fabspec;
mod io;
mod model;
mod template;

use thiserror::Error;

use crate::geom::GeomError;

pub use component::{instantiate_component, ComponentInstance};
pub use connection::{make_connection, Alignment, Connection, Endpoint};
pub use constraints::{evaluate_constraints, evaluation_order, ConstraintExpr};
pub use expr::{parse_expression, Expr};
pub use fabspec::{load_spec, FabricationSpec};
pub use io::{load_design, save_design, FORMAT_VERSION};
pub use model::{
    connectivity_islands, ComponentDecl, ConnectionDecl, DesignModel, FlatDesign, HingeDecl, HingeRequest,
    IncludeDecl, Loader, ParamDef, ParamSummary, Scalar, TemplateDef, LIBRARY_PATH_VAR,
};
pub use template::{ComponentTemplate, Generator, ParamSpec, MAX_LEN, MIN_LEN};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unsupported format version {0}")]
    Version(String),
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("constraint cycle among {}", .0.join(", "))]
    Cycle(Vec<String>),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("constraint error: {0}")]
    Constraint(String),
    #[error("binding error: {0}")]
    Binding(String),
    #[error("template error: {0}")]
    Template(String),
    #[error("reference error: {0}")]
    Reference(String),
    #[error("component `{0}` is connected to itself")]
    SelfConnection(String),
    #[error("duplicate {0}")]
    Duplicate(String),
    #[error("include error: {0}")]
    Include(String),
    #[error("invalid fabrication spec: {0}")]
    Spec(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}
