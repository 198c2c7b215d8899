//! Hierarchical design models and their flattening into one connectivity
//! graph of concrete parts.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::component::{instantiate_component, ComponentInstance};
use super::connection::{check_endpoint, Alignment, Connection, Endpoint};
use super::constraints::{evaluate_constraints, ConstraintExpr};
use super::expr::{parse_expression, Expr};
use super::template::{ComponentTemplate, ParamSpec};
use super::DesignError;

/// A number or an expression over qualified parameters, written in YAML as
/// a plain number or a string.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalar(pub Expr);

impl Default for Scalar {
    fn default() -> Self {
        Scalar(Expr::Num(0.0))
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar(Expr::Num(v))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match &self.0 {
            Expr::Num(v) => s.serialize_f64(*v),
            e => s.serialize_str(&e.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Scalar(Expr::Num(v))),
            Raw::Text(t) => parse_expression(&t).map(Scalar).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamDef {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateDef {
    pub name: String,
    pub params: Vec<ParamDef>,
    pub vertices: Vec<[Scalar; 2]>,
    pub interfaces: BTreeMap<String, usize>,
}

impl TemplateDef {
    pub fn build(&self) -> Result<ComponentTemplate, DesignError> {
        let mut ifaces: Vec<(String, usize)> = self.interfaces.iter().map(|(k, v)| (k.clone(), *v)).collect();
        ifaces.sort_by_key(|(_, e)| *e);
        ComponentTemplate::custom(
            &self.name,
            self.params.iter().map(|p| ParamSpec::new(&p.name, p.min, p.max)).collect(),
            self.vertices.iter().map(|[x, y]| [x.0.clone(), y.0.clone()]).collect(),
            ifaces,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDecl {
    pub id: String,
    pub template: String,
    #[serde(default)]
    pub bindings: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionDecl {
    pub connecting: [String; 2],
    pub connected: [String; 2],
    pub alignment: Alignment,
    #[serde(default)]
    pub offset: [Scalar; 3],
    #[serde(default)]
    pub rotation: [Scalar; 3],
}

/// A nested model under a local alias, either by file or inline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncludeDecl {
    pub alias: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Box<DesignModel>>,
}

/// Request for a flexible-hinge lattice inside a part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HingeDecl {
    pub part: String,
    /// Local-frame rectangle `[x0, y0, x1, y1]`.
    pub region: [f64; 4],
    pub rows: u32,
    pub cols: u32,
}

/// One level of a design: components, nested models, constraints,
/// connections and exported interfaces.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DesignModel {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub templates: Vec<TemplateDef>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub includes: Vec<IncludeDecl>,
    pub components: Vec<ComponentDecl>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub constraints: BTreeMap<String, Scalar>,
    pub connections: Vec<ConnectionDecl>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub exports: BTreeMap<String, [String; 2]>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub no_joint: Vec<[String; 2]>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub hinges: Vec<HingeDecl>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HingeRequest {
    pub part: String,
    pub region: [f64; 4],
    pub rows: u32,
    pub cols: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamSummary {
    /// Every declared (component, parameter) pair.
    pub total: usize,
    /// Qualified names of parameters not bound by a constraint.
    pub free: Vec<String>,
}

/// A fully resolved design: concrete parts and connections between them.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatDesign {
    pub components: Vec<ComponentInstance>,
    pub connections: Vec<Connection>,
    pub no_joint: Vec<(String, String)>,
    pub hinges: Vec<HingeRequest>,
    pub params: ParamSummary,
}

impl FlatDesign {
    pub fn component(&self, id: &str) -> Option<&ComponentInstance> {
        self.components.iter().find(|c| c.id == id)
    }
}

/// Resolves included files and library templates.
#[derive(Debug, Clone, Default)]
pub struct Loader {
    pub search_paths: Vec<PathBuf>,
    pub library_templates: Vec<ComponentTemplate>,
}

pub const LIBRARY_PATH_VAR: &str = "FLATPACK_LIBRARY_PATH";

impl Loader {
    /// Loader with search directories from `FLATPACK_LIBRARY_PATH`; custom
    /// templates declared in design files found there become available.
    pub fn from_env() -> Result<Self, DesignError> {
        let dirs: Vec<PathBuf> = std::env::var_os(LIBRARY_PATH_VAR)
            .map(|v| std::env::split_paths(&v).filter(|p| !p.as_os_str().is_empty()).collect())
            .unwrap_or_default();
        Self::with_dirs(dirs)
    }

    pub fn with_dirs(dirs: Vec<PathBuf>) -> Result<Self, DesignError> {
        let mut library_templates = Vec::new();
        for dir in &dirs {
            let Ok(entries) = std::fs::read_dir(dir) else { continue };
            let mut files: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "yaml" || e == "yml"))
                .collect();
            files.sort();
            for f in files {
                let text = read(&f)?;
                let model = super::io::load_design(&text)
                    .map_err(|e| DesignError::Include(format!("{}: {e}", f.display())))?;
                for t in &model.templates {
                    if !library_templates.iter().any(|x: &ComponentTemplate| x.name == t.name) {
                        library_templates.push(t.build()?);
                    }
                }
            }
        }
        Ok(Self {
            search_paths: dirs,
            library_templates,
        })
    }

    fn resolve(&self, file: &str, from: Option<&Path>) -> Result<PathBuf, DesignError> {
        let candidates = from
            .map(|d| d.join(file))
            .into_iter()
            .chain(self.search_paths.iter().map(|d| d.join(file)))
            .chain(std::iter::once(PathBuf::from(file)));
        for c in candidates {
            if c.is_file() {
                return Ok(c);
            }
        }
        Err(DesignError::Include(format!("cannot find included file `{file}`")))
    }

    pub fn all_templates(&self) -> Vec<ComponentTemplate> {
        let mut v = ComponentTemplate::builtins();
        v.extend(self.library_templates.iter().cloned());
        v
    }
}

fn read(path: &Path) -> Result<String, DesignError> {
    std::fs::read_to_string(path).map_err(|e| DesignError::Io(format!("{}: {e}", path.display())))
}

fn check_name(name: &str, what: &str, path: &str) -> Result<(), DesignError> {
    let b = name.as_bytes();
    let ok = !b.is_empty()
        && (b[0].is_ascii_alphabetic() || b[0] == b'_')
        && b.iter().all(|c| c.is_ascii_alphanumeric() || *c == b'_');
    if ok {
        Ok(())
    } else {
        Err(DesignError::Schema {
            path: path.to_string(),
            message: format!("{what} `{name}` must match [A-Za-z_][A-Za-z0-9_]*"),
        })
    }
}

struct PendingComponent {
    id: String,
    template: ComponentTemplate,
    bindings: BTreeMap<String, f64>,
}

struct PendingConnection {
    connecting: Endpoint,
    connected: Endpoint,
    alignment: Alignment,
    offset: [Expr; 3],
    rotation: [Expr; 3],
    path: String,
}

#[derive(Default)]
struct Collector {
    components: Vec<PendingComponent>,
    constraints: Vec<ConstraintExpr>,
    connections: Vec<PendingConnection>,
    no_joint: Vec<(String, String)>,
    hinges: Vec<HingeRequest>,
    stack: Vec<PathBuf>,
}

fn qualify(prefix: &str) -> impl Fn(&str) -> String + '_ {
    move |v: &str| format!("{prefix}{v}")
}

impl DesignModel {
    /// Flattens the hierarchy, evaluates constraints and instantiates every
    /// component. `dir` is the directory of the file the model came from.
    pub fn flatten(&self, loader: &Loader, dir: Option<&Path>) -> Result<FlatDesign, DesignError> {
        let mut col = Collector::default();
        self.collect(loader, dir, "", &mut col)?;

        let mut declared: BTreeSet<String> = BTreeSet::new();
        let mut seen_ids = BTreeSet::new();
        for c in &col.components {
            if !seen_ids.insert(c.id.clone()) {
                return Err(DesignError::Duplicate(format!("component id `{}`", c.id)));
            }
            for p in &c.template.params {
                declared.insert(format!("{}.{}", c.id, p.name));
            }
        }
        let targets: BTreeSet<&str> = col.constraints.iter().map(|c| c.target.as_str()).collect();
        for t in &targets {
            if !declared.contains(*t) {
                return Err(DesignError::Reference(format!("constraint target `{t}` is not a declared parameter")));
            }
        }
        let mut free: BTreeMap<String, f64> = BTreeMap::new();
        let mut free_names = Vec::new();
        for c in &col.components {
            for p in &c.template.params {
                let q = format!("{}.{}", c.id, p.name);
                if targets.contains(q.as_str()) {
                    continue;
                }
                free_names.push(q.clone());
                match c.bindings.get(&p.name) {
                    Some(v) => {
                        free.insert(q, *v);
                    }
                    None => {
                        return Err(DesignError::Binding(format!(
                            "component `{}`: free parameter `{}` is not bound",
                            c.id, p.name
                        )))
                    }
                }
            }
        }
        let values = evaluate_constraints(&col.constraints, &free)?;

        let mut components = Vec::with_capacity(col.components.len());
        for c in &col.components {
            let b: BTreeMap<String, f64> = c
                .template
                .params
                .iter()
                .map(|p| (p.name.clone(), values[&format!("{}.{}", c.id, p.name)]))
                .collect();
            components.push(instantiate_component(&c.id, &c.template, &b)?);
        }

        let look = |n: &str| values.get(n).copied();
        let mut connections = Vec::with_capacity(col.connections.len());
        for pc in &col.connections {
            let mut off = [0.0; 3];
            let mut rot = [0.0; 3];
            for k in 0..3 {
                off[k] = pc.offset[k].eval(&look)?;
                rot[k] = pc.rotation[k].eval(&look)?;
            }
            let conn = Connection::new(
                (&pc.connecting.0, &pc.connecting.1),
                (&pc.connected.0, &pc.connected.1),
                pc.alignment,
                off,
                rot,
            )
            .map_err(|e| match e {
                DesignError::Schema { message, .. } => DesignError::Schema {
                    path: pc.path.clone(),
                    message,
                },
                other => other,
            })?;
            check_endpoint(&components, &conn.connecting, &conn)
                .and_then(|_| check_endpoint(&components, &conn.connected, &conn))
                .map_err(|e| match e {
                    DesignError::Reference(m) => DesignError::Reference(format!("{}: {m}", pc.path)),
                    other => other,
                })?;
            connections.push(conn);
        }
        for (a, b) in &col.no_joint {
            for id in [a, b] {
                if !seen_ids.contains(id) {
                    return Err(DesignError::Reference(format!("no_joint: unknown component `{id}`")));
                }
            }
        }
        for h in &col.hinges {
            if !seen_ids.contains(&h.part) {
                return Err(DesignError::Reference(format!("hinges: unknown component `{}`", h.part)));
            }
        }
        Ok(FlatDesign {
            components,
            connections,
            no_joint: col.no_joint,
            hinges: col.hinges,
            params: ParamSummary {
                total: declared.len(),
                free: free_names,
            },
        })
    }

    /// Collects this level under `prefix` and returns its resolved exports.
    fn collect(
        &self,
        loader: &Loader,
        dir: Option<&Path>,
        prefix: &str,
        col: &mut Collector,
    ) -> Result<BTreeMap<String, Endpoint>, DesignError> {
        let q = qualify(prefix);
        let conn_start = col.connections.len();

        let mut local_templates: Vec<ComponentTemplate> = Vec::new();
        for t in &self.templates {
            check_name(&t.name, "template name", "/templates")?;
            local_templates.push(t.build()?);
        }
        let find_template = |name: &str| -> Option<ComponentTemplate> {
            local_templates
                .iter()
                .find(|t| t.name == name)
                .cloned()
                .or_else(|| ComponentTemplate::builtin(name))
                .or_else(|| loader.library_templates.iter().find(|t| t.name == name).cloned())
        };

        let mut local_ids = BTreeSet::new();
        for (i, c) in self.components.iter().enumerate() {
            let path = format!("{prefix}/components/{i}");
            check_name(&c.id, "component id", &path)?;
            if !local_ids.insert(c.id.as_str()) {
                return Err(DesignError::Duplicate(format!("component id `{}` at {path}", c.id)));
            }
            let template = find_template(&c.template)
                .ok_or_else(|| DesignError::Reference(format!("{path}: unknown template `{}`", c.template)))?;
            for k in c.bindings.keys() {
                if !template.params.iter().any(|p| &p.name == k) {
                    return Err(DesignError::Binding(format!(
                        "component `{}{}`: template `{}` has no parameter `{k}`",
                        prefix, c.id, template.name
                    )));
                }
            }
            col.components.push(PendingComponent {
                id: q(&c.id),
                template,
                bindings: c.bindings.clone(),
            });
        }

        let mut sub_exports: BTreeMap<&str, BTreeMap<String, Endpoint>> = BTreeMap::new();
        for (i, inc) in self.includes.iter().enumerate() {
            let path = format!("{prefix}/includes/{i}");
            check_name(&inc.alias, "include alias", &path)?;
            if local_ids.contains(inc.alias.as_str()) || sub_exports.contains_key(inc.alias.as_str()) {
                return Err(DesignError::Duplicate(format!("alias `{}` at {path}", inc.alias)));
            }
            let sub_prefix = format!("{prefix}{}/", inc.alias);
            let exports = match (&inc.file, &inc.model) {
                (Some(file), None) => {
                    let fp = loader.resolve(file, dir)?;
                    let canon = fp.canonicalize().unwrap_or_else(|_| fp.clone());
                    if col.stack.contains(&canon) {
                        return Err(DesignError::Include(format!("{path}: `{file}` includes itself")));
                    }
                    let text = read(&fp)?;
                    let model = super::io::load_design(&text)
                        .map_err(|e| DesignError::Include(format!("{}: {e}", fp.display())))?;
                    col.stack.push(canon);
                    let r = model.collect(loader, fp.parent(), &sub_prefix, col);
                    col.stack.pop();
                    r?
                }
                (None, Some(model)) => model.collect(loader, dir, &sub_prefix, col)?,
                _ => {
                    return Err(DesignError::Schema {
                        path,
                        message: "include needs exactly one of `file` or `model`".into(),
                    })
                }
            };
            sub_exports.insert(inc.alias.as_str(), exports);
        }

        let resolve = |ep: &[String; 2], path: &str| -> Result<Endpoint, DesignError> {
            if local_ids.contains(ep[0].as_str()) {
                Ok((q(&ep[0]), ep[1].clone()))
            } else if let Some(ex) = sub_exports.get(ep[0].as_str()) {
                ex.get(&ep[1]).cloned().ok_or_else(|| {
                    DesignError::Reference(format!("{path}: sub-model `{}` exports no interface `{}`", ep[0], ep[1]))
                })
            } else {
                Err(DesignError::Reference(format!("{path}: unknown component `{}`", ep[0])))
            }
        };

        for (target, e) in &self.constraints {
            col.constraints.push(ConstraintExpr::new(q(target), e.0.rename(&q)));
        }

        for (i, c) in self.connections.iter().enumerate() {
            let path = format!("{prefix}/connections/{i}");
            let connecting = resolve(&c.connecting, &path)?;
            let connected = resolve(&c.connected, &path)?;
            if connecting.0 == connected.0 {
                return Err(DesignError::SelfConnection(format!("{} at {path}", connecting.0)));
            }
            col.connections.push(PendingConnection {
                connecting,
                connected,
                alignment: c.alignment,
                offset: c.offset.clone().map(|s| s.0.rename(&q)),
                rotation: c.rotation.clone().map(|s| s.0.rename(&q)),
                path,
            });
        }

        let mut exports = BTreeMap::new();
        for (name, ep) in &self.exports {
            let path = format!("{prefix}/exports/{name}");
            let r = resolve(ep, &path)?;
            let consumed = col.connections[conn_start..]
                .iter()
                .any(|c| c.connecting == r || c.connected == r);
            if consumed {
                return Err(DesignError::Reference(format!(
                    "{path}: interface `{}.{}` is already used by an internal connection",
                    r.0, r.1
                )));
            }
            exports.insert(name.clone(), r);
        }

        let local_part = |id: &str, what: &str| -> Result<String, DesignError> {
            if local_ids.contains(id) || id.contains('/') {
                Ok(q(id))
            } else {
                Err(DesignError::Reference(format!("{prefix}/{what}: unknown component `{id}`")))
            }
        };
        for pair in &self.no_joint {
            col.no_joint.push((local_part(&pair[0], "no_joint")?, local_part(&pair[1], "no_joint")?));
        }
        for h in &self.hinges {
            col.hinges.push(HingeRequest {
                part: local_part(&h.part, "hinges")?,
                region: h.region,
                rows: h.rows,
                cols: h.cols,
            });
        }
        Ok(exports)
    }
}

/// Connected components of the connectivity graph, each sorted, ordered by
/// their smallest id.
pub fn connectivity_islands(ids: &[String], edges: &[(String, String)]) -> Vec<Vec<String>> {
    let idx: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (a, b) in edges {
        if let (Some(&i), Some(&j)) = (idx.get(a.as_str()), idx.get(b.as_str())) {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            parent[ri] = rj;
        }
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(id.clone());
    }
    let mut out: Vec<Vec<String>> = groups
        .into_values()
        .map(|mut g| {
            g.sort();
            g
        })
        .collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::io::load_design;

    const TWO: &str = r#"
flatpack: 1
components:
  - {id: A, template: rectangle, bindings: {l: 10, w: 4}}
  - {id: B, template: rectangle, bindings: {l: 10}}
constraints:
  B.w: "A.w * 2"
connections:
  - {connecting: [A, t], connected: [B, b], alignment: ff, offset: [0, 0, 0], rotation: ["A.l * 9", 0, 0]}
"#;

    #[test]
    fn flatten_evaluates_constraints_and_offsets() {
        let m = load_design(TWO).unwrap();
        let f = m.flatten(&Loader::default(), None).unwrap();
        assert_eq!(f.components.len(), 2);
        assert_eq!(f.component("B").unwrap().bindings["w"], 8.0);
        assert_eq!(f.connections[0].rotation, [90.0, 0.0, 0.0]);
        assert_eq!(f.params.total, 4);
        assert_eq!(f.params.free, vec!["A.l", "A.w", "B.l"]);
    }

    #[test]
    fn nested_models_use_exports_and_paths() {
        let text = r#"
flatpack: 1
includes:
  - alias: x
    model:
      components:
        - {id: P, template: rectangle, bindings: {l: 5, w: 5}}
        - {id: Q, template: rectangle, bindings: {l: 5, w: 5}}
      connections:
        - {connecting: [Q, b], connected: [P, t], alignment: ff}
      exports:
        top: [P, b]
components:
  - {id: R, template: rectangle, bindings: {l: 5, w: 1}}
constraints:
  R.w: "x/P.w / 5"
connections:
  - {connecting: [R, t], connected: [x, top], alignment: ff}
"#;
        let f = load_design(text).unwrap().flatten(&Loader::default(), None).unwrap();
        let ids: Vec<&str> = f.components.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["R", "x/P", "x/Q"]);
        assert_eq!(f.connections.len(), 2);
        assert_eq!(f.connections[1].connected, ("x/P".to_string(), "b".to_string()));
        assert_eq!(f.component("R").unwrap().bindings["w"], 1.0);
    }

    #[test]
    fn re_export_of_consumed_interface_rejected() {
        let text = r#"
flatpack: 1
includes:
  - alias: x
    model:
      components:
        - {id: P, template: rectangle, bindings: {l: 5, w: 5}}
        - {id: Q, template: rectangle, bindings: {l: 5, w: 5}}
      connections:
        - {connecting: [Q, b], connected: [P, t], alignment: ff}
      exports:
        top: [P, t]
components: []
connections: []
"#;
        let r = load_design(text).unwrap().flatten(&Loader::default(), None);
        assert!(matches!(r, Err(DesignError::Reference(_))), "{r:?}");
    }

    #[test]
    fn missing_binding() {
        let text = "flatpack: 1\ncomponents:\n  - {id: A, template: rectangle, bindings: {l: 3}}\nconnections: []\n";
        let r = load_design(text).unwrap().flatten(&Loader::default(), None);
        assert!(matches!(r, Err(DesignError::Binding(_))));
    }

    #[test]
    fn islands() {
        let ids: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let e = vec![("a".to_string(), "c".to_string())];
        assert_eq!(
            connectivity_islands(&ids, &e),
            vec![vec!["a".to_string(), "c".to_string()], vec!["b".to_string()], vec!["d".to_string()]]
        );
    }
}
