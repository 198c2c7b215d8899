//! YAML persistence for design models.

use serde::de::DeserializeOwned;
use serde_yaml::{Mapping, Value};

use super::model::{DesignModel, IncludeDecl};
use super::DesignError;

pub const FORMAT_VERSION: u64 = 1;

fn schema(path: &str, message: impl Into<String>) -> DesignError {
    DesignError::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

fn typed<T: DeserializeOwned>(v: &Value, path: &str) -> Result<T, DesignError> {
    serde_yaml::from_value(v.clone()).map_err(|e| schema(path, e.to_string()))
}

fn typed_list<T: DeserializeOwned>(v: &Value, path: &str) -> Result<Vec<T>, DesignError> {
    let items = v.as_sequence().ok_or_else(|| schema(path, "expected a list"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| typed(item, &format!("{path}/{i}")))
        .collect()
}

fn key_str<'a>(k: &'a Value, path: &str) -> Result<&'a str, DesignError> {
    k.as_str().ok_or_else(|| schema(path, "keys must be strings"))
}

fn parse_include(v: &Value, path: &str) -> Result<IncludeDecl, DesignError> {
    let map = v.as_mapping().ok_or_else(|| schema(path, "expected a mapping"))?;
    let mut alias = None;
    let mut file = None;
    let mut model = None;
    for (k, val) in map {
        match key_str(k, path)? {
            "alias" => alias = Some(typed::<String>(val, &format!("{path}/alias"))?),
            "file" => file = Some(typed::<String>(val, &format!("{path}/file"))?),
            "model" => model = Some(Box::new(parse_model(val, &format!("{path}/model"), false)?)),
            other => return Err(schema(&format!("{path}/{other}"), "unknown field")),
        }
    }
    let alias = alias.ok_or_else(|| schema(&format!("{path}/alias"), "missing required field"))?;
    if file.is_some() == model.is_some() {
        return Err(schema(path, "include needs exactly one of `file` or `model`"));
    }
    Ok(IncludeDecl { alias, file, model })
}

fn parse_model(v: &Value, path: &str, top: bool) -> Result<DesignModel, DesignError> {
    let map = v.as_mapping().ok_or_else(|| schema(if path.is_empty() { "/" } else { path }, "expected a mapping"))?;
    let mut m = DesignModel::default();
    let mut have_components = false;
    let mut have_connections = false;
    let mut version = None;
    for (k, val) in map {
        let key = key_str(k, path)?;
        let p = format!("{path}/{key}");
        match key {
            "flatpack" if top => version = Some(val),
            "templates" => m.templates = typed_list(val, &p)?,
            "includes" => {
                let items = val.as_sequence().ok_or_else(|| schema(&p, "expected a list"))?;
                m.includes = items
                    .iter()
                    .enumerate()
                    .map(|(i, it)| parse_include(it, &format!("{p}/{i}")))
                    .collect::<Result<_, _>>()?;
            }
            "components" => {
                m.components = typed_list(val, &p)?;
                have_components = true;
            }
            "constraints" => m.constraints = typed(val, &p)?,
            "connections" => {
                m.connections = typed_list(val, &p)?;
                have_connections = true;
            }
            "exports" => m.exports = typed(val, &p)?,
            "no_joint" => m.no_joint = typed_list(val, &p)?,
            "hinges" => m.hinges = typed_list(val, &p)?,
            _ => return Err(schema(&p, "unknown field")),
        }
    }
    if top {
        match version {
            None => return Err(schema("/flatpack", "missing format version")),
            Some(v) if v.as_u64() == Some(FORMAT_VERSION) => {}
            Some(v) => {
                return Err(DesignError::Version(
                    serde_yaml::to_string(v).unwrap_or_default().trim().to_string(),
                ))
            }
        }
    }
    if !have_components {
        return Err(schema(&format!("{path}/components"), "missing required field"));
    }
    if !have_connections {
        return Err(schema(&format!("{path}/connections"), "missing required field"));
    }
    Ok(m)
}

pub fn load_design(text: &str) -> Result<DesignModel, DesignError> {
    let v: Value = serde_yaml::from_str(text).map_err(|e| schema("/", e.to_string()))?;
    parse_model(&v, "", true)
}

/// Canonical YAML text for a model. Loading the result and saving again
/// yields identical bytes.
pub fn save_design(model: &DesignModel) -> String {
    let body = serde_yaml::to_value(model).expect("design model serializes");
    let mut doc = Mapping::new();
    doc.insert(Value::from("flatpack"), Value::from(FORMAT_VERSION));
    if let Value::Mapping(m) = body {
        doc.extend(m);
    }
    serde_yaml::to_string(&Value::Mapping(doc)).expect("yaml mapping serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = "flatpack: 1\ncomponents:\n  - {id: A, template: rectangle, bindings: {l: 4, w: 2}}\nconnections: []\n";

    #[test]
    fn minimal_document() {
        let m = load_design(MIN).unwrap();
        assert_eq!(m.components.len(), 1);
    }

    #[test]
    fn missing_connections() {
        let r = load_design("flatpack: 1\ncomponents: []\n");
        assert_eq!(
            r,
            Err(DesignError::Schema {
                path: "/connections".into(),
                message: "missing required field".into()
            })
        );
    }

    #[test]
    fn version_mismatch() {
        assert!(matches!(
            load_design("flatpack: 2\ncomponents: []\nconnections: []\n"),
            Err(DesignError::Version(_))
        ));
    }

    #[test]
    fn item_path_in_errors() {
        let r = load_design("flatpack: 1\ncomponents:\n  - {id: A, template: rectangle}\n  - {id: B}\nconnections: []\n");
        match r {
            Err(DesignError::Schema { path, .. }) => assert_eq!(path, "/components/1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn save_load_save_is_stable() {
        let text = r#"
flatpack: 1
templates:
  - name: wedge
    params: [{name: a, min: 1, max: 100}]
    vertices: [[0, 0], [a, 0], ["a / 2", "a*2"]]
    interfaces: {b: 0, s: 1}
components:
  - {id: A, template: wedge, bindings: {a: 4}}
  - {id: B, template: rectangle, bindings: {l: 4.125, w: 0.1}}
constraints:
  B.w: "(A.a + 1)/3"
connections:
  - {connecting: [A, b], connected: [B, t], alignment: fb, offset: [0, 0, "A.a"], rotation: [90, 0, 0]}
no_joint: [[A, B]]
"#;
        let once = save_design(&load_design(text).unwrap());
        let twice = save_design(&load_design(&once).unwrap());
        assert_eq!(once, twice);
        assert!(once.starts_with("flatpack: 1\n"));
    }
}
