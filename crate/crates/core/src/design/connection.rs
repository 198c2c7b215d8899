use serde::{Deserialize, Serialize};

use super::component::ComponentInstance;
use super::DesignError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Alignment {
    #[serde(rename = "ff")]
    FrontFront,
    #[serde(rename = "fb")]
    FrontBack,
}

/// A component id and one of its interface names.
pub type Endpoint = (String, String);

/// Directed relation placing the connecting part A relative to the
/// connected part B.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Connection {
    pub connecting: Endpoint,
    pub connected: Endpoint,
    pub alignment: Alignment,
    /// Translation in B's local frame, mm.
    pub offset: [f64; 3],
    /// Intrinsic rotations about x, then y, then z, degrees.
    pub rotation: [f64; 3],
}

impl Connection {
    pub fn new(
        connecting: (&str, &str),
        connected: (&str, &str),
        alignment: Alignment,
        offset: [f64; 3],
        rotation: [f64; 3],
    ) -> Result<Self, DesignError> {
        if connecting.0 == connected.0 {
            return Err(DesignError::SelfConnection(connecting.0.to_string()));
        }
        if offset.iter().chain(rotation.iter()).any(|v| !v.is_finite()) {
            return Err(DesignError::Schema {
                path: String::new(),
                message: "connection offset and rotation must be finite".into(),
            });
        }
        Ok(Self {
            connecting: (connecting.0.to_string(), connecting.1.to_string()),
            connected: (connected.0.to_string(), connected.1.to_string()),
            alignment,
            offset,
            rotation,
        })
    }

    pub fn label(&self) -> String {
        format!(
            "{}.{} -> {}.{}",
            self.connecting.0, self.connecting.1, self.connected.0, self.connected.1
        )
    }
}

/// Builds a connection and checks both endpoints against `components`.
pub fn make_connection(
    components: &[ComponentInstance],
    connecting: (&str, &str),
    connected: (&str, &str),
    alignment: Alignment,
    offset: [f64; 3],
    rotation: [f64; 3],
) -> Result<Connection, DesignError> {
    let c = Connection::new(connecting, connected, alignment, offset, rotation)?;
    check_endpoint(components, &c.connecting, &c)?;
    check_endpoint(components, &c.connected, &c)?;
    Ok(c)
}

pub(crate) fn check_endpoint(
    components: &[ComponentInstance],
    ep: &Endpoint,
    conn: &Connection,
) -> Result<(), DesignError> {
    let comp = components
        .iter()
        .find(|c| c.id == ep.0)
        .ok_or_else(|| DesignError::Reference(format!("connection {}: unknown component `{}`", conn.label(), ep.0)))?;
    if comp.interface_index(&ep.1).is_none() {
        return Err(DesignError::Reference(format!(
            "connection {}: component `{}` has no interface `{}`",
            conn.label(),
            ep.0,
            ep.1
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::template::ComponentTemplate;
    use crate::design::instantiate_component;

    fn parts() -> Vec<ComponentInstance> {
        let b = [("l".to_string(), 1.0), ("w".to_string(), 1.0)].into();
        ["A", "B"]
            .iter()
            .map(|id| instantiate_component(id, &ComponentTemplate::rectangle(), &b).unwrap())
            .collect()
    }

    #[test]
    fn bookend_connection_is_valid() {
        let c = make_connection(&parts(), ("A", "t"), ("B", "b"), Alignment::FrontFront, [0.0; 3], [90.0, 0.0, 0.0]);
        assert!(c.is_ok());
    }

    #[test]
    fn self_connection_rejected() {
        let c = make_connection(&parts(), ("A", "t"), ("A", "b"), Alignment::FrontFront, [0.0; 3], [0.0; 3]);
        assert_eq!(c, Err(DesignError::SelfConnection("A".into())));
    }

    #[test]
    fn unknown_interface_rejected() {
        let c = make_connection(&parts(), ("A", "t"), ("B", "q"), Alignment::FrontFront, [0.0; 3], [0.0; 3]);
        assert!(matches!(c, Err(DesignError::Reference(_))));
    }
}
