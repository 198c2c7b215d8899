use std::collections::BTreeMap;

use serde::Serialize;

use crate::geom::{Polygon2, Pt2, Segment2, Transform};

use super::template::ComponentTemplate;
use super::DesignError;

/// A resolved part: outline, interfaces, joint features and (after
/// placement) its global pose.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentInstance {
    pub id: String,
    pub template: String,
    pub bindings: BTreeMap<String, f64>,
    pub polygon: Polygon2,
    /// Outline as generated, before merging or joint edits; interfaces
    /// index into its outer ring.
    #[serde(skip)]
    pub original: Polygon2,
    pub interfaces: Vec<(String, usize)>,
    pub fingers: Vec<Segment2>,
    pub holes: Vec<Segment2>,
    pub slots: Vec<Segment2>,
    pub placement: Option<Transform>,
    /// Ids of coplanar parts absorbed into this one.
    pub merged_from: Vec<String>,
}

impl ComponentInstance {
    /// Wraps an explicit outline. Interfaces index the outer ring.
    pub fn from_polygon(id: &str, polygon: Polygon2, interfaces: Vec<(String, usize)>) -> Self {
        Self {
            id: id.to_string(),
            template: String::new(),
            bindings: BTreeMap::new(),
            original: polygon.clone(),
            polygon,
            interfaces,
            fingers: Vec::new(),
            holes: Vec::new(),
            slots: Vec::new(),
            placement: None,
            merged_from: Vec::new(),
        }
    }

    pub fn interface_index(&self, name: &str) -> Option<usize> {
        self.interfaces.iter().find(|(n, _)| n == name).map(|(_, i)| *i)
    }

    /// Endpoints of the named interface edge in the local frame.
    pub fn interface_edge(&self, name: &str) -> Option<(Pt2, Pt2)> {
        let i = self.interface_index(name)?;
        let o = self.original.outer();
        Some((o[i], o[(i + 1) % o.len()]))
    }

    pub fn placement(&self) -> Transform {
        self.placement.unwrap_or_else(Transform::identity)
    }
}

pub fn instantiate_component(
    id: &str,
    template: &ComponentTemplate,
    bindings: &BTreeMap<String, f64>,
) -> Result<ComponentInstance, DesignError> {
    let polygon = template.generate(bindings).map_err(|e| match e {
        DesignError::Binding(m) => DesignError::Binding(format!("component `{id}`: {m}")),
        other => other,
    })?;
    let mut c = ComponentInstance::from_polygon(id, polygon, template.interfaces_for(bindings));
    c.template = template.name.clone();
    c.bindings = bindings.clone();
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_interfaces_on_edges() {
        let b: BTreeMap<String, f64> = [("l".to_string(), 4.0), ("w".to_string(), 2.0)].into();
        let c = instantiate_component("A", &ComponentTemplate::rectangle(), &b).unwrap();
        assert_eq!(c.interface_edge("b"), Some((Pt2::new(0.0, 0.0), Pt2::new(4.0, 0.0))));
        assert_eq!(c.interface_edge("r"), Some((Pt2::new(4.0, 0.0), Pt2::new(4.0, 2.0))));
        assert_eq!(c.interface_edge("t"), Some((Pt2::new(4.0, 2.0), Pt2::new(0.0, 2.0))));
        assert_eq!(c.interface_edge("l"), Some((Pt2::new(0.0, 2.0), Pt2::new(0.0, 0.0))));
        assert!(c.fingers.is_empty() && c.holes.is_empty() && c.slots.is_empty());
        assert!(c.polygon.area() > 0.0);
    }
}
