use std::collections::{BTreeMap, BTreeSet};

use crate::geom::{signed_area, Polygon2, Pt2};

use super::expr::Expr;
use super::DesignError;

pub const MIN_LEN: f64 = 0.1;
pub const MAX_LEN: f64 = 10_000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

impl ParamSpec {
    pub fn new(name: &str, min: f64, max: f64) -> Self {
        Self {
            name: name.to_string(),
            min,
            max,
        }
    }

    fn length(name: &str) -> Self {
        Self::new(name, MIN_LEN, MAX_LEN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Rectangle,
    Trapezoid,
    RightTriangle,
    RegularPolygon,
    AnnularRectangle,
    /// Vertex coordinates as expressions over the template parameters.
    Custom(Vec<[Expr; 2]>),
}

/// A parametric planar part: parameters with bounds, a vertex generator and
/// named edge interfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentTemplate {
    pub name: String,
    pub params: Vec<ParamSpec>,
    pub generator: Generator,
    /// Fixed interfaces as (name, edge index). Empty for regular polygons,
    /// whose interfaces `e0..` depend on the side count.
    pub interfaces: Vec<(String, usize)>,
}

fn edges(names: &[&str]) -> Vec<(String, usize)> {
    names.iter().enumerate().map(|(i, n)| (n.to_string(), i)).collect()
}

impl ComponentTemplate {
    pub fn rectangle() -> Self {
        Self {
            name: "rectangle".into(),
            params: vec![ParamSpec::length("l"), ParamSpec::length("w")],
            generator: Generator::Rectangle,
            interfaces: edges(&["b", "r", "t", "l"]),
        }
    }

    /// Isosceles trapezoid with bottom `b`, top `t`, height `h`.
    pub fn trapezoid() -> Self {
        Self {
            name: "trapezoid".into(),
            params: vec![ParamSpec::length("b"), ParamSpec::length("t"), ParamSpec::length("h")],
            generator: Generator::Trapezoid,
            interfaces: edges(&["b", "r", "t", "l"]),
        }
    }

    /// Legs `a` along x and `b` along y; interfaces bottom, hypotenuse, left.
    pub fn right_triangle() -> Self {
        Self {
            name: "right_triangle".into(),
            params: vec![ParamSpec::length("a"), ParamSpec::length("b")],
            generator: Generator::RightTriangle,
            interfaces: edges(&["b", "h", "l"]),
        }
    }

    pub fn regular_polygon() -> Self {
        Self {
            name: "regular_polygon".into(),
            params: vec![ParamSpec::new("n", 3.0, 64.0), ParamSpec::length("side")],
            generator: Generator::RegularPolygon,
            interfaces: Vec::new(),
        }
    }

    /// `l × w` rectangle with a `cl × cw` cutout whose lower-left corner is
    /// at (`cx`, `cy`).
    pub fn annular_rectangle() -> Self {
        Self {
            name: "annular_rectangle".into(),
            params: ["l", "w", "cx", "cy", "cl", "cw"].iter().map(|n| ParamSpec::length(n)).collect(),
            generator: Generator::AnnularRectangle,
            interfaces: edges(&["b", "r", "t", "l"]),
        }
    }

    pub fn builtins() -> Vec<ComponentTemplate> {
        vec![
            Self::rectangle(),
            Self::trapezoid(),
            Self::right_triangle(),
            Self::regular_polygon(),
            Self::annular_rectangle(),
        ]
    }

    pub fn builtin(name: &str) -> Option<ComponentTemplate> {
        Self::builtins().into_iter().find(|t| t.name == name)
    }

    /// Builds and checks a custom template.
    pub fn custom(
        name: &str,
        params: Vec<ParamSpec>,
        vertices: Vec<[Expr; 2]>,
        interfaces: Vec<(String, usize)>,
    ) -> Result<Self, DesignError> {
        let err = |m: String| Err(DesignError::Template(format!("template `{name}`: {m}")));
        if vertices.len() < 3 {
            return err("needs at least 3 vertices".into());
        }
        let mut seen = BTreeSet::new();
        for p in &params {
            if !(p.min <= p.max) || !p.min.is_finite() || !p.max.is_finite() {
                return err(format!("bad bounds for `{}`", p.name));
            }
            if !seen.insert(p.name.as_str()) {
                return err(format!("duplicate parameter `{}`", p.name));
            }
        }
        for v in vertices.iter().flatten() {
            for var in v.vars() {
                if !seen.contains(var.as_str()) {
                    return err(format!("vertex expression uses unknown parameter `{var}`"));
                }
            }
        }
        let mut names = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for (n, e) in &interfaces {
            if *e >= vertices.len() {
                return err(format!("interface `{n}` edge {e} out of range"));
            }
            if !names.insert(n.as_str()) || !edges.insert(*e) {
                return err(format!("interface `{n}` is not unique"));
            }
        }
        Ok(Self {
            name: name.to_string(),
            params,
            generator: Generator::Custom(vertices),
            interfaces,
        })
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self.generator, Generator::Custom(_))
    }

    /// Interfaces for a concrete binding.
    pub fn interfaces_for(&self, bindings: &BTreeMap<String, f64>) -> Vec<(String, usize)> {
        match self.generator {
            Generator::RegularPolygon => {
                let n = bindings.get("n").copied().unwrap_or(0.0) as usize;
                (0..n).map(|i| (format!("e{i}"), i)).collect()
            }
            _ => self.interfaces.clone(),
        }
    }

    /// Human-readable interface list.
    pub fn interface_summary(&self) -> Vec<String> {
        match self.generator {
            Generator::RegularPolygon => vec!["e0".into(), "e1".into(), "...".into(), "e{n-1}".into()],
            _ => self.interfaces.iter().map(|(n, _)| n.clone()).collect(),
        }
    }

    /// Checks names and bounds of a binding set.
    pub fn check_bindings(&self, bindings: &BTreeMap<String, f64>) -> Result<(), DesignError> {
        for k in bindings.keys() {
            if !self.params.iter().any(|p| &p.name == k) {
                return Err(DesignError::Binding(format!("template `{}` has no parameter `{k}`", self.name)));
            }
        }
        for p in &self.params {
            let v = *bindings
                .get(&p.name)
                .ok_or_else(|| DesignError::Binding(format!("parameter `{}` is not bound", p.name)))?;
            if !v.is_finite() || v < p.min || v > p.max {
                return Err(DesignError::Binding(format!(
                    "parameter `{}` = {v} outside [{}, {}]",
                    p.name, p.min, p.max
                )));
            }
        }
        if self.generator == Generator::RegularPolygon && bindings["n"].fract() != 0.0 {
            return Err(DesignError::Binding(format!("parameter `n` = {} is not an integer", bindings["n"])));
        }
        Ok(())
    }

    /// Generates the part outline for a binding set.
    pub fn generate(&self, bindings: &BTreeMap<String, f64>) -> Result<Polygon2, DesignError> {
        self.check_bindings(bindings)?;
        let g = |k: &str| bindings[k];
        let p = Pt2::new;
        let poly = match &self.generator {
            Generator::Rectangle => Polygon2::rect(0.0, 0.0, g("l"), g("w")),
            Generator::Trapezoid => {
                let (b, t, h) = (g("b"), g("t"), g("h"));
                Polygon2::new(
                    vec![p(0.0, 0.0), p(b, 0.0), p((b + t) / 2.0, h), p((b - t) / 2.0, h)],
                    vec![],
                )?
            }
            Generator::RightTriangle => Polygon2::new(vec![p(0.0, 0.0), p(g("a"), 0.0), p(0.0, g("b"))], vec![])?,
            Generator::RegularPolygon => {
                let n = g("n") as usize;
                let side = g("side");
                let mut v = vec![p(0.0, 0.0)];
                let (mut x, mut y) = (0.0, 0.0);
                for k in 0..n - 1 {
                    let a = std::f64::consts::TAU * k as f64 / n as f64;
                    x += side * a.cos();
                    y += side * a.sin();
                    v.push(p(x, y));
                }
                Polygon2::new(v, vec![])?
            }
            Generator::AnnularRectangle => {
                let (l, w, cx, cy, cl, cw) = (g("l"), g("w"), g("cx"), g("cy"), g("cl"), g("cw"));
                if cx + cl >= l || cy + cw >= w {
                    return Err(DesignError::Binding(format!(
                        "cutout {cl}x{cw} at ({cx}, {cy}) does not fit inside {l}x{w}"
                    )));
                }
                let hole = vec![p(cx, cy), p(cx, cy + cw), p(cx + cl, cy + cw), p(cx + cl, cy)];
                Polygon2::new(Polygon2::rect(0.0, 0.0, l, w).outer().to_vec(), vec![hole])?
            }
            Generator::Custom(verts) => {
                let look = |k: &str| bindings.get(k).copied();
                let mut v = Vec::with_capacity(verts.len());
                for [ex, ey] in verts {
                    v.push(p(ex.eval(&look)?, ey.eval(&look)?));
                }
                if signed_area(&v) <= 0.0 {
                    return Err(DesignError::Template(format!(
                        "template `{}`: vertices must be counter-clockwise",
                        self.name
                    )));
                }
                Polygon2::new(v, vec![]).map_err(|e| {
                    DesignError::Template(format!("template `{}` produced an invalid outline: {e}", self.name))
                })?
            }
        };
        Ok(poly)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bind(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn rectangle_outline() {
        let p = ComponentTemplate::rectangle().generate(&bind(&[("l", 4.0), ("w", 2.0)])).unwrap();
        assert_eq!(p.outer(), &[Pt2::new(0.0, 0.0), Pt2::new(4.0, 0.0), Pt2::new(4.0, 2.0), Pt2::new(0.0, 2.0)]);
    }

    #[test]
    fn bound_violation() {
        let r = ComponentTemplate::rectangle().generate(&bind(&[("l", -1.0), ("w", 2.0)]));
        assert!(matches!(r, Err(DesignError::Binding(_))));
    }

    #[test]
    fn hexagon_matches_closed_form() {
        let t = ComponentTemplate::regular_polygon();
        let b = bind(&[("n", 6.0), ("side", 10.0)]);
        let p = t.generate(&b).unwrap();
        assert_eq!(p.outer().len(), 6);
        assert_eq!(t.interfaces_for(&b).len(), 6);
        // Circumradius equals the side for a hexagon; centre above the first edge.
        let c = Pt2::new(5.0, 5.0 * 3f64.sqrt());
        for v in p.outer() {
            assert!(((v - c).norm() - 10.0).abs() < 1e-9);
        }
        let o = p.outer();
        for i in 0..6 {
            let a = o[(i + 5) % 6] - o[i];
            let b = o[(i + 1) % 6] - o[i];
            let ang = a.dot(&b) / (a.norm() * b.norm());
            assert!((ang.acos().to_degrees() - 120.0).abs() < 1e-9);
        }
    }

    #[test]
    fn non_integer_side_count() {
        let r = ComponentTemplate::regular_polygon().generate(&bind(&[("n", 5.5), ("side", 10.0)]));
        assert!(matches!(r, Err(DesignError::Binding(_))));
    }

    #[test]
    fn annular_cutout_must_fit() {
        let t = ComponentTemplate::annular_rectangle();
        let ok = bind(&[("l", 10.0), ("w", 10.0), ("cx", 2.0), ("cy", 2.0), ("cl", 6.0), ("cw", 6.0)]);
        assert!((t.generate(&ok).unwrap().area() - 64.0).abs() < 1e-12);
        let bad = bind(&[("l", 10.0), ("w", 10.0), ("cx", 2.0), ("cy", 2.0), ("cl", 8.0), ("cw", 6.0)]);
        assert!(t.generate(&bad).is_err());
    }

    #[test]
    fn custom_clockwise_rejected() {
        use super::super::expr::parse_expression as px;
        let t = ComponentTemplate::custom(
            "cw",
            vec![ParamSpec::new("a", 1.0, 10.0)],
            vec![[px("0").unwrap(), px("0").unwrap()], [px("0").unwrap(), px("a").unwrap()], [px("a").unwrap(), px("0").unwrap()]],
            vec![],
        )
        .unwrap();
        assert!(t.generate(&bind(&[("a", 2.0)])).is_err());
    }
}
