use std::collections::{BTreeMap, BTreeSet};

use super::expr::{parse_expression, Expr};
use super::DesignError;

/// `target = expression`, a directed equality binding one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintExpr {
    pub target: String,
    pub expr: Expr,
}

impl ConstraintExpr {
    pub fn new(target: impl Into<String>, expr: Expr) -> Self {
        Self {
            target: target.into(),
            expr,
        }
    }

    pub fn parse(target: impl Into<String>, text: &str) -> Result<Self, DesignError> {
        Ok(Self::new(target, parse_expression(text)?))
    }
}

/// Topological evaluation order of the constraints (indices), smallest
/// target name first among the ready ones.
pub fn evaluation_order(
    constraints: &[ConstraintExpr],
    known: &dyn Fn(&str) -> bool,
) -> Result<Vec<usize>, DesignError> {
    let mut by_target: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, c) in constraints.iter().enumerate() {
        if by_target.insert(c.target.as_str(), i).is_some() {
            return Err(DesignError::Constraint(format!("`{}` is constrained more than once", c.target)));
        }
    }
    let mut deps: Vec<BTreeSet<usize>> = Vec::with_capacity(constraints.len());
    for c in constraints {
        let mut d = BTreeSet::new();
        for v in c.expr.vars() {
            if let Some(&j) = by_target.get(v.as_str()) {
                d.insert(j);
            } else if !known(&v) {
                return Err(DesignError::UnknownSymbol(v));
            }
        }
        deps.push(d);
    }
    let mut done = vec![false; constraints.len()];
    let mut order = Vec::with_capacity(constraints.len());
    loop {
        let ready = by_target
            .values()
            .copied()
            .find(|&i| !done[i] && deps[i].iter().all(|&j| done[j]));
        match ready {
            Some(i) => {
                done[i] = true;
                order.push(i);
            }
            None => break,
        }
    }
    if order.len() != constraints.len() {
        let stuck: Vec<String> = by_target
            .iter()
            .filter(|(_, &i)| !done[i])
            .map(|(t, _)| t.to_string())
            .collect();
        return Err(DesignError::Cycle(stuck));
    }
    Ok(order)
}

/// Evaluates every constraint over the free bindings and returns the full
/// binding map. A constraint target overrides any free value of that name.
pub fn evaluate_constraints(
    constraints: &[ConstraintExpr],
    free: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>, DesignError> {
    let order = evaluation_order(constraints, &|v| free.contains_key(v))?;
    let mut out = free.clone();
    for i in order {
        let c = &constraints[i];
        let v = c.expr.eval(&|name| out.get(name).copied())?;
        out.insert(c.target.clone(), v);
    }
    Ok(out)
}
