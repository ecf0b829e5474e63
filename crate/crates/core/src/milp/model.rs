use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    /// `f64::INFINITY` for no upper bound.
    pub upper: f64,
    pub integer: bool,
    pub objective: f64,
}

impl Variable {
    pub fn is_binary(&self) -> bool {
        self.integer && self.lower == 0.0 && self.upper == 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// `(variable index, coefficient)` with distinct indices.
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A minimization MILP with named columns and rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub name: String,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModelStats {
    pub variables: usize,
    pub integer_variables: usize,
    pub constraints: usize,
    pub nonzeros: usize,
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: sanitize_name(&name.into()),
            ..Self::default()
        }
    }

    pub fn add_variable(&mut self, name: &str, lower: f64, upper: f64, integer: bool, objective: f64) -> usize {
        self.variables.push(Variable {
            name: sanitize_name(name),
            lower,
            upper,
            integer,
            objective,
        });
        self.variables.len() - 1
    }

    pub fn add_binary(&mut self, name: &str, objective: f64) -> usize {
        self.add_variable(name, 0.0, 1.0, true, objective)
    }

    pub fn add_constraint(&mut self, name: &str, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.constraints.push(Constraint {
            name: sanitize_name(name),
            terms,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn stats(&self) -> ModelStats {
        ModelStats {
            variables: self.variables.len(),
            integer_variables: self.variables.iter().filter(|v| v.integer).count(),
            constraints: self.constraints.len(),
            nonzeros: self.constraints.iter().map(|c| c.terms.len()).sum(),
        }
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// True when every feasible point has an integer objective: only
    /// integer variables with integer coefficients appear in it.
    pub fn has_integral_objective(&self) -> bool {
        self.variables
            .iter()
            .all(|v| v.objective == 0.0 || (v.integer && v.objective == v.objective.trunc()))
    }

    /// Objective value of a full assignment, `values[i]` for variable `i`.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.variables.iter().zip(values).map(|(v, x)| v.objective * x).sum()
    }

    /// Names of the rows and bounds violated by `values` beyond `tol`, and
    /// integrality breaks.
    pub fn violations(&self, values: &[f64], tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (v, &x) in self.variables.iter().zip(values) {
            if x < v.lower - tol || x > v.upper + tol {
                out.push(format!("bound {}", v.name));
            }
            if v.integer && (x - x.round()).abs() > tol {
                out.push(format!("integrality {}", v.name));
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(i, a)| a * values[i]).sum();
            let ok = match c.relation {
                Relation::Le => lhs <= c.rhs + tol,
                Relation::Ge => lhs >= c.rhs - tol,
                Relation::Eq => (lhs - c.rhs).abs() <= tol,
            };
            if !ok {
                out.push(format!("row {}", c.name));
            }
        }
        out
    }

    /// Assignment from `(name, value)` pairs; unnamed variables get 0.
    pub fn assignment(&self, named: &HashMap<String, f64>) -> Vec<f64> {
        self.variables
            .iter()
            .map(|v| named.get(&v.name).copied().unwrap_or(0.0))
            .collect()
    }
}

/// Same model with every integrality flag cleared.
pub fn lp_relaxation(model: &MilpModel) -> MilpModel {
    let mut relaxed = model.clone();
    relaxed.name = sanitize_name(&format!("{}_lp", model.name));
    for v in &mut relaxed.variables {
        v.integer = false;
    }
    relaxed
}

pub const MAX_NAME_LEN: usize = 255;

/// Maps a name onto `[A-Za-z0-9_]`, at most 255 characters, never empty
/// and never starting with a digit.
pub fn sanitize_name(raw: &str) -> String {
    let mut out: String = raw
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    out.truncate(MAX_NAME_LEN);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_sanitized() {
        assert_eq!(sanitize_name("x[1,2]"), "x_1_2_");
        assert_eq!(sanitize_name("3abc"), "_3abc");
        assert_eq!(sanitize_name(""), "_");
        assert_eq!(sanitize_name(&"a".repeat(300)).len(), 255);
    }

    #[test]
    fn relaxation_keeps_bounds_and_drops_integrality() {
        let mut m = MilpModel::new("m");
        m.add_binary("y", 1.0);
        m.add_variable("c", 0.0, 4.0, false, 0.0);
        let lp = lp_relaxation(&m);
        assert!(lp.variables.iter().all(|v| !v.integer));
        assert_eq!(lp.variables[0].upper, 1.0);
        assert_eq!(lp.stats().integer_variables, 0);
        assert_eq!(m.stats().integer_variables, 1);
    }

    #[test]
    fn violations_and_objective() {
        let mut m = MilpModel::new("m");
        let x = m.add_binary("x", 3.0);
        let y = m.add_variable("y", 0.0, f64::INFINITY, true, 1.0);
        m.add_constraint("cover", vec![(x, 1.0), (y, 1.0)], Relation::Ge, 2.0);
        assert!(m.violations(&[1.0, 1.0], 1e-9).is_empty());
        assert_eq!(m.objective_value(&[1.0, 1.0]), 4.0);
        assert_eq!(m.violations(&[1.0, 0.5], 1e-9), vec!["integrality y", "row cover"]);
        assert!(m.has_integral_objective());
        m.add_variable("c", 0.0, 4.0, false, 0.5);
        assert!(!m.has_integral_objective());
    }
}
