use std::fmt::Write as _;

use super::Rational;

/// Index of a variable within a [`LinearProgram`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub lower: Rational,
    /// `None` means unbounded above.
    pub upper: Option<Rational>,
    pub integral: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// A minimisation problem over bounded variables with linear constraints.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearProgram {
    pub variables: Vec<Variable>,
    pub objective: Vec<(VarId, Rational)>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: Rational,
        upper: Option<Rational>,
        integral: bool,
    ) -> VarId {
        self.variables.push(Variable { name: name.into(), lower, upper, integral });
        VarId(self.variables.len() - 1)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) {
        self.constraints.push(Constraint { name: name.into(), terms, relation, rhs });
    }

    pub fn set_objective(&mut self, terms: Vec<(VarId, Rational)>) {
        self.objective = terms;
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn integral_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.variables.iter().enumerate().filter(|(_, v)| v.integral).map(|(i, _)| VarId(i))
    }

    pub fn objective_value(&self, assignment: &[Rational]) -> Rational {
        self.objective.iter().map(|(v, c)| c * &assignment[v.0]).sum()
    }

    /// Checks bounds and constraints exactly.
    pub fn is_feasible(&self, assignment: &[Rational]) -> bool {
        if assignment.len() != self.variables.len() {
            return false;
        }
        let bounds_ok = self
            .variables
            .iter()
            .zip(assignment)
            .all(|(v, x)| *x >= v.lower && v.upper.as_ref().is_none_or(|u| x <= u));
        bounds_ok
            && self.constraints.iter().all(|c| {
                let lhs: Rational = c.terms.iter().map(|(v, a)| a * &assignment[v.0]).sum();
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                }
            })
    }

    /// Renders the model in CPLEX LP text format.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::from("Minimize\n obj:");
        write_terms(&mut out, &self.objective, &self.variables);
        out.push_str("\nSubject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let name = if c.name.is_empty() { format!("c{i}") } else { lp_name(&c.name) };
            let _ = write!(out, " {name}:");
            write_terms(&mut out, &c.terms, &self.variables);
            let op = match c.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let _ = writeln!(out, " {op} {}", lp_number(&c.rhs));
        }
        out.push_str("Bounds\n");
        for v in &self.variables {
            let name = lp_name(&v.name);
            match &v.upper {
                Some(u) => {
                    let _ = writeln!(out, " {} <= {name} <= {}", lp_number(&v.lower), lp_number(u));
                }
                None => {
                    let _ = writeln!(out, " {name} >= {}", lp_number(&v.lower));
                }
            }
        }
        let ints: Vec<_> = self.variables.iter().filter(|v| v.integral).map(|v| lp_name(&v.name)).collect();
        if !ints.is_empty() {
            out.push_str("General\n");
            for chunk in ints.chunks(8) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
        out.push_str("End\n");
        out
    }
}

fn write_terms(out: &mut String, terms: &[(VarId, Rational)], vars: &[Variable]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (v, c) in terms {
        let sign = if c.is_negative() { '-' } else { '+' };
        let abs = c.abs();
        let name = lp_name(&vars[v.0].name);
        if abs == Rational::ONE {
            let _ = write!(out, " {sign} {name}");
        } else {
            let _ = write!(out, " {sign} {} {name}", lp_number(&abs));
        }
    }
}

// The LP format has no rationals; non-integers are written as decimals.
fn lp_number(r: &Rational) -> String {
    if r.is_integer() {
        r.to_string()
    } else {
        format!("{}", r.to_f64())
    }
}

fn lp_name(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || "_.".contains(c) { c } else { '_' }).collect()
}
