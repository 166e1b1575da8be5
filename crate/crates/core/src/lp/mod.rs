//! Exact linear programming.
//!
//! [`SimplexSolver`] is the bundled reference implementation. Callers that want
//! a different engine implement [`LpSolver`]; integral solves come for free via
//! the default [`LpSolver::solve_integral`], which runs best-first
//! branch-and-bound on top of [`LpSolver::solve_lp`].

mod branch;
mod model;
mod rational;
mod simplex;

pub use model::{Constraint, LinearProgram, Relation, VarId, Variable};
pub use rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub objective: Rational,
    /// One value per variable, indexed by [`VarId`].
    pub values: Vec<Rational>,
}

impl Solution {
    pub fn value(&self, v: VarId) -> &Rational {
        &self.values[v.0]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Optimal(Solution),
    Infeasible,
    Unbounded,
}

impl SolveOutcome {
    pub fn optimal(self) -> Option<Solution> {
        match self {
            SolveOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            SolveOutcome::Optimal(_) => "optimal",
            SolveOutcome::Infeasible => "infeasible",
            SolveOutcome::Unbounded => "unbounded",
        }
    }
}

pub trait LpSolver: Send + Sync {
    /// Exact optimum of the continuous relaxation (integrality flags ignored).
    fn solve_lp(&self, lp: &LinearProgram) -> SolveOutcome;

    /// Exact optimum with every variable flagged `integral` taking an integer value.
    fn solve_integral(&self, lp: &LinearProgram) -> SolveOutcome {
        branch::solve_integral(lp, |model| self.solve_lp(model))
    }
}

#[derive(Copy, Clone, Debug, Default)]
pub struct SimplexSolver;

impl LpSolver for SimplexSolver {
    fn solve_lp(&self, lp: &LinearProgram) -> SolveOutcome {
        simplex::solve(lp)
    }
}

pub fn solve_lp(lp: &LinearProgram) -> SolveOutcome {
    SimplexSolver.solve_lp(lp)
}

pub fn solve_integral(lp: &LinearProgram) -> SolveOutcome {
    SimplexSolver.solve_integral(lp)
}
