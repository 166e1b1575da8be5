//! Two-phase primal simplex on a dense tableau with implicit variable bounds.
//!
//! Every column carries an optional upper bound. A nonbasic column always sits
//! at zero; when a variable has to move to its upper bound the column is
//! complemented (`x = u - x'`) instead. Entering columns follow Dantzig's rule
//! until a run of degenerate pivots is seen, after which the solver switches
//! permanently to Bland's rule, which cannot cycle.

use super::model::{LinearProgram, Relation};
use super::{Rational, Solution, SolveOutcome};

const DEGENERATE_RUN_BEFORE_BLAND: usize = 32;

#[derive(Copy, Clone, PartialEq, Eq)]
enum ColumnKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    upper: Vec<Option<Rational>>,
    flipped: Vec<bool>,
    kind: Vec<ColumnKind>,
    cost: Vec<Rational>,
    reduced: Vec<Rational>,
    is_basic: Vec<bool>,
    bland: bool,
    degenerate_run: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Continue,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.kind.len()
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.rows[r][j].clone();
        let nz: Vec<usize> = (0..self.ncols()).filter(|&c| !self.rows[r][c].is_zero()).collect();
        if p != Rational::ONE {
            for &c in &nz {
                self.rows[r][c] = &self.rows[r][c] / &p;
            }
            self.rhs[r] = &self.rhs[r] / &p;
        }
        let (pivot_row, pivot_rhs) = (self.rows[r].clone(), self.rhs[r].clone());
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][j].is_zero() {
                continue;
            }
            let f = self.rows[i][j].clone();
            let row = &mut self.rows[i];
            for &c in &nz {
                row[c] = &row[c] - &(&f * &pivot_row[c]);
            }
            if !pivot_rhs.is_zero() {
                self.rhs[i] = &self.rhs[i] - &(&f * &pivot_rhs);
            }
        }
        if !self.reduced[j].is_zero() {
            let f = self.reduced[j].clone();
            for &c in &nz {
                self.reduced[c] = &self.reduced[c] - &(&f * &pivot_row[c]);
            }
        }
        self.is_basic[self.basis[r]] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
    }

    /// Complements a nonbasic column that has a finite upper bound.
    fn flip(&mut self, j: usize) {
        let u = self.upper[j].clone().expect("flip requires an upper bound");
        for i in 0..self.rows.len() {
            if self.rows[i][j].is_zero() {
                continue;
            }
            if !u.is_zero() {
                self.rhs[i] = &self.rhs[i] - &(&self.rows[i][j] * &u);
            }
            self.rows[i][j] = -&self.rows[i][j];
        }
        self.reduced[j] = -&self.reduced[j];
        self.cost[j] = -&self.cost[j];
        self.flipped[j] = !self.flipped[j];
    }

    fn recompute_reduced_costs(&mut self) {
        let mut reduced = self.cost.clone();
        for (r, row) in self.rows.iter().enumerate() {
            let cb = &self.cost[self.basis[r]];
            if cb.is_zero() {
                continue;
            }
            for (c, a) in row.iter().enumerate() {
                if !a.is_zero() {
                    reduced[c] = &reduced[c] - &(cb * a);
                }
            }
        }
        self.reduced = reduced;
    }

    fn choose_entering(&self) -> Option<usize> {
        let candidates = (0..self.ncols()).filter(|&j| {
            !self.is_basic[j]
                && self.kind[j] != ColumnKind::Artificial
                && self.upper[j].as_ref().is_none_or(|u| !u.is_zero())
                && self.reduced[j].is_negative()
        });
        if self.bland {
            candidates.min()
        } else {
            // Most negative reduced cost, lowest index on ties.
            candidates.fold(None, |best: Option<usize>, j| match best {
                Some(b) if self.reduced[b] <= self.reduced[j] => Some(b),
                _ => Some(j),
            })
        }
    }

    fn step(&mut self) -> Step {
        let Some(j) = self.choose_entering() else {
            return Step::Optimal;
        };

        // (step length, leaving row or None for a bound flip, leaving goes to upper)
        let mut best: Option<(Rational, Option<usize>, bool)> = self.upper[j].clone().map(|u| (u, None, false));
        for r in 0..self.rows.len() {
            let a = &self.rows[r][j];
            let candidate = if a.is_positive() {
                Some((&self.rhs[r] / a, false))
            } else if a.is_negative() {
                self.upper[self.basis[r]].as_ref().map(|u| (&(u - &self.rhs[r]) / &(-a), true))
            } else {
                None
            };
            let Some((t, to_upper)) = candidate else { continue };
            let better = match &best {
                None => true,
                Some((bt, None, _)) => t < *bt,
                Some((bt, Some(br), _)) => t < *bt || (t == *bt && self.basis[r] < self.basis[*br]),
            };
            if better {
                best = Some((t, Some(r), to_upper));
            }
        }

        let Some((t, leaving, to_upper)) = best else {
            return Step::Unbounded;
        };
        if t.is_zero() {
            self.degenerate_run += 1;
            if self.degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
        }
        match leaving {
            None => self.flip(j),
            Some(r) => {
                let leaving_col = self.basis[r];
                self.pivot(r, j);
                if to_upper {
                    self.flip(leaving_col);
                }
            }
        }
        Step::Continue
    }

    fn run(&mut self) -> Step {
        loop {
            match self.step() {
                Step::Continue => continue,
                done => return done,
            }
        }
    }

    fn column_value(&self, j: usize) -> Rational {
        let raw = if self.is_basic[j] {
            let r = self.basis.iter().position(|&b| b == j).expect("basic column has a row");
            self.rhs[r].clone()
        } else {
            Rational::ZERO
        };
        if self.flipped[j] {
            self.upper[j].as_ref().expect("flipped column is bounded") - &raw
        } else {
            raw
        }
    }
}

/// Solves the continuous relaxation of `lp` exactly.
pub fn solve(lp: &LinearProgram) -> SolveOutcome {
    let nv = lp.variables.len();
    let m = lp.constraints.len();

    // Shift every variable to a zero lower bound.
    let mut upper = Vec::with_capacity(nv);
    for v in &lp.variables {
        match &v.upper {
            Some(u) if *u < v.lower => return SolveOutcome::Infeasible,
            Some(u) => upper.push(Some(u - &v.lower)),
            None => upper.push(None),
        }
    }

    let slack_count = lp.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
    let width = nv + slack_count + m;
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut kind = vec![ColumnKind::Structural; nv];
    kind.extend(std::iter::repeat_n(ColumnKind::Slack, slack_count));
    upper.extend(std::iter::repeat_n(None, slack_count));

    let mut basis = Vec::with_capacity(m);
    let mut next_slack = nv;
    let mut artificials = Vec::new();
    for c in &lp.constraints {
        let mut row = vec![Rational::ZERO; width];
        let mut b = c.rhs.clone();
        for (v, a) in &c.terms {
            row[v.0] = &row[v.0] + a;
            b = &b - &(a * &lp.variables[v.0].lower);
        }
        let slack = match c.relation {
            Relation::Le => Some((next_slack, Rational::ONE)),
            Relation::Ge => Some((next_slack, -Rational::ONE)),
            Relation::Eq => None,
        };
        if let Some((s, coef)) = &slack {
            row[*s] = coef.clone();
            next_slack += 1;
        }
        if b.is_negative() {
            for a in row.iter_mut().filter(|a| !a.is_zero()) {
                *a = -&*a;
            }
            b = -b;
        }
        match slack {
            Some((s, _)) if row[s] == Rational::ONE => basis.push(s),
            _ => {
                artificials.push(rows.len());
                basis.push(usize::MAX);
            }
        }
        rows.push(row);
        rhs.push(b);
    }
    // Artificial columns occupy the tail; unused ones stay empty.
    let first_artificial = nv + slack_count;
    for (k, &r) in artificials.iter().enumerate() {
        rows[r][first_artificial + k] = Rational::ONE;
        basis[r] = first_artificial + k;
    }
    let width = first_artificial + artificials.len();
    for row in &mut rows {
        row.truncate(width);
    }
    kind.extend(std::iter::repeat_n(ColumnKind::Artificial, artificials.len()));
    upper.extend(std::iter::repeat_n(None, artificials.len()));

    let mut is_basic = vec![false; width];
    for &b in &basis {
        is_basic[b] = true;
    }
    let mut tableau = Tableau {
        rows,
        rhs,
        basis,
        upper,
        flipped: vec![false; width],
        cost: kind.iter().map(|k| if *k == ColumnKind::Artificial { Rational::ONE } else { Rational::ZERO }).collect(),
        reduced: Vec::new(),
        kind,
        is_basic,
        bland: false,
        degenerate_run: 0,
    };

    if !artificials.is_empty() {
        tableau.recompute_reduced_costs();
        tableau.run();
        let infeasibility: Rational = (0..m)
            .filter(|&r| tableau.kind[tableau.basis[r]] == ColumnKind::Artificial)
            .map(|r| tableau.rhs[r].clone())
            .sum();
        if infeasibility.is_positive() {
            return SolveOutcome::Infeasible;
        }
        // Drive zero-valued artificials out where the row allows it; rows with
        // no eligible entry are redundant and never change again.
        for r in 0..m {
            if tableau.kind[tableau.basis[r]] != ColumnKind::Artificial {
                continue;
            }
            if let Some(j) = (0..width).find(|&j| {
                tableau.kind[j] != ColumnKind::Artificial && !tableau.is_basic[j] && !tableau.rows[r][j].is_zero()
            }) {
                tableau.pivot(r, j);
            }
        }
    }

    tableau.cost = vec![Rational::ZERO; width];
    for (v, c) in &lp.objective {
        tableau.cost[v.0] = &tableau.cost[v.0] + c;
    }
    for j in 0..width {
        if tableau.flipped[j] {
            tableau.cost[j] = -&tableau.cost[j];
        }
    }
    tableau.recompute_reduced_costs();
    tableau.bland = false;
    tableau.degenerate_run = 0;
    if let Step::Unbounded = tableau.run() {
        return SolveOutcome::Unbounded;
    }

    let values: Vec<Rational> = (0..nv).map(|j| &lp.variables[j].lower + &tableau.column_value(j)).collect();
    let objective = lp.objective_value(&values);
    debug_assert!(lp.is_feasible(&values), "simplex returned an infeasible point");
    SolveOutcome::Optimal(Solution { objective, values })
}
