//! The programs giving the least manipulation that realises a given
//! elimination order in the reduced election.
//!
//! Variables are indexed by equivalence class `S` relative to `π`:
//!
//! - `q_S` ballots added to `S`,
//! - `m_S` ballots removed from `S` (at most `n_S`),
//! - `y_S = n_S + q_S - m_S` the resulting count.
//!
//! For every pair of positions `i < j` in `π`, the ballots counting toward
//! `π[i]` in round `i` must not exceed those counting toward `π[j]`, so that
//! `π[i]` can be eliminated there (ties go to the adversary).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::election::Election;
use crate::equivalence::{class_counts, ClassTable, EliminationOrder, EquivalenceClass, OrderError};
use crate::lp::{LinearProgram, LpSolver, Rational, Relation, Solution, SolveOutcome, VarId};

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Ballots are rewritten; the total is preserved.
    #[default]
    Modify,
    /// Ballots may only be added.
    Add,
    /// Ballots may only be deleted.
    Delete,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Modify, Mode::Add, Mode::Delete];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Modify => "modify",
            Mode::Add => "add",
            Mode::Delete => "delete",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "modify" => Ok(Mode::Modify),
            "add" => Ok(Mode::Add),
            "delete" => Ok(Mode::Delete),
            other => Err(format!("unknown mode {other:?}; expected modify, add or delete")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistanceError {
    #[error("distance programs need an order of at least two candidates, got {0}")]
    OrderTooShort(usize),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("distance program is {0}; this indicates a model construction bug")]
    Solver(&'static str),
}

/// A built program together with the variable layout.
///
/// `program` states every constraint literally, with explicit `y` variables.
/// `reduced` is the equivalent program that is actually solved: each `y_S` is
/// replaced by `n_S + q_S - m_S`, which drops the balance rows, and `m_S` is
/// dropped where `n_S = 0`. The bounds on `y` are implied there: in modify
/// mode the `y` sum to the original total and are nonnegative, and in delete
/// mode `y_S ≤ n_S`.
#[derive(Clone, Debug)]
pub struct DistanceModel {
    pub mode: Mode,
    pub program: LinearProgram,
    pub table: ClassTable,
    /// Indexed by class mask.
    pub q: Vec<Option<VarId>>,
    pub m: Vec<Option<VarId>>,
    pub y: Vec<VarId>,
    pub reduced: LinearProgram,
    reduced_q: Vec<Option<VarId>>,
    reduced_m: Vec<Option<VarId>>,
}

impl DistanceModel {
    /// Number of special elimination constraints (one per pair `i < j`).
    pub fn elimination_constraints(&self) -> usize {
        self.program.constraints.iter().filter(|c| c.name.starts_with("elim")).count()
    }

    /// The post-manipulation class counts of a solution to `reduced`.
    pub fn profile(&self, s: &Solution) -> Vec<Rational> {
        self.table
            .classes()
            .map(|class| {
                let i = class.0 as usize;
                let mut y = Rational::integer(self.table.count(class) as i64);
                if let Some(v) = self.reduced_q[i] {
                    y = &y + s.value(v);
                }
                if let Some(v) = self.reduced_m[i] {
                    y = &y - s.value(v);
                }
                y
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceResult {
    /// `⌈lp_optimum⌉` for a bound, or the integral optimum when exact.
    pub value: u64,
    /// Optimum of the continuous relaxation, as a reduced fraction string.
    pub lp_optimum: String,
    /// Whether the relaxation was already integral.
    pub integral: bool,
}

fn class_label(e: &Election, pi: &EliminationOrder, class: EquivalenceClass) -> String {
    let names: Vec<&str> = class.rep(pi).prefs().iter().map(|&c| e.name(c)).collect();
    names.join(",")
}

pub fn build_distance_lp(
    pi: &EliminationOrder,
    e: &Election,
    mode: Mode,
    class_cap: usize,
) -> Result<DistanceModel, DistanceError> {
    let k = pi.len();
    if k < 2 {
        return Err(DistanceError::OrderTooShort(k));
    }
    let table = class_counts(e, pi, class_cap)?;
    let total = Rational::integer(e.total_ballots() as i64);
    let one = Rational::ONE;
    let mut lp = LinearProgram::new();
    let mut q = Vec::with_capacity(table.counts.len());
    let mut m = Vec::with_capacity(table.counts.len());
    let mut y = Vec::with_capacity(table.counts.len());

    for class in table.classes() {
        let n = table.count(class);
        let label = class_label(e, pi, class);
        let n_r = Rational::integer(n as i64);
        let qv = matches!(mode, Mode::Modify | Mode::Add)
            .then(|| lp.add_var(format!("q[{label}]"), Rational::ZERO, None, true));
        let mv = match mode {
            Mode::Modify => Some(lp.add_var(format!("m[{label}]"), Rational::ZERO, Some(n_r.clone()), true)),
            Mode::Delete if n > 0 => Some(lp.add_var(format!("m[{label}]"), Rational::ZERO, Some(n_r.clone()), true)),
            _ => None,
        };
        let y_upper = match mode {
            // Added ballots may push a class beyond the original total.
            Mode::Add => None,
            Mode::Delete if n == 0 => Some(Rational::ZERO),
            _ => Some(total.clone()),
        };
        // Integral whenever q and m are, through the balance row.
        let yv = lp.add_var(format!("y[{label}]"), Rational::ZERO, y_upper, false);

        // y - q + m = n
        if !(mode == Mode::Delete && n == 0) {
            let mut terms = vec![(yv, one.clone())];
            if let Some(v) = qv {
                terms.push((v, -&one));
            }
            if let Some(v) = mv {
                terms.push((v, one.clone()));
            }
            lp.add_constraint(format!("bal[{label}]"), terms, Relation::Eq, n_r);
        }
        q.push(qv);
        m.push(mv);
        y.push(yv);
    }

    if mode == Mode::Modify {
        let mut terms: Vec<(VarId, Rational)> = q.iter().flatten().map(|&v| (v, one.clone())).collect();
        terms.extend(m.iter().flatten().map(|&v| (v, -&one)));
        lp.add_constraint("same_total", terms, Relation::Eq, Rational::ZERO);
    }

    // Bucket classes by recipient per round, then emit one row per pair.
    for i in 0..k - 1 {
        let mut by_recipient: Vec<Vec<VarId>> = vec![Vec::new(); k];
        for class in table.classes() {
            if let Some(r) = class.recipient(i) {
                by_recipient[r].push(y[class.0 as usize]);
            }
        }
        for j in i + 1..k {
            let mut terms: Vec<(VarId, Rational)> = by_recipient[i].iter().map(|&v| (v, one.clone())).collect();
            terms.extend(by_recipient[j].iter().map(|&v| (v, -&one)));
            lp.add_constraint(
                format!("elim[{},{}]", e.name(pi.candidates()[i]), e.name(pi.candidates()[j])),
                terms,
                Relation::Le,
                Rational::ZERO,
            );
        }
    }

    let objective = match mode {
        Mode::Modify | Mode::Add => q.iter().flatten().map(|&v| (v, one.clone())).collect(),
        Mode::Delete => m.iter().flatten().map(|&v| (v, one.clone())).collect(),
    };
    lp.set_objective(objective);
    let (reduced, reduced_q, reduced_m) = reduce(e, pi, &table, mode);
    Ok(DistanceModel { mode, program: lp, table, q, m, y, reduced, reduced_q, reduced_m })
}

type Layout = Vec<Option<VarId>>;

fn reduce(e: &Election, pi: &EliminationOrder, table: &ClassTable, mode: Mode) -> (LinearProgram, Layout, Layout) {
    let k = pi.len();
    let one = Rational::ONE;
    let mut lp = LinearProgram::new();
    let mut q = Vec::with_capacity(table.counts.len());
    let mut m = Vec::with_capacity(table.counts.len());
    for class in table.classes() {
        let n = table.count(class);
        let label = class_label(e, pi, class);
        q.push(
            matches!(mode, Mode::Modify | Mode::Add)
                .then(|| lp.add_var(format!("q[{label}]"), Rational::ZERO, None, true)),
        );
        m.push(
            (mode != Mode::Add && n > 0)
                .then(|| lp.add_var(format!("m[{label}]"), Rational::ZERO, Some(Rational::integer(n as i64)), true)),
        );
    }
    if mode == Mode::Modify {
        let mut terms: Vec<(VarId, Rational)> = q.iter().flatten().map(|&v| (v, one.clone())).collect();
        terms.extend(m.iter().flatten().map(|&v| (v, -&one)));
        lp.add_constraint("same_total", terms, Relation::Eq, Rational::ZERO);
    }
    for i in 0..k - 1 {
        // Per recipient: (q terms, m terms, original count).
        let mut by_recipient: Vec<(Vec<VarId>, Vec<VarId>, i64)> = vec![(Vec::new(), Vec::new(), 0); k];
        for class in table.classes() {
            if let Some(r) = class.recipient(i) {
                let slot = &mut by_recipient[r];
                slot.0.extend(q[class.0 as usize]);
                slot.1.extend(m[class.0 as usize]);
                slot.2 += table.count(class) as i64;
            }
        }
        for j in i + 1..k {
            let (qi, mi, ni) = &by_recipient[i];
            let (qj, mj, nj) = &by_recipient[j];
            let mut terms: Vec<(VarId, Rational)> = Vec::new();
            terms.extend(qi.iter().map(|&v| (v, one.clone())));
            terms.extend(mi.iter().map(|&v| (v, -&one)));
            terms.extend(qj.iter().map(|&v| (v, -&one)));
            terms.extend(mj.iter().map(|&v| (v, one.clone())));
            lp.add_constraint(
                format!("elim[{},{}]", e.name(pi.candidates()[i]), e.name(pi.candidates()[j])),
                terms,
                Relation::Le,
                Rational::integer(nj - ni),
            );
        }
    }
    let objective = match mode {
        Mode::Modify | Mode::Add => q.iter().flatten().map(|&v| (v, one.clone())).collect(),
        Mode::Delete => m.iter().flatten().map(|&v| (v, one.clone())).collect(),
    };
    lp.set_objective(objective);
    (lp, q, m)
}

/// Solves a built model's reduced program; `exact` requests the integral optimum.
pub fn solve_distance(
    model: &DistanceModel,
    exact: bool,
    solver: &dyn LpSolver,
) -> Result<(DistanceResult, Solution), DistanceError> {
    let relaxed = match solver.solve_lp(&model.reduced) {
        SolveOutcome::Optimal(s) => s,
        other => return Err(DistanceError::Solver(other.status())),
    };
    let lp_optimum = relaxed.objective.clone();
    let integral = relaxed.values.iter().all(Rational::is_integer);
    let (value, solution) = if !exact {
        (lp_optimum.ceil(), relaxed)
    } else if integral {
        (lp_optimum.clone(), relaxed)
    } else {
        match solver.solve_integral(&model.reduced) {
            SolveOutcome::Optimal(s) => (s.objective.clone(), s),
            other => return Err(DistanceError::Solver(other.status())),
        }
    };
    let value = value.to_i64().expect("distance is an integer") as u64;
    Ok((DistanceResult { value, lp_optimum: lp_optimum.to_string(), integral }, solution))
}

/// Least manipulation realising `pi` in the reduced election.
pub fn distance_to(
    pi: &EliminationOrder,
    e: &Election,
    mode: Mode,
    exact: bool,
    solver: &dyn LpSolver,
) -> Result<DistanceResult, DistanceError> {
    let model = build_distance_lp(pi, e, mode, crate::equivalence::DEFAULT_CLASS_CAP)?;
    Ok(solve_distance(&model, exact, solver)?.0)
}
