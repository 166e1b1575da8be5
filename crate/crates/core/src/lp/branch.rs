//! Branch-and-bound for integrality.
//!
//! Open nodes are explored best-bound first. When the objective is integral on
//! every integral point (integer coefficients on integral variables only), the
//! bound is rounded up, which makes many nodes tie; ties are broken deepest
//! first so the search dives toward an incumbent, and any node whose rounded
//! bound reaches the incumbent is dropped.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::{LinearProgram, Rational, Solution, SolveOutcome, VarId};

struct Open {
    bound: Rational,
    depth: usize,
    seq: usize,
    lp: LinearProgram,
    relaxed: Solution,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Open {}
impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.bound, Reverse(self.depth), self.seq).cmp(&(&other.bound, Reverse(other.depth), other.seq))
    }
}

/// Picks the integral variable whose fractional part is closest to one half,
/// lowest index first among equals.
fn most_fractional(lp: &LinearProgram, s: &Solution) -> Option<VarId> {
    let half = Rational::new(1, 2);
    lp.integral_vars().filter(|v| !s.values[v.0].is_integer()).min_by(|a, b| {
        let da = (&s.values[a.0].fract() - &half).abs();
        let db = (&s.values[b.0].fract() - &half).abs();
        da.cmp(&db).then(a.cmp(b))
    })
}

fn is_integral(lp: &LinearProgram, s: &Solution) -> bool {
    lp.integral_vars().all(|v| s.values[v.0].is_integer())
}

fn integral_objective(lp: &LinearProgram) -> bool {
    lp.objective.iter().all(|(v, c)| c.is_zero() || (c.is_integer() && lp.variables[v.0].integral))
}

pub(super) fn solve_integral(lp: &LinearProgram, solve_lp: impl Fn(&LinearProgram) -> SolveOutcome) -> SolveOutcome {
    let root = match solve_lp(lp) {
        SolveOutcome::Optimal(s) => s,
        other => return other,
    };
    let round = integral_objective(lp);
    let key = |s: &Solution| if round { s.objective.ceil() } else { s.objective.clone() };

    let mut incumbent: Option<Solution> = None;
    let mut seq = 0;
    let mut open = BinaryHeap::new();
    open.push(Reverse(Open { bound: key(&root), depth: 0, seq, lp: lp.clone(), relaxed: root }));

    while let Some(Reverse(node)) = open.pop() {
        if incumbent.as_ref().is_some_and(|inc| node.bound >= inc.objective) {
            break;
        }
        let Some(var) = most_fractional(&node.lp, &node.relaxed) else {
            // Popped in bound order, so nothing left can do better.
            return SolveOutcome::Optimal(node.relaxed);
        };
        let value = &node.relaxed.values[var.0];
        let mut down = node.lp.clone();
        down.variables[var.0].upper = Some(value.floor());
        let mut up = node.lp;
        up.variables[var.0].lower = value.ceil();
        for child in [down, up] {
            let SolveOutcome::Optimal(s) = solve_lp(&child) else { continue };
            let bound = key(&s);
            if incumbent.as_ref().is_some_and(|inc| bound >= inc.objective) {
                continue;
            }
            if is_integral(&child, &s) {
                incumbent = Some(s);
                continue;
            }
            seq += 1;
            open.push(Reverse(Open { bound, depth: node.depth + 1, seq, lp: child, relaxed: s }));
        }
    }
    match incumbent {
        Some(s) => SolveOutcome::Optimal(s),
        None => SolveOutcome::Infeasible,
    }
}
