//! Closed-form lower bounds used to score partial elimination orders.
//!
//! If `x` is eliminated while `c` is still standing, `x`'s tally at that point
//! is at least its primary vote `f(x)`, while `c` holds at most `Δ(c, x)`
//! ballots (or `Δ_S(c, x)` when `S` is known to be standing). Closing a gap of
//! `g` takes `⌈g/2⌉` modified ballots, or `g` added or deleted ones.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::distance::Mode;
use crate::election::{CandidateIndex, CandidateSet, Election};

/// Which bound scores nodes during search.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Pairwise: `Δ(c, x)` over the pair alone.
    Lb1,
    /// Uses the standing set `π ∪ {x}`; never weaker than `Lb1`.
    #[default]
    Lb2,
}

impl std::str::FromStr for BoundKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lb1" => Ok(BoundKind::Lb1),
            "lb2" => Ok(BoundKind::Lb2),
            other => Err(format!("unknown bound {other:?}; expected lb1 or lb2")),
        }
    }
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundKind::Lb1 => "lb1",
            BoundKind::Lb2 => "lb2",
        })
    }
}

/// Ballots needed to close a tally gap of `f_x - held`.
fn gap(f_x: u64, held: u64, halve: bool) -> u64 {
    let d = f_x.saturating_sub(held);
    if halve {
        d.div_ceil(2)
    } else {
        d
    }
}

pub fn l1(e: &Election, c: CandidateIndex, x: CandidateIndex) -> u64 {
    gap(e.primary_vote(x), e.delta(c, x).expect("c != x"), true)
}

pub fn l1_plus(e: &Election, c: CandidateIndex, x: CandidateIndex) -> u64 {
    gap(e.primary_vote(x), e.delta(c, x).expect("c != x"), false)
}

/// Panics unless `c ∈ π` and `x ∉ π`.
pub fn l2(e: &Election, c: CandidateIndex, x: CandidateIndex, pi: CandidateSet) -> u64 {
    l2_impl(e, c, x, pi, true)
}

pub fn l2_plus(e: &Election, c: CandidateIndex, x: CandidateIndex, pi: CandidateSet) -> u64 {
    l2_impl(e, c, x, pi, false)
}

fn l2_impl(e: &Election, c: CandidateIndex, x: CandidateIndex, pi: CandidateSet, halve: bool) -> u64 {
    assert!(pi.contains(c) && !pi.contains(x), "l2 needs c in π and x outside it");
    let held = e.delta_standing(c, x, pi.with(x)).expect("validated above");
    gap(e.primary_vote(x), held, halve)
}

pub fn lb1(e: &Election, pi: CandidateSet) -> u64 {
    BoundEvaluator::new(e).bound(pi, BoundKind::Lb1, Mode::Modify)
}

pub fn lb1_plus(e: &Election, pi: CandidateSet) -> u64 {
    BoundEvaluator::new(e).bound(pi, BoundKind::Lb1, Mode::Add)
}

pub fn lb2(e: &Election, pi: CandidateSet) -> u64 {
    BoundEvaluator::new(e).bound(pi, BoundKind::Lb2, Mode::Modify)
}

pub fn lb2_plus(e: &Election, pi: CandidateSet) -> u64 {
    BoundEvaluator::new(e).bound(pi, BoundKind::Lb2, Mode::Add)
}

/// Bound evaluation with primary votes, pairwise `Δ`, and per-standing-set
/// tallies cached. Shareable across threads.
pub struct BoundEvaluator<'a> {
    e: &'a Election,
    primary: Vec<u64>,
    /// `pairwise[c][x] = Δ(c, x)`.
    pairwise: Vec<Vec<u64>>,
    tallies: RwLock<HashMap<CandidateSet, Arc<Vec<u64>>>>,
}

impl<'a> BoundEvaluator<'a> {
    pub fn new(e: &'a Election) -> Self {
        let n = e.num_candidates();
        let primary = e.candidates().map(|c| e.primary_vote(c)).collect();
        let mut pairwise = vec![vec![0; n]; n];
        for c in e.candidates() {
            for x in e.candidates().filter(|&x| x != c) {
                pairwise[c.0][x.0] = e.delta(c, x).expect("distinct candidates");
            }
        }
        BoundEvaluator { e, primary, pairwise, tallies: RwLock::new(HashMap::new()) }
    }

    fn standing_tallies(&self, s: CandidateSet) -> Arc<Vec<u64>> {
        if let Some(t) = self.tallies.read().expect("memo lock").get(&s) {
            return t.clone();
        }
        let t = Arc::new(self.e.tallies(s).0);
        self.tallies.write().expect("memo lock").entry(s).or_insert(t).clone()
    }

    /// Score of any order whose last `|π|` candidates are `π`; 0 when `π`
    /// covers every candidate. Add and delete modes skip the halving.
    pub fn bound(&self, pi: CandidateSet, kind: BoundKind, mode: Mode) -> u64 {
        let halve = mode == Mode::Modify;
        let outside = self.e.all_candidates().difference(pi);
        let mut best = 0;
        for x in outside.iter() {
            let f_x = self.primary[x.0];
            let held: Box<dyn Fn(CandidateIndex) -> u64> = match kind {
                BoundKind::Lb1 => Box::new(|c: CandidateIndex| self.pairwise[c.0][x.0]),
                BoundKind::Lb2 => {
                    let t = self.standing_tallies(pi.with(x));
                    Box::new(move |c: CandidateIndex| t[c.0])
                }
            };
            for c in pi.iter() {
                best = best.max(gap(f_x, held(c), halve));
            }
        }
        best
    }
}
