//! Exact margin computation by branch-and-bound over elimination orders.
//!
//! A node is a partial order `π` naming the last `|π|` candidates to be
//! eliminated, the final one winning. Children put one more candidate at the
//! front. Every node carries a score that lower-bounds the manipulation needed
//! by any full order ending in `π`; a leaf's score is exact. The smallest leaf
//! that beats the running upper bound is the margin.

mod engine;

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::BoundKind;
use crate::distance::{distance_to, DistanceError, Mode};
use crate::election::{CandidateIndex, Election};
use crate::equivalence::{EliminationOrder, DEFAULT_CLASS_CAP};
use crate::lp::{LinearProgram, LpSolver, SimplexSolver};
use crate::tabulator::{run_irv, TabulationError, TabulationResult, TiePolicy};

use engine::Scoring;

/// Candidate limit for [`exhaustive_margin`] and [`leaf_distances`].
pub const EXHAUSTIVE_LIMIT: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("margin computation needs at least two candidates, got {0}")]
    TooFewCandidates(usize),
    #[error("exhaustive search is limited to {limit} candidates, got {got}")]
    GuardExceeded { got: usize, limit: usize },
    #[error(transparent)]
    Tabulation(#[from] TabulationError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

/// Called with every program the search builds, before it is solved.
pub type ModelObserver = Arc<dyn Fn(&EliminationOrder, &LinearProgram) + Send + Sync>;

#[derive(Clone)]
pub struct SearchConfig {
    pub mode: Mode,
    pub bound: BoundKind,
    /// Stop caring once the margin is known to exceed this many ballots.
    pub cap: Option<u64>,
    pub tie_policy: TiePolicy,
    /// Worker threads; 1 gives a deterministic sequential search.
    pub threads: usize,
    /// Longest order for which a distance program may be built.
    pub class_cap: usize,
    /// Disabling pruning scores and expands every node.
    pub prune: bool,
    pub record_trace: bool,
    pub solver: Arc<dyn LpSolver>,
    pub on_model: Option<ModelObserver>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            mode: Mode::Modify,
            bound: BoundKind::Lb2,
            cap: None,
            tie_policy: TiePolicy::default(),
            threads: 1,
            class_cap: DEFAULT_CLASS_CAP,
            prune: true,
            record_trace: false,
            solver: Arc::new(SimplexSolver),
            on_model: None,
        }
    }
}

impl SearchConfig {
    pub fn with_mode(mode: Mode) -> Self {
        SearchConfig { mode, ..Default::default() }
    }
}

impl fmt::Debug for SearchConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SearchConfig")
            .field("mode", &self.mode)
            .field("bound", &self.bound)
            .field("cap", &self.cap)
            .field("tie_policy", &self.tie_policy)
            .field("threads", &self.threads)
            .field("class_cap", &self.class_cap)
            .field("prune", &self.prune)
            .field("record_trace", &self.record_trace)
            .finish_non_exhaustive()
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_scored: u64,
    pub lps_solved: u64,
    pub elapsed_ms: u64,
}

/// One scored node, in scoring order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub order: Vec<CandidateIndex>,
    /// Closed-form bound, when the algorithm computes one.
    pub bound: Option<u64>,
    /// Distance program value, when one was solved.
    pub lp: Option<u64>,
    pub score: u64,
    pub enqueued: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginReport {
    /// The margin, or `cap + 1` when `capped`.
    pub margin: u64,
    pub mode: Mode,
    pub lrm: u64,
    pub lrm_plus: u64,
    pub winner: CandidateIndex,
    pub elimination_order: Vec<CandidateIndex>,
    /// A full order realisable with `margin` changes; absent when no leaf
    /// beat the initial upper bound.
    pub witness_order: Option<Vec<CandidateIndex>>,
    pub stats: SearchStats,
    /// The margin exceeds the requested cap.
    pub capped: bool,
    /// Tabulation broke a tie, so the margin may be underestimated.
    pub tie_caveat: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEvent>,
}

impl MarginReport {
    /// Trace entry for the node whose order is `order`.
    pub fn traced(&self, order: &[CandidateIndex]) -> Option<&TraceEvent> {
        self.trace.iter().find(|t| t.order == order)
    }
}

struct Start {
    tab: TabulationResult,
    lrm: u64,
    lrm_plus: u64,
}

fn start(e: &Election, cfg: &SearchConfig) -> Result<Start, SearchError> {
    if e.num_candidates() < 2 {
        return Err(SearchError::TooFewCandidates(e.num_candidates()));
    }
    let tab = run_irv(e, cfg.tie_policy)?;
    let (a, b) = tab.final_pair().expect("two candidates reach the last round");
    let lrm_plus = a.abs_diff(b);
    Ok(Start { tab, lrm: lrm_plus.div_ceil(2), lrm_plus })
}

fn initial_upper(s: &Start, cfg: &SearchConfig) -> u64 {
    let u = match cfg.mode {
        Mode::Modify => s.lrm,
        Mode::Add | Mode::Delete => s.lrm_plus,
    };
    match cfg.cap {
        Some(cap) => u.min(cap.saturating_add(1)),
        None => u,
    }
}

fn report(
    s: Start,
    cfg: &SearchConfig,
    margin: u64,
    witness: Option<Vec<CandidateIndex>>,
    stats: SearchStats,
    trace: Vec<TraceEvent>,
) -> MarginReport {
    let capped = cfg.cap.is_some_and(|cap| margin > cap);
    MarginReport {
        margin,
        mode: cfg.mode,
        lrm: s.lrm,
        lrm_plus: s.lrm_plus,
        winner: s.tab.winner,
        elimination_order: s.tab.elimination_order.clone(),
        witness_order: witness,
        stats,
        capped,
        tie_caveat: !s.tab.tie_events.is_empty(),
        trace,
    }
}

fn searched(e: &Election, cfg: &SearchConfig, scoring: Scoring) -> Result<MarginReport, SearchError> {
    let clock = Instant::now();
    let s = start(e, cfg)?;
    let out = engine::run(e, s.tab.winner, initial_upper(&s, cfg), scoring, cfg)?;
    let stats = SearchStats {
        nodes_scored: out.nodes_scored,
        lps_solved: out.lps_solved,
        elapsed_ms: clock.elapsed().as_millis() as u64,
    };
    Ok(report(s, cfg, out.upper, out.witness, stats, out.trace))
}

/// The improved search: nodes are scored by the configured closed-form bound
/// and a distance program is solved only when that bound leaves room.
pub fn compute_margin(e: &Election, cfg: &SearchConfig) -> Result<MarginReport, SearchError> {
    searched(e, cfg, Scoring::Improved(cfg.bound))
}

/// The baseline search: children of the root start at zero and every other
/// node is scored by its distance program. `cfg.bound` is ignored.
pub fn mrsw_baseline(e: &Election, cfg: &SearchConfig) -> Result<MarginReport, SearchError> {
    searched(e, cfg, Scoring::Baseline)
}

/// Exact distance of every full elimination order, in lexicographic index order.
pub fn leaf_distances(
    e: &Election,
    mode: Mode,
    solver: &dyn LpSolver,
) -> Result<Vec<(Vec<CandidateIndex>, u64)>, SearchError> {
    let n = e.num_candidates();
    if n > EXHAUSTIVE_LIMIT {
        return Err(SearchError::GuardExceeded { got: n, limit: EXHAUSTIVE_LIMIT });
    }
    if n < 2 {
        return Err(SearchError::TooFewCandidates(n));
    }
    e.candidates()
        .permutations(n)
        .map(|order| {
            let pi = EliminationOrder::new(order.clone()).expect("permutation");
            Ok((order, distance_to(&pi, e, mode, true, solver)?.value))
        })
        .collect()
}

/// Minimum exact distance over every full order whose last candidate is not
/// the winner. No pruning and no upper bound from the last round.
pub fn exhaustive_margin(e: &Election, cfg: &SearchConfig) -> Result<MarginReport, SearchError> {
    let clock = Instant::now();
    let n = e.num_candidates();
    if n > EXHAUSTIVE_LIMIT {
        return Err(SearchError::GuardExceeded { got: n, limit: EXHAUSTIVE_LIMIT });
    }
    let s = start(e, cfg)?;
    let winner = s.tab.winner;
    let mut best: Option<(u64, Vec<CandidateIndex>)> = None;
    let mut lps = 0;
    for order in e.candidates().permutations(n).filter(|o| o[n - 1] != winner) {
        let pi = EliminationOrder::new(order.clone()).expect("permutation");
        let d = distance_to(&pi, e, cfg.mode, true, cfg.solver.as_ref())?.value;
        lps += 1;
        if best.as_ref().is_none_or(|(b, _)| d < *b) {
            best = Some((d, order));
        }
    }
    let (mut margin, order) = best.expect("at least two candidates give a non-winning order");
    let mut witness = Some(order);
    if let Some(cap) = cfg.cap {
        if margin > cap {
            margin = cap + 1;
            witness = None;
        }
    }
    let stats = SearchStats { nodes_scored: lps, lps_solved: lps, elapsed_ms: clock.elapsed().as_millis() as u64 };
    Ok(report(s, cfg, margin, witness, stats, Vec::new()))
}
