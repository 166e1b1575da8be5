//! Best-first traversal of partial elimination orders.
//!
//! One code path serves the sequential and parallel searches: a single worker
//! reproduces the sequential algorithm exactly, while several workers share
//! the frontier under a mutex. The upper bound is an atomic that only
//! decreases, so workers always prune against the best leaf found so far.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Condvar, Mutex};

use super::{SearchConfig, SearchError, TraceEvent};
use crate::bounds::{BoundEvaluator, BoundKind};
use crate::distance::{build_distance_lp, solve_distance};
use crate::election::{CandidateIndex, CandidateSet, Election};
use crate::equivalence::EliminationOrder;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub(super) enum Scoring {
    /// Closed-form bound first, LP only when the bound leaves room.
    Improved(BoundKind),
    /// Every non-root node is scored by its LP.
    Baseline,
}

struct Node {
    score: u64,
    /// Name ranks of `order`, for a deterministic tie order.
    key: Vec<usize>,
    order: Vec<CandidateIndex>,
    /// Integral distance, set on leaves.
    exact: Option<u64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.score, &self.key).cmp(&(other.score, &other.key))
    }
}

struct Shared {
    frontier: BinaryHeap<Reverse<Node>>,
    in_flight: usize,
    witness: Option<Vec<CandidateIndex>>,
    trace: Vec<TraceEvent>,
    error: Option<SearchError>,
}

pub(super) struct Outcome {
    pub upper: u64,
    pub witness: Option<Vec<CandidateIndex>>,
    pub nodes_scored: u64,
    pub lps_solved: u64,
    pub trace: Vec<TraceEvent>,
}

struct Scored {
    order: Vec<CandidateIndex>,
    bound: Option<u64>,
    lp: Option<u64>,
    score: u64,
    exact: Option<u64>,
}

struct Search<'a> {
    e: &'a Election,
    cfg: &'a SearchConfig,
    scoring: Scoring,
    bounds: BoundEvaluator<'a>,
    rank: Vec<usize>,
    upper: AtomicU64,
    nodes_scored: AtomicU64,
    lps_solved: AtomicU64,
    state: Mutex<Shared>,
    wake: Condvar,
}

pub(super) fn run(
    e: &Election,
    winner: CandidateIndex,
    initial_upper: u64,
    scoring: Scoring,
    cfg: &SearchConfig,
) -> Result<Outcome, SearchError> {
    let mut by_name: Vec<CandidateIndex> = e.candidates().collect();
    by_name.sort_by(|a, b| e.name(*a).cmp(e.name(*b)));
    let mut rank = vec![0; e.num_candidates()];
    for (r, c) in by_name.iter().enumerate() {
        rank[c.0] = r;
    }
    let search = Search {
        e,
        cfg,
        scoring,
        bounds: BoundEvaluator::new(e),
        rank,
        upper: AtomicU64::new(initial_upper),
        nodes_scored: AtomicU64::new(0),
        lps_solved: AtomicU64::new(0),
        state: Mutex::new(Shared {
            frontier: BinaryHeap::new(),
            in_flight: 0,
            witness: None,
            trace: Vec::new(),
            error: None,
        }),
        wake: Condvar::new(),
    };

    // Children of the root.
    for c in e.candidates().filter(|&c| c != winner) {
        let scored = match scoring {
            Scoring::Improved(kind) => {
                let b = search.bounds.bound(CandidateSet::EMPTY.with(c), kind, cfg.mode);
                Scored { order: vec![c], bound: Some(b), lp: None, score: b, exact: None }
            }
            Scoring::Baseline => Scored { order: vec![c], bound: None, lp: None, score: 0, exact: None },
        };
        search.nodes_scored.fetch_add(1, AtomicOrdering::Relaxed);
        let always = scoring == Scoring::Baseline || !cfg.prune;
        let mut state = search.state.lock().expect("search state");
        search.offer(&mut state, scored, always);
    }

    let threads = cfg.threads.max(1);
    if threads == 1 {
        search.worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(|| search.worker());
            }
        });
    }

    let state = search.state.into_inner().expect("search state");
    if let Some(err) = state.error {
        return Err(err);
    }
    Ok(Outcome {
        upper: search.upper.into_inner(),
        witness: state.witness,
        nodes_scored: search.nodes_scored.into_inner(),
        lps_solved: search.lps_solved.into_inner(),
        trace: state.trace,
    })
}

impl Search<'_> {
    fn current_upper(&self) -> u64 {
        self.upper.load(AtomicOrdering::SeqCst)
    }

    /// Records a scored node and enqueues it when it can still beat the bound.
    fn offer(&self, state: &mut Shared, scored: Scored, always: bool) {
        let enqueued = always || scored.score < self.current_upper();
        if self.cfg.record_trace {
            state.trace.push(TraceEvent {
                order: scored.order.clone(),
                bound: scored.bound,
                lp: scored.lp,
                score: scored.score,
                enqueued,
            });
        }
        if enqueued {
            let key = scored.order.iter().map(|c| self.rank[c.0]).collect();
            state.frontier.push(Reverse(Node { score: scored.score, key, order: scored.order, exact: scored.exact }));
        }
    }

    fn worker(&self) {
        let mut state = self.state.lock().expect("search state");
        loop {
            if state.error.is_some() {
                break;
            }
            let Some(Reverse(node)) = state.frontier.pop() else {
                if state.in_flight == 0 {
                    break;
                }
                state = self.wake.wait(state).expect("search state");
                continue;
            };
            if self.cfg.prune && node.score >= self.current_upper() {
                continue;
            }
            if let Some(exact) = node.exact {
                if exact < self.current_upper() {
                    self.upper.fetch_min(exact, AtomicOrdering::SeqCst);
                    state.witness = Some(node.order);
                }
                continue;
            }
            state.in_flight += 1;
            drop(state);
            let children = self.expand(&node);
            state = self.state.lock().expect("search state");
            state.in_flight -= 1;
            match children {
                Ok(children) => {
                    for child in children {
                        self.offer(&mut state, child, !self.cfg.prune);
                    }
                }
                Err(err) => {
                    state.error.get_or_insert(err);
                }
            }
            self.wake.notify_all();
        }
        self.wake.notify_all();
    }

    fn expand(&self, node: &Node) -> Result<Vec<Scored>, SearchError> {
        let placed: CandidateSet = node.order.iter().copied().collect();
        let mut children = Vec::new();
        for c in self.e.candidates().filter(|&c| !placed.contains(c)) {
            let mut order = Vec::with_capacity(node.order.len() + 1);
            order.push(c);
            order.extend_from_slice(&node.order);
            self.nodes_scored.fetch_add(1, AtomicOrdering::Relaxed);
            let child = match self.scoring {
                Scoring::Improved(kind) => {
                    let b = self.bounds.bound(placed.with(c), kind, self.cfg.mode);
                    let mut score = node.score.max(b);
                    let mut lp = None;
                    let mut exact = None;
                    if !self.cfg.prune || score < self.current_upper() {
                        let m = self.distance(&order)?;
                        lp = Some(m.0);
                        exact = m.1;
                        score = score.max(m.0);
                    }
                    Scored { order, bound: Some(b), lp, score, exact }
                }
                Scoring::Baseline => {
                    let (m, exact) = self.distance(&order)?;
                    Scored { order, bound: None, lp: Some(m), score: m, exact }
                }
            };
            children.push(child);
        }
        Ok(children)
    }

    /// Distance of `order`; integral (and returned as exact) for full orders.
    fn distance(&self, order: &[CandidateIndex]) -> Result<(u64, Option<u64>), SearchError> {
        let full = order.len() == self.e.num_candidates();
        let pi = EliminationOrder::new(order.to_vec()).expect("search orders are duplicate-free");
        let model = build_distance_lp(&pi, self.e, self.cfg.mode, self.cfg.class_cap)?;
        if let Some(observer) = &self.cfg.on_model {
            observer(&pi, &model.program);
        }
        self.lps_solved.fetch_add(1, AtomicOrdering::Relaxed);
        let (result, _) = solve_distance(&model, full, self.cfg.solver.as_ref())?;
        Ok((result.value, full.then_some(result.value)))
    }
}
