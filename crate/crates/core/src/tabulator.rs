//! The IRV counting loop and last-round margins.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::election::{CandidateIndex, Election};

/// How tabulation picks among candidates tied for the lowest tally.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Eliminate the tied candidate whose name sorts first.
    #[default]
    Lexicographic,
    /// Eliminate the tied candidate with the lowest index.
    ByIndex,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TabulationError {
    #[error("election has no candidates")]
    NoCandidates,
    #[error("last-round margin needs at least two candidates")]
    TooFewCandidates,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    /// `(candidate, tally)` for every standing candidate, in index order.
    pub tallies: Vec<(CandidateIndex, u64)>,
    pub exhausted: u64,
    /// Candidate eliminated at the end of this round; `None` in the final round.
    pub eliminated: Option<CandidateIndex>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieEvent {
    /// Zero-based round number.
    pub round: usize,
    pub tied: Vec<CandidateIndex>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TabulationResult {
    pub winner: CandidateIndex,
    /// First eliminated first.
    pub elimination_order: Vec<CandidateIndex>,
    pub rounds: Vec<Round>,
    pub tie_events: Vec<TieEvent>,
}

impl TabulationResult {
    /// The full elimination order with the winner appended.
    pub fn full_order(&self) -> Vec<CandidateIndex> {
        let mut o = self.elimination_order.clone();
        o.push(self.winner);
        o
    }

    /// Tallies of the last two standing candidates, if there were two.
    pub fn final_pair(&self) -> Option<(u64, u64)> {
        let round = self.rounds.iter().rev().find(|r| r.tallies.len() == 2)?;
        Some((round.tallies[0].1, round.tallies[1].1))
    }
}

/// Runs IRV: repeatedly eliminates a standing candidate with the smallest tally.
pub fn run_irv(e: &Election, policy: TiePolicy) -> Result<TabulationResult, TabulationError> {
    if e.num_candidates() == 0 {
        return Err(TabulationError::NoCandidates);
    }
    let mut standing = e.all_candidates();
    let mut rounds = Vec::new();
    let mut order = Vec::new();
    let mut tie_events = Vec::new();
    loop {
        let (t, exhausted) = e.tallies(standing);
        let tallies: Vec<_> = standing.iter().map(|c| (c, t[c.0])).collect();
        if standing.len() == 1 {
            rounds.push(Round { tallies, exhausted, eliminated: None });
            break;
        }
        let low = tallies.iter().map(|&(_, v)| v).min().expect("standing set is nonempty");
        let tied: Vec<CandidateIndex> = tallies.iter().filter(|&&(_, v)| v == low).map(|&(c, _)| c).collect();
        if tied.len() > 1 {
            tie_events.push(TieEvent { round: rounds.len(), tied: tied.clone() });
        }
        let out = match policy {
            TiePolicy::ByIndex => tied[0],
            TiePolicy::Lexicographic => {
                *tied.iter().min_by(|a, b| e.name(**a).cmp(e.name(**b))).expect("at least one tied candidate")
            }
        };
        rounds.push(Round { tallies, exhausted, eliminated: Some(out) });
        order.push(out);
        standing.remove(out);
    }
    let winner = standing.iter().next().expect("one candidate remains");
    Ok(TabulationResult { winner, elimination_order: order, rounds, tie_events })
}

/// Half the final-round tally gap, rounded up.
pub fn last_round_margin(e: &Election) -> Result<u64, TabulationError> {
    Ok(last_round_margin_add(e)?.div_ceil(2))
}

/// The final-round tally gap.
pub fn last_round_margin_add(e: &Election) -> Result<u64, TabulationError> {
    if e.num_candidates() < 2 {
        return Err(TabulationError::TooFewCandidates);
    }
    let result = run_irv(e, TiePolicy::default())?;
    let (a, b) = result.final_pair().expect("two candidates stand in the final round");
    Ok(a.abs_diff(b))
}
