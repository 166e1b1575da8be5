//! Brute-force references for tiny elections.
//!
//! [`edit_oracle`] searches manipulations directly, without any of the
//! machinery in [`crate::search`]: it tries every way of removing ballots from
//! existing groups and adding ballots of every possible signature, in order of
//! size, and reruns the count with every possible tie resolution.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distance::Mode;
use crate::election::{CandidateIndex, CandidateSet, Election, Ranking};
use crate::tabulator::{run_irv, TiePolicy};

pub const ORACLE_MAX_CANDIDATES: usize = 4;
pub const ORACLE_MAX_BALLOTS: u64 = 40;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("edit oracle handles at most {ORACLE_MAX_CANDIDATES} candidates and {ORACLE_MAX_BALLOTS} ballots")]
    GuardExceeded,
    #[error("edit oracle needs at least two candidates")]
    TooFewCandidates,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditBudget {
    /// Most ballots manipulated (a modified ballot counts once).
    pub k: u64,
    pub mode: Mode,
}

/// Candidates that can win under some resolution of every tie.
pub fn possible_winners(e: &Election) -> CandidateSet {
    let counts: Vec<(&Ranking, u64)> = e.groups().iter().map(|g| (&g.ranking, g.count)).collect();
    let mut winners = CandidateSet::EMPTY;
    collect_winners(&counts, e.all_candidates(), &mut winners);
    winners
}

fn collect_winners(profile: &[(&Ranking, u64)], standing: CandidateSet, out: &mut CandidateSet) {
    if standing.len() == 1 {
        *out = out.union(standing);
        return;
    }
    for loser in lowest(profile, standing).iter() {
        collect_winners(profile, standing.without(loser), out);
    }
}

/// Whether some tie resolution eliminates `winner` before the end.
fn can_unseat(profile: &[(&Ranking, u64)], standing: CandidateSet, winner: CandidateIndex) -> bool {
    if standing.len() == 1 {
        return !standing.contains(winner);
    }
    let low = lowest(profile, standing);
    low.contains(winner) || low.iter().any(|c| can_unseat(profile, standing.without(c), winner))
}

fn lowest(profile: &[(&Ranking, u64)], standing: CandidateSet) -> CandidateSet {
    let mut tally = [0u64; 64];
    for (r, n) in profile {
        if let Some(c) = r.first_in(standing) {
            tally[c.0] += n;
        }
    }
    let min = standing.iter().map(|c| tally[c.0]).min().expect("nonempty standing set");
    standing.iter().filter(|c| tally[c.0] == min).collect()
}

/// Every ballot signature worth adding: rankings shorter than the candidate
/// count, including the empty one. A full ranking behaves exactly like its
/// prefix without the last candidate.
fn addition_signatures(n: usize) -> Vec<Ranking> {
    (0..n)
        .flat_map(|len| (0..n).permutations(len))
        .map(|p| Ranking(p.into_iter().map(CandidateIndex).collect()))
        .collect()
}

/// Smallest manipulation of at most `budget.k` ballots after which some tie
/// resolution elects a candidate other than the reported winner.
pub fn edit_oracle(e: &Election, budget: EditBudget) -> Result<Option<u64>, OracleError> {
    if e.num_candidates() > ORACLE_MAX_CANDIDATES || e.total_ballots() > ORACLE_MAX_BALLOTS {
        return Err(OracleError::GuardExceeded);
    }
    if e.num_candidates() < 2 {
        return Err(OracleError::TooFewCandidates);
    }
    let winner = run_irv(e, TiePolicy::default()).expect("nonempty candidate set").winner;
    let signatures = addition_signatures(e.num_candidates());
    let groups: Vec<(&Ranking, u64)> = e.groups().iter().map(|g| (&g.ranking, g.count)).collect();
    for t in 0..=budget.k {
        let (removals, additions) = match budget.mode {
            Mode::Modify => (t, t),
            Mode::Add => (0, t),
            Mode::Delete => (t, 0),
        };
        if removals > e.total_ballots() {
            break;
        }
        if feasible(&groups, &signatures, e.num_candidates(), removals, additions, winner) {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Unbounded oracle value; every mode can change the outcome within the total
/// ballot count.
pub fn edit_margin(e: &Election, mode: Mode) -> Result<u64, OracleError> {
    let k = e.total_ballots().max(1);
    Ok(edit_oracle(e, EditBudget { k, mode })?.expect("some manipulation within the total always works"))
}

struct Enumeration<'a> {
    profile: Vec<(&'a Ranking, u64)>,
    ngroups: usize,
    candidates: CandidateSet,
    winner: CandidateIndex,
}

fn feasible(
    groups: &[(&Ranking, u64)],
    signatures: &[Ranking],
    num_candidates: usize,
    removals: u64,
    additions: u64,
    winner: CandidateIndex,
) -> bool {
    let mut profile: Vec<(&Ranking, u64)> = groups.to_vec();
    profile.extend(signatures.iter().map(|s| (s, 0)));
    let mut en = Enumeration { profile, ngroups: groups.len(), candidates: CandidateSet::all(num_candidates), winner };
    en.remove_from(0, removals, additions)
}

impl Enumeration<'_> {
    /// Chooses how many ballots to remove from groups `g..`, then hands over
    /// to the additions.
    fn remove_from(&mut self, g: usize, left: u64, additions: u64) -> bool {
        if left == 0 {
            return self.add_to(self.ngroups, additions);
        }
        if g == self.ngroups {
            return false;
        }
        let have = self.profile[g].1;
        let mut found = false;
        for take in 0..=have.min(left) {
            self.profile[g].1 = have - take;
            if self.remove_from(g + 1, left - take, additions) {
                found = true;
                break;
            }
        }
        self.profile[g].1 = have;
        found
    }

    /// Distributes `left` added ballots over signatures `s..`.
    fn add_to(&mut self, s: usize, left: u64) -> bool {
        if left == 0 {
            return can_unseat(&self.profile, self.candidates, self.winner);
        }
        if s == self.profile.len() {
            return false;
        }
        let mut found = false;
        for put in (0..=left).rev() {
            self.profile[s].1 = put;
            if self.add_to(s + 1, left - put) {
                found = true;
                break;
            }
        }
        self.profile[s].1 = 0;
        found
    }
}

/// A deterministic pseudo-random election: `num_groups` random partial
/// rankings (merged if they collide), each with at least one ballot, and the
/// remaining ballots spread uniformly.
pub fn random_election(seed: u64, num_candidates: usize, num_ballots: u64, num_groups: usize) -> Election {
    assert!(num_candidates > 0 && num_ballots > 0 && num_groups > 0, "parameters must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..num_candidates)
        .map(|i| if i < 26 { char::from(b'A' + i as u8).to_string() } else { format!("C{i}") })
        .collect();
    let num_groups = num_groups.min(num_ballots as usize);
    let mut rankings = Vec::with_capacity(num_groups);
    for _ in 0..num_groups {
        let mut perm: Vec<CandidateIndex> = (0..num_candidates).map(CandidateIndex).collect();
        perm.shuffle(&mut rng);
        perm.truncate(rng.random_range(1..=num_candidates));
        rankings.push(Ranking(perm));
    }
    let mut counts = vec![1u64; num_groups];
    for _ in 0..num_ballots - num_groups as u64 {
        counts[rng.random_range(0..num_groups)] += 1;
    }
    Election::new(names, rankings.into_iter().zip(counts)).expect("generated rankings are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_candidate_swing() {
        let e = Election::parse("candidates: A,B\n3: A\n5: B\n").unwrap();
        let modify = |k| edit_oracle(&e, EditBudget { k, mode: Mode::Modify }).unwrap();
        assert_eq!(modify(0), None);
        assert_eq!(modify(1), Some(1));
        assert_eq!(edit_margin(&e, Mode::Add).unwrap(), 2);
        assert_eq!(edit_margin(&e, Mode::Delete).unwrap(), 2);
    }

    #[test]
    fn existing_tie_needs_no_edit() {
        let e = Election::parse("candidates: A,B\n4: A\n4: B\n").unwrap();
        for mode in Mode::ALL {
            assert_eq!(edit_oracle(&e, EditBudget { k: 0, mode }).unwrap(), Some(0));
        }
        assert_eq!(possible_winners(&e).len(), 2);
    }

    #[test]
    fn scaled_example() {
        let e =
            Election::parse("candidates: A,B,C,D\n8: A,C,B,D\n4: B,C,A,D\n2: C,A,B,D\n2: C,A,D\n1: D,B,C,A\n").unwrap();
        assert_eq!(edit_oracle(&e, EditBudget { k: 2, mode: Mode::Modify }).unwrap(), Some(1));
    }

    #[test]
    fn monotone_in_budget() {
        let e = random_election(7, 3, 9, 4);
        for mode in Mode::ALL {
            let m = edit_margin(&e, mode).unwrap();
            for k in 0..m + 2 {
                let v = edit_oracle(&e, EditBudget { k, mode }).unwrap();
                assert_eq!(v, (k >= m).then_some(m));
            }
        }
    }

    #[test]
    fn guards() {
        let e = random_election(1, 5, 10, 4);
        assert_eq!(edit_oracle(&e, EditBudget { k: 1, mode: Mode::Modify }), Err(OracleError::GuardExceeded));
        let e = random_election(1, 3, 41, 4);
        assert_eq!(edit_oracle(&e, EditBudget { k: 1, mode: Mode::Modify }), Err(OracleError::GuardExceeded));
    }

    #[test]
    fn random_elections_are_deterministic() {
        let a = random_election(1, 3, 10, 4);
        assert_eq!(a, random_election(1, 3, 10, 4));
        assert_ne!(a, random_election(2, 3, 10, 4));
        assert_eq!(a.total_ballots(), 10);
        assert_eq!(a.num_candidates(), 3);
        for seed in 0..200 {
            let e = random_election(seed, 1 + (seed as usize % 6), 1 + seed % 50, 1 + (seed as usize % 9));
            assert_eq!(e.total_ballots(), 1 + seed % 50);
            assert!(e.groups().iter().all(|g| g.count > 0 && !g.ranking.is_empty()));
        }
    }
}
