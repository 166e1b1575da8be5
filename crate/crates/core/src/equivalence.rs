//! Elimination orders and the equivalence classes of ballots they induce.
//!
//! Given an order `π = [c_0, ..., c_{k-1}]` (first eliminated first), two
//! rankings are equivalent when they count toward the same candidate in every
//! round of the reduced election. Each class has a unique minimal member, a
//! subsequence of `π`, so a class is stored as a bitmask over positions in `π`:
//! bit `i` set means `c_i` appears in the representative.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::election::{CandidateIndex, CandidateSet, Election, Ranking};

/// Default limit on `|π|` for full class enumeration.
pub const DEFAULT_CLASS_CAP: usize = 20;

/// Hard limit imposed by the `u32` class mask.
const MASK_BITS: usize = 31;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("candidate {0} appears twice in the elimination order")]
    Duplicate(CandidateIndex),
    #[error("elimination order of length {len} exceeds the class cap of {cap}")]
    CapExceeded { len: usize, cap: usize },
}

/// A duplicate-free candidate sequence; the front is eliminated first and the
/// last element wins the reduced election.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EliminationOrder(Vec<CandidateIndex>);

impl EliminationOrder {
    pub fn new(order: Vec<CandidateIndex>) -> Result<Self, OrderError> {
        let mut seen = CandidateSet::EMPTY;
        for &c in &order {
            if seen.contains(c) {
                return Err(OrderError::Duplicate(c));
            }
            seen.insert(c);
        }
        Ok(EliminationOrder(order))
    }

    pub fn candidates(&self) -> &[CandidateIndex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_set(&self) -> CandidateSet {
        self.0.iter().copied().collect()
    }

    pub fn winner(&self) -> Option<CandidateIndex> {
        self.0.last().copied()
    }

    pub fn position(&self, c: CandidateIndex) -> Option<usize> {
        self.0.iter().position(|&x| x == c)
    }

    pub fn contains(&self, c: CandidateIndex) -> bool {
        self.0.contains(&c)
    }

    /// `[c] ++ self`.
    pub fn prepend(&self, c: CandidateIndex) -> Result<Self, OrderError> {
        if self.contains(c) {
            return Err(OrderError::Duplicate(c));
        }
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(c);
        v.extend_from_slice(&self.0);
        Ok(EliminationOrder(v))
    }

    pub fn display(&self, e: &Election) -> String {
        e.format_ranking(&self.0)
    }
}

/// An equivalence class relative to a fixed order, as a mask over its positions.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EquivalenceClass(pub u32);

impl EquivalenceClass {
    pub const EMPTY: EquivalenceClass = EquivalenceClass(0);

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// The minimal representative ranking.
    pub fn rep(self, pi: &EliminationOrder) -> Ranking {
        Ranking((0..pi.len()).filter(|&i| self.0 & (1 << i) != 0).map(|i| pi.0[i]).collect())
    }

    /// Position in `π` of the candidate this class counts toward in round
    /// `round` (zero-based), when `π[round..]` are standing.
    pub fn recipient(self, round: usize) -> Option<usize> {
        let live = self.0.checked_shr(round as u32).unwrap_or(0);
        (live != 0).then(|| round + live.trailing_zeros() as usize)
    }
}

impl fmt::Display for EquivalenceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#b}", self.0)
    }
}

/// The class of ranking `s`: an element is kept iff it is in `π` and eliminated
/// later than every earlier element of `s` that is in `π`.
pub fn class_of(s: &Ranking, pi: &EliminationOrder) -> EquivalenceClass {
    assert!(pi.len() <= MASK_BITS, "elimination order too long for class masks");
    let mut mask = 0u32;
    let mut latest: Option<usize> = None;
    for &c in s.prefs() {
        let Some(p) = pi.position(c) else { continue };
        if latest.is_none_or(|l| p > l) {
            mask |= 1 << p;
            latest = Some(p);
        }
    }
    EquivalenceClass(mask)
}

/// All `2^|π|` classes in mask order.
pub fn enumerate_classes(pi: &EliminationOrder, cap: usize) -> Result<Vec<EquivalenceClass>, OrderError> {
    check_cap(pi, cap)?;
    Ok((0..1u32 << pi.len()).map(EquivalenceClass).collect())
}

fn check_cap(pi: &EliminationOrder, cap: usize) -> Result<(), OrderError> {
    let cap = cap.min(MASK_BITS);
    if pi.len() > cap {
        Err(OrderError::CapExceeded { len: pi.len(), cap })
    } else {
        Ok(())
    }
}

/// Ballot counts per class; `counts[mask]` is the count of that class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassTable {
    pub order: EliminationOrder,
    pub counts: Vec<u64>,
}

impl ClassTable {
    pub fn count(&self, class: EquivalenceClass) -> u64 {
        self.counts[class.0 as usize]
    }

    pub fn classes(&self) -> impl Iterator<Item = EquivalenceClass> {
        (0..self.counts.len() as u32).map(EquivalenceClass)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn class_counts(e: &Election, pi: &EliminationOrder, cap: usize) -> Result<ClassTable, OrderError> {
    check_cap(pi, cap)?;
    let mut counts = vec![0u64; 1 << pi.len()];
    for g in e.groups() {
        counts[class_of(&g.ranking, pi).0 as usize] += g.count;
    }
    Ok(ClassTable { order: pi.clone(), counts })
}
