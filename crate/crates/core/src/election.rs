//! Candidates, rankings and elections, plus the counting statistics every
//! other module is built on.
//!
//! Candidates are dense indices into the election's name table. Elections are
//! stored as a multiset: each distinct ranking appears once with a count.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper limit on candidates, imposed by [`CandidateSet`]'s bitmask.
pub const MAX_CANDIDATES: usize = 64;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidateIndex(pub usize);

impl fmt::Display for CandidateIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A set of candidates as a 64-bit mask.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateSet(u64);

impl CandidateSet {
    pub const EMPTY: CandidateSet = CandidateSet(0);

    /// `{0, 1, ..., n-1}`.
    pub fn all(n: usize) -> CandidateSet {
        assert!(n <= MAX_CANDIDATES);
        if n == MAX_CANDIDATES {
            CandidateSet(u64::MAX)
        } else {
            CandidateSet((1u64 << n) - 1)
        }
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, c: CandidateIndex) -> bool {
        c.0 < MAX_CANDIDATES && self.0 & (1 << c.0) != 0
    }

    pub fn with(self, c: CandidateIndex) -> CandidateSet {
        CandidateSet(self.0 | (1 << c.0))
    }

    pub fn without(self, c: CandidateIndex) -> CandidateSet {
        CandidateSet(self.0 & !(1 << c.0))
    }

    pub fn insert(&mut self, c: CandidateIndex) {
        *self = self.with(c);
    }

    pub fn remove(&mut self, c: CandidateIndex) {
        *self = self.without(c);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: CandidateSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: CandidateSet) -> CandidateSet {
        CandidateSet(self.0 | other.0)
    }

    pub fn difference(self, other: CandidateSet) -> CandidateSet {
        CandidateSet(self.0 & !other.0)
    }

    /// Members in increasing index order.
    pub fn iter(self) -> impl Iterator<Item = CandidateIndex> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(CandidateIndex(i))
        })
    }
}

impl FromIterator<CandidateIndex> for CandidateSet {
    fn from_iter<I: IntoIterator<Item = CandidateIndex>>(iter: I) -> Self {
        iter.into_iter().fold(CandidateSet::EMPTY, CandidateSet::with)
    }
}

/// A preference list, most preferred first. May be empty or partial.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Ranking(pub Vec<CandidateIndex>);

impl Ranking {
    pub fn new(prefs: Vec<CandidateIndex>) -> Ranking {
        Ranking(prefs)
    }

    pub fn prefs(&self) -> &[CandidateIndex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The subsequence of this ranking restricted to `set`, order kept.
    pub fn project(&self, set: CandidateSet) -> Ranking {
        Ranking(self.0.iter().copied().filter(|&c| set.contains(c)).collect())
    }

    /// The most preferred member of `set`, if the ranking mentions one.
    pub fn first_in(&self, set: CandidateSet) -> Option<CandidateIndex> {
        self.0.iter().copied().find(|&c| set.contains(c))
    }

    pub fn has_duplicates(&self) -> bool {
        let mut seen = CandidateSet::EMPTY;
        for &c in &self.0 {
            if seen.contains(c) {
                return true;
            }
            seen.insert(c);
        }
        false
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallotGroup {
    pub ranking: Ranking,
    pub count: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElectionError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("election has no candidates")]
    NoCandidates,
    #[error("too many candidates ({0}); at most {MAX_CANDIDATES} are supported")]
    TooManyCandidates(usize),
    #[error("candidate name {0:?} appears more than once")]
    DuplicateName(String),
    #[error("unknown candidate {0:?}")]
    UnknownCandidate(String),
    #[error("candidate index {0} is out of range")]
    CandidateOutOfRange(usize),
    #[error("ranking lists candidate {0:?} more than once")]
    DuplicateInRanking(String),
    #[error("ballot group has a zero count")]
    ZeroCount,
    #[error("{0:?} is not a standing candidate")]
    NotStanding(String),
    #[error("a candidate cannot be compared with itself ({0:?})")]
    SameCandidate(String),
}

/// A multiset of ranked ballots over a fixed candidate list.
///
/// Immutable once built; rankings are validated and identical rankings merged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Election {
    names: Vec<String>,
    groups: Vec<BallotGroup>,
    total: u64,
}

impl Election {
    /// Builds an election, merging repeated rankings. Group order follows the
    /// first appearance of each ranking.
    pub fn new(
        names: Vec<String>,
        groups: impl IntoIterator<Item = (Ranking, u64)>,
    ) -> Result<Election, ElectionError> {
        if names.is_empty() {
            return Err(ElectionError::NoCandidates);
        }
        if names.len() > MAX_CANDIDATES {
            return Err(ElectionError::TooManyCandidates(names.len()));
        }
        let mut seen_names = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if seen_names.insert(n.as_str(), i).is_some() {
                return Err(ElectionError::DuplicateName(n.clone()));
            }
        }
        let mut index: HashMap<Ranking, usize> = HashMap::new();
        let mut merged: Vec<BallotGroup> = Vec::new();
        let mut total = 0u64;
        for (ranking, count) in groups {
            if count == 0 {
                return Err(ElectionError::ZeroCount);
            }
            if let Some(c) = ranking.0.iter().find(|c| c.0 >= names.len()) {
                return Err(ElectionError::CandidateOutOfRange(c.0));
            }
            if ranking.has_duplicates() {
                let dup = ranking
                    .0
                    .iter()
                    .enumerate()
                    .find(|(i, c)| ranking.0[..*i].contains(c))
                    .map(|(_, c)| names[c.0].clone())
                    .unwrap_or_default();
                return Err(ElectionError::DuplicateInRanking(dup));
            }
            total += count;
            match index.get(&ranking) {
                Some(&i) => merged[i].count += count,
                None => {
                    index.insert(ranking.clone(), merged.len());
                    merged.push(BallotGroup { ranking, count });
                }
            }
        }
        Ok(Election { names, groups: merged, total })
    }

    /// Builds an election from rankings given by candidate name.
    pub fn from_named<S: AsRef<str>>(names: &[S], groups: &[(&[S], u64)]) -> Result<Election, ElectionError> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let lookup: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut converted = Vec::with_capacity(groups.len());
        for (prefs, count) in groups {
            let ranking = prefs
                .iter()
                .map(|p| {
                    lookup
                        .get(p.as_ref())
                        .map(|&i| CandidateIndex(i))
                        .ok_or_else(|| ElectionError::UnknownCandidate(p.as_ref().to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            converted.push((Ranking(ranking), *count));
        }
        Election::new(names, converted)
    }

    pub fn num_candidates(&self) -> usize {
        self.names.len()
    }

    pub fn candidates(&self) -> impl Iterator<Item = CandidateIndex> {
        (0..self.names.len()).map(CandidateIndex)
    }

    pub fn all_candidates(&self) -> CandidateSet {
        CandidateSet::all(self.names.len())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, c: CandidateIndex) -> &str {
        &self.names[c.0]
    }

    pub fn candidate(&self, name: &str) -> Option<CandidateIndex> {
        self.names.iter().position(|n| n == name).map(CandidateIndex)
    }

    pub fn groups(&self) -> &[BallotGroup] {
        &self.groups
    }

    pub fn total_ballots(&self) -> u64 {
        self.total
    }

    pub fn format_ranking(&self, r: &[CandidateIndex]) -> String {
        let names: Vec<&str> = r.iter().map(|&c| self.name(c)).collect();
        format!("[{}]", names.join(","))
    }

    /// Tallies for every candidate given the standing set; non-standing
    /// candidates read zero. The second value counts exhausted ballots.
    pub fn tallies(&self, standing: CandidateSet) -> (Vec<u64>, u64) {
        let mut t = vec![0; self.names.len()];
        let mut exhausted = 0;
        for g in &self.groups {
            match g.ranking.first_in(standing) {
                Some(c) => t[c.0] += g.count,
                None => exhausted += g.count,
            }
        }
        (t, exhausted)
    }

    /// Ballots whose most preferred standing candidate is `c`.
    pub fn tally(&self, standing: CandidateSet, c: CandidateIndex) -> Result<u64, ElectionError> {
        self.check(c)?;
        if !standing.contains(c) {
            return Err(ElectionError::NotStanding(self.names[c.0].clone()));
        }
        Ok(self.count_first(standing, c))
    }

    fn count_first(&self, standing: CandidateSet, c: CandidateIndex) -> u64 {
        self.groups.iter().filter(|g| g.ranking.first_in(standing) == Some(c)).map(|g| g.count).sum()
    }

    /// First-preference count.
    pub fn primary_vote(&self, c: CandidateIndex) -> u64 {
        self.groups.iter().filter(|g| g.ranking.0.first() == Some(&c)).map(|g| g.count).sum()
    }

    /// Ballots ranking `c` above `x`, or ranking `c` and not `x`.
    pub fn delta(&self, c: CandidateIndex, x: CandidateIndex) -> Result<u64, ElectionError> {
        self.check(c)?;
        self.check(x)?;
        if c == x {
            return Err(ElectionError::SameCandidate(self.names[c.0].clone()));
        }
        let pair = CandidateSet::EMPTY.with(c).with(x);
        Ok(self.count_first(pair, c))
    }

    /// The most ballots `c` can hold when `x` is eliminated with at least
    /// `standing` still in the count.
    pub fn delta_standing(
        &self,
        c: CandidateIndex,
        x: CandidateIndex,
        standing: CandidateSet,
    ) -> Result<u64, ElectionError> {
        self.check(c)?;
        self.check(x)?;
        if c == x {
            return Err(ElectionError::SameCandidate(self.names[c.0].clone()));
        }
        for k in [c, x] {
            if !standing.contains(k) {
                return Err(ElectionError::NotStanding(self.names[k.0].clone()));
            }
        }
        Ok(self.count_first(standing, c))
    }

    fn check(&self, c: CandidateIndex) -> Result<(), ElectionError> {
        if c.0 < self.names.len() {
            Ok(())
        } else {
            Err(ElectionError::CandidateOutOfRange(c.0))
        }
    }

    /// Parses the line-oriented ballot file format:
    ///
    /// ```text
    /// candidates: A,B,C
    /// # comment
    /// 40: A,C,B   # trailing comments are allowed
    /// 3:
    /// ```
    pub fn parse(text: &str) -> Result<Election, ElectionError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split_once('#').map_or(l, |(body, _)| body).trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) =
            lines.next().ok_or(ElectionError::Parse { line: 1, message: "missing `candidates:` header".into() })?;
        let list = header
            .strip_prefix("candidates")
            .and_then(|r| r.trim_start().strip_prefix(':'))
            .ok_or_else(|| ElectionError::Parse { line: hline, message: "expected `candidates: <name>,...`".into() })?;
        let names: Vec<String> = split_names(list);
        if names.is_empty() {
            return Err(ElectionError::Parse { line: hline, message: "empty candidate list".into() });
        }
        if let Some(empty) = names.iter().position(String::is_empty) {
            return Err(ElectionError::Parse {
                line: hline,
                message: format!("candidate {} has an empty name", empty + 1),
            });
        }
        let lookup: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        if lookup.len() != names.len() {
            let dup = names.iter().enumerate().find(|(i, n)| names[..*i].contains(n)).unwrap().1;
            return Err(ElectionError::Parse { line: hline, message: format!("candidate {dup:?} listed twice") });
        }

        let mut groups = Vec::new();
        for (line, body) in lines {
            let err = |message: String| ElectionError::Parse { line, message };
            let (count, prefs) = body.split_once(':').ok_or_else(|| err("expected `<count>: <names>`".into()))?;
            let count: u64 = count.trim().parse().map_err(|_| err(format!("malformed count {:?}", count.trim())))?;
            if count == 0 {
                return Err(err("count must be positive".into()));
            }
            let mut ranking = Vec::new();
            for name in split_names(prefs) {
                let &i = lookup.get(name.as_str()).ok_or_else(|| err(format!("unknown candidate {name:?}")))?;
                if ranking.contains(&CandidateIndex(i)) {
                    return Err(err(format!("candidate {name:?} ranked twice")));
                }
                ranking.push(CandidateIndex(i));
            }
            groups.push((Ranking(ranking), count));
        }
        Election::new(names, groups)
    }

    /// Renders the election in the ballot file format.
    pub fn to_ballot_file(&self) -> String {
        let mut out = format!("candidates: {}\n", self.names.join(","));
        for g in &self.groups {
            let names: Vec<&str> = g.ranking.0.iter().map(|&c| self.name(c)).collect();
            if names.is_empty() {
                out.push_str(&format!("{}:\n", g.count));
            } else {
                out.push_str(&format!("{}: {}\n", g.count, names.join(",")));
            }
        }
        out
    }
}

impl FromStr for Election {
    type Err = ElectionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Election::parse(s)
    }
}

fn split_names(list: &str) -> Vec<String> {
    if list.trim().is_empty() {
        return Vec::new();
    }
    list.split(',').map(|s| s.trim().to_string()).collect()
}

/// The four-candidate running example used throughout the docs and tests.
pub const WORKED_EXAMPLE: &str = "\
candidates: A,B,C,D
40: A,C,B,D
21: B,C,A,D
10: C,A,B,D
10: C,A,D
5: D,B,C,A
";

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example() -> Election {
        Election::parse(WORKED_EXAMPLE).unwrap()
    }

    fn set(e: &Election, names: &str) -> CandidateSet {
        names.chars().map(|n| e.candidate(&n.to_string()).unwrap()).collect()
    }

    fn c(e: &Election, n: &str) -> CandidateIndex {
        e.candidate(n).unwrap()
    }

    #[test]
    fn parses_example() {
        let e = example();
        assert_eq!(e.total_ballots(), 86);
        assert_eq!(e.groups().len(), 5);
        assert_eq!(e.num_candidates(), 4);
    }

    #[test]
    fn header_only_is_empty_election() {
        let e = Election::parse("candidates: A,B\n").unwrap();
        assert_eq!(e.total_ballots(), 0);
        assert!(e.groups().is_empty());
    }

    #[test]
    fn parse_errors() {
        let dup = Election::parse("candidates: A,B\n7: A,A,B\n").unwrap_err();
        assert!(matches!(dup, ElectionError::Parse { line: 2, .. }), "{dup}");
        assert!(dup.to_string().contains("ranked twice"));
        let unknown = Election::parse("candidates: A,B\n1: A,Z\n").unwrap_err();
        assert!(unknown.to_string().contains("unknown candidate \"Z\""));
        let count = Election::parse("candidates: A,B\nx: A\n").unwrap_err();
        assert!(count.to_string().contains("malformed count"));
        let zero = Election::parse("candidates: A,B\n0: A\n").unwrap_err();
        assert!(zero.to_string().contains("positive"));
        assert!(Election::parse("candidates:\n").is_err());
        assert!(Election::parse("candidates: A,,B\n").is_err());
        assert!(Election::parse("candidates: A,A\n").is_err());
        assert!(Election::parse("").is_err());
        assert!(Election::parse("1: A\n").is_err());
    }

    #[test]
    fn comments_blank_lines_and_merging() {
        let text = "# header comment\n\ncandidates : A , B\n  # x\n3: A, B\n2:\n\n4 : A,B\n";
        let e = Election::parse(text).unwrap();
        assert_eq!(e.total_ballots(), 9);
        assert_eq!(e.groups().len(), 2);
        assert_eq!(e.groups()[0].count, 7);
        assert!(e.groups()[1].ranking.is_empty());
        assert_eq!(Election::parse(&e.to_ballot_file()).unwrap(), e);
    }

    #[test]
    fn trailing_comments() {
        let e = Election::parse(
            "candidates: A,B # two
3: A,B   # three
2: # none
",
        )
        .unwrap();
        assert_eq!(e.names(), ["A", "B"]);
        assert_eq!(e.total_ballots(), 5);
        assert!(e.groups()[1].ranking.is_empty());
    }

    #[test]
    fn projection_examples() {
        let names = ["A", "B", "C", "D", "E", "F", "G"];
        let e = Election::from_named(&names, &[]).unwrap();
        let r = |s: &str| Ranking(s.chars().map(|n| c(&e, &n.to_string())).collect());
        assert_eq!(r("ABDC").project(set(&e, "BC")), r("BC"));
        assert_eq!(r("FDGBA").project(set(&e, "BCDE")), r("DB"));
        assert_eq!(r("FDGBA").project(e.all_candidates()), r("FDGBA"));
    }

    #[test]
    fn tally_examples() {
        let e = example();
        assert_eq!(e.tally(set(&e, "ABCD"), c(&e, "A")).unwrap(), 40);
        assert_eq!(e.tally(set(&e, "ABC"), c(&e, "B")).unwrap(), 26);
        assert_eq!(e.tally(set(&e, "AB"), c(&e, "A")).unwrap(), 60);
        assert!(matches!(e.tally(set(&e, "AB"), c(&e, "C")), Err(ElectionError::NotStanding(_))));
    }

    #[test]
    fn primary_vote_examples() {
        let e = example();
        assert_eq!(e.primary_vote(c(&e, "D")), 5);
        assert_eq!(e.primary_vote(c(&e, "C")), 20);
        let empty = Election::parse("candidates: A,B\n").unwrap();
        assert_eq!(empty.primary_vote(CandidateIndex(0)), 0);
    }

    #[test]
    fn delta_examples() {
        let e = example();
        assert_eq!(e.delta(c(&e, "A"), c(&e, "D")).unwrap(), 81);
        assert_eq!(e.delta(c(&e, "D"), c(&e, "A")).unwrap(), 5);
        assert_eq!(e.delta(c(&e, "C"), c(&e, "B")).unwrap(), 60);
        assert!(e.delta(c(&e, "C"), c(&e, "C")).is_err());
    }

    #[test]
    fn delta_standing_examples() {
        let e = example();
        assert_eq!(e.delta_standing(c(&e, "B"), c(&e, "A"), set(&e, "AB")).unwrap(), 26);
        assert_eq!(e.delta_standing(c(&e, "D"), c(&e, "A"), set(&e, "AD")).unwrap(), 5);
        assert!(e.delta_standing(c(&e, "D"), c(&e, "A"), set(&e, "BD")).is_err());
        assert!(e.delta_standing(c(&e, "D"), c(&e, "D"), set(&e, "AD")).is_err());
    }

    fn arb_election() -> impl Strategy<Value = Election> {
        (1usize..=6).prop_flat_map(|n| {
            let ranking = Just((0..n).collect::<Vec<_>>())
                .prop_shuffle()
                .prop_flat_map(move |perm| (Just(perm), 0..=n))
                .prop_map(|(perm, len)| Ranking(perm[..len].iter().map(|&i| CandidateIndex(i)).collect()));
            prop::collection::vec((ranking, 1u64..20), 0..12).prop_map(move |groups| {
                let names = (0..n).map(|i| format!("c{i}")).collect();
                Election::new(names, groups).unwrap()
            })
        })
    }

    fn arb_subset(n: usize) -> impl Strategy<Value = CandidateSet> {
        (0u64..(1 << n)).prop_map(CandidateSet)
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(e in arb_election(), bits in 0u64..64) {
            let s = CandidateSet(bits);
            for g in e.groups() {
                let p = g.ranking.project(s);
                prop_assert_eq!(p.project(s), p);
            }
        }

        #[test]
        fn tallies_conserve_ballots(e in arb_election(), bits in 0u64..64) {
            let s = CandidateSet(bits).difference(CandidateSet(!e.all_candidates().bits()));
            let (t, exhausted) = e.tallies(s);
            let sum: u64 = s.iter().map(|c| t[c.0]).sum();
            prop_assert_eq!(sum + exhausted, e.total_ballots());
            for c in s.iter() {
                prop_assert_eq!(e.tally(s, c).unwrap(), t[c.0]);
            }
        }

        #[test]
        fn primary_vote_is_full_tally(e in arb_election()) {
            for c in e.candidates() {
                prop_assert_eq!(e.primary_vote(c), e.tally(e.all_candidates(), c).unwrap());
            }
        }

        #[test]
        fn delta_standing_shrinks_with_larger_sets(e in arb_election(), extra in arb_subset(6)) {
            let n = e.num_candidates();
            prop_assume!(n >= 2);
            let extra = extra.difference(CandidateSet(!e.all_candidates().bits()));
            for c in e.candidates() {
                for x in e.candidates().filter(|&x| x != c) {
                    let pair = CandidateSet::EMPTY.with(c).with(x);
                    let small = e.delta_standing(c, x, pair).unwrap();
                    let big = e.delta_standing(c, x, pair.union(extra)).unwrap();
                    prop_assert!(small >= big);
                    // On the pair itself both statistics count projections [c] and [c, x].
                    prop_assert_eq!(small, e.delta(c, x).unwrap());
                }
            }
        }
    }
}
