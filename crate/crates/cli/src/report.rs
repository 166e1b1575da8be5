//! Serialized report documents. Versioned by the top-level `schema` field;
//! fields are only ever added.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use irv_margin::election::{CandidateIndex, Election};
use irv_margin::search::MarginReport;
use irv_margin::tabulator::TabulationResult;
use serde::{Deserialize, Serialize};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginDocument {
    pub schema: u32,
    pub candidates: Vec<String>,
    pub ballots: u64,
    pub mode: String,
    pub algorithm: String,
    pub bound: String,
    pub cap: Option<u64>,
    pub winner: String,
    pub elimination_order: Vec<String>,
    pub margin: u64,
    pub lrm: u64,
    pub lrm_plus: u64,
    pub witness_order: Option<Vec<String>>,
    pub nodes_scored: u64,
    pub lps_solved: u64,
    pub elapsed_ms: u64,
    pub capped: bool,
    pub tie_caveat: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundDocument {
    pub tallies: BTreeMap<String, u64>,
    pub exhausted: u64,
    pub eliminated: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieDocument {
    pub round: usize,
    pub tied: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TabulationDocument {
    pub schema: u32,
    pub candidates: Vec<String>,
    pub ballots: u64,
    pub winner: String,
    pub elimination_order: Vec<String>,
    pub rounds: Vec<RoundDocument>,
    pub tie_events: Vec<TieDocument>,
    /// Absent for single-candidate elections.
    pub lrm: Option<u64>,
    pub lrm_plus: Option<u64>,
}

fn names(e: &Election, cs: &[CandidateIndex]) -> Vec<String> {
    cs.iter().map(|&c| e.name(c).to_string()).collect()
}

pub fn margin_document(
    e: &Election,
    r: &MarginReport,
    algorithm: &str,
    bound: &str,
    cap: Option<u64>,
) -> MarginDocument {
    MarginDocument {
        schema: SCHEMA,
        candidates: e.names().to_vec(),
        ballots: e.total_ballots(),
        mode: r.mode.to_string(),
        algorithm: algorithm.to_string(),
        bound: bound.to_string(),
        cap,
        winner: e.name(r.winner).to_string(),
        elimination_order: names(e, &r.elimination_order),
        margin: r.margin,
        lrm: r.lrm,
        lrm_plus: r.lrm_plus,
        witness_order: r.witness_order.as_ref().map(|w| names(e, w)),
        nodes_scored: r.stats.nodes_scored,
        lps_solved: r.stats.lps_solved,
        elapsed_ms: r.stats.elapsed_ms,
        capped: r.capped,
        tie_caveat: r.tie_caveat,
    }
}

pub fn tabulation_document(e: &Election, t: &TabulationResult) -> TabulationDocument {
    let gap = t.final_pair().map(|(a, b)| a.abs_diff(b));
    TabulationDocument {
        schema: SCHEMA,
        candidates: e.names().to_vec(),
        ballots: e.total_ballots(),
        winner: e.name(t.winner).to_string(),
        elimination_order: names(e, &t.elimination_order),
        rounds: t
            .rounds
            .iter()
            .map(|r| RoundDocument {
                tallies: r.tallies.iter().map(|&(c, n)| (e.name(c).to_string(), n)).collect(),
                exhausted: r.exhausted,
                eliminated: r.eliminated.map(|c| e.name(c).to_string()),
            })
            .collect(),
        tie_events: t.tie_events.iter().map(|ev| TieDocument { round: ev.round, tied: names(e, &ev.tied) }).collect(),
        lrm: gap.map(|g| g.div_ceil(2)),
        lrm_plus: gap,
    }
}

fn list(v: &[String]) -> String {
    v.join(",")
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

/// `key: value` lines using the JSON field names.
pub fn margin_text(d: &MarginDocument) -> String {
    let mut out = String::new();
    let rows: [(&str, String); 17] = [
        ("candidates", list(&d.candidates)),
        ("ballots", d.ballots.to_string()),
        ("mode", d.mode.clone()),
        ("algorithm", d.algorithm.clone()),
        ("bound", d.bound.clone()),
        ("cap", opt(&d.cap)),
        ("winner", d.winner.clone()),
        ("elimination_order", list(&d.elimination_order)),
        ("margin", d.margin.to_string()),
        ("lrm", d.lrm.to_string()),
        ("lrm_plus", d.lrm_plus.to_string()),
        ("witness_order", d.witness_order.as_deref().map_or_else(|| "-".to_string(), list)),
        ("nodes_scored", d.nodes_scored.to_string()),
        ("lps_solved", d.lps_solved.to_string()),
        ("elapsed_ms", d.elapsed_ms.to_string()),
        ("capped", d.capped.to_string()),
        ("tie_caveat", d.tie_caveat.to_string()),
    ];
    for (k, v) in rows {
        let _ = writeln!(out, "{k}: {v}");
    }
    out
}

pub fn tabulation_text(d: &TabulationDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "candidates: {}", list(&d.candidates));
    let _ = writeln!(out, "ballots: {}", d.ballots);
    for (i, r) in d.rounds.iter().enumerate() {
        let tallies: Vec<String> =
            d.candidates.iter().filter_map(|c| r.tallies.get(c).map(|n| format!("{c}={n}"))).collect();
        let _ = write!(out, "round {}: {} exhausted={}", i + 1, tallies.join(" "), r.exhausted);
        if let Some(x) = &r.eliminated {
            let _ = write!(out, " eliminated={x}");
        }
        out.push('\n');
    }
    for t in &d.tie_events {
        let _ = writeln!(out, "tie in round {}: {}", t.round + 1, list(&t.tied));
    }
    let _ = writeln!(out, "winner: {}", d.winner);
    let _ = writeln!(out, "elimination_order: {}", list(&d.elimination_order));
    let _ = writeln!(out, "lrm: {}", opt(&d.lrm));
    let _ = writeln!(out, "lrm_plus: {}", opt(&d.lrm_plus));
    out
}
