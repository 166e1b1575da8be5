//! Exact margins of victory for instant-runoff (IRV) elections.

pub mod bounds;
pub mod distance;
pub mod election;
pub mod equivalence;
pub mod lp;
pub mod oracle;
pub mod search;
pub mod tabulator;
