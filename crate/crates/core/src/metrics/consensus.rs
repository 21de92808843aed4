use serde::{Deserialize, Serialize};

/// A radiologist's biopsy recommendation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Candidacy {
    Candid,
    NotCandid,
}

/// Majority of three recommendations: candid iff at least two readers say so.
pub fn consensus_reference(votes: [Candidacy; 3]) -> Candidacy {
    let candid = votes.iter().filter(|&&v| v == Candidacy::Candid).count();
    if candid >= 2 {
        Candidacy::Candid
    } else {
        Candidacy::NotCandid
    }
}
