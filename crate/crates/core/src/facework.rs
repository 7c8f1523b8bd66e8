//! The decorum factor applied to each candidate move.
//!
//! Every move starts at [`Decorum::Neutral`]. A move that undoes one of the
//! human's moves from their last turn, or that re-issues one of the agent's
//! own earlier placements, is [`Decorum::Forbidden`]. Otherwise a move that
//! puts an object where both the agent and the human initially wanted it is
//! [`Decorum::Agreement`]. The prohibitions take precedence over agreement.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Action, Move, Ranking};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Decorum {
    Forbidden = 0,
    Neutral = 1,
    Agreement = 2,
}

impl Decorum {
    pub fn factor(self) -> i64 {
        self as i64
    }
}

impl From<Decorum> for u8 {
    fn from(d: Decorum) -> u8 {
        d as u8
    }
}

impl TryFrom<u8> for Decorum {
    type Error = String;
    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            0 => Ok(Decorum::Forbidden),
            1 => Ok(Decorum::Neutral),
            2 => Ok(Decorum::Agreement),
            other => Err(format!("face-work factor must be 0, 1 or 2, got {other}")),
        }
    }
}

impl fmt::Display for Decorum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8)
    }
}

/// The moves face-work is judged against: everything the human did on their
/// last turn, and every move the agent has made this session.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveHistory {
    human_last_turn: Vec<Move>,
    agent_all: Vec<Move>,
}

impl MoveHistory {
    pub fn new(human_last_turn: Vec<Move>, agent_all: Vec<Move>) -> Self {
        Self {
            human_last_turn,
            agent_all,
        }
    }

    pub fn human_last_turn(&self) -> &[Move] {
        &self.human_last_turn
    }

    pub fn agent_all(&self) -> &[Move] {
        &self.agent_all
    }

    /// Replaces the human's last turn wholesale.
    pub fn end_human_turn(&mut self, moves: Vec<Move>) {
        self.human_last_turn = moves;
    }

    pub fn record_agent(&mut self, moves: impl IntoIterator<Item = Move>) {
        self.agent_all.extend(moves);
    }
}

/// `m` sends an object back to where the human moved it from last turn.
pub fn is_reversal(m: &Move, history: &MoveHistory) -> bool {
    history
        .human_last_turn
        .iter()
        .any(|h| h.object == m.object && h.orig == m.dest)
}

/// `m` places an object where the agent already placed it once.
pub fn is_repeat(m: &Move, history: &MoveHistory) -> bool {
    history
        .agent_all
        .iter()
        .any(|a| a.object == m.object && a.dest == m.dest)
}

/// `m` puts an object at the rank both parties preferred for it.
pub fn seeks_agreement(m: &Move, agent_pref: &Ranking, human_pref: &Ranking) -> bool {
    match (agent_pref.rank_of(m.object), human_pref.rank_of(m.object)) {
        (Ok(a), Ok(h)) => m.dest == a && m.dest == h,
        _ => false,
    }
}

pub fn facework_factor(
    m: &Move,
    history: &MoveHistory,
    agent_pref: &Ranking,
    human_pref: &Ranking,
) -> Decorum {
    if is_reversal(m, history) || is_repeat(m, history) {
        Decorum::Forbidden
    } else if seeks_agreement(m, agent_pref, human_pref) {
        Decorum::Agreement
    } else {
        Decorum::Neutral
    }
}

/// Face-work of a whole action. A swap is forbidden if either of its moves
/// is, and otherwise takes the better of the two.
pub fn action_facework(
    action: &Action,
    history: &MoveHistory,
    agent_pref: &Ranking,
    human_pref: &Ranking,
) -> Decorum {
    let primary = facework_factor(&action.primary, history, agent_pref, human_pref);
    match action.displaced {
        None => primary,
        Some(d) => {
            let displaced = facework_factor(&d, history, agent_pref, human_pref);
            if primary == Decorum::Forbidden || displaced == Decorum::Forbidden {
                Decorum::Forbidden
            } else {
                primary.max(displaced)
            }
        }
    }
}
