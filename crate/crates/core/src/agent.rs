//! Move selection and phrasing for the negotiating agent.
//!
//! On each call the agent scores every completeness-preserving action by
//! `(C - D) * F` against its own preferred ranking, drops the face-forbidden
//! ones, and proposes the best survivor. When nothing beats the status quo it
//! proposes to submit instead.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::facework::{action_facework, Decorum, MoveHistory};
use crate::model::{
    apply_action, negotiation_actions, Action, ModelError, Move, ObjectId, Ranking,
};
use crate::scoring::{merit, objective, Score};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("no reason entry for object {0}")]
    MissingReason(ObjectId),
    #[error("preferred ranking must be complete")]
    IncompletePreference,
    #[error("max moves per turn must be at least 1")]
    ZeroMoveCap,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// What the agent says about one object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemReasons {
    /// Display name used in utterances, e.g. "knife".
    pub item: String,
    pub raise_reason: String,
    pub lower_reason: String,
}

/// Utterance templates. `{item}` and `{reason}` are substituted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Phrasebook {
    pub polite_raise: String,
    pub polite_lower: String,
    pub polite_set_aside: String,
    pub direct_raise: String,
    pub direct_lower: String,
    pub direct_set_aside: String,
    pub polite_submit: String,
    pub direct_submit: String,
}

impl Default for Phrasebook {
    fn default() -> Self {
        Self {
            polite_raise: "Could we make the {item} more important? {reason}".into(),
            polite_lower: "Could we make the {item} less important? {reason}".into(),
            polite_set_aside: "Could we set the {item} aside for now? {reason}".into(),
            direct_raise: "Make the {item} more important. {reason}".into(),
            direct_lower: "Make the {item} less important. {reason}".into(),
            direct_set_aside: "Set the {item} aside. {reason}".into(),
            polite_submit: "I think we have a ranking we can both live with. Shall we submit it?"
                .into(),
            direct_submit: "Submit the ranking.".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentProfile {
    preferred: Ranking,
    reasons: BTreeMap<ObjectId, ItemReasons>,
    facework_enabled: bool,
    tie_break_seed: u64,
    max_moves_per_turn: u32,
    phrasebook: Phrasebook,
}

impl AgentProfile {
    pub const DEFAULT_MAX_MOVES: u32 = 3;

    /// Face-work on, seed 0, three moves per turn, default phrasing.
    pub fn new(
        preferred: Ranking,
        reasons: BTreeMap<ObjectId, ItemReasons>,
    ) -> Result<Self, AgentError> {
        if !preferred.is_complete() {
            return Err(AgentError::IncompletePreference);
        }
        if let Some(missing) = preferred.objects().find(|o| !reasons.contains_key(o)) {
            return Err(AgentError::MissingReason(missing));
        }
        Ok(Self {
            preferred,
            reasons,
            facework_enabled: true,
            tie_break_seed: 0,
            max_moves_per_turn: Self::DEFAULT_MAX_MOVES,
            phrasebook: Phrasebook::default(),
        })
    }

    pub fn with_facework(mut self, enabled: bool) -> Self {
        self.facework_enabled = enabled;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.tie_break_seed = seed;
        self
    }

    pub fn with_max_moves(mut self, max: u32) -> Result<Self, AgentError> {
        if max == 0 {
            return Err(AgentError::ZeroMoveCap);
        }
        self.max_moves_per_turn = max;
        Ok(self)
    }

    pub fn with_phrasebook(mut self, phrasebook: Phrasebook) -> Self {
        self.phrasebook = phrasebook;
        self
    }

    pub fn preferred(&self) -> &Ranking {
        &self.preferred
    }

    pub fn reasons(&self) -> &BTreeMap<ObjectId, ItemReasons> {
        &self.reasons
    }

    pub fn facework_enabled(&self) -> bool {
        self.facework_enabled
    }

    pub fn tie_break_seed(&self) -> u64 {
        self.tie_break_seed
    }

    pub fn max_moves_per_turn(&self) -> u32 {
        self.max_moves_per_turn
    }

    pub fn phrasebook(&self) -> &Phrasebook {
        &self.phrasebook
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposal {
    pub action: Action,
    pub utterance: String,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Propose(Proposal),
    /// No permissible action beats the status quo `(C - D)`.
    Submit {
        utterance: String,
        status_quo: i64,
    },
}

/// A candidate that survived the face-work filter, with its score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub action: Action,
    pub score: Score,
}

/// Scores every completeness-preserving action of `current`. Forbidden
/// actions are dropped; with face-work off every action gets factor 1.
pub fn surviving_candidates(
    current: &Ranking,
    history: &MoveHistory,
    human_pref: &Ranking,
    profile: &AgentProfile,
) -> Result<Vec<Candidate>, ModelError> {
    let mut out = Vec::new();
    for action in negotiation_actions(current) {
        let facework = if profile.facework_enabled {
            action_facework(&action, history, &profile.preferred, human_pref)
        } else {
            Decorum::Neutral
        };
        if facework == Decorum::Forbidden {
            continue;
        }
        let next = apply_action(current, &action)?;
        let score = objective(&next, facework, &profile.preferred)?;
        out.push(Candidate { action, score });
    }
    Ok(out)
}

fn tie_order(a: &Action) -> (ObjectId, u8, Option<ObjectId>) {
    (
        a.primary.object,
        a.primary.dest.get(),
        a.displaced.map(|d| d.object),
    )
}

pub fn select_action(
    current: &Ranking,
    history: &MoveHistory,
    human_pref: &Ranking,
    profile: &AgentProfile,
) -> Result<Decision, AgentError> {
    let status_quo = merit(current, &profile.preferred)?;
    let candidates = surviving_candidates(current, history, human_pref, profile)?;

    let best_total = candidates.iter().map(|c| c.score.total).max();
    let best_total = match best_total {
        Some(t) if t > status_quo => t,
        _ => {
            return Ok(Decision::Submit {
                utterance: submit_utterance(profile, profile.facework_enabled),
                status_quo,
            })
        }
    };

    let mut tied: Vec<Candidate> = candidates
        .into_iter()
        .filter(|c| c.score.total == best_total)
        .collect();
    tied.sort_by_key(|c| tie_order(&c.action));
    let chosen = if tied.len() == 1 {
        tied[0]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(tie_break_stream(profile.tie_break_seed, history));
        tied[rng.random_range(0..tied.len())]
    };

    let utterance = generate_utterance(&chosen.action, profile, profile.facework_enabled)?;
    Ok(Decision::Propose(Proposal {
        action: chosen.action,
        utterance,
        score: chosen.score,
    }))
}

// Successive decisions in one session draw from different streams.
fn tie_break_stream(seed: u64, history: &MoveHistory) -> u64 {
    let step = (history.agent_all().len() + 1) as u64;
    seed ^ step.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Raise,
    Lower,
}

impl Direction {
    pub fn of(m: &Move) -> Self {
        if m.dest < m.orig {
            Direction::Raise
        } else {
            Direction::Lower
        }
    }
}

/// Phrases the action's primary move. Polite phrasing asks a question,
/// direct phrasing gives an order.
pub fn generate_utterance(
    action: &Action,
    profile: &AgentProfile,
    polite: bool,
) -> Result<String, AgentError> {
    let m = action.primary;
    let entry = profile
        .reasons
        .get(&m.object)
        .ok_or(AgentError::MissingReason(m.object))?;
    let book = &profile.phrasebook;
    let to_pool = m.dest == profile.preferred.pool();
    let (template, reason) = match (Direction::of(&m), to_pool, polite) {
        (Direction::Raise, _, true) => (&book.polite_raise, &entry.raise_reason),
        (Direction::Raise, _, false) => (&book.direct_raise, &entry.raise_reason),
        (Direction::Lower, true, true) => (&book.polite_set_aside, &entry.lower_reason),
        (Direction::Lower, true, false) => (&book.direct_set_aside, &entry.lower_reason),
        (Direction::Lower, false, true) => (&book.polite_lower, &entry.lower_reason),
        (Direction::Lower, false, false) => (&book.direct_lower, &entry.lower_reason),
    };
    Ok(template
        .replace("{item}", &entry.item)
        .replace("{reason}", reason)
        .trim_end()
        .to_string())
}

pub fn submit_utterance(profile: &AgentProfile, polite: bool) -> String {
    if polite {
        profile.phrasebook.polite_submit.clone()
    } else {
        profile.phrasebook.direct_submit.clone()
    }
}
