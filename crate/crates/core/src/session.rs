//! Pause-driven turn-taking for one negotiation session.
//!
//! Every operation validates against the current state, then records one or
//! more [`Event`]s and folds them in with [`SessionState::apply_event`], which
//! is the only mutator. Replaying a log through the same fold therefore
//! reproduces the state exactly.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{select_action, AgentError, AgentProfile, Decision, Proposal};
use crate::facework::MoveHistory;
use crate::model::{apply_action, Action, ModelError, Move, Ranking, TASK_OBJECTS, TASK_SLOTS};
use crate::scoring::Score;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    InitialRanking,
    Negotiation,
    AgentProposedSubmit,
    Submitted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Human,
    Agent,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("operation not allowed in phase {phase:?} with floor {floor:?}")]
    WrongPhase { phase: Phase, floor: Party },
    #[error("the {0:?} does not hold the floor")]
    NotYourFloor(Party),
    #[error("ranking is incomplete")]
    IncompleteRanking,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("event log is corrupt at seq {seq}: {detail}")]
    CorruptLog { seq: u64, detail: String },
}

/// Durations driving the live service's turn-taking timers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimingConfig {
    /// Human inactivity after which the floor passes to the agent.
    pub human_pause_threshold_ms: u64,
    /// Window after each agent move in which the human may take the floor back.
    pub agent_inter_move_pause_ms: u64,
    /// Length of one pick-and-place animation.
    pub agent_move_animation_ms: u64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            human_pause_threshold_ms: 5000,
            agent_inter_move_pause_ms: 2000,
            agent_move_animation_ms: 7000,
        }
    }
}

impl TimingConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.human_pause_threshold_ms == 0
            || self.agent_inter_move_pause_ms == 0
            || self.agent_move_animation_ms == 0
        {
            return Err("all timing durations must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum EventKind {
    InitialRanking { ranking: Ranking },
    HumanMove { action: Action },
    AgentMove { action: Action, score: Score },
    AgentUtterance { text: String },
    FloorYield { from: Party },
    FloorClaim,
    SubmitProposed { utterance: String },
    SubmitConfirmed,
    SubmitDeclined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    /// Milliseconds since session start.
    pub timestamp: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// What one [`SessionState::agent_step`] did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AgentOutcome {
    Moved(Proposal),
    ProposedSubmit {
        utterance: String,
    },
    /// The per-turn move cap was reached; the floor went back to the human.
    YieldedFloor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionState {
    phase: Phase,
    floor: Party,
    ranking: Ranking,
    human_pref: Ranking,
    history: MoveHistory,
    event_log: Vec<Event>,
    turn_moves_pending: Vec<Move>,
    agent_moves_this_turn: u32,
}

impl Default for SessionState {
    fn default() -> Self {
        Self::new()
    }
}

impl SessionState {
    /// Fresh session awaiting the human's solo ranking. Until then the
    /// ranking holds every object in the pool.
    pub fn new() -> Self {
        let pooled =
            Ranking::task(&[TASK_SLOTS + 1; TASK_OBJECTS]).expect("all-pool ranking is valid");
        Self {
            phase: Phase::InitialRanking,
            floor: Party::Human,
            ranking: pooled.clone(),
            human_pref: pooled,
            history: MoveHistory::default(),
            event_log: Vec::new(),
            turn_moves_pending: Vec::new(),
            agent_moves_this_turn: 0,
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn floor(&self) -> Party {
        self.floor
    }

    pub fn ranking(&self) -> &Ranking {
        &self.ranking
    }

    pub fn human_pref(&self) -> &Ranking {
        &self.human_pref
    }

    pub fn history(&self) -> &MoveHistory {
        &self.history
    }

    pub fn event_log(&self) -> &[Event] {
        &self.event_log
    }

    pub fn turn_moves_pending(&self) -> &[Move] {
        &self.turn_moves_pending
    }

    pub fn agent_moves_this_turn(&self) -> u32 {
        self.agent_moves_this_turn
    }

    /// Seq of the newest event, 0 before the first.
    pub fn last_seq(&self) -> u64 {
        self.event_log.last().map_or(0, |e| e.seq)
    }

    /// Events with a seq greater than `seq`.
    pub fn events_after(&self, seq: u64) -> &[Event] {
        let start = self.event_log.partition_point(|e| e.seq <= seq);
        &self.event_log[start..]
    }

    fn wrong_phase(&self) -> SessionError {
        SessionError::WrongPhase {
            phase: self.phase,
            floor: self.floor,
        }
    }

    fn record(&mut self, timestamp: u64, kind: EventKind) -> Result<(), SessionError> {
        let event = Event {
            seq: self.last_seq() + 1,
            timestamp,
            kind,
        };
        self.apply_event(event)
    }

    /// Folds one event into the state. Used both live and during replay.
    pub fn apply_event(&mut self, event: Event) -> Result<(), SessionError> {
        let expected = self.last_seq() + 1;
        if event.seq != expected {
            return Err(SessionError::CorruptLog {
                seq: event.seq,
                detail: format!("expected seq {expected}"),
            });
        }
        let corrupt = |e: ModelError| SessionError::CorruptLog {
            seq: event.seq,
            detail: e.to_string(),
        };
        match &event.kind {
            EventKind::InitialRanking { ranking } => {
                self.ranking = ranking.clone();
                self.human_pref = ranking.clone();
                self.phase = Phase::Negotiation;
                self.floor = Party::Human;
            }
            EventKind::HumanMove { action } => {
                self.ranking = apply_action(&self.ranking, action).map_err(corrupt)?;
                self.turn_moves_pending.extend(action.moves());
            }
            EventKind::AgentMove { action, .. } => {
                self.ranking = apply_action(&self.ranking, action).map_err(corrupt)?;
                self.history.record_agent(action.moves());
                self.agent_moves_this_turn += 1;
            }
            EventKind::AgentUtterance { .. } => {}
            EventKind::FloorYield { from: Party::Human } => {
                self.floor = Party::Agent;
                self.history
                    .end_human_turn(std::mem::take(&mut self.turn_moves_pending));
                self.agent_moves_this_turn = 0;
            }
            EventKind::FloorYield { from: Party::Agent } | EventKind::FloorClaim => {
                self.floor = Party::Human;
            }
            EventKind::SubmitProposed { .. } => {
                self.phase = Phase::AgentProposedSubmit;
                self.floor = Party::Human;
            }
            EventKind::SubmitDeclined => self.phase = Phase::Negotiation,
            EventKind::SubmitConfirmed => self.phase = Phase::Submitted,
        }
        self.event_log.push(event);
        Ok(())
    }

    /// Rebuilds a session from its event log.
    pub fn replay(events: impl IntoIterator<Item = Event>) -> Result<Self, SessionError> {
        let mut state = Self::new();
        for event in events {
            state.apply_event(event)?;
        }
        Ok(state)
    }

    /// Records the human's solo ranking, which also becomes their
    /// preference for face-work, and opens negotiation.
    pub fn submit_initial_ranking(
        &mut self,
        ranking: Ranking,
        now: u64,
    ) -> Result<(), SessionError> {
        if self.phase != Phase::InitialRanking {
            return Err(self.wrong_phase());
        }
        if !ranking.same_universe(&self.ranking) {
            return Err(ModelError::UniverseMismatch.into());
        }
        if !ranking.is_complete() {
            return Err(SessionError::IncompleteRanking);
        }
        self.record(now, EventKind::InitialRanking { ranking })
    }

    pub fn human_move(&mut self, action: Action, now: u64) -> Result<(), SessionError> {
        if !matches!(self.phase, Phase::Negotiation | Phase::AgentProposedSubmit) {
            return Err(self.wrong_phase());
        }
        if self.floor != Party::Human {
            return Err(SessionError::NotYourFloor(Party::Human));
        }
        apply_action(&self.ranking, &action)?;
        if self.phase == Phase::AgentProposedSubmit {
            self.record(now, EventKind::SubmitDeclined)?;
        }
        self.record(now, EventKind::HumanMove { action })
    }

    /// The human has been idle long enough: the agent takes the floor. The
    /// board must be complete before the floor can pass.
    pub fn human_pause_elapsed(&mut self, now: u64) -> Result<(), SessionError> {
        if self.phase != Phase::Negotiation || self.floor != Party::Human {
            return Err(self.wrong_phase());
        }
        if !self.ranking.is_complete() {
            return Err(SessionError::IncompleteRanking);
        }
        self.record(now, EventKind::FloorYield { from: Party::Human })
    }

    pub fn agent_step(
        &mut self,
        profile: &AgentProfile,
        now: u64,
    ) -> Result<AgentOutcome, SessionError> {
        if self.phase != Phase::Negotiation || self.floor != Party::Agent {
            return Err(self.wrong_phase());
        }
        if self.agent_moves_this_turn >= profile.max_moves_per_turn() {
            self.record(now, EventKind::FloorYield { from: Party::Agent })?;
            return Ok(AgentOutcome::YieldedFloor);
        }
        match select_action(&self.ranking, &self.history, &self.human_pref, profile)? {
            Decision::Propose(proposal) => {
                self.record(
                    now,
                    EventKind::AgentMove {
                        action: proposal.action,
                        score: proposal.score,
                    },
                )?;
                self.record(
                    now,
                    EventKind::AgentUtterance {
                        text: proposal.utterance.clone(),
                    },
                )?;
                Ok(AgentOutcome::Moved(proposal))
            }
            Decision::Submit { utterance, .. } => {
                self.record(
                    now,
                    EventKind::SubmitProposed {
                        utterance: utterance.clone(),
                    },
                )?;
                Ok(AgentOutcome::ProposedSubmit { utterance })
            }
        }
    }

    /// The human reclaims the floor during an agent pause.
    pub fn human_interrupt(&mut self, now: u64) -> Result<(), SessionError> {
        if self.phase != Phase::Negotiation || self.floor != Party::Agent {
            return Err(self.wrong_phase());
        }
        self.record(now, EventKind::FloorClaim)
    }

    pub fn confirm_submit(&mut self, now: u64) -> Result<(), SessionError> {
        if self.phase != Phase::AgentProposedSubmit {
            return Err(self.wrong_phase());
        }
        self.record(now, EventKind::SubmitConfirmed)
    }
}

/// Line-delimited JSON event log, one record per event, flushed per append.
pub struct EventLogWriter {
    out: BufWriter<File>,
}

impl EventLogWriter {
    pub fn create(path: impl AsRef<Path>) -> io::Result<Self> {
        Ok(Self {
            out: BufWriter::new(File::create(path)?),
        })
    }

    pub fn append(&mut self, event: &Event) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, event)?;
        self.out.write_all(b"\n")?;
        self.out.flush()
    }

    pub fn append_all<'a>(
        &mut self,
        events: impl IntoIterator<Item = &'a Event>,
    ) -> io::Result<()> {
        events.into_iter().try_for_each(|e| self.append(e))
    }
}

pub fn read_event_log(path: impl AsRef<Path>) -> io::Result<Vec<Event>> {
    let reader = BufReader::new(File::open(path)?);
    let mut events = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(
            serde_json::from_str(&line)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?,
        );
    }
    Ok(events)
}
