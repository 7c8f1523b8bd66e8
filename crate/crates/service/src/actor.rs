//! One session's event loop, independent of any transport. Time is passed
//! in explicitly as milliseconds since the session was created, so the
//! turn-taking timers are deterministic under test.

use std::sync::Arc;

use facework_core::model::{TASK_OBJECTS, TASK_SLOTS};
use facework_core::session::{AgentOutcome, EventLogWriter, SessionError};
use facework_core::{
    Action, AgentProfile, Move, ObjectId, Party, Phase, Ranking, SessionState, TaskVariantConfig,
    TimingConfig,
};

use crate::animation::build_animation_script;
use crate::protocol::{ClientMessage, ErrorCode, ServerMessage};

/// What the timers are waiting for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activity {
    /// No timer: before the solo ranking, while a submit proposal is open,
    /// and after submission.
    Idle,
    /// Human holds the floor; the agent takes it at `deadline` unless the
    /// human moves first.
    HumanClock { deadline: u64 },
    /// The robot is carrying an object. An interrupt received now is held
    /// until the animation ends.
    Animating { until: u64, interrupt_queued: bool },
    /// Pause after an agent move, during which the human may take the floor.
    Pausing { until: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outbound {
    /// To the connection whose message caused it.
    Reply(ServerMessage),
    /// To every connection attached to the session.
    Broadcast(ServerMessage),
}

impl Outbound {
    pub fn message(&self) -> &ServerMessage {
        match self {
            Outbound::Reply(m) | Outbound::Broadcast(m) => m,
        }
    }
}

pub struct SessionActor {
    variant: Arc<TaskVariantConfig>,
    profile: AgentProfile,
    state: SessionState,
    activity: Activity,
    clock: u64,
    log: Option<EventLogWriter>,
    persisted_seq: u64,
}

impl SessionActor {
    pub fn new(
        variant: Arc<TaskVariantConfig>,
        facework_enabled: bool,
        seed: u64,
        log: Option<EventLogWriter>,
    ) -> Self {
        let profile = variant.agent_profile(facework_enabled, seed);
        Self {
            variant,
            profile,
            state: SessionState::new(),
            activity: Activity::Idle,
            clock: 0,
            log,
            persisted_seq: 0,
        }
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn activity(&self) -> Activity {
        self.activity
    }

    pub fn variant(&self) -> &TaskVariantConfig {
        &self.variant
    }

    fn timing(&self) -> TimingConfig {
        self.variant.timing
    }

    /// When [`on_tick`](Self::on_tick) next has work to do.
    pub fn next_deadline(&self) -> Option<u64> {
        match self.activity {
            Activity::Idle => None,
            Activity::HumanClock { deadline } => Some(deadline),
            Activity::Animating { until, .. } | Activity::Pausing { until } => Some(until),
        }
    }

    pub fn state_message(&self) -> ServerMessage {
        ServerMessage::State {
            seq: self.state.last_seq(),
            ranking: self.state.ranking().clone(),
            floor: self.state.floor(),
            phase: self.state.phase(),
        }
    }

    /// Sent to a connection when it attaches.
    pub fn welcome(&self) -> Vec<ServerMessage> {
        let mut out = vec![ServerMessage::Variant {
            items: self.variant.items.clone(),
            timing: self.timing(),
        }];
        if let Phase::AgentProposedSubmit = self.state.phase() {
            if let Some(utterance) = self.open_proposal() {
                out.push(ServerMessage::SubmitProposed { utterance });
            }
        }
        out.push(self.state_message());
        out
    }

    fn open_proposal(&self) -> Option<String> {
        self.state
            .event_log()
            .iter()
            .rev()
            .find_map(|e| match &e.kind {
                facework_core::EventKind::SubmitProposed { utterance } => Some(utterance.clone()),
                _ => None,
            })
    }

    pub fn handle_text(&mut self, text: &str, now: u64) -> Vec<Outbound> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle_client(msg, now),
            Err(e) => {
                let mut out = self.on_tick(now);
                out.push(Outbound::Reply(ServerMessage::error(
                    ErrorCode::Protocol,
                    e.to_string(),
                )));
                out
            }
        }
    }

    pub fn handle_client(&mut self, msg: ClientMessage, now: u64) -> Vec<Outbound> {
        let mut out = self.on_tick(now);
        let now = self.advance(now);
        let result = match msg {
            ClientMessage::Hello { .. } => {
                out.extend(self.welcome().into_iter().map(Outbound::Reply));
                Ok(())
            }
            ClientMessage::Resync => {
                out.push(Outbound::Reply(self.state_message()));
                Ok(())
            }
            ClientMessage::InitialRanking { slots } => self.initial_ranking(&slots, now, &mut out),
            ClientMessage::Move {
                kind,
                object,
                orig,
                dest,
            } => self.human_move(kind, Move::new(object, orig, dest), now, &mut out),
            ClientMessage::Interrupt => self.interrupt(now, &mut out),
            ClientMessage::ConfirmSubmit => self.state.confirm_submit(now).map(|()| {
                self.activity = Activity::Idle;
                out.push(Outbound::Broadcast(self.state_message()));
            }),
        };
        if let Err(e) = result {
            out.push(Outbound::Reply(ServerMessage::error(
                ErrorCode::from(&e),
                e.to_string(),
            )));
        }
        self.persist();
        out
    }

    /// Fires every timer due at or before `now`.
    pub fn on_tick(&mut self, now: u64) -> Vec<Outbound> {
        let mut out = Vec::new();
        while let Some(due) = self.next_deadline().filter(|&d| d <= now) {
            let t = self.advance(due);
            match self.activity {
                Activity::Idle => unreachable!("idle has no deadline"),
                Activity::HumanClock { .. } => match self.state.human_pause_elapsed(t) {
                    Ok(()) => {
                        out.push(Outbound::Broadcast(self.state_message()));
                        self.agent_step(t, &mut out);
                    }
                    Err(SessionError::IncompleteRanking) => {
                        self.activity = Activity::HumanClock {
                            deadline: t + self.timing().human_pause_threshold_ms,
                        };
                    }
                    Err(e) => self.fail(e, &mut out),
                },
                Activity::Animating {
                    interrupt_queued, ..
                } => {
                    self.activity = Activity::Pausing {
                        until: t + self.timing().agent_inter_move_pause_ms,
                    };
                    if interrupt_queued {
                        if let Err(e) = self.take_floor(t, &mut out) {
                            self.fail(e, &mut out);
                        }
                    }
                }
                Activity::Pausing { .. } => self.agent_step(t, &mut out),
            }
        }
        self.persist();
        out
    }

    fn advance(&mut self, t: u64) -> u64 {
        self.clock = self.clock.max(t);
        self.clock
    }

    fn arm_human_clock(&mut self, now: u64) {
        self.activity = Activity::HumanClock {
            deadline: now + self.timing().human_pause_threshold_ms,
        };
    }

    fn initial_ranking(
        &mut self,
        slots: &[ObjectId],
        now: u64,
        out: &mut Vec<Outbound>,
    ) -> Result<(), SessionError> {
        if slots.len() != usize::from(TASK_SLOTS) {
            return Err(SessionError::IncompleteRanking);
        }
        let ranking = Ranking::from_order(TASK_OBJECTS, TASK_SLOTS, slots)?;
        self.state.submit_initial_ranking(ranking, now)?;
        self.arm_human_clock(now);
        out.push(Outbound::Broadcast(self.state_message()));
        Ok(())
    }

    fn human_move(
        &mut self,
        kind: facework_core::ActionKind,
        primary: Move,
        now: u64,
        out: &mut Vec<Outbound>,
    ) -> Result<(), SessionError> {
        if self.state.phase() == Phase::Negotiation && self.state.floor() == Party::Agent {
            return Err(SessionError::NotYourFloor(Party::Human));
        }
        let action = Action::from_gesture(self.state.ranking(), kind, primary)?;
        self.state.human_move(action, now)?;
        self.arm_human_clock(now);
        out.push(Outbound::Broadcast(self.state_message()));
        Ok(())
    }

    fn interrupt(&mut self, now: u64, out: &mut Vec<Outbound>) -> Result<(), SessionError> {
        match self.activity {
            Activity::Animating { until, .. } => {
                self.activity = Activity::Animating {
                    until,
                    interrupt_queued: true,
                };
                Ok(())
            }
            Activity::Pausing { .. } => self.take_floor(now, out),
            _ => Err(SessionError::WrongPhase {
                phase: self.state.phase(),
                floor: self.state.floor(),
            }),
        }
    }

    fn take_floor(&mut self, now: u64, out: &mut Vec<Outbound>) -> Result<(), SessionError> {
        self.state.human_interrupt(now)?;
        self.arm_human_clock(now);
        out.push(Outbound::Broadcast(self.state_message()));
        Ok(())
    }

    fn agent_step(&mut self, now: u64, out: &mut Vec<Outbound>) {
        match self.state.agent_step(&self.profile, now) {
            Ok(AgentOutcome::Moved(p)) => {
                let script = build_animation_script(&p.action, &self.timing());
                self.activity = Activity::Animating {
                    until: now + script.total_ms,
                    interrupt_queued: false,
                };
                out.push(Outbound::Broadcast(ServerMessage::Animation {
                    script,
                    utterance: p.utterance,
                }));
                out.push(Outbound::Broadcast(self.state_message()));
            }
            Ok(AgentOutcome::ProposedSubmit { utterance }) => {
                self.activity = Activity::Idle;
                out.push(Outbound::Broadcast(ServerMessage::SubmitProposed {
                    utterance,
                }));
                out.push(Outbound::Broadcast(self.state_message()));
            }
            Ok(AgentOutcome::YieldedFloor) => {
                self.arm_human_clock(now);
                out.push(Outbound::Broadcast(self.state_message()));
            }
            Err(e) => self.fail(e, out),
        }
    }

    /// An error no client caused. Park the timers and tell everyone.
    fn fail(&mut self, e: SessionError, out: &mut Vec<Outbound>) {
        tracing::error!(error = %e, "session step failed");
        self.activity = Activity::Idle;
        out.push(Outbound::Broadcast(ServerMessage::error(
            ErrorCode::Internal,
            e.to_string(),
        )));
    }

    fn persist(&mut self) {
        let Some(log) = self.log.as_mut() else { return };
        let fresh = self.state.events_after(self.persisted_seq);
        if fresh.is_empty() {
            return;
        }
        match log.append_all(fresh) {
            Ok(()) => self.persisted_seq = self.state.last_seq(),
            Err(e) => tracing::warn!(error = %e, "event log write failed; will retry"),
        }
    }
}
