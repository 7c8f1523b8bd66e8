//! Headless episodes: a scripted human negotiates with the agent through the
//! same session state machine the live service drives, with pauses turned
//! into explicit calls and a logical clock.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, TaskVariantConfig};
use crate::facework::{is_repeat, is_reversal};
use crate::model::{
    apply_action, negotiation_actions, Action, ObjectId, Ranking, TASK_OBJECTS, TASK_SLOTS,
};
use crate::scoring::{distance, merit};
use crate::session::{AgentOutcome, EventKind, EventLogWriter, Phase, SessionError, SessionState};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid batch spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Facework,
    Baseline,
}

impl Condition {
    pub fn facework_enabled(self) -> bool {
        self == Condition::Facework
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Facework => "facework",
            Condition::Baseline => "baseline",
        })
    }
}

impl std::str::FromStr for Condition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "facework" => Ok(Condition::Facework),
            "baseline" => Ok(Condition::Baseline),
            other => Err(format!(
                "unknown condition {other:?} (expected facework or baseline)"
            )),
        }
    }
}

fn default_reverse_prob() -> f64 {
    0.5
}

/// How a scripted human behaves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyKind {
    /// Never touches an object the agent has moved; makes at most one
    /// improving move per turn; accepts every submit proposal.
    Compliant,
    /// Undoes the agent's last action with probability `p`, otherwise
    /// improves its own ranking using any object.
    Stubborn {
        #[serde(default = "default_reverse_prob")]
        p: f64,
    },
    /// Makes a uniformly random swap with probability `move_prob`.
    Random {
        #[serde(default = "default_reverse_prob")]
        move_prob: f64,
    },
    /// Holds the agent's own preference and never moves.
    Oracle,
}

impl PolicyKind {
    pub fn label(&self) -> &'static str {
        match self {
            PolicyKind::Compliant => "compliant",
            PolicyKind::Stubborn { .. } => "stubborn",
            PolicyKind::Random { .. } => "random",
            PolicyKind::Oracle => "oracle",
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let prob = match self {
            PolicyKind::Stubborn { p } => *p,
            PolicyKind::Random { move_prob } => *move_prob,
            _ => return Ok(()),
        };
        if (0.0..=1.0).contains(&prob) {
            Ok(())
        } else {
            Err(HarnessError::Spec(format!(
                "{} probability {prob} is outside [0, 1]",
                self.label()
            )))
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a.parse::<f64>().map_err(|e| format!("{s}: {e}"))?)),
            None => (s, None),
        };
        match name {
            "compliant" => Ok(PolicyKind::Compliant),
            "oracle" => Ok(PolicyKind::Oracle),
            "stubborn" => Ok(PolicyKind::Stubborn {
                p: arg.unwrap_or_else(default_reverse_prob),
            }),
            "random" => Ok(PolicyKind::Random {
                move_prob: arg.unwrap_or_else(default_reverse_prob),
            }),
            other => Err(format!("unknown policy {other:?}")),
        }
    }
}

/// What the scripted human does when the agent proposes to submit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Response {
    Confirm,
    Decline(Action),
}

#[derive(Debug, Clone)]
pub struct ScriptedPolicy {
    kind: PolicyKind,
    own_pref: Ranking,
    rng: ChaCha8Rng,
}

impl ScriptedPolicy {
    pub fn new(kind: PolicyKind, own_pref: Ranking, rng_seed: u64) -> Result<Self, HarnessError> {
        kind.validate()?;
        if !own_pref.is_complete() {
            return Err(HarnessError::Spec(
                "scripted preference must be complete".into(),
            ));
        }
        Ok(Self {
            kind,
            own_pref,
            rng: ChaCha8Rng::seed_from_u64(rng_seed),
        })
    }

    /// A policy whose preference is drawn from `seed`, except the oracle,
    /// which adopts the agent's preference.
    pub fn for_variant(
        kind: PolicyKind,
        variant: &TaskVariantConfig,
        seed: u64,
    ) -> Result<Self, HarnessError> {
        let own_pref = match kind {
            PolicyKind::Oracle => variant.agent_preferred.clone(),
            _ => random_complete_ranking(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x0005_eed0_fa11)),
        };
        Self::new(kind, own_pref, seed)
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn own_pref(&self) -> &Ranking {
        &self.own_pref
    }

    /// The human's move for this turn, if any.
    pub fn take_turn(&mut self, state: &SessionState) -> Option<Action> {
        match self.kind {
            PolicyKind::Oracle => None,
            PolicyKind::Compliant => self.best_own_move(state, true),
            PolicyKind::Stubborn { p } => {
                if self.rng.random_bool(p) {
                    if let Some(undo) = undo_last_agent_action(state) {
                        return Some(undo);
                    }
                }
                self.best_own_move(state, false)
            }
            PolicyKind::Random { move_prob } => {
                if self.rng.random_bool(move_prob) {
                    negotiation_actions(state.ranking())
                        .choose(&mut self.rng)
                        .copied()
                } else {
                    None
                }
            }
        }
    }

    pub fn respond_to_proposal(&mut self, state: &SessionState) -> Response {
        let decline = match self.kind {
            PolicyKind::Oracle | PolicyKind::Compliant => None,
            PolicyKind::Stubborn { p } => {
                if self.rng.random_bool(p) {
                    undo_last_agent_action(state)
                } else {
                    None
                }
            }
            PolicyKind::Random { .. } => {
                if self.rng.random_bool(0.5) {
                    negotiation_actions(state.ranking())
                        .choose(&mut self.rng)
                        .copied()
                } else {
                    None
                }
            }
        };
        decline.map_or(Response::Confirm, Response::Decline)
    }

    fn best_own_move(&self, state: &SessionState, spare_agent_objects: bool) -> Option<Action> {
        let current = state.ranking();
        let touched: Vec<ObjectId> = state
            .history()
            .agent_all()
            .iter()
            .map(|m| m.object)
            .collect();
        let status_quo = merit(current, &self.own_pref).ok()?;
        let mut best: Option<(i64, Action)> = None;
        for action in negotiation_actions(current) {
            if spare_agent_objects && action.moves().any(|m| touched.contains(&m.object)) {
                continue;
            }
            let Ok(next) = apply_action(current, &action) else {
                continue;
            };
            let Ok(value) = merit(&next, &self.own_pref) else {
                continue;
            };
            if value > status_quo && best.is_none_or(|(b, _)| value > b) {
                best = Some((value, action));
            }
        }
        best.map(|(_, a)| a)
    }
}

fn undo_last_agent_action(state: &SessionState) -> Option<Action> {
    let last = state.event_log().iter().rev().find_map(|e| match &e.kind {
        EventKind::AgentMove { action, .. } => Some(*action),
        _ => None,
    })?;
    let undo = last.inverse(state.ranking().pool());
    apply_action(state.ranking(), &undo)
        .ok()
        .filter(Ranking::is_complete)
        .map(|_| undo)
}

/// Uniformly random choice of five ordered objects out of eight.
pub fn random_complete_ranking(rng: &mut impl Rng) -> Ranking {
    let mut ids: Vec<ObjectId> = (1..=TASK_OBJECTS as u8)
        .map(|k| ObjectId::new(k).unwrap())
        .collect();
    ids.shuffle(rng);
    Ranking::from_order(TASK_OBJECTS, TASK_SLOTS, &ids[..usize::from(TASK_SLOTS)])
        .expect("five distinct objects")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub turns: u32,
    pub moves_total: u32,
    pub human_moves: u32,
    pub agent_moves: u32,
    pub final_distance_to_agent_pref: u32,
    pub final_distance_to_human_pref: u32,
    /// Agent move tuples that undo a move from the human's last turn.
    pub reversals_attempted_by_agent: u32,
    /// Agent move tuples that re-place an object where the agent put it before.
    pub repeats_attempted_by_agent: u32,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub metrics: RunMetrics,
    pub state: SessionState,
}

// Logical durations for the simulated clock.
const HUMAN_MOVE_MS: u64 = 1500;

pub fn run_episode(
    variant: &TaskVariantConfig,
    policy: ScriptedPolicy,
    facework_enabled: bool,
    seed: u64,
    max_turns: u32,
) -> Result<RunMetrics, HarnessError> {
    run_episode_full(variant, policy, facework_enabled, seed, max_turns).map(|o| o.metrics)
}

/// Like [`run_episode`], also returning the final session for inspection
/// or persistence.
pub fn run_episode_full(
    variant: &TaskVariantConfig,
    mut policy: ScriptedPolicy,
    facework_enabled: bool,
    seed: u64,
    max_turns: u32,
) -> Result<EpisodeOutcome, HarnessError> {
    if max_turns == 0 {
        return Err(HarnessError::Spec("max_turns must be positive".into()));
    }
    let profile = variant.agent_profile(facework_enabled, seed);
    let timing = variant.timing;
    let mut now = 0;
    let mut state = SessionState::new();
    state.submit_initial_ranking(policy.own_pref().clone(), now)?;

    let mut turns = 0;
    let mut human_moves = 0;
    let mut agent_moves = 0;
    let mut reversals = 0;
    let mut repeats = 0;

    while turns < max_turns && state.phase() != Phase::Submitted {
        turns += 1;

        let human_action = match state.phase() {
            Phase::AgentProposedSubmit => match policy.respond_to_proposal(&state) {
                Response::Confirm => {
                    now += HUMAN_MOVE_MS;
                    state.confirm_submit(now)?;
                    break;
                }
                Response::Decline(a) => Some(a),
            },
            _ => policy.take_turn(&state),
        };
        if let Some(action) = human_action {
            now += HUMAN_MOVE_MS;
            state.human_move(action, now)?;
            human_moves += 1;
        }
        now += timing.human_pause_threshold_ms;
        state.human_pause_elapsed(now)?;

        loop {
            let before = state.history().clone();
            match state.agent_step(&profile, now)? {
                AgentOutcome::Moved(p) => {
                    agent_moves += 1;
                    for m in p.action.moves() {
                        reversals += u32::from(is_reversal(&m, &before));
                        repeats += u32::from(is_repeat(&m, &before));
                    }
                    now += timing.agent_move_animation_ms * p.action.moves().count() as u64
                        + timing.agent_inter_move_pause_ms;
                }
                AgentOutcome::ProposedSubmit { .. } | AgentOutcome::YieldedFloor => break,
            }
        }
    }

    let metrics = RunMetrics {
        turns,
        moves_total: human_moves + agent_moves,
        human_moves,
        agent_moves,
        final_distance_to_agent_pref: distance(state.ranking(), &variant.agent_preferred)
            .map_err(SessionError::from)?,
        final_distance_to_human_pref: distance(state.ranking(), state.human_pref())
            .map_err(SessionError::from)?,
        reversals_attempted_by_agent: reversals,
        repeats_attempted_by_agent: repeats,
        converged: state.phase() == Phase::Submitted,
    };
    Ok(EpisodeOutcome { metrics, state })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BatchSpecFile {
    variants: Vec<String>,
    conditions: Vec<Condition>,
    policies: Vec<PolicyKind>,
    seeds: Vec<u64>,
    max_turns: u32,
    #[serde(default)]
    order_seed: u64,
}

/// Conditions × policies × seeds. Each (policy, seed) pair plays every
/// condition once, in a seeded random order, and each condition is paired
/// with a different variant where possible.
#[derive(Debug, Clone)]
pub struct BatchSpec {
    pub variants: Vec<TaskVariantConfig>,
    pub conditions: Vec<Condition>,
    pub policies: Vec<PolicyKind>,
    pub seeds: Vec<u64>,
    pub max_turns: u32,
    pub order_seed: u64,
}

impl BatchSpec {
    /// Parses a TOML batch spec. Variant entries ending in `.toml` are
    /// loaded relative to `base_dir`; anything else names a shipped variant.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, HarnessError> {
        let file: BatchSpecFile =
            toml::from_str(text).map_err(|e| HarnessError::Spec(e.to_string()))?;
        let variants = file
            .variants
            .iter()
            .map(|v| resolve_variant(v, base_dir))
            .collect::<Result<Vec<_>, _>>()?;
        let spec = Self {
            variants,
            conditions: file.conditions,
            policies: file.policies,
            seeds: file.seeds,
            max_turns: file.max_turns,
            order_seed: file.order_seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let empty = |what: &str| Err(HarnessError::Spec(format!("no {what} listed")));
        if self.variants.is_empty() {
            return empty("variants");
        }
        if self.conditions.is_empty() {
            return empty("conditions");
        }
        if self.policies.is_empty() {
            return empty("policies");
        }
        if self.seeds.is_empty() {
            return empty("seeds");
        }
        if self.max_turns == 0 {
            return Err(HarnessError::Spec("max_turns must be positive".into()));
        }
        let mut conds = self.conditions.clone();
        conds.sort();
        conds.dedup();
        if conds.len() != self.conditions.len() {
            return Err(HarnessError::Spec("conditions must be distinct".into()));
        }
        self.policies.iter().try_for_each(PolicyKind::validate)
    }
}

/// A variant reference: a path to a `.toml` file or a shipped variant id.
pub fn resolve_variant(
    reference: &str,
    base_dir: &Path,
) -> Result<TaskVariantConfig, HarnessError> {
    if reference.ends_with(".toml") {
        let path = PathBuf::from(reference);
        let path = if path.is_absolute() {
            path
        } else {
            base_dir.join(path)
        };
        Ok(TaskVariantConfig::load(path)?)
    } else {
        Ok(TaskVariantConfig::builtin(reference)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub policy: String,
    pub seed: u64,
    /// 1-based position of this condition in the participant's sequence.
    pub order: u32,
    pub condition: Condition,
    pub variant: String,
    pub turns: u32,
    pub moves_total: u32,
    pub human_moves: u32,
    pub agent_moves: u32,
    pub final_distance_to_agent_pref: u32,
    pub final_distance_to_human_pref: u32,
    pub reversals_attempted_by_agent: u32,
    pub repeats_attempted_by_agent: u32,
    pub converged: bool,
    /// Event log file name, when logs were written.
    pub log: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub condition: Condition,
    /// Policy label, or `all`.
    pub policy: String,
    pub episodes: u32,
    pub mean_turns: f64,
    pub mean_moves_total: f64,
    pub mean_final_distance_to_agent_pref: f64,
    pub mean_final_distance_to_human_pref: f64,
    pub mean_reversals_attempted_by_agent: f64,
    pub mean_repeats_attempted_by_agent: f64,
    pub converged_rate: f64,
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub rows: Vec<BatchRow>,
    pub summary: Vec<SummaryRow>,
}

fn participant_seed(order_seed: u64, policy_index: usize, seed: u64) -> u64 {
    order_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((policy_index as u64) << 32)
        .wrapping_add(seed)
}

/// Runs every episode of `spec`. When `log_dir` is given each episode's
/// event log is written there.
pub fn run_batch(spec: &BatchSpec, log_dir: Option<&Path>) -> Result<BatchResult, HarnessError> {
    spec.validate()?;
    if let Some(dir) = log_dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut rows = Vec::new();
    for (pi, kind) in spec.policies.iter().enumerate() {
        for &seed in &spec.seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(participant_seed(spec.order_seed, pi, seed));
            let mut conditions = spec.conditions.clone();
            conditions.shuffle(&mut rng);
            let mut variants: Vec<&TaskVariantConfig> = spec.variants.iter().collect();
            variants.shuffle(&mut rng);

            for (pos, &condition) in conditions.iter().enumerate() {
                let variant = variants[pos % variants.len()];
                let policy = ScriptedPolicy::for_variant(*kind, variant, seed)?;
                let outcome = run_episode_full(
                    variant,
                    policy,
                    condition.facework_enabled(),
                    seed,
                    spec.max_turns,
                )?;
                let log = match log_dir {
                    Some(dir) => {
                        let name = format!(
                            "{}-s{}-{}-{}.jsonl",
                            kind.label(),
                            seed,
                            condition,
                            variant.variant_id
                        );
                        EventLogWriter::create(dir.join(&name))?
                            .append_all(outcome.state.event_log())?;
                        name
                    }
                    None => String::new(),
                };
                let m = outcome.metrics;
                rows.push(BatchRow {
                    policy: kind.label().to_string(),
                    seed,
                    order: pos as u32 + 1,
                    condition,
                    variant: variant.variant_id.clone(),
                    turns: m.turns,
                    moves_total: m.moves_total,
                    human_moves: m.human_moves,
                    agent_moves: m.agent_moves,
                    final_distance_to_agent_pref: m.final_distance_to_agent_pref,
                    final_distance_to_human_pref: m.final_distance_to_human_pref,
                    reversals_attempted_by_agent: m.reversals_attempted_by_agent,
                    repeats_attempted_by_agent: m.repeats_attempted_by_agent,
                    converged: m.converged,
                    log,
                });
            }
        }
    }
    let summary = summarize(&rows);
    Ok(BatchResult { rows, summary })
}

/// Means per condition, overall and per policy.
pub fn summarize(rows: &[BatchRow]) -> Vec<SummaryRow> {
    let mut groups: Vec<(Condition, String)> = Vec::new();
    for row in rows {
        for key in [
            (row.condition, "all".to_string()),
            (row.condition, row.policy.clone()),
        ] {
            if !groups.contains(&key) {
                groups.push(key);
            }
        }
    }
    groups.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then_with(|| (a.1 != "all").cmp(&(b.1 != "all")))
    });

    groups
        .into_iter()
        .map(|(condition, policy)| {
            let members: Vec<&BatchRow> = rows
                .iter()
                .filter(|r| r.condition == condition && (policy == "all" || r.policy == policy))
                .collect();
            let n = members.len() as f64;
            let mean = |f: fn(&BatchRow) -> f64| members.iter().map(|r| f(r)).sum::<f64>() / n;
            SummaryRow {
                condition,
                policy,
                episodes: members.len() as u32,
                mean_turns: mean(|r| f64::from(r.turns)),
                mean_moves_total: mean(|r| f64::from(r.moves_total)),
                mean_final_distance_to_agent_pref: mean(|r| {
                    f64::from(r.final_distance_to_agent_pref)
                }),
                mean_final_distance_to_human_pref: mean(|r| {
                    f64::from(r.final_distance_to_human_pref)
                }),
                mean_reversals_attempted_by_agent: mean(|r| {
                    f64::from(r.reversals_attempted_by_agent)
                }),
                mean_repeats_attempted_by_agent: mean(|r| f64::from(r.repeats_attempted_by_agent)),
                converged_rate: mean(|r| f64::from(u8::from(r.converged))),
            }
        })
        .collect()
}

pub fn write_rows<W: io::Write>(rows: &[BatchRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: io::Write>(summary: &[SummaryRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for row in summary {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
