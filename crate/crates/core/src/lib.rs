//! Turn-based human–agent ranking negotiation for the adapted desert
//! survival task, with an agent whose move selection accounts for face-work.
//!
//! The agent scores each candidate action by `(C - D) * F`, where `C` counts
//! pairs ordered as in its preferred ranking, `D` is the footrule distance to
//! that ranking, and `F` is the decorum factor from [`facework`].

pub mod agent;
pub mod config;
pub mod facework;
pub mod harness;
pub mod model;
pub mod scoring;
pub mod session;

pub use agent::{select_action, AgentProfile, Decision, Proposal};
pub use config::TaskVariantConfig;
pub use facework::{action_facework, facework_factor, Decorum, MoveHistory};
pub use model::{
    apply_action, legal_actions, negotiation_actions, Action, ActionKind, Move, ObjectId, Rank,
    Ranking,
};
pub use scoring::{concordant_pairs, distance, objective, Score};
pub use session::{Event, EventKind, Party, Phase, SessionState, TimingConfig};
