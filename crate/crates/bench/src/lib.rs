//! Fixtures shared by the benchmarks.

use facework_core::{Action, ActionKind, Move, MoveHistory, Ranking, TaskVariantConfig};

/// A mid-negotiation state on the first shipped variant: the human has
/// ranked the agent's least wanted items on top and just pushed back on
/// one agent move.
pub fn contested_state() -> (TaskVariantConfig, Ranking, Ranking, MoveHistory) {
    let variant = TaskVariantConfig::builtin("desert-a").expect("shipped variant");
    let human_pref = Ranking::task(&[6, 6, 6, 1, 5, 2, 3, 4]).expect("valid ranking");
    let agent =
        Action::from_gesture(&human_pref, ActionKind::Swap, Move::of(2, 6, 1)).expect("legal");
    let after = facework_core::apply_action(&human_pref, &agent).expect("legal");
    let back = agent.inverse(after.pool());
    let current = facework_core::apply_action(&after, &back).expect("legal");
    let history = MoveHistory::new(back.moves().collect(), agent.moves().collect());
    (variant, current, human_pref, history)
}
