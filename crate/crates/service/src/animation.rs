use facework_core::{Action, Move, ObjectId, Rank, TimingConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyframeKind {
    Approach,
    Grasp,
    Carry,
    Release,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Keyframe {
    pub kind: KeyframeKind,
    pub object: ObjectId,
    /// Where the robot is during this keyframe: the origin while
    /// approaching and grasping, the destination while carrying and releasing.
    pub at: Rank,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnimationScript {
    pub keyframes: Vec<Keyframe>,
    pub total_ms: u64,
}

// Relative keyframe weights out of 20.
const WEIGHTS: [(KeyframeKind, u64); 4] = [
    (KeyframeKind::Approach, 6),
    (KeyframeKind::Grasp, 3),
    (KeyframeKind::Carry, 8),
    (KeyframeKind::Release, 3),
];

fn single_move(m: Move, total: u64) -> impl Iterator<Item = Keyframe> {
    let sum: u64 = WEIGHTS.iter().map(|w| w.1).sum();
    let mut spent = 0;
    WEIGHTS.iter().enumerate().map(move |(k, &(kind, w))| {
        let duration_ms = if k + 1 == WEIGHTS.len() {
            total - spent
        } else {
            total * w / sum
        };
        spent += duration_ms;
        let at = match kind {
            KeyframeKind::Approach | KeyframeKind::Grasp => m.orig,
            KeyframeKind::Carry | KeyframeKind::Release => m.dest,
        };
        Keyframe {
            kind,
            object: m.object,
            at,
            duration_ms,
        }
    })
}

/// Robot keyframes for `action`: four per move, each move lasting
/// `timing.agent_move_animation_ms`. A swap plays its two moves back to back.
pub fn build_animation_script(action: &Action, timing: &TimingConfig) -> AnimationScript {
    let per_move = timing.agent_move_animation_ms;
    let keyframes: Vec<Keyframe> = action
        .moves()
        .flat_map(|m| single_move(m, per_move))
        .collect();
    let total_ms = keyframes.iter().map(|k| k.duration_ms).sum();
    AnimationScript {
        keyframes,
        total_ms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn timing(ms: u64) -> TimingConfig {
        TimingConfig {
            agent_move_animation_ms: ms,
            ..TimingConfig::default()
        }
    }

    #[test]
    fn add_is_four_keyframes_of_seven_seconds() {
        let s = build_animation_script(&Action::add(Move::of(2, 6, 1)), &TimingConfig::default());
        assert_eq!(s.keyframes.len(), 4);
        assert_eq!(s.total_ms, 7000);
        let kinds: Vec<_> = s.keyframes.iter().map(|k| k.kind).collect();
        assert_eq!(
            kinds,
            [
                KeyframeKind::Approach,
                KeyframeKind::Grasp,
                KeyframeKind::Carry,
                KeyframeKind::Release
            ]
        );
        assert_eq!(s.keyframes[0].at.get(), 6);
        assert_eq!(s.keyframes[3].at.get(), 1);
    }

    #[test]
    fn swap_concatenates() {
        let a = Action::swap(Move::of(1, 3, 1), Move::of(4, 1, 3));
        let s = build_animation_script(&a, &TimingConfig::default());
        assert_eq!(s.keyframes.len(), 8);
        assert_eq!(s.total_ms, 14000);
        assert_eq!(s.keyframes[4].object.get(), 4);
        assert_eq!(
            s.keyframes[..4].iter().map(|k| k.duration_ms).sum::<u64>(),
            7000
        );
    }

    #[test]
    fn durations_scale_with_timing() {
        let base = build_animation_script(&Action::add(Move::of(2, 6, 1)), &timing(7000));
        let double = build_animation_script(&Action::add(Move::of(2, 6, 1)), &timing(14000));
        for (a, b) in base.keyframes.iter().zip(&double.keyframes) {
            assert_eq!(2 * a.duration_ms, b.duration_ms);
        }
        // Rounding remainders land in the last keyframe.
        let odd = build_animation_script(&Action::add(Move::of(2, 6, 1)), &timing(1001));
        assert_eq!(odd.total_ms, 1001);
    }
}
