//! Rankings, moves and the add/remove/swap action vocabulary.
//!
//! A [`Ranking`] stores one rank per object. Ranks `1..=slots` are the ranked
//! boxes (1 is most important) and `slots + 1` is the unranked pool, which any
//! number of objects may share. The task layout has 8 objects and 5 boxes, so
//! the pool is rank 6.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of objects in every task variant.
pub const TASK_OBJECTS: usize = 8;
/// Number of ranked boxes in every task variant.
pub const TASK_SLOTS: u8 = 5;
/// Pool rank of the task layout.
pub const TASK_POOL: Rank = Rank(TASK_SLOTS + 1);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("object id {0} is outside the object universe")]
    UnknownObject(u8),
    #[error("rank {rank} is outside 1..={pool}")]
    RankOutOfRange { rank: u8, pool: u8 },
    #[error("rank {0} is held by more than one object")]
    DuplicateRank(u8),
    #[error("expected {expected} objects, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("ranking is incomplete: every box must hold exactly one object")]
    IncompleteRanking,
    #[error("rankings do not share an object universe")]
    UniverseMismatch,
    #[error("illegal action: {0}")]
    IllegalAction(#[from] Illegal),
}

/// Why an action cannot be applied to a ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Illegal {
    #[error("origin and destination are the same rank")]
    NoOp,
    #[error("object {object} is at rank {actual}, not {claimed}")]
    NotAtOrigin {
        object: ObjectId,
        claimed: Rank,
        actual: Rank,
    },
    #[error("rank {0} is already occupied")]
    Occupied(Rank),
    #[error("rank {0} is empty, nothing to swap with")]
    EmptyDestination(Rank),
    #[error("destination {0} is not a ranked box")]
    NotARankedBox(Rank),
    #[error("a remove must send the object to the pool")]
    RemoveNotToPool,
    #[error("swap counterpart does not exchange ranks with the primary move")]
    DisplacedMismatch,
    #[error("only a swap carries a displaced move")]
    UnexpectedDisplaced,
}

/// One-based object identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ObjectId(u8);

impl ObjectId {
    pub fn new(id: u8) -> Result<Self, ModelError> {
        if id == 0 {
            return Err(ModelError::UnknownObject(id));
        }
        Ok(Self(id))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based slot index.
    pub fn index(self) -> usize {
        usize::from(self.0 - 1)
    }

    fn from_index(index: usize) -> Self {
        Self(index as u8 + 1)
    }
}

impl TryFrom<u8> for ObjectId {
    type Error = ModelError;
    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<ObjectId> for u8 {
    fn from(id: ObjectId) -> u8 {
        id.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A rank value. Whether it denotes a box or the pool depends on the layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Rank(u8);

impl Rank {
    pub fn new(value: u8) -> Result<Self, ModelError> {
        if value == 0 {
            return Err(ModelError::RankOutOfRange {
                rank: value,
                pool: TASK_POOL.0,
            });
        }
        Ok(Self(value))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for Rank {
    type Error = ModelError;
    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Rank> for u8 {
    fn from(rank: Rank) -> u8 {
        rank.0
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `(object, orig, dest)`: a single object changing rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub object: ObjectId,
    pub orig: Rank,
    pub dest: Rank,
}

impl Move {
    pub fn new(object: ObjectId, orig: Rank, dest: Rank) -> Self {
        Self { object, orig, dest }
    }

    /// Shorthand for tests and fixtures. Panics on a zero id or rank.
    pub fn of(object: u8, orig: u8, dest: u8) -> Self {
        Self {
            object: ObjectId::new(object).expect("object id must be non-zero"),
            orig: Rank::new(orig).expect("rank must be non-zero"),
            dest: Rank::new(dest).expect("rank must be non-zero"),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.object, self.orig, self.dest)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Add,
    Remove,
    Swap,
}

/// An interface action. A swap carries the counterpart move of the object
/// that was sitting at the destination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub kind: ActionKind,
    #[serde(rename = "primary_move")]
    pub primary: Move,
    #[serde(
        rename = "displaced_move",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub displaced: Option<Move>,
}

impl Action {
    pub fn add(primary: Move) -> Self {
        Self {
            kind: ActionKind::Add,
            primary,
            displaced: None,
        }
    }

    pub fn remove(primary: Move) -> Self {
        Self {
            kind: ActionKind::Remove,
            primary,
            displaced: None,
        }
    }

    pub fn swap(primary: Move, displaced: Move) -> Self {
        Self {
            kind: ActionKind::Swap,
            primary,
            displaced: Some(displaced),
        }
    }

    /// Builds the action a drag gesture denotes: the object at `orig` is
    /// dropped on `dest`. For a swap the counterpart is looked up in `ranking`.
    pub fn from_gesture(
        ranking: &Ranking,
        kind: ActionKind,
        primary: Move,
    ) -> Result<Self, ModelError> {
        match kind {
            ActionKind::Add => Ok(Self::add(primary)),
            ActionKind::Remove => Ok(Self::remove(primary)),
            ActionKind::Swap => {
                ranking.check_rank(primary.dest)?;
                let other = ranking
                    .occupant(primary.dest)
                    .ok_or(Illegal::EmptyDestination(primary.dest))?;
                Ok(Self::swap(
                    primary,
                    Move::new(other, primary.dest, primary.orig),
                ))
            }
        }
    }

    /// The one or two move tuples this action consists of.
    pub fn moves(&self) -> impl Iterator<Item = Move> + '_ {
        std::iter::once(self.primary).chain(self.displaced)
    }

    pub fn involves(&self, object: ObjectId) -> bool {
        self.moves().any(|m| m.object == object)
    }

    /// The action that undoes this one in a ranking whose pool is `pool`.
    pub fn inverse(&self, pool: Rank) -> Action {
        let back = |m: Move| Move::new(m.object, m.dest, m.orig);
        match self.displaced {
            Some(d) => Action::swap(back(d), back(self.primary)),
            None if self.primary.orig == pool => Action::remove(back(self.primary)),
            None => Action::add(back(self.primary)),
        }
    }

    /// Order-independent identity: two swaps that exchange the same pair of
    /// objects are the same action regardless of which is called primary.
    pub fn canonical_key(&self) -> (ActionKind, Vec<Move>) {
        let mut moves: Vec<Move> = self.moves().collect();
        moves.sort();
        (self.kind, moves)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.displaced {
            Some(d) => write!(f, "{:?} {} / {}", self.kind, self.primary, d),
            None => write!(f, "{:?} {}", self.kind, self.primary),
        }
    }
}

/// Rank per object, indexed by [`ObjectId`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ranking {
    slots: u8,
    ranks: Vec<Rank>,
}

impl Ranking {
    /// Ranking over the task layout: 8 objects, boxes 1..=5, pool 6.
    pub fn task(ranks: &[u8]) -> Result<Self, ModelError> {
        if ranks.len() != TASK_OBJECTS {
            return Err(ModelError::WrongLength {
                expected: TASK_OBJECTS,
                got: ranks.len(),
            });
        }
        Self::with_slots(TASK_SLOTS, ranks)
    }

    /// Ranking over an arbitrary layout with `slots` boxes and pool `slots + 1`.
    pub fn with_slots(slots: u8, ranks: &[u8]) -> Result<Self, ModelError> {
        if ranks.is_empty() || ranks.len() > usize::from(u8::MAX) {
            return Err(ModelError::WrongLength {
                expected: TASK_OBJECTS,
                got: ranks.len(),
            });
        }
        let pool = slots + 1;
        let mut seen = BTreeSet::new();
        for &r in ranks {
            if r == 0 || r > pool {
                return Err(ModelError::RankOutOfRange { rank: r, pool });
            }
            if r != pool && !seen.insert(r) {
                return Err(ModelError::DuplicateRank(r));
            }
        }
        Ok(Self {
            slots,
            ranks: ranks.iter().map(|&r| Rank(r)).collect(),
        })
    }

    /// Complete ranking that places `order[k]` at rank `k + 1` and every other
    /// object in the pool.
    pub fn from_order(objects: usize, slots: u8, order: &[ObjectId]) -> Result<Self, ModelError> {
        if order.len() != usize::from(slots) {
            return Err(ModelError::IncompleteRanking);
        }
        let mut ranks = vec![slots + 1; objects];
        for (k, obj) in order.iter().enumerate() {
            let slot = ranks
                .get_mut(obj.index())
                .ok_or(ModelError::UnknownObject(obj.get()))?;
            *slot = k as u8 + 1;
        }
        Self::with_slots(slots, &ranks)
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Number of ranked boxes.
    pub fn slots(&self) -> u8 {
        self.slots
    }

    pub fn pool(&self) -> Rank {
        Rank(self.slots + 1)
    }

    pub fn is_boxed(&self, rank: Rank) -> bool {
        rank.0 >= 1 && rank.0 <= self.slots
    }

    pub fn ranks(&self) -> &[Rank] {
        &self.ranks
    }

    pub fn to_vec(&self) -> Vec<u8> {
        self.ranks.iter().map(|r| r.0).collect()
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectId> {
        (0..self.ranks.len()).map(ObjectId::from_index)
    }

    pub fn rank_of(&self, object: ObjectId) -> Result<Rank, ModelError> {
        self.ranks
            .get(object.index())
            .copied()
            .ok_or(ModelError::UnknownObject(object.get()))
    }

    /// The object in box `rank`, if any. Always `None` for the pool.
    pub fn occupant(&self, rank: Rank) -> Option<ObjectId> {
        if !self.is_boxed(rank) {
            return None;
        }
        self.ranks
            .iter()
            .position(|&r| r == rank)
            .map(ObjectId::from_index)
    }

    /// Every box holds exactly one object.
    pub fn is_complete(&self) -> bool {
        let filled = self.ranks.iter().filter(|r| self.is_boxed(**r)).count();
        filled == usize::from(self.slots)
    }

    pub fn same_universe(&self, other: &Ranking) -> bool {
        self.slots == other.slots && self.ranks.len() == other.ranks.len()
    }

    fn check_rank(&self, rank: Rank) -> Result<(), ModelError> {
        if rank.0 == 0 || rank > self.pool() {
            return Err(ModelError::RankOutOfRange {
                rank: rank.0,
                pool: self.pool().0,
            });
        }
        Ok(())
    }

    fn check_move(&self, m: Move) -> Result<(), ModelError> {
        let actual = self.rank_of(m.object)?;
        self.check_rank(m.orig)?;
        self.check_rank(m.dest)?;
        if m.orig == m.dest {
            return Err(Illegal::NoOp.into());
        }
        if actual != m.orig {
            return Err(Illegal::NotAtOrigin {
                object: m.object,
                claimed: m.orig,
                actual,
            }
            .into());
        }
        Ok(())
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, r) in self.ranks.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "]")
    }
}

// Rankings travel as a bare array of ranks over the task layout.
impl Serialize for Ranking {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_vec().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Ranking {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let ranks = Vec::<u8>::deserialize(deserializer)?;
        Ranking::task(&ranks).map_err(serde::de::Error::custom)
    }
}

/// Applies `action` to `ranking`, returning the new ranking.
pub fn apply_action(ranking: &Ranking, action: &Action) -> Result<Ranking, ModelError> {
    let p = action.primary;
    ranking.check_move(p)?;
    let mut next = ranking.clone();
    match action.kind {
        ActionKind::Add => {
            if action.displaced.is_some() {
                return Err(Illegal::UnexpectedDisplaced.into());
            }
            if !ranking.is_boxed(p.dest) {
                return Err(Illegal::NotARankedBox(p.dest).into());
            }
            if ranking.occupant(p.dest).is_some() {
                return Err(Illegal::Occupied(p.dest).into());
            }
            next.ranks[p.object.index()] = p.dest;
        }
        ActionKind::Remove => {
            if action.displaced.is_some() {
                return Err(Illegal::UnexpectedDisplaced.into());
            }
            if p.dest != ranking.pool() {
                return Err(Illegal::RemoveNotToPool.into());
            }
            next.ranks[p.object.index()] = p.dest;
        }
        ActionKind::Swap => {
            if !ranking.is_boxed(p.dest) {
                return Err(Illegal::NotARankedBox(p.dest).into());
            }
            let other = ranking
                .occupant(p.dest)
                .ok_or(Illegal::EmptyDestination(p.dest))?;
            let expected = Move::new(other, p.dest, p.orig);
            if action.displaced != Some(expected) {
                return Err(Illegal::DisplacedMismatch.into());
            }
            next.ranks[p.object.index()] = p.dest;
            next.ranks[other.index()] = p.orig;
        }
    }
    Ok(next)
}

/// Every action the interface vocabulary permits in `ranking`: removes of
/// boxed objects, adds into empty boxes and swaps of two objects at distinct
/// ranks (at least one boxed).
///
/// Swaps are listed once per object pair, with the object that moves to the
/// more important rank as the primary move.
pub fn legal_actions(ranking: &Ranking) -> Vec<Action> {
    let pool = ranking.pool();
    let mut out = Vec::new();
    let placed: Vec<(ObjectId, Rank)> = ranking
        .objects()
        .zip(ranking.ranks.iter().copied())
        .collect();

    for &(obj, r) in &placed {
        if ranking.is_boxed(r) {
            out.push(Action::remove(Move::new(obj, r, pool)));
        }
    }

    for dest in (1..=ranking.slots).map(Rank) {
        if ranking.occupant(dest).is_some() {
            continue;
        }
        for &(obj, r) in &placed {
            out.push(Action::add(Move::new(obj, r, dest)));
        }
    }

    for (a, &(obj_a, rank_a)) in placed.iter().enumerate() {
        for &(obj_b, rank_b) in &placed[a + 1..] {
            if rank_a == rank_b {
                continue;
            }
            let (up, down) = if rank_a < rank_b {
                ((obj_b, rank_b), (obj_a, rank_a))
            } else {
                ((obj_a, rank_a), (obj_b, rank_b))
            };
            out.push(Action::swap(
                Move::new(up.0, up.1, down.1),
                Move::new(down.0, down.1, up.1),
            ));
        }
    }
    out
}

/// The subset of [`legal_actions`] whose result keeps every box filled.
/// For a complete ranking these are exactly the swaps.
pub fn negotiation_actions(ranking: &Ranking) -> Vec<Action> {
    legal_actions(ranking)
        .into_iter()
        .filter(|a| apply_action(ranking, a).is_ok_and(|r| r.is_complete()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(ranks: &[u8]) -> Ranking {
        Ranking::task(ranks).unwrap()
    }

    #[test]
    fn add_in_place_is_rejected() {
        let base = r(&[1, 2, 3, 4, 5, 6, 6, 6]);
        let err = apply_action(&base, &Action::add(Move::of(6, 6, 6))).unwrap_err();
        assert_eq!(err, ModelError::IllegalAction(Illegal::NoOp));
    }

    #[test]
    fn remove_changes_a_single_slot() {
        let base = r(&[1, 2, 3, 4, 5, 6, 6, 6]);
        let next = apply_action(&base, &Action::remove(Move::of(1, 1, 6))).unwrap();
        assert_eq!(next.to_vec(), vec![6, 2, 3, 4, 5, 6, 6, 6]);
        assert!(!next.is_complete());
    }

    #[test]
    fn swap_exchanges_ranks() {
        let base = r(&[1, 2, 3, 4, 5, 6, 6, 6]);
        let a = Action::swap(Move::of(1, 1, 2), Move::of(2, 2, 1));
        assert_eq!(
            apply_action(&base, &a).unwrap().to_vec(),
            vec![2, 1, 3, 4, 5, 6, 6, 6]
        );
    }

    #[test]
    fn add_into_occupied_box_is_rejected() {
        let base = r(&[6, 2, 3, 4, 5, 6, 6, 6]);
        let err = apply_action(&base, &Action::add(Move::of(6, 6, 2))).unwrap_err();
        assert_eq!(err, ModelError::IllegalAction(Illegal::Occupied(Rank(2))));
        let ok = apply_action(&base, &Action::add(Move::of(6, 6, 1))).unwrap();
        assert!(ok.is_complete());
    }

    #[test]
    fn wrong_origin_is_rejected() {
        let base = r(&[1, 2, 3, 4, 5, 6, 6, 6]);
        let err = apply_action(&base, &Action::remove(Move::of(2, 1, 6))).unwrap_err();
        assert!(matches!(
            err,
            ModelError::IllegalAction(Illegal::NotAtOrigin { .. })
        ));
    }

    #[test]
    fn swap_counterpart_must_match() {
        let base = r(&[1, 2, 3, 4, 5, 6, 6, 6]);
        let bad = Action::swap(Move::of(1, 1, 2), Move::of(3, 3, 1));
        assert_eq!(
            apply_action(&base, &bad).unwrap_err(),
            ModelError::IllegalAction(Illegal::DisplacedMismatch)
        );
    }

    #[test]
    fn complete_ranking_offers_removes_and_promotions() {
        let base = r(&[1, 2, 3, 4, 5, 6, 6, 6]);
        let actions = legal_actions(&base);
        for obj in 1..=5u8 {
            assert!(actions.contains(&Action::remove(Move::of(obj, obj, 6))));
            for pooled in 6..=8u8 {
                let promo = Action::swap(Move::of(pooled, 6, obj), Move::of(obj, obj, 6));
                assert!(actions.contains(&promo), "missing {promo}");
            }
        }
        // no adds without an empty box
        assert!(actions.iter().all(|a| a.kind != ActionKind::Add));
        // 5 removes + C(5,2) boxed swaps + 5*3 promotions
        assert_eq!(actions.len(), 5 + 10 + 15);
    }

    #[test]
    fn negotiation_actions_are_the_swaps_of_a_complete_ranking() {
        let base = r(&[3, 6, 1, 6, 2, 5, 4, 6]);
        let neg = negotiation_actions(&base);
        assert_eq!(neg.len(), 25);
        assert!(neg.iter().all(|a| a.kind == ActionKind::Swap));
    }

    #[test]
    fn incomplete_ranking_offers_adds() {
        let base = r(&[6, 2, 3, 4, 5, 6, 6, 6]);
        let adds: Vec<_> = legal_actions(&base)
            .into_iter()
            .filter(|a| a.kind == ActionKind::Add)
            .collect();
        // every object may be dropped into the empty box 1
        assert_eq!(adds.len(), 8);
        assert!(adds.iter().all(|a| a.primary.dest == Rank(1)));
    }

    #[test]
    fn gesture_on_occupied_box_becomes_swap() {
        let base = r(&[1, 2, 3, 4, 5, 6, 6, 6]);
        let a = Action::from_gesture(&base, ActionKind::Swap, Move::of(1, 1, 3)).unwrap();
        assert_eq!(a.displaced, Some(Move::of(3, 3, 1)));
        let a = Action::from_gesture(&base, ActionKind::Swap, Move::of(7, 6, 6));
        assert!(a.is_err());
    }

    #[test]
    fn ranking_validation() {
        assert_eq!(
            Ranking::task(&[1, 1, 3, 4, 5, 6, 6, 6]).unwrap_err(),
            ModelError::DuplicateRank(1)
        );
        assert!(matches!(
            Ranking::task(&[1, 2, 3, 4, 5, 7, 6, 6]).unwrap_err(),
            ModelError::RankOutOfRange { rank: 7, .. }
        ));
        assert!(matches!(
            Ranking::task(&[1, 2, 3]).unwrap_err(),
            ModelError::WrongLength { .. }
        ));
    }

    #[test]
    fn ranking_serializes_as_plain_array() {
        let base = r(&[1, 2, 3, 4, 5, 6, 6, 6]);
        let json = serde_json::to_string(&base).unwrap();
        assert_eq!(json, "[1,2,3,4,5,6,6,6]");
        assert_eq!(serde_json::from_str::<Ranking>(&json).unwrap(), base);
        assert!(serde_json::from_str::<Ranking>("[1,1,3,4,5,6,6,6]").is_err());
    }

    #[test]
    fn inverse_restores_swap() {
        let base = r(&[1, 2, 3, 4, 5, 6, 6, 6]);
        let a = Action::swap(Move::of(7, 6, 2), Move::of(2, 2, 6));
        let there = apply_action(&base, &a).unwrap();
        assert_eq!(
            apply_action(&there, &a.inverse(there.pool())).unwrap(),
            base
        );
    }
}
