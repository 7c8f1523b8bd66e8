//! Wire messages exchanged over the session websocket. Every message is a
//! JSON object whose `type` field names the variant.

use facework_core::config::ItemSpec;
use facework_core::model::ModelError;
use facework_core::session::SessionError;
use facework_core::{ActionKind, ObjectId, Party, Phase, Rank, Ranking, TimingConfig};
use serde::{Deserialize, Serialize};

use crate::animation::AnimationScript;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Hello {
        token: String,
    },
    /// The solo ranking: object ids in rank order, most important first.
    InitialRanking {
        slots: Vec<ObjectId>,
    },
    Move {
        kind: ActionKind,
        object: ObjectId,
        orig: Rank,
        dest: Rank,
    },
    Interrupt,
    ConfirmSubmit,
    Resync,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Protocol,
    UnknownSession,
    NotYourFloor,
    WrongPhase,
    IllegalAction,
    IncompleteRanking,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    State {
        seq: u64,
        ranking: Ranking,
        floor: Party,
        phase: Phase,
    },
    Animation {
        script: AnimationScript,
        utterance: String,
    },
    SubmitProposed {
        utterance: String,
    },
    Error {
        code: ErrorCode,
        detail: String,
    },
    Variant {
        items: Vec<ItemSpec>,
        timing: TimingConfig,
    },
}

impl ServerMessage {
    pub fn error(code: ErrorCode, detail: impl Into<String>) -> Self {
        ServerMessage::Error {
            code,
            detail: detail.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }
}

impl From<&SessionError> for ErrorCode {
    fn from(e: &SessionError) -> Self {
        match e {
            SessionError::WrongPhase { .. } => ErrorCode::WrongPhase,
            SessionError::NotYourFloor(_) => ErrorCode::NotYourFloor,
            SessionError::IncompleteRanking
            | SessionError::Model(ModelError::IncompleteRanking) => ErrorCode::IncompleteRanking,
            SessionError::Model(_) => ErrorCode::IllegalAction,
            SessionError::Agent(_) | SessionError::CorruptLog { .. } => ErrorCode::Internal,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn client_messages_parse() {
        let m: ClientMessage = serde_json::from_value(
            json!({"type": "move", "kind": "swap", "object": 3, "orig": 6, "dest": 1}),
        )
        .unwrap();
        assert_eq!(
            m,
            ClientMessage::Move {
                kind: ActionKind::Swap,
                object: ObjectId::new(3).unwrap(),
                orig: Rank::new(6).unwrap(),
                dest: Rank::new(1).unwrap(),
            }
        );
        let m: ClientMessage = serde_json::from_str(r#"{"type":"confirm_submit"}"#).unwrap();
        assert_eq!(m, ClientMessage::ConfirmSubmit);
        let m: ClientMessage =
            serde_json::from_str(r#"{"type":"initial_ranking","slots":[2,1,8,4,5]}"#).unwrap();
        assert!(matches!(m, ClientMessage::InitialRanking { slots } if slots.len() == 5));
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(serde_json::from_str::<ClientMessage>(
            r#"{"type":"move","kind":"swap","object":0,"orig":1,"dest":2}"#
        )
        .is_err());
        assert!(serde_json::from_str::<ClientMessage>(r#"{"type":"dance"}"#).is_err());
    }

    #[test]
    fn state_shape() {
        let msg = ServerMessage::State {
            seq: 4,
            ranking: Ranking::task(&[1, 2, 3, 4, 5, 6, 6, 6]).unwrap(),
            floor: Party::Agent,
            phase: Phase::Negotiation,
        };
        assert_eq!(
            serde_json::to_value(&msg).unwrap(),
            json!({"type": "state", "seq": 4, "ranking": [1, 2, 3, 4, 5, 6, 6, 6], "floor": "agent", "phase": "negotiation"})
        );
        let err = ServerMessage::error(ErrorCode::NotYourFloor, "agent holds the floor");
        assert_eq!(
            serde_json::to_value(&err).unwrap()["code"],
            "not_your_floor"
        );
    }
}
