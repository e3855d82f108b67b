//! JSON messages on the text channel.
//!
//! Every client message is an object with a `type` tag, an optional
//! `requestId` echoed back in the reply, and the fields of its type:
//!
//! ```json
//! {"type":"loadGraph","requestId":1,"graph":"medium"}
//! {"type":"expandCommunity","requestId":2,"community":3}
//! ```

use multilayout_core::scene::Command;
use multilayout_core::{CommunityId, NodeId};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FrameFormat {
    Binary,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum ClientCommand {
    /// Loads a graph by file name in the graph directory, or a synthetic
    /// preset (`easy`, `medium`, `hard`, `stress`).
    LoadGraph {
        graph: String,
    },
    ExpandNetwork,
    ShowOverview,
    ExpandCommunity {
        community: CommunityId,
    },
    ProjectCommunity {
        community: CommunityId,
    },
    ResetCommunity {
        community: CommunityId,
    },
    HighlightNode {
        node: NodeId,
    },
    HighlightCommunity {
        community: CommunityId,
    },
    ClearHighlight,
    /// Partial engine configuration merged over the session's current one.
    /// Takes effect on the next `loadGraph`.
    SetConfig {
        config: serde_json::Value,
    },
    SetFrameFormat {
        format: FrameFormat,
    },
    BeginTask {
        task_id: String,
    },
    EndTask {
        correct: bool,
        accuracy: f64,
    },
    ExportTelemetry,
}

impl ClientCommand {
    /// The scene command this message carries, if any.
    pub fn scene_command(&self) -> Option<Command> {
        Some(match *self {
            ClientCommand::ExpandNetwork => Command::ExpandNetwork,
            ClientCommand::ShowOverview => Command::ShowOverview,
            ClientCommand::ExpandCommunity { community } => Command::ExpandCommunity { community },
            ClientCommand::ProjectCommunity { community } => Command::ProjectCommunity { community },
            ClientCommand::ResetCommunity { community } => Command::ResetCommunity { community },
            ClientCommand::HighlightNode { node } => Command::HighlightNode { node },
            ClientCommand::HighlightCommunity { community } => Command::HighlightCommunity { community },
            ClientCommand::ClearHighlight => Command::ClearHighlight,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClientMessage {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_id: Option<u64>,
    #[serde(flatten)]
    pub command: ClientCommand,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GraphSummary {
    pub graph_id: String,
    pub nodes: usize,
    pub edges: usize,
    /// All communities below the root.
    pub communities: usize,
    pub top_level: Vec<CommunityId>,
    pub depth: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ErrorCode {
    BadRequest,
    UnknownId,
    InvalidState,
    InvalidConfig,
    NoGraph,
    LoadFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum ServerMessage {
    Hello {
        session_id: u64,
        condition: String,
    },
    Ack {
        request_id: Option<u64>,
    },
    GraphLoaded {
        request_id: Option<u64>,
        summary: GraphSummary,
    },
    Telemetry {
        request_id: Option<u64>,
        csv: String,
    },
    Error {
        request_id: Option<u64>,
        code: ErrorCode,
        message: String,
    },
}

impl ServerMessage {
    pub fn error(request_id: Option<u64>, code: ErrorCode, message: impl Into<String>) -> Self {
        ServerMessage::Error {
            request_id,
            code,
            message: message.into(),
        }
    }
}

/// Parses a text message. Returns the request id when the JSON was readable
/// enough to carry one, so errors can still be correlated.
pub fn parse_client(text: &str) -> Result<ClientMessage, (Option<u64>, String)> {
    serde_json::from_str(text).map_err(|e| {
        let id = serde_json::from_str::<serde_json::Value>(text)
            .ok()
            .and_then(|v| v.get("requestId").and_then(|r| r.as_u64()));
        (id, e.to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_id_is_flattened() {
        let m = parse_client(r#"{"type":"expandCommunity","requestId":4,"community":2}"#).unwrap();
        assert_eq!(m.request_id, Some(4));
        assert_eq!(
            m.command.scene_command(),
            Some(Command::ExpandCommunity {
                community: CommunityId(2)
            })
        );
    }

    #[test]
    fn missing_field_reports_request_id() {
        let (id, _) = parse_client(r#"{"type":"expandCommunity","requestId":9}"#).unwrap_err();
        assert_eq!(id, Some(9));
        assert_eq!(parse_client("not json").unwrap_err().0, None);
    }

    #[test]
    fn camel_case_fields() {
        let m = parse_client(r#"{"type":"beginTask","taskId":"T1"}"#).unwrap();
        assert_eq!(m.command, ClientCommand::BeginTask { task_id: "T1".into() });
        let v = serde_json::to_value(ServerMessage::Ack { request_id: Some(1) }).unwrap();
        assert_eq!(v, serde_json::json!({"type":"ack","requestId":1}));
    }
}
