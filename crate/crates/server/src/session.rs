//! One client's scene, telemetry and preferences, driven by text messages.
//! Socket handling lives in [`crate::server`]; everything here is synchronous.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use multilayout_core::config::EngineConfig;
use multilayout_core::scene::{Command, LayoutFrame, Scene};
use multilayout_core::Error;

use crate::codec::{encode_binary, encode_json};
use crate::protocol::{
    parse_client, ClientCommand, ClientMessage, ErrorCode, FrameFormat, GraphSummary, ServerMessage,
};
use crate::registry::GraphRegistry;
use crate::telemetry::SessionLog;

/// Study condition. `Base` offers only the spherical layout: the network
/// opens expanded and community expansion, projection and the overview are
/// refused.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Condition {
    #[default]
    Multi,
    Base,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Multi => "MULTI",
            Condition::Base => "BASE",
        })
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "MULTI" => Ok(Condition::Multi),
            "BASE" => Ok(Condition::Base),
            _ => Err(format!("unknown condition {s:?} (MULTI or BASE)")),
        }
    }
}

/// An encoded frame ready for the wire.
#[derive(Clone, Debug, PartialEq)]
pub enum WireFrame {
    Binary(Vec<u8>),
    Text(String),
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub replies: Vec<ServerMessage>,
    /// The scene changed and a frame should go out now.
    pub changed: bool,
}

impl Outcome {
    fn reply(msg: ServerMessage) -> Self {
        Outcome {
            replies: vec![msg],
            changed: false,
        }
    }
}

fn error_code(e: &Error) -> ErrorCode {
    match e {
        Error::UnknownId(_) | Error::UnknownEdge(..) => ErrorCode::UnknownId,
        Error::InvalidState(_) => ErrorCode::InvalidState,
        Error::InvalidConfig(_) => ErrorCode::InvalidConfig,
        _ => ErrorCode::LoadFailed,
    }
}

pub struct Session {
    pub id: u64,
    registry: Arc<GraphRegistry>,
    config: EngineConfig,
    condition: Condition,
    format: FrameFormat,
    scene: Option<Scene>,
    log: SessionLog,
}

impl Session {
    pub fn new(
        id: u64,
        registry: Arc<GraphRegistry>,
        config: EngineConfig,
        condition: Condition,
        format: FrameFormat,
        now: f64,
    ) -> Self {
        Session {
            id,
            registry,
            config,
            condition,
            format,
            scene: None,
            log: SessionLog::new(condition.to_string(), now),
        }
    }

    pub fn hello(&self) -> ServerMessage {
        ServerMessage::Hello {
            session_id: self.id,
            condition: self.condition.to_string(),
        }
    }

    pub fn scene(&self) -> Option<&Scene> {
        self.scene.as_ref()
    }

    pub fn log(&self) -> &SessionLog {
        &self.log
    }

    pub fn format(&self) -> FrameFormat {
        self.format
    }

    pub fn handle_text(&mut self, text: &str, now: f64) -> Outcome {
        match parse_client(text) {
            Ok(msg) => self.handle(msg, now),
            Err((id, message)) => Outcome::reply(ServerMessage::error(id, ErrorCode::BadRequest, message)),
        }
    }

    pub fn handle(&mut self, msg: ClientMessage, now: f64) -> Outcome {
        let id = msg.request_id;
        let ack = Outcome::reply(ServerMessage::Ack { request_id: id });
        if let Some(cmd) = msg.command.scene_command() {
            return self.scene_command(id, cmd);
        }
        match msg.command {
            ClientCommand::LoadGraph { graph } => match self.registry.load(&graph, &self.config) {
                Ok(assets) => {
                    let mut scene = Scene::new(assets);
                    if self.condition == Condition::Base {
                        scene
                            .apply_command(Command::ExpandNetwork)
                            .expect("a fresh scene can always expand");
                    }
                    let h = &scene.assets().h;
                    let summary = GraphSummary {
                        graph_id: graph.clone(),
                        nodes: h.graph.node_count(),
                        edges: h.graph.edge_count(),
                        communities: h.tree.community_count() - 1,
                        top_level: h.tree.top_level().to_vec(),
                        depth: h.tree.depth,
                    };
                    self.scene = Some(scene);
                    self.log.set_graph(graph);
                    Outcome {
                        replies: vec![ServerMessage::GraphLoaded {
                            request_id: id,
                            summary,
                        }],
                        changed: true,
                    }
                }
                Err(e) => Outcome::reply(ServerMessage::error(id, error_code(&e), e.to_string())),
            },
            ClientCommand::SetConfig { config } => match self.config.merged(&config) {
                Ok(cfg) => {
                    self.config = cfg;
                    ack
                }
                Err(e) => Outcome::reply(ServerMessage::error(id, ErrorCode::InvalidConfig, e.to_string())),
            },
            ClientCommand::SetFrameFormat { format } => {
                self.format = format;
                ack
            }
            ClientCommand::BeginTask { task_id } => {
                self.log.begin_task(task_id, now);
                ack
            }
            ClientCommand::EndTask { correct, accuracy } => match self.log.end_task(correct, accuracy, now) {
                Ok(_) => ack,
                Err(e) => Outcome::reply(ServerMessage::error(id, ErrorCode::InvalidState, e)),
            },
            ClientCommand::ExportTelemetry => Outcome::reply(ServerMessage::Telemetry {
                request_id: id,
                csv: self.log.to_csv(now),
            }),
            _ => unreachable!("scene commands handled above"),
        }
    }

    fn scene_command(&mut self, id: Option<u64>, cmd: Command) -> Outcome {
        let Some(scene) = self.scene.as_mut() else {
            return Outcome::reply(ServerMessage::error(id, ErrorCode::NoGraph, "no graph loaded"));
        };
        let refused = matches!(
            cmd,
            Command::ExpandCommunity { .. } | Command::ProjectCommunity { .. } | Command::ShowOverview
        );
        if self.condition == Condition::Base && refused {
            return Outcome::reply(ServerMessage::error(
                id,
                ErrorCode::InvalidState,
                "only the spherical layout is available in the BASE condition",
            ));
        }
        match scene.apply_command(cmd) {
            Ok(()) => {
                self.log.record(&cmd);
                Outcome {
                    replies: vec![ServerMessage::Ack { request_id: id }],
                    changed: true,
                }
            }
            Err(e) => Outcome::reply(ServerMessage::error(id, error_code(&e), e.to_string())),
        }
    }

    /// Next frame after `dt` seconds, if a graph is loaded.
    pub fn frame(&mut self, dt: f64) -> Option<LayoutFrame> {
        self.scene.as_mut().map(|s| s.render_frame(dt))
    }

    pub fn encode(&self, frame: &LayoutFrame) -> WireFrame {
        match self.format {
            FrameFormat::Binary => WireFrame::Binary(encode_binary(frame)),
            FrameFormat::Json => WireFrame::Text(encode_json(frame)),
        }
    }
}
