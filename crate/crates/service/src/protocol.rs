//! JSON frames exchanged over the websocket. Clients send
//! [`ControlMsg`](pace_align::session::ControlMsg) values; the server sends
//! [`ServerFrame`] values tagged by `type`.

use pace_align::session::{ClampFlags, Outcome, Session, TickRecord};
use pace_align::speech::PhrasingGraph;
use pace_align::trajectory::Trajectory;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Controller,
    Observer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexInfo {
    pub id: String,
    pub text: String,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clamps {
    pub p: bool,
    pub a: bool,
}

impl From<ClampFlags> for Clamps {
    fn from(c: ClampFlags) -> Self {
        Clamps { p: c.p, a: c.a }
    }
}

/// Subsampled view of one control tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub schema: u32,
    pub session: u64,
    pub seq: u64,
    pub tick: u64,
    pub t: f64,
    pub x: Vec<f64>,
    pub d: f64,
    pub p: f64,
    pub a: f64,
    pub c: f64,
    pub etc_x: f64,
    pub etc_a: f64,
    pub em: f64,
    pub resistance: f64,
    pub vertex: String,
    pub phrase_text: String,
    pub playhead: f64,
    pub committed_path: Vec<String>,
    pub clamps: Clamps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerFrame {
    Hello {
        schema: u32,
        role: Role,
        configs: Vec<String>,
        running: Option<u64>,
    },
    Started {
        session: u64,
        config: String,
        scheme: String,
        dt: f64,
        dims: usize,
        trajectory: Vec<Vec<f64>>,
        vertices: Vec<VertexInfo>,
        edges: Vec<(String, String)>,
        natural_path: Vec<String>,
    },
    Snapshot(Snapshot),
    Complete {
        session: u64,
        #[serde(flatten)]
        outcome: Outcome,
        log_dir: Option<String>,
    },
    Stopped {
        session: u64,
        log_dir: Option<String>,
    },
    Error {
        message: String,
    },
}

impl ServerFrame {
    pub fn error(message: impl Into<String>) -> Self {
        ServerFrame::Error { message: message.into() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("frames serialize")
    }

    pub fn started(session: u64, config: &str, scheme: &str, dt: f64, traj: &Trajectory, graph: &PhrasingGraph) -> Self {
        let dims = traj.dims();
        let id = |v: usize| graph.vertex(v).id.clone();
        ServerFrame::Started {
            session,
            config: config.to_string(),
            scheme: scheme.to_string(),
            dt,
            dims,
            trajectory: traj.control_points().iter().map(|p| p.as_slice()[..dims].to_vec()).collect(),
            vertices: graph
                .vertices()
                .iter()
                .map(|v| VertexInfo { id: v.id.clone(), text: v.text.clone(), duration_s: v.duration_s })
                .collect(),
            edges: (0..graph.len()).flat_map(|u| graph.successors(u).iter().map(move |&v| (id(u), id(v)))).collect(),
            natural_path: graph.natural_path().into_iter().map(id).collect(),
        }
    }
}

impl Snapshot {
    pub fn from_record<U: pace_align::session::ForceSource>(
        session_id: u64,
        seq: u64,
        session: &Session<'_, U>,
        graph: &PhrasingGraph,
        record: &TickRecord,
        dims: usize,
    ) -> Self {
        let vertex = graph.vertex(record.vertex);
        Snapshot {
            schema: SCHEMA_VERSION,
            session: session_id,
            seq,
            tick: session.tick().saturating_sub(1),
            t: record.t,
            x: record.x.as_slice()[..dims].to_vec(),
            d: record.d,
            p: record.p,
            a: record.a,
            c: record.c,
            etc_x: record.etc_x,
            etc_a: record.etc_a,
            em: record.em,
            resistance: session.user().resistance(),
            vertex: vertex.id.clone(),
            phrase_text: vertex.text.clone(),
            playhead: record.playhead,
            committed_path: session.speech().committed_path.iter().map(|&v| graph.vertex(v).id.clone()).collect(),
            clamps: session.clamps().into(),
        }
    }
}
