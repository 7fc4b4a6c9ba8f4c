//! Websocket front end. The first connected client controls the session;
//! later clients observe. The controller's input is throttled before it
//! reaches the control thread.

use std::collections::VecDeque;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use crossbeam_channel::{Sender, TrySendError};
use futures_util::{SinkExt, StreamExt};
use log::{debug, info};
use pace_align::session::ControlMsg;
use tokio::net::{TcpListener, TcpStream, ToSocketAddrs};
use tokio::sync::broadcast;
use tokio::time::Instant;
use tokio_tungstenite::tungstenite::Message;

use crate::engine::{Command, ConfigRegistry, Engine, EngineOptions};
use crate::protocol::{Role, ServerFrame, SCHEMA_VERSION};
use crate::Error;

/// Highest rate at which controller messages are forwarded.
pub const MAX_INPUT_HZ: f64 = 30.0;
const INPUT_QUEUE: usize = 16;

#[derive(Debug, Default)]
struct Roles {
    controller: Mutex<Option<u64>>,
    next_id: AtomicU64,
}

impl Roles {
    fn join(&self) -> (u64, Role) {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let mut slot = self.controller.lock().unwrap();
        if slot.is_none() {
            *slot = Some(id);
            (id, Role::Controller)
        } else {
            (id, Role::Observer)
        }
    }

    fn leave(&self, id: u64) {
        let mut slot = self.controller.lock().unwrap();
        if *slot == Some(id) {
            *slot = None;
        }
    }
}

pub struct Server {
    listener: TcpListener,
    engine: Engine,
    roles: Arc<Roles>,
    config_ids: Arc<Vec<String>>,
    running: Arc<Mutex<Option<u64>>>,
}

impl Server {
    pub async fn bind(addr: impl ToSocketAddrs, registry: ConfigRegistry, options: EngineOptions) -> Result<Self, Error> {
        let listener = TcpListener::bind(addr).await?;
        let config_ids = Arc::new(registry.ids());
        let engine = Engine::spawn(registry, options)?;
        let running = Arc::new(Mutex::new(None));
        tokio::spawn(track_running(engine.subscribe(), running.clone()));
        Ok(Server { listener, engine, roles: Arc::new(Roles::default()), config_ids, running })
    }

    pub fn local_addr(&self) -> Result<SocketAddr, Error> {
        Ok(self.listener.local_addr()?)
    }

    /// Accepts connections until the listener fails.
    pub async fn run(self) -> Result<(), Error> {
        info!("listening on ws://{}", self.listener.local_addr()?);
        loop {
            let (stream, peer) = self.listener.accept().await?;
            let conn = Connection {
                commands: self.engine.commands(),
                frames: self.engine.subscribe(),
                roles: self.roles.clone(),
                config_ids: self.config_ids.clone(),
                running: *self.running.lock().unwrap(),
            };
            tokio::spawn(async move {
                if let Err(e) = conn.serve(stream).await {
                    debug!("connection {peer}: {e}");
                }
            });
        }
    }
}

async fn track_running(mut frames: broadcast::Receiver<Arc<str>>, running: Arc<Mutex<Option<u64>>>) {
    loop {
        let text = match frames.recv().await {
            Ok(text) => text,
            Err(broadcast::error::RecvError::Lagged(_)) => continue,
            Err(broadcast::error::RecvError::Closed) => return,
        };
        if let Ok(frame) = serde_json::from_str::<ServerFrame>(&text) {
            match frame {
                ServerFrame::Started { session, .. } => *running.lock().unwrap() = Some(session),
                ServerFrame::Complete { .. } | ServerFrame::Stopped { .. } => *running.lock().unwrap() = None,
                _ => {}
            }
        }
    }
}

/// Controller input waiting to be forwarded. A new resistance value
/// replaces one that has not gone out yet.
#[derive(Debug, Default)]
struct InputQueue {
    pending: VecDeque<ControlMsg>,
}

impl InputQueue {
    fn push(&mut self, msg: ControlMsg) -> bool {
        if let ControlMsg::SetResistance(_) = msg {
            if let Some(slot) = self.pending.iter_mut().find(|m| matches!(m, ControlMsg::SetResistance(_))) {
                *slot = msg;
                return true;
            }
        }
        if self.pending.len() >= INPUT_QUEUE {
            return false;
        }
        self.pending.push_back(msg);
        true
    }
}

struct Connection {
    commands: Sender<Command>,
    frames: broadcast::Receiver<Arc<str>>,
    roles: Arc<Roles>,
    config_ids: Arc<Vec<String>>,
    running: Option<u64>,
}

impl Connection {
    async fn serve(mut self, stream: TcpStream) -> Result<(), Error> {
        let ws = tokio_tungstenite::accept_async(stream).await?;
        let (id, role) = self.roles.join();
        let result = self.session(ws, role).await;
        self.roles.leave(id);
        result
    }

    async fn session(&mut self, ws: tokio_tungstenite::WebSocketStream<TcpStream>, role: Role) -> Result<(), Error> {
        let (mut tx, mut rx) = ws.split();
        let hello = ServerFrame::Hello {
            schema: SCHEMA_VERSION,
            role,
            configs: self.config_ids.as_ref().clone(),
            running: self.running,
        };
        tx.send(Message::text(hello.to_json())).await?;

        // A small margin keeps scheduling jitter from fitting an extra
        // message into a one-second window.
        let interval = Duration::from_secs_f64(1.0 / MAX_INPUT_HZ) + Duration::from_millis(1);
        let mut queue = InputQueue::default();
        let mut last_sent: Option<Instant> = None;
        loop {
            let ready_at = last_sent.map_or_else(Instant::now, |t| t + interval);
            tokio::select! {
                incoming = rx.next() => {
                    let Some(incoming) = incoming else { return Ok(()) };
                    let text = match incoming? {
                        Message::Text(text) => text,
                        Message::Close(_) => return Ok(()),
                        Message::Binary(_) => {
                            tx.send(Message::text(ServerFrame::error("binary frames are not accepted").to_json())).await?;
                            continue;
                        }
                        _ => continue,
                    };
                    let reply = match (role, serde_json::from_str::<ControlMsg>(text.as_str())) {
                        (_, Err(e)) => Some(format!("malformed message: {e}")),
                        (Role::Observer, Ok(_)) => Some("read-only connection: another client controls the session".into()),
                        (Role::Controller, Ok(msg)) => {
                            (!queue.push(msg)).then(|| "input rate limit exceeded; message dropped".to_string())
                        }
                    };
                    if let Some(message) = reply {
                        tx.send(Message::text(ServerFrame::error(message).to_json())).await?;
                    }
                }
                _ = tokio::time::sleep_until(ready_at), if !queue.pending.is_empty() => {
                    let msg = queue.pending.pop_front().expect("queue checked non-empty");
                    last_sent = Some(Instant::now());
                    match self.commands.try_send(Command::Control(msg)) {
                        Ok(()) => {}
                        Err(TrySendError::Full(_)) => {
                            tx.send(Message::text(ServerFrame::error("control loop busy; message dropped").to_json())).await?;
                        }
                        Err(TrySendError::Disconnected(_)) => return Err(Error::EngineStopped),
                    }
                }
                frame = self.frames.recv() => match frame {
                    Ok(text) => tx.send(Message::text(text.to_string())).await?,
                    // Slow readers skip the oldest frames.
                    Err(broadcast::error::RecvError::Lagged(n)) => debug!("client lagged by {n} frames"),
                    Err(broadcast::error::RecvError::Closed) => return Err(Error::EngineStopped),
                },
            }
        }
    }
}
