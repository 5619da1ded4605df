//! Listeners: newline-delimited JSON over TCP, and the same envelopes as
//! WebSocket text messages at `/ws`.

use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::routing::get;
use axum::Router;
use gapnav::sim::scenario::Catalog;
use gapnav::sim::SimConfig;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};

use crate::session::{Session, Shared};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    /// WebSocket mirror; off when `None`.
    pub ws_bind: Option<SocketAddr>,
    pub sim: SimConfig,
    pub catalog: Catalog,
    pub log_dir: Option<PathBuf>,
    pub demo_dir: PathBuf,
}

/// Listeners bound and ready; nothing is accepted until [`Bound::run`].
pub struct Bound {
    tcp: TcpListener,
    ws: Option<TcpListener>,
    shared: Arc<Shared>,
}

pub async fn bind(config: ServiceConfig) -> io::Result<Bound> {
    config
        .sim
        .validate()
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
    let tcp = TcpListener::bind(config.bind).await?;
    let ws = match config.ws_bind {
        Some(addr) => Some(TcpListener::bind(addr).await?),
        None => None,
    };
    let shared = Arc::new(Shared::new(
        config.sim,
        config.catalog,
        config.log_dir,
        config.demo_dir,
    ));
    Ok(Bound { tcp, ws, shared })
}

impl Bound {
    pub fn tcp_addr(&self) -> io::Result<SocketAddr> {
        self.tcp.local_addr()
    }

    pub fn ws_addr(&self) -> Option<SocketAddr> {
        self.ws.as_ref().and_then(|l| l.local_addr().ok())
    }

    pub fn shared(&self) -> Arc<Shared> {
        self.shared.clone()
    }

    /// Serves until the task is dropped or a listener fails.
    pub async fn run(self) -> io::Result<()> {
        if let Some(ws) = self.ws {
            let app = Router::new()
                .route("/ws", get(upgrade))
                .with_state(self.shared.clone());
            tokio::spawn(async move { axum::serve(ws, app).await });
        }
        loop {
            let (stream, _) = self.tcp.accept().await?;
            let shared = self.shared.clone();
            tokio::spawn(async move {
                if let Err(e) = serve_tcp(stream, shared).await {
                    eprintln!("connection closed: {e}");
                }
            });
        }
    }
}

/// Runs one request on the blocking pool; a session processes its messages
/// strictly in order because the caller awaits each reply.
async fn handle(session: Session, line: String) -> (Session, String) {
    tokio::task::spawn_blocking(move || {
        let mut session = session;
        let reply = session.handle_line(&line);
        (session, reply)
    })
    .await
    .expect("session handler panicked")
}

fn close(mut session: Session) {
    if let Err((_, message)) = session.close() {
        eprintln!("session {}: {message}", session.id());
    }
}

async fn serve_tcp(stream: TcpStream, shared: Arc<Shared>) -> io::Result<()> {
    let (read, mut write) = stream.into_split();
    let mut lines = BufReader::new(read).lines();
    let mut session = Session::new(shared);
    let result = async {
        while let Some(line) = lines.next_line().await? {
            if line.trim().is_empty() {
                continue;
            }
            let (s, mut reply) = handle(session, line).await;
            session = s;
            reply.push('\n');
            write.write_all(reply.as_bytes()).await?;
        }
        Ok(session)
    }
    .await;
    match result {
        Ok(session) => {
            close(session);
            Ok(())
        }
        Err(e) => Err(e),
    }
}

async fn upgrade(ws: WebSocketUpgrade, State(shared): State<Arc<Shared>>) -> axum::response::Response {
    ws.on_upgrade(move |socket| serve_ws(socket, shared))
}

async fn serve_ws(mut socket: WebSocket, shared: Arc<Shared>) {
    let mut session = Session::new(shared);
    while let Some(Ok(msg)) = socket.recv().await {
        let line = match msg {
            Message::Text(t) => t.to_string(),
            Message::Close(_) => break,
            _ => continue,
        };
        let (s, reply) = handle(session, line).await;
        session = s;
        if socket.send(Message::Text(reply.into())).await.is_err() {
            break;
        }
    }
    close(session);
}
