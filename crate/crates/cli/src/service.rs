use std::net::SocketAddr;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;
use tokio::task::JoinHandle;
use tokio::time::Instant;
use velopad::session::{Session, SessionConfig, SessionMessage};

const INDEX: &str = "velopad session service\n\
connect a WebSocket to /ws and exchange JSON messages tagged by \"type\":\n\
  client: stroke {events}, clear, config {config}\n\
  server: config {config}, frame {stage, record}, report {...}, error {message}\n";

/// `/` describes the protocol, `/ws` opens a session.
pub fn router(config: SessionConfig) -> Router {
    Router::new()
        .route("/", get(|| async { INDEX }))
        .route("/ws", get(upgrade))
        .with_state(config)
}

async fn upgrade(ws: WebSocketUpgrade, State(config): State<SessionConfig>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| session_loop(socket, config))
}

/// Binds `addr`, prints the bound address and serves until interrupted.
pub async fn serve(addr: SocketAddr, config: SessionConfig) -> anyhow::Result<()> {
    let listener = TcpListener::bind(addr)
        .await
        .map_err(|e| anyhow::anyhow!("cannot bind {addr}: {e}"))?;
    println!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

/// Serves on an already bound listener.
pub async fn serve_listener(listener: TcpListener, config: SessionConfig) -> std::io::Result<()> {
    axum::serve(listener, router(config)).await
}

async fn send(socket: &mut WebSocket, msgs: Vec<SessionMessage>) -> bool {
    for m in msgs {
        if socket.send(Message::Text(m.to_json())).await.is_err() {
            return false;
        }
    }
    true
}

fn period(session: &Session) -> Duration {
    Duration::from_secs_f64(session.config().capture_period())
}

/// One pad per connection. Messages are applied in arrival order; a
/// capture starts every capture period and runs on a blocking thread, at
/// most one at a time, so intake continues while it computes.
async fn session_loop(mut socket: WebSocket, config: SessionConfig) {
    let mut session = match Session::new(config) {
        Ok(s) => s,
        Err(e) => {
            send(&mut socket, vec![SessionMessage::error(e.to_string())]).await;
            return;
        }
    };
    let echo = SessionMessage::Config {
        config: session.config().to_patch(),
    };
    if !send(&mut socket, vec![echo]).await {
        return;
    }
    let mut next = Instant::now() + period(&session);
    let mut running: Option<JoinHandle<velopad::Result<Vec<SessionMessage>>>> = None;
    loop {
        tokio::select! {
            incoming = socket.recv() => {
                let replies = match incoming {
                    Some(Ok(Message::Text(text))) => {
                        let before = period(&session);
                        let replies = session.handle_text(&text);
                        if period(&session) != before {
                            next = Instant::now() + period(&session);
                        }
                        replies
                    }
                    Some(Ok(Message::Binary(_))) => vec![SessionMessage::error("binary messages are not supported")],
                    Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                    Some(Ok(_)) => Vec::new(),
                };
                if !send(&mut socket, replies).await {
                    break;
                }
            }
            _ = tokio::time::sleep_until(next), if running.is_none() => {
                let job = session.prepare_capture();
                running = Some(tokio::task::spawn_blocking(move || job.run()));
            }
            done = async { running.as_mut().expect("guarded").await }, if running.is_some() => {
                running = None;
                let msgs = match done {
                    Ok(Ok(msgs)) => msgs,
                    Ok(Err(e)) => vec![SessionMessage::error(format!("capture failed: {e}"))],
                    Err(e) => vec![SessionMessage::error(format!("capture failed: {e}"))],
                };
                if !send(&mut socket, msgs).await {
                    break;
                }
                let now = Instant::now();
                next += period(&session);
                if next < now {
                    next = now + period(&session);
                }
            }
        }
    }
}
