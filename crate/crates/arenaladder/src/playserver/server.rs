//! TCP front end. One port serves three kinds of connection, told apart by
//! their first bytes: a WebSocket upgrade (one protocol line per text
//! frame), a plain HTTP `GET` for the client bundle, or a raw line stream
//! (one protocol line per `\n`). Each connection owns one session, ticked
//! on its own timer.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream};
use std::path::{Component, Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use arenaladder_core::engine::{MiniBrawl, SymbolicObs};
use arenaladder_core::game::Side;
use arenaladder_core::policy::{PolicyId, SharedPolicy};
use tungstenite::{Message, WebSocket};

use super::session::{FinishedMatch, Session};
use crate::store::{record_replay, save_replay, MatchLog, MatchRecord, StoreResult};

#[derive(Debug, Clone)]
pub struct ServerOptions {
    pub host: String,
    pub port: u16,
    pub tick_rate: u32,
    pub human: Side,
    pub seed: u64,
    /// Directory of the browser client bundle.
    pub assets: Option<PathBuf>,
    /// Match log shared by all sessions; results are tagged `human`.
    pub match_log: Option<PathBuf>,
    /// Directory for one replay file per finished match.
    pub replays: Option<PathBuf>,
}

struct Shared {
    game: MiniBrawl,
    agent_id: PolicyId,
    agent: SharedPolicy<SymbolicObs>,
    checkpoint_digest: String,
    options: ServerOptions,
    next_session: AtomicU64,
    next_match: AtomicU64,
    log: Option<Mutex<MatchLog>>,
    stop: AtomicBool,
}

pub struct PlayServer {
    listener: TcpListener,
    shared: Arc<Shared>,
}

/// A server running on a background thread.
pub struct ServerHandle {
    pub addr: SocketAddr,
    shared: Arc<Shared>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        self.shared.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.shutdown();
    }
}

impl PlayServer {
    /// Checks the checkpoint against the engine config, opens the match log
    /// and binds the port.
    pub fn bind(
        game: MiniBrawl,
        agent_id: PolicyId,
        agent: SharedPolicy<SymbolicObs>,
        checkpoint_digest: &str,
        options: ServerOptions,
    ) -> Result<PlayServer, String> {
        Session::open(0, game.clone(), agent_id.clone(), agent.clone(), checkpoint_digest, options.human, options.tick_rate, options.seed)?;
        let log = match &options.match_log {
            Some(p) => Some(Mutex::new(MatchLog::open(p).map_err(|e| e.to_string())?)),
            None => None,
        };
        let listener =
            TcpListener::bind((options.host.as_str(), options.port)).map_err(|e| format!("bind {}:{}: {e}", options.host, options.port))?;
        let shared = Arc::new(Shared {
            game,
            agent_id,
            agent,
            checkpoint_digest: checkpoint_digest.to_string(),
            options,
            next_session: AtomicU64::new(1),
            next_match: AtomicU64::new(0),
            log,
            stop: AtomicBool::new(false),
        });
        Ok(PlayServer { listener, shared })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections until stopped, one thread per connection.
    pub fn serve(self) {
        for conn in self.listener.incoming() {
            if self.shared.stop.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = conn else { continue };
            let shared = self.shared.clone();
            thread::spawn(move || {
                let _ = handle_connection(stream, &shared);
            });
        }
    }

    pub fn spawn(self) -> io::Result<ServerHandle> {
        let addr = self.local_addr()?;
        let shared = self.shared.clone();
        let thread = thread::spawn(move || self.serve());
        Ok(ServerHandle { addr, shared, thread: Some(thread) })
    }
}

enum Recv {
    Line(String),
    Timeout,
    Closed,
}

trait Transport {
    fn recv(&mut self, timeout: Duration) -> io::Result<Recv>;
    fn send(&mut self, line: &str) -> io::Result<()>;
}

/// Raw `\n`-delimited lines; a reader thread feeds a channel so reads can
/// time out without losing partial lines.
struct LineTransport {
    writer: TcpStream,
    lines: mpsc::Receiver<Option<String>>,
}

impl LineTransport {
    fn new(stream: TcpStream) -> io::Result<LineTransport> {
        let reader = stream.try_clone()?;
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(reader).lines() {
                match line {
                    Ok(l) => {
                        if tx.send(Some(l)).is_err() {
                            return;
                        }
                    }
                    Err(_) => break,
                }
            }
            let _ = tx.send(None);
        });
        Ok(LineTransport { writer: stream, lines: rx })
    }
}

impl Transport for LineTransport {
    fn recv(&mut self, timeout: Duration) -> io::Result<Recv> {
        match self.lines.recv_timeout(timeout) {
            Ok(Some(l)) => Ok(Recv::Line(l)),
            Ok(None) | Err(mpsc::RecvTimeoutError::Disconnected) => Ok(Recv::Closed),
            Err(mpsc::RecvTimeoutError::Timeout) => Ok(Recv::Timeout),
        }
    }

    fn send(&mut self, line: &str) -> io::Result<()> {
        self.writer.write_all(format!("{line}\n").as_bytes())?;
        self.writer.flush()
    }
}

impl Drop for LineTransport {
    fn drop(&mut self) {
        let _ = self.writer.shutdown(Shutdown::Both);
    }
}

/// One protocol line per WebSocket text frame (a frame holding several
/// `\n`-separated lines is also accepted).
struct WsTransport {
    socket: WebSocket<TcpStream>,
    pending: std::collections::VecDeque<String>,
}

impl Transport for WsTransport {
    fn recv(&mut self, timeout: Duration) -> io::Result<Recv> {
        if let Some(l) = self.pending.pop_front() {
            return Ok(Recv::Line(l));
        }
        self.socket.get_mut().set_read_timeout(Some(timeout.max(Duration::from_millis(1))))?;
        match self.socket.read() {
            Ok(Message::Text(t)) => {
                self.pending.extend(t.as_str().lines().map(str::to_string));
                Ok(self.pending.pop_front().map(Recv::Line).unwrap_or(Recv::Timeout))
            }
            Ok(Message::Close(_)) => Ok(Recv::Closed),
            Ok(_) => Ok(Recv::Timeout),
            Err(tungstenite::Error::Io(e)) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {
                Ok(Recv::Timeout)
            }
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => Ok(Recv::Closed),
            Err(e) => Err(io::Error::other(e.to_string())),
        }
    }

    fn send(&mut self, line: &str) -> io::Result<()> {
        self.socket.send(Message::text(line)).map_err(|e| io::Error::other(e.to_string()))
    }
}

impl Drop for WsTransport {
    fn drop(&mut self) {
        let _ = self.socket.close(None);
        let _ = self.socket.flush();
    }
}

/// Peeks until the request head is complete (or the stream is clearly not
/// HTTP). Returns the peeked bytes.
fn sniff(stream: &TcpStream) -> io::Result<Vec<u8>> {
    let mut buf = vec![0u8; 8192];
    let deadline = Instant::now() + Duration::from_secs(5);
    loop {
        let n = stream.peek(&mut buf)?;
        if n == 0 {
            return Ok(Vec::new());
        }
        let seen = &buf[..n];
        let http = seen.len() >= 4 && seen.starts_with(b"GET ");
        let maybe_http = b"GET ".starts_with(&seen[..seen.len().min(4)]);
        if !maybe_http || (http && seen.windows(4).any(|w| w == b"\r\n\r\n")) || n == buf.len() || Instant::now() > deadline {
            return Ok(seen.to_vec());
        }
        thread::sleep(Duration::from_millis(2));
    }
}

fn handle_connection(stream: TcpStream, shared: &Shared) -> io::Result<()> {
    let head = sniff(&stream)?;
    if head.is_empty() {
        return Ok(());
    }
    if head.starts_with(b"GET ") {
        let text = String::from_utf8_lossy(&head).to_ascii_lowercase();
        let upgrade = text.lines().any(|l| l.starts_with("upgrade:") && l.contains("websocket"));
        if upgrade {
            let socket = tungstenite::accept(stream).map_err(|e| io::Error::other(e.to_string()))?;
            return run_session(WsTransport { socket, pending: Default::default() }, shared);
        }
        return serve_static(stream, &head, shared.options.assets.as_deref());
    }
    run_session(LineTransport::new(stream)?, shared)
}

fn run_session(mut transport: impl Transport, shared: &Shared) -> io::Result<()> {
    let id = shared.next_session.fetch_add(1, Ordering::SeqCst);
    let o = &shared.options;
    let mut session = match Session::open(
        id,
        shared.game.clone(),
        shared.agent_id.clone(),
        shared.agent.clone(),
        &shared.checkpoint_digest,
        o.human,
        o.tick_rate,
        o.seed,
    ) {
        Ok(s) => s,
        Err(msg) => return transport.send(&format!("error code=refused msg={msg}")),
    };
    let period = Duration::from_secs_f64(1.0 / session.tick_rate() as f64);
    let mut next_tick = Instant::now() + period;
    loop {
        if shared.stop.load(Ordering::SeqCst) {
            return Ok(());
        }
        let now = Instant::now();
        if session.started() && now >= next_tick {
            for line in session.tick() {
                transport.send(&line)?;
            }
            record(shared, session.take_finished());
            next_tick += period;
            continue;
        }
        let wait = if session.started() { next_tick - now } else { Duration::from_millis(100) };
        match transport.recv(wait)? {
            Recv::Line(line) => {
                let was_live = session.started() && session.live();
                let reply = session.handle_line(&line);
                for l in &reply.lines {
                    transport.send(l)?;
                }
                if reply.close {
                    return Ok(());
                }
                // The first tick of a match comes one period after its
                // opening snapshot.
                if session.started() && session.live() && !was_live {
                    next_tick = Instant::now() + period;
                }
            }
            Recv::Timeout => {}
            Recv::Closed => return Ok(()),
        }
    }
}

fn record(shared: &Shared, finished: Vec<FinishedMatch>) {
    for m in finished {
        if let Err(e) = record_one(shared, &m) {
            eprintln!("session {}: {e}", m.session);
        }
    }
}

fn record_one(shared: &Shared, m: &FinishedMatch) -> StoreResult<()> {
    let agent_side = m.human.opponent();
    let human_id = PolicyId::new("Human", m.human, m.session);
    let agent_id = PolicyId::new(&m.agent.role, agent_side, m.agent.checkpoint);
    let (left, right) = match m.human {
        Side::Left => (human_id, agent_id),
        Side::Right => (agent_id, human_id),
    };
    if let Some(log) = &shared.log {
        let record = MatchRecord {
            id: shared.next_match.fetch_add(1, Ordering::SeqCst),
            left,
            right,
            seed: m.seed,
            outcome: m.outcome,
            hp: [m.final_state.fighters[0].hp, m.final_state.fighters[1].hp],
            timer: m.final_state.timer,
            steps: m.actions.len() as u32,
            dense: m.dense,
            tag: Some(String::from("human")),
        };
        log.lock().expect("match log lock").append(&record)?;
    }
    if let Some(dir) = &shared.options.replays {
        let actions = m.actions.iter().map(|&[l, r]| [shared.game.action(l), shared.game.action(r)]).collect();
        let replay = record_replay(&shared.game.config, m.seed, actions)?;
        save_replay(&dir.join(format!("session-{}-match-{}.replay", m.session, m.index)), &replay)?;
    }
    Ok(())
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js" | "mjs") => "text/javascript; charset=utf-8",
        Some("css") => "text/css; charset=utf-8",
        Some("json" | "map") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("ico") => "image/x-icon",
        Some("wasm") => "application/wasm",
        _ => "application/octet-stream",
    }
}

/// Maps a request path onto a file under `root`, refusing anything that
/// could leave it.
pub fn asset_path(root: &Path, request: &str) -> Option<PathBuf> {
    let path = request.split(['?', '#']).next().unwrap_or("/");
    let rel = path.trim_start_matches('/');
    let rel = if rel.is_empty() || rel.ends_with('/') { format!("{rel}index.html") } else { rel.to_string() };
    let rel = Path::new(&rel);
    if !rel.components().all(|c| matches!(c, Component::Normal(_))) {
        return None;
    }
    Some(root.join(rel))
}

fn serve_static(mut stream: TcpStream, head: &[u8], assets: Option<&Path>) -> io::Result<()> {
    let end = head.windows(4).position(|w| w == b"\r\n\r\n").map(|p| p + 4).unwrap_or(head.len());
    let mut consumed = vec![0u8; end];
    stream.read_exact(&mut consumed)?;
    let request = String::from_utf8_lossy(&consumed);
    let target = request.lines().next().and_then(|l| l.split_whitespace().nth(1)).unwrap_or("/");
    let file = assets.and_then(|root| asset_path(root, target)).filter(|p| p.is_file());
    let (status, ctype, body) = match file.and_then(|p| std::fs::read(&p).ok().map(|b| (p, b))) {
        Some((p, body)) => ("200 OK", content_type(&p), body),
        None => ("404 Not Found", "text/plain; charset=utf-8", b"not found\n".to_vec()),
    };
    let header =
        format!("HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n", body.len());
    stream.write_all(header.as_bytes())?;
    stream.write_all(&body)?;
    stream.flush()?;
    let _ = stream.shutdown(Shutdown::Both);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asset_paths_stay_inside_the_root() {
        let root = Path::new("/srv/ui");
        assert_eq!(asset_path(root, "/"), Some(root.join("index.html")));
        assert_eq!(asset_path(root, "/app.js?v=2"), Some(root.join("app.js")));
        assert_eq!(asset_path(root, "/css/"), Some(root.join("css/index.html")));
        assert_eq!(asset_path(root, "/../etc/passwd"), None);
        assert_eq!(asset_path(root, "/a/../../b"), None);
    }
}
