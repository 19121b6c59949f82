//! Line grammar of the play protocol. Every message is one line of
//! space-separated `key=value` fields after a message name; field order is
//! fixed.
//!
//! Client to server:
//!
//! ```text
//! hello
//! input seq=<u64> buttons=<12 × 0|1, in the order B A MODE START UP DOWN LEFT RIGHT C Y X Z>
//! rematch
//! quit
//! ```
//!
//! Server to client:
//!
//! ```text
//! config session=<id> width=<cells> max_hp=<hp> horizon=<steps> tick_rate=<hz> human=<side> agent=<PolicyId> digest=<engine config digest>
//! snapshot tick=<n> grid=<row0>|<row1>|<row2> hp=<l>,<r> timer=<t> phases=<l>,<r> projectiles=<pos:dir:owner;..|-> actions=<l>,<r>|-
//! result winner=<left|right|draw> hp=<l>,<r> score=<l>,<r> ticks=<n>
//! error code=<code> msg=<text to the end of the line>
//! ```
//!
//! `grid` rows come from the arena render (fighters `L`/`R`, projectiles,
//! HP bars `=`, empty `.`). `actions` names the joint action that produced
//! the snapshot, `-` for the opening one.

use arenaladder_core::engine::HumanAction;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClientMessage {
    Hello,
    Input { seq: u64, action: HumanAction },
    Rematch,
    Quit,
}

/// A rejected client line: an error code and a message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolError {
    pub code: &'static str,
    pub msg: String,
}

impl ProtocolError {
    pub fn new(code: &'static str, msg: impl Into<String>) -> Self {
        ProtocolError { code, msg: msg.into() }
    }

    pub fn to_line(&self) -> String {
        format!("error code={} msg={}", self.code, self.msg)
    }
}

pub fn parse_buttons(s: &str) -> Option<HumanAction> {
    let bytes = s.as_bytes();
    if bytes.len() != 12 {
        return None;
    }
    let mut h = HumanAction::default();
    for (b, c) in h.buttons.iter_mut().zip(bytes) {
        *b = match c {
            b'0' => false,
            b'1' => true,
            _ => return None,
        };
    }
    Some(h)
}

pub fn format_buttons(h: &HumanAction) -> String {
    h.buttons.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse_client(line: &str) -> Result<ClientMessage, ProtocolError> {
    let mut parts = line.split_whitespace();
    let name = parts.next().ok_or_else(|| ProtocolError::new("malformed", "empty message"))?;
    let rest: Vec<&str> = parts.collect();
    let bare = |m: ClientMessage| {
        if rest.is_empty() {
            Ok(m)
        } else {
            Err(ProtocolError::new("malformed", format!("`{name}` takes no fields")))
        }
    };
    match name {
        "hello" => bare(ClientMessage::Hello),
        "rematch" => bare(ClientMessage::Rematch),
        "quit" => bare(ClientMessage::Quit),
        "input" => {
            let usage = || ProtocolError::new("malformed", "expected `input seq=<n> buttons=<12 × 0|1>`");
            let [seq, buttons] = rest.as_slice() else { return Err(usage()) };
            let seq = seq.strip_prefix("seq=").and_then(|s| s.parse().ok()).ok_or_else(usage)?;
            let action = buttons.strip_prefix("buttons=").and_then(parse_buttons).ok_or_else(usage)?;
            Ok(ClientMessage::Input { seq, action })
        }
        other => Err(ProtocolError::new("unknown_command", format!("unknown message `{other}`"))),
    }
}

/// Splits a server line into its name and ordered `(key, value)` fields.
/// The `msg` field of an error keeps the rest of the line.
pub fn parse_server(line: &str) -> Option<(&str, Vec<(&str, &str)>)> {
    let (name, mut rest) = match line.split_once(' ') {
        Some((n, r)) => (n, r),
        None => (line, ""),
    };
    let mut fields = Vec::new();
    while !rest.is_empty() {
        if let Some(msg) = rest.strip_prefix("msg=") {
            fields.push(("msg", msg));
            break;
        }
        let (field, tail) = rest.split_once(' ').unwrap_or((rest, ""));
        fields.push(field.split_once('=')?);
        rest = tail;
    }
    Some((name, fields))
}

const SERVER_FIELDS: [(&str, &[&str]); 4] = [
    ("config", &["session", "width", "max_hp", "horizon", "tick_rate", "human", "agent", "digest"]),
    ("snapshot", &["tick", "grid", "hp", "timer", "phases", "projectiles", "actions"]),
    ("result", &["winner", "hp", "score", "ticks"]),
    ("error", &["code", "msg"]),
];

/// Whether `line` is a well-formed server message: a known name with
/// exactly its fields, in order.
pub fn valid_server_line(line: &str) -> bool {
    let Some((name, fields)) = parse_server(line) else { return false };
    let Some((_, keys)) = SERVER_FIELDS.iter().find(|(n, _)| *n == name) else { return false };
    fields.len() == keys.len() && fields.iter().zip(keys.iter()).all(|((k, v), e)| k == e && (!v.is_empty() || *k == "msg"))
}
