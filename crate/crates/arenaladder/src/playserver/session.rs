//! One human-vs-agent session: the match state, the latest-input slot and
//! the score. Pure logic; the server drives it with client lines and ticks.

use arenaladder_core::engine::{encode_action, render_grid, GameState, GridObs, HumanAction, MiniBrawl, SymbolicObs, TransAction};
use arenaladder_core::game::{MarkovGame, Outcome, Side};
use arenaladder_core::policy::{PolicyId, SharedPolicy};
use arenaladder_core::seed::{derive, rng, Rng};

use super::protocol::{parse_client, ClientMessage, ProtocolError};
use crate::digest::config_digest;

pub const MIN_TICK_RATE: u32 = 1;
pub const MAX_TICK_RATE: u32 = 30;
pub const DEFAULT_TICK_RATE: u32 = 8;

/// A match that ended in a session.
#[derive(Debug, Clone, PartialEq)]
pub struct FinishedMatch {
    pub session: u64,
    /// Index of the match within the session.
    pub index: u64,
    pub seed: u64,
    pub human: Side,
    pub agent: PolicyId,
    pub outcome: Outcome,
    pub final_state: GameState,
    /// Joint actions by index, one per tick.
    pub actions: Vec<[usize; 2]>,
    pub dense: [f64; 2],
}

/// Lines to send after handling one client line.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Reply {
    pub lines: Vec<String>,
    pub close: bool,
}

pub struct Session {
    pub id: u64,
    game: MiniBrawl,
    agent_id: PolicyId,
    agent: SharedPolicy<SymbolicObs>,
    human: Side,
    tick_rate: u32,
    base_seed: u64,
    state: GameState,
    tick: u64,
    started: bool,
    live: bool,
    latest: Option<HumanAction>,
    last_seq: Option<u64>,
    match_index: u64,
    match_seed: u64,
    rng: Rng,
    score: [u32; 2],
    actions: Vec<[usize; 2]>,
    dense: [f64; 2],
    finished: Vec<FinishedMatch>,
}

impl Session {
    /// Opens a session for an agent checkpoint written under
    /// `checkpoint_digest`; a checkpoint from another engine configuration
    /// or a tick rate outside `[1, 30]` is refused.
    #[allow(clippy::too_many_arguments)]
    pub fn open(
        id: u64,
        game: MiniBrawl,
        agent_id: PolicyId,
        agent: SharedPolicy<SymbolicObs>,
        checkpoint_digest: &str,
        human: Side,
        tick_rate: u32,
        seed: u64,
    ) -> Result<Session, String> {
        let digest = config_digest(&game.config);
        if checkpoint_digest != digest {
            return Err(format!("checkpoint {agent_id} was written for engine config {checkpoint_digest}, server runs {digest}"));
        }
        if agent.num_actions() != game.num_actions() {
            return Err(format!("checkpoint has {} actions, engine has {}", agent.num_actions(), game.num_actions()));
        }
        if !(MIN_TICK_RATE..=MAX_TICK_RATE).contains(&tick_rate) {
            return Err(format!("tick rate {tick_rate} outside [{MIN_TICK_RATE}, {MAX_TICK_RATE}]"));
        }
        let state = game.initial_state();
        let match_seed = derive(seed, &[id, 0]);
        Ok(Session {
            id,
            game,
            agent_id,
            agent,
            human,
            tick_rate,
            base_seed: seed,
            state,
            tick: 0,
            started: false,
            live: true,
            latest: None,
            last_seq: None,
            match_index: 0,
            match_seed,
            rng: rng(match_seed),
            score: [0, 0],
            actions: Vec::new(),
            dense: [0.0, 0.0],
            finished: Vec::new(),
        })
    }

    pub fn started(&self) -> bool {
        self.started
    }

    pub fn live(&self) -> bool {
        self.live
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn score(&self) -> [u32; 2] {
        self.score
    }

    pub fn human(&self) -> Side {
        self.human
    }

    pub fn tick_rate(&self) -> u32 {
        self.tick_rate
    }

    pub fn match_seed(&self) -> u64 {
        self.match_seed
    }

    pub fn game(&self) -> &MiniBrawl {
        &self.game
    }

    /// Matches finished since the last call.
    pub fn take_finished(&mut self) -> Vec<FinishedMatch> {
        std::mem::take(&mut self.finished)
    }

    pub fn config_line(&self) -> String {
        let c = &self.game.config;
        format!(
            "config session={} width={} max_hp={} horizon={} tick_rate={} human={} agent={} digest={}",
            self.id,
            c.arena_width,
            c.max_hp,
            c.horizon,
            self.tick_rate,
            self.human.name(),
            self.agent_id,
            config_digest(c)
        )
    }

    pub fn snapshot_line(&self, last: Option<[usize; 2]>) -> String {
        let s = &self.state;
        let grid = render_grid(s, &self.game.config);
        let rows: Vec<String> = (0..GridObs::ROWS).map(|r| grid.row_text(r)).collect();
        let projectiles = if s.projectiles.is_empty() {
            String::from("-")
        } else {
            s.projectiles.iter().map(|p| format!("{}:{}:{}", p.pos, p.dir, p.owner.name())).collect::<Vec<_>>().join(";")
        };
        let actions = match last {
            Some([l, r]) => format!("{},{}", self.game.action_name(l), self.game.action_name(r)),
            None => String::from("-"),
        };
        format!(
            "snapshot tick={} grid={} hp={},{} timer={} phases={},{} projectiles={} actions={}",
            self.tick,
            rows.join("|"),
            s.fighters[0].hp,
            s.fighters[1].hp,
            s.timer,
            s.fighters[0].phase.name(),
            s.fighters[1].phase.name(),
            projectiles,
            actions
        )
    }

    fn result_line(&self, outcome: Outcome) -> String {
        format!(
            "result winner={} hp={},{} score={},{} ticks={}",
            outcome.name(),
            self.state.fighters[0].hp,
            self.state.fighters[1].hp,
            self.score[0],
            self.score[1],
            self.tick
        )
    }

    /// Handles one client line. Malformed lines produce an error message and
    /// leave the session untouched.
    pub fn handle_line(&mut self, line: &str) -> Reply {
        let line = line.trim();
        if line.is_empty() {
            return Reply::default();
        }
        let msg = match parse_client(line) {
            Ok(m) => m,
            Err(e) => return Reply { lines: vec![e.to_line()], close: false },
        };
        let error = |e: ProtocolError| Reply { lines: vec![e.to_line()], close: false };
        match msg {
            ClientMessage::Hello => {
                self.started = true;
                Reply { lines: vec![self.config_line(), self.snapshot_line(None)], close: false }
            }
            ClientMessage::Quit => Reply { lines: Vec::new(), close: true },
            _ if !self.started => error(ProtocolError::new("no_hello", "send `hello` first")),
            ClientMessage::Input { seq, action } => {
                if self.last_seq.is_none_or(|last| seq > last) {
                    self.last_seq = Some(seq);
                    self.latest = Some(action);
                }
                Reply::default()
            }
            ClientMessage::Rematch => {
                if self.live {
                    return error(ProtocolError::new("match_live", "the current match has not ended"));
                }
                self.match_index += 1;
                self.match_seed = derive(self.base_seed, &[self.id, self.match_index]);
                self.rng = rng(self.match_seed);
                self.state = self.game.initial_state();
                self.tick = 0;
                self.live = true;
                self.latest = None;
                self.actions.clear();
                self.dense = [0.0, 0.0];
                Reply { lines: vec![self.snapshot_line(None)], close: false }
            }
        }
    }

    /// Index of the human's action: the latest input received since the
    /// previous tick, encoded for the fighter's facing, or no-op. An encoded
    /// action outside the configured action set also plays no-op.
    fn human_action(&mut self) -> usize {
        let noop = self.game.action_index(TransAction::Noop).unwrap_or(0);
        match self.latest.take() {
            Some(h) => {
                let a = encode_action(&h, self.state.fighter(self.human).facing);
                self.game.action_index(a).unwrap_or(noop)
            }
            None => noop,
        }
    }

    /// Advances the match one step. Returns the snapshot and, when the match
    /// ends, the result. Does nothing before `hello` or between matches.
    pub fn tick(&mut self) -> Vec<String> {
        if !self.started || !self.live {
            return Vec::new();
        }
        let human = self.human_action();
        let agent_side = self.human.opponent();
        let agent = self.agent.act(&self.game.observe(&self.state, agent_side), &mut self.rng);
        let joint = match self.human {
            Side::Left => [human, agent],
            Side::Right => [agent, human],
        };
        let next = self.game.transition(&self.state, joint[0], joint[1]);
        let r = self.game.shaped_rewards(&self.state, &next);
        self.dense[0] += r[0];
        self.dense[1] += r[1];
        self.state = next;
        self.tick += 1;
        self.actions.push(joint);
        let mut out = vec![self.snapshot_line(Some(joint))];
        if let Some(outcome) = self.game.outcome(&self.state) {
            self.live = false;
            if let Some(w) = outcome.winner() {
                self.score[w.index()] += 1;
            }
            out.push(self.result_line(outcome));
            self.finished.push(FinishedMatch {
                session: self.id,
                index: self.match_index,
                seed: self.match_seed,
                human: self.human,
                agent: self.agent_id.clone(),
                outcome,
                final_state: self.state.clone(),
                actions: self.actions.clone(),
                dense: self.dense,
            });
        }
        out
    }
}
