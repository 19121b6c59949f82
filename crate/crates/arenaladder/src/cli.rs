//! The `arenaladder` command line. Every flag has a config-file key; flags
//! override the file, which overrides the defaults. Usage and configuration
//! errors exit with 2, runtime failures with 1; success prints the run
//! manifest path last.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use arenaladder_core::engine::{MiniBrawl, SymbolicObs};
use arenaladder_core::eval::{cpu_ladder, exploitability, full_game_train, play_tournament, rate_matches, ExploitMethod, LadderEntry};
use arenaladder_core::game::{MarkovGame, Side};
use arenaladder_core::learner::{independent_learn, train_learner, LearnConfig, QLearner};
use arenaladder_core::metagame::{
    population_loop, run_league, ExactOracle, Member, MetaSolver, PayoffMatrix, PopulationConfig, RlOracle,
};
use arenaladder_core::num::Q;
use arenaladder_core::policy::{cpu_policy, MetaStrategy, MixturePolicy, PolicyId, SharedPolicy, TabularPolicy};
use arenaladder_core::seed::derive;
use clap::{Args, Parser, Subcommand};
use toml::{Table, Value};

use crate::config::{parse_override, set_key, ConfigError, RunConfig, ALGORITHMS};
use crate::digest::config_digest;
use crate::playserver::{PlayServer, ServerOptions};
use crate::store::{
    load_policy, load_replay, runs_root, save_policy, Checkpoint, MatchLog, MatchRecord, MetaEntry, PayoffCache, RunDir,
    RunManifest,
};

#[derive(Debug, Parser)]
#[command(name = "arenaladder", version, about = "Train, evaluate and play MiniBrawl agents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one agent against CPU opponents.
    TrainSingle {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        learn: LearnFlags,
        /// `cpu` (one level) or `curriculum` (all levels) [single.mode].
        #[arg(long, value_parser = ["cpu", "curriculum"])]
        mode: Option<String>,
        /// CPU level for `cpu` mode [single.level].
        #[arg(long)]
        level: Option<u8>,
        /// Curriculum epochs [single.epochs].
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Train a population by self-play.
    TrainPop {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        learn: LearnFlags,
        /// Training algorithm [population.algo].
        #[arg(long, value_parser = ALGORITHMS)]
        algo: Option<String>,
        /// Population iterations for fsp and psro [population.iters].
        #[arg(long)]
        iters: Option<usize>,
        /// Best-response oracle [population.oracle].
        #[arg(long, value_parser = ["exact", "rl"])]
        oracle: Option<String>,
        /// Payoff estimation [population.payoff].
        #[arg(long, value_parser = ["exact", "sampled"])]
        payoff: Option<String>,
        /// League cycles [league.cycles].
        #[arg(long)]
        cycles: Option<usize>,
    },
    /// Round-robin Elo tournament between checkpoints.
    Tournament {
        #[command(flatten)]
        common: Common,
        /// Checkpoint files [tournament.policies].
        #[arg(long, num_args = 1..)]
        policies: Option<Vec<String>>,
        /// Round-robin rounds [tournament.rounds].
        #[arg(long)]
        rounds: Option<u32>,
        /// Elo K-factor [tournament.k].
        #[arg(long)]
        k: Option<f64>,
    },
    /// Exploitability of a checkpoint or of a run's output mixture.
    Exploit {
        #[command(flatten)]
        common: Common,
        /// Checkpoint file or run directory [exploit.target].
        #[arg(long)]
        target: Option<String>,
        /// Best-response method [exploit.method].
        #[arg(long, value_parser = ["exact", "rl"])]
        method: Option<String>,
        /// Side the target plays [exploit.side].
        #[arg(long, value_parser = ["left", "right"])]
        side: Option<String>,
        /// Step budget of the learned exploiter [exploit.budget_steps].
        #[arg(long)]
        budget_steps: Option<u64>,
    },
    /// Win rates of a checkpoint against every CPU level.
    Ladder {
        #[command(flatten)]
        common: Common,
        /// Checkpoint file [ladder.policy].
        #[arg(long)]
        policy: Option<String>,
        /// Matches per level [ladder.matches].
        #[arg(long)]
        matches: Option<u32>,
        /// CPU levels [ladder.levels].
        #[arg(long, num_args = 1..)]
        levels: Option<Vec<u8>>,
    },
    /// Re-simulate a replay file and check its final state.
    Replay {
        #[command(flatten)]
        common: Common,
        /// Replay file [replay.file].
        #[arg(long)]
        file: Option<String>,
    },
    /// Serve live human-vs-agent matches.
    ServePlay {
        #[command(flatten)]
        common: Common,
        /// Agent checkpoint [play.checkpoint].
        #[arg(long)]
        checkpoint: Option<String>,
        /// Listening address [play.host].
        #[arg(long)]
        host: Option<String>,
        /// Listening port [play.port].
        #[arg(long)]
        port: Option<u16>,
        /// Engine steps per second, 1 to 30 [play.tick_rate].
        #[arg(long)]
        tick_rate: Option<u32>,
        /// Side of the human player [play.human_side].
        #[arg(long, value_parser = ["left", "right"])]
        human_side: Option<String>,
        /// Client bundle directory [play.assets].
        #[arg(long)]
        assets: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Config file (TOML sections).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed [run.seed].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Engine preset: tiny, small or default [run.preset].
    #[arg(long)]
    pub preset: Option<String>,
    /// Match-simulation threads, 0 for all cores [run.workers].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Any config key, as section.key=value; repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
}

/// Learner hyperparameters, named after the `[learn]` keys.
#[derive(Debug, Args)]
pub struct LearnFlags {
    /// Environment steps per training run [learn.budget_steps].
    #[arg(long)]
    pub budget_steps: Option<u64>,
    /// Learning rate, as a rational or decimal [learn.step_size].
    #[arg(long)]
    pub step_size: Option<String>,
    /// Epsilon of the epsilon-greedy behaviour policy [learn.exploration].
    #[arg(long)]
    pub exploration: Option<String>,
    /// Actor step multiplier for independent learners [learn.step_ratio].
    #[arg(long)]
    pub step_ratio: Option<String>,
    /// Training reward [learn.reward].
    #[arg(long, value_parser = ["dense", "sparse"])]
    pub reward: Option<String>,
    /// Episodes per update batch [learn.batch_episodes].
    #[arg(long)]
    pub batch_episodes: Option<u32>,
    /// Matches used to measure a learned response [learn.eval_matches].
    #[arg(long)]
    pub eval_matches: Option<u32>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.0)
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

type CliResult<T> = Result<T, CliError>;

/// Report sink; commands may run on the worker pool.
pub type Out = dyn Write + Send;

/// Collects flag values as config overrides.
struct Overrides(Table);

impl Overrides {
    fn put<T: Into<Value>>(&mut self, section: &str, key: &str, v: Option<T>) {
        if let Some(v) = v {
            set_key(&mut self.0, section, key, v.into());
        }
    }

    fn put_u64(&mut self, section: &str, key: &str, v: Option<u64>) -> CliResult<()> {
        if let Some(v) = v {
            let v = i64::try_from(v).map_err(|_| CliError::Usage(format!("{section}.{key}: {v} is too large")))?;
            set_key(&mut self.0, section, key, Value::Integer(v));
        }
        Ok(())
    }

    fn common(&mut self, c: &Common) -> CliResult<()> {
        for s in &c.set {
            let (section, key, value) = parse_override(s)?;
            set_key(&mut self.0, &section, &key, value);
        }
        self.put_u64("run", "seed", c.seed)?;
        self.put("run", "preset", c.preset.clone());
        self.put("run", "workers", c.workers.map(|w| w as i64));
        Ok(())
    }

    fn learn(&mut self, l: &LearnFlags) -> CliResult<()> {
        self.put_u64("learn", "budget_steps", l.budget_steps)?;
        self.put("learn", "step_size", l.step_size.clone());
        self.put("learn", "exploration", l.exploration.clone());
        self.put("learn", "step_ratio", l.step_ratio.clone());
        self.put("learn", "reward", l.reward.clone());
        self.put("learn", "batch_episodes", l.batch_episodes.map(i64::from));
        self.put("learn", "eval_matches", l.eval_matches.map(i64::from));
        Ok(())
    }
}

fn ints(v: &[u8]) -> Value {
    Value::Array(v.iter().map(|&x| Value::Integer(x as i64)).collect())
}

/// Resolved configuration of a command.
fn resolve(command: &Command) -> CliResult<(RunConfig, &'static str)> {
    let mut o = Overrides(Table::new());
    let (common, name) = match command {
        Command::TrainSingle { common, learn, mode, level, epochs } => {
            o.learn(learn)?;
            o.put("single", "mode", mode.clone());
            o.put("single", "level", level.map(i64::from));
            o.put("single", "epochs", epochs.map(|e| e as i64));
            (common, "train-single")
        }
        Command::TrainPop { common, learn, algo, iters, oracle, payoff, cycles } => {
            o.learn(learn)?;
            o.put("population", "algo", algo.clone());
            o.put("population", "iters", iters.map(|i| i as i64));
            o.put("population", "oracle", oracle.clone());
            o.put("population", "payoff", payoff.clone());
            o.put("league", "cycles", cycles.map(|c| c as i64));
            (common, "train-pop")
        }
        Command::Tournament { common, policies, rounds, k } => {
            o.put("tournament", "policies", policies.clone().map(|p| Value::Array(p.into_iter().map(Value::String).collect())));
            o.put("tournament", "rounds", rounds.map(i64::from));
            o.put("tournament", "k", *k);
            (common, "tournament")
        }
        Command::Exploit { common, target, method, side, budget_steps } => {
            o.put("exploit", "target", target.clone());
            o.put("exploit", "method", method.clone());
            o.put("exploit", "side", side.clone());
            o.put_u64("exploit", "budget_steps", *budget_steps)?;
            (common, "exploit")
        }
        Command::Ladder { common, policy, matches, levels } => {
            o.put("ladder", "policy", policy.clone());
            o.put("ladder", "matches", matches.map(i64::from));
            o.put("ladder", "levels", levels.as_deref().map(ints));
            (common, "ladder")
        }
        Command::Replay { common, file } => {
            o.put("replay", "file", file.clone());
            (common, "replay")
        }
        Command::ServePlay { common, checkpoint, host, port, tick_rate, human_side, assets } => {
            o.put("play", "checkpoint", checkpoint.clone());
            o.put("play", "host", host.clone());
            o.put("play", "port", port.map(i64::from));
            o.put("play", "tick_rate", tick_rate.map(i64::from));
            o.put("play", "human_side", human_side.clone());
            o.put("play", "assets", assets.clone());
            (common, "serve-play")
        }
    };
    o.common(common)?;
    Ok((RunConfig::from_file(common.config.as_deref(), o.0)?, name))
}

/// Parses `args` (without the program name) and runs the command, writing
/// reports to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut Out, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("arenaladder")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = resolve(&cli.command).and_then(|(cfg, name)| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.run.workers).build().map_err(runtime)?;
        pool.install(|| execute(&cli.command, name, &cfg, out))
    });
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {}", one_line(&msg));
            2
        }
        Err(CliError::Runtime(msg)) => {
            let _ = writeln!(err, "error: {}", one_line(&msg));
            1
        }
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn say(out: &mut Out, line: impl AsRef<str>) -> CliResult<()> {
    writeln!(out, "{}", line.as_ref()).map_err(runtime)
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    game: MiniBrawl,
    digest: String,
    seed: u64,
}

fn execute(command: &Command, name: &str, cfg: &RunConfig, out: &mut Out) -> CliResult<()> {
    let game = MiniBrawl::new(cfg.engine_config()?).map_err(|e| CliError::Usage(e.to_string()))?;
    let digest = config_digest(&game.config);
    let ctx = Ctx { cfg, game, digest, seed: cfg.run.seed };
    let algorithm = match command {
        Command::TrainSingle { .. } => cfg.single.mode.clone(),
        Command::TrainPop { .. } => cfg.population.algo.clone(),
        Command::Exploit { .. } => cfg.exploit.method.clone(),
        _ => String::from("-"),
    };
    let base_id = if algorithm == "-" { format!("{name}-s{}", ctx.seed) } else { format!("{name}-{algorithm}-s{}", ctx.seed) };
    // Inputs are checked before the run directory exists.
    let inputs = Inputs::gather(command, &ctx)?;
    let mut run = RunDir::create(&runs_root(), &base_id).map_err(runtime)?;
    match command {
        Command::TrainSingle { .. } => train_single(&ctx, &mut run, out)?,
        Command::TrainPop { .. } => train_pop(&ctx, &mut run, out)?,
        Command::Tournament { .. } => tournament(&ctx, inputs.policies, &mut run, out)?,
        Command::Exploit { .. } => exploit(&ctx, inputs.target.expect("gathered"), &mut run, out)?,
        Command::Ladder { .. } => ladder(&ctx, inputs.policies, &mut run, out)?,
        Command::Replay { .. } => replay(&ctx, &mut run, out)?,
        Command::ServePlay { .. } => return serve_play(&ctx, inputs.policies, &mut run, &algorithm, out),
    }
    let manifest = run.finish(name, &algorithm, ctx.seed, cfg.to_toml()).map_err(runtime)?;
    say(out, format!("manifest {}", manifest.display()))
}

/// Loaded input artifacts of a command.
#[derive(Default)]
struct Inputs {
    policies: Vec<Checkpoint<SymbolicObs>>,
    target: Option<(PolicyId, MixturePolicy<SymbolicObs>, Side)>,
}

fn checkpoint(ctx: &Ctx, path: &str) -> CliResult<Checkpoint<SymbolicObs>> {
    let c: Checkpoint<SymbolicObs> = load_policy(Path::new(path), Some(&ctx.digest)).map_err(runtime)?;
    if c.policy.default_dist().len() != ctx.game.num_actions() {
        return Err(CliError::Runtime(format!("{path}: checkpoint has {} actions, engine has {}", c.policy.default_dist().len(), ctx.game.num_actions())));
    }
    Ok(c)
}

fn required<'a>(v: &'a Option<String>, key: &str, flag: &str) -> CliResult<&'a str> {
    v.as_deref().ok_or_else(|| CliError::Usage(format!("missing {flag} (config key {key})")))
}

impl Inputs {
    fn gather(command: &Command, ctx: &Ctx) -> CliResult<Inputs> {
        let cfg = ctx.cfg;
        let mut inputs = Inputs::default();
        match command {
            Command::Tournament { .. } => {
                if cfg.tournament.policies.len() < 2 {
                    return Err(CliError::Usage(String::from("a tournament needs at least two --policies")));
                }
                for p in &cfg.tournament.policies {
                    inputs.policies.push(checkpoint(ctx, p)?);
                }
            }
            Command::Ladder { .. } => inputs.policies.push(checkpoint(ctx, required(&cfg.ladder.policy, "ladder.policy", "--policy")?)?),
            Command::ServePlay { .. } => {
                inputs.policies.push(checkpoint(ctx, required(&cfg.play.checkpoint, "play.checkpoint", "--checkpoint")?)?)
            }
            Command::Replay { .. } => {
                required(&cfg.replay.file, "replay.file", "--file")?;
            }
            Command::Exploit { .. } => {
                let target = required(&cfg.exploit.target, "exploit.target", "--target")?;
                let side = cfg.exploit.side.as_deref().and_then(Side::parse);
                inputs.target = Some(if Path::new(target).is_dir() {
                    run_mixture(ctx, Path::new(target), side.unwrap_or(Side::Left))?
                } else {
                    let c = checkpoint(ctx, target)?;
                    let side = side.unwrap_or(c.id.side);
                    let id = c.id.clone();
                    (id.clone(), MixturePolicy::single(id, Arc::new(c.policy)), side)
                });
            }
            _ => {}
        }
        Ok(inputs)
    }
}

/// Output mixture of a finished run for `side`, from its manifest.
fn run_mixture(ctx: &Ctx, dir: &Path, side: Side) -> CliResult<(PolicyId, MixturePolicy<SymbolicObs>, Side)> {
    let (manifest, dir) = RunManifest::load(dir).map_err(runtime)?;
    let mut components: Vec<Member<SymbolicObs>> = Vec::new();
    let mut weights = Vec::new();
    for m in manifest.meta.iter().filter(|m| m.side == side.name()) {
        let c = checkpoint(ctx, &dir.join(&m.path).to_string_lossy())?;
        let w: Q = m.weight.parse().map_err(|_| CliError::Runtime(format!("manifest weight `{}` is not a rational", m.weight)))?;
        components.push((c.id, Arc::new(c.policy)));
        weights.push(w);
    }
    if components.is_empty() {
        return Err(CliError::Runtime(format!("run {} has no {side} mixture", manifest.run_id)));
    }
    let mixture = MixturePolicy::new(components, MetaStrategy::new(weights).map_err(runtime)?).map_err(runtime)?;
    Ok((PolicyId::new("Meta", side, 0), mixture, side))
}

fn policy_file(id: &PolicyId) -> String {
    format!("policies/{id}.policy")
}

fn save_member(ctx: &Ctx, run: &mut RunDir, id: &PolicyId, policy: &TabularPolicy<SymbolicObs>) -> CliResult<String> {
    let rel = policy_file(id);
    save_policy(&run.file(&rel), id, &ctx.digest, policy).map_err(runtime)?;
    run.index(&rel).map_err(runtime)?;
    Ok(rel)
}

fn tabular_of<'a>(id: &PolicyId, p: &'a SharedPolicy<SymbolicObs>) -> CliResult<&'a TabularPolicy<SymbolicObs>> {
    p.tabular().ok_or_else(|| CliError::Runtime(format!("policy {id} is not tabular and cannot be saved")))
}

/// Saves the components of `mixture` and records it in the manifest.
fn save_mixture(ctx: &Ctx, run: &mut RunDir, side: Side, mixture: &MixturePolicy<SymbolicObs>) -> CliResult<()> {
    for ((id, p), w) in mixture.components.iter().zip(mixture.weights.weights()) {
        let rel = save_member(ctx, run, id, tabular_of(id, p)?)?;
        run.add_meta(MetaEntry { side: side.name().to_string(), policy: id.name(), path: rel, weight: w.to_string() });
    }
    Ok(())
}

fn ladder_csv(entries: &[LadderEntry]) -> String {
    let mut s = String::from("level,win_rate,stderr,matches\n");
    for e in entries {
        s.push_str(&format!("{},{:.6},{:.6},{}\n", e.level, e.win_rate, e.stderr, e.matches));
    }
    s
}

fn cpu_mixture(ctx: &Ctx, level: u8, side: Side) -> CliResult<MixturePolicy<SymbolicObs>> {
    let cpu: SharedPolicy<SymbolicObs> = Arc::new(cpu_policy(level, &ctx.game.config).map_err(runtime)?);
    Ok(MixturePolicy::single(PolicyId::cpu(level, side), cpu))
}

/// Seed streams of the commands.
const STREAM_PRETRAIN: u64 = 1;
const STREAM_LEFT: u64 = 2;
const STREAM_RIGHT: u64 = 3;
const STREAM_EVAL: u64 = 4;
const STREAM_ORACLE: u64 = 5;

fn train_single(ctx: &Ctx, run: &mut RunDir, out: &mut Out) -> CliResult<()> {
    let s = &ctx.cfg.single;
    let lc = ctx.cfg.learn_config(derive(ctx.seed, &[STREAM_LEFT]))?;
    let (policy, steps) = if s.mode == "curriculum" {
        let r = full_game_train(&ctx.game, &s.levels, &lc, s.epochs, s.eval_matches).map_err(runtime)?;
        run.write("curves.csv", &r.curves_csv()).map_err(runtime)?;
        (r.policy, lc.budget_steps * s.epochs as u64)
    } else {
        let learner = train_learner(&ctx.game, &cpu_mixture(ctx, s.level, Side::Right)?, Side::Left, &lc).map_err(runtime)?;
        (learner.greedy(), learner.steps)
    };
    let id = PolicyId::new("Single", Side::Left, steps);
    let rel = save_member(ctx, run, &id, &policy)?;
    run.add_meta(MetaEntry { side: String::from("left"), policy: id.name(), path: rel.clone(), weight: String::from("1") });
    let ladder = cpu_ladder(&ctx.game, &policy, &s.levels, s.eval_matches, derive(ctx.seed, &[STREAM_EVAL])).map_err(runtime)?;
    run.write("ladder.csv", &ladder_csv(&ladder)).map_err(runtime)?;
    say(out, format!("policy {}", run.file(&rel).display()))?;
    for e in &ladder {
        say(out, format!("CPU{} win_rate={:.4} stderr={:.4}", e.level, e.win_rate, e.stderr))?;
    }
    Ok(())
}

fn pretrain(ctx: &Ctx) -> CliResult<QLearner<SymbolicObs>> {
    let p = &ctx.cfg.pretrain;
    let lc = LearnConfig { budget_steps: p.steps, ..ctx.cfg.learn_config(derive(ctx.seed, &[STREAM_PRETRAIN]))? };
    train_learner(&ctx.game, &cpu_mixture(ctx, p.level, Side::Right)?, Side::Left, &lc).map_err(runtime)
}

fn write_payoff(ctx: &Ctx, run: &mut RunDir, payoff: &PayoffMatrix) -> CliResult<()> {
    run.write("payoff.csv", &payoff.to_csv()).map_err(runtime)?;
    let mut cache = PayoffCache::new();
    cache.record(payoff, &ctx.digest);
    run.write("payoff.cache", &cache.to_text()).map_err(runtime)?;
    Ok(())
}

fn weights_text(m: &MetaStrategy) -> String {
    m.weights().iter().map(|w| w.to_string()).collect::<Vec<_>>().join(";")
}

fn train_pop(ctx: &Ctx, run: &mut RunDir, out: &mut Out) -> CliResult<()> {
    let cfg = ctx.cfg;
    let p = &cfg.population;
    match p.algo.as_str() {
        "fsp" | "psro" => {
            let solver = MetaSolver::parse(&p.algo).expect("validated");
            let initial: [Member<SymbolicObs>; 2] = if p.init == "uniform" {
                let u: SharedPolicy<SymbolicObs> = Arc::new(TabularPolicy::uniform(ctx.game.num_actions()));
                [(PolicyId::new("Init", Side::Left, 0), u.clone()), (PolicyId::new("Init", Side::Right, 0), u)]
            } else {
                let pre: SharedPolicy<SymbolicObs> = Arc::new(pretrain(ctx)?.greedy());
                [(PolicyId::new("Init", Side::Left, 0), pre.clone()), (PolicyId::new("Init", Side::Right, 0), pre)]
            };
            let pc = PopulationConfig { solver, iterations: p.iters, payoff: cfg.payoff_mode(), seed: ctx.seed };
            let result = if p.oracle == "rl" {
                let oracle = RlOracle { config: cfg.learn_config(derive(ctx.seed, &[STREAM_ORACLE]))? };
                population_loop(&ctx.game, &pc, &oracle, initial)
            } else {
                population_loop(&ctx.game, &pc, &ExactOracle { cap: p.cap }, initial)
            };
            let pop = result.map_err(runtime)?;
            let payoff = pop.payoffs.last().expect("at least the initial matrix");
            write_payoff(ctx, run, payoff)?;
            let mut meta = String::from("t,extended,left_size,right_size,left_meta,right_meta\n");
            for h in &pop.history {
                meta.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    h.t,
                    h.extended.name(),
                    h.sizes[0],
                    h.sizes[1],
                    weights_text(&h.meta[0]),
                    weights_text(&h.meta[1])
                ));
            }
            run.write("meta.csv", &meta).map_err(runtime)?;
            for side in Side::BOTH {
                save_mixture(ctx, run, side, &pop.mixture(side).map_err(runtime)?)?;
            }
            say(out, format!("algo={} iterations={} population={}x{}", p.algo, p.iters, pop.populations[0].len(), pop.populations[1].len()))?;
        }
        "league" => {
            let pre = pretrain(ctx)?;
            let league = run_league(&ctx.game, &pre, &cfg.league_config()?).map_err(runtime)?;
            write_payoff(ctx, run, &league.payoff)?;
            let mut roster = String::from("policy,role,side,checkpoint,resets\n");
            for side in Side::BOTH {
                for agent in &league.roster.agents[side.index()] {
                    for (id, policy) in &agent.checkpoints {
                        save_member(ctx, run, id, tabular_of(id, policy)?)?;
                        roster.push_str(&format!("{id},{},{},{},{}\n", agent.role.name(), side.name(), id.checkpoint, agent.resets));
                    }
                }
            }
            run.write("roster.csv", &roster).map_err(runtime)?;
            let [left, right] = league.nash_mixtures().map_err(runtime)?;
            save_mixture(ctx, run, Side::Left, &left)?;
            save_mixture(ctx, run, Side::Right, &right)?;
            let (rows, cols) = league.payoff.shape();
            say(out, format!("algo=league cycles={} payoff={rows}x{cols} resets={}", cfg.league.cycles, league.resets.len()))?;
        }
        algo => {
            let lc_left = cfg.learn_config(derive(ctx.seed, &[STREAM_LEFT]))?;
            let mut lc_right = cfg.learn_config(derive(ctx.seed, &[STREAM_RIGHT]))?;
            let role = if algo == "2timescale" {
                lc_right.step_ratio = arenaladder_core::engine::parse_rational(&cfg.independent.slow_ratio).map_err(runtime)?;
                "2T"
            } else {
                "IPPO"
            };
            let r = independent_learn(&ctx.game, &lc_left, &lc_right).map_err(runtime)?;
            let mut diag = String::from("iteration,value_estimate,change_left,change_right\n");
            for d in &r.diagnostics {
                diag.push_str(&format!("{},{:.6},{:.6},{:.6}\n", d.iteration, d.value_estimate, d.change[0], d.change[1]));
            }
            run.write("diagnostics.csv", &diag).map_err(runtime)?;
            let members: [Member<SymbolicObs>; 2] = [
                (PolicyId::new(role, Side::Left, r.steps), Arc::new(r.left)),
                (PolicyId::new(role, Side::Right, r.steps), Arc::new(r.right)),
            ];
            let mut payoff = PayoffMatrix::new();
            payoff.add_row(members[0].0.clone());
            payoff.add_col(members[1].0.clone());
            payoff.refresh(&ctx.game, &members[..1], &members[1..], cfg.payoff_mode(), ctx.seed).map_err(runtime)?;
            write_payoff(ctx, run, &payoff)?;
            for (side, m) in Side::BOTH.into_iter().zip(&members) {
                save_mixture(ctx, run, side, &MixturePolicy::single(m.0.clone(), m.1.clone()))?;
            }
            say(out, format!("algo={algo} steps={} iterations={}", r.steps, r.diagnostics.len()))?;
        }
    }
    Ok(())
}

fn tournament(ctx: &Ctx, policies: Vec<Checkpoint<SymbolicObs>>, run: &mut RunDir, out: &mut Out) -> CliResult<()> {
    let t = &ctx.cfg.tournament;
    let pop: Vec<Member<SymbolicObs>> = policies.into_iter().map(|c| (c.id, Arc::new(c.policy) as SharedPolicy<SymbolicObs>)).collect();
    let ids: Vec<PolicyId> = pop.iter().map(|m| m.0.clone()).collect();
    let matches = play_tournament(&ctx.game, &pop, t.rounds, ctx.seed).map_err(runtime)?;
    let table = rate_matches(&ids, &matches, t.initial, t.k).map_err(runtime)?;
    let mut log = MatchLog::open(&run.file("matches.log")).map_err(runtime)?;
    for (n, m) in matches.iter().enumerate() {
        let s = &m.episode.final_state;
        log.append(&MatchRecord {
            id: n as u64,
            left: ids[m.players[0]].clone(),
            right: ids[m.players[1]].clone(),
            seed: m.seed,
            outcome: m.episode.result.outcome,
            hp: [s.fighters[0].hp, s.fighters[1].hp],
            timer: s.timer,
            steps: m.episode.result.steps,
            dense: m.episode.result.shaped,
            tag: Some(format!("round{}", m.round)),
        })
        .map_err(runtime)?;
    }
    drop(log);
    run.index("matches.log").map_err(runtime)?;
    let ratings = table.to_table();
    run.write("ratings.csv", &ratings).map_err(runtime)?;
    for (id, elo, n) in table.sorted() {
        say(out, format!("{id} elo={elo:.3} matches={n}"))?;
    }
    Ok(())
}

fn exploit(
    ctx: &Ctx,
    (target_id, mixture, side): (PolicyId, MixturePolicy<SymbolicObs>, Side),
    run: &mut RunDir,
    out: &mut Out,
) -> CliResult<()> {
    let e = &ctx.cfg.exploit;
    let method = ExploitMethod::parse(&e.method).expect("validated");
    let lc = LearnConfig { budget_steps: e.budget_steps, ..ctx.cfg.learn_config(derive(ctx.seed, &[STREAM_ORACLE]))? };
    let report = exploitability(&ctx.game, target_id, &mixture, side, method, &lc, e.cap).map_err(runtime)?;
    let text = report.to_text();
    run.write("exploit.txt", &text).map_err(runtime)?;
    for line in text.lines() {
        say(out, line)?;
    }
    Ok(())
}

fn ladder(ctx: &Ctx, mut policies: Vec<Checkpoint<SymbolicObs>>, run: &mut RunDir, out: &mut Out) -> CliResult<()> {
    let l = &ctx.cfg.ladder;
    let c = policies.pop().expect("gathered");
    let entries = cpu_ladder(&ctx.game, &c.policy, &l.levels, l.matches, derive(ctx.seed, &[STREAM_EVAL])).map_err(runtime)?;
    run.write("ladder.csv", &ladder_csv(&entries)).map_err(runtime)?;
    for e in &entries {
        say(out, format!("{} vs CPU{} win_rate={:.4} stderr={:.4}", c.id, e.level, e.win_rate, e.stderr))?;
    }
    Ok(())
}

fn replay(ctx: &Ctx, run: &mut RunDir, out: &mut Out) -> CliResult<()> {
    let path = Path::new(ctx.cfg.replay.file.as_deref().expect("gathered"));
    let r = load_replay(path).map_err(runtime)?;
    let check = r.check().map_err(runtime)?;
    let report = format!(
        "file={}\nsteps={}\noutcome={}\nfinal={}\nverified={}\n",
        path.display(),
        check.steps,
        check.outcome.map(|o| o.name()).unwrap_or("unfinished"),
        check.final_digest,
        check.matches
    );
    run.write("replays/input.replay", &r.to_text()).map_err(runtime)?;
    run.write("replay.txt", &report).map_err(runtime)?;
    for line in report.lines() {
        say(out, line)?;
    }
    if !check.matches {
        return Err(CliError::Runtime(format!(
            "{}: final state digest {} differs from the recorded {}",
            path.display(),
            check.final_digest,
            r.final_digest
        )));
    }
    Ok(())
}

fn serve_play(
    ctx: &Ctx,
    mut policies: Vec<Checkpoint<SymbolicObs>>,
    run: &mut RunDir,
    algorithm: &str,
    out: &mut Out,
) -> CliResult<()> {
    let p = &ctx.cfg.play;
    let c = policies.pop().expect("gathered");
    let human = p.human_side.as_deref().and_then(Side::parse).unwrap_or(c.id.side.opposite_or_left());
    let options = ServerOptions {
        host: p.host.clone(),
        port: p.port,
        tick_rate: p.tick_rate,
        human,
        seed: ctx.seed,
        assets: p.assets.as_ref().map(PathBuf::from),
        match_log: Some(run.file("matches.log")),
        replays: Some(run.file("replays")),
    };
    let server = PlayServer::bind(ctx.game.clone(), c.id.clone(), Arc::new(c.policy), &c.config_digest, options)
        .map_err(CliError::Runtime)?;
    let addr = server.local_addr().map_err(runtime)?;
    let manifest = run.finish("serve-play", algorithm, ctx.seed, ctx.cfg.to_toml()).map_err(runtime)?;
    say(out, format!("listening {addr} agent={} human={}", c.id, human.name()))?;
    say(out, format!("manifest {}", manifest.display()))?;
    out.flush().map_err(runtime)?;
    server.serve();
    Ok(())
}

trait OppositeSide {
    fn opposite_or_left(self) -> Side;
}

impl OppositeSide for Side {
    fn opposite_or_left(self) -> Side {
        self.opponent()
    }
}
