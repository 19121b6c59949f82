use num_rational::Rational64;
use num_traits::Zero;

use super::config::EngineConfig;
use super::state::GameState;
use crate::game::Side;

/// Shaped reward `α [λ ΔHP_opp − ΔHP_own + bonus]` for `side` on the
/// transition `prev → next`. The bonus is `bonus_scale · HP_own / max_hp` on a
/// win and `−bonus_scale · HP_opp / max_hp` on a loss.
pub fn dense_reward(prev: &GameState, next: &GameState, side: Side, config: &EngineConfig) -> Rational64 {
    let own = side.index();
    let opp = side.opponent().index();
    let lost = |i: usize| Rational64::from_integer(prev.fighters[i].hp as i64 - next.fighters[i].hp as i64);
    let max_hp = Rational64::from_integer(config.max_hp as i64);
    let bonus = match next.winner.filter(|_| next.terminal).and_then(|o| o.winner()) {
        Some(w) if w == side => config.bonus_scale * Rational64::from_integer(next.fighters[own].hp as i64) / max_hp,
        Some(_) => -config.bonus_scale * Rational64::from_integer(next.fighters[opp].hp as i64) / max_hp,
        None => Rational64::zero(),
    };
    config.reward_alpha * (config.reward_lambda * lost(opp) - lost(own) + bonus)
}

/// Floating-point twin of [`dense_reward`] for the learners' inner loops.
pub fn dense_reward_f64(prev: &GameState, next: &GameState, side: Side, config: &EngineConfig) -> f64 {
    let r = |v: Rational64| *v.numer() as f64 / *v.denom() as f64;
    let own = side.index();
    let opp = side.opponent().index();
    let lost = |i: usize| prev.fighters[i].hp as f64 - next.fighters[i].hp as f64;
    let max_hp = config.max_hp as f64;
    let bonus = match next.winner.filter(|_| next.terminal).and_then(|o| o.winner()) {
        Some(w) if w == side => r(config.bonus_scale) * next.fighters[own].hp as f64 / max_hp,
        Some(_) => -r(config.bonus_scale) * next.fighters[opp].hp as f64 / max_hp,
        None => 0.0,
    };
    r(config.reward_alpha) * (r(config.reward_lambda) * lost(opp) - lost(own) + bonus)
}
