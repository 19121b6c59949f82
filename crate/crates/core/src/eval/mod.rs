//! Evaluation: CPU ladders, Elo tournaments, exploitability and the CPU
//! curriculum.

mod curriculum;
mod elo;
mod exploit;

pub use curriculum::{cpu_ladder, curriculum_weights, full_game_train, CurriculumRun, CurriculumState, CurvePoint, LadderEntry};
pub use elo::{
    elo_expected, elo_update, play_tournament, rate_matches, run_tournament, EloRecord, RatingTable, TournamentMatch, DEFAULT_ELO,
    DEFAULT_K,
};
pub use exploit::{exploitability, rl_exploit, ExploitMethod, ExploitReport, Plateau};
