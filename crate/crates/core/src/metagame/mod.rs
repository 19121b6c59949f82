//! Population self-play over policies: payoff matrices, meta-strategy
//! solvers, the FSP/PSRO population loop and league training.

mod league;
mod nash;
mod payoff;
mod population;

pub use league::{league_step, pfsp_weights, run_league, LeagueAgent, LeagueConfig, LeagueRoster, LeagueRun, Role};
pub use nash::{col_guarantee, row_guarantee, solve_nash, solve_uniform, solve_zero_sum, NashSolution};
pub use payoff::{estimate_payoff, exact_payoff, Cell, Member, PayoffMatrix, PayoffMode};
pub use population::{
    population_loop, BrOracle, ExactOracle, IterationRecord, MetaSolver, PopulationConfig, PopulationRun, RlOracle,
};
