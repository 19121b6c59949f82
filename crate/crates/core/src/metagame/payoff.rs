//! Empirical payoff matrices between a left and a right population.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::arena::{par_map, play_matches};
use crate::error::{Error, Result};
use crate::exact::evaluate_pair;
use crate::game::{MarkovGame, Side};
use crate::num::{q, to_f64, Q};
use crate::policy::{PolicyId, SharedPolicy};
use crate::seed::{derive, name_hash};

/// A population member.
pub type Member<O> = (PolicyId, SharedPolicy<O>);

/// How unknown payoff entries are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PayoffMode {
    /// Exact outcome probabilities; `cap` bounds the states visited.
    Exact { cap: usize },
    /// Mean score over this many seeded matches.
    Sampled { matches: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cell {
    /// Score of the row (left) policy: wins plus half the draws.
    pub win_rate: Q,
    /// Matches played; 0 for exact entries.
    pub matches: u64,
    pub exact: bool,
}

/// Win rates of left (row) policies against right (column) policies.
/// Entries never estimated are `None` and are never read as 0.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PayoffMatrix {
    rows: Vec<PolicyId>,
    cols: Vec<PolicyId>,
    cells: Vec<Vec<Option<Cell>>>,
}

impl PayoffMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[PolicyId] {
        &self.rows
    }

    pub fn cols(&self) -> &[PolicyId] {
        &self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    pub fn row_index(&self, id: &PolicyId) -> Option<usize> {
        self.rows.iter().position(|r| r == id)
    }

    pub fn col_index(&self, id: &PolicyId) -> Option<usize> {
        self.cols.iter().position(|c| c == id)
    }

    /// Appends a row of unknown entries; existing ids are kept in place.
    pub fn add_row(&mut self, id: PolicyId) -> usize {
        if let Some(i) = self.row_index(&id) {
            return i;
        }
        self.rows.push(id);
        self.cells.push(vec![None; self.cols.len()]);
        self.rows.len() - 1
    }

    pub fn add_col(&mut self, id: PolicyId) -> usize {
        if let Some(j) = self.col_index(&id) {
            return j;
        }
        self.cols.push(id);
        for row in &mut self.cells {
            row.push(None);
        }
        self.cols.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&Cell> {
        self.cells.get(i)?.get(j)?.as_ref()
    }

    pub fn win_rate(&self, i: usize, j: usize) -> Option<&Q> {
        self.get(i, j).map(|c| &c.win_rate)
    }

    pub fn set(&mut self, i: usize, j: usize, cell: Cell) -> Result<()> {
        if cell.win_rate < Q::zero() || cell.win_rate > Q::one() {
            return Err(Error::Invalid(format!("win rate {} outside [0, 1]", cell.win_rate)));
        }
        if !cell.exact && cell.matches == 0 {
            return Err(Error::Invalid(String::from("a sampled entry needs at least one match")));
        }
        let slot = self
            .cells
            .get_mut(i)
            .and_then(|r| r.get_mut(j))
            .ok_or_else(|| Error::Invalid(format!("entry ({i}, {j}) outside the matrix")))?;
        *slot = Some(cell);
        Ok(())
    }

    /// Positions of entries not yet estimated, row-major.
    pub fn unknown(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, row) in self.cells.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if c.is_none() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Win rate of policy `me` on `side` against `opp`, from either
    /// orientation of the matrix.
    pub fn win_rate_of(&self, me: &PolicyId, side: Side, opp: &PolicyId) -> Option<Q> {
        match side {
            Side::Left => self.win_rate(self.row_index(me)?, self.col_index(opp)?).cloned(),
            Side::Right => self.win_rate(self.row_index(opp)?, self.col_index(me)?).map(|w| Q::one() - w),
        }
    }

    /// Zero-sum row payoffs `win_rate − 1/2`.
    pub fn zero_sum(&self) -> Result<Vec<Vec<Q>>> {
        if self.rows.is_empty() || self.cols.is_empty() {
            return Err(Error::Empty("payoff matrix"));
        }
        let half = q(1, 2);
        let mut out = Vec::with_capacity(self.rows.len());
        for (i, row) in self.cells.iter().enumerate() {
            let mut r = Vec::with_capacity(row.len());
            for (j, c) in row.iter().enumerate() {
                let c = c.as_ref().ok_or(Error::UnknownPayoff { row: i, col: j })?;
                r.push(&c.win_rate - &half);
            }
            out.push(r);
        }
        Ok(out)
    }

    /// Fills every unknown entry. `rows` and `cols` must list the matrix's
    /// populations in order. Sampled entries use a seed derived from `seed`
    /// and the two policy names, so an entry does not depend on when it was
    /// estimated.
    pub fn refresh<G: MarkovGame>(
        &mut self,
        game: &G,
        rows: &[Member<G::Obs>],
        cols: &[Member<G::Obs>],
        mode: PayoffMode,
        seed: u64,
    ) -> Result<usize> {
        if rows.len() != self.rows.len() || cols.len() != self.cols.len() {
            return Err(Error::Invalid(String::from("population does not match the payoff matrix")));
        }
        for (id, (pid, _)) in self.rows.iter().zip(rows).chain(self.cols.iter().zip(cols)) {
            if id != pid {
                return Err(Error::Invalid(format!("population member {pid} where {id} was expected")));
            }
        }
        let todo = self.unknown();
        let filled = par_map(todo.len(), |k| {
            let (i, j) = todo[k];
            estimate_cell(game, &rows[i], &cols[j], mode, seed)
        });
        for (&(i, j), cell) in todo.iter().zip(filled) {
            self.set(i, j, cell?)?;
        }
        Ok(todo.len())
    }

    /// Rectangular CSV: a header of column ids, then one line per row id
    /// with win rates; unknown entries are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for c in &self.cols {
            out.push(',');
            out.push_str(&c.name());
        }
        out.push('\n');
        for (id, row) in self.rows.iter().zip(&self.cells) {
            out.push_str(&id.name());
            for c in row {
                out.push(',');
                if let Some(c) = c {
                    out.push_str(&format!("{:.6}", to_f64(&c.win_rate)));
                }
            }
            out.push('\n');
        }
        out
    }
}

fn estimate_cell<G: MarkovGame>(
    game: &G,
    row: &Member<G::Obs>,
    col: &Member<G::Obs>,
    mode: PayoffMode,
    seed: u64,
) -> Result<Cell> {
    match mode {
        PayoffMode::Exact { cap } => {
            let o = evaluate_pair(game, row.1.as_ref(), col.1.as_ref(), cap)?;
            Ok(Cell { win_rate: o.score(), matches: 0, exact: true })
        }
        PayoffMode::Sampled { matches } => {
            if matches == 0 {
                return Err(Error::Invalid(String::from("matches per pair must be >= 1")));
            }
            let pair_seed = derive(seed, &[name_hash(&row.0.name()), name_hash(&col.0.name())]);
            let results = play_matches(game, row.1.as_ref(), col.1.as_ref(), matches as usize, pair_seed);
            let twice: u64 = results.iter().map(|r| r.outcome.score2(Side::Left)).sum();
            Ok(Cell { win_rate: Q::new(twice.into(), (2 * matches as u64).into()), matches: matches as u64, exact: false })
        }
    }
}

/// Payoff matrix of two populations over `matches_per_pair` seeded matches
/// per entry, with all pairs estimated concurrently.
pub fn estimate_payoff<G: MarkovGame>(
    game: &G,
    pop_left: &[Member<G::Obs>],
    pop_right: &[Member<G::Obs>],
    matches_per_pair: u32,
    seed: u64,
) -> Result<PayoffMatrix> {
    if pop_left.is_empty() || pop_right.is_empty() {
        return Err(Error::Empty("population"));
    }
    if matches_per_pair == 0 {
        return Err(Error::Invalid(String::from("matches per pair must be >= 1")));
    }
    let mut p = PayoffMatrix::new();
    for (id, _) in pop_left {
        p.add_row(id.clone());
    }
    for (id, _) in pop_right {
        p.add_col(id.clone());
    }
    p.refresh(game, pop_left, pop_right, PayoffMode::Sampled { matches: matches_per_pair }, seed)?;
    Ok(p)
}

/// Exact payoff matrix of two populations.
pub fn exact_payoff<G: MarkovGame>(
    game: &G,
    pop_left: &[Member<G::Obs>],
    pop_right: &[Member<G::Obs>],
    cap: usize,
) -> Result<PayoffMatrix> {
    if pop_left.is_empty() || pop_right.is_empty() {
        return Err(Error::Empty("population"));
    }
    let mut p = PayoffMatrix::new();
    for (id, _) in pop_left {
        p.add_row(id.clone());
    }
    for (id, _) in pop_right {
        p.add_col(id.clone());
    }
    p.refresh(game, pop_left, pop_right, PayoffMode::Exact { cap }, 0)?;
    Ok(p)
}
