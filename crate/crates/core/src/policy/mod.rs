//! Policies over a game's action indices: tabular, scripted CPU and
//! mixtures drawn once per episode.

mod cpu;
mod mixture;
mod tabular;

pub use cpu::{cpu_policy, CpuParams, ScriptedCpu, CPU_LEVELS};
pub use mixture::{mixture_draw, MetaStrategy, MixturePolicy};
pub use tabular::TabularPolicy;

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::game::Side;
use crate::num::Q;
use crate::seed::Rng;

/// A stochastic policy mapping observations to distributions over action
/// indices.
pub trait Policy<O>: Send + Sync {
    fn num_actions(&self) -> usize;

    fn probs(&self, obs: &O) -> Vec<f64>;

    /// Exact version of [`Policy::probs`], summing to one.
    fn exact_probs(&self, obs: &O) -> Vec<Q> {
        crate::num::exact_distribution(&self.probs(obs))
    }

    fn act(&self, obs: &O, rng: &mut Rng) -> usize {
        sample_index(&self.probs(obs), rng)
    }

    /// The underlying table, for policies that are one.
    fn tabular(&self) -> Option<&TabularPolicy<O>>
    where
        O: Eq + core::hash::Hash,
    {
        None
    }
}

impl<O, P: Policy<O> + ?Sized> Policy<O> for Arc<P> {
    fn num_actions(&self) -> usize {
        (**self).num_actions()
    }

    fn probs(&self, obs: &O) -> Vec<f64> {
        (**self).probs(obs)
    }

    fn exact_probs(&self, obs: &O) -> Vec<Q> {
        (**self).exact_probs(obs)
    }

    fn act(&self, obs: &O, rng: &mut Rng) -> usize {
        (**self).act(obs, rng)
    }

    fn tabular(&self) -> Option<&TabularPolicy<O>>
    where
        O: Eq + core::hash::Hash,
    {
        (**self).tabular()
    }
}

pub type SharedPolicy<O> = Arc<dyn Policy<O>>;

/// Inverse-CDF draw from `probs`; zero-probability entries are never chosen.
pub fn sample_index(probs: &[f64], rng: &mut Rng) -> usize {
    let u: f64 = rng.gen();
    let total: f64 = probs.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if target < acc {
            return i;
        }
    }
    last
}

/// Name of a policy within a population, shaped `Role_Side_Checkpoint`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolicyId {
    pub role: String,
    pub side: Side,
    pub checkpoint: u64,
}

impl PolicyId {
    pub fn new(role: &str, side: Side, checkpoint: u64) -> PolicyId {
        debug_assert!(!role.contains('_') && !role.is_empty());
        PolicyId { role: String::from(role), side, checkpoint }
    }

    pub fn cpu(level: u8, side: Side) -> PolicyId {
        PolicyId::new(&format!("CPU{level}"), side, 0)
    }

    pub fn name(&self) -> String {
        format!("{}_{}_{}", self.role, self.side.name(), self.checkpoint)
    }

    pub fn parse(s: &str) -> Result<PolicyId> {
        let bad = || Error::Invalid(format!("policy id `{s}` is not Role_Side_Checkpoint"));
        let mut parts = s.split('_');
        let (Some(role), Some(side), Some(ck), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
            return Err(bad());
        };
        if role.is_empty() || !role.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(bad());
        }
        let side = Side::parse(side).ok_or_else(bad)?;
        let checkpoint = ck.parse().map_err(|_| bad())?;
        Ok(PolicyId { role: String::from(role), side, checkpoint })
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}_{}", self.role, self.side.name(), self.checkpoint)
    }
}
