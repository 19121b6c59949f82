use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::hash::Hash;

use hashbrown::HashMap;
use rustc_hash::FxBuildHasher;

use super::Policy;
use crate::error::{Error, Result};

/// Table from observations to action distributions with a fallback for
/// observations it has never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy<O: Eq + Hash> {
    num_actions: usize,
    table: HashMap<O, Vec<f64>, FxBuildHasher>,
    default_dist: Vec<f64>,
}

pub(crate) fn check_distribution(p: &[f64], n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::Distribution(format!("expected {n} entries, got {}", p.len())));
    }
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::Distribution(format!("negative or non-finite entry in {p:?}")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::Distribution(format!("entries sum to {s}")));
    }
    Ok(())
}

impl<O: Eq + Hash + Clone + Ord> TabularPolicy<O> {
    pub fn uniform(num_actions: usize) -> Self {
        assert!(num_actions > 0);
        TabularPolicy {
            num_actions,
            table: HashMap::default(),
            default_dist: vec![1.0 / num_actions as f64; num_actions],
        }
    }

    pub fn with_default(default_dist: Vec<f64>) -> Result<Self> {
        check_distribution(&default_dist, default_dist.len())?;
        Ok(TabularPolicy { num_actions: default_dist.len(), table: HashMap::default(), default_dist })
    }

    /// Always plays `action`.
    pub fn point_mass(num_actions: usize, action: usize) -> Self {
        let mut d = vec![0.0; num_actions];
        d[action] = 1.0;
        TabularPolicy { num_actions, table: HashMap::default(), default_dist: d }
    }

    pub fn set(&mut self, obs: O, probs: Vec<f64>) -> Result<()> {
        check_distribution(&probs, self.num_actions)?;
        self.table.insert(obs, probs);
        Ok(())
    }

    pub fn set_deterministic(&mut self, obs: O, action: usize) {
        let mut d = vec![0.0; self.num_actions];
        d[action] = 1.0;
        self.table.insert(obs, d);
    }

    pub fn get(&self, obs: &O) -> &[f64] {
        self.table.get(obs).map(Vec::as_slice).unwrap_or(&self.default_dist)
    }

    pub fn stored(&self, obs: &O) -> Option<&[f64]> {
        self.table.get(obs).map(Vec::as_slice)
    }

    pub fn default_dist(&self) -> &[f64] {
        &self.default_dist
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Stored entries in observation order.
    pub fn entries(&self) -> Vec<(&O, &Vec<f64>)> {
        let mut v: Vec<_> = self.table.iter().collect();
        v.sort_unstable_by(|a, b| a.0.cmp(b.0));
        v
    }

    /// Sum over `observations` of the L1 distance between the two policies.
    pub fn l1_distance(&self, other: &Self, observations: &[O]) -> f64 {
        observations
            .iter()
            .map(|o| self.get(o).iter().zip(other.get(o)).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .sum()
    }
}

impl<O: Eq + Hash + Clone + Ord + Send + Sync> Policy<O> for TabularPolicy<O> {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn probs(&self, obs: &O) -> Vec<f64> {
        self.get(obs).to_vec()
    }

    fn tabular(&self) -> Option<&TabularPolicy<O>> {
        Some(self)
    }
}
