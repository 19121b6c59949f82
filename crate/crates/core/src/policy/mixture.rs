use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::{PolicyId, SharedPolicy};
use crate::error::{Error, Result};
use crate::num::{exact_distribution, q, sum, to_f64, Q};
use crate::seed::Rng;

/// Distribution over a population, held exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MetaStrategy {
    weights: Vec<Q>,
}

impl MetaStrategy {
    pub fn new(weights: Vec<Q>) -> Result<MetaStrategy> {
        if weights.is_empty() {
            return Err(Error::Empty("meta-strategy"));
        }
        if weights.iter().any(Signed::is_negative) {
            return Err(Error::Distribution(String::from("negative meta-strategy weight")));
        }
        let total = sum(&weights);
        if !total.is_one() {
            return Err(Error::Distribution(format!("meta-strategy weights sum to {total}")));
        }
        Ok(MetaStrategy { weights })
    }

    /// Accepts floating-point weights that sum to one within 1e-12.
    pub fn from_f64(weights: &[f64]) -> Result<MetaStrategy> {
        if weights.is_empty() {
            return Err(Error::Empty("meta-strategy"));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::Distribution(format!("negative weight in {weights:?}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Distribution(format!("meta-strategy weights sum to {total}")));
        }
        MetaStrategy::new(exact_distribution(weights))
    }

    pub fn uniform(n: usize) -> MetaStrategy {
        assert!(n > 0);
        MetaStrategy { weights: vec![q(1, n as i64); n] }
    }

    pub fn point(n: usize, i: usize) -> MetaStrategy {
        let mut weights = vec![Q::zero(); n];
        weights[i] = Q::one();
        MetaStrategy { weights }
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.weights.iter().map(to_f64).collect()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Index drawn with probability equal to its weight.
    pub fn draw(&self, rng: &mut Rng) -> usize {
        super::sample_index(&self.as_f64(), rng)
    }
}

/// Population mixture: one component is drawn per episode and held fixed.
pub struct MixturePolicy<O> {
    pub components: Vec<(PolicyId, SharedPolicy<O>)>,
    pub weights: MetaStrategy,
}

impl<O> Clone for MixturePolicy<O> {
    fn clone(&self) -> Self {
        MixturePolicy { components: self.components.clone(), weights: self.weights.clone() }
    }
}

impl<O> core::fmt::Debug for MixturePolicy<O> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let ids: Vec<String> = self.components.iter().map(|(id, _)| id.name()).collect();
        f.debug_struct("MixturePolicy").field("components", &ids).field("weights", &self.weights.as_f64()).finish()
    }
}

impl<O> MixturePolicy<O> {
    pub fn new(components: Vec<(PolicyId, SharedPolicy<O>)>, weights: MetaStrategy) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Empty("mixture"));
        }
        if components.len() != weights.len() {
            return Err(Error::Invalid(format!(
                "{} components but {} weights",
                components.len(),
                weights.len()
            )));
        }
        let n = components[0].1.num_actions();
        if components.iter().any(|(_, p)| p.num_actions() != n) {
            return Err(Error::Invalid(String::from("mixture components disagree on the action count")));
        }
        Ok(MixturePolicy { components, weights })
    }

    pub fn single(id: PolicyId, policy: SharedPolicy<O>) -> Self {
        MixturePolicy { components: vec![(id, policy)], weights: MetaStrategy::point(1, 0) }
    }

    pub fn num_actions(&self) -> usize {
        self.components[0].1.num_actions()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn draw(&self, rng: &mut Rng) -> usize {
        self.weights.draw(rng)
    }

    /// Components with positive weight, with their weights.
    pub fn support(&self) -> Vec<(usize, Q)> {
        self.weights
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_positive())
            .map(|(i, w)| (i, w.clone()))
            .collect()
    }

    /// Per-step action distribution averaged over components.
    pub fn marginal_probs(&self, obs: &O) -> Vec<f64> {
        let mut out = vec![0.0; self.num_actions()];
        for ((_, p), w) in self.components.iter().zip(self.weights.as_f64()) {
            for (o, x) in out.iter_mut().zip(p.probs(obs)) {
                *o += w * x;
            }
        }
        out
    }
}

/// Draws the component to play this episode.
pub fn mixture_draw<'a, O>(m: &'a MixturePolicy<O>, rng: &mut Rng) -> Result<&'a PolicyId> {
    if m.components.is_empty() {
        return Err(Error::Empty("mixture"));
    }
    Ok(&m.components[m.draw(rng)].0)
}
