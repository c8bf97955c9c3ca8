use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{is_transformation_allowed, ImplausibilityType};
use crate::config::TargetDistribution;
use crate::error::{Error, Result};
use crate::scene::{Scene, SizeCategory};

/// Running tally used to steer transformations toward a target mix of
/// small, medium and large objects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionState {
    pub target_dist: BTreeMap<SizeCategory, f64>,
    pub transformed_counts: BTreeMap<SizeCategory, u64>,
    pub rng_seed: u64,
}

impl SelectionState {
    pub fn new(target: &TargetDistribution, rng_seed: u64) -> Self {
        SelectionState {
            target_dist: target.to_map(),
            transformed_counts: SizeCategory::ALL.iter().map(|&c| (c, 0)).collect(),
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut sum = 0.0;
        for c in SizeCategory::ALL {
            let v = self.target(c);
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("target fraction for {c} is {v}")));
            }
            sum += v;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("target fractions sum to {sum}")));
        }
        Ok(())
    }

    pub fn target(&self, c: SizeCategory) -> f64 {
        self.target_dist.get(&c).copied().unwrap_or(0.0)
    }

    pub fn count(&self, c: SizeCategory) -> u64 {
        self.transformed_counts.get(&c).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.transformed_counts.values().sum()
    }

    /// Share of transformations so far in category `c`; zero before any.
    pub fn current_dist(&self, c: SizeCategory) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.count(c) as f64 / total as f64
        }
    }

    pub fn weight(&self, c: SizeCategory) -> f64 {
        (self.target(c) - self.current_dist(c)).max(0.0)
    }

    pub fn record(&mut self, c: SizeCategory) {
        *self.transformed_counts.entry(c).or_insert(0) += 1;
    }
}

/// Objects eligible for a transformation type with their selection weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidates {
    pub objects: Vec<String>,
    pub weights: Vec<f64>,
    /// Set when too few objects had positive weight and every weight was
    /// replaced by its category's target fraction.
    pub fallback: bool,
}

/// Weights `max(0, target − current share)` per allowed object, falling back
/// to the bare target fractions when fewer than `min_positive` weights are
/// strictly positive.
pub fn candidate_weights(
    scene: &Scene,
    t: ImplausibilityType,
    state: &SelectionState,
    min_positive: usize,
) -> Result<Candidates> {
    state.validate()?;
    let allowed: Vec<_> = scene
        .objects()
        .iter()
        .filter(|o| is_transformation_allowed(o, t))
        .collect();
    if allowed.is_empty() {
        return Err(Error::NoCandidates);
    }
    let mut weights: Vec<f64> = allowed.iter().map(|o| state.weight(o.size_category)).collect();
    let positive = weights.iter().filter(|&&w| w > 0.0).count();
    let fallback = positive < min_positive;
    if fallback {
        weights = allowed.iter().map(|o| state.target(o.size_category)).collect();
    }
    Ok(Candidates {
        objects: allowed.iter().map(|o| o.id.clone()).collect(),
        weights,
        fallback,
    })
}

/// Weighted sampling without replacement of up to `count` objects.
///
/// Each draw is proportional to weight among the remaining positive-weight
/// objects; once none remain, draws are uniform over the zero-weight rest.
pub fn select_objects<R: Rng + ?Sized>(
    objects: &[String],
    weights: &[f64],
    count: usize,
    rng: &mut R,
) -> Result<Vec<String>> {
    if objects.is_empty() {
        return Err(Error::NoCandidates);
    }
    if objects.len() != weights.len() {
        return Err(Error::Schema(format!(
            "{} objects but {} weights",
            objects.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::Schema(format!("invalid selection weight {w}")));
    }
    let mut remaining: Vec<usize> = (0..objects.len()).collect();
    let mut picked = Vec::with_capacity(count.min(objects.len()));
    while picked.len() < count && !remaining.is_empty() {
        let positive: Vec<usize> = remaining.iter().copied().filter(|&i| weights[i] > 0.0).collect();
        let choice = if positive.is_empty() {
            remaining[rng.random_range(0..remaining.len())]
        } else {
            let dist = WeightedIndex::new(positive.iter().map(|&i| weights[i]))
                .map_err(|e| Error::Schema(format!("selection weights: {e}")))?;
            positive[dist.sample(rng)]
        };
        remaining.retain(|&i| i != choice);
        picked.push(objects[choice].clone());
    }
    Ok(picked)
}
