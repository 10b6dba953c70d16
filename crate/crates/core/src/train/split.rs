//! Repeated random train/validation/test partitions.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub test_fraction: f64,
    /// Share of the non-test samples held out for validation.
    pub val_fraction_of_train: f64,
    /// One seed per repeat.
    pub seeds: Vec<u64>,
}

impl SplitPlan {
    /// 80:20 train/test, then 70:30 train/validation, `repeats` times.
    pub fn new(repeats: usize, base_seed: u64) -> Self {
        Self {
            test_fraction: 0.2,
            val_fraction_of_train: 0.3,
            seeds: (0..repeats as u64)
                .map(|r| base_seed.wrapping_add(r))
                .collect(),
        }
    }

    pub fn repeats(&self) -> usize {
        self.seeds.len()
    }

    fn validate(&self) -> Result<()> {
        let open = |f: f64| f > 0.0 && f < 1.0;
        if !open(self.test_fraction) || !open(self.val_fraction_of_train) {
            return Err(invalid!("split fractions must lie in (0, 1)"));
        }
        if self.seeds.is_empty() {
            return Err(invalid!("split plan needs at least one repeat"));
        }
        Ok(())
    }
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self::new(5, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Set sizes for `n` samples: round-to-nearest for the kept parts, the
/// test set takes the remainder.
pub fn split_sizes(n: usize, plan: &SplitPlan) -> (usize, usize, usize) {
    let kept = ((1.0 - plan.test_fraction) * n as f64).round() as usize;
    let val = (plan.val_fraction_of_train * kept as f64).round() as usize;
    (kept - val, val, n - kept)
}

/// One partition per repeat seed. Every class in `0..classes` must occur.
pub fn split_dataset(labels: &[usize], classes: usize, plan: &SplitPlan) -> Result<Vec<Split>> {
    plan.validate()?;
    if labels.is_empty() {
        return Err(invalid!("cannot split an empty manifest"));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(invalid!("label {bad} out of range for {classes} classes"));
    }
    if let Some(missing) = (0..classes).find(|c| !labels.contains(c)) {
        return Err(invalid!("class {missing} has no samples"));
    }
    let (n_train, n_val, _) = split_sizes(labels.len(), plan);
    Ok(plan
        .seeds
        .iter()
        .map(|&seed| {
            let mut idx: Vec<usize> = (0..labels.len()).collect();
            idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut train = idx[..n_train].to_vec();
            let mut val = idx[n_train..n_train + n_val].to_vec();
            let mut test = idx[n_train + n_val..].to_vec();
            train.sort_unstable();
            val.sort_unstable();
            test.sort_unstable();
            Split { train, val, test }
        })
        .collect())
}
