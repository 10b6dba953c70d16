use serde::{Deserialize, Serialize};

use crate::error::{invalid, shape_err, Result};
use crate::graph::{Gradients, ModelParams};
use crate::tensor::Tensor;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub momentum: f64,
    pub seed: u64,
    pub augmentation: bool,
    /// Stop once eval-mode accuracy on the training set reaches this
    /// percentage. Costs one extra pass over the training set per epoch.
    pub stop_at_train_accuracy: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 25,
            epochs: 100,
            momentum: 0.0,
            seed: 0,
            augmentation: true,
            stop_at_train_accuracy: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid!(
                "learning rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(invalid!("batch size and epochs must be positive"));
        }
        if !(self.momentum >= 0.0) {
            return Err(invalid!(
                "momentum must be non-negative, got {}",
                self.momentum
            ));
        }
        Ok(())
    }
}

/// `v = momentum * v + g; p = p - lr * v` for every trainable tensor in
/// `grads`. Velocities start at zero.
pub fn sgd_step(
    params: &mut ModelParams,
    grads: &Gradients,
    velocity: &mut Gradients,
    cfg: &TrainConfig,
) -> Result<()> {
    cfg.validate()?;
    for (k, g) in grads {
        let p = params
            .tensor_mut(k)
            .ok_or_else(|| invalid!("gradient for unknown parameter `{k}`"))?;
        if p.shape() != g.shape() {
            return Err(shape_err!(
                "gradient `{k}` has shape {:?}, parameter has {:?}",
                g.shape(),
                p.shape()
            ));
        }
        let v = velocity
            .entry(k.clone())
            .or_insert_with(|| Tensor::zeros(g.shape()));
        for ((pv, vv), &gv) in p.data_mut().iter_mut().zip(v.data_mut()).zip(g.data()) {
            let vel = if cfg.momentum == 0.0 {
                gv as f64
            } else {
                cfg.momentum * *vv as f64 + gv as f64
            };
            *vv = vel as f32;
            *pv = (*pv as f64 - cfg.learning_rate * vel) as f32;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn single(v: f32) -> ModelParams {
        ModelParams::from_map(BTreeMap::from([(
            "w.weight".to_string(),
            Tensor::scalar(v),
        )]))
    }

    fn grad(v: f32) -> Gradients {
        Gradients::from([("w.weight".to_string(), Tensor::scalar(v))])
    }

    #[test]
    fn zero_gradient_keeps_params() {
        let mut p = single(0.123_456_7);
        let before = p.clone();
        let mut vel = Gradients::new();
        sgd_step(&mut p, &grad(0.0), &mut vel, &TrainConfig::default()).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn one_step_by_hand() {
        let mut p = single(1.0);
        let mut vel = Gradients::new();
        sgd_step(&mut p, &grad(2.0), &mut vel, &TrainConfig::default()).unwrap();
        assert_eq!(p.tensor("w.weight").unwrap().data(), &[0.998f32]);
    }

    #[test]
    fn quadratic_converges() {
        let cfg = TrainConfig {
            learning_rate: 0.1,
            ..TrainConfig::default()
        };
        let mut p = single(1.0);
        let mut vel = Gradients::new();
        for _ in 0..50 {
            let w = p.tensor("w.weight").unwrap().data()[0];
            sgd_step(&mut p, &grad(2.0 * w), &mut vel, &cfg).unwrap();
        }
        let w = p.tensor("w.weight").unwrap().data()[0] as f64;
        assert!(w.abs() < 1e-4);
        assert!((w - 0.8f64.powi(50)).abs() < 1e-9);
    }

    #[test]
    fn momentum_accumulates() {
        let cfg = TrainConfig {
            learning_rate: 0.5,
            momentum: 0.9,
            ..TrainConfig::default()
        };
        let mut p = single(0.0);
        let mut vel = Gradients::new();
        sgd_step(&mut p, &grad(1.0), &mut vel, &cfg).unwrap();
        sgd_step(&mut p, &grad(1.0), &mut vel, &cfg).unwrap();
        // v1 = 1, v2 = 1.9; p = -0.5 - 0.95
        assert!((p.tensor("w.weight").unwrap().data()[0] + 1.45).abs() < 1e-6);
    }

    #[test]
    fn rejects_shape_mismatch() {
        let mut p = single(1.0);
        let mut vel = Gradients::new();
        let bad = Gradients::from([("w.weight".to_string(), Tensor::zeros(&[2]))]);
        assert!(sgd_step(&mut p, &bad, &mut vel, &TrainConfig::default()).is_err());
        let unknown = Gradients::from([("v.weight".to_string(), Tensor::zeros(&[1]))]);
        assert!(sgd_step(&mut p, &unknown, &mut vel, &TrainConfig::default()).is_err());
    }
}
