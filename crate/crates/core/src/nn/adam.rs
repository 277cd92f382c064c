use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam with bias correction. Moment buffers are allocated lazily on the
/// first step and must match the parameter list on every later step.
#[derive(Debug, Clone)]
pub struct Adam {
    pub config: AdamConfig,
    step: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: Vec<(&mut Tensor, &Tensor)>) -> Result<()> {
        for (i, (w, g)) in params.iter().enumerate() {
            if w.shape() != g.shape() {
                return Err(Error::shape(
                    "adam",
                    format!("parameter {i}: weight {:?} vs gradient {:?}", w.shape(), g.shape()),
                ));
            }
            if !g.all_finite() {
                return Err(Error::NonFinite(format!("gradient of parameter {i}")));
            }
        }
        if self.first.is_empty() {
            self.first = params.iter().map(|(w, _)| vec![0.0; w.len()]).collect();
            self.second = self.first.clone();
        } else if self.first.len() != params.len()
            || self.first.iter().zip(&params).any(|(m, (w, _))| m.len() != w.len())
        {
            return Err(Error::shape("adam", "parameter list changed between steps"));
        }
        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for ((w, g), (m, v)) in params
            .into_iter()
            .zip(self.first.iter_mut().zip(self.second.iter_mut()))
        {
            for (((wi, gi), mi), vi) in w.data_mut().iter_mut().zip(g.data()).zip(m).zip(v) {
                *mi = beta1 * *mi + (1.0 - beta1) * gi;
                *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
                *wi -= learning_rate * (*mi / c1) / ((*vi / c2).sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(v: f64) -> Tensor {
        Tensor::new(vec![1], vec![v]).unwrap()
    }

    #[test]
    fn zero_gradient_leaves_weights() {
        let mut w = Tensor::new(vec![3], vec![1.0, -2.0, 0.5]).unwrap();
        let g = Tensor::zeros(&[3]);
        let mut adam = Adam::new(AdamConfig::default());
        adam.step(vec![(&mut w, &g)]).unwrap();
        assert_eq!(w.data(), &[1.0, -2.0, 0.5]);
        assert_eq!(adam.steps(), 1);
    }

    #[test]
    fn first_step_is_signed_learning_rate() {
        let mut w = Tensor::new(vec![2], vec![0.0, 0.0]).unwrap();
        let g = Tensor::new(vec![2], vec![3.0, -0.02]).unwrap();
        let mut adam = Adam::new(AdamConfig::default());
        adam.step(vec![(&mut w, &g)]).unwrap();
        assert!((w.data()[0] + 1e-3).abs() < 1e-10);
        assert!((w.data()[1] - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn constant_gradient_keeps_bias_corrected_step() {
        // With bias correction, m_hat = g and v_hat = g^2 at every step for a
        // constant gradient, so the second step has the same size as the first.
        let mut w = one(0.0);
        let g = one(0.5);
        let mut adam = Adam::new(AdamConfig::default());
        adam.step(vec![(&mut w, &g)]).unwrap();
        let first = -w.data()[0];
        adam.step(vec![(&mut w, &g)]).unwrap();
        let second = -w.data()[0] - first;
        let expected = 1e-3 * 0.5 / (0.5 + 1e-8);
        assert!((first - expected).abs() < 1e-15);
        assert!((second - expected).abs() < 1e-15);
    }

    #[test]
    fn smaller_gradient_after_large_one_takes_smaller_step() {
        let mut w = one(0.0);
        let mut adam = Adam::new(AdamConfig::default());
        adam.step(vec![(&mut w, &one(1.0))]).unwrap();
        let first = -w.data()[0];
        adam.step(vec![(&mut w, &one(0.1))]).unwrap();
        let second = -w.data()[0] - first;
        assert!(second < first);
        assert!(second > 0.0);
    }

    #[test]
    fn nan_gradient_rejected_before_update() {
        let mut w = one(1.0);
        let mut adam = Adam::new(AdamConfig::default());
        assert!(adam.step(vec![(&mut w, &one(f64::NAN))]).is_err());
        assert_eq!(w.data(), &[1.0]);
        assert_eq!(adam.steps(), 0);
    }
}
