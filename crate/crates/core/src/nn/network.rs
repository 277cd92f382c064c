use super::layers::Layer;
use super::tensor::Tensor;
use crate::error::Result;

/// Fixed-topology layer stack.
#[derive(Debug, Clone, Default)]
pub struct Sequential {
    pub layers: Vec<Layer>,
}

impl Sequential {
    pub fn new(layers: Vec<Layer>) -> Self {
        Self { layers }
    }

    /// Inference pass; read-only, safe to call from several threads.
    pub fn infer(&self, x: &Tensor) -> Result<Tensor> {
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = layer.infer(&cur)?;
        }
        Ok(cur)
    }

    /// Training pass: batch statistics, caches intermediates for `backward`.
    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        let mut cur = x.clone();
        for layer in &mut self.layers {
            cur = layer.forward_train(&cur)?;
        }
        Ok(cur)
    }

    /// Fills every layer's gradient buffers; weights are not touched.
    /// Returns the gradient with respect to the network input.
    pub fn backward(&mut self, loss_grad: &Tensor) -> Result<Tensor> {
        let mut grad = loss_grad.clone();
        for layer in self.layers.iter_mut().rev() {
            grad = layer.backward(&grad)?;
        }
        Ok(grad)
    }

    pub fn params_mut(&mut self) -> Vec<(&mut Tensor, &Tensor)> {
        self.layers.iter_mut().flat_map(Layer::params_mut).collect()
    }

    pub fn params(&self) -> Vec<(&Tensor, &Tensor)> {
        self.layers.iter().flat_map(Layer::params).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.params().iter().map(|(w, _)| w.len()).sum()
    }
}
