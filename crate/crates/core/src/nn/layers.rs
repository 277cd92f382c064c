//! Layer kinds used by the window classifier, each with an inference pass,
//! a caching training pass and a backward pass.

use rand::Rng;

use super::gemm::gemm;
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const BN_MOMENTUM: f64 = 0.9;
pub const BN_EPSILON: f64 = 1e-5;

/// Glorot-uniform fill: U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))).
fn glorot(t: &mut Tensor, fan_in: usize, fan_out: usize, rng: &mut impl Rng) {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for v in t.data_mut() {
        *v = rng.gen_range(-limit..=limit);
    }
}

/// Same-padded 1-D convolution over `[batch, channels, length]` input.
///
/// For even kernels the padding is left-heavy (`k/2` on the left,
/// `k/2 - 1` on the right), so output length always equals input length.
#[derive(Debug, Clone)]
pub struct Conv1d {
    pub(crate) in_channels: usize,
    pub(crate) out_channels: usize,
    pub(crate) kernel: usize,
    /// `[out, in, kernel]`
    pub(crate) weight: Tensor,
    pub(crate) bias: Tensor,
    pub(crate) grad_weight: Tensor,
    pub(crate) grad_bias: Tensor,
    cache: Option<ConvCache>,
}

#[derive(Debug, Clone)]
struct ConvCache {
    cols: Vec<f64>,
    batch: usize,
    length: usize,
}

impl Conv1d {
    pub fn new(in_channels: usize, out_channels: usize, kernel: usize, rng: &mut impl Rng) -> Self {
        let mut weight = Tensor::zeros(&[out_channels, in_channels, kernel]);
        glorot(&mut weight, in_channels * kernel, out_channels * kernel, rng);
        Self::from_parts(weight, Tensor::zeros(&[out_channels]))
            .expect("shapes constructed consistently")
    }

    pub fn from_parts(weight: Tensor, bias: Tensor) -> Result<Self> {
        weight.expect_rank(3, "conv1d weight")?;
        let (out_channels, in_channels, kernel) = (weight.dim(0), weight.dim(1), weight.dim(2));
        if kernel == 0 {
            return Err(Error::shape("conv1d", "kernel size must be positive"));
        }
        if bias.shape() != [out_channels] {
            return Err(Error::shape(
                "conv1d bias",
                format!("expected [{out_channels}], got {:?}", bias.shape()),
            ));
        }
        Ok(Self {
            in_channels,
            out_channels,
            kernel,
            grad_weight: Tensor::zeros(weight.shape()),
            grad_bias: Tensor::zeros(bias.shape()),
            weight,
            bias,
            cache: None,
        })
    }

    pub fn pad_left(&self) -> usize {
        self.kernel / 2
    }

    fn check_input(&self, x: &Tensor) -> Result<(usize, usize)> {
        x.expect_rank(3, "conv1d input")?;
        if x.dim(1) != self.in_channels {
            return Err(Error::shape(
                "conv1d input",
                format!(
                    "channel dimension (axis 1) is {}, layer expects {}",
                    x.dim(1),
                    self.in_channels
                ),
            ));
        }
        Ok((x.dim(0), x.dim(2)))
    }

    fn im2col(&self, sample: &[f64], length: usize, col: &mut [f64]) {
        let pad = self.pad_left() as isize;
        for i in 0..self.in_channels {
            let src = &sample[i * length..(i + 1) * length];
            for k in 0..self.kernel {
                let row = &mut col[(i * self.kernel + k) * length..(i * self.kernel + k + 1) * length];
                let shift = k as isize - pad;
                for (t, v) in row.iter_mut().enumerate() {
                    let s = t as isize + shift;
                    *v = if s >= 0 && (s as usize) < length {
                        src[s as usize]
                    } else {
                        0.0
                    };
                }
            }
        }
    }

    fn run(&self, x: &Tensor, keep_cols: bool) -> Result<(Tensor, Option<Vec<f64>>)> {
        let (batch, length) = self.check_input(x)?;
        let rows = self.in_channels * self.kernel;
        let col_len = rows * length;
        let mut out = Tensor::zeros(&[batch, self.out_channels, length]);
        let mut kept = if keep_cols {
            Some(vec![0.0; batch * col_len])
        } else {
            None
        };
        let mut scratch = vec![0.0; if keep_cols { 0 } else { col_len }];
        let in_stride = self.in_channels * length;
        let out_stride = self.out_channels * length;
        for b in 0..batch {
            let col: &mut [f64] = match kept.as_mut() {
                Some(all) => &mut all[b * col_len..(b + 1) * col_len],
                None => &mut scratch,
            };
            self.im2col(&x.data()[b * in_stride..(b + 1) * in_stride], length, col);
            let dst = &mut out.data_mut()[b * out_stride..(b + 1) * out_stride];
            for (c, chunk) in dst.chunks_mut(length).enumerate() {
                chunk.fill(self.bias.data()[c]);
            }
            gemm(
                self.out_channels,
                rows,
                length,
                self.weight.data(),
                false,
                col,
                false,
                1.0,
                dst,
            );
        }
        Ok((out, kept))
    }

    pub fn infer(&self, x: &Tensor) -> Result<Tensor> {
        self.run(x, false).map(|(out, _)| out)
    }

    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        let (out, cols) = self.run(x, true)?;
        self.cache = Some(ConvCache {
            cols: cols.expect("requested"),
            batch: x.dim(0),
            length: x.dim(2),
        });
        Ok(out)
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        let cache = self.cache.take().ok_or(Error::NoForwardCache("conv1d"))?;
        let (batch, length) = (cache.batch, cache.length);
        if grad_out.shape() != [batch, self.out_channels, length] {
            return Err(Error::shape(
                "conv1d backward",
                format!("gradient shape {:?}", grad_out.shape()),
            ));
        }
        let rows = self.in_channels * self.kernel;
        let col_len = rows * length;
        let out_stride = self.out_channels * length;
        let in_stride = self.in_channels * length;
        let pad = self.pad_left() as isize;
        self.grad_weight.fill(0.0);
        self.grad_bias.fill(0.0);
        let mut grad_in = Tensor::zeros(&[batch, self.in_channels, length]);
        let mut dcol = vec![0.0; col_len];
        for b in 0..batch {
            let dy = &grad_out.data()[b * out_stride..(b + 1) * out_stride];
            let col = &cache.cols[b * col_len..(b + 1) * col_len];
            gemm(
                self.out_channels,
                length,
                rows,
                dy,
                false,
                col,
                true,
                1.0,
                self.grad_weight.data_mut(),
            );
            for (c, chunk) in dy.chunks(length).enumerate() {
                self.grad_bias.data_mut()[c] += chunk.iter().sum::<f64>();
            }
            gemm(
                rows,
                self.out_channels,
                length,
                self.weight.data(),
                true,
                dy,
                false,
                0.0,
                &mut dcol,
            );
            let dx = &mut grad_in.data_mut()[b * in_stride..(b + 1) * in_stride];
            for i in 0..self.in_channels {
                for k in 0..self.kernel {
                    let row = &dcol[(i * self.kernel + k) * length..(i * self.kernel + k + 1) * length];
                    let shift = k as isize - pad;
                    for (t, g) in row.iter().enumerate() {
                        let s = t as isize + shift;
                        if s >= 0 && (s as usize) < length {
                            dx[i * length + s as usize] += g;
                        }
                    }
                }
            }
        }
        Ok(grad_in)
    }
}

/// Per-channel batch normalization over `[batch, channels, length]` or
/// `[batch, channels]` input.
#[derive(Debug, Clone)]
pub struct BatchNorm {
    pub(crate) channels: usize,
    pub(crate) momentum: f64,
    pub(crate) epsilon: f64,
    pub(crate) gamma: Tensor,
    pub(crate) beta: Tensor,
    pub(crate) running_mean: Tensor,
    pub(crate) running_var: Tensor,
    pub(crate) initialized: bool,
    pub(crate) grad_gamma: Tensor,
    pub(crate) grad_beta: Tensor,
    cache: Option<BnCache>,
}

#[derive(Debug, Clone)]
struct BnCache {
    xhat: Vec<f64>,
    inv_std: Vec<f64>,
    shape: Vec<usize>,
}

fn channel_layout(x: &Tensor, channels: usize) -> Result<(usize, usize)> {
    let (batch, ch, length) = match x.shape() {
        [b, c] => (*b, *c, 1),
        [b, c, l] => (*b, *c, *l),
        other => {
            return Err(Error::shape(
                "batchnorm input",
                format!("expected rank 2 or 3, got {other:?}"),
            ))
        }
    };
    if ch != channels {
        return Err(Error::shape(
            "batchnorm input",
            format!("channel dimension (axis 1) is {ch}, layer expects {channels}"),
        ));
    }
    Ok((batch, length))
}

impl BatchNorm {
    pub fn new(channels: usize) -> Self {
        Self::with_hyper(channels, BN_MOMENTUM, BN_EPSILON)
    }

    pub fn with_hyper(channels: usize, momentum: f64, epsilon: f64) -> Self {
        let mut gamma = Tensor::zeros(&[channels]);
        gamma.fill(1.0);
        let mut running_var = Tensor::zeros(&[channels]);
        running_var.fill(1.0);
        Self {
            channels,
            momentum,
            epsilon,
            gamma,
            beta: Tensor::zeros(&[channels]),
            running_mean: Tensor::zeros(&[channels]),
            running_var,
            initialized: false,
            grad_gamma: Tensor::zeros(&[channels]),
            grad_beta: Tensor::zeros(&[channels]),
            cache: None,
        }
    }

    pub fn running_stats(&self) -> (&[f64], &[f64]) {
        (self.running_mean.data(), self.running_var.data())
    }

    pub fn infer(&self, x: &Tensor) -> Result<Tensor> {
        let (batch, length) = channel_layout(x, self.channels)?;
        if !self.initialized {
            return Err(Error::UninitializedStats);
        }
        let mut out = x.clone();
        let data = out.data_mut();
        for b in 0..batch {
            for c in 0..self.channels {
                let inv = 1.0 / (self.running_var.data()[c] + self.epsilon).sqrt();
                let (g, be, mu) = (self.gamma.data()[c], self.beta.data()[c], self.running_mean.data()[c]);
                let base = (b * self.channels + c) * length;
                for v in &mut data[base..base + length] {
                    *v = g * (*v - mu) * inv + be;
                }
            }
        }
        Ok(out)
    }

    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        let (batch, length) = channel_layout(x, self.channels)?;
        if batch < 2 {
            return Err(Error::InvalidInput(
                "batchnorm training needs a batch of at least 2".into(),
            ));
        }
        let n = (batch * length) as f64;
        let mut out = x.clone();
        let mut xhat = vec![0.0; x.len()];
        let mut inv_std = vec![0.0; self.channels];
        for c in 0..self.channels {
            let lanes = (0..batch).map(|b| (b * self.channels + c) * length);
            let mut sum = 0.0;
            for base in lanes.clone() {
                sum += x.data()[base..base + length].iter().sum::<f64>();
            }
            let mean = sum / n;
            let mut sq = 0.0;
            for base in lanes.clone() {
                sq += x.data()[base..base + length]
                    .iter()
                    .map(|v| (v - mean) * (v - mean))
                    .sum::<f64>();
            }
            let var = sq / n;
            let inv = 1.0 / (var + self.epsilon).sqrt();
            inv_std[c] = inv;
            let (g, be) = (self.gamma.data()[c], self.beta.data()[c]);
            for base in lanes {
                for t in base..base + length {
                    let h = (x.data()[t] - mean) * inv;
                    xhat[t] = h;
                    out.data_mut()[t] = g * h + be;
                }
            }
            let rm = &mut self.running_mean.data_mut()[c];
            *rm = if self.initialized {
                self.momentum * *rm + (1.0 - self.momentum) * mean
            } else {
                mean
            };
            let rv = &mut self.running_var.data_mut()[c];
            *rv = if self.initialized {
                self.momentum * *rv + (1.0 - self.momentum) * var
            } else {
                var
            };
        }
        self.initialized = true;
        self.cache = Some(BnCache {
            xhat,
            inv_std,
            shape: x.shape().to_vec(),
        });
        Ok(out)
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        let cache = self.cache.take().ok_or(Error::NoForwardCache("batchnorm"))?;
        if grad_out.shape() != cache.shape.as_slice() {
            return Err(Error::shape(
                "batchnorm backward",
                format!("gradient shape {:?}", grad_out.shape()),
            ));
        }
        let (batch, length) = channel_layout(grad_out, self.channels)?;
        let n = (batch * length) as f64;
        let mut grad_in = Tensor::zeros(grad_out.shape());
        for c in 0..self.channels {
            let lanes = (0..batch).map(|b| (b * self.channels + c) * length);
            let (mut sum_dy, mut sum_dy_xhat) = (0.0, 0.0);
            for base in lanes.clone() {
                for t in base..base + length {
                    sum_dy += grad_out.data()[t];
                    sum_dy_xhat += grad_out.data()[t] * cache.xhat[t];
                }
            }
            self.grad_gamma.data_mut()[c] = sum_dy_xhat;
            self.grad_beta.data_mut()[c] = sum_dy;
            let scale = self.gamma.data()[c] * cache.inv_std[c] / n;
            for base in lanes {
                for t in base..base + length {
                    grad_in.data_mut()[t] =
                        scale * (n * grad_out.data()[t] - sum_dy - cache.xhat[t] * sum_dy_xhat);
                }
            }
        }
        Ok(grad_in)
    }
}

/// Fully connected layer, `y = x W + b` with `W: [in, out]`.
#[derive(Debug, Clone)]
pub struct Dense {
    pub(crate) inputs: usize,
    pub(crate) outputs: usize,
    pub(crate) weight: Tensor,
    pub(crate) bias: Tensor,
    pub(crate) grad_weight: Tensor,
    pub(crate) grad_bias: Tensor,
    cache: Option<Tensor>,
}

impl Dense {
    pub fn new(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let mut weight = Tensor::zeros(&[inputs, outputs]);
        glorot(&mut weight, inputs, outputs, rng);
        Self::from_parts(weight, Tensor::zeros(&[outputs])).expect("shapes constructed consistently")
    }

    pub fn from_parts(weight: Tensor, bias: Tensor) -> Result<Self> {
        weight.expect_rank(2, "dense weight")?;
        let (inputs, outputs) = (weight.dim(0), weight.dim(1));
        if bias.shape() != [outputs] {
            return Err(Error::shape(
                "dense bias",
                format!("expected [{outputs}], got {:?}", bias.shape()),
            ));
        }
        Ok(Self {
            inputs,
            outputs,
            grad_weight: Tensor::zeros(weight.shape()),
            grad_bias: Tensor::zeros(bias.shape()),
            weight,
            bias,
            cache: None,
        })
    }

    pub fn infer(&self, x: &Tensor) -> Result<Tensor> {
        x.expect_rank(2, "dense input")?;
        if x.dim(1) != self.inputs {
            return Err(Error::shape(
                "dense input",
                format!("feature dimension (axis 1) is {}, layer expects {}", x.dim(1), self.inputs),
            ));
        }
        let batch = x.dim(0);
        let mut out = Tensor::zeros(&[batch, self.outputs]);
        for row in out.data_mut().chunks_mut(self.outputs) {
            row.copy_from_slice(self.bias.data());
        }
        gemm(
            batch,
            self.inputs,
            self.outputs,
            x.data(),
            false,
            self.weight.data(),
            false,
            1.0,
            out.data_mut(),
        );
        Ok(out)
    }

    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        let out = self.infer(x)?;
        self.cache = Some(x.clone());
        Ok(out)
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        let x = self.cache.take().ok_or(Error::NoForwardCache("dense"))?;
        let batch = x.dim(0);
        if grad_out.shape() != [batch, self.outputs] {
            return Err(Error::shape(
                "dense backward",
                format!("gradient shape {:?}", grad_out.shape()),
            ));
        }
        gemm(
            self.inputs,
            batch,
            self.outputs,
            x.data(),
            true,
            grad_out.data(),
            false,
            0.0,
            self.grad_weight.data_mut(),
        );
        self.grad_bias.fill(0.0);
        for row in grad_out.data().chunks(self.outputs) {
            for (g, v) in self.grad_bias.data_mut().iter_mut().zip(row) {
                *g += v;
            }
        }
        let mut grad_in = Tensor::zeros(&[batch, self.inputs]);
        gemm(
            batch,
            self.outputs,
            self.inputs,
            grad_out.data(),
            false,
            self.weight.data(),
            true,
            0.0,
            grad_in.data_mut(),
        );
        Ok(grad_in)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Relu {
    cache: Option<Tensor>,
}

impl Relu {
    pub fn infer(&self, x: &Tensor) -> Result<Tensor> {
        let mut out = x.clone();
        out.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
        Ok(out)
    }

    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        self.cache = Some(x.clone());
        self.infer(x)
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        let x = self.cache.take().ok_or(Error::NoForwardCache("relu"))?;
        if x.shape() != grad_out.shape() {
            return Err(Error::shape("relu backward", format!("gradient shape {:?}", grad_out.shape())));
        }
        let mut grad_in = grad_out.clone();
        for (g, v) in grad_in.data_mut().iter_mut().zip(x.data()) {
            if *v <= 0.0 {
                *g = 0.0;
            }
        }
        Ok(grad_in)
    }
}

/// Global average pooling `[batch, channels, length] -> [batch, channels]`.
#[derive(Debug, Clone, Default)]
pub struct GlobalAvgPool {
    cache: Option<Vec<usize>>,
}

impl GlobalAvgPool {
    pub fn infer(&self, x: &Tensor) -> Result<Tensor> {
        x.expect_rank(3, "global average pool input")?;
        let (batch, channels, length) = (x.dim(0), x.dim(1), x.dim(2));
        if length == 0 {
            return Err(Error::shape("global average pool input", "length (axis 2) is zero"));
        }
        let data = x
            .data()
            .chunks(length)
            .map(|c| c.iter().sum::<f64>() / length as f64)
            .collect();
        Tensor::new(vec![batch, channels], data)
    }

    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        let out = self.infer(x)?;
        self.cache = Some(x.shape().to_vec());
        Ok(out)
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        let shape = self.cache.take().ok_or(Error::NoForwardCache("global average pool"))?;
        if grad_out.shape() != &shape[..2] {
            return Err(Error::shape("gap backward", format!("gradient shape {:?}", grad_out.shape())));
        }
        let length = shape[2];
        let data = grad_out
            .data()
            .iter()
            .flat_map(|g| std::iter::repeat_n(g / length as f64, length))
            .collect();
        Tensor::new(shape, data)
    }
}

/// The fixed set of layer kinds a classifier is assembled from.
#[derive(Debug, Clone)]
pub enum Layer {
    Conv1d(Conv1d),
    BatchNorm(BatchNorm),
    Relu(Relu),
    GlobalAvgPool(GlobalAvgPool),
    Dense(Dense),
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Conv1d(_) => "conv1d",
            Layer::BatchNorm(_) => "batchnorm",
            Layer::Relu(_) => "relu",
            Layer::GlobalAvgPool(_) => "gap",
            Layer::Dense(_) => "dense",
        }
    }

    pub fn infer(&self, x: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Conv1d(l) => l.infer(x),
            Layer::BatchNorm(l) => l.infer(x),
            Layer::Relu(l) => l.infer(x),
            Layer::GlobalAvgPool(l) => l.infer(x),
            Layer::Dense(l) => l.infer(x),
        }
    }

    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Conv1d(l) => l.forward_train(x),
            Layer::BatchNorm(l) => l.forward_train(x),
            Layer::Relu(l) => l.forward_train(x),
            Layer::GlobalAvgPool(l) => l.forward_train(x),
            Layer::Dense(l) => l.forward_train(x),
        }
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Conv1d(l) => l.backward(grad_out),
            Layer::BatchNorm(l) => l.backward(grad_out),
            Layer::Relu(l) => l.backward(grad_out),
            Layer::GlobalAvgPool(l) => l.backward(grad_out),
            Layer::Dense(l) => l.backward(grad_out),
        }
    }

    /// Trainable tensors paired with their gradients, in a fixed order.
    pub fn params_mut(&mut self) -> Vec<(&mut Tensor, &Tensor)> {
        match self {
            Layer::Conv1d(l) => vec![(&mut l.weight, &l.grad_weight), (&mut l.bias, &l.grad_bias)],
            Layer::BatchNorm(l) => vec![(&mut l.gamma, &l.grad_gamma), (&mut l.beta, &l.grad_beta)],
            Layer::Dense(l) => vec![(&mut l.weight, &l.grad_weight), (&mut l.bias, &l.grad_bias)],
            Layer::Relu(_) | Layer::GlobalAvgPool(_) => Vec::new(),
        }
    }

    pub fn params(&self) -> Vec<(&Tensor, &Tensor)> {
        match self {
            Layer::Conv1d(l) => vec![(&l.weight, &l.grad_weight), (&l.bias, &l.grad_bias)],
            Layer::BatchNorm(l) => vec![(&l.gamma, &l.grad_gamma), (&l.beta, &l.grad_beta)],
            Layer::Dense(l) => vec![(&l.weight, &l.grad_weight), (&l.bias, &l.grad_bias)],
            Layer::Relu(_) | Layer::GlobalAvgPool(_) => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn t(shape: &[usize], data: &[f64]) -> Tensor {
        Tensor::new(shape.to_vec(), data.to_vec()).unwrap()
    }

    #[test]
    fn conv_zero_input_gives_zero_output() {
        let mut r = rng::stream(1, "test");
        let conv = Conv1d::new(2, 3, 5, &mut r);
        let out = conv.infer(&Tensor::zeros(&[2, 2, 7])).unwrap();
        assert_eq!(out.shape(), &[2, 3, 7]);
        assert!(out.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn conv_pointwise_kernel_by_hand() {
        let conv = Conv1d::from_parts(t(&[1, 1, 1], &[2.0]), t(&[1], &[0.5])).unwrap();
        let out = conv.infer(&t(&[1, 1, 3], &[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(out.data(), &[2.5, 4.5, 6.5]);
    }

    #[test]
    fn conv_identity_kernel_and_padding() {
        let conv = Conv1d::from_parts(t(&[1, 1, 3], &[0.0, 1.0, 0.0]), t(&[1], &[0.0])).unwrap();
        let x = t(&[1, 1, 4], &[3.0, -1.0, 4.0, 1.5]);
        assert_eq!(conv.infer(&x).unwrap().data(), x.data());
        // [1,0,0]: out[t] = in[t-1] with zero padding on the left.
        let shift = Conv1d::from_parts(t(&[1, 1, 3], &[1.0, 0.0, 0.0]), t(&[1], &[0.0])).unwrap();
        assert_eq!(shift.infer(&x).unwrap().data(), &[0.0, 3.0, -1.0, 4.0]);
    }

    #[test]
    fn even_kernel_pads_four_left_three_right() {
        let mut w = vec![0.0; 8];
        w[0] = 1.0; // reads in[t - 4]
        let conv = Conv1d::from_parts(t(&[1, 1, 8], &w), t(&[1], &[0.0])).unwrap();
        let x = t(&[1, 1, 6], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(conv.infer(&x).unwrap().data(), &[0.0, 0.0, 0.0, 0.0, 1.0, 2.0]);
        let mut w = vec![0.0; 8];
        w[7] = 1.0; // reads in[t + 3]
        let conv = Conv1d::from_parts(t(&[1, 1, 8], &w), t(&[1], &[0.0])).unwrap();
        assert_eq!(conv.infer(&x).unwrap().data(), &[4.0, 5.0, 6.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn conv_rejects_channel_mismatch_naming_axis() {
        let mut r = rng::stream(1, "test");
        let conv = Conv1d::new(2, 3, 3, &mut r);
        let err = conv.infer(&Tensor::zeros(&[1, 3, 5])).unwrap_err().to_string();
        assert!(err.contains("channel dimension"), "{err}");
    }

    #[test]
    fn batchnorm_examples() {
        let mut bn = BatchNorm::with_hyper(1, 0.9, 0.0);
        let out = bn.forward_train(&t(&[2, 1, 1], &[1.0, 3.0])).unwrap();
        assert_eq!(out.data(), &[-1.0, 1.0]);

        let mut bn = BatchNorm::new(2);
        let out = bn.forward_train(&Tensor::zeros(&[3, 2, 4])).unwrap();
        assert!(out.data().iter().all(|v| *v == 0.0));

        let mut bn = BatchNorm::new(1);
        bn.gamma.fill(0.0);
        bn.beta.fill(0.25);
        let out = bn.forward_train(&t(&[2, 1, 2], &[1.0, 7.0, -3.0, 2.0])).unwrap();
        assert!(out.data().iter().all(|v| *v == 0.25));
    }

    #[test]
    fn batchnorm_infer_requires_training_step() {
        let bn = BatchNorm::new(1);
        assert!(matches!(
            bn.infer(&Tensor::zeros(&[1, 1, 3])),
            Err(Error::UninitializedStats)
        ));
    }

    #[test]
    fn batchnorm_running_stats_use_momentum() {
        let mut bn = BatchNorm::with_hyper(1, 0.9, 0.0);
        bn.forward_train(&t(&[2, 1], &[1.0, 3.0])).unwrap();
        assert_eq!(bn.running_stats(), (&[2.0][..], &[1.0][..]));
        bn.forward_train(&t(&[2, 1], &[3.0, 7.0])).unwrap();
        let (m, v) = bn.running_stats();
        assert!((m[0] - (0.9 * 2.0 + 0.1 * 5.0)).abs() < 1e-15);
        assert!((v[0] - (0.9 * 1.0 + 0.1 * 4.0)).abs() < 1e-15);
        assert!(bn.forward_train(&t(&[1, 1], &[3.0])).is_err());
    }

    #[test]
    fn gap_preserves_channel_mean() {
        let gap = GlobalAvgPool::default();
        let out = gap.infer(&t(&[1, 2, 3], &[1.0, 2.0, 6.0, -1.0, 0.0, 4.0])).unwrap();
        assert_eq!(out.data(), &[3.0, 1.0]);
    }

    #[test]
    fn backward_without_forward_is_an_error() {
        let mut r = rng::stream(1, "test");
        let mut dense = Dense::new(2, 2, &mut r);
        assert!(matches!(
            dense.backward(&Tensor::zeros(&[1, 2])),
            Err(Error::NoForwardCache(_))
        ));
    }

    #[test]
    fn glorot_limits() {
        let mut r = rng::stream(3, "test");
        let d = Dense::new(10, 6, &mut r);
        let limit = (6.0f64 / 16.0).sqrt();
        assert!(d.weight.data().iter().all(|v| v.abs() <= limit));
        assert!(d.bias.data().iter().all(|v| *v == 0.0));
    }
}
