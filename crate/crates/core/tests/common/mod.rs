//! Shared oracles for the integration tests and the acceptance target.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use tsfeat::metalearner::objective;
use tsfeat::nn::{sparse_xent_loss, Layer, Sequential, Tensor};

pub const FD_STEP: f64 = 1e-5;
pub const FD_REL_TOL: f64 = 1e-4;
pub const FD_ABS_TOL: f64 = 1e-7;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_tensor(shape: &[usize], r: &mut impl Rng) -> Tensor {
    let n = shape.iter().product();
    let data = (0..n).map(|_| r.sample(StandardNormal)).collect();
    Tensor::new(shape.to_vec(), data).unwrap()
}

/// Analytic and numeric derivatives agree within the absolute or the
/// relative tolerance.
pub fn grad_close(analytic: f64, numeric: f64) -> bool {
    let diff = (analytic - numeric).abs();
    diff <= FD_ABS_TOL || diff <= FD_REL_TOL * analytic.abs().max(numeric.abs())
}

#[derive(Debug, Default, Clone, Copy)]
pub struct GradCheck {
    pub compared: usize,
    pub failures: usize,
    pub worst_abs: f64,
}

impl GradCheck {
    fn record(&mut self, analytic: f64, numeric: f64) {
        self.compared += 1;
        let diff = (analytic - numeric).abs();
        if !grad_close(analytic, numeric) {
            self.failures += 1;
            self.worst_abs = self.worst_abs.max(diff);
        }
    }

    pub fn ok(&self) -> bool {
        self.compared > 0 && self.failures == 0
    }

    pub fn merge(&mut self, other: GradCheck) {
        self.compared += other.compared;
        self.failures += other.failures;
        self.worst_abs = self.worst_abs.max(other.worst_abs);
    }
}

fn central<F: FnMut(f64) -> f64>(mut f: F, x: f64) -> f64 {
    (f(x + FD_STEP) - f(x - FD_STEP)) / (2.0 * FD_STEP)
}

fn projected(out: &Tensor, weights: &Tensor) -> f64 {
    out.data().iter().zip(weights.data()).map(|(a, b)| a * b).sum()
}

/// Checks input and parameter gradients of `layer` for the scalar
/// `sum(weights * layer.forward_train(x))`.
pub fn check_layer(layer: &mut Layer, x: &Tensor, weights: &Tensor) -> GradCheck {
    let mut stats = GradCheck::default();
    layer.forward_train(x).unwrap();
    let grad_x = layer.backward(weights).unwrap();
    let grad_params: Vec<Tensor> = layer.params().iter().map(|(_, g)| (*g).clone()).collect();

    let mut probe = x.clone();
    for i in 0..x.len() {
        let base = x.data()[i];
        let numeric = central(
            |v| {
                probe.data_mut()[i] = v;
                projected(&layer.forward_train(&probe).unwrap(), weights)
            },
            base,
        );
        probe.data_mut()[i] = base;
        stats.record(grad_x.data()[i], numeric);
    }
    for (p, analytic) in grad_params.iter().enumerate() {
        for i in 0..analytic.len() {
            let base = layer.params()[p].0.data()[i];
            let numeric = central(
                |v| {
                    layer.params_mut()[p].0.data_mut()[i] = v;
                    projected(&layer.forward_train(x).unwrap(), weights)
                },
                base,
            );
            layer.params_mut()[p].0.data_mut()[i] = base;
            stats.record(analytic.data()[i], numeric);
        }
    }
    stats
}

/// Checks every parameter and input gradient of `net` under the
/// cross-entropy loss.
pub fn check_network(net: &mut Sequential, x: &Tensor, labels: &[usize]) -> GradCheck {
    let mut stats = GradCheck::default();
    let logits = net.forward_train(x).unwrap();
    let (_, g) = sparse_xent_loss(&logits, labels).unwrap();
    let grad_x = net.backward(&g).unwrap();
    let grads: Vec<Tensor> = net.params().iter().map(|(_, g)| (*g).clone()).collect();
    let loss_at = |net: &mut Sequential, x: &Tensor| sparse_xent_loss(&net.forward_train(x).unwrap(), labels).unwrap().0;

    let mut probe = x.clone();
    for i in 0..x.len() {
        let base = x.data()[i];
        probe.data_mut()[i] = base + FD_STEP;
        let up = loss_at(net, &probe);
        probe.data_mut()[i] = base - FD_STEP;
        let down = loss_at(net, &probe);
        probe.data_mut()[i] = base;
        stats.record(grad_x.data()[i], (up - down) / (2.0 * FD_STEP));
    }
    for (p, analytic) in grads.iter().enumerate() {
        for i in 0..analytic.len() {
            let base = net.params()[p].0.data()[i];
            net.params_mut()[p].0.data_mut()[i] = base + FD_STEP;
            let up = loss_at(net, x);
            net.params_mut()[p].0.data_mut()[i] = base - FD_STEP;
            let down = loss_at(net, x);
            net.params_mut()[p].0.data_mut()[i] = base;
            stats.record(analytic.data()[i], (up - down) / (2.0 * FD_STEP));
        }
    }
    stats
}

/// Gradient of the meta-learner loss, and its diagonal Hessian wherever the
/// floor is inactive, against central differences.
pub fn check_objective(z: &[f64], c: &[f64]) -> GradCheck {
    let mut stats = GradCheck::default();
    let obj = objective(z, c);
    let mut probe = z.to_vec();
    for j in 0..z.len() {
        let numeric_grad = central(
            |v| {
                probe[j] = v;
                objective(&probe, c).loss
            },
            z[j],
        );
        let numeric_hess = central(
            |v| {
                probe[j] = v;
                objective(&probe, c).grad[j]
            },
            z[j],
        );
        probe[j] = z[j];
        stats.record(obj.grad[j], numeric_grad);
        if obj.hess[j] > tsfeat::metalearner::HESS_FLOOR {
            stats.record(obj.hess[j], numeric_hess);
        }
    }
    stats
}

/// `200/n * sum |y - f| / (|y| + |f|)`, term by term, with 0/0 read as 0.
pub fn smape_direct(actual: &[f64], forecast: &[f64]) -> f64 {
    let mut total = 0.0;
    for (y, f) in actual.iter().zip(forecast) {
        let denom = y.abs() + f.abs();
        if denom > 0.0 {
            total += (y - f).abs() / denom;
        }
    }
    200.0 * total / actual.len() as f64
}

/// Isotropic Gaussian blobs around `centres`, with ground-truth labels.
pub fn blobs(centres: &[Vec<f64>], per_blob: usize, sd: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut r = rng(seed);
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (c, centre) in centres.iter().enumerate() {
        for _ in 0..per_blob {
            points.push(
                centre
                    .iter()
                    .map(|m| m + sd * r.sample::<f64, _>(StandardNormal))
                    .collect(),
            );
            labels.push(c);
        }
    }
    (points, labels)
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Lowest within-cluster sum of squares over every 2-partition of `points`
/// into non-empty parts.
pub fn best_two_partition_inertia(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    let dim = points[0].len();
    let mut best = f64::INFINITY;
    for mask in 1..(1u32 << n) - 1 {
        let mut total = 0.0;
        for side in [true, false] {
            let members: Vec<&Vec<f64>> = (0..n)
                .filter(|i| ((mask >> i) & 1 == 1) == side)
                .map(|i| &points[i])
                .collect();
            let centroid: Vec<f64> = (0..dim)
                .map(|j| members.iter().map(|p| p[j]).sum::<f64>() / members.len() as f64)
                .collect();
            total += members
                .iter()
                .map(|p| p.iter().zip(&centroid).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                .sum::<f64>();
        }
        best = best.min(total);
    }
    best
}
