//! Gradient-boosted trees that map a series' static features to softmax
//! combination weights over the base forecasters.
//!
//! The objective for one series with raw scores `z` and per-model errors `c`
//! is the weighted-average error `sum_m softmax(z)_m c_m`, so the boosted
//! model learns to move weight onto the models that did well on validation.

use crate::error::{Error, Result};
use crate::nn::io::{f64_from_hex, f64_to_hex};
use crate::nn::softmax_in_place;

pub const HESS_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MetaInstance {
    pub series_id: String,
    pub features: Vec<f64>,
    /// Validation error of each base model (sMAPE), in pool order.
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub loss: f64,
    pub weights: Vec<f64>,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

/// `w = softmax(z)`, `loss = w.c`, `grad_j = w_j (c_j - loss)`,
/// `hess_j = max(w_j (c_j - loss)(1 - 2 w_j), HESS_FLOOR)`.
pub fn objective(z: &[f64], c: &[f64]) -> Objective {
    let mut w = z.to_vec();
    softmax_in_place(&mut w);
    let loss: f64 = w.iter().zip(c).map(|(w, c)| w * c).sum();
    let grad: Vec<f64> = w.iter().zip(c).map(|(w, c)| w * (c - loss)).collect();
    let hess = grad
        .iter()
        .zip(&w)
        .map(|(g, w)| (g * (1.0 - 2.0 * w)).max(HESS_FLOOR))
        .collect();
    Objective {
        loss,
        weights: w,
        grad,
        hess,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbdtParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub eta: f64,
    pub lambda: f64,
    pub min_child: usize,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self {
            rounds: 100,
            max_depth: 3,
            eta: 0.1,
            lambda: 1.0,
            min_child: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf(f64),
    /// `x[feature] < threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf(v) => return *v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] < *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    fn scale(&mut self, factor: f64) {
        for n in &mut self.nodes {
            if let Node::Leaf(v) = n {
                *v *= factor;
            }
        }
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    grad: &'a [f64],
    hess: &'a [f64],
    params: &'a GbdtParams,
    nodes: Vec<Node>,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl TreeBuilder<'_> {
    fn leaf_value(&self, idx: &[usize]) -> f64 {
        let g: f64 = idx.iter().map(|&i| self.grad[i]).sum();
        let h: f64 = idx.iter().map(|&i| self.hess[i]).sum();
        -g / (h + self.params.lambda)
    }

    fn best_split(&self, idx: &[usize]) -> Option<BestSplit> {
        let lambda = self.params.lambda;
        let min_child = self.params.min_child;
        let g_total: f64 = idx.iter().map(|&i| self.grad[i]).sum();
        let h_total: f64 = idx.iter().map(|&i| self.hess[i]).sum();
        let parent = g_total * g_total / (h_total + lambda);
        let mut best: Option<BestSplit> = None;
        let dims = self.x[idx[0]].len();
        let mut sorted = idx.to_vec();
        for f in 0..dims {
            sorted.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let (mut gl, mut hl) = (0.0, 0.0);
            for pos in 0..sorted.len() - 1 {
                let i = sorted[pos];
                gl += self.grad[i];
                hl += self.hess[i];
                let left_n = pos + 1;
                if left_n < min_child || sorted.len() - left_n < min_child {
                    continue;
                }
                let (a, b) = (self.x[i][f], self.x[sorted[pos + 1]][f]);
                if a >= b {
                    continue;
                }
                let (gr, hr) = (g_total - gl, h_total - hl);
                let gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent);
                if gain > 1e-12 && best.as_ref().is_none_or(|s| gain > s.gain) {
                    let mut threshold = a + (b - a) / 2.0;
                    if threshold <= a {
                        threshold = b;
                    }
                    best = Some(BestSplit {
                        gain,
                        feature: f,
                        threshold,
                    });
                }
            }
        }
        best
    }

    fn build(&mut self, idx: &[usize], depth: usize) -> usize {
        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf(self.leaf_value(idx)));
        if depth >= self.params.max_depth || idx.len() < 2 * self.params.min_child {
            return slot;
        }
        if let Some(split) = self.best_split(idx) {
            let (l, r): (Vec<usize>, Vec<usize>) = idx
                .iter()
                .partition(|&&i| self.x[i][split.feature] < split.threshold);
            let left = self.build(&l, depth + 1);
            let right = self.build(&r, depth + 1);
            self.nodes[slot] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
        }
        slot
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel {
    pub n_outputs: usize,
    pub n_features: usize,
    pub params: GbdtParams,
    /// `trees[round][output]`; leaf values already include the learning rate.
    pub trees: Vec<Vec<Tree>>,
    /// Mean training objective before any round, then after each round.
    pub loss_history: Vec<f64>,
}

fn mean_loss(scores: &[Vec<f64>], instances: &[MetaInstance]) -> f64 {
    scores
        .iter()
        .zip(instances)
        .map(|(z, inst)| objective(z, &inst.errors).loss)
        .sum::<f64>()
        / instances.len() as f64
}

impl GbdtModel {
    /// A model with no trees: uniform weights.
    pub fn untrained(n_outputs: usize, n_features: usize, params: GbdtParams) -> Self {
        Self {
            n_outputs,
            n_features,
            params,
            trees: Vec::new(),
            loss_history: Vec::new(),
        }
    }

    /// Newton boosting, one tree per output per round. Each tree is applied
    /// immediately (round-robin) and halved until it does not increase the
    /// training objective, so the logged loss never goes up.
    pub fn fit(instances: &[MetaInstance], params: &GbdtParams) -> Result<Self> {
        if instances.len() < params.min_child.max(10) {
            return Err(Error::InvalidInput(format!(
                "meta-learner needs at least {} instances, got {}",
                params.min_child.max(10),
                instances.len()
            )));
        }
        let n_features = instances[0].features.len();
        let n_outputs = instances[0].errors.len();
        if n_outputs == 0 {
            return Err(Error::InvalidInput("empty error vectors".into()));
        }
        for inst in instances {
            if inst.features.len() != n_features || inst.errors.len() != n_outputs {
                return Err(Error::shape(
                    "meta instances",
                    format!("instance {} has inconsistent dimensions", inst.series_id),
                ));
            }
            if inst.features.iter().chain(&inst.errors).any(|v| !v.is_finite())
                || inst.errors.iter().any(|c| *c < 0.0)
            {
                return Err(Error::InvalidInput(format!(
                    "instance {} has non-finite values or negative errors",
                    inst.series_id
                )));
            }
        }
        let x: Vec<Vec<f64>> = instances.iter().map(|i| i.features.clone()).collect();
        let all: Vec<usize> = (0..instances.len()).collect();
        let mut scores = vec![vec![0.0; n_outputs]; instances.len()];
        let mut model = Self::untrained(n_outputs, n_features, params.clone());
        let mut current = mean_loss(&scores, instances);
        model.loss_history.push(current);

        for round in 0..params.rounds {
            let mut round_trees = Vec::with_capacity(n_outputs);
            for j in 0..n_outputs {
                let (grad, hess): (Vec<f64>, Vec<f64>) = scores
                    .iter()
                    .zip(instances)
                    .map(|(z, inst)| {
                        let o = objective(z, &inst.errors);
                        (o.grad[j], o.hess[j])
                    })
                    .unzip();
                let mut builder = TreeBuilder {
                    x: &x,
                    grad: &grad,
                    hess: &hess,
                    params,
                    nodes: Vec::new(),
                };
                builder.build(&all, 0);
                let mut tree = Tree { nodes: builder.nodes };
                tree.scale(params.eta);
                let deltas: Vec<f64> = x.iter().map(|xi| tree.predict(xi)).collect();
                let mut factor = 1.0;
                let mut accepted = false;
                for _ in 0..30 {
                    let trial: Vec<Vec<f64>> = scores
                        .iter()
                        .zip(&deltas)
                        .map(|(z, d)| {
                            let mut z = z.clone();
                            z[j] += factor * d;
                            z
                        })
                        .collect();
                    let loss = mean_loss(&trial, instances);
                    if loss <= current {
                        scores = trial;
                        current = loss;
                        accepted = true;
                        break;
                    }
                    factor *= 0.5;
                }
                if accepted {
                    tree.scale(factor);
                } else {
                    tree.scale(0.0);
                }
                round_trees.push(tree);
            }
            model.trees.push(round_trees);
            model.loss_history.push(current);
            log::debug!("meta round {} loss {current:.6}", round + 1);
        }
        Ok(model)
    }

    pub fn raw_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_features {
            return Err(Error::shape(
                "predict_weights",
                format!("feature vector has {} entries, model expects {}", x.len(), self.n_features),
            ));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("meta-learner input".into()));
        }
        let mut z = vec![0.0; self.n_outputs];
        for round in &self.trees {
            for (zj, tree) in z.iter_mut().zip(round) {
                *zj += tree.predict(x);
            }
        }
        Ok(z)
    }

    pub fn predict_weights(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut z = self.raw_scores(x)?;
        softmax_in_place(&mut z);
        Ok(z)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("tsfeat-gbdt v1\n");
        out.push_str(&format!(
            "model outputs={} features={} rounds={} max_depth={} eta={} lambda={} min_child={}\n",
            self.n_outputs,
            self.n_features,
            self.params.rounds,
            self.params.max_depth,
            f64_to_hex(self.params.eta),
            f64_to_hex(self.params.lambda),
            self.params.min_child
        ));
        for (r, round) in self.trees.iter().enumerate() {
            for (j, tree) in round.iter().enumerate() {
                out.push_str(&format!("tree {r} {j} {}\n", tree.nodes.len()));
                for node in &tree.nodes {
                    match node {
                        Node::Leaf(v) => out.push_str(&format!("leaf {}\n", f64_to_hex(*v))),
                        Node::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => out.push_str(&format!(
                            "split {feature} {} {left} {right}\n",
                            f64_to_hex(*threshold)
                        )),
                    }
                }
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(source: &str, text: &str) -> Result<Self> {
        use crate::nn::io::Lines;
        let mut lines = Lines::new(source, text);
        if lines.next_line()? != "tsfeat-gbdt v1" {
            return Err(lines.error("not a `tsfeat-gbdt v1` file"));
        }
        let header = lines.next_line()?;
        let f = lines.fields(header, 1)?;
        let params = GbdtParams {
            rounds: lines.usize_field(&f, "rounds")?,
            max_depth: lines.usize_field(&f, "max_depth")?,
            eta: lines.hex_field(&f, "eta")?,
            lambda: lines.hex_field(&f, "lambda")?,
            min_child: lines.usize_field(&f, "min_child")?,
        };
        let mut model = Self::untrained(
            lines.usize_field(&f, "outputs")?,
            lines.usize_field(&f, "features")?,
            params,
        );
        loop {
            let line = lines.next_line()?;
            if line == "end" {
                break;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let (r, j, count) = match parts.as_slice() {
                ["tree", r, j, n] => (
                    r.parse::<usize>().map_err(|_| lines.error("bad round"))?,
                    j.parse::<usize>().map_err(|_| lines.error("bad output index"))?,
                    n.parse::<usize>().map_err(|_| lines.error("bad node count"))?,
                ),
                _ => return Err(lines.error(format!("expected tree header, got {line:?}"))),
            };
            if r != model.trees.len() && !(r + 1 == model.trees.len()) {
                return Err(lines.error("trees out of order"));
            }
            if r == model.trees.len() {
                model.trees.push(Vec::new());
            }
            if j != model.trees[r].len() || j >= model.n_outputs {
                return Err(lines.error("tree output index out of order"));
            }
            let mut nodes = Vec::with_capacity(count);
            for _ in 0..count {
                let l = lines.next_line()?;
                let p: Vec<&str> = l.split_whitespace().collect();
                let node = match p.as_slice() {
                    ["leaf", v] => Node::Leaf(f64_from_hex(v).ok_or_else(|| lines.error("bad leaf value"))?),
                    ["split", feat, thr, left, right] => Node::Split {
                        feature: feat.parse().map_err(|_| lines.error("bad feature"))?,
                        threshold: f64_from_hex(thr).ok_or_else(|| lines.error("bad threshold"))?,
                        left: left.parse().map_err(|_| lines.error("bad child"))?,
                        right: right.parse().map_err(|_| lines.error("bad child"))?,
                    },
                    _ => return Err(lines.error(format!("bad node {l:?}"))),
                };
                if let Node::Split { feature, left, right, .. } = node {
                    if feature >= model.n_features || left >= count || right >= count {
                        return Err(lines.error("split references out of range"));
                    }
                }
                nodes.push(node);
            }
            model.trees[r].push(Tree { nodes });
        }
        if model.trees.iter().any(|r| r.len() != model.n_outputs) {
            return Err(lines.error("incomplete round"));
        }
        Ok(model)
    }
}

/// `y_k = sum_m w_m f_{m,k}`.
pub fn combine(weights: &[f64], forecasts: &[Vec<f64>]) -> Result<Vec<f64>> {
    if weights.len() != forecasts.len() {
        return Err(Error::shape(
            "combine",
            format!("{} weights for {} models", weights.len(), forecasts.len()),
        ));
    }
    let h = forecasts.first().map_or(0, Vec::len);
    if forecasts.iter().any(|f| f.len() != h) {
        return Err(Error::shape("combine", "forecasts differ in horizon"));
    }
    let mut out = vec![0.0; h];
    for (w, f) in weights.iter().zip(forecasts) {
        for (o, v) in out.iter_mut().zip(f) {
            *o += w * v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_indifferent_when_errors_equal() {
        let o = objective(&[0.3, -1.0, 2.0], &[4.0, 4.0, 4.0]);
        assert!((o.loss - 4.0).abs() < 1e-12);
        assert!(o.grad.iter().all(|g| g.abs() < 1e-12));
    }

    #[test]
    fn objective_two_models_by_hand() {
        let o = objective(&[0.0, 0.0], &[0.0, 2.0]);
        assert_eq!(o.weights, vec![0.5, 0.5]);
        assert_eq!(o.loss, 1.0);
        assert_eq!(o.grad, vec![-0.5, 0.5]);
        // w (c - L)(1 - 2w) = 0 at w = 1/2, so both hit the floor.
        assert_eq!(o.hess, vec![HESS_FLOOR, HESS_FLOOR]);
    }

    #[test]
    fn untrained_model_is_uniform() {
        let m = GbdtModel::untrained(4, 2, GbdtParams::default());
        assert_eq!(m.predict_weights(&[1.0, 2.0]).unwrap(), vec![0.25; 4]);
        assert!(m.predict_weights(&[1.0]).is_err());
    }

    #[test]
    fn combine_examples() {
        let f = vec![vec![1.0, 2.0], vec![3.0, 6.0]];
        assert_eq!(combine(&[1.0, 0.0], &f).unwrap(), vec![1.0, 2.0]);
        assert_eq!(combine(&[0.5, 0.5], &f).unwrap(), vec![2.0, 4.0]);
        assert!(combine(&[1.0], &f).is_err());
    }

    #[test]
    fn identical_errors_leave_uniform_weights() {
        let inst: Vec<MetaInstance> = (0..20)
            .map(|i| MetaInstance {
                series_id: i.to_string(),
                features: vec![i as f64, (i * 7 % 5) as f64],
                errors: vec![3.0, 3.0, 3.0],
            })
            .collect();
        let m = GbdtModel::fit(&inst, &GbdtParams { rounds: 10, ..Default::default() }).unwrap();
        for w in m.predict_weights(&[4.0, 1.0]).unwrap() {
            assert!((w - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn too_few_instances_rejected() {
        let inst: Vec<MetaInstance> = (0..4)
            .map(|i| MetaInstance { series_id: i.to_string(), features: vec![0.0], errors: vec![1.0, 2.0] })
            .collect();
        assert!(GbdtModel::fit(&inst, &GbdtParams::default()).is_err());
    }

    #[test]
    fn text_round_trip() {
        let inst: Vec<MetaInstance> = (0..40)
            .map(|i| {
                let x = i as f64 / 40.0 - 0.5;
                MetaInstance {
                    series_id: i.to_string(),
                    features: vec![x, (i % 3) as f64],
                    errors: if x > 0.0 { vec![0.0, 10.0] } else { vec![10.0, 0.0] },
                }
            })
            .collect();
        let m = GbdtModel::fit(&inst, &GbdtParams { rounds: 5, ..Default::default() }).unwrap();
        let back = GbdtModel::from_text("mem", &m.to_text()).unwrap();
        assert_eq!(back.trees, m.trees);
        assert_eq!(back.predict_weights(&[0.3, 1.0]).unwrap(), m.predict_weights(&[0.3, 1.0]).unwrap());
        assert!(m.trees.iter().flatten().all(|t| t.depth() <= 3));
    }
}
