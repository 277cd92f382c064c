//! Portable text serialization for layer stacks.
//!
//! Floats are written as the hexadecimal bit pattern of the `f64`, so a
//! save/load round trip is bit-exact. Layout:
//!
//! ```text
//! layer conv1d in=1 out=8 kernel=3
//! tensor weight 8 1 3
//! <hex> <hex> ...
//! tensor bias 8
//! <hex> ...
//! layer batchnorm channels=8 momentum=<hex> epsilon=<hex> initialized=1
//! ...
//! end
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::layers::{BatchNorm, Conv1d, Dense, GlobalAvgPool, Layer, Relu};
use super::network::Sequential;
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub fn f64_to_hex(v: f64) -> String {
    format!("{:016x}", v.to_bits())
}

pub fn f64_from_hex(s: &str) -> Option<f64> {
    u64::from_str_radix(s, 16).ok().map(f64::from_bits)
}

fn write_tensor(out: &mut String, name: &str, t: &Tensor) {
    let dims: Vec<String> = t.shape().iter().map(usize::to_string).collect();
    let _ = writeln!(out, "tensor {name} {}", dims.join(" "));
    let vals: Vec<String> = t.data().iter().map(|v| f64_to_hex(*v)).collect();
    let _ = writeln!(out, "{}", vals.join(" "));
}

pub fn write_sequential(out: &mut String, net: &Sequential) {
    for layer in &net.layers {
        match layer {
            Layer::Conv1d(c) => {
                let _ = writeln!(
                    out,
                    "layer conv1d in={} out={} kernel={}",
                    c.in_channels, c.out_channels, c.kernel
                );
                write_tensor(out, "weight", &c.weight);
                write_tensor(out, "bias", &c.bias);
            }
            Layer::BatchNorm(b) => {
                let _ = writeln!(
                    out,
                    "layer batchnorm channels={} momentum={} epsilon={} initialized={}",
                    b.channels,
                    f64_to_hex(b.momentum),
                    f64_to_hex(b.epsilon),
                    u8::from(b.initialized)
                );
                write_tensor(out, "gamma", &b.gamma);
                write_tensor(out, "beta", &b.beta);
                write_tensor(out, "running_mean", &b.running_mean);
                write_tensor(out, "running_var", &b.running_var);
            }
            Layer::Relu(_) => out.push_str("layer relu\n"),
            Layer::GlobalAvgPool(_) => out.push_str("layer gap\n"),
            Layer::Dense(d) => {
                let _ = writeln!(out, "layer dense in={} out={}", d.inputs, d.outputs);
                write_tensor(out, "weight", &d.weight);
                write_tensor(out, "bias", &d.bias);
            }
        }
    }
    out.push_str("end\n");
}

/// Line cursor over a text artifact with 1-based line numbers for errors.
pub struct Lines<'a> {
    source: &'a str,
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    pub fn new(source: &'a str, text: &'a str) -> Self {
        Self {
            source,
            iter: text.lines().enumerate(),
            line: 0,
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.source.to_string(),
            line: self.line,
            msg: msg.into(),
        }
    }

    pub fn next_line(&mut self) -> Result<&'a str> {
        loop {
            match self.iter.next() {
                Some((i, l)) => {
                    self.line = i + 1;
                    if !l.trim().is_empty() {
                        return Ok(l.trim());
                    }
                }
                None => return Err(self.error("unexpected end of file")),
            }
        }
    }

    /// Parses `key=value` tokens after the first `skip` words.
    pub fn fields(&self, line: &'a str, skip: usize) -> Result<BTreeMap<&'a str, &'a str>> {
        line.split_whitespace()
            .skip(skip)
            .map(|tok| tok.split_once('=').ok_or_else(|| self.error(format!("expected key=value, got {tok:?}"))))
            .collect()
    }

    pub fn usize_field(&self, fields: &BTreeMap<&str, &str>, key: &str) -> Result<usize> {
        fields
            .get(key)
            .ok_or_else(|| self.error(format!("missing field {key}")))?
            .parse()
            .map_err(|_| self.error(format!("field {key} is not an integer")))
    }

    pub fn hex_field(&self, fields: &BTreeMap<&str, &str>, key: &str) -> Result<f64> {
        let raw = fields
            .get(key)
            .ok_or_else(|| self.error(format!("missing field {key}")))?;
        f64_from_hex(raw).ok_or_else(|| self.error(format!("field {key} is not a hex float")))
    }

    pub fn tensor(&mut self, name: &str) -> Result<Tensor> {
        let header = self.next_line()?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("tensor") || parts.next() != Some(name) {
            return Err(self.error(format!("expected `tensor {name}`, got {header:?}")));
        }
        let shape = parts
            .map(|p| p.parse::<usize>().map_err(|_| self.error("bad tensor dimension")))
            .collect::<Result<Vec<_>>>()?;
        let expected: usize = shape.iter().product();
        let body = if expected == 0 { "" } else { self.next_line()? };
        let data = body
            .split_whitespace()
            .map(|h| f64_from_hex(h).ok_or_else(|| self.error(format!("bad hex float {h:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Tensor::new(shape, data).map_err(|e| self.error(e.to_string()))
    }
}

pub fn read_sequential(lines: &mut Lines<'_>) -> Result<Sequential> {
    let mut layers = Vec::new();
    loop {
        let line = lines.next_line()?;
        if line == "end" {
            break;
        }
        let mut words = line.split_whitespace();
        if words.next() != Some("layer") {
            return Err(lines.error(format!("expected layer header, got {line:?}")));
        }
        let kind = words.next().unwrap_or("");
        let fields = lines.fields(line, 2)?;
        let layer = match kind {
            "conv1d" => {
                let weight = lines.tensor("weight")?;
                let bias = lines.tensor("bias")?;
                let conv = Conv1d::from_parts(weight, bias).map_err(|e| lines.error(e.to_string()))?;
                if conv.in_channels != lines.usize_field(&fields, "in")?
                    || conv.out_channels != lines.usize_field(&fields, "out")?
                    || conv.kernel != lines.usize_field(&fields, "kernel")?
                {
                    return Err(lines.error("conv1d header disagrees with weight shape"));
                }
                Layer::Conv1d(conv)
            }
            "batchnorm" => {
                let channels = lines.usize_field(&fields, "channels")?;
                let mut bn = BatchNorm::with_hyper(
                    channels,
                    lines.hex_field(&fields, "momentum")?,
                    lines.hex_field(&fields, "epsilon")?,
                );
                bn.initialized = lines.usize_field(&fields, "initialized")? == 1;
                for (name, slot) in [
                    ("gamma", &mut bn.gamma),
                    ("beta", &mut bn.beta),
                    ("running_mean", &mut bn.running_mean),
                    ("running_var", &mut bn.running_var),
                ] {
                    let t = lines.tensor(name)?;
                    if t.shape() != [channels] {
                        return Err(lines.error(format!("{name} must have {channels} entries")));
                    }
                    *slot = t;
                }
                Layer::BatchNorm(bn)
            }
            "relu" => Layer::Relu(Relu::default()),
            "gap" => Layer::GlobalAvgPool(GlobalAvgPool::default()),
            "dense" => {
                let weight = lines.tensor("weight")?;
                let bias = lines.tensor("bias")?;
                let dense = Dense::from_parts(weight, bias).map_err(|e| lines.error(e.to_string()))?;
                if dense.inputs != lines.usize_field(&fields, "in")?
                    || dense.outputs != lines.usize_field(&fields, "out")?
                {
                    return Err(lines.error("dense header disagrees with weight shape"));
                }
                Layer::Dense(dense)
            }
            other => return Err(lines.error(format!("unknown layer kind {other:?}"))),
        };
        layers.push(layer);
    }
    Ok(Sequential::new(layers))
}
