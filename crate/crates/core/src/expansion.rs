//! Functional expansion of input blocks.
//!
//! An order-P exponential expansion maps each sample `u` to `2P+1` channels:
//!
//! ```text
//! g_1      = u
//! g_{2p}   = exp(-q|u|) · sin(pπu)
//! g_{2p+1} = exp(-q|u|) · cos(pπu)        p = 1..P
//! ```
//!
//! and its derivative with respect to the exponential factor `q` is
//! `h_1 = 0`, `h_i = -|u| · g_i` for the trigonometric channels.
//! The baseline kinds (trigonometric, power, linear) share the same
//! channel-major layout so every filter can be driven by any of them.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which basis the input is expanded into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExpansionKind {
    /// Exponentially weighted trigonometric series with adaptive `q`.
    Efln,
    /// Plain trigonometric series (exponential expansion at `q = 0`).
    Tfln,
    /// Powers `u, u², …, u^(2P+1)`.
    Power,
    /// The input alone.
    Linear,
}

impl ExpansionKind {
    pub fn name(self) -> &'static str {
        match self {
            ExpansionKind::Efln => "efln",
            ExpansionKind::Tfln => "tfln",
            ExpansionKind::Power => "power",
            ExpansionKind::Linear => "linear",
        }
    }
}

impl fmt::Display for ExpansionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExpansionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "efln" => Ok(ExpansionKind::Efln),
            "tfln" => Ok(ExpansionKind::Tfln),
            "power" => Ok(ExpansionKind::Power),
            "linear" => Ok(ExpansionKind::Linear),
            other => Err(Error::Config(format!("unknown expansion kind `{other}`"))),
        }
    }
}

/// Expansion order and kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExpansionConfig {
    order: usize,
    kind: ExpansionKind,
}

impl ExpansionConfig {
    pub fn new(kind: ExpansionKind, order: usize) -> Result<Self> {
        if order == 0 && kind != ExpansionKind::Linear {
            return Err(Error::Config("expansion order must be at least 1".into()));
        }
        Ok(Self { order, kind })
    }

    pub fn efln(order: usize) -> Result<Self> {
        Self::new(ExpansionKind::Efln, order)
    }

    pub fn linear() -> Self {
        Self {
            order: 0,
            kind: ExpansionKind::Linear,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> ExpansionKind {
        self.kind
    }

    /// Number of channels: `2P+1`, or 1 for the linear kind.
    pub fn channel_count(&self) -> usize {
        match self.kind {
            ExpansionKind::Linear => 1,
            _ => 2 * self.order + 1,
        }
    }

    /// Whether the exponential factor is adapted for this kind.
    pub fn adapts_factor(&self) -> bool {
        self.kind == ExpansionKind::Efln
    }
}

/// Channel-major expanded block: `channels[i][j]` is channel `i+1` at the
/// j-th sample of the block.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedChannels {
    channels: Vec<Vec<f64>>,
    block_index: usize,
}

impl ExpandedChannels {
    pub fn zeros(count: usize, len: usize) -> Self {
        Self {
            channels: vec![vec![0.0; len]; count],
            block_index: 0,
        }
    }

    pub fn from_channels(channels: Vec<Vec<f64>>) -> Self {
        Self {
            channels,
            block_index: 0,
        }
    }

    pub fn with_block_index(mut self, k: usize) -> Self {
        self.block_index = k;
        self
    }

    pub fn block_index(&self) -> usize {
        self.block_index
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.channels[i]
    }

    pub fn count(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }
}

/// Channel values of one sample, written into `out` (length `2P+1`).
pub fn efln_sample(u: f64, q: f64, order: usize, out: &mut [f64]) {
    let env = (-q * u.abs()).exp();
    out[0] = u;
    for p in 1..=order {
        let arg = p as f64 * PI * u;
        out[2 * p - 1] = env * arg.sin();
        out[2 * p] = env * arg.cos();
    }
}

/// q-derivative of [`efln_sample`].
pub fn efln_derivative_sample(u: f64, q: f64, order: usize, out: &mut [f64]) {
    let a = u.abs();
    let env = (-q * a).exp();
    out[0] = 0.0;
    for p in 1..=order {
        let arg = p as f64 * PI * u;
        out[2 * p - 1] = -a * env * arg.sin();
        out[2 * p] = -a * env * arg.cos();
    }
}

/// Exponential expansion of a block with `q` held fixed.
pub fn efln_expand(u: &[f64], q: f64, order: usize) -> ExpandedChannels {
    expand_with(u, 2 * order + 1, |x, out| efln_sample(x, q, order, out))
}

/// `∂g/∂q` for every channel; channel 1 is identically zero.
pub fn efln_derivative(u: &[f64], q: f64, order: usize) -> ExpandedChannels {
    expand_with(u, 2 * order + 1, |x, out| {
        efln_derivative_sample(x, q, order, out)
    })
}

/// Expansion for the non-exponential kinds.
pub fn expand_baseline(u: &[f64], config: &ExpansionConfig) -> Result<ExpandedChannels> {
    match config.kind {
        ExpansionKind::Efln => Err(Error::Config(
            "the exponential kind needs a factor; use efln_expand".into(),
        )),
        ExpansionKind::Tfln => Ok(efln_expand(u, 0.0, config.order)),
        ExpansionKind::Power => Ok(expand_with(u, config.channel_count(), |x, out| {
            let mut acc = x;
            for v in out.iter_mut() {
                *v = acc;
                acc *= x;
            }
        })),
        ExpansionKind::Linear => Ok(ExpandedChannels::from_channels(vec![u.to_vec()])),
    }
}

/// Expansion of any kind; `q` is ignored by the non-exponential kinds.
pub fn expand(u: &[f64], q: f64, config: &ExpansionConfig) -> ExpandedChannels {
    match config.kind {
        ExpansionKind::Efln => efln_expand(u, q, config.order),
        _ => expand_baseline(u, config).expect("non-exponential kind"),
    }
}

/// Derivative channels of any kind; all zero for the kinds without `q`.
pub fn expand_derivative(u: &[f64], q: f64, config: &ExpansionConfig) -> ExpandedChannels {
    match config.kind {
        ExpansionKind::Efln => efln_derivative(u, q, config.order),
        _ => ExpandedChannels::zeros(config.channel_count(), u.len()),
    }
}

/// Per-sample expansion of any kind into `out`.
pub fn expand_sample(u: f64, q: f64, config: &ExpansionConfig, out: &mut [f64]) {
    match config.kind {
        ExpansionKind::Efln => efln_sample(u, q, config.order, out),
        ExpansionKind::Tfln => efln_sample(u, 0.0, config.order, out),
        ExpansionKind::Power => {
            let mut acc = u;
            for v in out.iter_mut() {
                *v = acc;
                acc *= u;
            }
        }
        ExpansionKind::Linear => out[0] = u,
    }
}

/// Per-sample derivative of any kind into `out`.
pub fn expand_derivative_sample(u: f64, q: f64, config: &ExpansionConfig, out: &mut [f64]) {
    match config.kind {
        ExpansionKind::Efln => efln_derivative_sample(u, q, config.order, out),
        _ => out.iter_mut().for_each(|v| *v = 0.0),
    }
}

fn expand_with(u: &[f64], count: usize, mut f: impl FnMut(f64, &mut [f64])) -> ExpandedChannels {
    let mut channels = vec![vec![0.0; u.len()]; count];
    let mut scratch = vec![0.0; count];
    for (j, &x) in u.iter().enumerate() {
        f(x, &mut scratch);
        for (ch, &v) in channels.iter_mut().zip(&scratch) {
            ch[j] = v;
        }
    }
    ExpandedChannels::from_channels(channels)
}
