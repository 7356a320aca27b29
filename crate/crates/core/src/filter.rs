//! Configuration and interfaces shared by the time- and frequency-domain
//! filters.

use crate::error::{check_len, Error, Result};
use crate::expansion::ExpansionConfig;

/// Any output or error sample above this magnitude aborts the run.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Block length, expansion and step sizes of an adaptive filter.
///
/// The block length M is also the number of taps per channel, so a filter
/// has `M · channel_count` weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptConfig {
    pub block_len: usize,
    pub expansion: ExpansionConfig,
    pub mu_w: f64,
    pub mu_q: f64,
    pub q0: f64,
}

impl AdaptConfig {
    pub fn new(block_len: usize, expansion: ExpansionConfig, mu_w: f64, mu_q: f64) -> Self {
        Self {
            block_len,
            expansion,
            mu_w,
            mu_q,
            q0: 0.0,
        }
    }

    pub fn with_q0(mut self, q0: f64) -> Self {
        self.q0 = q0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_len == 0 {
            return Err(Error::Config("block length must be at least 1".into()));
        }
        for (name, mu) in [("mu_w", self.mu_w), ("mu_q", self.mu_q)] {
            if !mu.is_finite() || mu < 0.0 {
                return Err(Error::Config(format!(
                    "{name} must be finite and non-negative, got {mu}"
                )));
            }
        }
        if !self.q0.is_finite() {
            return Err(Error::Config(
                "initial exponential factor must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn channel_count(&self) -> usize {
        self.expansion.channel_count()
    }

    pub fn weight_len(&self) -> usize {
        self.block_len * self.channel_count()
    }
}

/// Output and error of one processed block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOutput {
    pub y: Vec<f64>,
    pub e: Vec<f64>,
}

/// Per-block quantities needed by the steady-state and stability analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTrace {
    /// Two-block history `[g_i(k-1); g_i(k)]` of every channel.
    pub g_history: Vec<Vec<f64>>,
    /// `z_i(k)` for every channel, computed with the pre-update weights.
    pub z_channels: Vec<Vec<f64>>,
}

impl BlockTrace {
    /// `z(k) = Σ_i z_i(k)`.
    pub fn z(&self) -> Vec<f64> {
        let len = self.z_channels.first().map_or(0, Vec::len);
        let mut z = vec![0.0; len];
        for ch in &self.z_channels {
            for (a, b) in z.iter_mut().zip(ch) {
                *a += b;
            }
        }
        z
    }
}

/// A filter adapted block by block against a desired signal.
pub trait BlockFilter {
    fn config(&self) -> &AdaptConfig;

    /// Filters one block of input and adapts against `d`.
    fn process_block(&mut self, u: &[f64], d: &[f64]) -> Result<BlockOutput>;

    /// Current exponential factor.
    fn factor(&self) -> f64;

    /// Time-domain weights, channel-major (`M` taps per channel).
    fn weights(&self) -> Result<Vec<f64>>;
}

pub(crate) fn check_block(cfg: &AdaptConfig, u: &[f64], d: &[f64]) -> Result<()> {
    check_len("input block", cfg.block_len, u.len())?;
    check_len("desired block", cfg.block_len, d.len())
}

pub(crate) fn check_finite(values: &[f64], block: usize) -> Result<()> {
    if values
        .iter()
        .all(|v| v.is_finite() && v.abs() <= DIVERGENCE_LIMIT)
    {
        Ok(())
    } else {
        Err(Error::Divergence { block })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let e = ExpansionConfig::efln(1).unwrap();
        assert!(AdaptConfig::new(4, e, 0.01, 0.01).validate().is_ok());
        assert!(AdaptConfig::new(0, e, 0.01, 0.01).validate().is_err());
        assert!(AdaptConfig::new(4, e, -0.01, 0.01).validate().is_err());
        assert!(AdaptConfig::new(4, e, 0.01, f64::NAN).validate().is_err());
        assert_eq!(AdaptConfig::new(4, e, 0.0, 0.0).weight_len(), 12);
    }

    #[test]
    fn divergence_detection() {
        assert!(check_finite(&[1.0, -1e11], 0).is_ok());
        assert_eq!(
            check_finite(&[1e13], 7),
            Err(Error::Divergence { block: 7 })
        );
        assert!(check_finite(&[f64::NAN], 0).is_err());
    }
}
