//! Steady-state excess mean-square error.
//!
//! ```text
//! EMSE(∞) = μw σ² trG / (2M − μw trSG) + μq σ² trH / (2M − μq trSH)
//! ```
//!
//! with `G(k)` the matrix whose columns are the expanded regressors
//! `g(kM+j)` of one block, `z(k) = Hᵀ(k) w` and
//!
//! ```text
//! trG  = E‖G‖²_F          trSG = E‖Σⱼ g(kM+j)‖²
//! trH  = E‖z‖²            trSH = E(Σⱼ zⱼ)²
//! ```

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimates {
    pub tr_g: f64,
    pub tr_sg: f64,
    pub tr_h: f64,
    pub tr_sh: f64,
    pub noise_var: f64,
    pub block_len: usize,
}

/// Closed-form steady-state EMSE (linear scale).
pub fn theoretical_emse(mu_w: f64, mu_q: f64, m: &MomentEstimates) -> Result<f64> {
    let two_m = 2.0 * m.block_len as f64;
    let dw = two_m - mu_w * m.tr_sg;
    let dq = two_m - mu_q * m.tr_sh;
    for denominator in [dw, dq] {
        if denominator <= 0.0 {
            return Err(Error::Unstable { denominator });
        }
    }
    Ok(mu_w * m.noise_var * m.tr_g / dw + mu_q * m.noise_var * m.tr_h / dq)
}

/// Mean squared difference between the noiseless plant output and the
/// filter output, i.e. `(1/M)·E‖ȳ(k) − y(k)‖²` over the supplied blocks.
pub fn simulated_emse(clean: &[f64], y: &[f64]) -> f64 {
    let n = clean.len().min(y.len());
    if n == 0 {
        return 0.0;
    }
    clean
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n as f64
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Running sample means of the four traces.
#[derive(Debug, Clone, Default)]
pub struct MomentAccumulator {
    block_len: usize,
    blocks: usize,
    tr_g: f64,
    tr_sg: f64,
    tr_h: f64,
    tr_sh: f64,
}

impl MomentAccumulator {
    pub fn new(block_len: usize) -> Self {
        Self {
            block_len,
            ..Self::default()
        }
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn samples(&self) -> usize {
        self.blocks * self.block_len
    }

    /// Adds one block given the columns `g(kM+j)` of `G(k)` and `z(k)`.
    pub fn push_columns(&mut self, columns: &[Vec<f64>], z: &[f64]) -> Result<()> {
        crate::error::check_len("regressor columns", self.block_len, columns.len())?;
        let rows = columns.first().map_or(0, Vec::len);
        let mut sum = vec![0.0; rows];
        for c in columns {
            crate::error::check_len("regressor column", rows, c.len())?;
            self.tr_g += c.iter().map(|v| v * v).sum::<f64>();
            for (s, v) in sum.iter_mut().zip(c) {
                *s += v;
            }
        }
        self.tr_sg += sum.iter().map(|v| v * v).sum::<f64>();
        self.push_z(z)
    }

    /// Adds one block given the two-block channel histories
    /// `[g_i(k-1); g_i(k)]` and `z(k)`.
    pub fn push_block(&mut self, g_history: &[Vec<f64>], z: &[f64]) -> Result<()> {
        let m = self.block_len;
        for hist in g_history {
            crate::error::check_len("channel history", 2 * m, hist.len())?;
            // Column j holds hist[M+j-ℓ] for ℓ = 0..M, a window ending at M+j.
            for j in 0..m {
                self.tr_g += hist[j + 1..=m + j].iter().map(|v| v * v).sum::<f64>();
            }
            for l in 0..m {
                let s: f64 = hist[m - l..2 * m - l].iter().sum();
                self.tr_sg += s * s;
            }
        }
        self.push_z(z)
    }

    fn push_z(&mut self, z: &[f64]) -> Result<()> {
        if !z.is_empty() {
            crate::error::check_len("z", self.block_len, z.len())?;
        }
        self.tr_h += z.iter().map(|v| v * v).sum::<f64>();
        let s: f64 = z.iter().sum();
        self.tr_sh += s * s;
        self.blocks += 1;
        Ok(())
    }

    /// Sample-mean estimates; at least `required_samples` samples must have
    /// been accumulated.
    pub fn estimate(&self, noise_var: f64, required_samples: usize) -> Result<MomentEstimates> {
        if self.blocks == 0 || self.samples() < required_samples {
            return Err(Error::InsufficientTrace {
                required: required_samples.max(1),
                available: self.samples(),
            });
        }
        let b = self.blocks as f64;
        Ok(MomentEstimates {
            tr_g: self.tr_g / b,
            tr_sg: self.tr_sg / b,
            tr_h: self.tr_h / b,
            tr_sh: self.tr_sh / b,
            noise_var,
            block_len: self.block_len,
        })
    }

    /// Combines accumulators in a fixed order.
    pub fn merge(&mut self, other: &MomentAccumulator) {
        self.blocks += other.blocks;
        self.tr_g += other.tr_g;
        self.tr_sg += other.tr_sg;
        self.tr_h += other.tr_h;
        self.tr_sh += other.tr_sh;
    }
}
