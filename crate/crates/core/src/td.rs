//! Time-domain reference filters.
//!
//! [`EflnLms`] is the sample-by-sample LMS adaptation of weights and
//! exponential factor. [`BlockEflnTd`] is the block formulation that the
//! frequency-domain filter is algebraically equal to: weights and `q` are
//! frozen over a block, the gradient is accumulated over its M samples, and
//! the expansion of the previous block is reused exactly as it was computed
//! (at the previous block's `q`).

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::expansion::{expand, expand_derivative, expand_derivative_sample, expand_sample};
use crate::filter::{check_block, check_finite, AdaptConfig, BlockFilter, BlockOutput};

/// Sample-wise exponential functional link LMS filter.
///
/// At every sample the whole tapped delay line is re-expanded with the
/// current `q`. The factor update uses the weights from before the weight
/// update of the same sample.
#[derive(Debug, Clone)]
pub struct EflnLms {
    cfg: AdaptConfig,
    weights: Vec<f64>,
    q: f64,
    history: VecDeque<f64>,
    g: Vec<f64>,
    h: Vec<f64>,
    scratch: Vec<f64>,
    n: usize,
}

impl EflnLms {
    pub fn new(cfg: AdaptConfig) -> Result<Self> {
        cfg.validate()?;
        let len = cfg.weight_len();
        Ok(Self {
            cfg,
            weights: vec![0.0; len],
            q: cfg.q0,
            history: VecDeque::from(vec![0.0; cfg.block_len]),
            g: vec![0.0; len],
            h: vec![0.0; len],
            scratch: vec![0.0; cfg.channel_count()],
            n: 0,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn set_weights(&mut self, w: &[f64]) -> Result<()> {
        crate::error::check_len("weights", self.weights.len(), w.len())?;
        self.weights.copy_from_slice(w);
        Ok(())
    }

    pub fn factor(&self) -> f64 {
        self.q
    }

    /// Processes one sample and returns `(y, e)`.
    pub fn step(&mut self, u: f64, d: f64) -> Result<(f64, f64)> {
        let m = self.cfg.block_len;
        self.history.pop_back();
        self.history.push_front(u);
        let exp = self.cfg.expansion;
        for (l, &x) in self.history.iter().enumerate() {
            expand_sample(x, self.q, &exp, &mut self.scratch);
            for (i, &v) in self.scratch.iter().enumerate() {
                self.g[i * m + l] = v;
            }
        }
        let y: f64 = self.g.iter().zip(&self.weights).map(|(g, w)| g * w).sum();
        let e = d - y;
        check_finite(&[y, e], self.n)?;

        let z = if exp.adapts_factor() {
            for (l, &x) in self.history.iter().enumerate() {
                expand_derivative_sample(x, self.q, &exp, &mut self.scratch);
                for (i, &v) in self.scratch.iter().enumerate() {
                    self.h[i * m + l] = v;
                }
            }
            self.h.iter().zip(&self.weights).map(|(h, w)| h * w).sum()
        } else {
            0.0
        };
        let step = self.cfg.mu_w * e;
        for (w, g) in self.weights.iter_mut().zip(&self.g) {
            *w += step * g;
        }
        if exp.adapts_factor() {
            self.q += self.cfg.mu_q * e * z;
        }
        self.n += 1;
        Ok((y, e))
    }
}

impl BlockFilter for EflnLms {
    fn config(&self) -> &AdaptConfig {
        &self.cfg
    }

    fn process_block(&mut self, u: &[f64], d: &[f64]) -> Result<BlockOutput> {
        check_block(&self.cfg, u, d)?;
        let mut y = Vec::with_capacity(u.len());
        let mut e = Vec::with_capacity(u.len());
        for (&un, &dn) in u.iter().zip(d) {
            let (yn, en) = self.step(un, dn).map_err(|err| match err {
                Error::Divergence { .. } => Error::Divergence {
                    block: self.n / self.cfg.block_len,
                },
                other => other,
            })?;
            y.push(yn);
            e.push(en);
        }
        Ok(BlockOutput { y, e })
    }

    fn factor(&self) -> f64 {
        self.q
    }

    fn weights(&self) -> Result<Vec<f64>> {
        Ok(self.weights.clone())
    }
}

/// Block time-domain counterpart of the frequency-domain filter.
///
/// ```text
/// y(k)   = Gᵀ(k) w(k)
/// w(k+1) = w(k) + μw G(k) e(k)
/// q(k+1) = q(k) + μq wᵀ(k) H(k) e(k)
/// ```
#[derive(Debug, Clone)]
pub struct BlockEflnTd {
    cfg: AdaptConfig,
    weights: Vec<f64>,
    q: f64,
    prev_g: Vec<Vec<f64>>,
    prev_h: Vec<Vec<f64>>,
    k: usize,
}

impl BlockEflnTd {
    pub fn new(cfg: AdaptConfig) -> Result<Self> {
        cfg.validate()?;
        let c = cfg.channel_count();
        let m = cfg.block_len;
        Ok(Self {
            cfg,
            weights: vec![0.0; cfg.weight_len()],
            q: cfg.q0,
            prev_g: vec![vec![0.0; m]; c],
            prev_h: vec![vec![0.0; m]; c],
            k: 0,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn set_weights(&mut self, w: &[f64]) -> Result<()> {
        crate::error::check_len("weights", self.weights.len(), w.len())?;
        self.weights.copy_from_slice(w);
        Ok(())
    }

    pub fn factor(&self) -> f64 {
        self.q
    }

    pub fn block_index(&self) -> usize {
        self.k
    }

    pub fn step(&mut self, u: &[f64], d: &[f64]) -> Result<BlockOutput> {
        check_block(&self.cfg, u, d)?;
        let m = self.cfg.block_len;
        let exp = self.cfg.expansion;
        let g_cur = expand(u, self.q, &exp).into_channels();
        let g_hist: Vec<Vec<f64>> = self
            .prev_g
            .iter()
            .zip(&g_cur)
            .map(|(p, c)| [p.as_slice(), c.as_slice()].concat())
            .collect();

        let y = block_convolve(&g_hist, &self.weights, m);
        let e: Vec<f64> = d.iter().zip(&y).map(|(d, y)| d - y).collect();
        check_finite(&y, self.k)?;
        check_finite(&e, self.k)?;

        let h_cur = if exp.adapts_factor() {
            Some(expand_derivative(u, self.q, &exp).into_channels())
        } else {
            None
        };
        let z = h_cur.as_ref().map(|h_cur| {
            let h_hist: Vec<Vec<f64>> = self
                .prev_h
                .iter()
                .zip(h_cur)
                .map(|(p, c)| [p.as_slice(), c.as_slice()].concat())
                .collect();
            block_convolve(&h_hist, &self.weights, m)
        });

        let grad = block_correlate(&g_hist, &e, m);
        for (w, g) in self.weights.iter_mut().zip(&grad) {
            *w += self.cfg.mu_w * g;
        }
        if let Some(z) = z {
            let ze: f64 = z.iter().zip(&e).map(|(z, e)| z * e).sum();
            self.q += self.cfg.mu_q * ze;
        }

        self.prev_g = g_cur;
        if let Some(h) = h_cur {
            self.prev_h = h;
        }
        self.k += 1;
        Ok(BlockOutput { y, e })
    }
}

impl BlockFilter for BlockEflnTd {
    fn config(&self) -> &AdaptConfig {
        &self.cfg
    }

    fn process_block(&mut self, u: &[f64], d: &[f64]) -> Result<BlockOutput> {
        self.step(u, d)
    }

    fn factor(&self) -> f64 {
        self.q
    }

    fn weights(&self) -> Result<Vec<f64>> {
        Ok(self.weights.clone())
    }
}

/// `out_j = Σ_i Σ_ℓ w[i·M + ℓ] · hist_i[M + j - ℓ]` for two-block histories.
pub(crate) fn block_convolve(hist: &[Vec<f64>], weights: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for (i, h) in hist.iter().enumerate() {
        let w = &weights[i * m..(i + 1) * m];
        for (j, o) in out.iter_mut().enumerate() {
            *o += w
                .iter()
                .enumerate()
                .map(|(l, wl)| wl * h[m + j - l])
                .sum::<f64>();
        }
    }
    out
}

/// `grad[i·M + ℓ] = Σ_j e_j · hist_i[M + j - ℓ]`.
pub(crate) fn block_correlate(hist: &[Vec<f64>], e: &[f64], m: usize) -> Vec<f64> {
    let mut grad = vec![0.0; hist.len() * m];
    for (i, h) in hist.iter().enumerate() {
        for l in 0..m {
            grad[i * m + l] = e.iter().enumerate().map(|(j, ej)| ej * h[m + j - l]).sum();
        }
    }
    grad
}
