//! Frequency-domain exponential functional link filter (50% overlap-save).
//!
//! Per block k and channel i:
//!
//! ```text
//! g̃_i   = FFT[g_i(k-1); g_i(k)]
//! y_i    = last M of IFFT(g̃_i ∘ w̃_i),        y = Σ y_i,  e = d - y
//! ẽ      = FFT[0; e]
//! φ_i    = first M of IFFT(ẽ ∘ conj(g̃_i))
//! h̃_i   = FFT[h_i(k-1); h_i(k)]
//! z_i    = last M of IFFT(h̃_i ∘ w̃_i),        z = Σ z_i
//! w̃_i  += μw · FFT[φ_i; 0]
//! q     += μq · zᵀe
//! ```
//!
//! The previous block's expanded channels are cached, so `g_i(k-1)` and
//! `h_i(k-1)` carry the factor `q(k-1)` they were computed with. `z` is
//! formed with the weights from before this block's update.

use crate::analysis::complexity::{OpTally, Phase};
use crate::dsp::{filter_spectrum, overlap_save_correlate, Spectrum, Transform};
use crate::error::{check_len, Error, Result};
use crate::expansion::{expand, expand_derivative};
use crate::filter::{check_block, check_finite, AdaptConfig, BlockFilter, BlockOutput, BlockTrace};

/// Tail residue above which exported weights are rejected.
pub const WEIGHT_TAIL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Fdefln {
    cfg: AdaptConfig,
    transform: Transform,
    w_spec: Vec<Spectrum>,
    q: f64,
    prev_g: Vec<Vec<f64>>,
    prev_h: Vec<Vec<f64>>,
    k: usize,
    tally: Option<OpTally>,
}

impl Fdefln {
    pub fn new(cfg: AdaptConfig) -> Result<Self> {
        cfg.validate()?;
        let m = cfg.block_len;
        let c = cfg.channel_count();
        Ok(Self {
            cfg,
            transform: Transform::for_block(m)?,
            w_spec: vec![Spectrum::zeros(2 * m); c],
            q: cfg.q0,
            prev_g: vec![vec![0.0; m]; c],
            prev_h: vec![vec![0.0; m]; c],
            k: 0,
            tally: None,
        })
    }

    /// Turns on operation counting (radix-2 block lengths only).
    pub fn enable_counting(&mut self) -> Result<()> {
        self.tally = Some(OpTally::new(self.cfg.block_len)?);
        Ok(())
    }

    pub fn tally(&self) -> Option<&OpTally> {
        self.tally.as_ref()
    }

    pub fn weight_spectra(&self) -> &[Spectrum] {
        &self.w_spec
    }

    pub fn factor(&self) -> f64 {
        self.q
    }

    pub fn set_factor(&mut self, q: f64) {
        self.q = q;
    }

    pub fn block_index(&self) -> usize {
        self.k
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    /// Loads time-domain weights (channel-major, M per channel).
    pub fn set_weights(&mut self, w: &[f64]) -> Result<()> {
        check_len("weights", self.cfg.weight_len(), w.len())?;
        let m = self.cfg.block_len;
        for (i, spec) in self.w_spec.iter_mut().enumerate() {
            *spec = self.transform.forward_zero_tail(&w[i * m..(i + 1) * m])?;
        }
        Ok(())
    }

    /// Time-domain weights: first M samples of each inverse weight spectrum.
    /// Fails if any channel's last M samples exceed [`WEIGHT_TAIL_TOL`].
    pub fn weights_time(&self) -> Result<Vec<f64>> {
        let m = self.cfg.block_len;
        let mut out = Vec::with_capacity(self.cfg.weight_len());
        for spec in &self.w_spec {
            let t = self.transform.inverse(spec)?;
            let residue = t[m..].iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if residue > WEIGHT_TAIL_TOL {
                return Err(Error::ConstraintViolation { residue });
            }
            out.extend_from_slice(&t[..m]);
        }
        Ok(out)
    }

    /// Energy of the last M samples of every inverse weight spectrum relative
    /// to the total energy (0 for all-zero weights).
    pub fn tail_energy_ratio(&self) -> Result<f64> {
        let m = self.cfg.block_len;
        let (mut tail, mut total) = (0.0, 0.0);
        for spec in &self.w_spec {
            let t = self.transform.inverse(spec)?;
            tail += t[m..].iter().map(|v| v * v).sum::<f64>();
            total += t.iter().map(|v| v * v).sum::<f64>();
        }
        Ok(if total > 0.0 { tail / total } else { 0.0 })
    }

    pub fn process(&mut self, u: &[f64], d: &[f64]) -> Result<BlockOutput> {
        self.process_traced(u, d).map(|(out, _)| out)
    }

    /// Processes one block and also returns the channel histories and `z_i`.
    pub fn process_traced(&mut self, u: &[f64], d: &[f64]) -> Result<(BlockOutput, BlockTrace)> {
        check_block(&self.cfg, u, d)?;
        let m = self.cfg.block_len;
        let exp = self.cfg.expansion;
        let tf = &self.transform;
        let mut tally = self.tally.take();
        let c = self.cfg.channel_count() as u64;

        let g_cur = expand(u, self.q, &exp).into_channels();
        let mut g_spec = Vec::with_capacity(g_cur.len());
        let mut y = vec![0.0; m];
        for ((prev, cur), w) in self.prev_g.iter().zip(&g_cur).zip(&self.w_spec) {
            let gs = tf.forward_pair(prev, cur)?;
            let yi = filter_spectrum(tf, &gs, w)?;
            for (a, b) in y.iter_mut().zip(&yi) {
                *a += b;
            }
            g_spec.push(gs);
            if let Some(t) = tally.as_mut() {
                t.transform(Phase::Filtering);
                t.spectral_product(Phase::Filtering);
                t.transform(Phase::Filtering);
            }
        }
        if let Some(t) = tally.as_mut() {
            t.vector_add(Phase::Filtering, c - 1);
        }
        check_finite(&y, self.k)?;

        let e: Vec<f64> = d.iter().zip(&y).map(|(d, y)| d - y).collect();
        check_finite(&e, self.k)?;
        let e_spec = tf.forward_zero_head(&e)?;
        if let Some(t) = tally.as_mut() {
            t.vector_add(Phase::Error, 1);
            t.transform(Phase::Error);
        }

        let mut updates = Vec::with_capacity(g_spec.len());
        for gs in &g_spec {
            let phi = overlap_save_correlate(tf, &e_spec, gs)?;
            updates.push(tf.forward_zero_tail(&phi)?);
            if let Some(t) = tally.as_mut() {
                t.transform(Phase::WeightAdaptation);
                t.spectral_product(Phase::WeightAdaptation);
                t.transform(Phase::WeightAdaptation);
            }
        }

        let mut z_channels = Vec::new();
        let mut h_cur = None;
        if exp.adapts_factor() {
            let h = expand_derivative(u, self.q, &exp).into_channels();
            for ((prev, cur), w) in self.prev_h.iter().zip(&h).zip(&self.w_spec) {
                let hs = tf.forward_pair(prev, cur)?;
                z_channels.push(filter_spectrum(tf, &hs, w)?);
                if let Some(t) = tally.as_mut() {
                    t.transform(Phase::FactorAdaptation);
                    t.spectral_product(Phase::FactorAdaptation);
                    t.transform(Phase::FactorAdaptation);
                }
            }
            h_cur = Some(h);
        }

        for (w, upd) in self.w_spec.iter_mut().zip(&updates) {
            w.add_scaled(upd, self.cfg.mu_w)?;
            if let Some(t) = tally.as_mut() {
                t.scale_accumulate(Phase::WeightAdaptation);
            }
        }

        let trace_g: Vec<Vec<f64>> = self
            .prev_g
            .iter()
            .zip(&g_cur)
            .map(|(p, c)| [p.as_slice(), c.as_slice()].concat())
            .collect();
        let trace = BlockTrace {
            g_history: trace_g,
            z_channels,
        };
        if exp.adapts_factor() {
            let z = trace.z();
            let ze: f64 = z.iter().zip(&e).map(|(z, e)| z * e).sum();
            self.q += self.cfg.mu_q * ze;
            if let Some(t) = tally.as_mut() {
                t.vector_add(Phase::FactorAdaptation, c - 1);
                t.inner_product(Phase::FactorAdaptation);
                t.scalar_update(Phase::FactorAdaptation);
            }
        }

        self.prev_g = g_cur;
        if let Some(h) = h_cur {
            self.prev_h = h;
        }
        if let Some(t) = tally.as_mut() {
            t.end_block();
        }
        self.tally = tally;
        self.k += 1;
        Ok((BlockOutput { y, e }, trace))
    }
}

impl BlockFilter for Fdefln {
    fn config(&self) -> &AdaptConfig {
        &self.cfg
    }

    fn process_block(&mut self, u: &[f64], d: &[f64]) -> Result<BlockOutput> {
        self.process(u, d)
    }

    fn factor(&self) -> f64 {
        self.q
    }

    fn weights(&self) -> Result<Vec<f64>> {
        self.weights_time()
    }
}
