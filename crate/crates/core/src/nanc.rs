//! Filtered-s controllers for nonlinear active noise control.
//!
//! The controller output `y` reaches the error sensor through the secondary
//! path, `e = d − f(y * s)`, where `f` is an optional saturating nonlinearity
//! of the physical plant. The adaptation filters the expanded reference
//! through the linear path estimate `s` only.
//!
//! [`Efslms`] adapts sample by sample, [`BlockEfslmsTd`] is the block
//! time-domain counterpart and [`Fdefslms`] the overlap-save implementation.
//! Any [`ExpansionKind`](crate::expansion::ExpansionKind) can be used: a
//! linear expansion gives the filtered-x block LMS, trigonometric and power
//! expansions the usual functional link baselines with `q` frozen.

use crate::analysis::complexity::{OpTally, Phase};
use crate::dsp::{filter_spectrum, overlap_save_correlate, FirCoefficients, Spectrum, Transform};
use crate::error::{check_len, Error, Result};
use crate::expansion::{expand, expand_derivative, expand_derivative_sample, expand_sample};
use crate::filter::{check_block, check_finite, AdaptConfig, BlockOutput};
use crate::td::{block_convolve, block_correlate};

/// Memoryless distortion applied after the physical secondary path.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum OutputNonlinearity {
    #[default]
    None,
    /// `gain · tanh(slope · x)`
    Tanh { gain: f64, slope: f64 },
}

impl OutputNonlinearity {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            OutputNonlinearity::None => x,
            OutputNonlinearity::Tanh { gain, slope } => gain * (slope * x).tanh(),
        }
    }
}

/// Secondary path: FIR taps, their zero-padded 2M-point spectrum and the
/// plant's output nonlinearity.
#[derive(Debug, Clone)]
pub struct SecondaryPath {
    taps: FirCoefficients,
    spectrum: Spectrum,
    transform: Transform,
    nonlinearity: OutputNonlinearity,
}

impl SecondaryPath {
    /// Path for block length `block_len`; at most `block_len` taps.
    pub fn new(taps: FirCoefficients, block_len: usize) -> Result<Self> {
        let transform = Transform::for_block(block_len)?;
        let spectrum = Self::spectrum_for(&transform, &taps)?;
        Ok(Self {
            taps,
            spectrum,
            transform,
            nonlinearity: OutputNonlinearity::None,
        })
    }

    pub fn identity(block_len: usize) -> Result<Self> {
        Self::new(FirCoefficients::impulse(), block_len)
    }

    fn spectrum_for(transform: &Transform, taps: &FirCoefficients) -> Result<Spectrum> {
        let m = transform.block_len();
        if taps.len() > m {
            return Err(Error::Config(format!(
                "secondary path has {} taps, block length is {m}",
                taps.len()
            )));
        }
        transform.forward_zero_tail(taps.taps())
    }

    pub fn with_nonlinearity(mut self, nonlinearity: OutputNonlinearity) -> Self {
        self.nonlinearity = nonlinearity;
        self
    }

    pub fn taps(&self) -> &FirCoefficients {
        &self.taps
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn nonlinearity(&self) -> OutputNonlinearity {
        self.nonlinearity
    }

    pub fn block_len(&self) -> usize {
        self.transform.block_len()
    }

    /// Replaces the taps and spectrum together.
    pub fn set_taps(&mut self, taps: FirCoefficients) -> Result<()> {
        self.spectrum = Self::spectrum_for(&self.transform, &taps)?;
        self.taps = taps;
        Ok(())
    }

    /// Same path with every tap negated.
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        out.taps = self.taps.negated();
        out.spectrum = Spectrum::from_bins(self.spectrum.bins().iter().map(|b| -b).collect());
        out
    }

    /// `[prev; cur] * s` at the positions of `cur`, via overlap-save.
    pub fn filter_block(&self, prev: &[f64], cur: &[f64]) -> Result<Vec<f64>> {
        crate::dsp::overlap_save_filter(&self.transform, prev, cur, &self.spectrum)
    }

    /// `[prev; cur] * s` at the positions of `cur`, by direct summation.
    pub fn filter_block_direct(&self, prev: &[f64], cur: &[f64]) -> Vec<f64> {
        let m = cur.len();
        let taps = self.taps.taps();
        (0..m)
            .map(|j| {
                taps.iter()
                    .enumerate()
                    .map(|(n, s)| {
                        let v = if n <= j { cur[j - n] } else { prev[m + j - n] };
                        s * v
                    })
                    .sum()
            })
            .collect()
    }

    fn check(&self, m: usize) -> Result<()> {
        check_len("secondary path spectrum", 2 * m, self.spectrum.len())
    }
}

/// A controller adapted through a secondary path.
pub trait AncController {
    fn config(&self) -> &AdaptConfig;

    /// One block of reference `u` and primary disturbance `d`. The returned
    /// `e` is the residual at the error sensor.
    fn process_block(&mut self, path: &SecondaryPath, u: &[f64], d: &[f64]) -> Result<BlockOutput>;

    fn factor(&self) -> f64;

    fn weights(&self) -> Result<Vec<f64>>;
}

/// Sample-wise filtered-s LMS with an exponential functional link expansion.
///
/// The reference delay line is re-expanded with the current `q` at every
/// sample, and the filtered regressor is `ĝ_{i,ℓ}(n) = Σ_m s_m g_i(n−ℓ−m)`.
#[derive(Debug, Clone)]
pub struct Efslms {
    cfg: AdaptConfig,
    weights: Vec<f64>,
    q: f64,
    /// Most recent reference sample first.
    u_hist: Vec<f64>,
    /// Most recent controller output first.
    y_hist: Vec<f64>,
    n: usize,
}

impl Efslms {
    pub fn new(cfg: AdaptConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            weights: vec![0.0; cfg.weight_len()],
            q: cfg.q0,
            u_hist: Vec::new(),
            y_hist: Vec::new(),
            n: 0,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn factor(&self) -> f64 {
        self.q
    }

    /// Processes one sample and returns `(y, e)`.
    pub fn step(&mut self, path: &SecondaryPath, u: f64, d: f64) -> Result<(f64, f64)> {
        let m = self.cfg.block_len;
        let s = path.taps().taps();
        let n_taps = s.len();
        let exp = self.cfg.expansion;
        let c = self.cfg.channel_count();
        let depth = m + n_taps - 1;
        self.u_hist.insert(0, u);
        self.u_hist.resize(depth, 0.0);

        // Expansion of the delay line, row r = sample n−r.
        let mut g = vec![0.0; depth * c];
        let mut h = vec![0.0; depth * c];
        for (r, &x) in self.u_hist.iter().enumerate() {
            expand_sample(x, self.q, &exp, &mut g[r * c..(r + 1) * c]);
            if exp.adapts_factor() {
                expand_derivative_sample(x, self.q, &exp, &mut h[r * c..(r + 1) * c]);
            }
        }

        let mut y = 0.0;
        for i in 0..c {
            for l in 0..m {
                y += self.weights[i * m + l] * g[l * c + i];
            }
        }
        self.y_hist.insert(0, y);
        self.y_hist.truncate(n_taps);
        let ys: f64 = self.y_hist.iter().zip(s).map(|(y, s)| y * s).sum();
        let e = d - path.nonlinearity().apply(ys);
        check_finite(&[y, e], self.n)?;

        let filtered = |rows: &[f64], i: usize, l: usize| -> f64 {
            s.iter()
                .enumerate()
                .map(|(mm, sm)| sm * rows[(l + mm) * c + i])
                .sum()
        };
        let mut z = 0.0;
        if exp.adapts_factor() {
            for i in 0..c {
                for l in 0..m {
                    z += self.weights[i * m + l] * filtered(&h, i, l);
                }
            }
        }
        let step = self.cfg.mu_w * e;
        for i in 0..c {
            for l in 0..m {
                self.weights[i * m + l] += step * filtered(&g, i, l);
            }
        }
        if exp.adapts_factor() {
            self.q += self.cfg.mu_q * e * z;
        }
        self.n += 1;
        Ok((y, e))
    }
}

impl AncController for Efslms {
    fn config(&self) -> &AdaptConfig {
        &self.cfg
    }

    fn process_block(&mut self, path: &SecondaryPath, u: &[f64], d: &[f64]) -> Result<BlockOutput> {
        check_block(&self.cfg, u, d)?;
        let mut y = Vec::with_capacity(u.len());
        let mut e = Vec::with_capacity(u.len());
        for (&un, &dn) in u.iter().zip(d) {
            let (yn, en) = self.step(path, un, dn).map_err(|err| match err {
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

fn concat(prev: &[Vec<f64>], cur: &[Vec<f64>]) -> Vec<Vec<f64>> {
    prev.iter()
        .zip(cur)
        .map(|(p, c)| [p.as_slice(), c.as_slice()].concat())
        .collect()
}

/// `Σ_m s_m · hist[M + j − m]` for every channel history.
fn filter_histories(hist: &[Vec<f64>], s: &[f64], m: usize) -> Vec<Vec<f64>> {
    hist.iter()
        .map(|h| {
            (0..m)
                .map(|j| s.iter().enumerate().map(|(n, sn)| sn * h[m + j - n]).sum())
                .collect()
        })
        .collect()
}

/// Block time-domain filtered-s counterpart of [`Fdefslms`].
///
/// ```text
/// y(k)   = Gᵀ(k) w(k)                  e(k) = d(k) − f(y * s)
/// w(k+1) = w(k) + μw Ĝ(k) e(k)
/// q(k+1) = q(k) + μq ẑᵀ(k) e(k),       ẑ(k) = Ĥᵀ(k) w(k)
/// ```
///
/// `ĝ_i(k)` and `ĥ_i(k)` are filtered from the two-block histories of
/// `g_i` and `h_i` and cached, so `ĝ_i(k−1)` keeps the path and factor it
/// was computed with.
#[derive(Debug, Clone)]
pub struct BlockEfslmsTd {
    cfg: AdaptConfig,
    weights: Vec<f64>,
    q: f64,
    prev_g: Vec<Vec<f64>>,
    prev_h: Vec<Vec<f64>>,
    prev_gf: Vec<Vec<f64>>,
    prev_hf: Vec<Vec<f64>>,
    prev_y: Vec<f64>,
    k: usize,
}

impl BlockEfslmsTd {
    pub fn new(cfg: AdaptConfig) -> Result<Self> {
        cfg.validate()?;
        let (m, c) = (cfg.block_len, cfg.channel_count());
        let zeros = vec![vec![0.0; m]; c];
        Ok(Self {
            cfg,
            weights: vec![0.0; cfg.weight_len()],
            q: cfg.q0,
            prev_g: zeros.clone(),
            prev_h: zeros.clone(),
            prev_gf: zeros.clone(),
            prev_hf: zeros,
            prev_y: vec![0.0; m],
            k: 0,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn factor(&self) -> f64 {
        self.q
    }

    pub fn step(&mut self, path: &SecondaryPath, u: &[f64], d: &[f64]) -> Result<BlockOutput> {
        check_block(&self.cfg, u, d)?;
        let m = self.cfg.block_len;
        path.check(m)?;
        let s = path.taps().taps();
        let exp = self.cfg.expansion;

        let g_cur = expand(u, self.q, &exp).into_channels();
        let g_hist = concat(&self.prev_g, &g_cur);
        let y = block_convolve(&g_hist, &self.weights, m);
        let ys = path.filter_block_direct(&self.prev_y, &y);
        let nl = path.nonlinearity();
        let e: Vec<f64> = d.iter().zip(&ys).map(|(d, v)| d - nl.apply(*v)).collect();
        check_finite(&y, self.k)?;
        check_finite(&e, self.k)?;

        let gf_cur = filter_histories(&g_hist, s, m);
        let grad = block_correlate(&concat(&self.prev_gf, &gf_cur), &e, m);

        let mut factor_state = None;
        if exp.adapts_factor() {
            let h_cur = expand_derivative(u, self.q, &exp).into_channels();
            let hf_cur = filter_histories(&concat(&self.prev_h, &h_cur), s, m);
            let z = block_convolve(&concat(&self.prev_hf, &hf_cur), &self.weights, m);
            let ze: f64 = z.iter().zip(&e).map(|(z, e)| z * e).sum();
            factor_state = Some((h_cur, hf_cur, ze));
        }

        for (w, g) in self.weights.iter_mut().zip(&grad) {
            *w += self.cfg.mu_w * g;
        }
        if let Some((h_cur, hf_cur, ze)) = factor_state {
            self.q += self.cfg.mu_q * ze;
            self.prev_h = h_cur;
            self.prev_hf = hf_cur;
        }
        self.prev_g = g_cur;
        self.prev_gf = gf_cur;
        self.prev_y = y.clone();
        self.k += 1;
        Ok(BlockOutput { y, e })
    }
}

impl AncController for BlockEfslmsTd {
    fn config(&self) -> &AdaptConfig {
        &self.cfg
    }

    fn process_block(&mut self, path: &SecondaryPath, u: &[f64], d: &[f64]) -> Result<BlockOutput> {
        self.step(path, u, d)
    }

    fn factor(&self) -> f64 {
        self.q
    }

    fn weights(&self) -> Result<Vec<f64>> {
        Ok(self.weights.clone())
    }
}

/// Frequency-domain filtered-s controller (50% overlap-save).
///
/// The controller output is passed through the path by direct summation,
/// every other convolution and correlation runs on 2M-point spectra.
#[derive(Debug, Clone)]
pub struct Fdefslms {
    cfg: AdaptConfig,
    transform: Transform,
    w_spec: Vec<Spectrum>,
    q: f64,
    prev_g: Vec<Vec<f64>>,
    prev_h: Vec<Vec<f64>>,
    prev_gf: Vec<Vec<f64>>,
    prev_hf: Vec<Vec<f64>>,
    prev_y: Vec<f64>,
    k: usize,
    tally: Option<OpTally>,
}

impl Fdefslms {
    pub fn new(cfg: AdaptConfig) -> Result<Self> {
        cfg.validate()?;
        let (m, c) = (cfg.block_len, cfg.channel_count());
        let zeros = vec![vec![0.0; m]; c];
        Ok(Self {
            cfg,
            transform: Transform::for_block(m)?,
            w_spec: vec![Spectrum::zeros(2 * m); c],
            q: cfg.q0,
            prev_g: zeros.clone(),
            prev_h: zeros.clone(),
            prev_gf: zeros.clone(),
            prev_hf: zeros,
            prev_y: vec![0.0; m],
            k: 0,
            tally: None,
        })
    }

    pub fn enable_counting(&mut self) -> Result<()> {
        self.tally = Some(OpTally::new(self.cfg.block_len)?);
        Ok(())
    }

    pub fn tally(&self) -> Option<&OpTally> {
        self.tally.as_ref()
    }

    pub fn factor(&self) -> f64 {
        self.q
    }

    pub fn block_index(&self) -> usize {
        self.k
    }

    pub fn weight_spectra(&self) -> &[Spectrum] {
        &self.w_spec
    }

    /// Time-domain weights, first M samples of each inverse weight spectrum.
    pub fn weights_time(&self) -> Result<Vec<f64>> {
        let m = self.cfg.block_len;
        let mut out = Vec::with_capacity(self.cfg.weight_len());
        for spec in &self.w_spec {
            let t = self.transform.inverse(spec)?;
            let residue = t[m..].iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if residue > crate::fd::WEIGHT_TAIL_TOL {
                return Err(Error::ConstraintViolation { residue });
            }
            out.extend_from_slice(&t[..m]);
        }
        Ok(out)
    }

    pub fn step(&mut self, path: &SecondaryPath, u: &[f64], d: &[f64]) -> Result<BlockOutput> {
        check_block(&self.cfg, u, d)?;
        let m = self.cfg.block_len;
        path.check(m)?;
        let exp = self.cfg.expansion;
        let tf = &self.transform;
        let s_spec = path.spectrum();
        let c = self.cfg.channel_count() as u64;
        let mut tally = self.tally.take();

        let g_cur = expand(u, self.q, &exp).into_channels();
        let mut g_spec = Vec::with_capacity(g_cur.len());
        let mut y = vec![0.0; m];
        for ((prev, cur), w) in self.prev_g.iter().zip(&g_cur).zip(&self.w_spec) {
            let gs = tf.forward_pair(prev, cur)?;
            for (a, b) in y.iter_mut().zip(filter_spectrum(tf, &gs, w)?) {
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

        let ys = path.filter_block_direct(&self.prev_y, &y);
        let nl = path.nonlinearity();
        let e: Vec<f64> = d.iter().zip(&ys).map(|(d, v)| d - nl.apply(*v)).collect();
        check_finite(&e, self.k)?;
        let e_spec = tf.forward_zero_head(&e)?;
        if let Some(t) = tally.as_mut() {
            let n = path.taps().len() as u64;
            // Direct convolution and subtraction: MN products, M(N−1) + M sums.
            t.charge_raw(Phase::Error, m as u64 * n, m as u64 * n);
            t.transform(Phase::Error);
        }

        let mut gf_cur = Vec::with_capacity(g_spec.len());
        let mut updates = Vec::with_capacity(g_spec.len());
        for (gs, prev) in g_spec.iter().zip(&self.prev_gf) {
            let gf = filter_spectrum(tf, gs, s_spec)?;
            let gfs = tf.forward_pair(prev, &gf)?;
            let phi = overlap_save_correlate(tf, &e_spec, &gfs)?;
            updates.push(tf.forward_zero_tail(&phi)?);
            gf_cur.push(gf);
            if let Some(t) = tally.as_mut() {
                t.spectral_product(Phase::WeightAdaptation);
                t.transform(Phase::WeightAdaptation);
                t.transform(Phase::WeightAdaptation);
                t.spectral_product(Phase::WeightAdaptation);
                t.transform(Phase::WeightAdaptation);
                t.transform(Phase::WeightAdaptation);
            }
        }

        let mut factor_state = None;
        if exp.adapts_factor() {
            let h_cur = expand_derivative(u, self.q, &exp).into_channels();
            let mut hf_cur = Vec::with_capacity(h_cur.len());
            let mut z = vec![0.0; m];
            for (((prev_h, cur), prev_hf), w) in self
                .prev_h
                .iter()
                .zip(&h_cur)
                .zip(&self.prev_hf)
                .zip(&self.w_spec)
            {
                let hs = tf.forward_pair(prev_h, cur)?;
                let hf = filter_spectrum(tf, &hs, s_spec)?;
                let hfs = tf.forward_pair(prev_hf, &hf)?;
                for (a, b) in z.iter_mut().zip(filter_spectrum(tf, &hfs, w)?) {
                    *a += b;
                }
                hf_cur.push(hf);
                if let Some(t) = tally.as_mut() {
                    t.transform(Phase::FactorAdaptation);
                    t.spectral_product(Phase::FactorAdaptation);
                    t.transform(Phase::FactorAdaptation);
                    t.transform(Phase::FactorAdaptation);
                    t.spectral_product(Phase::FactorAdaptation);
                    t.transform(Phase::FactorAdaptation);
                }
            }
            let ze: f64 = z.iter().zip(&e).map(|(z, e)| z * e).sum();
            factor_state = Some((h_cur, hf_cur, ze));
        }

        for (w, upd) in self.w_spec.iter_mut().zip(&updates) {
            w.add_scaled(upd, self.cfg.mu_w)?;
            if let Some(t) = tally.as_mut() {
                t.scale_accumulate(Phase::WeightAdaptation);
            }
        }
        if let Some((h_cur, hf_cur, ze)) = factor_state {
            self.q += self.cfg.mu_q * ze;
            self.prev_h = h_cur;
            self.prev_hf = hf_cur;
            if let Some(t) = tally.as_mut() {
                t.vector_add(Phase::FactorAdaptation, c - 1);
                t.inner_product(Phase::FactorAdaptation);
                t.scalar_update(Phase::FactorAdaptation);
            }
        }
        self.prev_g = g_cur;
        self.prev_gf = gf_cur;
        self.prev_y = y.clone();
        if let Some(t) = tally.as_mut() {
            t.end_block();
        }
        self.tally = tally;
        self.k += 1;
        Ok(BlockOutput { y, e })
    }
}

impl AncController for Fdefslms {
    fn config(&self) -> &AdaptConfig {
        &self.cfg
    }

    fn process_block(&mut self, path: &SecondaryPath, u: &[f64], d: &[f64]) -> Result<BlockOutput> {
        self.step(path, u, d)
    }

    fn factor(&self) -> f64 {
        self.q
    }

    fn weights(&self) -> Result<Vec<f64>> {
        self.weights_time()
    }
}
