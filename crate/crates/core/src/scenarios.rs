//! Signal generators, plant models and path fixtures for the experiments.
//!
//! Every generator is a pure function of its seed and parameters. Trials
//! draw from `SeededRng::for_trial(seed, trial)`; fixtures that must stay the
//! same across trials (the identification weights, the room response) are
//! drawn from the scenario seed alone.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::dsp::{fir_filter_direct, FirCoefficients, SeededRng};
use crate::error::{Error, Result};
use crate::expansion::efln_sample;
use crate::nanc::{OutputNonlinearity, SecondaryPath};

/// Exponential factor of the matched identification plant.
pub const IDENT_FACTOR: f64 = -0.4;

/// Saturation of the chaotic-noise secondary path, `3.3·tanh(0.3·x)`.
pub const CHAOTIC_SATURATION: OutputNonlinearity = OutputNonlinearity::Tanh {
    gain: 3.3,
    slope: 0.3,
};

const ENGINE_PRIMARY: [(usize, f64); 7] = [
    (9, 0.8),
    (10, 0.6),
    (11, -0.2),
    (12, -0.5),
    (13, -0.1),
    (14, 0.4),
    (15, -0.05),
];

const ENGINE_SECONDARY: [(usize, f64); 8] = [
    (5, 1.0),
    (6, 2.5),
    (7, 1.76),
    (8, 0.15),
    (9, -0.4825),
    (10, -0.18625),
    (11, -0.005),
    (12, -0.001875),
];

const CHAOTIC_PRIMARY: [(usize, f64); 3] = [(5, 1.0), (6, 0.3), (7, 0.2)];

const CHAOTIC_SECONDARY: [(usize, f64); 3] = [(2, 1.0), (3, 1.5), (4, -1.0)];

fn taps_from_delays(delays: &[(usize, f64)]) -> Vec<f64> {
    let len = delays.iter().map(|(d, _)| d + 1).max().unwrap_or(1);
    let mut taps = vec![0.0; len];
    for &(d, v) in delays {
        taps[d] = v;
    }
    taps
}

/// Primary and secondary impulse responses, indexed by delay.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFixture {
    pub primary: Vec<f64>,
    pub secondary: Vec<f64>,
}

/// Named tap vectors: `engine_P`, `engine_S`, `chaotic_P`, `chaotic_S`.
pub fn fixture_taps(name: &str) -> Result<Vec<f64>> {
    let delays: &[(usize, f64)] = match name {
        "engine_P" => &ENGINE_PRIMARY,
        "engine_S" => &ENGINE_SECONDARY,
        "chaotic_P" => &CHAOTIC_PRIMARY,
        "chaotic_S" => &CHAOTIC_SECONDARY,
        _ => return Err(Error::UnknownFixture(name.to_string())),
    };
    Ok(taps_from_delays(delays))
}

/// Path pair by scenario name: `engine` or `chaotic`.
pub fn path_fixture(name: &str) -> Result<PathFixture> {
    match name {
        "engine" | "chaotic" => Ok(PathFixture {
            primary: fixture_taps(&format!("{name}_P"))?,
            secondary: fixture_taps(&format!("{name}_S"))?,
        }),
        _ => Err(Error::UnknownFixture(name.to_string())),
    }
}

pub fn gen_uniform(rng: &mut SeededRng, lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(Error::Config(format!("empty range [{lo}, {hi})")));
    }
    Ok(rng.uniform_vec(lo, hi, count))
}

pub fn mean_square(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
    }
}

/// Zero-mean Gaussian noise with variance `power(signal) / 10^(snr/10)`.
pub fn gen_awgn_for_snr(signal: &[f64], snr_db: f64, rng: &mut SeededRng) -> Result<Vec<f64>> {
    let power = mean_square(signal);
    if power <= 0.0 {
        return Err(Error::ZeroPower);
    }
    if !snr_db.is_finite() {
        return Err(Error::Config(format!("SNR must be finite, got {snr_db}")));
    }
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    Ok((0..signal.len()).map(|_| sigma * rng.gaussian()).collect())
}

/// Raw logistic map `u(n+1) = 4u(n)(1 − u(n))`, `u(0) = 0.9`; returns
/// `u(1), …, u(count)`.
pub fn logistic_raw(count: usize) -> Vec<f64> {
    let mut u = 0.9;
    (0..count)
        .map(|_| {
            u = 4.0 * u * (1.0 - u);
            u
        })
        .collect()
}

/// Logistic chaotic noise scaled to unit mean square.
pub fn gen_logistic(count: usize) -> Vec<f64> {
    let raw = logistic_raw(count);
    let rms = mean_square(&raw).sqrt();
    if rms > 0.0 {
        raw.iter().map(|v| v / rms).collect()
    } else {
        raw
    }
}

/// `0.6 sin³(πu(n)) − 2/(u³(n) + 2) − 0.1 cos(4πu(n−4)) + 1.125`.
pub fn nsi_plant(u: &[f64]) -> Vec<f64> {
    (0..u.len())
        .map(|n| {
            let x = u[n];
            let lag = if n >= 4 { u[n - 4] } else { 0.0 };
            0.6 * (PI * x).sin().powi(3) - 2.0 / (x.powi(3) + 2.0) - 0.1 * (4.0 * PI * lag).cos()
                + 1.125
        })
        .collect()
}

/// Asymmetric sigmoid, `β/(1 + e^{−αγ}) − β/2` with β = 2 and α = 4 for
/// γ ≥ 0, α = 0.5 otherwise.
pub fn sigmoid_distortion(gamma: f64) -> f64 {
    let beta = 2.0;
    let alpha = if gamma >= 0.0 { 4.0 } else { 0.5 };
    beta / (1.0 + (-alpha * gamma).exp()) - 0.5 * beta
}

/// Loudspeaker model: sigmoid of `γ = 1.5u − 0.3u²`.
pub fn loudspeaker(u: &[f64]) -> Vec<f64> {
    u.iter()
        .map(|&x| sigmoid_distortion(1.5 * x - 0.3 * x * x))
        .collect()
}

/// `d(n) = û(n−2) + 0.8û²(n−2) − 0.4û³(n−2) + û⁴(n−1)û(n−2)`.
pub fn nanc_poly_primary(u_hat: &[f64]) -> Vec<f64> {
    let at = |n: usize, lag: usize| if n >= lag { u_hat[n - lag] } else { 0.0 };
    (0..u_hat.len())
        .map(|n| {
            let a = at(n, 2);
            let b = at(n, 1);
            a + 0.8 * a * a - 0.4 * a.powi(3) + b.powi(4) * a
        })
        .collect()
}

pub fn tanh_secondary(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| CHAOTIC_SATURATION.apply(v)).collect()
}

/// Output of an EFLN system with fixed factor `q` and channel-major weights
/// `w` (M taps per channel). Expanded samples before the stream start are
/// zero.
pub fn ident_efln_plant(u: &[f64], w: &[f64], q: f64, order: usize) -> Result<Vec<f64>> {
    let c = 2 * order + 1;
    if order == 0 || w.is_empty() || w.len() % c != 0 {
        return Err(Error::LengthMismatch {
            context: "plant weights",
            expected: c * (w.len() / c).max(1),
            actual: w.len(),
        });
    }
    let m = w.len() / c;
    let mut channels = vec![vec![0.0; u.len()]; c];
    let mut scratch = vec![0.0; c];
    for (n, &x) in u.iter().enumerate() {
        efln_sample(x, q, order, &mut scratch);
        for (ch, v) in channels.iter_mut().zip(&scratch) {
            ch[n] = *v;
        }
    }
    let mut y = vec![0.0; u.len()];
    for (i, ch) in channels.iter().enumerate() {
        let taps = FirCoefficients::new(w[i * m..(i + 1) * m].to_vec())?;
        for (a, b) in y.iter_mut().zip(fir_filter_direct(ch, &taps)) {
            *a += b;
        }
    }
    Ok(y)
}

/// Decaying random impulse response: `N(0,1)·e^{−n/τ}` scaled to unit norm.
pub fn decaying_response(rng: &mut SeededRng, len: usize, tau: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..len)
        .map(|n| rng.gaussian() * (-(n as f64) / tau).exp())
        .collect();
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        raw.iter().map(|v| v / norm).collect()
    } else {
        raw
    }
}

/// Identification weights: every channel carries a decaying response, the
/// linear channel at full scale and the functional channels at half scale.
pub fn ident_fixture_weights(seed: u64, block_len: usize, order: usize) -> Vec<f64> {
    let mut rng = SeededRng::new(seed ^ 0x5EED_F1C5);
    let tau = (block_len as f64 / 6.0).max(1.0);
    let mut w = Vec::with_capacity(block_len * (2 * order + 1));
    for i in 0..2 * order + 1 {
        let scale = if i == 0 { 1.0 } else { 0.5 };
        w.extend(
            decaying_response(&mut rng, block_len, tau)
                .iter()
                .map(|v| scale * v),
        );
    }
    w
}

/// Two-pole resonator, `x(n) = 2r cos θ · x(n−1) − r² x(n−2) + v(n)`.
fn resonate(input: &[f64], freq: f64, radius: f64) -> Vec<f64> {
    let a1 = 2.0 * radius * (2.0 * PI * freq).cos();
    let a2 = -radius * radius;
    let (mut x1, mut x2) = (0.0, 0.0);
    input
        .iter()
        .map(|&v| {
            let x = a1 * x1 + a2 * x2 + v;
            x2 = x1;
            x1 = x;
            x
        })
        .collect()
}

fn scale_to_rms(x: &mut [f64], rms: f64) {
    let cur = mean_square(x).sqrt();
    if cur > 0.0 {
        for v in x.iter_mut() {
            *v *= rms / cur;
        }
    }
}

/// Engine-like noise: white noise through resonators at three harmonics of
/// a firing frequency (normalized frequency 0.0125), RMS 0.5.
pub fn engine_noise(rng: &mut SeededRng, count: usize) -> Vec<f64> {
    let white = rng.gaussian_vec(count);
    let mut out = vec![0.0; count];
    for (h, gain) in [(1.0, 1.0), (2.0, 0.6), (3.0, 0.3)] {
        for (o, v) in out.iter_mut().zip(resonate(&white, 0.0125 * h, 0.995)) {
            *o += gain * v;
        }
    }
    for (o, v) in out.iter_mut().zip(&white) {
        *o += 0.5 * v;
    }
    scale_to_rms(&mut out, 0.5);
    out
}

/// Speech-like signal: AR(2) coloured noise gated into bursts of random
/// length, clipped into (−1, 1).
pub fn speech_like(rng: &mut SeededRng, count: usize) -> Vec<f64> {
    let white = rng.gaussian_vec(count);
    let mut voiced = resonate(&white, 0.06, 0.95);
    scale_to_rms(&mut voiced, 0.3);
    let mut out = vec![0.0; count];
    let mut n = 0;
    while n < count {
        let on = 400 + (rng.uniform(0.0, 1.0) * 1600.0) as usize;
        let off = 100 + (rng.uniform(0.0, 1.0) * 600.0) as usize;
        let end = (n + on).min(count);
        for (k, idx) in (n..end).enumerate() {
            let env = (PI * k as f64 / on as f64).sin();
            out[idx] = (voiced[idx] * env).clamp(-0.999, 0.999);
        }
        n = end + off;
    }
    out
}

/// 512-tap room response with an exponentially decaying envelope.
pub fn room_response(rng: &mut SeededRng) -> Vec<f64> {
    decaying_response(rng, 512, 24.0)
}

/// Signal one value per line; a non-numeric first line is taken as header.
pub fn parse_signal_csv(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            _ if i == 0 => continue,
            _ => {
                return Err(Error::Config(format!(
                    "line {}: `{field}` is not a finite number",
                    i + 1
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Config("signal file holds no samples".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    IdentEfln,
    Nsi,
    NaecSigmoid,
    NancPoly,
    NancChaotic,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::IdentEfln,
        ScenarioKind::Nsi,
        ScenarioKind::NaecSigmoid,
        ScenarioKind::NancPoly,
        ScenarioKind::NancChaotic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::IdentEfln => "ident_efln",
            ScenarioKind::Nsi => "nsi",
            ScenarioKind::NaecSigmoid => "naec_sigmoid",
            ScenarioKind::NancPoly => "nanc_poly",
            ScenarioKind::NancChaotic => "nanc_chaotic",
        }
    }

    pub fn is_anc(self) -> bool {
        matches!(self, ScenarioKind::NancPoly | ScenarioKind::NancChaotic)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))
    }
}

/// Reference signal used by a scenario.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InputSignal {
    /// The scenario's own generator.
    #[default]
    Default,
    /// Zero-mean, unit-variance Gaussian noise.
    Gaussian,
    /// User-supplied samples, repeated cyclically when shorter than a run.
    Samples(Arc<[f64]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub block_len: usize,
    pub order: usize,
    pub mu_w: f64,
    pub mu_q: f64,
    pub q0: f64,
    /// Measurement noise added to the desired signal; `None` for none.
    pub snr_db: Option<f64>,
    pub trials: usize,
    pub blocks: usize,
    pub seed: u64,
    /// Block at which the secondary path changes sign.
    pub flip_block: Option<usize>,
    pub input: InputSignal,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind) -> Self {
        let (block_len, order, mu_w, mu_q, snr_db) = match kind {
            ScenarioKind::IdentEfln => (64, 2, 2e-4, 5e-4, Some(40.0)),
            ScenarioKind::Nsi => (32, 2, 3e-3, 5e-2, Some(40.0)),
            ScenarioKind::NaecSigmoid => (64, 2, 5e-5, 9e-2, Some(40.0)),
            ScenarioKind::NancPoly => (64, 2, 1e-5, 1e-4, None),
            ScenarioKind::NancChaotic => (64, 2, 2e-5, 4e-4, None),
        };
        Self {
            kind,
            block_len,
            order,
            mu_w,
            mu_q,
            q0: 0.0,
            snr_db,
            trials: 1,
            blocks: 500,
            seed: 1,
            flip_block: None,
            input: InputSignal::Default,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_len == 0 || self.order == 0 || self.trials == 0 || self.blocks == 0 {
            return Err(Error::Config(
                "block length, order, trials and blocks must be positive".into(),
            ));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(Error::Config(format!("SNR must be finite, got {snr}")));
            }
        }
        if let Some(fixture) = self.path_fixture() {
            if fixture.secondary.len() > self.block_len {
                return Err(Error::Config(format!(
                    "secondary path has {} taps, block length is {}",
                    fixture.secondary.len(),
                    self.block_len
                )));
            }
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        self.blocks * self.block_len
    }

    fn path_fixture(&self) -> Option<PathFixture> {
        match self.kind {
            ScenarioKind::NancPoly => path_fixture("engine").ok(),
            ScenarioKind::NancChaotic => path_fixture("chaotic").ok(),
            _ => None,
        }
    }

    /// Secondary path seen by the controller, if the scenario has one.
    pub fn secondary_path(&self) -> Result<Option<SecondaryPath>> {
        let Some(fixture) = self.path_fixture() else {
            return Ok(None);
        };
        let path = SecondaryPath::new(FirCoefficients::new(fixture.secondary)?, self.block_len)?;
        Ok(Some(match self.kind {
            ScenarioKind::NancChaotic => path.with_nonlinearity(CHAOTIC_SATURATION),
            _ => path,
        }))
    }

    /// Weights of the matched identification plant.
    pub fn fixture_weights(&self) -> Vec<f64> {
        ident_fixture_weights(self.seed, self.block_len, self.order)
    }

    fn reference(&self, rng: &mut SeededRng, count: usize) -> Result<Vec<f64>> {
        match &self.input {
            InputSignal::Gaussian => Ok(rng.gaussian_vec(count)),
            InputSignal::Samples(s) if !s.is_empty() => {
                Ok(s.iter().copied().cycle().take(count).collect())
            }
            InputSignal::Samples(_) => Err(Error::Config("empty input signal".into())),
            InputSignal::Default => Ok(match self.kind {
                ScenarioKind::IdentEfln => gen_uniform(rng, -1.0, 1.0, count)?,
                ScenarioKind::Nsi => gen_uniform(rng, -0.5, 0.5, count)?,
                ScenarioKind::NaecSigmoid => speech_like(rng, count),
                ScenarioKind::NancPoly => engine_noise(rng, count),
                ScenarioKind::NancChaotic => gen_logistic(count),
            }),
        }
    }

    /// Reference, desired and noiseless desired signals of one trial.
    pub fn trial_signals(&self, trial: usize) -> Result<TrialSignals> {
        self.validate()?;
        let count = self.samples();
        let mut rng = SeededRng::for_trial(self.seed, trial);
        let u = self.reference(&mut rng, count)?;
        let clean = match self.kind {
            ScenarioKind::IdentEfln => {
                ident_efln_plant(&u, &self.fixture_weights(), IDENT_FACTOR, self.order)?
            }
            ScenarioKind::Nsi => nsi_plant(&u),
            ScenarioKind::NaecSigmoid => {
                let room = room_response(&mut SeededRng::new(self.seed ^ 0x0000_D00B));
                fir_filter_direct(&loudspeaker(&u), &FirCoefficients::new(room)?)
            }
            ScenarioKind::NancPoly => {
                let p = FirCoefficients::new(fixture_taps("engine_P")?)?;
                nanc_poly_primary(&fir_filter_direct(&u, &p))
            }
            ScenarioKind::NancChaotic => {
                let p = FirCoefficients::new(fixture_taps("chaotic_P")?)?;
                fir_filter_direct(&u, &p)
            }
        };
        let d = match self.snr_db {
            Some(snr) => {
                let noise = gen_awgn_for_snr(&clean, snr, &mut rng)?;
                clean.iter().zip(&noise).map(|(c, v)| c + v).collect()
            }
            None => clean.clone(),
        };
        let noise_var = match self.snr_db {
            Some(snr) => mean_square(&clean) / 10f64.powf(snr / 10.0),
            None => 0.0,
        };
        Ok(TrialSignals {
            u,
            d,
            clean,
            noise_var,
        })
    }
}

/// One trial's streams, all `blocks · M` samples long.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSignals {
    pub u: Vec<f64>,
    pub d: Vec<f64>,
    pub clean: Vec<f64>,
    /// Variance of the noise added to `clean`.
    pub noise_var: f64,
}
