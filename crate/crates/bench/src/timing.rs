//! Wall-clock cost per block, for relative comparisons only.

use std::time::Instant;

use fdefln::scenarios::{gen_uniform, ScenarioKind};
use fdefln::{SecondaryPath, SeededRng};

use crate::algo::AlgoSpec;
use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingStats {
    pub median_us: f64,
    pub q1_us: f64,
    pub q3_us: f64,
    pub blocks: usize,
}

impl TimingStats {
    pub fn iqr_us(&self) -> f64 {
        self.q3_us - self.q1_us
    }

    /// Median, lower and upper quartile of the samples (linear interpolation).
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let at = |p: f64| {
            let pos = p * (s.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            s[lo] + (s[hi] - s[lo]) * (pos - lo as f64)
        };
        Some(Self {
            median_us: at(0.5),
            q1_us: at(0.25),
            q3_us: at(0.75),
            blocks: s.len(),
        })
    }
}

/// Times `timed_blocks` blocks of `spec` after `warmup` untimed blocks, on
/// the calling thread. Inputs are uniform on (−1, 1); noise-control
/// algorithms run through the chaotic scenario's secondary path.
pub fn time_per_block(
    spec: &AlgoSpec,
    block_len: usize,
    order: usize,
    warmup: usize,
    timed_blocks: usize,
    seed: u64,
) -> Result<TimingStats, BenchError> {
    if timed_blocks == 0 {
        return Err(BenchError::Usage(
            "at least one timed block is needed".into(),
        ));
    }
    let mut engine = spec.build(block_len, order, 0.0)?;
    let path: Option<SecondaryPath> = if spec.kind.is_anc() {
        let mut s = fdefln::scenarios::ScenarioSpec::new(ScenarioKind::NancChaotic);
        s.block_len = block_len;
        s.secondary_path()?
    } else {
        None
    };
    let mut rng = SeededRng::new(seed);
    let total = warmup + timed_blocks;
    let u = gen_uniform(&mut rng, -1.0, 1.0, total * block_len)?;
    let d = gen_uniform(&mut rng, -0.1, 0.1, total * block_len)?;
    let mut samples = Vec::with_capacity(timed_blocks);
    for k in 0..total {
        let r = k * block_len..(k + 1) * block_len;
        let start = Instant::now();
        engine.process(path.as_ref(), &u[r.clone()], &d[r])?;
        let us = start.elapsed().as_secs_f64() * 1e6;
        if k >= warmup {
            samples.push(us);
        }
    }
    Ok(TimingStats::from_samples(&samples).expect("timed blocks are non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::AlgoKind;

    #[test]
    fn quartiles() {
        let s = TimingStats::from_samples(&[5.0, 1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!(
            (s.q1_us, s.median_us, s.q3_us, s.blocks),
            (2.0, 3.0, 4.0, 5)
        );
        assert_eq!(s.iqr_us(), 2.0);
        assert!(TimingStats::from_samples(&[]).is_none());
    }

    #[test]
    fn warmup_is_excluded() {
        let spec = AlgoSpec {
            kind: AlgoKind::Fdefln,
            mu_w: 1e-3,
            mu_q: 1e-3,
        };
        let s = time_per_block(&spec, 16, 1, 7, 11, 3).unwrap();
        assert_eq!(s.blocks, 11);
        assert!(s.q1_us <= s.median_us && s.median_us <= s.q3_us);
        assert!(time_per_block(&spec, 16, 1, 7, 0, 3).is_err());
    }
}
