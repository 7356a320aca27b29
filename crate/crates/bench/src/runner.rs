//! Trial execution and per-block metrics.

use std::time::Instant;

use rayon::prelude::*;

use fdefln::scenarios::{ScenarioKind, TrialSignals};
use fdefln::SecondaryPath;

use crate::algo::AlgoSpec;
use crate::config::RunConfig;
use crate::metrics::{erle_db, mean_square, moving_average, power_db, MetricsRecord};
use crate::BenchError;

/// One trial of one algorithm.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrialCurve {
    /// Mean-square error of every completed block.
    pub mse: Vec<f64>,
    pub erle_db: Vec<Option<f64>>,
    pub q: Vec<Option<f64>>,
    pub us_per_block: Vec<f64>,
    /// Block at which the filter diverged.
    pub diverged_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgoCurves {
    pub spec: AlgoSpec,
    pub trials: Vec<TrialCurve>,
}

impl AlgoCurves {
    /// Ensemble-mean MSE per block over the trials that reached the block.
    pub fn ensemble_mse(&self) -> Vec<f64> {
        let len = self.trials.iter().map(|t| t.mse.len()).max().unwrap_or(0);
        (0..len)
            .map(|k| {
                let vals: Vec<f64> = self
                    .trials
                    .iter()
                    .filter_map(|t| t.mse.get(k).copied())
                    .collect();
                vals.iter().sum::<f64>() / vals.len() as f64
            })
            .collect()
    }

    /// Ensemble-mean MSE averaged over blocks `range`, in dB.
    pub fn mean_mse_db(&self, range: std::ops::Range<usize>) -> f64 {
        let ens = self.ensemble_mse();
        let end = range.end.min(ens.len());
        let start = range.start.min(end);
        if start == end {
            return f64::NAN;
        }
        power_db(ens[start..end].iter().sum::<f64>() / (end - start) as f64)
    }

    pub fn diverged(&self) -> Option<(usize, usize)> {
        self.trials
            .iter()
            .enumerate()
            .find_map(|(i, t)| t.diverged_at.map(|b| (i, b)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub curves: Vec<AlgoCurves>,
    pub window: usize,
}

impl RunReport {
    /// First divergence, as `(algo, trial, block)`.
    pub fn divergence(&self) -> Option<(String, usize, usize)> {
        self.curves.iter().find_map(|c| {
            c.diverged()
                .map(|(t, b)| (c.spec.kind.name().to_string(), t, b))
        })
    }

    pub fn curves_for(&self, algo: crate::AlgoKind) -> Option<&AlgoCurves> {
        self.curves.iter().find(|c| c.spec.kind == algo)
    }

    /// One record per (algorithm, trial, block); a diverged trial ends with a
    /// row whose `mse_db` is `inf`.
    pub fn records(&self) -> Vec<MetricsRecord> {
        let mut out = Vec::new();
        for c in &self.curves {
            let smoothed: Vec<f64> = moving_average(&c.ensemble_mse(), self.window)
                .into_iter()
                .map(power_db)
                .collect();
            for (trial, t) in c.trials.iter().enumerate() {
                for (k, (&mse, &smooth)) in t.mse.iter().zip(&smoothed).enumerate() {
                    out.push(MetricsRecord {
                        algo: c.spec.kind.name().to_string(),
                        trial,
                        block: k,
                        mse_db: power_db(mse),
                        smoothed_mse_db: Some(smooth),
                        erle_db: t.erle_db[k],
                        q: t.q[k],
                        us_per_block: Some(t.us_per_block[k]),
                    });
                }
                if let Some(block) = t.diverged_at {
                    out.push(MetricsRecord {
                        algo: c.spec.kind.name().to_string(),
                        trial,
                        block,
                        mse_db: f64::INFINITY,
                        smoothed_mse_db: None,
                        erle_db: None,
                        q: None,
                        us_per_block: None,
                    });
                }
            }
        }
        out
    }
}

/// Runs one trial of `spec` on pre-generated signals.
pub fn run_trial(
    cfg: &RunConfig,
    spec: &AlgoSpec,
    signals: &TrialSignals,
    path: Option<&SecondaryPath>,
) -> Result<TrialCurve, BenchError> {
    let s = &cfg.scenario;
    let m = s.block_len;
    let mut engine = spec.build(m, s.order, s.q0)?;
    let flipped = path.map(SecondaryPath::flipped);
    let naec = s.kind == ScenarioKind::NaecSigmoid;
    let mut curve = TrialCurve::default();
    for k in 0..s.blocks {
        let u = &signals.u[k * m..(k + 1) * m];
        let d = &signals.d[k * m..(k + 1) * m];
        let active = match (s.flip_block, &flipped) {
            (Some(f), Some(p)) if k >= f => Some(p),
            _ => path,
        };
        let start = Instant::now();
        let out = match engine.process(active, u, d) {
            Ok(out) => out,
            Err(BenchError::Core(fdefln::Error::Divergence { .. })) => {
                curve.diverged_at = Some(k);
                break;
            }
            Err(e) => return Err(e),
        };
        let us = start.elapsed().as_secs_f64() * 1e6;
        curve.mse.push(mean_square(&out.e));
        curve.erle_db.push(naec.then(|| erle_db(d, &out.e)));
        curve
            .q
            .push(spec.kind.adapts_factor().then(|| engine.factor()));
        curve.us_per_block.push(us);
    }
    Ok(curve)
}

/// Runs every selected algorithm over `trials` independent trials. Trials of
/// one algorithm run concurrently and are collected in trial order.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunReport, BenchError> {
    cfg.validate()?;
    let path = cfg.scenario.secondary_path()?;
    let signals: Vec<TrialSignals> = (0..cfg.scenario.trials)
        .into_par_iter()
        .map(|t| cfg.scenario.trial_signals(t))
        .collect::<Result<_, _>>()?;
    let mut curves = Vec::new();
    for spec in cfg.algo_specs() {
        let trials = signals
            .par_iter()
            .map(|sig| run_trial(cfg, &spec, sig, path.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        curves.push(AlgoCurves { spec, trials });
    }
    Ok(RunReport {
        curves,
        window: cfg.window,
    })
}
