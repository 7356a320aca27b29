//! Simulated against theoretical steady-state EMSE over a step-size grid.

use rayon::prelude::*;

use fdefln::analysis::{simulated_emse, theoretical_emse, to_db, MomentAccumulator};
use fdefln::scenarios::{ScenarioKind, IDENT_FACTOR};
use fdefln::{AdaptConfig, ExpansionConfig, Fdefln};

use crate::config::RunConfig;
use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub mu: f64,
    pub simulated_db: f64,
    /// `None` when the step size violates the stability condition.
    pub theoretical_db: Option<f64>,
    pub unstable: bool,
}

impl SweepRow {
    pub fn gap_db(&self) -> Option<f64> {
        self.theoretical_db.map(|t| (self.simulated_db - t).abs())
    }
}

struct TrialSweep {
    moments: MomentAccumulator,
    sq_err: f64,
    samples: usize,
    noise_var: f64,
}

fn sweep_trial(cfg: &RunConfig, mu: f64, trial: usize) -> Result<Option<TrialSweep>, BenchError> {
    let mut scenario = cfg.scenario.clone();
    scenario.blocks = cfg.burn_in + cfg.steady_blocks;
    let m = scenario.block_len;
    let sig = scenario.trial_signals(trial)?;
    let acfg =
        AdaptConfig::new(m, ExpansionConfig::efln(scenario.order)?, mu, mu).with_q0(scenario.q0);
    let mut filter = Fdefln::new(acfg)?;
    if cfg.warm_start {
        filter.set_weights(&scenario.fixture_weights())?;
        filter.set_factor(IDENT_FACTOR);
    }
    let mut moments = MomentAccumulator::new(m);
    let mut sq_err = 0.0;
    let mut samples = 0;
    for k in 0..scenario.blocks {
        let range = k * m..(k + 1) * m;
        let step = filter.process_traced(&sig.u[range.clone()], &sig.d[range.clone()]);
        let (out, trace) = match step {
            Ok(v) => v,
            Err(fdefln::Error::Divergence { .. }) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        if k >= cfg.burn_in {
            moments.push_block(&trace.g_history, &trace.z())?;
            sq_err += simulated_emse(&sig.clean[range], &out.y) * m as f64;
            samples += m;
        }
    }
    Ok(Some(TrialSweep {
        moments,
        sq_err,
        samples,
        noise_var: sig.noise_var,
    }))
}

/// One row per grid value of `cfg.mu_grid`, with `μw = μq = μ`. Moments and
/// the simulated EMSE come from the last `steady_blocks` blocks of every
/// trial.
pub fn emse_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>, BenchError> {
    if cfg.scenario.kind != ScenarioKind::IdentEfln {
        return Err(BenchError::Usage(
            "the EMSE sweep needs the ident_efln scenario".into(),
        ));
    }
    if cfg.mu_grid.is_empty() || cfg.steady_blocks == 0 {
        return Err(BenchError::Usage(
            "the EMSE sweep needs a step-size grid and steady blocks".into(),
        ));
    }
    cfg.scenario.validate()?;
    let m = cfg.scenario.block_len;
    let mut rows = Vec::with_capacity(cfg.mu_grid.len());
    for &mu in &cfg.mu_grid {
        let trials = (0..cfg.scenario.trials)
            .into_par_iter()
            .map(|t| sweep_trial(cfg, mu, t))
            .collect::<Result<Vec<_>, _>>()?;
        let Some(trials) = trials.into_iter().collect::<Option<Vec<_>>>() else {
            rows.push(SweepRow {
                mu,
                simulated_db: f64::INFINITY,
                theoretical_db: None,
                unstable: true,
            });
            continue;
        };
        let mut moments = MomentAccumulator::new(m);
        let (mut sq_err, mut samples, mut noise_var) = (0.0, 0, 0.0);
        for t in &trials {
            moments.merge(&t.moments);
            sq_err += t.sq_err;
            samples += t.samples;
            noise_var += t.noise_var;
        }
        noise_var /= trials.len() as f64;
        let est = moments.estimate(noise_var, cfg.steady_blocks * m)?;
        let theory = theoretical_emse(mu, mu, &est).ok().map(to_db);
        rows.push(SweepRow {
            mu,
            simulated_db: to_db(sq_err / samples as f64),
            theoretical_db: theory,
            unstable: theory.is_none(),
        });
    }
    Ok(rows)
}
