//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! scenario = nanc_chaotic
//! algos = fdefslms, fdfxlms
//! mu_w.fdfxlms = 1e-4
//! flip_block = 1000
//! ```
//!
//! `scenario` sets every default and may appear anywhere in the file; the
//! remaining keys are applied in file order on top of it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use fdefln::scenarios::{parse_signal_csv, InputSignal, ScenarioKind, ScenarioSpec};

use crate::algo::{AlgoKind, AlgoSpec};
use crate::BenchError;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct StepOverride {
    mu_w: Option<f64>,
    mu_q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    pub algos: Vec<AlgoKind>,
    overrides: BTreeMap<&'static str, StepOverride>,
    /// Moving-average length of the smoothed MSE curve, in blocks.
    pub window: usize,
    pub out: Option<PathBuf>,
    /// Step sizes of the EMSE sweep, `μw = μq = μ`.
    pub mu_grid: Vec<f64>,
    /// Sweep: blocks run before the steady-state window.
    pub burn_in: usize,
    /// Sweep: blocks in the steady-state window.
    pub steady_blocks: usize,
    /// Sweep: start from the plant's weights and factor.
    pub warm_start: bool,
    /// Timing: untimed blocks before measurement.
    pub warmup: usize,
    pub timed_blocks: usize,
}

fn default_algos(kind: ScenarioKind) -> Vec<AlgoKind> {
    use AlgoKind::*;
    match kind {
        ScenarioKind::IdentEfln => vec![Fdefln],
        ScenarioKind::Nsi => vec![Fdefln, Fdtfln, Fdpf],
        ScenarioKind::NaecSigmoid => vec![Fdefln, Fdtfln, Fdaf],
        ScenarioKind::NancPoly => vec![Fdefslms, Fdfslms, Fdfxlms],
        ScenarioKind::NancChaotic => vec![Fdefslms, Fdfxlms],
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, BenchError> {
    value
        .parse()
        .map_err(|_| BenchError::Usage(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_f64(key: &str, value: &str) -> Result<f64, BenchError> {
    let v: f64 = parse_num(key, value)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(BenchError::Usage(format!("`{key}` must be finite")))
    }
}

fn parse_optional<T: FromStr>(key: &str, value: &str) -> Result<Option<T>, BenchError> {
    if value.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

impl RunConfig {
    pub fn new(kind: ScenarioKind) -> Self {
        Self {
            scenario: ScenarioSpec::new(kind),
            algos: default_algos(kind),
            overrides: BTreeMap::new(),
            window: 1,
            out: None,
            mu_grid: vec![1e-4, 2e-4, 5e-4, 1e-3, 2e-3],
            burn_in: 400,
            steady_blocks: 50,
            warm_start: true,
            warmup: 20,
            timed_blocks: 200,
        }
    }

    /// Parses a configuration file's text. Relative `input_csv` paths are
    /// resolved against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, BenchError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                BenchError::Usage(format!("line {}: expected `key = value`", i + 1))
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let kind = match pairs.iter().rev().find(|(k, _)| k == "scenario") {
            Some((_, v)) => v.parse::<ScenarioKind>()?,
            None => return Err(BenchError::Usage("config has no `scenario`".into())),
        };
        let mut cfg = RunConfig::new(kind);
        for (k, v) in &pairs {
            if k == "scenario" {
                continue;
            }
            let v = match (k.as_str(), base) {
                ("input_csv", Some(dir)) if Path::new(v).is_relative() => {
                    dir.join(v).to_string_lossy().into_owned()
                }
                _ => v.clone(),
            };
            cfg.set(k, &v)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), BenchError> {
        let s = &mut self.scenario;
        match key {
            "block_len" => s.block_len = parse_num(key, value)?,
            "order" => s.order = parse_num(key, value)?,
            "mu_w" => s.mu_w = parse_f64(key, value)?,
            "mu_q" => s.mu_q = parse_f64(key, value)?,
            "q0" => s.q0 = parse_f64(key, value)?,
            "snr_db" => s.snr_db = parse_optional(key, value)?,
            "trials" => s.trials = parse_num(key, value)?,
            "blocks" => s.blocks = parse_num(key, value)?,
            "seed" => s.seed = parse_num(key, value)?,
            "flip_block" => s.flip_block = parse_optional(key, value)?,
            "input" => {
                s.input = match value {
                    "default" => InputSignal::Default,
                    "gaussian" => InputSignal::Gaussian,
                    _ => return Err(BenchError::Usage(format!("unknown input `{value}`"))),
                }
            }
            "input_csv" => self.set_input_csv(Path::new(value))?,
            "algos" => {
                self.algos = value
                    .split(',')
                    .map(str::trim)
                    .filter(|a| !a.is_empty())
                    .map(str::parse)
                    .collect::<Result<_, _>>()?
            }
            "window" => self.window = parse_num(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "mu_grid" => {
                self.mu_grid = value
                    .split(',')
                    .map(|v| parse_f64(key, v.trim()))
                    .collect::<Result<_, _>>()?
            }
            "burn_in" => self.burn_in = parse_num(key, value)?,
            "steady_blocks" => self.steady_blocks = parse_num(key, value)?,
            "warm_start" => self.warm_start = parse_num(key, value)?,
            "warmup" => self.warmup = parse_num(key, value)?,
            "timed_blocks" => self.timed_blocks = parse_num(key, value)?,
            _ => return self.set_override(key, value),
        }
        Ok(())
    }

    fn set_override(&mut self, key: &str, value: &str) -> Result<(), BenchError> {
        let (param, algo) = key
            .split_once('.')
            .ok_or_else(|| BenchError::Usage(format!("unknown key `{key}`")))?;
        let algo: AlgoKind = algo.parse()?;
        let mu = parse_f64(key, value)?;
        let entry = self.overrides.entry(algo.name()).or_default();
        match param {
            "mu_w" => entry.mu_w = Some(mu),
            "mu_q" => entry.mu_q = Some(mu),
            "mu" => {
                entry.mu_w = Some(mu);
                entry.mu_q = Some(mu);
            }
            _ => return Err(BenchError::Usage(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn set_input_csv(&mut self, path: &Path) -> Result<(), BenchError> {
        let text = std::fs::read_to_string(path)?;
        let samples = parse_signal_csv(&text)?;
        self.scenario.input = InputSignal::Samples(Arc::from(samples));
        Ok(())
    }

    /// Step sizes of `algo`: the scenario's, unless overridden.
    pub fn algo_spec(&self, algo: AlgoKind) -> AlgoSpec {
        let o = self.overrides.get(algo.name()).copied().unwrap_or_default();
        AlgoSpec {
            kind: algo,
            mu_w: o.mu_w.unwrap_or(self.scenario.mu_w),
            mu_q: o.mu_q.unwrap_or(self.scenario.mu_q),
        }
    }

    pub fn algo_specs(&self) -> Vec<AlgoSpec> {
        self.algos.iter().map(|&a| self.algo_spec(a)).collect()
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        self.scenario.validate()?;
        if self.algos.is_empty() {
            return Err(BenchError::Usage("no algorithm selected".into()));
        }
        if self.window == 0 {
            return Err(BenchError::Usage("window must be at least 1".into()));
        }
        for a in &self.algos {
            if a.is_anc() != self.scenario.kind.is_anc() {
                return Err(BenchError::Usage(format!(
                    "`{a}` does not apply to scenario `{}`",
                    self.scenario.kind
                )));
            }
        }
        for spec in self.algo_specs() {
            spec.adapt_config(
                self.scenario.block_len,
                self.scenario.order,
                self.scenario.q0,
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_sets_defaults_wherever_it_appears() {
        let cfg = RunConfig::parse("blocks = 7\nscenario = nsi # late\n", None).unwrap();
        assert_eq!(cfg.scenario.kind, ScenarioKind::Nsi);
        assert_eq!(cfg.scenario.block_len, 32);
        assert_eq!(cfg.scenario.blocks, 7);
    }

    #[test]
    fn overrides_apply_per_algorithm() {
        let text = "scenario = nanc_chaotic\nmu_w = 1e-3\nmu.fdfxlms = 5e-4\nmu_q.fdefslms = 2e-2";
        let cfg = RunConfig::parse(text, None).unwrap();
        let ef = cfg.algo_spec(AlgoKind::Fdefslms);
        let fx = cfg.algo_spec(AlgoKind::Fdfxlms);
        assert_eq!((ef.mu_w, ef.mu_q), (1e-3, 2e-2));
        assert_eq!((fx.mu_w, fx.mu_q), (5e-4, 5e-4));
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "blocks = 3",
            "scenario = nope",
            "scenario = nsi\nblocks = -1",
            "scenario = nsi\ncolour = red",
            "scenario = nsi\nmu_w = nan",
            "scenario = nsi\nmu_z.fdefln = 1",
            "scenario = nsi\njust text",
        ] {
            assert!(
                matches!(
                    RunConfig::parse(text, None),
                    Err(BenchError::Usage(_) | BenchError::Core(_))
                ),
                "{text}"
            );
        }
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::new(ScenarioKind::Nsi);
        assert!(cfg.validate().is_ok());
        cfg.algos = vec![AlgoKind::Fdefslms];
        assert!(cfg.validate().is_err());
        cfg.algos.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::new(ScenarioKind::Nsi);
        cfg.window = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn snr_and_flip_accept_none() {
        let cfg = RunConfig::parse(
            "scenario = ident_efln\nsnr_db = none\nflip_block = none",
            None,
        )
        .unwrap();
        assert_eq!(cfg.scenario.snr_db, None);
        assert_eq!(cfg.scenario.flip_block, None);
    }
}
