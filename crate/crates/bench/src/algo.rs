//! Algorithms selectable from the command line.

use std::fmt;
use std::str::FromStr;

use fdefln::nanc::AncController;
use fdefln::{
    AdaptConfig, BlockFilter, BlockOutput, EflnLms, Efslms, ExpansionConfig, ExpansionKind, Fdefln,
    Fdefslms, SecondaryPath,
};

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgoKind {
    /// Sample-wise EFLN LMS.
    Efln,
    Fdefln,
    /// Sample-wise trigonometric FLN LMS.
    Tfln,
    Fdtfln,
    /// Frequency-domain power (polynomial) filter.
    Fdpf,
    /// Frequency-domain block LMS.
    Fdaf,
    Efslms,
    Fdefslms,
    Fdfslms,
    Fdpfslms,
    Fdfxlms,
}

impl AlgoKind {
    pub const ALL: [AlgoKind; 11] = [
        AlgoKind::Efln,
        AlgoKind::Fdefln,
        AlgoKind::Tfln,
        AlgoKind::Fdtfln,
        AlgoKind::Fdpf,
        AlgoKind::Fdaf,
        AlgoKind::Efslms,
        AlgoKind::Fdefslms,
        AlgoKind::Fdfslms,
        AlgoKind::Fdpfslms,
        AlgoKind::Fdfxlms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgoKind::Efln => "efln",
            AlgoKind::Fdefln => "fdefln",
            AlgoKind::Tfln => "tfln",
            AlgoKind::Fdtfln => "fdtfln",
            AlgoKind::Fdpf => "fdpf",
            AlgoKind::Fdaf => "fdaf",
            AlgoKind::Efslms => "efslms",
            AlgoKind::Fdefslms => "fdefslms",
            AlgoKind::Fdfslms => "fdfslms",
            AlgoKind::Fdpfslms => "fdpfslms",
            AlgoKind::Fdfxlms => "fdfxlms",
        }
    }

    pub fn expansion(self) -> ExpansionKind {
        match self {
            AlgoKind::Efln | AlgoKind::Fdefln | AlgoKind::Efslms | AlgoKind::Fdefslms => {
                ExpansionKind::Efln
            }
            AlgoKind::Tfln | AlgoKind::Fdtfln | AlgoKind::Fdfslms => ExpansionKind::Tfln,
            AlgoKind::Fdpf | AlgoKind::Fdpfslms => ExpansionKind::Power,
            AlgoKind::Fdaf | AlgoKind::Fdfxlms => ExpansionKind::Linear,
        }
    }

    pub fn is_anc(self) -> bool {
        matches!(
            self,
            AlgoKind::Efslms
                | AlgoKind::Fdefslms
                | AlgoKind::Fdfslms
                | AlgoKind::Fdpfslms
                | AlgoKind::Fdfxlms
        )
    }

    pub fn is_frequency_domain(self) -> bool {
        !matches!(self, AlgoKind::Efln | AlgoKind::Tfln | AlgoKind::Efslms)
    }

    pub fn adapts_factor(self) -> bool {
        self.expansion() == ExpansionKind::Efln
    }
}

impl fmt::Display for AlgoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgoKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        AlgoKind::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| BenchError::Usage(format!("unknown algorithm `{s}`")))
    }
}

/// An algorithm with its step sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgoSpec {
    pub kind: AlgoKind,
    pub mu_w: f64,
    pub mu_q: f64,
}

impl AlgoSpec {
    pub fn adapt_config(
        &self,
        block_len: usize,
        order: usize,
        q0: f64,
    ) -> Result<AdaptConfig, BenchError> {
        let expansion = ExpansionConfig::new(self.kind.expansion(), order)?;
        let mu_q = if self.kind.adapts_factor() {
            self.mu_q
        } else {
            0.0
        };
        let q0 = if self.kind.adapts_factor() { q0 } else { 0.0 };
        let cfg = AdaptConfig::new(block_len, expansion, self.mu_w, mu_q).with_q0(q0);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn build(&self, block_len: usize, order: usize, q0: f64) -> Result<Engine, BenchError> {
        let cfg = self.adapt_config(block_len, order, q0)?;
        Ok(match self.kind {
            AlgoKind::Efln | AlgoKind::Tfln => Engine::Filter(Box::new(EflnLms::new(cfg)?)),
            AlgoKind::Fdefln | AlgoKind::Fdtfln | AlgoKind::Fdpf | AlgoKind::Fdaf => {
                Engine::Filter(Box::new(Fdefln::new(cfg)?))
            }
            AlgoKind::Efslms => Engine::Anc(Box::new(Efslms::new(cfg)?)),
            _ => Engine::Anc(Box::new(Fdefslms::new(cfg)?)),
        })
    }
}

/// A running filter or controller.
pub enum Engine {
    Filter(Box<dyn BlockFilter + Send>),
    Anc(Box<dyn AncController + Send>),
}

impl Engine {
    pub fn process(
        &mut self,
        path: Option<&SecondaryPath>,
        u: &[f64],
        d: &[f64],
    ) -> Result<BlockOutput, BenchError> {
        match (self, path) {
            (Engine::Filter(f), _) => Ok(f.process_block(u, d)?),
            (Engine::Anc(c), Some(p)) => Ok(c.process_block(p, u, d)?),
            (Engine::Anc(_), None) => Err(BenchError::Usage(
                "noise-control algorithms need a scenario with a secondary path".into(),
            )),
        }
    }

    pub fn factor(&self) -> f64 {
        match self {
            Engine::Filter(f) => f.factor(),
            Engine::Anc(c) => c.factor(),
        }
    }
}
