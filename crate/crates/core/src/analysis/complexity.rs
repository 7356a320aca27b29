//! Real-arithmetic operation counts per block of M samples.
//!
//! [`op_counts`] evaluates the closed forms for the four algorithms. The
//! time-domain rows are published per sample; here every phase is scaled
//! to a whole block so that phases always add up to the total.
//!
//! [`OpTally`] is the runtime counter the frequency-domain kernels feed when
//! instrumentation is enabled. It charges every primitive with the same cost
//! model the closed forms assume:
//!
//! | primitive                         | multiplications | additions   |
//! |-----------------------------------|-----------------|-------------|
//! | 2M-point transform (either way)   | 2M·log₂2M       | 2M·log₂2M   |
//! | 2M-bin complex product            | 8M              | 4M          |
//! | scaled spectrum accumulation      | 2M              | 4M          |
//! | M-sample vector add/subtract      | 0               | M           |
//! | M-sample inner product            | M               | M − 1       |
//! | scalar update `q += μ·x`          | 1               | 1           |

use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Efln,
    Fdefln,
    Efslms,
    Fdefslms,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Efln,
        Algorithm::Fdefln,
        Algorithm::Efslms,
        Algorithm::Fdefslms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Efln => "efln",
            Algorithm::Fdefln => "fdefln",
            Algorithm::Efslms => "efslms",
            Algorithm::Fdefslms => "fdefslms",
        }
    }

    pub fn is_frequency_domain(self) -> bool {
        matches!(self, Algorithm::Fdefln | Algorithm::Fdefslms)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Filtering,
    Error,
    WeightAdaptation,
    FactorAdaptation,
}

impl Phase {
    pub const ALL: [Phase; 4] = [
        Phase::Filtering,
        Phase::Error,
        Phase::WeightAdaptation,
        Phase::FactorAdaptation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Filtering => "filtering",
            Phase::Error => "error",
            Phase::WeightAdaptation => "weight_adaptation",
            Phase::FactorAdaptation => "factor_adaptation",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseCount {
    pub multiplications: u64,
    pub additions: u64,
}

impl PhaseCount {
    pub const fn new(multiplications: u64, additions: u64) -> Self {
        Self {
            multiplications,
            additions,
        }
    }
}

impl Add for PhaseCount {
    type Output = PhaseCount;

    fn add(self, rhs: PhaseCount) -> PhaseCount {
        PhaseCount::new(
            self.multiplications + rhs.multiplications,
            self.additions + rhs.additions,
        )
    }
}

impl AddAssign for PhaseCount {
    fn add_assign(&mut self, rhs: PhaseCount) {
        *self = *self + rhs;
    }
}

/// Operation counts per block, split by phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub filtering: PhaseCount,
    pub error: PhaseCount,
    pub weight_adaptation: PhaseCount,
    pub factor_adaptation: PhaseCount,
}

impl OpCounts {
    pub fn phase(&self, phase: Phase) -> PhaseCount {
        match phase {
            Phase::Filtering => self.filtering,
            Phase::Error => self.error,
            Phase::WeightAdaptation => self.weight_adaptation,
            Phase::FactorAdaptation => self.factor_adaptation,
        }
    }

    fn phase_mut(&mut self, phase: Phase) -> &mut PhaseCount {
        match phase {
            Phase::Filtering => &mut self.filtering,
            Phase::Error => &mut self.error,
            Phase::WeightAdaptation => &mut self.weight_adaptation,
            Phase::FactorAdaptation => &mut self.factor_adaptation,
        }
    }

    pub fn total(&self) -> PhaseCount {
        self.filtering + self.error + self.weight_adaptation + self.factor_adaptation
    }

    /// Phases whose counts differ, as `(phase, self, other)`.
    pub fn mismatches(&self, other: &OpCounts) -> Vec<(Phase, PhaseCount, PhaseCount)> {
        Phase::ALL
            .into_iter()
            .filter(|&p| self.phase(p) != other.phase(p))
            .map(|p| (p, self.phase(p), other.phase(p)))
            .collect()
    }
}

fn log2_exact(n: u64) -> Result<u64> {
    if n.is_power_of_two() {
        Ok(u64::from(n.trailing_zeros()))
    } else {
        Err(Error::NotPowerOfTwo(n as usize / 2))
    }
}

/// Closed-form counts for one block of `m` samples, expansion order `p` and
/// secondary path length `n`.
pub fn op_counts(algo: Algorithm, m: usize, p: usize, n: usize) -> Result<OpCounts> {
    if m == 0 || p == 0 {
        return Err(Error::Config("M and P must be positive".into()));
    }
    let (m, p, n) = (m as u64, p as u64, n as u64);
    let c = 2 * p + 1;
    let pc = PhaseCount::new;
    let counts = match algo {
        Algorithm::Efln => OpCounts {
            filtering: pc(m * m * c, m * (m * c - 1)),
            error: pc(0, m),
            weight_adaptation: pc(m * (m * c + 1), m * m * c),
            factor_adaptation: pc(m * (m * c + 2), m * m * c),
        },
        Algorithm::Efslms => OpCounts {
            filtering: pc(m * m * c, m * (m * c - 1)),
            error: pc(m * n, m * n),
            weight_adaptation: pc(m * (m * c * (n + 1) + 1), m * m * n * c),
            factor_adaptation: pc(m * (m * c * (n + 1) + 2), m * m * n * c),
        },
        Algorithm::Fdefln => {
            let l = log2_exact(2 * m)?;
            OpCounts {
                filtering: pc((4 * m * l + 8 * m) * c, (4 * m * l + 4 * m) * c + 2 * m * p),
                error: pc(2 * m * l, 2 * m * l + m),
                weight_adaptation: pc((4 * m * l + 10 * m) * c, (4 * m * l + 8 * m) * c),
                factor_adaptation: pc((4 * m * l + 8 * m) * c + m + 1, (4 * m * l + 5 * m) * c),
            }
        }
        Algorithm::Fdefslms => {
            let l = log2_exact(2 * m)?;
            OpCounts {
                filtering: pc((4 * m * l + 8 * m) * c, (4 * m * l + 4 * m) * c + 2 * m * p),
                error: pc(2 * m * l + m * n, 2 * m * l + m * n),
                weight_adaptation: pc((8 * m * l + 18 * m) * c, (8 * m * l + 12 * m) * c),
                factor_adaptation: pc((8 * m * l + 16 * m) * c + m + 1, (8 * m * l + 9 * m) * c),
            }
        }
    };
    Ok(counts)
}

/// Runtime operation counter fed by the frequency-domain kernels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpTally {
    m: u64,
    log2_len: u64,
    counts: OpCounts,
    blocks: u64,
}

impl OpTally {
    /// Counter for block length `m`; only radix-2 sizes have an exact model.
    pub fn new(m: usize) -> Result<Self> {
        let m = m as u64;
        Ok(Self {
            m,
            log2_len: log2_exact(2 * m)?,
            counts: OpCounts::default(),
            blocks: 0,
        })
    }

    pub fn counts(&self) -> OpCounts {
        self.counts
    }

    pub fn blocks(&self) -> u64 {
        self.blocks
    }

    /// Average counts per processed block.
    pub fn per_block(&self) -> OpCounts {
        let b = self.blocks.max(1);
        let avg = |pc: PhaseCount| PhaseCount::new(pc.multiplications / b, pc.additions / b);
        OpCounts {
            filtering: avg(self.counts.filtering),
            error: avg(self.counts.error),
            weight_adaptation: avg(self.counts.weight_adaptation),
            factor_adaptation: avg(self.counts.factor_adaptation),
        }
    }

    pub fn reset(&mut self) {
        self.counts = OpCounts::default();
        self.blocks = 0;
    }

    pub(crate) fn end_block(&mut self) {
        self.blocks += 1;
    }

    pub(crate) fn charge_raw(&mut self, phase: Phase, mul: u64, add: u64) {
        self.charge(phase, mul, add);
    }

    fn charge(&mut self, phase: Phase, mul: u64, add: u64) {
        *self.counts.phase_mut(phase) += PhaseCount::new(mul, add);
    }

    pub(crate) fn transform(&mut self, phase: Phase) {
        let cost = 2 * self.m * self.log2_len;
        self.charge(phase, cost, cost);
    }

    pub(crate) fn spectral_product(&mut self, phase: Phase) {
        self.charge(phase, 8 * self.m, 4 * self.m);
    }

    pub(crate) fn scale_accumulate(&mut self, phase: Phase) {
        self.charge(phase, 2 * self.m, 4 * self.m);
    }

    pub(crate) fn vector_add(&mut self, phase: Phase, count: u64) {
        self.charge(phase, 0, count * self.m);
    }

    pub(crate) fn inner_product(&mut self, phase: Phase) {
        self.charge(phase, self.m, self.m - 1);
    }

    pub(crate) fn scalar_update(&mut self, phase: Phase) {
        self.charge(phase, 1, 1);
    }
}
