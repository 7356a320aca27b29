//! Closed-form and instrumented operation counts.

use fdefln::analysis::{op_counts, Algorithm, OpCounts};
use fdefln::scenarios::decaying_response;
use fdefln::{
    AdaptConfig, ExpansionConfig, Fdefln, Fdefslms, FirCoefficients, SecondaryPath, SeededRng,
};

use crate::BenchError;

/// Per-block counts measured by running `blocks` blocks of a
/// frequency-domain algorithm with counting enabled. `None` for the
/// time-domain algorithms, which are not instrumented.
pub fn instrumented_counts(
    algo: Algorithm,
    m: usize,
    p: usize,
    n: usize,
    blocks: usize,
) -> Result<Option<OpCounts>, BenchError> {
    let cfg = AdaptConfig::new(m, ExpansionConfig::efln(p)?, 1e-4, 1e-4);
    let mut rng = SeededRng::new(7);
    let u = rng.uniform_vec(-1.0, 1.0, m * blocks);
    let d = rng.uniform_vec(-1.0, 1.0, m * blocks);
    let counts = match algo {
        Algorithm::Fdefln => {
            let mut f = Fdefln::new(cfg)?;
            f.enable_counting()?;
            for k in 0..blocks {
                f.process(&u[k * m..(k + 1) * m], &d[k * m..(k + 1) * m])?;
            }
            f.tally().map(|t| t.per_block())
        }
        Algorithm::Fdefslms => {
            let taps = decaying_response(&mut rng, n.max(1), (n as f64 / 3.0).max(1.0));
            let path = SecondaryPath::new(FirCoefficients::new(taps)?, m)?;
            let mut f = Fdefslms::new(cfg)?;
            f.enable_counting()?;
            for k in 0..blocks {
                f.step(&path, &u[k * m..(k + 1) * m], &d[k * m..(k + 1) * m])?;
            }
            f.tally().map(|t| t.per_block())
        }
        Algorithm::Efln | Algorithm::Efslms => None,
    };
    Ok(counts)
}

/// Closed form and, where available, the instrumented counts.
pub fn count_table(
    m: usize,
    p: usize,
    n: usize,
) -> Result<Vec<(Algorithm, OpCounts, Option<OpCounts>)>, BenchError> {
    Algorithm::ALL
        .into_iter()
        .map(|a| {
            Ok((
                a,
                op_counts(a, m, p, n)?,
                instrumented_counts(a, m, p, n, 3)?,
            ))
        })
        .collect()
}
