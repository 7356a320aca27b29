use crate::dsp::Spectrum;

/// Upper limit on a step size. A zero excitation places no limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepBound {
    Finite(f64),
    Unbounded,
}

impl StepBound {
    pub fn value(self) -> Option<f64> {
        match self {
            StepBound::Finite(v) => Some(v),
            StepBound::Unbounded => None,
        }
    }

    /// The tighter of two bounds.
    pub fn min(self, other: StepBound) -> StepBound {
        match (self, other) {
            (StepBound::Finite(a), StepBound::Finite(b)) => StepBound::Finite(a.min(b)),
            (StepBound::Unbounded, b) => b,
            (a, StepBound::Unbounded) => a,
        }
    }

    pub fn admits(self, mu: f64) -> bool {
        match self {
            StepBound::Finite(v) => mu < v,
            StepBound::Unbounded => true,
        }
    }
}

/// `1 / (2‖g̃‖²)` for one channel spectrum.
pub fn mu_w_bound(g_spectrum: &Spectrum) -> StepBound {
    let energy = g_spectrum.energy();
    if energy > 0.0 {
        StepBound::Finite(1.0 / (2.0 * energy))
    } else {
        StepBound::Unbounded
    }
}

/// `1 / (2C · maxᵢ‖zᵢ‖²)` with C the number of channels.
pub fn mu_q_bound(z_channels: &[Vec<f64>]) -> StepBound {
    let peak = z_channels
        .iter()
        .map(|z| z.iter().map(|v| v * v).sum::<f64>())
        .fold(0.0_f64, f64::max);
    if peak > 0.0 {
        StepBound::Finite(1.0 / (2.0 * z_channels.len() as f64 * peak))
    } else {
        StepBound::Unbounded
    }
}
