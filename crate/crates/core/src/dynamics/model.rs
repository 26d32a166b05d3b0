use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_INTRINSIC_GAMMA: f64 = 0.1;
pub const DEFAULT_HAKEN_STROBL_GAMMA: f64 = 0.1;
pub const DEFAULT_QSW_P: f64 = 0.1;

/// Master equation driving the walker. The Hamiltonian is always the graph
/// Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EvolutionModel {
    /// `-i[L, rho]`
    Noiseless,
    /// Milburn energy-basis dephasing, `-i[L, rho] - (gamma/2)[L, [L, rho]]`.
    Intrinsic { gamma: f64 },
    /// Position-basis dephasing with projectors `|k><k|` at rate `gamma`.
    HakenStrobl { gamma: f64 },
    /// Quantum stochastic walk with jump operators `L_kj |k><j|`, mixing `p`.
    Qsw { p: f64 },
}

impl EvolutionModel {
    pub fn intrinsic() -> Self {
        Self::Intrinsic {
            gamma: DEFAULT_INTRINSIC_GAMMA,
        }
    }

    pub fn haken_strobl() -> Self {
        Self::HakenStrobl {
            gamma: DEFAULT_HAKEN_STROBL_GAMMA,
        }
    }

    pub fn qsw() -> Self {
        Self::Qsw { p: DEFAULT_QSW_P }
    }

    /// The four models at their default parameters.
    pub fn defaults() -> [Self; 4] {
        [Self::Noiseless, Self::haken_strobl(), Self::intrinsic(), Self::qsw()]
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Noiseless => Ok(()),
            Self::Intrinsic { gamma } | Self::HakenStrobl { gamma } => {
                if gamma.is_finite() && gamma >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "decoherence rate {gamma} must be finite and >= 0"
                    )))
                }
            }
            Self::Qsw { p } => {
                if (0.0..=1.0).contains(&p) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "QSW mixing parameter {p} outside [0, 1]"
                    )))
                }
            }
        }
    }

    /// Short label used in file names and summaries.
    pub fn label(&self) -> &'static str {
        match self {
            Self::Noiseless => "noiseless",
            Self::Intrinsic { .. } => "intrinsic",
            Self::HakenStrobl { .. } => "haken_strobl",
            Self::Qsw { .. } => "qsw",
        }
    }

    /// Whether the exact eigenbasis propagator applies.
    pub fn has_spectral_solution(&self) -> bool {
        matches!(self, Self::Noiseless | Self::Intrinsic { .. })
    }
}

/// Uniform sample times `0 = t_0 < ... < t_{samples-1} = t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_end: f64,
    pub samples: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, samples: usize) -> Result<Self> {
        let grid = Self { t_end, samples };
        grid.validate()?;
        Ok(grid)
    }

    /// `[0, 30]` with 600 samples for small graphs, `[0, 10]` with 400 for
    /// N = 100 and above. Sizes in between keep the small-graph window.
    pub fn default_for(n: usize) -> Self {
        if n >= 100 {
            Self { t_end: 10.0, samples: 400 }
        } else {
            Self { t_end: 30.0, samples: 600 }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) || self.samples < 2 {
            return Err(Error::InvalidParameter(format!(
                "time grid needs t_end > 0 and at least 2 samples (t_end = {}, samples = {})",
                self.t_end, self.samples
            )));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let last = (self.samples - 1) as f64;
        (0..self.samples)
            .map(|i| {
                if i + 1 == self.samples {
                    self.t_end
                } else {
                    self.t_end * i as f64 / last
                }
            })
            .collect()
    }
}
