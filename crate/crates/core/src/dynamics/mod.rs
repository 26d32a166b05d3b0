//! Density-matrix propagation under the noiseless, intrinsic, Haken–Strobl
//! and quantum-stochastic-walk master equations.
//!
//! Noiseless and intrinsic dynamics are diagonal in the Laplacian eigenbasis
//! and are propagated exactly; the two position-basis models are integrated
//! with adaptive Dormand–Prince stepping.

pub mod integrator;
pub mod model;
pub mod rhs;
pub mod spectral;

use std::f64::consts::PI;

use nalgebra::DMatrix;

pub use integrator::{IntegrationStats, StepControl};
pub use model::{EvolutionModel, TimeGrid};
pub use rhs::{rhs, Generator};
pub use spectral::{
    classical_heat_kernel, evolve_spectral, SpectralDecomposition, SpectralPropagator,
};

use crate::error::{Error, Result};
use crate::state::{DensityMatrix, C64, HERMITICITY_TOL, TRACE_TOL};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Sampled states of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &DensityMatrix)> {
        self.times.iter().copied().zip(&self.states)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Absolute and relative per-step tolerance of the integrator.
    pub tol: f64,
    /// Also check positivity (one eigendecomposition per sample). Hermiticity
    /// and trace are always checked.
    pub check_positivity: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            check_positivity: false,
        }
    }
}

/// Evolves `rho0` over `grid`, picking the exact spectral path where one
/// exists and the adaptive integrator otherwise.
pub fn evolve(
    model: EvolutionModel,
    laplacian: &DMatrix<f64>,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: EvolveOptions,
) -> Result<Trajectory> {
    if model.has_spectral_solution() {
        let spec = SpectralDecomposition::new(laplacian)?;
        evolve_with_spectrum(model, &spec, rho0, grid, opts)
    } else {
        integrate_master_equation(model, laplacian, rho0, grid, opts)
    }
}

/// Spectral path with a precomputed decomposition.
pub fn evolve_with_spectrum(
    model: EvolutionModel,
    spec: &SpectralDecomposition,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: EvolveOptions,
) -> Result<Trajectory> {
    grid.validate()?;
    let prop = SpectralPropagator::new(model, spec, rho0)?;
    let times = grid.times();
    let states = times.iter().map(|&t| prop.at(t)).collect();
    let traj = Trajectory { times, states };
    check_trajectory(&traj, opts)?;
    Ok(traj)
}

/// Integrates the master equation of any model with Dormand–Prince stepping.
pub fn integrate_master_equation(
    model: EvolutionModel,
    laplacian: &DMatrix<f64>,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: EvolveOptions,
) -> Result<Trajectory> {
    grid.validate()?;
    let generator = Generator::new(model, laplacian)?;
    if rho0.dim() != generator.dim() {
        return Err(Error::DimensionMismatch {
            expected: generator.dim(),
            found: rho0.dim(),
        });
    }
    let times = grid.times();
    let (states, stats) = integrator::integrate(
        |y, out| {
            generator.apply_into(y, out);
            hermitize(out);
        },
        rho0.matrix(),
        &times,
        StepControl::with_tol(opts.tol),
    )?;
    log::debug!(
        "{}: {} accepted / {} rejected steps",
        model.label(),
        stats.accepted,
        stats.rejected
    );
    let states = states
        .into_iter()
        .map(|m| DensityMatrix::from_matrix(m).expect("square"))
        .collect();
    let traj = Trajectory { times, states };
    check_trajectory(&traj, opts)?;
    Ok(traj)
}

/// Replaces `m` by its Hermitian part. The pairwise arithmetic is symmetric,
/// so the result is Hermitian to the last bit and RK combinations of such
/// increments stay Hermitian. Without this, rounding noise in the
/// anti-Hermitian directions sits below the error estimate and can grow on
/// stiff problems.
fn hermitize(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    for c in 0..n {
        m[(c, c)].im = 0.0;
        for r in c + 1..n {
            let a = m[(r, c)];
            let b = m[(c, r)];
            let re = 0.5 * (a.re + b.re);
            let im = 0.5 * (a.im - b.im);
            m[(r, c)] = C64::new(re, im);
            m[(c, r)] = C64::new(re, -im);
        }
    }
}

fn check_trajectory(traj: &Trajectory, opts: EvolveOptions) -> Result<()> {
    for (t, rho) in traj.iter() {
        let m = rho.matrix();
        let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let trace = (m.trace() - C64::new(1.0, 0.0)).norm();
        let bad = if herm > HERMITICITY_TOL {
            Some(format!("hermiticity defect {herm:e}"))
        } else if trace > TRACE_TOL {
            Some(format!("trace defect {trace:e}"))
        } else if opts.check_positivity {
            let d = rho.validate();
            (!d.psd_ok()).then(|| format!("min eigenvalue {:e}", d.min_eigenvalue))
        } else {
            None
        };
        if let Some(reason) = bad {
            return Err(Error::InvalidState(format!("at t = {t}: {reason}")));
        }
    }
    Ok(())
}

/// Closed-form noiseless state on the triangle from `|0><0|`. The Laplacian
/// has spectrum {0, 3, 3}, so everything is periodic with period `2 pi / 3`.
pub fn triangle_analytic(t: f64) -> DensityMatrix {
    let c = (3.0 * t).cos();
    let diag0 = (5.0 + 4.0 * c) / 9.0;
    let other = (2.0 - 2.0 * c) / 9.0;
    let e_minus = C64::new(0.0, -3.0 * t).exp();
    let e_plus = C64::new(0.0, 3.0 * t).exp();
    let row0 = (C64::new(-1.0, 0.0) + e_minus * 2.0 - e_plus) / 9.0;
    let col0 = row0.conj();
    let r = |x: f64| C64::new(x, 0.0);
    let m = DMatrix::from_row_slice(
        3,
        3,
        &[
            r(diag0),
            row0,
            row0,
            col0,
            r(other),
            r(other),
            col0,
            r(other),
            r(other),
        ],
    );
    DensityMatrix::from_matrix(m).expect("square")
}

/// Revival period of the triangle walk.
pub const TRIANGLE_PERIOD: f64 = 2.0 * PI / 3.0;
