//! Stability quantifiers: occupations, l1 coherence, Uhlmann fidelity,
//! von Neumann entropy and the quantum–classical distance.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{classical_heat_kernel, SpectralDecomposition, Trajectory};
use crate::error::{Error, Result};
use crate::state::{DensityMatrix, PureState, C64, PSD_TOL};

/// Logarithm used by [`von_neumann_entropy`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyBase {
    #[default]
    Natural,
    Two,
}

/// Which classical reference [`quantum_classical_distance`] compares against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DqcMode {
    /// Classical walk started from the same node as the quantum walk.
    #[default]
    FixedInitial,
    /// Best-matching classical walk over all localized starts. Costs `n`
    /// fidelity evaluations per sample.
    MinOverLocalized,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRecord {
    pub t: f64,
    pub occupations: Vec<f64>,
    pub l1_coherence: f64,
    pub fidelity_with_initial: f64,
    pub entropy: f64,
    pub d_qc: f64,
}

/// Diagonal of `rho`, negative rounding noise clamped to zero.
pub fn occupation_probabilities(rho: &DensityMatrix) -> Vec<f64> {
    rho.diagonal_real().into_iter().map(|p| p.max(0.0)).collect()
}

/// `sum_{i != j} |rho_ij|`
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let n = rho.dim();
    let mut total = 0.0;
    for c in 0..n {
        for r in 0..n {
            if r != c {
                total += m[(r, c)].norm();
            }
        }
    }
    total
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, found: b });
    }
    Ok(())
}

fn hermitian_eigen(m: DMatrix<C64>) -> SymmetricEigen<C64, nalgebra::Dyn> {
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(h)
}

/// Square root of a PSD matrix via its eigendecomposition, negative
/// eigenvalues clamped to zero.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = hermitian_eigen(m.clone());
    let v = &eig.eigenvectors;
    let floor = noise_floor(eig.eigenvalues.iter().copied());
    let roots: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| if l > floor { l.sqrt() } else { 0.0 })
        .collect();
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * roots[c]);
    scaled * v.adjoint()
}

/// Eigenvalues below this multiple of `eps * lambda_max` are rounding noise;
/// their square roots would otherwise leak `~1e-8` into fidelities of
/// rank-deficient states.
const EIGEN_NOISE_FACTOR: f64 = 64.0;

fn noise_floor(eigenvalues: impl Iterator<Item = f64>) -> f64 {
    EIGEN_NOISE_FACTOR * f64::EPSILON * eigenvalues.fold(0.0, f64::max)
}

fn trace_sqrt_squared(m: DMatrix<C64>) -> f64 {
    let eig = hermitian_eigen(m);
    let floor = noise_floor(eig.eigenvalues.iter().copied());
    let s: f64 = eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > floor)
        .map(|&l| l.sqrt())
        .sum();
    (s * s).clamp(0.0, 1.0)
}

/// Uhlmann fidelity `[Tr sqrt(sqrt(a) b sqrt(a))]^2`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let sa = psd_sqrt(a.matrix());
    Ok(trace_sqrt_squared(&sa * b.matrix() * &sa))
}

/// Fidelity against a pure state: `<psi| rho |psi>`.
pub fn fidelity_with_pure(psi: &PureState, rho: &DensityMatrix) -> Result<f64> {
    check_dims(psi.dim(), rho.dim())?;
    let v = psi.amplitudes();
    let z = (v.adjoint() * rho.matrix() * v)[(0, 0)];
    Ok(z.re.clamp(0.0, 1.0))
}

/// Fidelity against the basis state `|j><j|`: `rho_jj`.
pub fn fidelity_with_node(j: usize, rho: &DensityMatrix) -> Result<f64> {
    if j >= rho.dim() {
        return Err(Error::IndexOutOfRange { index: j, n: rho.dim() });
    }
    Ok(rho.matrix()[(j, j)].re.clamp(0.0, 1.0))
}

/// Fidelity between a diagonal state `diag(p)` and `rho`, using
/// `sqrt(diag(p)) = diag(sqrt(p))`.
pub fn fidelity_with_diagonal(p: &[f64], rho: &DensityMatrix) -> Result<f64> {
    check_dims(p.len(), rho.dim())?;
    let roots: Vec<f64> = p.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let m = rho.matrix();
    let inner = DMatrix::from_fn(p.len(), p.len(), |r, c| m[(r, c)] * (roots[r] * roots[c]));
    Ok(trace_sqrt_squared(inner))
}

/// `-Tr rho log rho`. Eigenvalues in `[-1e-9, 0)` count as zero; anything
/// more negative is an invalid state.
pub fn von_neumann_entropy(rho: &DensityMatrix, base: EntropyBase) -> Result<f64> {
    let mut s = 0.0;
    for lambda in rho.eigenvalues() {
        if lambda < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {lambda:e} in entropy"
            )));
        }
        if lambda > 0.0 {
            s -= lambda * lambda.ln();
        }
    }
    let s = s.max(0.0);
    Ok(match base {
        EntropyBase::Natural => s,
        EntropyBase::Two => s / std::f64::consts::LN_2,
    })
}

/// Classical walk state `sum_k p_kj(t) |k><k|` with `p = exp(-L t)`.
pub fn classical_state(spec: &SpectralDecomposition, t: f64, j: usize) -> Result<DensityMatrix> {
    let n = spec.dim();
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, n });
    }
    let k = classical_heat_kernel(spec, t)?;
    let column: Vec<f64> = k.column(j).iter().copied().collect();
    Ok(DensityMatrix::from_real_diagonal(&column))
}

/// `1 - F(rho_classical(t), rho_quantum)`, the classical walk starting at
/// `initial` or, in [`DqcMode::MinOverLocalized`], at the node minimizing the
/// fidelity (the largest distance over localized starts).
pub fn quantum_classical_distance(
    rho_q: &DensityMatrix,
    spec: &SpectralDecomposition,
    t: f64,
    initial: usize,
    mode: DqcMode,
) -> Result<f64> {
    let n = spec.dim();
    check_dims(n, rho_q.dim())?;
    if initial >= n {
        return Err(Error::IndexOutOfRange { index: initial, n });
    }
    let kernel = classical_heat_kernel(spec, t)?;
    let column = |j: usize| -> Vec<f64> { kernel.column(j).iter().copied().collect() };
    let f = match mode {
        DqcMode::FixedInitial => fidelity_with_diagonal(&column(initial), rho_q)?,
        DqcMode::MinOverLocalized => {
            let mut best = f64::INFINITY;
            for j in 0..n {
                best = best.min(fidelity_with_diagonal(&column(j), rho_q)?);
            }
            best
        }
    };
    Ok((1.0 - f).clamp(0.0, 1.0))
}

/// One [`MetricRecord`] per trajectory sample. Samples are evaluated in
/// parallel; output order follows the trajectory.
pub fn metric_series(
    trajectory: &Trajectory,
    spec: &SpectralDecomposition,
    initial: usize,
    mode: DqcMode,
    base: EntropyBase,
) -> Result<Vec<MetricRecord>> {
    trajectory
        .times
        .par_iter()
        .zip(trajectory.states.par_iter())
        .map(|(&t, rho)| {
            Ok(MetricRecord {
                t,
                occupations: occupation_probabilities(rho),
                l1_coherence: l1_coherence(rho),
                fidelity_with_initial: fidelity_with_node(initial, rho)?,
                entropy: von_neumann_entropy(rho, base)?,
                d_qc: quantum_classical_distance(rho, spec, t, initial, mode)?,
            })
        })
        .collect()
}
