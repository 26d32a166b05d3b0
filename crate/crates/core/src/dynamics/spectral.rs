//! Laplacian eigenbasis: exact propagation for the noiseless and intrinsic
//! models, and the classical heat kernel.

use nalgebra::{DMatrix, SymmetricEigen};

use super::model::EvolutionModel;
use crate::error::{Error, Result};
use crate::state::{DensityMatrix, C64};

/// Heat-kernel entries at or above this are treated as rounding noise and
/// clamped to zero.
pub const HEAT_KERNEL_CLAMP: f64 = -1e-12;

/// `L = V diag(E) V^T` with `E` ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    eigenvectors_c: DMatrix<C64>,
}

impl SpectralDecomposition {
    pub fn new(laplacian: &DMatrix<f64>) -> Result<Self> {
        if !laplacian.is_square() {
            return Err(Error::DimensionMismatch {
                expected: laplacian.nrows(),
                found: laplacian.ncols(),
            });
        }
        let n = laplacian.nrows();
        let eig = SymmetricEigen::new(laplacian.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        let eigenvectors_c = eigenvectors.map(|x| C64::new(x, 0.0));
        Ok(Self {
            eigenvalues,
            eigenvectors,
            eigenvectors_c,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `V^T rho V`
    pub fn to_eigenbasis(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        self.eigenvectors_c.transpose() * rho * &self.eigenvectors_c
    }

    /// `V rho~ V^T`
    pub fn from_eigenbasis(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        &self.eigenvectors_c * rho * self.eigenvectors_c.transpose()
    }
}

/// Closed-form propagator: in the eigenbasis every coherence evolves as
/// `rho~_mn(t) = rho~_mn(0) exp(-i w t - (gamma/2) w^2 t)`, `w = E_m - E_n`.
#[derive(Debug, Clone)]
pub struct SpectralPropagator<'a> {
    spec: &'a SpectralDecomposition,
    gamma: f64,
    rho0: DensityMatrix,
    initial: DMatrix<C64>,
}

impl<'a> SpectralPropagator<'a> {
    pub fn new(
        model: EvolutionModel,
        spec: &'a SpectralDecomposition,
        rho0: &DensityMatrix,
    ) -> Result<Self> {
        model.validate()?;
        let gamma = match model {
            EvolutionModel::Noiseless => 0.0,
            EvolutionModel::Intrinsic { gamma } => gamma,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "{} dynamics have no spectral closed form",
                    other.label()
                )))
            }
        };
        if rho0.dim() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                found: rho0.dim(),
            });
        }
        Ok(Self {
            spec,
            gamma,
            rho0: rho0.clone(),
            initial: spec.to_eigenbasis(rho0.matrix()),
        })
    }

    pub fn at(&self, t: f64) -> DensityMatrix {
        if t == 0.0 {
            return self.rho0.clone();
        }
        let e = &self.spec.eigenvalues;
        let rotated = DMatrix::from_fn(e.len(), e.len(), |m, n| {
            let w = e[m] - e[n];
            let factor = C64::new(-0.5 * self.gamma * w * w * t, -w * t).exp();
            self.initial[(m, n)] * factor
        });
        DensityMatrix::from_matrix(self.spec.from_eigenbasis(&rotated))
            .expect("square by construction")
    }
}

/// Exact state at time `t` for the noiseless or intrinsic model.
pub fn evolve_spectral(
    model: EvolutionModel,
    spec: &SpectralDecomposition,
    rho0: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix> {
    Ok(SpectralPropagator::new(model, spec, rho0)?.at(t))
}

/// `exp(-L t)`, with entries in `[HEAT_KERNEL_CLAMP, 0)` set to zero.
pub fn classical_heat_kernel(spec: &SpectralDecomposition, t: f64) -> Result<DMatrix<f64>> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("heat kernel time {t} must be >= 0")));
    }
    if t == 0.0 {
        return Ok(DMatrix::identity(spec.dim(), spec.dim()));
    }
    let v = &spec.eigenvectors;
    let decay: Vec<f64> = spec.eigenvalues.iter().map(|&e| (-e * t).exp()).collect();
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * decay[c]);
    let mut k = scaled * v.transpose();
    for x in k.iter_mut() {
        if *x < 0.0 && *x >= HEAT_KERNEL_CLAMP {
            *x = 0.0;
        }
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_cycle, build_star, laplacian};
    use crate::state::localized_state;

    #[test]
    fn decomposition_reconstructs_laplacian() {
        let l = laplacian(&build_star(7).unwrap());
        let s = SpectralDecomposition::new(&l).unwrap();
        let v = s.eigenvectors();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s.eigenvalues().to_vec()));
        assert!((v * d * v.transpose() - &l).amax() < 1e-12);
        assert!((v.transpose() * v - DMatrix::identity(7, 7)).amax() < 1e-12);
        assert!(s.eigenvalues()[0].abs() < 1e-10);
        assert!(s.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn time_zero_returns_initial_state() {
        let l = laplacian(&build_cycle(6).unwrap());
        let s = SpectralDecomposition::new(&l).unwrap();
        let rho0 = localized_state(6, 2).unwrap();
        let rho = evolve_spectral(EvolutionModel::intrinsic(), &s, &rho0, 0.0).unwrap();
        assert!((rho.matrix() - rho0.matrix()).camax() < 1e-14);
    }

    #[test]
    fn intrinsic_conserves_eigenbasis_populations() {
        let l = laplacian(&build_star(6).unwrap());
        let s = SpectralDecomposition::new(&l).unwrap();
        let rho0 = localized_state(6, 3).unwrap();
        let before = s.to_eigenbasis(rho0.matrix());
        for t in [0.5, 3.0, 40.0] {
            let rho = evolve_spectral(EvolutionModel::intrinsic(), &s, &rho0, t).unwrap();
            let after = s.to_eigenbasis(rho.matrix());
            for m in 0..6 {
                assert!((after[(m, m)] - before[(m, m)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn rejects_models_without_closed_form() {
        let l = laplacian(&build_cycle(3).unwrap());
        let s = SpectralDecomposition::new(&l).unwrap();
        let rho0 = localized_state(3, 0).unwrap();
        assert!(evolve_spectral(EvolutionModel::qsw(), &s, &rho0, 1.0).is_err());
        let wrong = localized_state(4, 0).unwrap();
        assert!(evolve_spectral(EvolutionModel::Noiseless, &s, &wrong, 1.0).is_err());
    }

    #[test]
    fn heat_kernel_examples() {
        let l = laplacian(&build_cycle(3).unwrap());
        let s = SpectralDecomposition::new(&l).unwrap();
        let k0 = classical_heat_kernel(&s, 0.0).unwrap();
        assert!((k0 - DMatrix::identity(3, 3)).amax() < 1e-14);
        let k_inf = classical_heat_kernel(&s, 50.0).unwrap();
        assert!(k_inf.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-12));
        let k = classical_heat_kernel(&s, 0.7).unwrap();
        for c in 0..3 {
            assert!((k.column(c).sum() - 1.0).abs() < 1e-12);
        }
        assert!(classical_heat_kernel(&s, -1.0).is_err());
    }
}
