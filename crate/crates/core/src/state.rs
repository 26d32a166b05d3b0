//! Density matrices in the node (position) basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-9;
pub const PURE_NORM_TOL: f64 = 1e-12;

/// A walker state. Construction does not check physicality; call
/// [`DensityMatrix::validate`] to see how far a matrix is from a valid state.
/// Nothing in this crate renormalizes states behind the caller's back.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<C64>,
}

/// Physicality defects of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `max |rho - rho^dagger|`
    pub hermiticity_defect: f64,
    /// `|Tr rho - 1|`
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
}

impl Diagnostics {
    pub fn hermitian_ok(&self) -> bool {
        self.hermiticity_defect <= HERMITICITY_TOL
    }

    pub fn trace_ok(&self) -> bool {
        self.trace_defect <= TRACE_TOL
    }

    pub fn psd_ok(&self) -> bool {
        self.min_eigenvalue >= -PSD_TOL
    }

    pub fn is_valid(&self) -> bool {
        self.hermitian_ok() && self.trace_ok() && self.psd_ok()
    }
}

impl DensityMatrix {
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        Ok(Self { m })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self {
            m: DMatrix::from_diagonal(&v),
        }
    }

    /// Maximally mixed state `I / n`.
    pub fn maximally_mixed(n: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0 / n as f64; n])
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// Real parts of the diagonal, unclamped.
    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    /// Eigenvalues of the Hermitian part `(rho + rho^dagger) / 2`, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.hermitian_part())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub(crate) fn hermitian_part(&self) -> DMatrix<C64> {
        (&self.m + self.m.adjoint()) * C64::new(0.5, 0.0)
    }

    pub fn validate(&self) -> Diagnostics {
        let hermiticity_defect = (&self.m - self.m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let trace_defect = (self.trace() - C64::new(1.0, 0.0)).norm();
        let min_eigenvalue = self.eigenvalues().first().copied().unwrap_or(0.0);
        Diagnostics {
            hermiticity_defect,
            trace_defect,
            min_eigenvalue,
        }
    }

    /// `Tr rho^2`, computed as the squared Frobenius norm (exact for Hermitian rho).
    pub fn purity(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn to_snapshot(&self) -> StateSnapshot {
        let n = self.dim();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        StateSnapshot { dim: n, entries }
    }
}

/// `|j><j|` on `n` nodes.
pub fn localized_state(n: usize, j: usize) -> Result<DensityMatrix> {
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, n });
    }
    let mut m = DMatrix::zeros(n, n);
    m[(j, j)] = C64::new(1.0, 0.0);
    Ok(DensityMatrix { m })
}

/// Free function form of [`DensityMatrix::purity`].
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

/// Free function form of [`DensityMatrix::validate`].
pub fn validate(rho: &DensityMatrix) -> Diagnostics {
    rho.validate()
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<C64>,
}

impl PureState {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state vector norm {norm} is not 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(n: usize, j: usize) -> Result<Self> {
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, n });
        }
        let mut v = DVector::zeros(n);
        v[j] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    /// Equal-weight superposition of all `n` nodes.
    pub fn uniform(n: usize) -> Self {
        let a = C64::new(1.0 / (n as f64).sqrt(), 0.0);
        Self {
            amplitudes: DVector::from_element(n, a),
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            m: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// Debug dump: row-major `[re, im]` pairs with a dimension header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSnapshot {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl TryFrom<StateSnapshot> for DensityMatrix {
    type Error = Error;

    fn try_from(s: StateSnapshot) -> Result<Self> {
        if s.entries.len() != s.dim * s.dim {
            return Err(Error::DimensionMismatch {
                expected: s.dim * s.dim,
                found: s.entries.len(),
            });
        }
        let m = DMatrix::from_row_iterator(
            s.dim,
            s.dim,
            s.entries.iter().map(|&[re, im]| C64::new(re, im)),
        );
        Ok(DensityMatrix { m })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn localized_examples() {
        let rho = localized_state(3, 0).unwrap();
        assert_eq!(rho.diagonal_real(), vec![1.0, 0.0, 0.0]);
        let rho = localized_state(10, 9).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let expected = if i == 9 && j == 9 { 1.0 } else { 0.0 };
                assert_eq!(rho.matrix()[(i, j)], C64::new(expected, 0.0));
            }
        }
        assert_eq!(rho.purity(), 1.0);
        assert!(matches!(
            localized_state(3, 3),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn validate_examples() {
        let d = localized_state(3, 0).unwrap().validate();
        assert!(d.hermiticity_defect <= 1e-15);
        assert!(d.trace_defect <= 1e-15);
        assert!(d.min_eigenvalue.abs() <= 1e-15);
        assert!(d.is_valid());

        let short = DensityMatrix::from_real_diagonal(&[0.5, 0.4]).validate();
        assert!((short.trace_defect - 0.1).abs() < 1e-15);
        assert!(!short.trace_ok() && short.psd_ok());

        let neg = DensityMatrix::from_real_diagonal(&[0.5, 0.6, -0.1]).validate();
        assert!((neg.min_eigenvalue + 0.1).abs() < 1e-15);
        assert!(!neg.psd_ok() && neg.trace_ok());

        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(0.5, 0.0);
        m[(1, 1)] = C64::new(0.5, 0.0);
        m[(0, 1)] = C64::new(0.1, 0.0);
        let skew = DensityMatrix::from_matrix(m).unwrap().validate();
        assert!(!skew.hermitian_ok());
    }

    #[test]
    fn purity_examples() {
        assert_eq!(localized_state(4, 0).unwrap().purity(), 1.0);
        assert!((DensityMatrix::maximally_mixed(10).purity() - 0.1).abs() < 1e-15);
        assert!((DensityMatrix::from_real_diagonal(&[0.5, 0.5, 0.0]).purity() - 0.5).abs() < 1e-15);
        assert!((PureState::uniform(5).to_density().purity() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pure_state_norm_is_checked() {
        let v = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(PureState::new(v).is_err());
        assert!(PureState::basis(3, 5).is_err());
    }

    #[test]
    fn snapshot_layout_is_row_major() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(0.25, -0.5);
        let rho = DensityMatrix::from_matrix(m).unwrap();
        let snap = rho.to_snapshot();
        assert_eq!(snap.dim, 2);
        assert_eq!(snap.entries[1], [0.25, -0.5]);
        let back: DensityMatrix = snap.try_into().unwrap();
        assert_eq!(back, rho);
        let bad = StateSnapshot {
            dim: 2,
            entries: vec![[0.0, 0.0]; 3],
        };
        assert!(DensityMatrix::try_from(bad).is_err());
    }
}
