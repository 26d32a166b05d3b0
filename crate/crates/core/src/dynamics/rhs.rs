//! Right-hand sides of the four master equations.
//!
//! The dissipators are evaluated in closed form rather than as operator sums:
//!
//! * Haken–Strobl: `sum_k P_k rho P_k = diag(rho)` and `sum_k P_k^dagger P_k = I`,
//!   so the dissipator is `gamma (diag(rho) - rho)`.
//! * QSW: with `W_kj = L_kj^2` (diagonal terms included), the jump term is
//!   `sum_j W_kj rho_jj` on the diagonal and the anticommutator term is
//!   `-(S_i + S_j) rho_ij / 2` with `S_j = sum_k W_kj`.
//!
//! The Laplacian is applied through its sparse rows, so one evaluation costs
//! `O(n (n + |E|))`.

use nalgebra::DMatrix;

use super::model::EvolutionModel;
use crate::error::{Error, Result};
use crate::state::C64;

const I: C64 = C64::new(0.0, 1.0);

/// Precomputed generator `rho -> d rho / dt` for one model and Laplacian.
#[derive(Debug, Clone)]
pub struct Generator {
    model: EvolutionModel,
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
    /// `W` column sums, QSW only.
    s: Vec<f64>,
    /// `W` in sparse row form, QSW only.
    w_rows: Vec<Vec<(usize, f64)>>,
}

impl Generator {
    pub fn new(model: EvolutionModel, laplacian: &DMatrix<f64>) -> Result<Self> {
        model.validate()?;
        if !laplacian.is_square() {
            return Err(Error::DimensionMismatch {
                expected: laplacian.nrows(),
                found: laplacian.ncols(),
            });
        }
        let n = laplacian.nrows();
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter_map(|j| {
                        let v = laplacian[(i, j)];
                        (v != 0.0).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        let (s, w_rows) = if matches!(model, EvolutionModel::Qsw { .. }) {
            let w_rows: Vec<Vec<(usize, f64)>> = rows
                .iter()
                .map(|r| r.iter().map(|&(j, v)| (j, v * v)).collect())
                .collect();
            let mut s = vec![0.0; n];
            for r in &w_rows {
                for &(j, w) in r {
                    s[j] += w;
                }
            }
            (s, w_rows)
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(Self {
            model,
            n,
            rows,
            s,
            w_rows,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> EvolutionModel {
        self.model
    }

    /// `[L, x]`. Both products walk columns of `x`, which are contiguous;
    /// `x L` uses the symmetry of `L` to read its column `c` as row `c`.
    fn commutator(&self, x: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        let n = self.n;
        for c in 0..n {
            let xc = x.column(c);
            let mut oc = out.column_mut(c);
            for r in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for &(k, v) in &self.rows[r] {
                    acc += xc[k] * v;
                }
                oc[r] = acc;
            }
            for &(k, v) in &self.rows[c] {
                oc.axpy(C64::new(-v, 0.0), &x.column(k), C64::new(1.0, 0.0));
            }
        }
    }

    /// Writes `d rho / dt` into `out`.
    pub fn apply_into(&self, rho: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        let n = self.n;
        debug_assert_eq!(rho.shape(), (n, n));
        self.commutator(rho, out);
        match self.model {
            EvolutionModel::Noiseless => {
                *out *= -I;
            }
            EvolutionModel::Intrinsic { gamma } => {
                let mut double = DMatrix::zeros(n, n);
                self.commutator(out, &mut double);
                *out *= -I;
                *out -= double * C64::new(gamma / 2.0, 0.0);
            }
            EvolutionModel::HakenStrobl { gamma } => {
                *out *= -I;
                for c in 0..n {
                    for r in 0..n {
                        if r != c {
                            out[(r, c)] -= rho[(r, c)] * gamma;
                        }
                    }
                }
            }
            EvolutionModel::Qsw { p } => {
                *out *= -I * (1.0 - p);
                for c in 0..n {
                    for r in 0..n {
                        out[(r, c)] -= rho[(r, c)] * (p * 0.5 * (self.s[r] + self.s[c]));
                    }
                }
                for k in 0..n {
                    let gain: C64 = self.w_rows[k].iter().map(|&(j, w)| rho[(j, j)] * w).sum();
                    out[(k, k)] += gain * p;
                }
            }
        }
    }

    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        self.apply_into(rho, &mut out);
        out
    }
}

/// `d rho / dt` for `model` with Hamiltonian `laplacian`.
pub fn rhs(
    model: EvolutionModel,
    laplacian: &DMatrix<f64>,
    rho: &DMatrix<C64>,
) -> Result<DMatrix<C64>> {
    if rho.shape() != laplacian.shape() {
        return Err(Error::DimensionMismatch {
            expected: laplacian.nrows(),
            found: rho.nrows(),
        });
    }
    Ok(Generator::new(model, laplacian)?.apply(rho))
}
