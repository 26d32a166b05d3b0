//! Helpers shared by the integration test targets. The dissipators are
//! written out as literal operator sums over jump operators, independent of
//! the closed forms used by the engine.

#![allow(dead_code)]

use nalgebra::DMatrix;

use ctqw_core::state::{DensityMatrix, C64};
use ctqw_core::EvolutionModel;

/// `A A^dagger / tr`, a full-rank mixed state for generic `A`.
pub fn random_state(n: usize, entries: &[(f64, f64)]) -> DensityMatrix {
    let a = DMatrix::from_fn(n, n, |r, c| {
        let (re, im) = entries[r * n + c];
        C64::new(re, im)
    });
    let m = &a * a.adjoint();
    let tr = m.trace();
    DensityMatrix::from_matrix(m / tr).unwrap()
}

fn projector(n: usize, k: usize, j: usize) -> DMatrix<C64> {
    let mut p = DMatrix::zeros(n, n);
    p[(k, j)] = C64::new(1.0, 0.0);
    p
}

fn lindblad_term(op: &DMatrix<C64>, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let od = op.adjoint();
    let odo = &od * op;
    op * rho * &od - (&odo * rho + rho * &odo) * C64::new(0.5, 0.0)
}

pub fn literal_rhs(model: EvolutionModel, l: &DMatrix<f64>, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let n = l.nrows();
    let h = l.map(|x| C64::new(x, 0.0));
    let comm = (&h * rho - rho * &h) * C64::new(0.0, -1.0);
    match model {
        EvolutionModel::HakenStrobl { gamma } => {
            let mut d = DMatrix::zeros(n, n);
            for k in 0..n {
                d += lindblad_term(&projector(n, k, k), rho);
            }
            comm + d * C64::new(gamma, 0.0)
        }
        EvolutionModel::Qsw { p } => {
            let mut d = DMatrix::zeros(n, n);
            for k in 0..n {
                for j in 0..n {
                    let w = l[(k, j)].abs();
                    if w != 0.0 {
                        d += lindblad_term(&(projector(n, k, j) * C64::new(w, 0.0)), rho);
                    }
                }
            }
            comm * C64::new(1.0 - p, 0.0) + d * C64::new(p, 0.0)
        }
        _ => unreachable!(),
    }
}
