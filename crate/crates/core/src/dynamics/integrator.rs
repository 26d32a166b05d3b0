//! Dormand–Prince 5(4) with Hairer's 4th-order dense output, specialised to
//! complex matrix states.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::state::C64;


const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// 5th minus embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            atol: tol,
            rtol: tol,
            max_steps: 5_000_000,
        }
    }
}

impl Default for StepControl {
    fn default() -> Self {
        Self::with_tol(1e-8)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

type Mat = DMatrix<C64>;

/// Integrates `dy/dt = f(y)` from `y0` at `t = 0`, returning `y` at each of
/// `sample_times` (nonnegative, nondecreasing). The max-norm of the scaled
/// local error estimate is kept at or below one on every accepted step.
pub fn integrate<F>(
    f: F,
    y0: &Mat,
    sample_times: &[f64],
    control: StepControl,
) -> Result<(Vec<Mat>, IntegrationStats)>
where
    F: Fn(&Mat, &mut Mat),
{
    if control.atol <= 0.0 || control.rtol < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "integration tolerances must be positive (atol = {}, rtol = {})",
            control.atol, control.rtol
        )));
    }
    if sample_times.windows(2).any(|w| w[1] < w[0]) || sample_times.first().is_some_and(|&t| t < 0.0)
    {
        return Err(Error::InvalidParameter(
            "sample times must be nonnegative and nondecreasing".into(),
        ));
    }

    let (nr, nc) = y0.shape();
    let zeros = || Mat::zeros(nr, nc);
    let mut stats = IntegrationStats::default();
    let mut out = Vec::with_capacity(sample_times.len());
    let t_final = sample_times.last().copied().unwrap_or(0.0);

    let mut t = 0.0;
    let mut y = y0.clone();
    let mut k1 = zeros();
    f(&y, &mut k1);
    stats.evaluations += 1;

    let mut next = 0;
    while next < sample_times.len() && sample_times[next] <= t {
        out.push(y.clone());
        next += 1;
    }
    if next == sample_times.len() {
        return Ok((out, stats));
    }

    let mut h = initial_step(&y, &k1, control, t_final);
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (zeros(), zeros(), zeros(), zeros(), zeros(), zeros());
    let mut stage = zeros();
    let mut y_new = zeros();

    while next < sample_times.len() {
        if stats.accepted + stats.rejected >= control.max_steps {
            return Err(Error::IntegrationFailed {
                last_good_time: t,
                reason: format!("step budget of {} exhausted", control.max_steps),
            });
        }
        if t + h > t_final {
            h = t_final - t;
        }
        if h <= 1e-13 * t.abs().max(1.0) {
            return Err(Error::IntegrationFailed {
                last_good_time: t,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }

        combine(&mut stage, &y, h, &[(A21, &k1)]);
        f(&stage, &mut k2);
        combine(&mut stage, &y, h, &[(A31, &k1), (A32, &k2)]);
        f(&stage, &mut k3);
        combine(&mut stage, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        f(&stage, &mut k4);
        combine(&mut stage, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        f(&stage, &mut k5);
        combine(
            &mut stage,
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        f(&stage, &mut k6);
        combine(
            &mut y_new,
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        f(&y_new, &mut k7);
        stats.evaluations += 6;

        let mut err: f64 = 0.0;
        for idx in 0..y.len() {
            let e = (k1[idx] * E1
                + k3[idx] * E3
                + k4[idx] * E4
                + k5[idx] * E5
                + k6[idx] * E6
                + k7[idx] * E7)
                * h;
            let scale = control.atol + control.rtol * y[idx].norm().max(y_new[idx].norm());
            err = err.max(e.norm() / scale);
        }
        if !err.is_finite() {
            stats.rejected += 1;
            h *= MIN_FACTOR;
            continue;
        }

        if err <= 1.0 {
            stats.accepted += 1;
            let t_new = t + h;
            while next < sample_times.len() && sample_times[next] <= t_new {
                let ts = sample_times[next];
                if ts == t_new {
                    out.push(y_new.clone());
                } else {
                    out.push(dense_output(&y, &y_new, [&k1, &k3, &k4, &k5, &k6, &k7], h, (ts - t) / h));
                }
                next += 1;
            }
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            h *= factor;
        } else {
            stats.rejected += 1;
            h *= (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
        }
    }
    Ok((out, stats))
}

fn combine(dst: &mut Mat, y: &Mat, h: f64, terms: &[(f64, &Mat)]) {
    for idx in 0..y.len() {
        let mut acc = C64::new(0.0, 0.0);
        for &(a, k) in terms {
            acc += k[idx] * a;
        }
        dst[idx] = y[idx] + acc * h;
    }
}

fn dense_output(y0: &Mat, y1: &Mat, k: [&Mat; 6], h: f64, theta: f64) -> Mat {
    let [k1, k3, k4, k5, k6, k7] = k;
    let theta1 = 1.0 - theta;
    let mut out = y0.clone();
    for idx in 0..y0.len() {
        let diff = y1[idx] - y0[idx];
        let bspl = k1[idx] * h - diff;
        let r4 = diff - k7[idx] * h - bspl;
        let r5 = (k1[idx] * D1 + k3[idx] * D3 + k4[idx] * D4 + k5[idx] * D5 + k6[idx] * D6
            + k7[idx] * D7)
            * h;
        out[idx] = y0[idx] + (diff + (bspl + (r4 + r5 * theta1) * theta) * theta1) * theta;
    }
    out
}

fn initial_step(y: &Mat, dy: &Mat, control: StepControl, span: f64) -> f64 {
    let scaled = |m: &Mat| {
        m.iter()
            .zip(y.iter())
            .map(|(v, y)| v.norm() / (control.atol + control.rtol * y.norm()))
            .fold(0.0, f64::max)
    };
    let d0 = scaled(y);
    let d1 = scaled(dy);
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(span).max(1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_oscillator_matches_closed_form() {
        // y' = -i w y, y(0) = 1
        let w = 3.0;
        let y0 = Mat::from_element(1, 1, C64::new(1.0, 0.0));
        let times: Vec<f64> = (0..=50).map(|i| i as f64 * 0.2).collect();
        let (ys, stats) = integrate(
            |y, out| out[0] = C64::new(0.0, -w) * y[0],
            &y0,
            &times,
            StepControl::with_tol(1e-10),
        )
        .unwrap();
        assert_eq!(ys.len(), times.len());
        for (y, &t) in ys.iter().zip(&times) {
            let exact = C64::new(0.0, -w * t).exp();
            assert!((y[0] - exact).norm() < 1e-8, "t = {t}");
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn dense_output_between_steps_is_accurate() {
        // exponential decay with loose tolerance forces long steps
        let y0 = Mat::from_element(1, 1, C64::new(1.0, 0.0));
        let times: Vec<f64> = (0..=400).map(|i| i as f64 * 0.01).collect();
        let (ys, stats) = integrate(
            |y, out| out[0] = -y[0],
            &y0,
            &times,
            StepControl::with_tol(1e-9),
        )
        .unwrap();
        assert!(stats.accepted < times.len());
        for (y, &t) in ys.iter().zip(&times) {
            assert!((y[0].re - (-t).exp()).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn step_underflow_reports_last_time() {
        // y' = y^2 blows up at t = 1
        let y0 = Mat::from_element(1, 1, C64::new(1.0, 0.0));
        let err = integrate(
            |y, out| out[0] = y[0] * y[0],
            &y0,
            &[0.0, 2.0],
            StepControl::with_tol(1e-8),
        )
        .unwrap_err();
        match err {
            Error::IntegrationFailed { last_good_time, .. } => {
                assert!(last_good_time > 0.9 && last_good_time < 1.01, "{last_good_time}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_tolerance_and_times() {
        let y0 = Mat::from_element(1, 1, C64::new(1.0, 0.0));
        let f = |y: &Mat, out: &mut Mat| out[0] = y[0];
        assert!(integrate(f, &y0, &[0.0, 1.0], StepControl::with_tol(0.0)).is_err());
        assert!(integrate(f, &y0, &[1.0, 0.5], StepControl::default()).is_err());
    }
}
