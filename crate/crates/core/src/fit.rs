//! Least-squares fit of `C(t) = C0 exp(-(lambda t)^beta)` (Kohlrausch decay).
//!
//! The search runs a box-constrained Nelder–Mead simplex over
//! `(C0 / max, ln lambda, ln beta)`. Working in log coordinates makes a
//! rescaling of the time axis a pure translation of `ln lambda`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 5;
pub const LAMBDA_MIN: f64 = 1e-6;
pub const LAMBDA_MAX: f64 = 1e3;
pub const BETA_MIN: f64 = 0.05;
pub const BETA_MAX: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Jittered restarts after the first descent.
    pub restarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Simplex diameter (in search coordinates) at which a descent stops.
    pub x_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            restarts: 5,
            seed: 0,
            max_iterations: 20_000,
            x_tol: 1e-11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub c0: f64,
    pub lambda: f64,
    pub beta: f64,
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
    pub diagnostic: Option<String>,
}

impl FitResult {
    pub fn model(&self, t: f64) -> f64 {
        kohlrausch(self.c0, self.lambda, self.beta, t)
    }
}

/// Fit JSON: `{"C0", "lambda", "beta", "rss", "converged", "window"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    #[serde(rename = "C0")]
    pub c0: f64,
    pub lambda: f64,
    pub beta: f64,
    pub rss: f64,
    pub converged: bool,
    pub window: [f64; 2],
}

impl FitReport {
    pub fn new(fit: &FitResult, window: [f64; 2]) -> Self {
        Self {
            c0: fit.c0,
            lambda: fit.lambda,
            beta: fit.beta,
            rss: fit.rss,
            converged: fit.converged,
            window,
        }
    }
}

pub fn kohlrausch(c0: f64, lambda: f64, beta: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return c0;
    }
    c0 * (-(lambda * t).powf(beta)).exp()
}

/// Samples with `t_min <= t <= t_max`.
pub fn fit_window(
    times: &[f64],
    values: &[f64],
    t_min: f64,
    t_max: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if times.len() != values.len() {
        return Err(Error::InvalidFitInput(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    if !(t_min < t_max) {
        return Err(Error::InvalidFitInput(format!(
            "window [{t_min}, {t_max}] is empty"
        )));
    }
    let (t, v): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= t_min && t <= t_max)
        .map(|(&t, &v)| (t, v))
        .unzip();
    if t.is_empty() {
        return Err(Error::InvalidFitInput(format!(
            "no samples inside window [{t_min}, {t_max}]"
        )));
    }
    Ok((t, v))
}

fn check_input(times: &[f64], values: &[f64]) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::InvalidFitInput(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    if times.len() < MIN_POINTS {
        return Err(Error::InvalidFitInput(format!(
            "need at least {MIN_POINTS} points, got {}",
            times.len()
        )));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidFitInput("times must be finite and strictly increasing".into()));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidFitInput("values must be finite and nonnegative".into()));
    }
    Ok(())
}

struct Problem<'a> {
    times: &'a [f64],
    values: &'a [f64],
    scale: f64,
    lower: [f64; 3],
    upper: [f64; 3],
}

impl Problem<'_> {
    fn clamp(&self, x: &mut [f64; 3]) {
        for i in 0..3 {
            x[i] = x[i].clamp(self.lower[i], self.upper[i]);
        }
    }

    fn params(&self, x: &[f64; 3]) -> (f64, f64, f64) {
        (x[0] * self.scale, x[1].exp(), x[2].exp())
    }

    fn rss(&self, x: &[f64; 3]) -> f64 {
        let (c0, lambda, beta) = self.params(x);
        self.times
            .iter()
            .zip(self.values)
            .map(|(&t, &v)| {
                let r = v - kohlrausch(c0, lambda, beta, t);
                r * r
            })
            .sum()
    }
}

struct Descent {
    x: [f64; 3],
    f: f64,
    iterations: usize,
    collapsed: bool,
}

fn nelder_mead(problem: &Problem, start: [f64; 3], steps: [f64; 3], opts: &FitOptions) -> Descent {
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    let mut x0 = start;
    problem.clamp(&mut x0);
    simplex.push((x0, problem.rss(&x0)));
    for i in 0..3 {
        let mut x = x0;
        x[i] += steps[i];
        if x[i] > problem.upper[i] {
            x[i] = x0[i] - steps[i];
        }
        problem.clamp(&mut x);
        simplex.push((x, problem.rss(&x)));
    }

    let eval = |x: [f64; 3]| {
        let mut x = x;
        problem.clamp(&mut x);
        (x, problem.rss(&x))
    };
    let along = |from: &[f64; 3], to: &[f64; 3], s: f64| -> [f64; 3] {
        std::array::from_fn(|i| from[i] + s * (to[i] - from[i]))
    };

    let mut iterations = 0;
    let mut collapsed = false;
    while iterations < opts.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| (0..3).map(|i| (x[i] - simplex[0].0[i]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter <= opts.x_tol {
            collapsed = true;
            break;
        }
        iterations += 1;

        let centroid: [f64; 3] =
            std::array::from_fn(|i| simplex[..3].iter().map(|(x, _)| x[i]).sum::<f64>() / 3.0);
        let worst = simplex[3];
        let reflected = eval(along(&centroid, &worst.0, -1.0));
        if reflected.1 < simplex[0].1 {
            let expanded = eval(along(&centroid, &worst.0, -2.0));
            simplex[3] = if expanded.1 < reflected.1 { expanded } else { reflected };
        } else if reflected.1 < simplex[2].1 {
            simplex[3] = reflected;
        } else {
            let contracted = if reflected.1 < worst.1 {
                eval(along(&centroid, &reflected.0, 0.5))
            } else {
                eval(along(&centroid, &worst.0, 0.5))
            };
            if contracted.1 < worst.1.min(reflected.1) {
                simplex[3] = contracted;
            } else {
                let best = simplex[0].0;
                for vertex in simplex.iter_mut().skip(1) {
                    *vertex = eval(along(&best, &vertex.0, 0.5));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Descent {
        x: simplex[0].0,
        f: simplex[0].1,
        iterations,
        collapsed,
    }
}

fn initial_guess(times: &[f64], values: &[f64]) -> (f64, f64) {
    let peak = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let c0 = if values[0] > 0.0 { values[0] } else { values[peak] };
    let start = if values[0] > 0.0 { 0 } else { peak };
    let t_end = *times.last().expect("non-empty");
    let t_half = times[start..]
        .iter()
        .zip(&values[start..])
        .find(|(_, &v)| v < c0 / 2.0)
        .map(|(&t, _)| t)
        .filter(|&t| t > 0.0);
    let lambda = 1.0 / t_half.unwrap_or(t_end);
    (c0, lambda)
}

/// Fits the stretched exponential to `(times, values)`. Never fails on
/// well-formed but degenerate data; such fits come back with
/// `converged = false` and a diagnostic.
pub fn fit_stretched_exponential(
    times: &[f64],
    values: &[f64],
    opts: &FitOptions,
) -> Result<FitResult> {
    check_input(times, values)?;
    let vmax = values.iter().copied().fold(0.0, f64::max);
    let vmin = values.iter().copied().fold(f64::INFINITY, f64::min);

    if vmax - vmin <= 1e-12 * vmax.max(1.0) {
        return Ok(FitResult {
            c0: vmax,
            lambda: LAMBDA_MIN,
            beta: 1.0,
            rss: 0.0,
            converged: false,
            iterations: 0,
            diagnostic: Some("constant input: decay rate and exponent are unidentifiable".into()),
        });
    }

    let problem = Problem {
        times,
        values,
        scale: vmax,
        lower: [0.0, LAMBDA_MIN.ln(), BETA_MIN.ln()],
        upper: [2.0, LAMBDA_MAX.ln(), BETA_MAX.ln()],
    };
    let (c0, lambda) = initial_guess(times, values);
    let base = [c0 / vmax, lambda.ln(), 0.0];
    let steps = [0.1, 0.5, 0.2];

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = nelder_mead(&problem, base, steps, opts);
    let mut iterations = best.iterations;
    for _ in 0..opts.restarts {
        let start = [
            base[0] * (1.0 + rng.random_range(-0.2..0.2)),
            base[1] + rng.random_range(-1.0..1.0),
            base[2] + rng.random_range(-0.7..0.7),
        ];
        let d = nelder_mead(&problem, start, steps, opts);
        iterations += d.iterations;
        if d.f < best.f {
            best = d;
        }
    }
    // restart once from the winner; a fresh simplex escapes premature collapse
    let polished = nelder_mead(&problem, best.x, [0.01, 0.05, 0.05], opts);
    iterations += polished.iterations;
    if polished.f <= best.f {
        best = polished;
    }

    let (c0, lambda, beta) = problem.params(&best.x);
    let mut diagnostic = None;
    let mut converged = best.collapsed;
    if !converged {
        diagnostic = Some(format!("simplex did not collapse within {} iterations", opts.max_iterations));
    } else if best.x[1] <= problem.lower[1] + 1e-9 {
        converged = false;
        diagnostic = Some("decay rate pinned at its lower bound: no resolvable decay".into());
    }
    Ok(FitResult {
        c0,
        lambda,
        beta,
        rss: best.f,
        converged,
        iterations,
        diagnostic,
    })
}
