//! Gaussian time averages and sweeps over sample times.

use super::propagate::{weighted_moment, PropagationParams, Propagator};
use crate::error::{Error, Result};
use crate::jacobi::JacobiMatrix;

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Which part of the time axis the samples cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageMode {
    /// Samples on `[0, 5t]` of an even function.
    Even,
    /// Samples on `[-5t, 5t]`.
    FullLine,
}

/// Trapezoid weights of `exp(-s^2/t^2)` over the samples with `|s| <= 5t`.
fn kernel_weights(s: &[f64], t: f64) -> Vec<f64> {
    let reach = 5.0 * t * (1.0 + 1e-12);
    let inside: Vec<usize> = (0..s.len()).filter(|&i| s[i].abs() <= reach).collect();
    let mut w = vec![0.0; s.len()];
    for (pos, &i) in inside.iter().enumerate() {
        let left = if pos > 0 { s[i] - s[inside[pos - 1]] } else { 0.0 };
        let right = if pos + 1 < inside.len() { s[inside[pos + 1]] - s[i] } else { 0.0 };
        w[i] = 0.5 * (left + right) * (-(s[i] / t).powi(2)).exp();
    }
    w
}

fn check_grid(s: &[f64], t: f64, mode: AverageMode) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("averaging time {t} must be positive")));
    }
    if s.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("sample times must increase strictly".into()));
    }
    let (from, to) = match mode {
        AverageMode::Even => (0.0, 5.0 * t),
        AverageMode::FullLine => (-5.0 * t, 5.0 * t),
    };
    let slack = 1e-9 * t;
    let first = *s.first().ok_or(Error::GridTooCoarse(f64::INFINITY))?;
    let last = *s.last().expect("non-empty");
    if first > from + slack || last < to - slack {
        return Err(Error::GridTooCoarse(f64::INFINITY));
    }
    let worst = s
        .windows(2)
        .filter(|w| w[0] < to && w[1] > from)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);
    if worst > t / 20.0 + slack {
        return Err(Error::GridTooCoarse(worst));
    }
    Ok(())
}

/// Gaussian average `int exp(-s^2/t^2) f(s) ds / (t sqrt(pi))`, normalized so
/// that constants average to themselves.
///
/// In [`AverageMode::Even`] only `s >= 0` is sampled and the integral is
/// doubled. The step must not exceed `t/20` anywhere on `[0, 5t]`.
pub fn gaussian_average(s: &[f64], f: &[f64], t: f64, mode: AverageMode) -> Result<f64> {
    if s.len() != f.len() {
        return Err(Error::InvalidArgument("sample and value counts differ".into()));
    }
    check_grid(s, t, mode)?;
    let w = kernel_weights(s, t);
    let total: f64 = w.iter().sum();
    // The discrete weights differ from t sqrt(pi) / 2 (even) by far less than
    // the trapezoid error of f; dividing by them makes A(1) = 1 exact.
    let _continuum = match mode {
        AverageMode::Even => 0.5 * t * SQRT_PI,
        AverageMode::FullLine => t * SQRT_PI,
    };
    Ok(w.iter().zip(f).map(|(w, f)| w * f).sum::<f64>() / total)
}

/// Sample times for averages at every `t` in `[t_min, t_max]`: step
/// `max(5 t_min, s) / density` from 0 to `5 t_max`. `density >= 100` keeps
/// the step below `t/20` on each averaging window.
pub fn sample_grid(t_min: f64, t_max: f64, density: f64) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max >= t_min) {
        return Err(Error::InvalidArgument("need 0 < t_min <= t_max".into()));
    }
    if !(density >= 100.0) {
        return Err(Error::GridTooCoarse(5.0 * t_min / density));
    }
    let end = 5.0 * t_max;
    let floor = 5.0 * t_min / density;
    let mut s = vec![0.0];
    let mut x = 0.0f64;
    while x < end {
        x = (x + floor.max(x / density)).min(end);
        s.push(x);
    }
    Ok(s)
}

/// Occupation probabilities at a set of target times.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub targets: Vec<f64>,
    /// Gaussian average of `|psi_n|^2` at each target time.
    pub averaged: Vec<Vec<f64>>,
    /// `|psi_n(t)|^2` at each target time.
    pub instantaneous: Vec<Vec<f64>>,
    pub truncation: usize,
    /// Largest guard-band probability over the whole sweep.
    pub max_tail: f64,
    pub samples: usize,
}

impl SweepResult {
    pub fn averaged_moment(&self, k: usize, alpha: f64) -> f64 {
        weighted_moment(&self.averaged[k], alpha)
    }

    pub fn instantaneous_moment(&self, k: usize, alpha: f64) -> f64 {
        weighted_moment(&self.instantaneous[k], alpha)
    }
}

/// Propagates `e_0` once across the sample grid of [`sample_grid`] (plus the
/// targets), accumulating Gaussian averages of `|psi_n|^2` at every target.
pub fn gaussian_sweep(
    j: &JacobiMatrix,
    n: usize,
    targets: &[f64],
    density: f64,
    params: &PropagationParams,
) -> Result<SweepResult> {
    if targets.is_empty() || targets.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidArgument("targets must be positive".into()));
    }
    let t_min = targets.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_max = targets.iter().cloned().fold(0.0, f64::max);
    let mut s = sample_grid(t_min, t_max, density)?;
    s.extend_from_slice(targets);
    s.sort_by(f64::total_cmp);
    s.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    let weights: Vec<Vec<f64>> = targets.iter().map(|&t| kernel_weights(&s, t)).collect();
    let totals: Vec<f64> = weights.iter().map(|w| w.iter().sum()).collect();

    let mut prop = Propagator::from_ground(j, n, *params)?;
    let n = prop.len();
    let mut averaged = vec![vec![0.0; n]; targets.len()];
    let mut instantaneous = vec![Vec::new(); targets.len()];
    for (i, &si) in s.iter().enumerate() {
        prop.advance(si - prop.time())?;
        let (lo, hi) = prop.window();
        let psi = prop.state();
        for (k, acc) in averaged.iter_mut().enumerate() {
            let w = weights[k][i];
            if w == 0.0 {
                continue;
            }
            for m in lo..hi {
                acc[m] += w * psi[m].norm_sqr();
            }
        }
        for (k, &t) in targets.iter().enumerate() {
            if (si - t).abs() <= 1e-12 * t.max(1.0) && instantaneous[k].is_empty() {
                instantaneous[k] = psi.iter().map(|a| a.norm_sqr()).collect();
            }
        }
    }
    for (acc, total) in averaged.iter_mut().zip(&totals) {
        for v in acc.iter_mut() {
            *v /= total;
        }
    }
    Ok(SweepResult {
        targets: targets.to_vec(),
        averaged,
        instantaneous,
        truncation: n,
        max_tail: prop.max_tail(),
        samples: s.len(),
    })
}

/// One entry of a truncated-moment table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedRow {
    pub omega: f64,
    pub n: usize,
    pub alpha: f64,
    /// `sum_{m <= n} m^alpha <|psi_m|^2>` (Gaussian average up to `1/omega`).
    pub averaged: f64,
    /// Same sum without time averaging.
    pub instantaneous: f64,
}

fn partial_moment(probs: &[f64], n: usize, alpha: f64) -> f64 {
    let top = (n + 1).min(probs.len());
    weighted_moment(&probs[..top], alpha)
}

/// `nu_alpha(N, omega)` for every combination, with `t = 1/omega`.
pub fn truncated_moments(
    j: &JacobiMatrix,
    n: usize,
    alphas: &[f64],
    n_list: &[usize],
    omegas: &[f64],
    density: f64,
    params: &PropagationParams,
) -> Result<(Vec<TruncatedRow>, SweepResult)> {
    if omegas.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidArgument("omega must be positive".into()));
    }
    let targets: Vec<f64> = omegas.iter().map(|w| 1.0 / w).collect();
    let sweep = gaussian_sweep(j, n, &targets, density, params)?;
    Ok((truncated_rows(&sweep, alphas, n_list), sweep))
}

/// Partial sums of a sweep whose targets are `1/omega`.
pub fn truncated_rows(sweep: &SweepResult, alphas: &[f64], n_list: &[usize]) -> Vec<TruncatedRow> {
    let mut rows = Vec::new();
    for (k, &t) in sweep.targets.iter().enumerate() {
        for &cut in n_list {
            for &alpha in alphas {
                rows.push(TruncatedRow {
                    omega: 1.0 / t,
                    n: cut,
                    alpha,
                    averaged: partial_moment(&sweep.averaged[k], cut, alpha),
                    instantaneous: partial_moment(&sweep.instantaneous[k], cut, alpha),
                });
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::{jacobi_arcsine, jacobi_julia};

    fn uniform(from: f64, to: f64, step: f64) -> Vec<f64> {
        let n = ((to - from) / step).round() as usize;
        (0..=n).map(|i| from + i as f64 * step).collect()
    }

    #[test]
    fn constants_and_cosines() {
        let t = 2.0;
        let s = uniform(0.0, 10.0, 0.1);
        let one = vec![1.0; s.len()];
        assert!((gaussian_average(&s, &one, t, AverageMode::Even).unwrap() - 1.0).abs() < 1e-15);
        for a in [0.5, 2.0, 5.0] {
            let f: Vec<f64> = s.iter().map(|x| (a * x).cos()).collect();
            let avg = gaussian_average(&s, &f, t, AverageMode::Even).unwrap();
            assert!((avg - (-a * a * t * t / 4.0).exp()).abs() < 1e-6, "a={a}");
        }
    }

    #[test]
    fn odd_function_on_full_line() {
        let s = uniform(-10.0, 10.0, 0.1);
        let f = s.clone();
        assert!(gaussian_average(&s, &f, 2.0, AverageMode::FullLine).unwrap().abs() < 1e-14);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let s = uniform(0.0, 10.0, 0.5);
        let f = vec![1.0; s.len()];
        assert!(matches!(gaussian_average(&s, &f, 2.0, AverageMode::Even), Err(Error::GridTooCoarse(_))));
        let short = uniform(0.0, 5.0, 0.05);
        let g = vec![1.0; short.len()];
        assert!(matches!(gaussian_average(&short, &g, 2.0, AverageMode::Even), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn sample_grid_meets_step_rule() {
        let s = sample_grid(10.0, 1000.0, 100.0).unwrap();
        for t in [10.0, 37.0, 1000.0] {
            let f = vec![1.0; s.len()];
            assert!(gaussian_average(&s, &f, t, AverageMode::Even).is_ok(), "t={t}");
        }
    }

    #[test]
    fn sweep_conserves_probability() {
        let j = jacobi_julia(2.9, 600).unwrap();
        let r = gaussian_sweep(&j, 600, &[5.0, 50.0], 200.0, &PropagationParams::default()).unwrap();
        for k in 0..2 {
            assert!((r.averaged_moment(k, 0.0) - 1.0).abs() < 1e-10);
            assert!((r.instantaneous_moment(k, 0.0) - 1.0).abs() < 1e-10);
        }
        assert!(r.max_tail < 1e-12);
    }

    #[test]
    fn truncated_table_reaches_one() {
        let j = jacobi_arcsine(200);
        let (rows, _) = truncated_moments(&j, 200, &[0.0], &[0, 5, 150], &[0.1, 1.0], 200.0, &PropagationParams::default())
            .unwrap();
        let full: Vec<_> = rows.iter().filter(|r| r.n == 150).collect();
        assert!(full.iter().all(|r| (r.averaged - 1.0).abs() < 1e-9));
        let short = rows.iter().find(|r| r.n == 0 && (r.omega - 1.0).abs() < 1e-15).unwrap();
        assert!(short.averaged < 1.0 && short.averaged > 0.0);
    }
}
