//! Growth, decay, surmise and wavefront exponents.

use serde::{Deserialize, Serialize};

use super::fit::{fit_power_law, plane_fit, FitWindow, ScalingFit};
use super::source::{run_packets, run_sweep, Operator, SweepOptions};
use crate::dimensions::{dq_cylinder, dq_linear_exact};
use crate::error::{Error, Result};
use crate::evolution::truncated_rows;
use crate::measures::MeasureSpec;

/// Levels used when a Julia dimension is needed as a reference.
pub const REFERENCE_LEVELS: (usize, usize) = (6, 14);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    Gaussian,
    Instantaneous,
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.len() < 3 || t_grid.windows(2).any(|w| !(w[1] > w[0])) || !(t_grid[0] > 0.0) {
        return Err(Error::DegenerateFit("time grid must be positive, increasing, with 3 or more points".into()));
    }
    if (t_grid[t_grid.len() - 1] / t_grid[0]).log10() < 2.0 - 1e-9 {
        return Err(Error::DegenerateFit("time grid must span two decades".into()));
    }
    Ok(())
}

/// `D_q` of a measure: exact for disconnected linear IFS, cylinder estimate
/// for Julia sets, closed form for the arcsine law.
pub fn reference_dimension(spec: &MeasureSpec, q: f64) -> Result<f64> {
    match spec {
        MeasureSpec::Arcsine => Ok(if q <= 2.0 { 1.0 } else { q / (2.0 * (q - 1.0)) }),
        MeasureSpec::Julia(_) => Ok(dq_cylinder(spec, q, REFERENCE_LEVELS.0, REFERENCE_LEVELS.1)?.value),
        MeasureSpec::LinearIfs(ifs) => dq_linear_exact(ifs, q),
    }
}

/// `beta(alpha)` fits for one operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaCurve {
    pub alphas: Vec<f64>,
    /// Fits of `log nu_alpha` against `log t`, divided by `alpha`.
    pub fits: Vec<ScalingFit>,
    pub averaging: Averaging,
    pub times: Vec<f64>,
    /// `nu_alpha(t)`, one row per alpha.
    pub moments: Vec<Vec<f64>>,
    pub truncation: usize,
}

impl BetaCurve {
    pub fn beta(&self, alpha: f64) -> Option<&ScalingFit> {
        self.alphas.iter().position(|&a| a == alpha).map(|i| &self.fits[i])
    }
}

fn moment(probs: &[f64], alpha: f64) -> f64 {
    if alpha == 0.0 {
        return probs.iter().sum();
    }
    probs.iter().enumerate().skip(1).map(|(n, p)| (n as f64).powf(alpha) * p).sum()
}

/// Growth exponents `beta(alpha)`: slope of `log nu_alpha(t)` over
/// `alpha`. At `alpha = 0` the raw slope is reported.
pub fn fit_beta(
    op: &Operator,
    alphas: &[f64],
    t_grid: &[f64],
    averaging: Averaging,
    window: &FitWindow,
    opts: &SweepOptions,
) -> Result<BetaCurve> {
    check_grid(t_grid)?;
    if alphas.iter().any(|&a| !(a >= 0.0)) {
        return Err(Error::InvalidArgument("alpha must be non-negative".into()));
    }
    let (rows, truncation): (Vec<Vec<f64>>, usize) = match averaging {
        Averaging::Gaussian => {
            let s = run_sweep(op, t_grid, opts)?;
            (s.averaged, s.truncation)
        }
        Averaging::Instantaneous => {
            let s = run_packets(op, t_grid, opts)?;
            (s.probs, s.truncation)
        }
    };
    let mut fits = Vec::new();
    let mut moments = Vec::new();
    for &a in alphas {
        let nu: Vec<f64> = rows.iter().map(|p| moment(p, a)).collect();
        let f = fit_power_law(t_grid, &nu, window)?;
        fits.push(if a > 0.0 { f.scaled(a) } else { f });
        moments.push(nu);
    }
    Ok(BetaCurve { alphas: alphas.to_vec(), fits, averaging, times: t_grid.to_vec(), moments, truncation })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct D2Decay {
    /// Fit of `log A_G(|psi_0|^2)(t)` against `log t`.
    pub fit: ScalingFit,
    pub d2: f64,
    /// `slope + D_2`.
    pub gap: f64,
    pub times: Vec<f64>,
    pub averaged_return: Vec<f64>,
}

/// Compares the decay of the averaged return probability with `t^{-D_2}`.
pub fn d2_decay_check(op: &Operator, d2: f64, t_grid: &[f64], window: &FitWindow, opts: &SweepOptions) -> Result<D2Decay> {
    check_grid(t_grid)?;
    let s = run_sweep(op, t_grid, opts)?;
    let averaged_return: Vec<f64> = s.averaged.iter().map(|p| p[0]).collect();
    let fit = fit_power_law(t_grid, &averaged_return, window)?;
    Ok(D2Decay { gap: fit.exponent + d2, fit, d2, times: t_grid.to_vec(), averaged_return })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub omega: f64,
    pub n: usize,
    pub nu0: f64,
    /// `nu0 / ((N + 1) omega^{D_2})`.
    pub compensated: f64,
    pub in_mask: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KetzmerickFit {
    /// Fitted exponent of `N`.
    pub gamma: f64,
    /// Fitted exponent of `omega`.
    pub omega_exponent: f64,
    pub d2: f64,
    pub residual: f64,
    pub points: usize,
    pub surface: Vec<SurfacePoint>,
    /// `(max - min) / mean` of the compensated surface over the mask.
    pub variation: f64,
}

/// Lower edge of the scaling-region mask: ten times the probability floor.
pub const MASK_FLOOR: f64 = 10.0 * f64::EPSILON;
/// Upper edge: the plateau onset.
pub const MASK_CEILING: f64 = 0.5;

/// Fits `log nu_0(N, omega) = c + gamma log(N + 1) + d log omega` over the
/// points with `nu_0` in `[MASK_FLOOR, MASK_CEILING]`.
///
/// `nu_0(N, omega)` sums the `N + 1` functions `n = 0 ..= N`, so `N + 1` is
/// the count that scales; it agrees with `N` when `N >> 1`.
pub fn fit_ketzmerick_gamma(
    op: &Operator,
    d2: f64,
    omega_grid: &[f64],
    n_grid: &[usize],
    opts: &SweepOptions,
) -> Result<KetzmerickFit> {
    if omega_grid.iter().any(|&w| !(w > 0.0)) || n_grid.is_empty() {
        return Err(Error::InvalidArgument("omega must be positive and N non-empty".into()));
    }
    let targets: Vec<f64> = omega_grid.iter().map(|w| 1.0 / w).collect();
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| targets[a].total_cmp(&targets[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| targets[i]).collect();
    let sweep = run_sweep(op, &sorted, opts)?;
    let rows = truncated_rows(&sweep, &[0.0], n_grid);
    let mut surface = Vec::new();
    let (mut xs, mut ys, mut zs) = (Vec::new(), Vec::new(), Vec::new());
    for r in rows {
        let in_mask = r.n >= 1 && r.averaged >= MASK_FLOOR && r.averaged <= MASK_CEILING;
        let count = (r.n + 1) as f64;
        let compensated = r.averaged / (count * r.omega.powf(d2));
        if in_mask {
            xs.push(count.ln());
            ys.push(r.omega.ln());
            zs.push(r.averaged.ln());
        }
        surface.push(SurfacePoint { omega: r.omega, n: r.n, nu0: r.averaged, compensated, in_mask });
    }
    if xs.len() < 3 {
        return Err(Error::ScalingRegionEmpty);
    }
    let (_, gamma, omega_exponent, residual) = plane_fit(&xs, &ys, &zs)?;
    let masked: Vec<f64> = surface.iter().filter(|p| p.in_mask).map(|p| p.compensated).collect();
    let mean = masked.iter().sum::<f64>() / masked.len() as f64;
    let spread = masked.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - masked.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(KetzmerickFit { gamma, omega_exponent, d2, residual, points: xs.len(), surface, variation: spread / mean })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontTrace {
    pub times: Vec<f64>,
    pub fronts: Vec<usize>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wavefront {
    pub trace: FrontTrace,
    pub eta: ScalingFit,
}

pub const DEFAULT_FRONT_EPSILON: f64 = 1e-3;

/// `min { n : sum_{m > n} p_m < epsilon }`.
pub fn front_position(probs: &[f64], epsilon: f64) -> usize {
    let mut tail = 0.0;
    for n in (0..probs.len()).rev() {
        if tail + probs[n] >= epsilon {
            return n;
        }
        tail += probs[n];
    }
    0
}

/// Front `n_f(t)` and its algebraic exponent `eta`.
pub fn fit_wavefront(
    op: &Operator,
    t_grid: &[f64],
    epsilon: f64,
    window: &FitWindow,
    opts: &SweepOptions,
) -> Result<Wavefront> {
    if !(epsilon > 0.0 && epsilon <= 0.1) {
        return Err(Error::InvalidArgument(format!("front threshold {epsilon} outside (0, 0.1]")));
    }
    check_grid(t_grid)?;
    let s = run_packets(op, t_grid, opts)?;
    let mut fronts = Vec::new();
    for (t, p) in t_grid.iter().zip(&s.probs) {
        let f = front_position(p, epsilon);
        if f + opts.params.guard >= s.truncation {
            return Err(Error::FrontAtBoundary(*t));
        }
        fronts.push(f);
    }
    let ys: Vec<f64> = fronts.iter().map(|&f| f as f64).collect();
    let eta = fit_power_law(t_grid, &ys, window)?;
    Ok(Wavefront { trace: FrontTrace { times: t_grid.to_vec(), fronts, epsilon }, eta })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderDecay {
    pub front: usize,
    /// Slope of `log |psi_n|` on each band past the front.
    pub slopes: Vec<f64>,
    /// Every slope negative and each steeper than the previous.
    pub superexponential: bool,
}

/// Band-wise slopes of `log |psi_n|` beyond the front at one time.
pub fn order_decay(probs: &[f64], epsilon: f64, bands: usize, width: usize) -> Result<OrderDecay> {
    let front = front_position(probs, epsilon);
    let mut slopes = Vec::new();
    for b in 0..bands {
        let start = front + b * width;
        let end = start + width;
        if end > probs.len() || probs[start..end].iter().any(|&p| !(p > 0.0)) {
            return Err(Error::InvalidArgument(format!("amplitudes underflow before site {end}")));
        }
        let xs: Vec<f64> = (start..end).map(|n| n as f64).collect();
        let ys: Vec<f64> = probs[start..end].iter().map(|p| 0.5 * p.ln()).collect();
        slopes.push(super::linear_fit(&xs, &ys)?.slope);
    }
    let superexponential = slopes.iter().all(|&s| s < 0.0) && slopes.windows(2).all(|w| w[1] < w[0]);
    Ok(OrderDecay { front, slopes, superexponential })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{propagate, PropagationParams};
    use crate::jacobi::jacobi_arcsine;

    fn geometric(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
        let steps = ((hi / lo).log10() * per_decade as f64).round() as usize;
        (0..=steps).map(|i| lo * 10f64.powf(i as f64 / per_decade as f64)).collect()
    }

    #[test]
    fn arcsine_is_ballistic() {
        let op = Operator::Measure(MeasureSpec::Arcsine);
        let c = fit_beta(&op, &[0.0, 1.0, 2.0], &geometric(1.0, 100.0, 4), Averaging::Gaussian, &FitWindow::default(), &SweepOptions::default())
            .unwrap();
        assert!(c.fits[0].exponent.abs() < 1e-10);
        assert!((c.fits[2].exponent - 1.0).abs() < 0.01, "{:?}", c.fits[2]);
        assert!((c.fits[1].exponent - 1.0).abs() < 0.02, "{:?}", c.fits[1]);
    }

    #[test]
    fn front_of_ballistic_wave() {
        let op = Operator::Measure(MeasureSpec::Arcsine);
        let w = fit_wavefront(&op, &geometric(100.0, 10000.0, 4), 1e-3, &FitWindow::default(), &SweepOptions::default())
            .unwrap();
        assert!((w.eta.exponent - 1.0).abs() < 0.02, "{:?}", w.eta);
        assert!(w.trace.fronts.windows(2).all(|f| f[1] >= f[0]));
    }

    #[test]
    fn bessel_tail_is_superexponential() {
        let p = propagate(&jacobi_arcsine(400), 20.0, &PropagationParams::deep_tail()).unwrap();
        let d = order_decay(&p.probabilities(), 1e-3, 3, 10).unwrap();
        assert!(d.superexponential, "{d:?}");
    }

    #[test]
    fn front_position_counts_tail() {
        assert_eq!(front_position(&[0.5, 0.4, 0.0999, 0.0001], 1e-3), 2);
        assert_eq!(front_position(&[1.0], 1e-3), 0);
    }

    #[test]
    fn short_grid_is_rejected() {
        let op = Operator::Measure(MeasureSpec::Arcsine);
        assert!(fit_beta(&op, &[1.0], &[1.0, 2.0, 5.0], Averaging::Gaussian, &FitWindow::default(), &SweepOptions::default()).is_err());
    }
}
