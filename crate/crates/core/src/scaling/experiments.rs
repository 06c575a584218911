//! Headline experiments: Julia relation, equivalence classes, three-map
//! family and barrier bound.

use serde::{Deserialize, Serialize};

use super::exponents::{fit_beta, reference_dimension, Averaging, BetaCurve, REFERENCE_LEVELS};
use super::fit::FitWindow;
use super::source::{par_map, Operator, SweepOptions};
use crate::dimensions::{dq_cylinder, dq_linear_exact};
use crate::error::{Error, Result};
use crate::jacobi::BarrierSpec;
use crate::measures::{AffineMap, LinearIfs, MeasureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JuliaRow {
    pub alpha: f64,
    pub beta: f64,
    pub beta_ci: f64,
    /// `D_{1 - alpha}`.
    pub dimension: f64,
    pub gap: f64,
    /// Combined uncertainty of `beta` and the dimension estimate.
    pub ci: f64,
}

/// `beta(alpha)` against `D_{1-alpha}` for the Julia measure of `lambda`.
pub fn verify_julia_relation(
    lambda: f64,
    alphas: &[f64],
    t_grid: &[f64],
    averaging: Averaging,
    window: &FitWindow,
    opts: &SweepOptions,
) -> Result<Vec<JuliaRow>> {
    if alphas.iter().any(|&a| a == 0.0) {
        return Err(Error::InvalidArgument("beta is undefined at alpha = 0".into()));
    }
    let spec = MeasureSpec::julia(lambda)?;
    let curve = fit_beta(&Operator::Measure(spec.clone()), alphas, t_grid, averaging, window, opts)?;
    alphas
        .iter()
        .zip(&curve.fits)
        .map(|(&alpha, fit)| {
            let d = dq_cylinder(&spec, 1.0 - alpha, REFERENCE_LEVELS.0, REFERENCE_LEVELS.1)?;
            Ok(JuliaRow {
                alpha,
                beta: fit.exponent,
                beta_ci: fit.ci(),
                dimension: d.value,
                gap: fit.exponent - d.value,
                ci: fit.ci() + d.residual,
            })
        })
        .collect()
}

/// Two-map member of the class `pi_i = delta_i^{D_0}` with first ratio
/// `delta1`; the second ratio solves `delta1^{D_0} + delta2^{D_0} = 1`.
pub fn class_member(d0: f64, delta1: f64) -> Result<LinearIfs> {
    if !(d0 > 0.0 && d0 <= 1.0) || !(delta1 > 0.0 && delta1 < 1.0) {
        return Err(Error::InvalidArgument(format!("class D0 = {d0}, delta1 = {delta1}")));
    }
    let p1 = delta1.powf(d0);
    let p2 = 1.0 - p1;
    let delta2 = p2.powf(1.0 / d0);
    let ifs = LinearIfs::two_map_unit(delta1, delta2, p1, p2)?;
    if !ifs.is_disconnected() {
        return Err(Error::OverlappingIfs);
    }
    Ok(ifs)
}

fn in_class(ifs: &LinearIfs, d0: f64) -> bool {
    let sum: f64 = ifs.maps().iter().map(|m| m.delta.powf(d0)).sum();
    ifs.is_disconnected()
        && (sum - 1.0).abs() <= 1e-10
        && ifs.maps().iter().zip(ifs.probs()).all(|(m, p)| (p - m.delta.powf(d0)).abs() <= 1e-10)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassResult {
    pub d0: f64,
    pub curves: Vec<BetaCurve>,
    /// Largest `|beta_i(alpha) - beta_j(alpha)|` over alpha, per pair.
    pub deviation: Vec<Vec<f64>>,
    pub max_deviation: f64,
}

fn deviations(curves: &[BetaCurve]) -> (Vec<Vec<f64>>, f64) {
    let m = curves.len();
    let mut dev = vec![vec![0.0; m]; m];
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for k in 0..m {
            let d = curves[i]
                .fits
                .iter()
                .zip(&curves[k].fits)
                .map(|(a, b)| (a.exponent - b.exponent).abs())
                .fold(0.0, f64::max);
            dev[i][k] = d;
            worst = worst.max(d);
        }
    }
    (dev, worst)
}

/// `beta(alpha)` for every member of one uniform-Gibbs class.
pub fn equivalence_class_experiment(
    d0: f64,
    members: &[LinearIfs],
    alphas: &[f64],
    t_grid: &[f64],
    averaging: Averaging,
    window: &FitWindow,
    opts: &SweepOptions,
) -> Result<ClassResult> {
    if let Some(i) = members.iter().position(|m| !in_class(m, d0)) {
        return Err(Error::NotInClass(i));
    }
    let curves = par_map(members, |m| {
        fit_beta(&Operator::Measure(MeasureSpec::LinearIfs(m.clone())), alphas, t_grid, averaging, window, opts)
    })?;
    let (deviation, max_deviation) = deviations(&curves);
    Ok(ClassResult { d0, curves, deviation, max_deviation })
}

/// Three maps of ratio `delta` and weight 1/3 on `[-1, 1]`: images at both
/// ends and a central band centred at `offset`.
pub fn three_map(delta: f64, offset: f64) -> Result<LinearIfs> {
    if !(delta > 0.0 && delta < 1.0 / 3.0) {
        return Err(Error::ContractionOutOfRange(delta));
    }
    if !(offset.abs() < 1.0 - 3.0 * delta) {
        return Err(Error::OverlappingBands);
    }
    let maps = vec![
        AffineMap { delta, theta: delta - 1.0 },
        AffineMap { delta, theta: offset },
        AffineMap { delta, theta: 1.0 - delta },
    ];
    LinearIfs::new(maps, vec![1.0 / 3.0; 3])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeMapResult {
    pub delta: f64,
    pub offsets: Vec<f64>,
    pub curves: Vec<BetaCurve>,
    /// Per alpha: largest `|beta_0 - beta_k| - (ci_0 + ci_k)` over `k >= 1`.
    pub separation: Vec<f64>,
    pub separated: bool,
    /// All placements share the exact `D_q` spectrum.
    pub spectra_equal: bool,
}

/// `beta(alpha)` for several central-band placements; `offsets[0]` is the
/// reference (usually the symmetric placement 0).
pub fn three_map_counterexample(
    delta: f64,
    offsets: &[f64],
    alphas: &[f64],
    t_grid: &[f64],
    averaging: Averaging,
    window: &FitWindow,
    opts: &SweepOptions,
) -> Result<ThreeMapResult> {
    if offsets.len() < 2 {
        return Err(Error::InvalidArgument("need at least two placements".into()));
    }
    let family = offsets.iter().map(|&c| three_map(delta, c)).collect::<Result<Vec<_>>>()?;
    let mut spectra_equal = true;
    for q in [-2.0, 0.0, 0.5, 1.0, 2.0, 4.0] {
        let reference = dq_linear_exact(&family[0], q)?;
        for m in &family[1..] {
            spectra_equal &= (dq_linear_exact(m, q)? - reference).abs() <= 1e-12;
        }
    }
    let curves = par_map(&family, |m| {
        fit_beta(&Operator::Measure(MeasureSpec::LinearIfs(m.clone())), alphas, t_grid, averaging, window, opts)
    })?;
    let separation: Vec<f64> = (0..alphas.len())
        .map(|a| {
            let base = &curves[0].fits[a];
            curves[1..]
                .iter()
                .map(|c| (c.fits[a].exponent - base.exponent).abs() - (c.fits[a].ci() + base.ci()))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let separated = separation.iter().any(|&s| s > 0.0);
    Ok(ThreeMapResult { delta, offsets: offsets.to_vec(), curves, separation, separated, spectra_equal })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierRow {
    pub alpha: f64,
    pub beta: f64,
    pub slope_inf: f64,
    pub slope_sup: f64,
    pub ci: f64,
    /// `(alpha + 1) / (2 eta + alpha + 1)`.
    pub bound: f64,
    /// `slope_inf <= bound + ci`.
    pub below_bound: bool,
    /// `|slope_sup - 1| <= 0.1`.
    pub ballistic_sup: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierResult {
    pub rows: Vec<BarrierRow>,
    pub curve: BetaCurve,
}

pub fn barrier_bound(alpha: f64, eta: f64) -> f64 {
    (alpha + 1.0) / (2.0 * eta + alpha + 1.0)
}

/// Growth envelopes of the sparse-barrier model against its lower-exponent
/// bound. The bound holds for almost every `theta`, so the comparison is
/// advisory.
pub fn barrier_experiment(
    spec: &BarrierSpec,
    alphas: &[f64],
    t_grid: &[f64],
    averaging: Averaging,
    window: &FitWindow,
    opts: &SweepOptions,
) -> Result<BarrierResult> {
    if alphas.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidArgument("alpha must be positive".into()));
    }
    let spec = spec.clone().validate()?;
    let curve = fit_beta(&Operator::Barrier(spec.clone()), alphas, t_grid, averaging, window, opts)?;
    let rows = alphas
        .iter()
        .zip(&curve.fits)
        .map(|(&alpha, f)| {
            let bound = barrier_bound(alpha, spec.eta);
            BarrierRow {
                alpha,
                beta: f.exponent,
                slope_inf: f.slope_inf,
                slope_sup: f.slope_sup,
                ci: f.ci(),
                bound,
                below_bound: f.slope_inf <= bound + f.ci(),
                ballistic_sup: (f.slope_sup - 1.0).abs() <= 0.1,
            }
        })
        .collect();
    Ok(BarrierResult { rows, curve })
}

/// Reference `D_q` used by callers that only hold a measure.
pub fn class_dimension(spec: &MeasureSpec) -> Result<f64> {
    reference_dimension(spec, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn members_of_the_two_fifths_class() {
        let d0 = 2f64.ln() / (5f64.ln() - 2f64.ln());
        let b = class_member(d0, 0.3).unwrap();
        assert!((b.probs()[0] - 0.4022).abs() < 1e-4);
        assert!((b.maps()[1].delta - 0.5065).abs() < 1e-4);
        assert!((b.probs()[1] - 0.5978).abs() < 1e-4);
        assert!(in_class(&b, d0));
        let a = LinearIfs::two_map_unit(0.4, 0.4, 0.5, 0.5).unwrap();
        assert!(in_class(&a, d0));
        let off = LinearIfs::two_map_unit(0.3, 0.5065, 0.5, 0.5).unwrap();
        let r = equivalence_class_experiment(d0, &[a, off], &[1.0], &[1.0, 10.0, 100.0], Averaging::Gaussian, &FitWindow::default(), &SweepOptions::default());
        assert_eq!(r.unwrap_err(), Error::NotInClass(1));
    }

    #[test]
    fn three_map_placements() {
        let d0 = 2f64.ln() / (5f64.ln() - 2f64.ln());
        let delta = 3f64.powf(-1.0 / d0);
        assert!((delta - 0.234_034_567_592_853).abs() < 1e-12);
        let sym = three_map(delta, 0.0).unwrap();
        assert_eq!(sym.hull(), (-1.0, 1.0));
        assert!((dq_linear_exact(&sym, 2.0).unwrap() - 3f64.ln() / (1.0 / delta).ln()).abs() < 1e-12);
        assert_eq!(three_map(delta, 0.3), Err(Error::OverlappingBands));
    }

    #[test]
    fn barrier_bound_values() {
        assert!((barrier_bound(2.0, 1.0) - 0.6).abs() < 1e-15);
        assert_eq!(barrier_bound(1.0, 0.0), 1.0);
    }

    #[test]
    fn zero_alpha_is_rejected() {
        let r = verify_julia_relation(2.9, &[0.0], &[1.0, 10.0, 100.0], Averaging::Gaussian, &FitWindow::default(), &SweepOptions::default());
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }
}
