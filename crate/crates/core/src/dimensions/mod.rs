//! Generalized dimensions `D_q`.

mod empirical;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{cylinders, LinearIfs, MeasureSpec};
use crate::scaling::linear_fit;

pub use empirical::{default_omega_grid, dq_empirical, equilibrium_from_zeros, EmpiricalEstimate, EmpiricalMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionMethod {
    ExactIfs,
    Cylinder,
    Empirical,
}

impl DimensionMethod {
    pub fn name(self) -> &'static str {
        match self {
            DimensionMethod::ExactIfs => "exact_ifs",
            DimensionMethod::Cylinder => "cylinder",
            DimensionMethod::Empirical => "empirical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSpectrum {
    pub q_grid: Vec<f64>,
    pub d: Vec<f64>,
    pub method: DimensionMethod,
    /// Fit residual per q (0 for the exact route).
    pub residual: Vec<f64>,
    /// Levels (cylinder) or scales (empirical) used per q.
    pub levels: Vec<usize>,
}

impl DimensionSpectrum {
    /// Largest increase `D_{q2} - D_{q1}` over `q1 < q2`; spectra are
    /// non-increasing, so this should be at most the method tolerance.
    pub fn monotonicity_defect(&self) -> f64 {
        let mut order: Vec<usize> = (0..self.q_grid.len()).collect();
        order.sort_by(|&a, &b| self.q_grid[a].total_cmp(&self.q_grid[b]));
        let mut worst = 0.0f64;
        let mut running_min = f64::INFINITY;
        for i in order {
            worst = worst.max(self.d[i] - running_min);
            running_min = running_min.min(self.d[i]);
        }
        worst
    }
}

/// Root of a strictly monotone `f` on `[0, 2]`, widening the upper end.
fn abscissa(f: impl Fn(f64) -> f64) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = 2.0;
    let f_lo = f(lo);
    let mut f_hi = f(hi);
    let mut widen = 0;
    while f_lo.signum() == f_hi.signum() {
        if f_lo == 0.0 {
            return Ok(0.0);
        }
        widen += 1;
        if widen > 40 {
            return Err(Error::NoRootBracket);
        }
        hi *= 2.0;
        f_hi = f(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return Ok(mid);
        }
        if v.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solves `sum_i w_i^q l_i^{(1-q) x} = 1` for `x`; `q = 1` uses the
/// entropy over Lyapunov ratio.
fn partition_abscissa(weights: &[f64], lengths: &[f64], q: f64) -> Result<f64> {
    if q == 1.0 {
        let h: f64 = weights.iter().filter(|&&w| w > 0.0).map(|w| w * w.ln()).sum();
        let l: f64 = weights.iter().zip(lengths).filter(|(&w, _)| w > 0.0).map(|(w, l)| w * l.ln()).sum();
        return Ok(h / l);
    }
    let logs: Vec<(f64, f64)> =
        weights.iter().zip(lengths).filter(|(&w, _)| w > 0.0).map(|(w, l)| (q * w.ln(), (1.0 - q) * l.ln())).collect();
    abscissa(|x| logs.iter().map(|(a, b)| (a + b * x).exp()).sum::<f64>() - 1.0)
}

/// Exact `D_q` of a disconnected linear IFS measure.
pub fn dq_linear_exact(ifs: &LinearIfs, q: f64) -> Result<f64> {
    if !ifs.is_disconnected() {
        return Err(Error::OverlappingIfs);
    }
    let deltas: Vec<f64> = ifs.maps().iter().map(|m| m.delta).collect();
    partition_abscissa(ifs.probs(), &deltas, q)
}

pub fn spectrum_linear_exact(ifs: &LinearIfs, q_grid: &[f64]) -> Result<DimensionSpectrum> {
    let d = q_grid.iter().map(|&q| dq_linear_exact(ifs, q)).collect::<Result<Vec<_>>>()?;
    Ok(DimensionSpectrum {
        q_grid: q_grid.to_vec(),
        d,
        method: DimensionMethod::ExactIfs,
        residual: vec![0.0; q_grid.len()],
        levels: vec![1; q_grid.len()],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderEstimate {
    /// Extrapolation of the per-level abscissae to `1/k -> 0`.
    pub value: f64,
    pub per_level: Vec<(usize, f64)>,
    pub residual: f64,
    /// Per-level values move monotonically in `k`.
    pub monotone: bool,
}

/// `log sum_sigma pi_sigma^q l_sigma^{(1-q) x}` over a cover.
fn log_partition(terms: &[(f64, f64)], x: f64) -> f64 {
    let top = terms.iter().map(|(a, b)| a + b * x).fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|(a, b)| (a + b * x - top).exp()).sum::<f64>().ln()
}

fn cover_terms(spec: &MeasureSpec, k: usize, q: f64) -> Result<(Vec<(f64, f64)>, f64, f64)> {
    let width = spec.hull_width();
    let cover = cylinders(spec, k)?;
    let mut spans: Vec<(f64, f64)> = cover.cells.iter().map(|c| (c.lo, c.hi)).collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    // cells may touch (interval support) but must not overlap
    if spans.windows(2).any(|w| w[0].1 > w[1].0 + 1e-12 * width) {
        return Err(Error::OverlapDetected(k));
    }
    let live = cover.cells.iter().filter(|c| c.weight > 0.0);
    let terms = live.clone().map(|c| (q * c.weight.ln(), (1.0 - q) * c.length().ln())).collect();
    let entropy = live.clone().map(|c| c.weight * c.weight.ln()).sum();
    let lyapunov = live.map(|c| c.weight * c.length().ln()).sum();
    Ok((terms, entropy, lyapunov))
}

/// `D_q` from cylinder partition functions `Z_k(x)`, extrapolated in `1/k`.
///
/// The level-k value solves `Z_k(x) = Z_{k-1}(x)`, which removes the
/// level-independent prefactor of `Z_k` (hull size, edge cells); for a
/// self-similar cover it is exact at every level.
pub fn dq_cylinder(spec: &MeasureSpec, q: f64, k_min: usize, k_max: usize) -> Result<CylinderEstimate> {
    if k_min == 0 || k_max < k_min {
        return Err(Error::InvalidArgument(format!("levels {k_min}..{k_max}")));
    }
    let mut per_level = Vec::new();
    let mut prev = cover_terms(spec, k_min - 1, q)?;
    for k in k_min..=k_max {
        let cur = cover_terms(spec, k, q)?;
        let x = if q == 1.0 {
            (cur.1 - prev.1) / (cur.2 - prev.2)
        } else {
            abscissa(|x| log_partition(&cur.0, x) - log_partition(&prev.0, x))?
        };
        per_level.push((k, x));
        prev = cur;
    }
    let diffs: Vec<f64> = per_level.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let monotone = diffs.iter().all(|&d| d >= -1e-12) || diffs.iter().all(|&d| d <= 1e-12);
    if per_level.len() == 1 {
        return Ok(CylinderEstimate { value: per_level[0].1, per_level, residual: 0.0, monotone });
    }
    let xs: Vec<f64> = per_level.iter().map(|&(k, _)| 1.0 / k as f64).collect();
    let ys: Vec<f64> = per_level.iter().map(|&(_, v)| v).collect();
    let line = linear_fit(&xs, &ys)?;
    Ok(CylinderEstimate { value: line.intercept, per_level, residual: line.rms, monotone })
}

pub fn spectrum_cylinder(spec: &MeasureSpec, q_grid: &[f64], k_min: usize, k_max: usize) -> Result<DimensionSpectrum> {
    let mut d = Vec::new();
    let mut residual = Vec::new();
    for &q in q_grid {
        let e = dq_cylinder(spec, q, k_min, k_max)?;
        d.push(e.value);
        residual.push(e.residual);
    }
    Ok(DimensionSpectrum {
        q_grid: q_grid.to_vec(),
        d,
        method: DimensionMethod::Cylinder,
        residual,
        levels: vec![k_max - k_min + 1; q_grid.len()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class_a() -> LinearIfs {
        LinearIfs::two_map_unit(0.4, 0.4, 0.5, 0.5).unwrap()
    }

    #[test]
    fn cantor_spectrum_is_flat() {
        let c = LinearIfs::cantor_thirds();
        for q in [-2.0, 0.0, 0.5, 1.0, 2.0, 3.0] {
            assert!((dq_linear_exact(&c, q).unwrap() - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn two_fifths_class() {
        let d0 = 2f64.ln() / (5f64.ln() - 2f64.ln());
        for q in [-1.0, 0.5, 1.0, 2.0] {
            assert!((dq_linear_exact(&class_a(), q).unwrap() - d0).abs() < 1e-12);
        }
    }

    #[test]
    fn unequal_ratios_correlation_dimension() {
        let ifs = LinearIfs::two_map_unit(0.25, 0.5, 0.5, 0.5).unwrap();
        let expect = ((17f64.sqrt() - 1.0) / 2.0).log2();
        assert!((dq_linear_exact(&ifs, 2.0).unwrap() - expect).abs() < 1e-12);
        let s = spectrum_linear_exact(&ifs, &[-1.0, 0.0, 1.0, 2.0, 4.0]).unwrap();
        assert!(s.monotonicity_defect() <= 1e-12);
    }

    #[test]
    fn overlapping_ifs_is_rejected() {
        let ifs = LinearIfs::two_map_unit(0.6, 0.6, 0.5, 0.5).unwrap();
        assert_eq!(dq_linear_exact(&ifs, 2.0), Err(Error::OverlappingIfs));
    }

    #[test]
    fn cylinder_route_on_cantor_is_level_independent() {
        let spec = MeasureSpec::cantor_thirds();
        let e = dq_cylinder(&spec, 2.0, 3, 3).unwrap();
        assert!((e.value - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        let e = dq_cylinder(&spec, 0.5, 2, 8).unwrap();
        assert!((e.value - 2f64.ln() / 3f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn julia_two_fills_the_interval() {
        let spec = MeasureSpec::julia(2.0).unwrap();
        let e = dq_cylinder(&spec, 0.0, 6, 14).unwrap();
        assert!((e.value - 1.0).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn julia_correlation_dimension_levels() {
        let spec = MeasureSpec::julia(2.9).unwrap();
        let e = dq_cylinder(&spec, 2.0, 6, 14).unwrap();
        assert!(e.monotone, "{e:?}");
        let spread = e.per_level.iter().map(|p| p.1).fold(0.0, f64::max) - e.per_level.iter().map(|p| p.1).fold(1.0, f64::min);
        assert!(spread < 1e-4 && (e.value - e.per_level[8].1).abs() < 1e-4, "{e:?}");
        assert!(e.value > 0.3 && e.value < 1.0);
    }
}
