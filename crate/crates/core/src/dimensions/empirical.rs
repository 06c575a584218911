//! Correlation-sum estimates of `D_q` for atomic measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::JacobiMatrix;
use crate::scaling::{linear_fit, LineFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl EmpiricalMeasure {
    /// Sorts the points and normalizes the weights.
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::InvalidArgument("need equally many points and weights".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) || points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("weights must be positive and points finite".into()));
        }
        let total: f64 = weights.iter().sum();
        let mut pairs: Vec<(f64, f64)> = points.into_iter().zip(weights.into_iter().map(|w| w / total)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (points, weights) = pairs.into_iter().unzip();
        Ok(EmpiricalMeasure { points, weights })
    }

    pub fn uniform(points: Vec<f64>) -> Result<Self> {
        let w = vec![1.0; points.len()];
        Self::new(points, w)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn width(&self) -> f64 {
        self.points[self.points.len() - 1] - self.points[0]
    }

    /// `mu(B_omega(x_j))` for every point, by a sliding window.
    fn ball_masses(&self, omega: f64) -> Vec<f64> {
        let n = self.len();
        let mut prefix = vec![0.0; n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] + self.weights[i];
        }
        let mut lo = 0;
        let mut hi = 0;
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let x = self.points[j];
            while self.points[lo] < x - omega {
                lo += 1;
            }
            while hi < n && self.points[hi] <= x + omega {
                hi += 1;
            }
            out.push(prefix[hi] - prefix[lo]);
        }
        out
    }
}

/// Zero-counting measure of `p_n`: the `n` zeros with weight `1/n` each.
pub fn equilibrium_from_zeros(j: &JacobiMatrix, n: usize) -> Result<EmpiricalMeasure> {
    EmpiricalMeasure::uniform(j.poly_zeros(n)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalEstimate {
    pub value: f64,
    pub fit: LineFit,
    /// `log omega` range of the fitted window.
    pub window: (f64, f64),
}

/// Geometric grid from half the support width down `decades`, with
/// `per_decade` points.
pub fn default_omega_grid(m: &EmpiricalMeasure, decades: f64, per_decade: usize) -> Vec<f64> {
    let top = 0.5 * m.width();
    let count = (decades * per_decade as f64).round() as usize;
    (0..=count).map(|i| top * 10f64.powf(-(i as f64) / per_decade as f64)).rev().collect()
}

/// Slope of `log sum_j w_j mu(B_omega(x_j))^{q-1} / (q-1)` against
/// `log omega` (Shannon form at `q = 1`) over the central 60% of the
/// `log omega` range.
pub fn dq_empirical(m: &EmpiricalMeasure, q: f64, omega_grid: &[f64]) -> Result<EmpiricalEstimate> {
    let mut logs: Vec<f64> = omega_grid.iter().filter(|&&w| w > 0.0).map(|w| w.ln()).collect();
    logs.sort_by(f64::total_cmp);
    logs.dedup();
    let (first, last) = match (logs.first(), logs.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::ScaleRangeTooNarrow("empty omega grid".into())),
    };
    if (last - first) / std::f64::consts::LN_10 < 2.0 - 1e-9 {
        return Err(Error::ScaleRangeTooNarrow(format!(
            "{:.2} decades, need 2",
            (last - first) / std::f64::consts::LN_10
        )));
    }
    let from = first + 0.2 * (last - first);
    let to = last - 0.2 * (last - first);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &lw in logs.iter().filter(|&&lw| lw >= from - 1e-12 && lw <= to + 1e-12) {
        let masses = m.ball_masses(lw.exp());
        let y = if q == 1.0 {
            m.weights.iter().zip(&masses).map(|(w, b)| w * b.ln()).sum::<f64>()
        } else {
            m.weights.iter().zip(&masses).map(|(w, b)| w * b.powf(q - 1.0)).sum::<f64>().ln() / (q - 1.0)
        };
        xs.push(lw);
        ys.push(y);
    }
    if xs.len() < 3 {
        return Err(Error::ScaleRangeTooNarrow(format!("{} scales in the central window", xs.len())));
    }
    let fit = linear_fit(&xs, &ys)?;
    Ok(EmpiricalEstimate { value: fit.slope, fit, window: (from, to) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::jacobi_arcsine;
    use crate::measures::{atomic_approximation, MeasureSpec};

    #[test]
    fn arcsine_zeros() {
        let m = equilibrium_from_zeros(&jacobi_arcsine(10), 5).unwrap();
        for (k, x) in m.points().iter().enumerate() {
            let expect = -((2 * k + 1) as f64 * std::f64::consts::PI / 10.0).cos();
            assert!((x - expect).abs() < 1e-13);
        }
        assert!(m.weights().iter().all(|&w| (w - 0.2).abs() < 1e-15));
        let one = equilibrium_from_zeros(&jacobi_arcsine(10), 1).unwrap();
        assert_eq!(one.points(), &[0.0]);
    }

    #[test]
    fn lattice_is_one_dimensional() {
        let m = EmpiricalMeasure::uniform((0..20000).map(|i| i as f64 / 19999.0).collect()).unwrap();
        let grid = default_omega_grid(&m, 3.0, 8);
        for q in [0.5, 1.0, 2.0] {
            let e = dq_empirical(&m, q, &grid).unwrap();
            assert!((e.value - 1.0).abs() < 0.05, "q={q}: {}", e.value);
        }
    }

    #[test]
    fn cantor_atoms() {
        let d = atomic_approximation(&MeasureSpec::cantor_thirds(), 14).unwrap();
        let m = EmpiricalMeasure::new(d.atoms.iter().map(|a| a.x).collect(), d.atoms.iter().map(|a| a.w).collect())
            .unwrap();
        let e = dq_empirical(&m, 2.0, &default_omega_grid(&m, 5.0, 8)).unwrap();
        assert!((e.value - 2f64.ln() / 3f64.ln()).abs() < 0.02, "{}", e.value);
    }

    #[test]
    fn narrow_range_is_rejected() {
        let m = EmpiricalMeasure::uniform(vec![0.0, 0.5, 1.0]).unwrap();
        assert!(matches!(dq_empirical(&m, 2.0, &[0.1, 0.2, 0.4]), Err(Error::ScaleRangeTooNarrow(_))));
    }
}
