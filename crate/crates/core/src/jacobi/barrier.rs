//! Free Jacobi matrix with a sparse set of growing barriers.

use serde::{Deserialize, Serialize};

use super::{JacobiMatrix, Route};
use crate::error::{Error, Result};

/// Discrete Schroedinger operator `x p_k = V(k) p_k + p_{k-1} + p_{k+1}` with
/// `V(k) = theta [k = 0] + k^eta [k in B]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub theta: f64,
    pub theta_range: (f64, f64),
    pub eta: f64,
    pub sparseness: f64,
    pub sites: Vec<usize>,
    pub size: usize,
}

impl BarrierSpec {
    /// Spec with `theta` at the centre of `theta_range`.
    pub fn new(theta_range: (f64, f64), eta: f64, sparseness: f64, sites: Vec<usize>, size: usize) -> Result<Self> {
        let theta = 0.5 * (theta_range.0 + theta_range.1);
        Self { theta, theta_range, eta, sparseness, sites, size }.validate()
    }

    /// Barrier sites `first, ceil(a first), ceil(a ceil(a first)), ...` below `size`.
    pub fn geometric_sites(first: usize, sparseness: f64, size: usize) -> Vec<usize> {
        let mut sites = Vec::new();
        let mut l = first.max(1);
        while l < size {
            sites.push(l);
            l = ((l as f64) * sparseness).ceil() as usize;
        }
        sites
    }

    pub fn validate(self) -> Result<Self> {
        let (t0, t1) = self.theta_range;
        if !(0.0 < t0 && t0 < t1) || !(t0..=t1).contains(&self.theta) {
            return Err(Error::InvalidArgument(format!(
                "theta {} must lie in [theta0, theta1] with 0 < theta0 < theta1",
                self.theta
            )));
        }
        if !(self.eta >= 0.0) || !(self.sparseness > 1.0) {
            return Err(Error::InvalidArgument("eta must be >= 0 and sparseness > 1".into()));
        }
        for (i, w) in self.sites.windows(2).enumerate() {
            if w[1] <= w[0] || (w[1] as f64) < self.sparseness * w[0] as f64 {
                return Err(Error::SparsenessViolated(i + 1));
            }
        }
        if let Some(&last) = self.sites.last() {
            if self.size < last + 1 {
                return Err(Error::InvalidArgument(format!("size {} does not reach barrier site {last}", self.size)));
            }
        }
        if self.size == 0 {
            return Err(Error::InvalidArgument("size must be positive".into()));
        }
        Ok(self)
    }
}

pub fn jacobi_barrier(spec: &BarrierSpec) -> Result<JacobiMatrix> {
    let spec = spec.clone().validate()?;
    let mut diag = vec![0.0; spec.size];
    diag[0] = spec.theta;
    for &l in &spec.sites {
        diag[l] += (l as f64).powf(spec.eta);
    }
    let offdiag = vec![1.0; spec.size - 1];
    let mut j = JacobiMatrix::new(diag, offdiag, (-1.0, 1.0), Route::Barrier)?;
    j.hull = j.gershgorin();
    Ok(j)
}
