//! Jacobi matrices of orthonormal polynomials.
//!
//! Convention: `s p_n(s) = b_n p_{n+1}(s) + a_n p_n(s) + b_{n-1} p_{n-1}(s)`
//! with `p_{-1} = 0`, `p_0 = 1`, and `b_n > 0`, so that `J` is symmetric and
//! the polynomials are orthonormal with respect to a probability measure.

mod barrier;
mod discrete;
mod eigen;
mod gamma;
mod moments;

pub use barrier::{jacobi_barrier, BarrierSpec};
pub use discrete::{
    gauss_rule, jacobi_arcsine, jacobi_for_measure, jacobi_from_discrete, jacobi_ifs_composite, jacobi_ifs_refined,
    jacobi_julia,
};
pub use eigen::{tridiagonal_eigen, tridiagonal_eigenvalues};
pub use gamma::{gamma_coefficients, GammaTensor};
pub use moments::jacobi_from_moments;

use std::fmt;

use crate::error::{Error, Result};
use crate::measures::CylinderCover;

/// How a Jacobi matrix was obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum Route {
    ClosedForm,
    /// Chebyshev algorithm on moments; `bits` is `None` for exact rationals.
    Moments { bits: Option<u32> },
    /// Orthogonal reduction of an atomic measure.
    Discrete { atoms: usize, max_cell_diameter: Option<f64> },
    /// Fixed point of Gauss rule + balance pushforward for linear IFS.
    IfsRefined { iterations: usize, change: f64 },
    /// Renormalization recursion of the Julia-set polynomials.
    JuliaRenormalization,
    Barrier,
    Imported(String),
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Route::ClosedForm => write!(f, "closed_form"),
            Route::Moments { bits: None } => write!(f, "moments_exact"),
            Route::Moments { bits: Some(b) } => write!(f, "moments_{b}bit"),
            Route::Discrete { atoms, max_cell_diameter } => match max_cell_diameter {
                Some(d) => write!(f, "discrete({atoms} atoms, resolution {d:e})"),
                None => write!(f, "discrete({atoms} atoms)"),
            },
            Route::IfsRefined { iterations, change } => {
                write!(f, "ifs_refined({iterations} iterations, change {change:e})")
            }
            Route::JuliaRenormalization => write!(f, "julia_renormalization"),
            Route::Barrier => write!(f, "barrier"),
            Route::Imported(s) => write!(f, "imported:{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiMatrix {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    /// Interval enclosing the spectrum of every leading submatrix.
    pub hull: (f64, f64),
    pub route: Route,
}

impl JacobiMatrix {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>, hull: (f64, f64), route: Route) -> Result<Self> {
        if diag.is_empty() || offdiag.len() + 1 != diag.len() {
            return Err(Error::InvalidArgument(format!(
                "jacobi matrix needs n diagonal and n-1 off-diagonal entries, got {} and {}",
                diag.len(),
                offdiag.len()
            )));
        }
        if let Some(k) = offdiag.iter().position(|&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::InvalidArgument(format!("off-diagonal b_{k} = {} is not positive", offdiag[k])));
        }
        if diag.iter().any(|a| !a.is_finite()) || !(hull.0 < hull.1) {
            return Err(Error::InvalidArgument("non-finite diagonal or empty hull".into()));
        }
        Ok(Self { diag, offdiag, hull, route })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Leading `n x n` block.
    pub fn truncate(&self, n: usize) -> JacobiMatrix {
        let n = n.clamp(1, self.len());
        JacobiMatrix {
            diag: self.diag[..n].to_vec(),
            offdiag: self.offdiag[..n - 1].to_vec(),
            hull: self.hull,
            route: self.route.clone(),
        }
    }

    /// Gershgorin enclosure `[min(a_n - r_n), max(a_n + r_n)]`.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag[i - 1] } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i] } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// `p_0(s) ..= p_{n_max}(s)` by forward recurrence.
    pub fn eval_polys(&self, s: f64, n_max: usize) -> Result<Vec<f64>> {
        if n_max >= self.len() {
            return Err(Error::InvalidArgument(format!(
                "degree {n_max} needs a Jacobi matrix of size {}, have {}",
                n_max + 1,
                self.len()
            )));
        }
        let mut p = Vec::with_capacity(n_max + 1);
        p.push(1.0);
        let mut prev = 0.0;
        let mut cur = 1.0;
        for n in 0..n_max {
            let back = if n > 0 { self.offdiag[n - 1] * prev } else { 0.0 };
            let next = ((s - self.diag[n]) * cur - back) / self.offdiag[n];
            if !(next.abs() <= 1e300) {
                return Err(Error::Overflow(n + 1));
            }
            p.push(next);
            prev = cur;
            cur = next;
        }
        Ok(p)
    }

    /// Sorted zeros of `p_n`: eigenvalues of the leading `n x n` block.
    pub fn poly_zeros(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidArgument(format!("zeros of p_{n} need 1 <= n <= {}", self.len())));
        }
        tridiagonal_eigenvalues(&self.diag[..n], &self.offdiag[..n - 1])
    }

    /// `S_N(s) = sum_{n=0}^{N} p_n(s)^2`.
    pub fn christoffel_sum(&self, s: f64, n: usize) -> Result<f64> {
        Ok(self.eval_polys(s, n)?.iter().map(|v| v * v).sum())
    }

    /// Running Christoffel sums `S_0 ..= S_N`.
    pub fn christoffel_sums(&self, s: f64, n: usize) -> Result<Vec<f64>> {
        let p = self.eval_polys(s, n)?;
        let mut acc = 0.0;
        Ok(p.iter()
            .map(|v| {
                acc += v * v;
                acc
            })
            .collect())
    }
}

/// Power-law exponent of `S_N(s)` in `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalGrowth {
    pub exponent: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares slope of `log S_N(s)` against `log N` over `n_grid`.
pub fn local_growth(j: &JacobiMatrix, s: f64, n_grid: &[usize]) -> Result<LocalGrowth> {
    let usable: Vec<usize> = n_grid.iter().copied().filter(|&n| n >= 1 && n < j.len()).collect();
    if usable.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} usable grid points", usable.len())));
    }
    let n_max = *usable.iter().max().expect("non-empty");
    let sums = j.christoffel_sums(s, n_max)?;
    let xs: Vec<f64> = usable.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|&n| sums[n].ln()).collect();
    let line = crate::scaling::linear_fit(&xs, &ys)?;
    Ok(LocalGrowth { exponent: line.slope, residual: line.rms, points: usable.len() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaEstimate {
    pub gamma: f64,
    /// Sample point achieving the maximum.
    pub at: f64,
    pub residual: f64,
    pub samples: usize,
}

/// Points of the support probed by [`gamma_sup_estimate`].
///
/// Cell endpoints always belong to the support. Cell midpoints are only used
/// when the cylinders overlap or touch; for gapped covers they generically
/// fall in gaps, where the polynomials grow exponentially.
pub fn support_samples(cover: &CylinderCover, gapped: bool) -> Vec<f64> {
    let mut xs = Vec::with_capacity(cover.cells.len() * 3);
    for c in &cover.cells {
        xs.push(c.lo);
        xs.push(c.hi);
        if !gapped {
            xs.push(0.5 * (c.lo + c.hi));
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));
    xs
}

/// `max_x d(x)` over support samples of the cover.
pub fn gamma_sup_estimate(
    j: &JacobiMatrix,
    cover: &CylinderCover,
    gapped: bool,
    n_grid: &[usize],
) -> Result<GammaEstimate> {
    let xs = support_samples(cover, gapped);
    if xs.is_empty() {
        return Err(Error::DegenerateFit("empty cover".into()));
    }
    let mut best: Option<GammaEstimate> = None;
    for &x in &xs {
        let g = local_growth(j, x, n_grid)?;
        if best.is_none_or(|b| g.exponent > b.gamma) {
            best = Some(GammaEstimate { gamma: g.exponent, at: x, residual: g.residual, samples: xs.len() });
        }
    }
    Ok(best.expect("non-empty samples"))
}
