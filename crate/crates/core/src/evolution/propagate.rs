//! `psi(t) = exp(-i t J) psi(0)` by Chebyshev expansion.

use num_complex::Complex64;

use super::bessel::bessel_coefficients;
use crate::error::{Error, Result};
use crate::jacobi::JacobiMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationParams {
    /// Largest acceptable probability in the guard band at the truncation edge.
    pub tail_tol: f64,
    pub guard: usize,
    /// Chebyshev terms stop once `|J_k(r t)|` stays below this.
    pub bessel_tol: f64,
    pub max_terms: usize,
    /// Amplitudes below this are dropped from the active window.
    pub trim: f64,
}

impl Default for PropagationParams {
    fn default() -> Self {
        Self { tail_tol: 1e-12, guard: 16, bessel_tol: 1e-18, max_terms: usize::MAX, trim: 1e-16 }
    }
}

impl PropagationParams {
    /// Settings that keep the superexponential tail down to `~1e-280`.
    pub fn deep_tail() -> Self {
        Self { bessel_tol: 1e-290, trim: 1e-300, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tail_tol > 0.0 && self.bessel_tol > 0.0 && self.trim >= 0.0) || self.guard == 0 || self.max_terms == 0 {
            return Err(Error::InvalidArgument("propagation tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Amplitudes `psi_0 .. psi_{N-1}` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    pub t: f64,
    pub amps: Vec<Complex64>,
    /// Probability in the last `guard` sites of the truncation.
    pub tail_mass: f64,
    pub truncation: usize,
    /// Chebyshev terms used (summed over steps).
    pub terms: usize,
    /// Set when `tail_mass` exceeded the tolerance at the largest allowed size.
    pub truncation_too_small: bool,
}

impl WavePacket {
    pub fn norm_squared(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Errors with `TruncationTooSmall` when the packet was flagged.
    pub fn checked(self) -> Result<Self> {
        if self.truncation_too_small {
            Err(Error::TruncationTooSmall(self.tail_mass))
        } else {
            Ok(self)
        }
    }
}

/// Incremental propagator on the leading `n x n` block of a Jacobi matrix.
///
/// Only the window of sites holding amplitudes above `params.trim` is
/// updated, so the cost follows the extent of the wave, not `n`.
#[derive(Debug, Clone)]
pub struct Propagator {
    centre: f64,
    radius: f64,
    diag: Vec<f64>,
    off: Vec<f64>,
    psi: Vec<Complex64>,
    lo: usize,
    hi: usize,
    t: f64,
    terms: usize,
    params: PropagationParams,
    max_tail: f64,
    /// Scratch vectors, zero outside the active window between calls.
    scratch: [Vec<Complex64>; 4],
}

impl Propagator {
    pub fn new(j: &JacobiMatrix, n: usize, initial: &[Complex64], params: PropagationParams) -> Result<Self> {
        params.validate()?;
        let n = n.min(j.len());
        if n == 0 || initial.len() > n {
            return Err(Error::InvalidArgument(format!(
                "initial vector of length {} does not fit a truncation of {n}",
                initial.len()
            )));
        }
        let hull = spectral_enclosure(j, n);
        let centre = 0.5 * (hull.0 + hull.1);
        let radius = 0.5 * (hull.1 - hull.0);
        let diag: Vec<f64> = j.diag[..n].iter().map(|a| (a - centre) / radius).collect();
        let off: Vec<f64> = j.offdiag[..n - 1].iter().map(|b| b / radius).collect();
        let mut psi = vec![Complex64::new(0.0, 0.0); n];
        psi[..initial.len()].copy_from_slice(initial);
        let scratch = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n]);
        let mut p =
            Self { centre, radius, diag, off, psi, lo: 0, hi: n, t: 0.0, terms: 0, params, max_tail: 0.0, scratch };
        p.trim();
        p.max_tail = p.tail_mass();
        Ok(p)
    }

    /// Propagator started from `e_0`.
    pub fn from_ground(j: &JacobiMatrix, n: usize, params: PropagationParams) -> Result<Self> {
        Self::new(j, n, &[Complex64::new(1.0, 0.0)], params)
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[Complex64] {
        &self.psi
    }

    /// Active window `[lo, hi)`.
    pub fn window(&self) -> (usize, usize) {
        (self.lo, self.hi)
    }

    /// Largest guard-band probability seen so far.
    pub fn max_tail(&self) -> f64 {
        self.max_tail
    }

    pub fn tail_mass(&self) -> f64 {
        let n = self.psi.len();
        self.psi[n.saturating_sub(self.params.guard)..].iter().map(|a| a.norm_sqr()).sum()
    }

    fn trim(&mut self) {
        let cut = self.params.trim;
        let first = self.psi[self.lo..self.hi].iter().position(|a| a.norm() > cut);
        match first {
            None => {
                self.lo = 0;
                self.hi = 0;
            }
            Some(f) => {
                let last = self.psi[self.lo..self.hi].iter().rposition(|a| a.norm() > cut).expect("non-empty");
                let (new_lo, new_hi) = (self.lo + f, self.lo + last + 1);
                for a in &mut self.psi[self.lo..new_lo] {
                    *a = Complex64::new(0.0, 0.0);
                }
                for a in &mut self.psi[new_hi..self.hi] {
                    *a = Complex64::new(0.0, 0.0);
                }
                self.lo = new_lo;
                self.hi = new_hi;
            }
        }
    }

    /// `w[lo..hi] = scale J^ v - u`.
    fn apply(&self, v: &[Complex64], u: &[Complex64], w: &mut [Complex64], lo: usize, hi: usize, scale: f64) {
        let n = self.psi.len();
        for m in lo..hi {
            let mut acc = v[m] * self.diag[m];
            if m > 0 {
                acc += v[m - 1] * self.off[m - 1];
            }
            if m + 1 < n {
                acc += v[m + 1] * self.off[m];
            }
            w[m] = acc * scale - u[m];
        }
    }

    /// Advances the state by `dt >= 0`.
    pub fn advance(&mut self, dt: f64) -> Result<()> {
        if !(dt >= 0.0) {
            return Err(Error::TimeNegative(dt));
        }
        if dt == 0.0 || self.hi == self.lo {
            self.t += dt;
            return Ok(());
        }
        let n = self.psi.len();
        let coeffs = bessel_coefficients(self.radius * dt, self.params.bessel_tol, self.params.max_terms);
        let [mut prev, mut cur, mut next, mut out] = std::mem::take(&mut self.scratch);
        let (mut lo, mut hi) = (self.lo, self.hi);
        for m in lo..hi {
            cur[m] = self.psi[m];
            out[m] = self.psi[m] * coeffs[0];
        }
        // (-i)^k cycles through 1, -i, -1, i.
        let phases = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        for (k, &c) in coeffs.iter().enumerate().skip(1) {
            let new_lo = lo.saturating_sub(1);
            let new_hi = (hi + 1).min(n);
            // T_1 = J^ T_0; T_{k+1} = 2 J^ T_k - T_{k-1}.
            let scale = if k == 1 { 1.0 } else { 2.0 };
            self.apply(&cur, &prev, &mut next, new_lo, new_hi, scale);
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
            lo = new_lo;
            hi = new_hi;
            let f = phases[k % 4] * (2.0 * c);
            for m in lo..hi {
                out[m] += cur[m] * f;
            }
        }
        let phase = Complex64::from_polar(1.0, -self.centre * dt);
        let zero = Complex64::new(0.0, 0.0);
        for m in lo..hi {
            self.psi[m] = out[m] * phase;
            prev[m] = zero;
            cur[m] = zero;
            next[m] = zero;
            out[m] = zero;
        }
        self.scratch = [prev, cur, next, out];
        self.lo = lo;
        self.hi = hi;
        self.trim();
        self.t += dt;
        self.terms += coeffs.len();
        self.max_tail = self.max_tail.max(self.tail_mass());
        Ok(())
    }

    pub fn packet(&self) -> WavePacket {
        let tail_mass = self.tail_mass();
        WavePacket {
            t: self.t,
            amps: self.psi.clone(),
            tail_mass,
            truncation: self.psi.len(),
            terms: self.terms,
            truncation_too_small: tail_mass > self.params.tail_tol,
        }
    }
}

/// Interval containing the spectrum of the leading `n x n` block. Matrices
/// without a measure behind them also get their Gershgorin bound.
fn spectral_enclosure(j: &JacobiMatrix, n: usize) -> (f64, f64) {
    let g = j.truncate(n).gershgorin();
    match j.route {
        crate::jacobi::Route::Imported(_) | crate::jacobi::Route::Barrier => (g.0.min(j.hull.0), g.1.max(j.hull.1)),
        _ => j.hull,
    }
}

/// Initial truncation `ceil(1.2 r t) + 64`, with `r` the hull half-width.
pub fn initial_truncation(j: &JacobiMatrix, t: f64) -> usize {
    let r = 0.5 * (j.hull.1 - j.hull.0);
    (1.2 * r * t).ceil() as usize + 64
}

/// `psi(t)` started from `e_0`. The truncation starts at
/// [`initial_truncation`] and doubles, up to the size of `j`, until the
/// guard band holds at most `tail_tol`; the packet is flagged otherwise.
pub fn propagate(j: &JacobiMatrix, t: f64, params: &PropagationParams) -> Result<WavePacket> {
    if !(t >= 0.0) {
        return Err(Error::TimeNegative(t));
    }
    params.validate()?;
    let mut n = initial_truncation(j, t).min(j.len());
    loop {
        let mut p = Propagator::from_ground(j, n, *params)?;
        p.advance(t)?;
        let packet = p.packet();
        if !packet.truncation_too_small || n == j.len() {
            return Ok(packet);
        }
        n = (2 * n).min(j.len());
    }
}

/// `sum_n n^alpha |psi_n|^2` for each `alpha` (with `0^alpha = 0` for
/// `alpha > 0`).
pub fn position_moments(packet: &WavePacket, alphas: &[f64]) -> Vec<f64> {
    let probs = packet.probabilities();
    alphas.iter().map(|&a| weighted_moment(&probs, a)).collect()
}

pub(crate) fn weighted_moment(probs: &[f64], alpha: f64) -> f64 {
    if alpha == 0.0 {
        return probs.iter().sum();
    }
    probs.iter().enumerate().skip(1).map(|(n, p)| (n as f64).powf(alpha) * p).sum()
}
