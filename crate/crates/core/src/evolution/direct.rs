//! Fourier-Bessel functions by quadrature over an atomic image of the measure.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jacobi::JacobiMatrix;
use crate::measures::{atomic_approximation, DiscreteMeasure, MeasureSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct DirectAmplitudes {
    /// `sum_atoms w p_n(x) exp(-i t x)` for `n = 0 ..= n_max`.
    pub amps: Vec<Complex64>,
    pub level: usize,
    /// Largest change against the same sum one level coarser.
    pub bound: f64,
}

fn amplitudes(d: &DiscreteMeasure, j: &JacobiMatrix, n_max: usize, t: f64) -> Result<Vec<Complex64>> {
    let mut amps = vec![Complex64::new(0.0, 0.0); n_max + 1];
    for a in &d.atoms {
        let p = j.eval_polys(a.x, n_max)?;
        let phase = Complex64::from_polar(a.w, -t * a.x);
        for (acc, v) in amps.iter_mut().zip(&p) {
            *acc += phase * *v;
        }
    }
    Ok(amps)
}

/// Direct quadrature of `int p_n(s) exp(-i t s) dmu(s)` over the level-k
/// atoms. Requires `t` times the largest level-k cell to be at most 0.1.
pub fn fb_direct(spec: &MeasureSpec, j: &JacobiMatrix, n_max: usize, t: f64, level: usize) -> Result<DirectAmplitudes> {
    if !(t >= 0.0) {
        return Err(Error::TimeNegative(t));
    }
    let d = atomic_approximation(spec, level)?;
    let diameter = d.max_cell_diameter.unwrap_or_else(|| spec.hull_width());
    if t * diameter > 0.1 {
        return Err(Error::ResolutionInsufficient(t * diameter));
    }
    let amps = amplitudes(&d, j, n_max, t)?;
    let bound = if level > 0 {
        let coarse = amplitudes(&atomic_approximation(spec, level - 1)?, j, n_max, t)?;
        amps.iter().zip(&coarse).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Ok(DirectAmplitudes { amps, level, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::{jacobi_arcsine, jacobi_julia};

    #[test]
    fn arcsine_ground_amplitude() {
        let d = fb_direct(&MeasureSpec::Arcsine, &jacobi_arcsine(10), 3, 1.0, 6).unwrap();
        assert!((d.amps[0].re - 0.765_197_686_557_966_6).abs() < 1e-12);
        assert!(d.amps[0].im.abs() < 1e-12);
    }

    #[test]
    fn orthogonality_at_time_zero() {
        let spec = MeasureSpec::julia(2.9).unwrap();
        let d = fb_direct(&spec, &jacobi_julia(2.9, 20).unwrap(), 10, 0.0, 6).unwrap();
        assert!((d.amps[0].re - 1.0).abs() < 1e-12);
        assert!(d.amps[1..].iter().all(|a| a.norm() < 1e-12));
    }

    #[test]
    fn coarse_atoms_are_rejected() {
        let spec = MeasureSpec::cantor_thirds();
        let j = crate::jacobi::jacobi_ifs_refined(&spec, 10).unwrap();
        assert!(matches!(fb_direct(&spec, &j, 3, 10.0, 2), Err(Error::ResolutionInsufficient(_))));
    }

    #[test]
    fn small_time_leading_order() {
        // J_n(t) ~ (-i t)^n b_0 ... b_{n-1} / n!
        let j = jacobi_julia(2.9, 20).unwrap();
        let spec = MeasureSpec::julia(2.9).unwrap();
        let t = 2e-2;
        let d = fb_direct(&spec, &j, 5, t, 6).unwrap();
        let mut lead = 1.0;
        for n in 1..=5 {
            lead *= j.offdiag[n - 1] * t / n as f64;
            let expect = Complex64::new(0.0, -1.0).powi(n as i32) * lead;
            assert!((d.amps[n] / expect - 1.0).norm() < 1e-2, "n={n}");
        }
    }
}
